//! Turn-based matches: Maker moves, the win is checked, then Breaker replies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::Serialize;
use thiserror::Error;

use super::transcript::{MoveRecord, Outcome, Transcript, TranscriptHeader};
use crate::board::{BoardError, BreakerMark, GameMode, GameState, Move, Player};
use crate::geometry::{GridPoint, LineKey};
use crate::schedule::Schedule;
use crate::strategies::{
    build_breaker, build_maker, BreakerStrategy, MakerStrategy, StrategyContext, StrategyError, StrategySpec,
};

/// Search limit for the default `max_steps`.
const MAX_STEP_SEARCH: u32 = 10_000_000;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{strategy} made an illegal move at t={t}: {source}")]
    IllegalMove { strategy: String, t: u32, source: BoardError },
    #[error("{strategy} played {played} points at t={t}, budget {budget}")]
    BudgetOverrun { strategy: String, t: u32, played: usize, budget: u64 },
    #[error("{strategy} failed at t={t}: {source}")]
    Strategy { strategy: String, t: u32, source: StrategyError },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl MatchError {
    /// Process exit code: 1 configuration, 2 illegal move, 3 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            MatchError::Config(_) => 1,
            MatchError::Strategy { source: StrategyError::Config(_), .. } => 1,
            MatchError::IllegalMove { .. } | MatchError::BudgetOverrun { .. } => 2,
            MatchError::Strategy { .. } | MatchError::Invariant(_) => 3,
        }
    }

    pub fn offending_point(&self) -> Option<GridPoint> {
        match self {
            MatchError::IllegalMove { source, .. } => source.offending_point(),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MatchConfig {
    pub mode: GameMode,
    pub maker_schedule: Schedule,
    pub breaker_schedule: Schedule,
    /// `None`: the first `t` with `m(t) >= n`, plus one.
    pub max_steps: Option<u32>,
    pub seed: u64,
    /// `None`: the smallest count either strategy reads, clamped to `2..=n`.
    pub line_threshold: Option<usize>,
    pub directed_occupies: bool,
}

impl MatchConfig {
    pub fn new(mode: GameMode, maker_schedule: Schedule, breaker_schedule: Schedule, seed: u64) -> Self {
        MatchConfig {
            mode,
            maker_schedule,
            breaker_schedule,
            max_steps: None,
            seed,
            line_threshold: None,
            directed_occupies: true,
        }
    }

    pub fn resolved_max_steps(&self) -> Result<u32, MatchError> {
        if let Some(s) = self.max_steps {
            return Ok(s);
        }
        self.maker_schedule
            .first_reaching(self.mode.n as u64, MAX_STEP_SEARCH)
            .map(|t| t + 1)
            .ok_or_else(|| MatchError::Config(format!("m(t) never reaches n = {}; set max_steps", self.mode.n)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepSummary {
    pub t: u32,
    pub maker_played: usize,
    pub breaker_played: usize,
    /// Largest Maker count on an active segment at the end of the timestep.
    pub max_active_count: usize,
    /// Active segments that Breaker's reply cut or closed.
    pub segments_split: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchResult {
    pub outcome: Outcome,
    pub tau: Option<u32>,
    pub m_tau: Option<u64>,
    pub steps: Vec<StepSummary>,
    pub maker_points: usize,
    pub breaker_points: usize,
}

impl MatchResult {
    pub fn maker_won(&self) -> bool {
        self.outcome.maker_won()
    }

    /// `m(tau) / n` when Maker won.
    pub fn m_tau_over_n(&self, n: usize) -> Option<f64> {
        self.m_tau.map(|m| m as f64 / n as f64)
    }
}

/// Applies moves to a board, enforces budgets and keeps the per-step summary.
/// Shared by live matches and replays so both produce the same result.
pub(crate) struct Referee {
    pub(crate) state: GameState,
    m: Schedule,
    b: Schedule,
    steps: Vec<StepSummary>,
    won_at: Option<u32>,
}

type Span = (LineKey, Option<i64>, Option<i64>);

impl Referee {
    pub(crate) fn new(
        mode: GameMode,
        m: Schedule,
        b: Schedule,
        line_threshold: usize,
        directed_occupies: bool,
    ) -> Result<Self, BoardError> {
        let state = GameState::new(mode)?.with_line_threshold(line_threshold)?.with_directed_occupancy(directed_occupies);
        Ok(Referee { state, m, b, steps: Vec::new(), won_at: None })
    }

    fn active_spans(&self) -> FxHashSet<Span> {
        self.state.active_segments().iter().map(|s| s.span()).collect()
    }

    /// Apply Maker's move at `t`; returns whether Maker has now won.
    pub(crate) fn maker_turn(&mut self, t: u32, points: &[GridPoint], strategy: &str) -> Result<bool, MatchError> {
        let budget = self.m.eval(t);
        if points.len() as u64 > budget {
            return Err(MatchError::BudgetOverrun { strategy: strategy.to_string(), t, played: points.len(), budget });
        }
        self.state.set_timestep(t);
        self.state
            .apply_maker(points)
            .map_err(|source| MatchError::IllegalMove { strategy: strategy.to_string(), t, source })?;
        let won = self.state.maker_has_won();
        self.steps.push(StepSummary {
            t,
            maker_played: points.len(),
            breaker_played: 0,
            max_active_count: self.state.max_active_count(),
            segments_split: 0,
        });
        if won {
            self.won_at = Some(t);
        }
        Ok(won)
    }

    pub(crate) fn breaker_turn(&mut self, t: u32, marks: &[BreakerMark], strategy: &str) -> Result<(), MatchError> {
        let budget = self.b.eval(t);
        if marks.len() as u64 > budget {
            return Err(MatchError::BudgetOverrun { strategy: strategy.to_string(), t, played: marks.len(), budget });
        }
        let before = self.active_spans();
        self.state
            .apply_breaker(marks)
            .map_err(|source| MatchError::IllegalMove { strategy: strategy.to_string(), t, source })?;
        let after = self.active_spans();
        let step = self.steps.last_mut().filter(|s| s.t == t).ok_or_else(|| {
            MatchError::Invariant(format!("breaker move at t={t} without a preceding maker move"))
        })?;
        step.breaker_played = marks.len();
        step.segments_split = before.difference(&after).count();
        step.max_active_count = self.state.max_active_count();
        Ok(())
    }

    pub(crate) fn outcome(&self) -> Outcome {
        match self.won_at {
            Some(tau) => Outcome::MakerWin { tau, m_tau: self.m.eval(tau) },
            None => Outcome::Survived { steps: self.steps.last().map_or(0, |s| s.t) },
        }
    }

    pub(crate) fn into_result(self) -> MatchResult {
        let outcome = self.outcome();
        let tau = outcome.tau();
        MatchResult {
            tau,
            m_tau: tau.map(|t| self.m.eval(t)),
            outcome,
            maker_points: self.steps.iter().map(|s| s.maker_played).sum(),
            breaker_points: self.steps.iter().map(|s| s.breaker_played).sum(),
            steps: self.steps,
        }
    }
}

/// Seeded random source for one side of a match.
fn side_rng(seed: u64, side: Player) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(match side {
        Player::Maker => 1,
        Player::Breaker => 2,
    });
    rng
}

/// Play one match until Maker wins or `max_steps` timesteps pass.
pub fn run_match(
    cfg: &MatchConfig,
    maker: &mut dyn MakerStrategy,
    breaker: &mut dyn BreakerStrategy,
) -> Result<(MatchResult, Transcript), MatchError> {
    let mode = cfg.mode.clone();
    mode.validate().map_err(|e| MatchError::Config(e.to_string()))?;
    for s in [&cfg.maker_schedule, &cfg.breaker_schedule] {
        s.validate().map_err(|e| MatchError::Config(e.to_string()))?;
    }
    let n = mode.n;
    let max_steps = cfg.resolved_max_steps()?;
    let threshold = cfg
        .line_threshold
        .unwrap_or_else(|| maker.min_tracked_count(&mode).min(breaker.min_tracked_count(&mode)))
        .clamp(2, n.max(2));
    let (maker_name, breaker_name) = (maker.name(), breaker.name());
    let mut referee = Referee::new(
        mode.clone(),
        cfg.maker_schedule.clone(),
        cfg.breaker_schedule.clone(),
        threshold,
        cfg.directed_occupies,
    )
    .map_err(|e| MatchError::Config(e.to_string()))?;
    let mut maker_rng = side_rng(cfg.seed, Player::Maker);
    let mut breaker_rng = side_rng(cfg.seed, Player::Breaker);
    let mut moves = Vec::new();

    for t in 1..=max_steps {
        referee.state.set_timestep(t);
        let points = {
            let mut ctx = StrategyContext {
                state: &referee.state,
                t,
                budget: cfg.maker_schedule.eval(t) as usize,
                maker_schedule: &cfg.maker_schedule,
                breaker_schedule: &cfg.breaker_schedule,
                rng: &mut maker_rng,
            };
            maker.play(&mut ctx).map_err(|source| MatchError::Strategy { strategy: maker_name.clone(), t, source })?
        };
        let won = referee.maker_turn(t, &points, &maker_name)?;
        moves.push(MoveRecord { t, player: Player::Maker, mv: Move::Maker(points) });
        if won {
            break;
        }
        let marks = {
            let mut ctx = StrategyContext {
                state: &referee.state,
                t,
                budget: cfg.breaker_schedule.eval(t) as usize,
                maker_schedule: &cfg.maker_schedule,
                breaker_schedule: &cfg.breaker_schedule,
                rng: &mut breaker_rng,
            };
            breaker
                .play(&mut ctx)
                .map_err(|source| MatchError::Strategy { strategy: breaker_name.clone(), t, source })?
        };
        referee.breaker_turn(t, &marks, &breaker_name)?;
        moves.push(MoveRecord { t, player: Player::Breaker, mv: Move::Breaker(marks) });
    }

    let header = TranscriptHeader {
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        variant: mode.variant,
        batched: mode.batched,
        n,
        epsilon: mode.epsilon,
        maker_schedule: cfg.maker_schedule.to_string(),
        breaker_schedule: cfg.breaker_schedule.to_string(),
        maker: maker_name,
        breaker: breaker_name,
        seed: cfg.seed,
        max_steps,
        line_threshold: threshold,
        directed_occupies: cfg.directed_occupies,
    };
    let result = referee.into_result();
    let transcript = Transcript { header, moves, outcome: result.outcome.clone() };
    Ok((result, transcript))
}

/// Build both strategies from their specs and play.
pub fn run_match_specs(
    cfg: &MatchConfig,
    maker: &StrategySpec,
    breaker: &StrategySpec,
) -> Result<(MatchResult, Transcript), MatchError> {
    let config = |e: StrategyError| MatchError::Config(e.to_string());
    let mut maker = build_maker(maker).map_err(config)?;
    let mut breaker = build_breaker(breaker).map_err(config)?;
    run_match(cfg, maker.as_mut(), breaker.as_mut())
}
