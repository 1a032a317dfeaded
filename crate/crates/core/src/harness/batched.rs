//! The batched game: Maker commits every point up to time T at once, then
//! Breaker answers with his whole cumulative budget.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::runner::MatchError;
use crate::board::{BreakerMark, GameMode, GameState, Variant};
use crate::geometry::GridPoint;
use crate::num::ceil_count;
use crate::schedule::Schedule;
use crate::strategies::{
    breaker_batched_directed_greedy, breaker_batched_random, breaker_batched_split, maker_grid_batched,
    maker_rectangle_batched, StrategyError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchedMaker {
    /// `[0, n) x [0, h)` with `T = ceil((n/2)^(1/alpha))`.
    Rectangle,
    /// Near-square grid filling the budget up to a caller-chosen `T`.
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchedBreaker {
    Split,
    Random,
    DirectedGreedy,
    Idle,
}

impl FromStr for BatchedMaker {
    type Err = MatchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rectangle" => Ok(BatchedMaker::Rectangle),
            "grid" => Ok(BatchedMaker::Grid),
            _ => Err(MatchError::Config(format!("unknown batched maker {s:?} (rectangle, grid)"))),
        }
    }
}

impl FromStr for BatchedBreaker {
    type Err = MatchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "split" | "batched-split" => Ok(BatchedBreaker::Split),
            "random" | "batched-random" => Ok(BatchedBreaker::Random),
            "directed-greedy" => Ok(BatchedBreaker::DirectedGreedy),
            "idle" => Ok(BatchedBreaker::Idle),
            _ => Err(MatchError::Config(format!("unknown batched breaker {s:?} (split, random, directed-greedy, idle)"))),
        }
    }
}

impl fmt::Display for BatchedMaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BatchedMaker::Rectangle => "rectangle",
            BatchedMaker::Grid => "grid",
        })
    }
}

impl fmt::Display for BatchedBreaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BatchedBreaker::Split => "split",
            BatchedBreaker::Random => "random",
            BatchedBreaker::DirectedGreedy => "directed-greedy",
            BatchedBreaker::Idle => "idle",
        })
    }
}

#[derive(Clone, Debug)]
pub struct BatchedConfig {
    pub variant: Variant,
    pub n: usize,
    /// Maker plays `m(t) = ceil(t^alpha)`.
    pub alpha: f64,
    /// `None`: `1 - m(T) / n`.
    pub epsilon: Option<f64>,
    /// Required for the grid Maker unless the rectangle horizon is wanted.
    pub horizon: Option<u32>,
    pub maker: BatchedMaker,
    pub breaker: BatchedBreaker,
    pub breaker_schedule: Schedule,
    pub seed: u64,
    /// Sample limit for the random Breaker.
    pub max_retries: usize,
}

impl BatchedConfig {
    pub fn new(variant: Variant, n: usize, alpha: f64, maker: BatchedMaker, breaker: BatchedBreaker) -> Self {
        BatchedConfig {
            variant,
            n,
            alpha,
            epsilon: None,
            horizon: None,
            maker,
            breaker,
            breaker_schedule: Schedule::Const { c: 1 },
            seed: 0,
            max_retries: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchedResult {
    pub horizon: u32,
    pub epsilon: f64,
    /// `ceil(epsilon n)`: the run length Maker needs.
    pub k: usize,
    pub maker_points: usize,
    pub breaker_points: usize,
    pub breaker_budget: u64,
    /// Largest Maker count on a Breaker-free segment with room for `n` points.
    pub largest_active: usize,
    /// Largest Maker count on any Breaker-free segment of an indexed line.
    pub longest_run: usize,
    /// Smallest count the board indexed; runs below it are reported as 0.
    pub line_threshold: usize,
    pub maker_wins: bool,
    pub sampling_attempts: Option<usize>,
    pub random_run_length: Option<usize>,
    pub random_size_bound: Option<f64>,
}

fn strategy_err(name: &str, source: StrategyError) -> MatchError {
    match source {
        StrategyError::Config(msg) => MatchError::Config(format!("{name}: {msg}")),
        source => MatchError::Strategy { strategy: name.to_string(), t: 0, source },
    }
}

/// Place both batched sets and decide the game: Breaker wins iff no active
/// segment keeps `ceil(epsilon n)` Maker points.
pub fn run_batched(cfg: &BatchedConfig) -> Result<BatchedResult, MatchError> {
    let n = cfg.n;
    let m = Schedule::power(cfg.alpha, 1.0).map_err(|e| MatchError::Config(e.to_string()))?;
    cfg.breaker_schedule.validate().map_err(|e| MatchError::Config(e.to_string()))?;
    let maker_name = cfg.maker.to_string();
    let breaker_name = cfg.breaker.to_string();

    let (horizon, maker_points) = match cfg.maker {
        BatchedMaker::Rectangle => {
            let rect = maker_rectangle_batched(n, cfg.alpha).map_err(|e| strategy_err(&maker_name, e))?;
            if cfg.horizon.is_some_and(|h| h != rect.t) {
                return Err(MatchError::Config(format!("the rectangle Maker fixes T = {}", rect.t)));
            }
            (rect.t, rect.points)
        }
        BatchedMaker::Grid => {
            let t = match cfg.horizon {
                Some(t) => t,
                None => ceil_count((n as f64 / 2.0).powf(1.0 / cfg.alpha)).max(1) as u32,
            };
            (t, maker_grid_batched(m.cumulative(t)))
        }
    };
    let epsilon = cfg.epsilon.unwrap_or(1.0 - m.eval(horizon) as f64 / n as f64);
    let mode = GameMode::new(cfg.variant, true, n, epsilon).map_err(|e| MatchError::Config(e.to_string()))?;
    let k = mode.eps_n();
    let budget = cfg.breaker_schedule.cumulative(horizon);
    let budget_usize = usize::try_from(budget).unwrap_or(usize::MAX);

    match (cfg.breaker, cfg.variant) {
        (BatchedBreaker::DirectedGreedy, Variant::Standard) => {
            return Err(MatchError::Config("directed-greedy needs the directed variant".into()))
        }
        (BatchedBreaker::Split | BatchedBreaker::Random, Variant::Directed) => {
            return Err(MatchError::Config(format!("{breaker_name} plays undirected points; use the standard variant")))
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut sampling_attempts, mut random_run_length, mut random_size_bound) = (None, None, None);
    let marks: Vec<BreakerMark> = match cfg.breaker {
        BatchedBreaker::Idle => Vec::new(),
        BatchedBreaker::Split => breaker_batched_split(&maker_points, epsilon, n, budget_usize)
            .map_err(|e| strategy_err(&breaker_name, e))?
            .into_iter()
            .map(BreakerMark::plain)
            .collect(),
        BatchedBreaker::Random => {
            let set = breaker_batched_random(&maker_points, epsilon, cfg.alpha, horizon, &mut rng, cfg.max_retries)
                .map_err(|e| strategy_err(&breaker_name, e))?;
            if set.points.len() > budget_usize {
                return Err(strategy_err(
                    &breaker_name,
                    StrategyError::BudgetExceeded { required: set.points.len(), available: budget_usize },
                ));
            }
            sampling_attempts = Some(set.attempts);
            random_run_length = Some(set.run_length);
            random_size_bound = Some(set.size_bound);
            set.points.into_iter().map(BreakerMark::plain).collect()
        }
        BatchedBreaker::DirectedGreedy => breaker_batched_directed_greedy(&maker_points, k, budget_usize),
    };

    let threshold = random_run_length.map_or(k, |r| r.min(k)).clamp(2, n);
    let mut state = GameState::new(mode)
        .and_then(|s| s.with_line_threshold(threshold))
        .map_err(|e| MatchError::Config(e.to_string()))?;
    state.set_timestep(horizon);
    state
        .apply_maker(&maker_points)
        .map_err(|source| MatchError::IllegalMove { strategy: maker_name.clone(), t: horizon, source })?;
    state
        .apply_breaker(&marks)
        .map_err(|source| MatchError::IllegalMove { strategy: breaker_name.clone(), t: horizon, source })?;

    let largest_active = state.max_active_count();
    let longest_run = free_runs(&state).into_iter().max().unwrap_or(0);
    Ok(BatchedResult {
        horizon,
        epsilon,
        k,
        maker_points: maker_points.len(),
        breaker_points: marks.len(),
        breaker_budget: budget,
        largest_active,
        longest_run,
        line_threshold: threshold,
        maker_wins: largest_active >= k,
        sampling_attempts,
        random_run_length,
        random_size_bound,
    })
}

/// Maker counts of every Breaker-free segment on an indexed line.
fn free_runs(state: &GameState) -> Vec<usize> {
    state
        .indexed_lines()
        .flat_map(|line| state.segments_on_line(line))
        .map(|s| s.maker_count)
        .collect()
}

/// Exhaustive check, independent of the board index: the longest run of
/// `maker` points on one line with no `breaker` point between them.
pub fn longest_free_run(maker: &[GridPoint], breaker: &[GridPoint], min_len: usize) -> usize {
    use crate::geometry::collinear_groups;
    use std::collections::BTreeSet;
    let blockers: BTreeSet<GridPoint> = breaker.iter().copied().collect();
    let free: Vec<GridPoint> = maker.iter().copied().filter(|p| !blockers.contains(p)).collect();
    let mut best = 0usize;
    for (line, params) in collinear_groups(&free, min_len) {
        let cuts: BTreeSet<i64> =
            blockers.iter().filter(|b| line.contains(**b)).map(|b| line.param(*b).expect("on line")).collect();
        let mut run = 0usize;
        let mut prev: Option<i64> = None;
        for &k in &params {
            let cut = prev.is_some_and(|p| cuts.range(p + 1..k).next().is_some());
            run = if cut { 1 } else { run + 1 };
            best = best.max(run);
            prev = Some(k);
        }
    }
    best
}
