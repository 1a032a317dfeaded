mod common;

use common::pt;
use linegame::board::{BreakerMark, GameMode, Player};
use linegame::harness::*;
use linegame::strategies::{
    BreakerRandom, BreakerStrategy, GreedyLine, StrategyContext, StrategyError, StrategySpec,
};
use linegame::{GridPoint, Move, Schedule};

fn power1() -> Schedule {
    Schedule::power(1.0, 1.0).unwrap()
}

fn spec(s: &str) -> StrategySpec {
    s.parse().unwrap()
}

#[test]
fn greedy_without_breaker_wins_at_three() {
    let cfg = MatchConfig::new(GameMode::standard(4, 0.5).unwrap(), power1(), Schedule::Zero, 7);
    let (result, transcript) = run_match_specs(&cfg, &spec("greedy"), &spec("idle")).unwrap();
    // 1 + 2 = 3 points cannot hold four in a row; 1 + 2 + 3 = 6 can
    assert_eq!(result.tau, Some(3));
    assert_eq!(result.m_tau, Some(3));
    assert_eq!(transcript.outcome, Outcome::MakerWin { tau: 3, m_tau: 3 });
}

#[test]
fn a_huge_breaker_budget_cannot_stop_a_full_line_in_one_turn() {
    let cfg = MatchConfig { max_steps: Some(10), ..MatchConfig::new(GameMode::standard(4, 0.5).unwrap(), power1(), Schedule::Const { c: 1000 }, 1) };
    let (result, _) = run_match_specs(&cfg, &spec("greedy"), &spec("split-top")).unwrap();
    // Maker wins no later than the first t with m(t) >= n
    let first_full = power1().first_reaching(4, 100).unwrap();
    assert_eq!(first_full, 4);
    assert!(result.tau.unwrap() <= first_full);
}

#[test]
fn max_steps_defaults_past_the_first_full_turn() {
    let cfg = MatchConfig::new(GameMode::standard(10, 0.5).unwrap(), power1(), Schedule::Zero, 1);
    assert_eq!(cfg.resolved_max_steps().unwrap(), 11);
}

#[test]
fn transcripts_round_trip_and_replay() {
    let cfg = MatchConfig::new(GameMode::standard(12, 0.5).unwrap(), power1(), "clog:c=3".parse().unwrap(), 11);
    let (result, transcript) = run_match_specs(&cfg, &spec("greedy"), &spec("random")).unwrap();
    let text = transcript.to_jsonl();
    let back = Transcript::from_jsonl(&text).unwrap();
    assert_eq!(back, transcript);
    assert_eq!(back.to_jsonl(), text);

    let path = std::env::temp_dir().join(format!("linegame-roundtrip-{}.jsonl", std::process::id()));
    transcript.write_to(&path).unwrap();
    assert_eq!(Transcript::read_from(&path).unwrap(), transcript);
    std::fs::remove_file(&path).ok();

    let replay = replay_verify(&transcript).unwrap();
    assert_eq!(replay.result.outcome, result.outcome);
    assert_eq!(replay.result.tau, result.tau);
    assert_eq!(replay.result.maker_points, result.maker_points);
    assert_eq!(replay.result.breaker_points, result.breaker_points);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let cfg = MatchConfig::new(GameMode::standard(16, 0.25).unwrap(), power1(), "clog:c=4".parse().unwrap(), 99);
    let a = run_match_specs(&cfg, &spec("greedy"), &spec("random")).unwrap().1.to_jsonl();
    let b = run_match_specs(&cfg, &spec("greedy"), &spec("random")).unwrap().1.to_jsonl();
    assert_eq!(a, b);
    let other = MatchConfig { seed: 100, ..cfg };
    let c = run_match_specs(&other, &spec("greedy"), &spec("random")).unwrap().1.to_jsonl();
    assert_ne!(a, c);
}

#[test]
fn moves_respect_budgets_and_stop_at_the_win() {
    let m = power1();
    let b: Schedule = "clog:c=2".parse().unwrap();
    let cfg = MatchConfig::new(GameMode::standard(20, 0.2).unwrap(), m.clone(), b.clone(), 3);
    let (result, transcript) = run_match_specs(&cfg, &spec("greedy"), &spec("split-top")).unwrap();
    for rec in &transcript.moves {
        let limit = match rec.player {
            Player::Maker => m.eval(rec.t),
            Player::Breaker => b.eval(rec.t),
        };
        assert!(rec.mv.len() as u64 <= limit, "t={} {:?} played {}", rec.t, rec.player, rec.mv.len());
    }
    if let Some(tau) = result.tau {
        let last = transcript.moves.last().unwrap();
        assert_eq!((last.t, last.player), (tau, Player::Maker));
    }
}

#[test]
fn tampered_transcripts_are_rejected() {
    let cfg = MatchConfig::new(GameMode::standard(8, 0.5).unwrap(), power1(), "const:c=2".parse().unwrap(), 5);
    let (_, transcript) = run_match_specs(&cfg, &spec("greedy"), &spec("split-top")).unwrap();

    // Maker repeats its first point at t = 2
    let mut dup = transcript.clone();
    let first = match &dup.moves[0].mv {
        Move::Maker(p) => p[0],
        _ => unreachable!(),
    };
    let rec = dup.moves.iter_mut().find(|r| r.t == 2 && r.player == Player::Maker).unwrap();
    if let Move::Maker(points) = &mut rec.mv {
        points[0] = first;
    }
    let err = replay_verify(&dup).unwrap_err();
    assert_eq!(err.t, Some(2));
    assert!(err.illegal);

    let mut altered = transcript.clone();
    altered.outcome = match transcript.outcome {
        Outcome::MakerWin { tau, m_tau } => Outcome::MakerWin { tau: tau + 1, m_tau },
        Outcome::Survived { steps } => Outcome::Survived { steps: steps + 1 },
    };
    let err = replay_verify(&altered).unwrap_err();
    assert!(!err.illegal);
}

struct Cheater {
    over_budget: bool,
}

impl BreakerStrategy for Cheater {
    fn name(&self) -> String {
        "cheater".into()
    }

    fn min_tracked_count(&self, _mode: &GameMode) -> usize {
        2
    }

    fn play(&mut self, ctx: &mut StrategyContext<'_>) -> Result<Vec<BreakerMark>, StrategyError> {
        if self.over_budget {
            let far: Vec<BreakerMark> = (0..=ctx.budget as i64).map(|i| BreakerMark::plain(pt(1000 + i, 1000))).collect();
            return Ok(far);
        }
        let taken: GridPoint = *ctx.state.maker_points().next().unwrap();
        Ok(vec![BreakerMark::plain(taken)])
    }
}

#[test]
fn illegal_and_oversized_moves_abort_the_match() {
    let cfg = MatchConfig::new(GameMode::standard(6, 0.5).unwrap(), power1(), "const:c=1".parse().unwrap(), 0);
    let err = run_match(&cfg, &mut GreedyLine::new(), &mut Cheater { over_budget: false }).unwrap_err();
    assert!(matches!(&err, MatchError::IllegalMove { strategy, t: 1, .. } if strategy == "cheater"));
    assert_eq!(err.offending_point(), Some(pt(0, 0)));
    assert_eq!(err.exit_code(), 2);

    let err = run_match(&cfg, &mut GreedyLine::new(), &mut Cheater { over_budget: true }).unwrap_err();
    assert!(matches!(err, MatchError::BudgetOverrun { played: 2, budget: 1, .. }));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn random_breaker_is_reproducible_through_the_trait() {
    let cfg = MatchConfig::new(GameMode::standard(10, 0.5).unwrap(), power1(), "const:c=3".parse().unwrap(), 4);
    let (a, _) = run_match(&cfg, &mut GreedyLine::new(), &mut BreakerRandom::new()).unwrap();
    let (b, _) = run_match(&cfg, &mut GreedyLine::new(), &mut BreakerRandom::new()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_strategies_are_configuration_errors() {
    let cfg = MatchConfig::new(GameMode::standard(6, 0.5).unwrap(), power1(), Schedule::Zero, 0);
    let err = run_match_specs(&cfg, &spec("telepathy"), &spec("idle")).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}
