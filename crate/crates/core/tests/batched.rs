use linegame::harness::*;
use linegame::{GridPoint, Schedule, Variant};

#[test]
fn four_point_rectangle_against_idle_breaker() {
    let cfg = BatchedConfig::new(Variant::Standard, 4, 0.5, BatchedMaker::Rectangle, BatchedBreaker::Idle);
    let r = run_batched(&cfg).unwrap();
    // T = ceil(2^2) = 4, budget 1 + 2 + 2 + 2 = 7, one row of four points
    assert_eq!((r.horizon, r.maker_points), (4, 4));
    assert!((r.epsilon - 0.5).abs() < 1e-12);
    assert_eq!(r.k, 2);
    assert_eq!(r.largest_active, 4);
    assert!(r.maker_wins);
}

#[test]
fn ample_split_budget_clears_the_grid() {
    let mut cfg = BatchedConfig::new(Variant::Standard, 40, 0.5, BatchedMaker::Grid, BatchedBreaker::Split);
    cfg.horizon = Some(30);
    cfg.epsilon = Some(0.1);
    cfg.breaker_schedule = Schedule::Const { c: 100 };
    let r = run_batched(&cfg).unwrap();
    assert_eq!(r.k, 4);
    assert!(!r.maker_wins);
    assert!(r.largest_active < r.k);
    assert!(r.longest_run < r.k, "longest run {}", r.longest_run);
    assert!(r.breaker_points as u64 <= r.breaker_budget);
}

#[test]
fn small_split_budget_is_reported() {
    let mut cfg = BatchedConfig::new(Variant::Standard, 40, 0.5, BatchedMaker::Grid, BatchedBreaker::Split);
    cfg.horizon = Some(30);
    cfg.epsilon = Some(0.1);
    let err = run_batched(&cfg).unwrap_err();
    assert!(err.to_string().contains("split"), "{err}");
}

#[test]
fn random_breaker_cuts_every_long_run() {
    let mut cfg = BatchedConfig::new(Variant::Standard, 40, 0.5, BatchedMaker::Grid, BatchedBreaker::Random);
    cfg.horizon = Some(400);
    cfg.epsilon = Some(0.5);
    cfg.breaker_schedule = Schedule::Const { c: 24 };
    cfg.seed = 11;
    let r = run_batched(&cfg).unwrap();
    let run = r.random_run_length.unwrap();
    assert!(r.sampling_attempts.unwrap() >= 1);
    assert!(r.breaker_points as f64 <= r.random_size_bound.unwrap());
    assert!(r.longest_run < run);
    assert!(!r.maker_wins);

    let again = run_batched(&cfg).unwrap();
    assert_eq!(r, again);
}

#[test]
fn directed_greedy_with_one_mark_per_step_loses() {
    let mut cfg = BatchedConfig::new(Variant::Directed, 20, 0.5, BatchedMaker::Grid, BatchedBreaker::DirectedGreedy);
    cfg.horizon = Some(100);
    cfg.epsilon = Some(0.25);
    let r = run_batched(&cfg).unwrap();
    assert_eq!(r.breaker_points, 100);
    assert!(r.maker_wins, "largest active {}", r.largest_active);
}

#[test]
fn breaker_kind_must_match_variant() {
    let cfg = BatchedConfig::new(Variant::Standard, 20, 0.5, BatchedMaker::Grid, BatchedBreaker::DirectedGreedy);
    assert!(matches!(run_batched(&cfg), Err(MatchError::Config(_))));
    let cfg = BatchedConfig::new(Variant::Directed, 20, 0.5, BatchedMaker::Grid, BatchedBreaker::Split);
    assert!(matches!(run_batched(&cfg), Err(MatchError::Config(_))));
}

#[test]
fn longest_free_run_on_a_row() {
    let row: Vec<GridPoint> = (0..10).map(|x| GridPoint::new(x, 0)).collect();
    assert_eq!(longest_free_run(&row, &[], 2), 10);
    assert_eq!(longest_free_run(&row, &[GridPoint::new(3, 0)], 2), 6);
    assert_eq!(longest_free_run(&row, &[GridPoint::new(3, 0), GridPoint::new(7, 0)], 2), 3);
}
