mod common;

use common::pt;
use linegame::board::GameMode;
use linegame::harness::*;
use linegame::incidence::{reduce_to_bingame, szt_m_rate, IncidenceError, StConfig};
use linegame::strategies::{MakerStrategy, SplitTop, StrategyContext, StrategyError};
use linegame::{GridPoint, Schedule};

/// Plays a fixed list of moves, one per timestep.
struct Scripted(Vec<Vec<GridPoint>>);

impl MakerStrategy for Scripted {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn min_tracked_count(&self, _mode: &GameMode) -> usize {
        2
    }

    fn play(&mut self, ctx: &mut StrategyContext<'_>) -> Result<Vec<GridPoint>, StrategyError> {
        Ok(self.0.get(ctx.t as usize - 1).cloned().unwrap_or_default())
    }
}

fn scripted_transcript() -> Transcript {
    let moves = vec![
        vec![pt(0, 0), pt(1, 0), pt(2, 0)],
        vec![pt(0, 1), pt(0, 2), pt(0, 3)],
        vec![pt(10, 0), pt(10, 2), pt(10, 4)],
    ];
    let mode = GameMode::standard(6, 0.5).unwrap();
    let cfg = MatchConfig { max_steps: Some(3), ..MatchConfig::new(mode, "3".parse().unwrap(), Schedule::Const { c: 4 }, 0) };
    let (_, tr) = run_match(&cfg, &mut Scripted(moves), &mut SplitTop::new(Some(0.5)).unwrap()).unwrap();
    tr
}

#[test]
fn scripted_match_by_hand() {
    let tr = scripted_transcript();
    assert_eq!(tr.outcome, Outcome::Survived { steps: 3 });
    let cfg = StConfig::default();
    let trace = reduce_to_bingame(&tr, 0.5, 6, &cfg).unwrap();

    // offset ceil(6 * 0.5 / 2) = 2; the row (3 points), the column (4) and the
    // gapped column (3) each become a bin and are split in the same timestep
    assert_eq!(trace.offset, 2);
    let added: Vec<u64> = trace.steps.iter().map(|s| s.weight_added).collect();
    assert_eq!(added, vec![1, 2, 1]);
    let killed: Vec<Vec<u64>> = trace.steps.iter().map(|s| s.kills.iter().map(|k| k.weight).collect()).collect();
    assert_eq!(killed, vec![vec![1], vec![2], vec![1]]);
    assert_eq!(trace.bins, 3);
    assert_eq!((trace.total_added, trace.total_killed, trace.final_weight), (4, 4, 0));
    assert!(trace.accounting_exact());
    assert!(trace.zero_weight_entries());

    // last s timesteps: 1, 1 + 2, 1 + 2 + 1, against rate m(3) = 3 and b' = 1
    let sums: Vec<u64> = trace.windows.iter().map(|w| w.weight_added).collect();
    assert_eq!(sums, vec![1, 3, 4]);
    for w in &trace.windows {
        let s = w.s as f64;
        let expect = 2.5 * ((3.0 * s).powf(2.0 / 3.0) * (s + 1.0).powf(2.0 / 3.0) + 3.0 * s + s + 1.0);
        assert!((w.szt_m - expect).abs() < 1e-9);
        assert!((szt_m_rate(w.s, 3.0, 1.0, &cfg) - expect).abs() < 1e-9);
    }
    assert!(trace.violations().is_empty());

    let mut csv = Vec::new();
    trace.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("s,weight_added,szt_M,slack\n1,1,"));
}

#[test]
fn light_segments_never_become_weighted_bins() {
    let moves = vec![vec![pt(0, 0), pt(1, 0)], vec![pt(5, 5), pt(6, 7)]];
    let mode = GameMode::standard(6, 0.5).unwrap();
    let cfg = MatchConfig { max_steps: Some(2), ..MatchConfig::new(mode, "2".parse().unwrap(), Schedule::Const { c: 4 }, 0) };
    let (_, tr) = run_match(&cfg, &mut Scripted(moves), &mut SplitTop::new(Some(0.5)).unwrap()).unwrap();
    let trace = reduce_to_bingame(&tr, 0.5, 6, &StConfig::default()).unwrap();
    assert_eq!(trace.total_added, 0);
    assert_eq!(trace.bins, 0);
    assert!(trace.violations().is_empty());
}

#[test]
fn accounting_holds_on_a_played_match() {
    let mode = GameMode::standard(24, 0.25).unwrap();
    let cfg = MatchConfig::new(mode, Schedule::power(1.0, 1.0).unwrap(), "clog:c=6".parse().unwrap(), 2);
    let (_, tr) = run_match_specs(&cfg, &"greedy".parse().unwrap(), &"split-top:epsilon=0.25".parse().unwrap()).unwrap();
    let trace = reduce_to_bingame(&tr, 0.25, 24, &StConfig::default()).unwrap();
    assert!(trace.accounting_exact(), "{:?}", trace.violations());
    assert_eq!(trace.windows.len(), trace.turns as usize);
    let per_step: u64 = trace.steps.iter().map(|s| s.weight_added).sum();
    assert_eq!(trace.windows.last().map(|w| w.weight_added), Some(per_step));
}

#[test]
fn other_breakers_and_mismatched_epsilon_are_refused() {
    let mode = GameMode::standard(8, 0.5).unwrap();
    let cfg = MatchConfig::new(mode, Schedule::power(1.0, 1.0).unwrap(), Schedule::Const { c: 1 }, 0);
    let (_, tr) = run_match_specs(&cfg, &"greedy".parse().unwrap(), &"random".parse().unwrap()).unwrap();
    assert!(matches!(reduce_to_bingame(&tr, 0.5, 8, &StConfig::default()), Err(IncidenceError::Unsupported(_))));

    let tr = scripted_transcript();
    assert!(matches!(reduce_to_bingame(&tr, 0.4, 6, &StConfig::default()), Err(IncidenceError::InvalidArgument(_))));
    assert!(matches!(reduce_to_bingame(&tr, 0.5, 7, &StConfig::default()), Err(IncidenceError::InvalidArgument(_))));
}
