mod common;

use common::{brute_winning_groups, build_state, engine_winning_groups, pt, random_board};
use linegame::board::{BreakerMark, GameMode, GameState, Variant};
use linegame::geometry::Direction;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mode_for(kind: usize, n: usize) -> GameMode {
    match kind {
        0 => GameMode::standard(n, 0.5),
        1 => GameMode::directed(n, 0.5),
        2 => GameMode::batched(n, 0.5),
        _ => GameMode::new(Variant::Directed, true, n, 0.5),
    }
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn winning_segments_match_exhaustive_search(seed in any::<u64>(), n in 3usize..=5, kind in 0usize..4) {
        let mode = mode_for(kind, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (maker, marks) = random_board(&mut rng, &mode);
        let state = build_state(&mode, &maker, &marks);
        let expected = brute_winning_groups(&maker, &marks, n, mode.variant, mode.batched);
        prop_assert_eq!(engine_winning_groups(&state), expected);
        prop_assert!(state.audit_index().is_ok());
    }

    #[test]
    fn higher_thresholds_see_the_same_wins(seed in any::<u64>(), n in 3usize..=5) {
        let mode = mode_for(0, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (maker, marks) = random_board(&mut rng, &mode);
        let full = build_state(&mode, &maker, &marks);
        let mut lean = GameState::new(mode.clone()).unwrap().with_line_threshold(n).unwrap();
        lean.apply_maker(&maker).unwrap();
        lean.apply_breaker(&marks).unwrap();
        prop_assert_eq!(engine_winning_groups(&lean), engine_winning_groups(&full));
        prop_assert!(lean.audit_index().is_ok());
    }
}

#[test]
fn diagonal_win_and_a_block_between() {
    let mode = GameMode::standard(3, 0.7).unwrap();
    let mut s = GameState::new(mode.clone()).unwrap();
    s.apply_maker(&[pt(0, 0), pt(1, 1), pt(2, 2)]).unwrap();
    assert!(s.maker_has_won());

    let mut blocked = GameState::new(mode).unwrap();
    blocked.apply_maker(&[pt(0, 0), pt(2, 2), pt(3, 3)]).unwrap();
    blocked.apply_breaker(&[BreakerMark::plain(pt(1, 1))]).unwrap();
    assert!(!blocked.maker_has_won());
}

#[test]
fn directed_marks_only_block_their_direction() {
    let mode = GameMode::directed(3, 0.7).unwrap();
    let mut s = GameState::new(mode).unwrap();
    s.apply_breaker(&[BreakerMark::directed(pt(1, 0), Direction::VERTICAL)]).unwrap();
    s.apply_breaker(&[BreakerMark::directed(pt(0, 1), Direction::VERTICAL)]).unwrap();
    s.apply_maker(&[pt(0, 0), pt(0, 2), pt(0, 3)]).unwrap();
    // the column is cut at (0, 1)
    assert!(!s.maker_has_won());
    s.apply_maker(&[pt(2, 0)]).unwrap();
    assert!(!s.maker_has_won());
    // the vertical mark at (1, 0) does not cut the row
    s.apply_maker(&[pt(3, 0)]).unwrap();
    assert!(s.maker_has_won());
    assert!(s.apply_maker(&[pt(1, 0)]).is_err());
}

#[test]
fn maker_may_not_take_breaker_points() {
    let mut s = GameState::new(GameMode::standard(4, 0.5).unwrap()).unwrap();
    s.apply_breaker(&[BreakerMark::plain(pt(0, 0))]).unwrap();
    let err = s.apply_maker(&[pt(0, 0)]).unwrap_err();
    assert_eq!(err.offending_point(), Some(pt(0, 0)));
}
