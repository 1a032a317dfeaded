//! Baseline Breakers: idle, uniformly random, and one that hits the heaviest segments.

use rand::Rng;
use rustc_hash::FxHashSet;

use super::split::heaviest_first;
use super::{BreakerStrategy, StrategyContext, StrategyError};
use crate::board::{BreakerMark, GameMode, GameState, Segment, Variant};
use crate::geometry::{canonical_direction, Direction, GridPoint, COORD_LIMIT};

/// Plays nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct BreakerIdle;

impl BreakerStrategy for BreakerIdle {
    fn name(&self) -> String {
        "idle".to_string()
    }

    fn min_tracked_count(&self, mode: &GameMode) -> usize {
        mode.n
    }

    fn play(&mut self, _ctx: &mut StrategyContext<'_>) -> Result<Vec<BreakerMark>, StrategyError> {
        Ok(Vec::new())
    }
}

/// Small directions a random directed mark picks from.
const RANDOM_DIRECTIONS: [(i64, i64); 8] = [(1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)];

/// Uniformly random legal points in the bounding box of Maker's points grown by `n`
/// (the square `[-n, n]^2` while Maker has no points).
#[derive(Clone, Debug, Default)]
pub struct BreakerRandom;

impl BreakerRandom {
    pub fn new() -> Self {
        BreakerRandom
    }
}

fn sampling_box(state: &GameState) -> (i64, i64, i64, i64) {
    let n = state.n() as i64;
    let mut it = state.maker_points();
    let (mut x0, mut x1, mut y0, mut y1) = match it.next() {
        Some(p) => (p.x, p.x, p.y, p.y),
        None => (0, 0, 0, 0),
    };
    for p in it {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let lim = COORD_LIMIT - 1;
    ((x0 - n).max(-lim), (x1 + n).min(lim), (y0 - n).max(-lim), (y1 + n).min(lim))
}

impl BreakerStrategy for BreakerRandom {
    fn name(&self) -> String {
        "random".to_string()
    }

    fn min_tracked_count(&self, mode: &GameMode) -> usize {
        mode.n
    }

    fn play(&mut self, ctx: &mut StrategyContext<'_>) -> Result<Vec<BreakerMark>, StrategyError> {
        let (x0, x1, y0, y1) = sampling_box(ctx.state);
        let directed = ctx.mode().variant == Variant::Directed;
        let mut out = Vec::with_capacity(ctx.budget);
        let mut seen: FxHashSet<BreakerMark> = FxHashSet::default();
        let max_attempts = 64 * ctx.budget + 64;
        for _ in 0..max_attempts {
            if out.len() >= ctx.budget {
                break;
            }
            let point = GridPoint::new(ctx.rng.gen_range(x0..=x1), ctx.rng.gen_range(y0..=y1));
            let dir = if directed {
                let (dx, dy) = RANDOM_DIRECTIONS[ctx.rng.gen_range(0..RANDOM_DIRECTIONS.len())];
                Some(canonical_direction(dx, dy)?)
            } else {
                None
            };
            let mark = BreakerMark { point, dir };
            let key = if directed { mark } else { BreakerMark::plain(point) };
            if ctx.state.is_maker(point) || ctx.state.check_breaker_mark(&mark).is_err() || !seen.insert(key) {
                continue;
            }
            out.push(mark);
        }
        Ok(out)
    }
}

/// Smallest Maker count a segment needs before [`LineTargeting`] hits it.
const TARGET_MIN_COUNT: usize = 3;

/// One point on each of the `budget` heaviest active segments, next to the
/// median Maker point of the segment.
#[derive(Clone, Debug, Default)]
pub struct LineTargeting;

impl LineTargeting {
    pub fn new() -> Self {
        LineTargeting
    }
}

fn near_median(state: &GameState, seg: &Segment, dir: Option<Direction>, used: &FxHashSet<BreakerMark>) -> Option<BreakerMark> {
    let params = state.maker_params(seg);
    let mid = *params.get(params.len() / 2)?;
    let span = params.last()? - params.first()? + 2 * state.n() as i64 + 2;
    for d in 1..=span {
        for k in [mid + d, mid - d] {
            if !seg.contains_param(k) {
                continue;
            }
            let Ok(point) = seg.line.point_at(k) else { continue };
            let mark = BreakerMark { point, dir };
            if !used.contains(&mark) && !state.is_maker(point) && state.check_breaker_mark(&mark).is_ok() {
                return Some(mark);
            }
        }
    }
    None
}

impl BreakerStrategy for LineTargeting {
    fn name(&self) -> String {
        "line-targeting".to_string()
    }

    fn min_tracked_count(&self, mode: &GameMode) -> usize {
        TARGET_MIN_COUNT.min(mode.n)
    }

    fn play(&mut self, ctx: &mut StrategyContext<'_>) -> Result<Vec<BreakerMark>, StrategyError> {
        let n = ctx.n();
        let directed = ctx.mode().variant == Variant::Directed;
        let mut segs: Vec<Segment> = ctx
            .state
            .active_segments()
            .into_iter()
            .filter(|s| s.maker_count >= TARGET_MIN_COUNT.min(n))
            .collect();
        segs.sort_by(heaviest_first);
        let mut out = Vec::new();
        let mut used: FxHashSet<BreakerMark> = FxHashSet::default();
        for seg in &segs {
            if out.len() >= ctx.budget {
                break;
            }
            let dir = directed.then(|| seg.line.dir());
            if let Some(mark) = near_median(ctx.state, seg, dir, &used) {
                used.insert(mark);
                if !directed {
                    // another segment through the same point must not reuse it
                    used.insert(BreakerMark::plain(mark.point));
                }
                out.push(mark);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::GameMode;
    use crate::schedule::Schedule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(b: &mut dyn BreakerStrategy, s: &GameState, budget: usize, seed: u64) -> Vec<BreakerMark> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sched = Schedule::Zero;
        let mut ctx = StrategyContext { state: s, t: 1, budget, maker_schedule: &sched, breaker_schedule: &sched, rng: &mut rng };
        b.play(&mut ctx).unwrap()
    }

    fn board() -> GameState {
        let mut s = GameState::new(GameMode::standard(5, 0.4).unwrap()).unwrap();
        s.apply_maker(&[GridPoint::new(0, 0), GridPoint::new(1, 0), GridPoint::new(2, 0), GridPoint::new(1, 1)]).unwrap();
        s
    }

    #[test]
    fn idle_plays_nothing() {
        assert!(run(&mut BreakerIdle, &board(), 10, 0).is_empty());
    }

    #[test]
    fn random_is_reproducible_and_legal() {
        let s = board();
        let a = run(&mut BreakerRandom::new(), &s, 12, 7);
        let b = run(&mut BreakerRandom::new(), &s, 12, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        let mut s2 = s.clone();
        s2.apply_breaker(&a).unwrap();
    }

    #[test]
    fn line_targeting_hits_the_heaviest_segment_next_to_its_median() {
        let s = board();
        let marks = run(&mut LineTargeting::new(), &s, 2, 0);
        assert_eq!(marks, vec![BreakerMark::plain(GridPoint::new(3, 0))]);
    }
}
