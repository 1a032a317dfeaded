//! Baseline Maker that keeps extending its strongest segment.

use std::collections::BTreeSet;

use rustc_hash::FxHashSet;

use super::split::heaviest_first;
use super::{MakerStrategy, StrategyContext, StrategyError};
use crate::board::{GameMode, GameState, Segment};
use crate::geometry::{Direction, GridPoint, LineKey};

/// Segments with fewer Maker points than `max(3, n / 16)` are ignored unless
/// they lie on the line currently being built.
fn greedy_min_count(n: usize) -> usize {
    (n / 16).max(3).min(n)
}

/// Extends the active segment with the most Maker points by consecutive free
/// points: first the gaps between its Maker points, then upward past the last
/// one, then downward. Starts a new row through the free point nearest the
/// origin when nothing is left to extend.
#[derive(Clone, Debug, Default)]
pub struct GreedyLine {
    current: Option<LineKey>,
}

impl GreedyLine {
    pub fn new() -> Self {
        GreedyLine::default()
    }
}

type Span = (LineKey, Option<i64>, Option<i64>);

impl MakerStrategy for GreedyLine {
    fn name(&self) -> String {
        "greedy".to_string()
    }

    fn min_tracked_count(&self, mode: &GameMode) -> usize {
        greedy_min_count(mode.n)
    }

    fn play(&mut self, ctx: &mut StrategyContext<'_>) -> Result<Vec<GridPoint>, StrategyError> {
        let state = ctx.state;
        let n = state.n();
        let mut out: Vec<GridPoint> = Vec::new();
        let mut taken: FxHashSet<GridPoint> = FxHashSet::default();
        let mut exhausted: BTreeSet<Span> = BTreeSet::new();

        let mut candidates: Vec<Segment> =
            state.active_segments().into_iter().filter(|s| s.maker_count >= greedy_min_count(n)).collect();
        if let Some(line) = self.current {
            for seg in state.segments_on_line(&line) {
                if seg.has_room(n) && seg.maker_count >= 1 && !candidates.iter().any(|c| c.span() == seg.span()) {
                    candidates.push(seg);
                }
            }
        }
        candidates.sort_by(|a, b| {
            let on_current = |s: &Segment| Some(s.line) == self.current;
            heaviest_first(a, b).then_with(|| on_current(b).cmp(&on_current(a)))
        });

        let mut queue = candidates.into_iter();
        while out.len() < ctx.budget {
            let (seg, seed) = match queue.next() {
                Some(seg) => (seg, None),
                None => match fresh_row(state, &taken, n) {
                    Some((seg, seed)) => (seg, Some(seed)),
                    None => break,
                },
            };
            if !exhausted.insert(seg.span()) && seed.is_none() {
                continue;
            }
            let before = out.len();
            fill_segment(state, &seg, seed, ctx.budget, &mut out, &mut taken)?;
            if out.len() > before {
                self.current = Some(seg.line);
            } else if seed.is_some() {
                // no free point anywhere near; give up for this turn
                break;
            }
        }
        Ok(out)
    }
}

/// Claim free points of `seg` until `budget` is reached: gaps first, then
/// upward, then downward. A segment without Maker points grows up from `seed`.
fn fill_segment(
    state: &GameState,
    seg: &Segment,
    seed: Option<i64>,
    budget: usize,
    out: &mut Vec<GridPoint>,
    taken: &mut FxHashSet<GridPoint>,
) -> Result<(), StrategyError> {
    let params = state.maker_params(seg);
    let (low, high) = match (params.first(), params.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => {
            let s = seed.unwrap_or(0);
            (s, s - 1)
        }
    };
    let mut try_take = |k: i64, out: &mut Vec<GridPoint>| -> Result<bool, StrategyError> {
        if !seg.contains_param(k) {
            return Ok(false);
        }
        let p = seg.line.point_at(k)?;
        if !taken.contains(&p) && state.can_maker_claim(p) {
            taken.insert(p);
            out.push(p);
        }
        Ok(true)
    };
    let mut k = low;
    while k < high && out.len() < budget {
        try_take(k, out)?;
        k += 1;
    }
    let mut k = high + 1;
    while out.len() < budget && try_take(k, out)? {
        k += 1;
        if k - high > 4 * state.n() as i64 + 4 {
            break;
        }
    }
    let mut k = low - 1;
    while out.len() < budget && try_take(k, out)? {
        k -= 1;
        if low - k > 4 * state.n() as i64 + 4 {
            break;
        }
    }
    Ok(())
}

/// The horizontal segment through the free point nearest the origin that has room for `n` points.
fn fresh_row(state: &GameState, taken: &FxHashSet<GridPoint>, n: usize) -> Option<(Segment, i64)> {
    for r in 0..=(4 * n as i64 + 64) {
        for p in ring(r) {
            if taken.contains(&p) || !state.can_maker_claim(p) {
                continue;
            }
            let row = LineKey::through(p, Direction::HORIZONTAL);
            let k = row.param(p).ok()?;
            if let Some(seg) = state.segments_on_line(&row).into_iter().find(|s| s.contains_param(k)) {
                if seg.has_room(n) {
                    return Some((seg, k));
                }
            }
        }
    }
    None
}

/// Points at Chebyshev distance `r` from the origin, in a fixed order.
fn ring(r: i64) -> Vec<GridPoint> {
    if r == 0 {
        return vec![GridPoint::new(0, 0)];
    }
    let mut pts = Vec::with_capacity(8 * r as usize);
    for x in -r..=r {
        pts.push(GridPoint::new(x, r));
        pts.push(GridPoint::new(x, -r));
    }
    for y in -r + 1..r {
        pts.push(GridPoint::new(r, y));
        pts.push(GridPoint::new(-r, y));
    }
    pts.sort_by_key(|p| (p.x.abs() + p.y.abs(), p.y.abs(), p.x.abs(), -p.y, -p.x));
    pts
}
