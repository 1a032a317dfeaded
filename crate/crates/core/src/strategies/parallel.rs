//! Maker's parallel-lines strategy against a logarithmic Breaker.
//!
//! Over a window of `r` timesteps Maker spreads points over `r*b + 1` fresh
//! parallel lines, then repeatedly halves the set of lines still free of
//! Breaker points. After `log2 r` rounds the surviving lines each carry at
//! least `floor(m / 4b) * log2 r` points, and on the last timestep of the
//! window Maker completes one of them.

use super::{MakerStrategy, StrategyContext, StrategyError};
use crate::board::{GameMode, Variant};
use crate::geometry::{Direction, GridPoint, LineKey, COORD_LIMIT};
use crate::num::{ceil_count, is_power_of_two};
use crate::schedule::Schedule;

/// Timestep window of the plan: `t1` is minimal with `m(t1) > (1 - epsilon) n`,
/// `r` the largest power of two with `m(t1 - r) > n / 2`, and `t0 = t1 - r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanWindow {
    pub t0: u32,
    pub t1: u32,
    pub r: u32,
}

impl PlanWindow {
    pub fn rounds(&self) -> u32 {
        self.r.trailing_zeros()
    }

    /// Round (1-based) that timestep `t` belongs to, if inside the window.
    /// Round `i` covers `r / 2^i` timesteps, so rounds end at `t1 - 1`.
    pub fn round_of(&self, t: u32) -> Option<u32> {
        if t <= self.t0 || t >= self.t1 {
            return None;
        }
        let mut end = self.t0;
        for i in 1..=self.rounds() {
            end += self.r >> i;
            if t <= end {
                return Some(i);
            }
        }
        None
    }
}

pub fn parallel_lines_window(m: &Schedule, n: usize, epsilon: f64) -> Result<PlanWindow, StrategyError> {
    const SEARCH_LIMIT: u32 = 50_000_000;
    let threshold = (1.0 - epsilon) * n as f64;
    let t1 = (1..=SEARCH_LIMIT)
        .find(|&t| m.eval(t) as f64 > threshold)
        .ok_or_else(|| StrategyError::Config(format!("m(t) never exceeds (1 - epsilon) n = {threshold}")))?;
    let half = n as f64 / 2.0;
    let mut r = 1u32 << 30;
    while r >= 1 {
        if r < t1 && m.eval(t1 - r) as f64 > half {
            break;
        }
        r >>= 1;
    }
    if r < 2 {
        return Err(StrategyError::Config(format!(
            "no window of length >= 2 before t1 = {t1} keeps m(t) above n/2 = {half}"
        )));
    }
    Ok(PlanWindow { t0: t1 - r, t1, r })
}

/// Lines picked at the start of the window and their state.
#[derive(Clone, Debug)]
pub struct ParallelLinesPlan {
    pub window: PlanWindow,
    /// Breaker budget the plan is built against, `ceil(C ln n)`.
    pub b: usize,
    /// Points placed per timestep inside the window, `ceil(n / 2)`.
    pub m: usize,
    pub lines: Vec<LineKey>,
    pub live: Vec<bool>,
    pub counts: Vec<usize>,
    /// Last completed halving round.
    pub phase: u32,
    /// Live line count after each completed round.
    pub live_after_round: Vec<usize>,
    base: Vec<i64>,
    xs: Vec<i64>,
    x0: i64,
    planned: usize,
    cursor: usize,
}

impl ParallelLinesPlan {
    pub fn live_count(&self) -> usize {
        self.live.iter().filter(|l| **l).count()
    }

    /// Guaranteed count on a surviving line: `floor(m / 4b) * log2 r`.
    pub fn guaranteed_count(&self) -> usize {
        if self.b == 0 {
            return self.m * (self.window.r as usize - 1);
        }
        self.m / (4 * self.b) * self.window.rounds() as usize
    }

    fn point(&self, i: usize, k: usize) -> GridPoint {
        GridPoint::new(self.xs[i], self.base[i] + k as i64)
    }

    fn line_at(&self, x: i64) -> Option<usize> {
        let i = x - self.x0;
        if i >= 0 && (i as usize) < self.planned {
            return Some(i as usize);
        }
        self.xs[self.planned..].iter().position(|&e| e == x).map(|j| self.planned + j)
    }
}

#[derive(Clone, Debug)]
pub struct ParallelLines {
    c: f64,
    epsilon: f64,
    window: Option<PlanWindow>,
    plan: Option<ParallelLinesPlan>,
    breaker_seen: usize,
    best_at_window_end: Option<usize>,
}

impl ParallelLines {
    /// `c` sets the Breaker budget the plan withstands, `ceil(c ln n)` per turn;
    /// `epsilon` fixes the completion time `t1`.
    pub fn new(c: f64, epsilon: f64) -> Result<Self, StrategyError> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(StrategyError::Config(format!("parallel-lines needs c >= 0, got {c}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(StrategyError::Config(format!("parallel-lines epsilon must lie in (0, 1), got {epsilon}")));
        }
        Ok(ParallelLines { c, epsilon, window: None, plan: None, breaker_seen: 0, best_at_window_end: None })
    }

    pub fn plan(&self) -> Option<&ParallelLinesPlan> {
        self.plan.as_ref()
    }

    /// Largest count on a live line when the window closed, before completion.
    pub fn best_at_window_end(&self) -> Option<usize> {
        self.best_at_window_end
    }

    fn create_plan(&mut self, window: PlanWindow, ctx: &StrategyContext<'_>) -> Result<(), StrategyError> {
        let n = ctx.n();
        let b = ceil_count(self.c * (n as f64).ln());
        let w = window.r as usize * b + 1;
        let x0 = ctx.state.max_abs_coord() + 1;
        if x0 + w as i64 >= COORD_LIMIT {
            return Err(StrategyError::Config(format!("{w} parallel lines do not fit in the coordinate range")));
        }
        // Line i starts at height S * (i^2 mod p). No three such points are collinear
        // across lines, and S > 2 w n keeps that true for the points stacked above them.
        let p = next_prime(w as u64).max(2);
        let mut spread = 2 * w as i64 * n as i64 + 1;
        if p > 1 && spread.saturating_mul(p as i64 - 1) + n as i64 >= COORD_LIMIT {
            spread = ((COORD_LIMIT - 1 - n as i64) / (p as i64 - 1).max(1)).max(1);
        }
        let base: Vec<i64> = (0..w as u64).map(|i| spread * ((i * i) % p) as i64).collect();
        let lines = (0..w).map(|i| LineKey::through(GridPoint::new(x0 + i as i64, 0), Direction::VERTICAL)).collect();
        self.plan = Some(ParallelLinesPlan {
            window,
            b,
            m: n.div_ceil(2),
            lines,
            live: vec![true; w],
            counts: vec![0; w],
            phase: 0,
            live_after_round: Vec::new(),
            base,
            xs: (0..w as i64).map(|i| x0 + i).collect(),
            x0,
            planned: w,
            cursor: 0,
        });
        self.breaker_seen = ctx.state.breaker_marks().len();
        Ok(())
    }

    fn note_breaker(&mut self, ctx: &StrategyContext<'_>) {
        let plan = self.plan.as_mut().expect("plan exists");
        let marks = ctx.state.breaker_marks();
        let directed = ctx.mode().variant == Variant::Directed;
        for mark in &marks[self.breaker_seen..] {
            if directed && mark.dir != Some(Direction::VERTICAL) {
                continue;
            }
            if let Some(i) = plan.line_at(mark.point.x) {
                plan.live[i] = false;
            }
        }
        self.breaker_seen = marks.len();
    }

    /// Designate lines dead, largest x first, until `target` remain live.
    fn trim_to(plan: &mut ParallelLinesPlan, target: usize) {
        let mut live = plan.live_count();
        for i in (0..plan.lines.len()).rev() {
            if live <= target {
                break;
            }
            if plan.live[i] {
                plan.live[i] = false;
                live -= 1;
            }
        }
    }

    fn close_rounds_before(&mut self, round: u32) {
        let plan = self.plan.as_mut().expect("plan exists");
        let rb = plan.window.r as usize * plan.b;
        while plan.phase + 1 < round {
            plan.phase += 1;
            let target = (rb >> plan.phase) + 1;
            Self::trim_to(plan, target);
            plan.live_after_round.push(plan.live_count());
        }
    }

    fn spread_points(&mut self, budget: usize, ctx: &StrategyContext<'_>) -> Vec<GridPoint> {
        let plan = self.plan.as_mut().expect("plan exists");
        let w = plan.lines.len();
        let mut out = Vec::with_capacity(budget);
        if plan.live_count() == 0 {
            return out;
        }
        while out.len() < budget {
            let i = plan.cursor % w;
            plan.cursor = (plan.cursor + 1) % w;
            if !plan.live[i] {
                continue;
            }
            let p = plan.point(i, plan.counts[i]);
            if !ctx.state.can_maker_claim(p) {
                plan.live[i] = false;
                if plan.live_count() == 0 {
                    break;
                }
                continue;
            }
            plan.counts[i] += 1;
            out.push(p);
        }
        out
    }

    /// Fill the live line with the most points (a fresh one if none is left).
    fn complete(&mut self, budget: usize, ctx: &StrategyContext<'_>) -> Vec<GridPoint> {
        let n = ctx.n();
        let plan = self.plan.as_mut().expect("plan exists");
        let best = (0..plan.lines.len()).filter(|&i| plan.live[i]).max_by_key(|&i| (plan.counts[i], std::cmp::Reverse(i)));
        let i = match best {
            Some(i) => i,
            None => {
                // every planned line is broken: open another column right of all play
                let x = ctx
                    .state
                    .maker_points()
                    .map(|p| p.x)
                    .chain(ctx.state.breaker_marks().iter().map(|m| m.point.x))
                    .chain(plan.xs.iter().copied())
                    .max()
                    .unwrap_or(0)
                    + 1;
                plan.lines.push(LineKey::through(GridPoint::new(x, 0), Direction::VERTICAL));
                plan.xs.push(x);
                plan.live.push(true);
                plan.counts.push(0);
                plan.base.push(0);
                plan.lines.len() - 1
            }
        };
        let need = n.saturating_sub(plan.counts[i]).min(budget);
        let mut out = Vec::with_capacity(need);
        while out.len() < need {
            let p = plan.point(i, plan.counts[i]);
            plan.counts[i] += 1;
            if ctx.state.can_maker_claim(p) {
                out.push(p);
            } else {
                plan.live[i] = false;
                break;
            }
        }
        out
    }
}

impl MakerStrategy for ParallelLines {
    fn name(&self) -> String {
        format!("parallel-lines:c={},epsilon={}", self.c, self.epsilon)
    }

    fn min_tracked_count(&self, mode: &GameMode) -> usize {
        mode.n
    }

    fn play(&mut self, ctx: &mut StrategyContext<'_>) -> Result<Vec<GridPoint>, StrategyError> {
        let window = match self.window {
            Some(w) => w,
            None => {
                let w = parallel_lines_window(ctx.maker_schedule, ctx.n(), self.epsilon)?;
                debug_assert!(is_power_of_two(w.r as u64));
                self.window = Some(w);
                w
            }
        };
        if ctx.t <= window.t0 {
            // only the window's moves are used; earlier turns are passed
            return Ok(Vec::new());
        }
        if self.plan.is_none() {
            self.create_plan(window, ctx)?;
        }
        self.note_breaker(ctx);
        match window.round_of(ctx.t) {
            Some(round) => {
                self.close_rounds_before(round);
                let m = self.plan.as_ref().map_or(0, |p| p.m);
                Ok(self.spread_points(ctx.budget.min(m), ctx))
            }
            None => {
                self.close_rounds_before(window.rounds() + 1);
                if self.best_at_window_end.is_none() {
                    let plan = self.plan.as_ref().expect("plan exists");
                    let best = (0..plan.lines.len()).filter(|&i| plan.live[i]).map(|i| plan.counts[i]).max();
                    self.best_at_window_end = Some(best.unwrap_or(0));
                }
                Ok(self.complete(ctx.budget, ctx))
            }
        }
    }
}

fn next_prime(mut k: u64) -> u64 {
    let is_prime = |v: u64| v >= 2 && (2..).take_while(|d| d * d <= v).all(|d| v % d != 0);
    while !is_prime(k) {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::collinear_groups;

    #[test]
    fn window_for_linear_budget() {
        let m = Schedule::power(1.0, 1.0).unwrap();
        // n = 512, epsilon = 0.08: t1 = 472, m(t1 - r) > 256 gives r = 128
        assert_eq!(parallel_lines_window(&m, 512, 0.08).unwrap(), PlanWindow { t0: 344, t1: 472, r: 128 });
        let w = PlanWindow { t0: 10, t1: 14, r: 4 };
        assert_eq!(w.rounds(), 2);
        assert_eq!((11..=14).map(|t| w.round_of(t)).collect::<Vec<_>>(), vec![Some(1), Some(1), Some(2), None]);
    }

    #[test]
    fn window_too_short_is_a_configuration_error() {
        let m = Schedule::Const { c: 100 };
        assert!(parallel_lines_window(&m, 10, 0.1).is_err());
    }

    #[test]
    fn primes() {
        assert_eq!(next_prime(1153), 1153);
        assert_eq!(next_prime(1154), 1163);
        assert_eq!(next_prime(8), 11);
    }

    #[test]
    fn plan_points_are_collinear_only_along_their_columns() {
        let w = 23usize;
        let n = 6i64;
        let p = next_prime(w as u64) as i64;
        let s = 2 * w as i64 * n + 1;
        let pts: Vec<GridPoint> =
            (0..w as i64).flat_map(|i| (0..n).map(move |k| GridPoint::new(i, s * ((i * i) % p) + k))).collect();
        for (line, members) in collinear_groups(&pts, 3) {
            assert_eq!(line.dir(), Direction::VERTICAL, "{line} holds {} plan points", members.len());
        }
    }
}
