//! Point-line incidence counts, the Szemerédi–Trotter bounds built from them,
//! and the replay of a splitting-Breaker match as a weighted bin game.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;
use thiserror::Error;

use crate::board::{GameState, Move, Segment};
use crate::geometry::{collinear_groups, Direction, GridPoint, LineKey};
use crate::harness::{Outcome, Transcript};
use crate::num::ceil_count;
use crate::strategies::{heaviest_first, SplitTop, StrategySpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IncidenceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported transcript: {0}")]
    Unsupported(String),
    #[error("replay failed at t={t}: {reason}")]
    Replay { t: u32, reason: String },
}

/// Constants of the incidence bound (`c`) and of the per-window budget (`c_prime`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StConfig {
    pub c: f64,
    pub c_prime: f64,
}

impl Default for StConfig {
    fn default() -> Self {
        StConfig { c: 2.5, c_prime: 2.5 }
    }
}

impl StConfig {
    pub fn new(c: f64, c_prime: f64) -> Result<Self, IncidenceError> {
        if !(c > 0.0 && c.is_finite() && c_prime > 0.0 && c_prime.is_finite()) {
            return Err(IncidenceError::InvalidArgument(format!("constants must be positive, got c={c} c'={c_prime}")));
        }
        Ok(StConfig { c, c_prime })
    }
}

/// Integer points shared by two segments of the same line, `None` if infinitely many.
fn shared_points(a: &Segment, b: &Segment) -> Option<i64> {
    let lo = match (a.lo, b.lo) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) | (None, x) => x,
    };
    let hi = match (a.hi, b.hi) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) | (None, x) => x,
    };
    match (lo, hi) {
        (Some(lo), Some(hi)) => Some((hi - lo - 1).max(0)),
        _ => None,
    }
}

/// Number of (point, segment) pairs with the point inside the segment.
/// Segments on one line may share at most one integer point.
pub fn count_incidences(points: &[GridPoint], segments: &[Segment]) -> Result<u64, IncidenceError> {
    let mut by_line: BTreeMap<LineKey, Vec<&Segment>> = BTreeMap::new();
    for s in segments {
        by_line.entry(s.line).or_default().push(s);
    }
    for (line, list) in by_line.iter_mut() {
        list.sort_by_key(|s| s.lo.map_or(i128::MIN, i128::from));
        // sorted by lo, a segment overlaps earlier ones most with the one reaching furthest right
        let mut widest: Option<&Segment> = None;
        for s in list.iter() {
            if let Some(prev) = widest {
                if shared_points(prev, s).map_or(true, |k| k > 1) {
                    return Err(IncidenceError::InvalidArgument(format!("segments on {line} overlap")));
                }
            }
            if widest.map_or(true, |w| w.hi.is_some() && s.hi.map_or(true, |h| h > w.hi.unwrap())) {
                widest = Some(s);
            }
        }
    }
    let dirs: FxHashSet<Direction> = by_line.keys().map(|l| l.dir()).collect();
    let distinct: FxHashSet<GridPoint> = points.iter().copied().collect();
    let mut total = 0u64;
    for p in distinct {
        for &d in &dirs {
            let key = LineKey::through(p, d);
            if let Some(list) = by_line.get(&key) {
                let k = key.param(p).map_err(|e| IncidenceError::InvalidArgument(e.to_string()))?;
                total += list.iter().filter(|s| s.contains_param(k)).count() as u64;
            }
        }
    }
    Ok(total)
}

/// `C p^(2/3) l^(2/3) + p + l`.
pub fn szt_bound(p: u64, l: u64, cfg: &StConfig) -> f64 {
    let (p, l) = (p as f64, l as f64);
    cfg.c * (p * l).powf(2.0 / 3.0) + p + l
}

/// `C (p^2 / k^3 + p / k)`: bound on the number of lines holding at least `k` of `p` points.
pub fn szt_rich_count_bound(p: u64, k: u64, cfg: &StConfig) -> Result<f64, IncidenceError> {
    if k < 2 {
        return Err(IncidenceError::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    let (p, k) = (p as f64, k as f64);
    Ok(cfg.c * (p * p / (k * k * k) + p / k))
}

/// Window budget for `s` timesteps when Maker plays `rate` points per timestep
/// and `bprime` bins die per timestep:
/// `C' ((rate s)^(2/3) (bprime s + 1)^(2/3) + rate s + bprime s + 1)`, and 0 at `s = 0`.
pub fn szt_m_rate(s: u64, rate: f64, bprime: f64, cfg: &StConfig) -> f64 {
    if s == 0 {
        return 0.0;
    }
    let s = s as f64;
    let (pts, segs) = (rate * s, bprime * s + 1.0);
    cfg.c_prime * ((pts * segs).powf(2.0 / 3.0) + pts + segs)
}

/// [`szt_m_rate`] with Maker's rate `T^alpha`.
pub fn szt_m(s: u64, t: u32, alpha: f64, bprime_t: f64, cfg: &StConfig) -> f64 {
    szt_m_rate(s, (t as f64).powf(alpha), bprime_t, cfg)
}

/// Smallest `K` with `M'(s) - M'(s-1) <= K ((T^alpha b')^(2/3) s^(1/3) + T^alpha + b')` for `s = 1..=T`.
pub fn szt_m_increment_constant(t: u32, alpha: f64, bprime_t: f64, cfg: &StConfig) -> f64 {
    let rate = (t as f64).powf(alpha);
    (1..=t as u64)
        .map(|s| {
            let inc = szt_m_rate(s, rate, bprime_t, cfg) - szt_m_rate(s - 1, rate, bprime_t, cfg);
            inc / ((rate * bprime_t).powf(2.0 / 3.0) * (s as f64).cbrt() + rate + bprime_t)
        })
        .fold(0.0, f64::max)
}

/// `(T^((2 alpha + 1)/3) b^(2/3) + T^alpha ln T + b ln T) / b`, natural logarithm.
pub fn c_upper_value(t: u32, alpha: f64, b_t: f64) -> Result<f64, IncidenceError> {
    if t < 2 || !(b_t >= 1.0) {
        return Err(IncidenceError::InvalidArgument(format!("need T >= 2 and b(T) >= 1, got T={t} b={b_t}")));
    }
    let tf = t as f64;
    let ln = tf.ln();
    Ok((tf.powf((2.0 * alpha + 1.0) / 3.0) * b_t.powf(2.0 / 3.0) + tf.powf(alpha) * ln + b_t * ln) / b_t)
}

/// The `w x h` grid with its corner at the origin.
pub fn grid_points(w: i64, h: i64) -> Vec<GridPoint> {
    (0..h).flat_map(|y| (0..w).map(move |x| GridPoint::new(x, y))).collect()
}

/// `count` distinct uniform points of `[0, side)^2`.
pub fn random_points(count: usize, side: i64, rng: &mut ChaCha8Rng) -> Result<Vec<GridPoint>, IncidenceError> {
    if (side as u128) * (side as u128) < count as u128 {
        return Err(IncidenceError::InvalidArgument(format!("{count} distinct points do not fit a {side} x {side} box")));
    }
    let mut seen = FxHashSet::default();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = GridPoint::new(rng.gen_range(0..side), rng.gen_range(0..side));
        if seen.insert(p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// One monitor comparison on a point set and its `k`-rich lines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorReport {
    pub label: String,
    pub points: usize,
    pub k: usize,
    pub rich_lines: usize,
    pub incidences: u64,
    pub szt_bound: f64,
    pub rich_bound: f64,
    pub incidences_ok: bool,
    pub rich_ok: bool,
}

impl MonitorReport {
    pub fn ok(&self) -> bool {
        self.incidences_ok && self.rich_ok
    }
}

/// Count incidences between `points` and their `k`-rich lines and compare both
/// the incidence count and the rich-line count with their bounds.
pub fn st_monitor(label: &str, points: &[GridPoint], k: usize, cfg: &StConfig) -> Result<MonitorReport, IncidenceError> {
    let groups = collinear_groups(points, k);
    let segments: Vec<Segment> =
        groups.iter().map(|(line, params)| Segment { line: *line, lo: None, hi: None, maker_count: params.len() }).collect();
    let incidences = count_incidences(points, &segments)?;
    let distinct = points.iter().collect::<FxHashSet<_>>().len() as u64;
    let szt = szt_bound(distinct, segments.len() as u64, cfg);
    let rich = szt_rich_count_bound(distinct, k as u64, cfg)?;
    Ok(MonitorReport {
        label: label.to_string(),
        points: distinct as usize,
        k,
        rich_lines: segments.len(),
        incidences,
        szt_bound: szt,
        rich_bound: rich,
        incidences_ok: incidences as f64 <= szt,
        rich_ok: segments.len() as f64 <= rich,
    })
}

/// A segment carrying a bin: Maker count and weight `max(count - offset, 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackedSegment {
    pub line: LineKey,
    pub lo: Option<i64>,
    pub hi: Option<i64>,
    pub count: usize,
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionStep {
    pub t: u32,
    /// Weight Maker's move added to the bins.
    pub weight_added: u64,
    /// Live bins after Maker's move, with their weights.
    pub bins: Vec<TrackedSegment>,
    /// Bins Breaker's reply split, with their weights at the time.
    pub kills: Vec<TrackedSegment>,
    /// Bins whose segment Breaker's reply created with positive weight (should be none).
    pub nonzero_entries: Vec<TrackedSegment>,
    /// Heavy targets Breaker's reply left whole, for instance when the budget ran out.
    pub unsplit_targets: Vec<TrackedSegment>,
    /// `max(1, floor(epsilon b(t) / 4))`, the number of segments split-top targets.
    pub bprime: u64,
}

/// Window check row, also the CSV record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowCheck {
    pub s: u64,
    /// Weight added to the bins over the last `s` timesteps.
    pub weight_added: u64,
    #[serde(rename = "szt_M")]
    pub szt_m: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionTrace {
    pub epsilon: f64,
    pub n: usize,
    /// Weight offset `ceil(epsilon n / 2)`.
    pub offset: usize,
    /// Last timestep covered, `tau - 1` when Maker won.
    pub turns: u32,
    /// Maker's rate used in the window budget, `m(T)`.
    pub rate: u64,
    pub bprime_final: u64,
    pub steps: Vec<ReductionStep>,
    pub windows: Vec<WindowCheck>,
    /// Number of bins: killed targets plus the final segment.
    pub bins: usize,
    pub total_added: u64,
    pub total_entered: u64,
    pub total_killed: u64,
    pub final_weight: u64,
    /// Weight of the winning segment's bin at time `T` when Maker won.
    pub winning_bin_weight: Option<u64>,
    /// `ceil(epsilon n) - offset`, set only when Maker won with `m(tau) <= n - ceil(epsilon n)`.
    pub winning_bin_required: Option<u64>,
}

impl ReductionTrace {
    /// Weight added plus weight entered equals weight killed plus the final weight.
    pub fn accounting_exact(&self) -> bool {
        self.total_added + self.total_entered == self.total_killed + self.final_weight
    }

    pub fn zero_weight_entries(&self) -> bool {
        self.steps.iter().all(|s| s.nonzero_entries.is_empty())
    }

    pub fn windows_within_budget(&self) -> bool {
        self.windows.iter().all(|w| w.slack >= 0.0)
    }

    pub fn winning_bin_ok(&self) -> bool {
        match (self.winning_bin_weight, self.winning_bin_required) {
            (Some(w), Some(req)) => w >= req,
            _ => true,
        }
    }

    /// Human-readable list of everything that failed.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.accounting_exact() {
            out.push(format!(
                "weight accounting: added {} entered {} killed {} final {}",
                self.total_added, self.total_entered, self.total_killed, self.final_weight
            ));
        }
        for s in &self.steps {
            for e in &s.nonzero_entries {
                out.push(format!("t={}: bin on {} entered with weight {}", s.t, e.line, e.weight));
            }
        }
        for w in self.windows.iter().filter(|w| w.slack < 0.0) {
            out.push(format!("s={}: weight {} exceeds M({}) = {:.3}", w.s, w.weight_added, w.s, w.szt_m));
        }
        if !self.winning_bin_ok() {
            out.push(format!(
                "winning bin weight {:?} below {:?}",
                self.winning_bin_weight, self.winning_bin_required
            ));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.windows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

type Span = (LineKey, Option<i64>, Option<i64>);

/// One segment from the Breaker move that created it to the one that split it.
struct Life {
    line: LineKey,
    lo: Option<i64>,
    hi: Option<i64>,
    /// Timestep whose Breaker move created the segment, `None` if it held no
    /// weight when it appeared.
    created: Option<u32>,
    entry: u64,
    /// Weight and Maker count after each Maker move while alive.
    history: Vec<(u32, u64, usize)>,
    /// Timestep whose Breaker move split it, and whether split-top targeted it.
    died: Option<(u32, bool)>,
}

impl Life {
    fn weight_at(&self, t: u32) -> u64 {
        self.history.iter().rev().find(|h| h.0 <= t).map_or(self.entry, |h| h.1)
    }

    fn snapshot(&self, t: u32) -> TrackedSegment {
        let (weight, count) = self.history.iter().rev().find(|h| h.0 <= t).map_or((self.entry, 0), |h| (h.1, h.2));
        TrackedSegment { line: self.line, lo: self.lo, hi: self.hi, count, weight }
    }
}

fn heavy(state: &GameState, offset: usize) -> Vec<Segment> {
    state.active_segments().into_iter().filter(|s| s.maker_count > offset).collect()
}

fn split_top_epsilon(name: &str, game_epsilon: f64) -> Result<f64, IncidenceError> {
    let spec: StrategySpec = name.parse().map_err(|e: crate::strategies::StrategyError| IncidenceError::Unsupported(e.to_string()))?;
    if spec.name != "split-top" {
        return Err(IncidenceError::Unsupported(format!("breaker {name:?} is not split-top")));
    }
    let eps = spec.get_f64("epsilon").map_err(|e| IncidenceError::Unsupported(e.to_string()))?;
    Ok(eps.unwrap_or(game_epsilon))
}

/// Replay a match whose Breaker was split-top as a weighted bin game.
///
/// A segment holding more than `ceil(epsilon n / 2)` Maker points has weight
/// `count - ceil(epsilon n / 2)`. The bins are the segments split-top chose and
/// split, plus the final segment: Maker's winning segment as it stood at
/// `T = tau - 1`, or the heaviest live segment when Breaker survived. Other
/// segments are not bins. For every `s` the weight added to bins over the last
/// `s` timesteps is compared with the window budget at rate `m(T)` and
/// `b' = max(1, floor(epsilon b(T) / 4))`.
pub fn reduce_to_bingame(
    transcript: &Transcript,
    epsilon: f64,
    n: usize,
    cfg: &StConfig,
) -> Result<ReductionTrace, IncidenceError> {
    let h = &transcript.header;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(IncidenceError::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let split_eps = split_top_epsilon(&h.breaker, h.epsilon)?;
    if (split_eps - epsilon).abs() > 1e-12 {
        return Err(IncidenceError::InvalidArgument(format!(
            "epsilon = {epsilon} but the transcript's split-top used {split_eps}"
        )));
    }
    if n != h.n {
        return Err(IncidenceError::InvalidArgument(format!("n = {n} but the transcript has n = {}", h.n)));
    }
    let bad = |reason: String| IncidenceError::InvalidArgument(reason);
    let mode = h.mode().map_err(|e| bad(e.to_string()))?;
    let (m, b) = h.schedules().map_err(|e| bad(e.to_string()))?;
    let splitter = SplitTop::new(Some(epsilon)).map_err(|e| bad(e.to_string()))?;
    let offset = ceil_count(epsilon * n as f64 / 2.0);
    let weight = |count: usize| count.saturating_sub(offset) as u64;
    let mut state = GameState::new(mode.clone())
        .and_then(|s| s.with_line_threshold((offset + 1).clamp(2, n)))
        .map_err(|e| bad(e.to_string()))?
        .with_directed_occupancy(h.directed_occupies);
    let bprime_at = |t: u32| splitter.targets(b.eval(t) as usize, &mode) as u64;

    let (last_turn, tau) = match transcript.outcome {
        Outcome::MakerWin { tau, .. } => (tau.saturating_sub(1), Some(tau)),
        Outcome::Survived { .. } => (transcript.moves.last().map_or(0, |r| r.t), None),
    };

    let mut lives: Vec<Life> = Vec::new();
    let mut alive: FxHashMap<Span, usize> = FxHashMap::default();
    let mut unsplit: BTreeMap<u32, Vec<TrackedSegment>> = BTreeMap::new();
    let mut final_span: Option<Span> = None;
    for rec in &transcript.moves {
        let t = rec.t;
        let replay_err = |e: crate::board::BoardError| IncidenceError::Replay { t, reason: e.to_string() };
        match &rec.mv {
            Move::Maker(points) => {
                state.set_timestep(t);
                state.apply_maker(points).map_err(replay_err)?;
                if Some(t) == tau {
                    final_span = state.winning_segments().first().map(Segment::span);
                    break;
                }
                let segs = heavy(&state, offset);
                if segs.iter().filter(|s| alive.contains_key(&s.span())).count() != alive.len() {
                    return Err(IncidenceError::Replay { t, reason: "a weighted segment vanished on a Maker move".into() });
                }
                for s in segs {
                    let idx = *alive.entry(s.span()).or_insert_with(|| {
                        lives.push(Life { line: s.line, lo: s.lo, hi: s.hi, created: None, entry: 0, history: Vec::new(), died: None });
                        lives.len() - 1
                    });
                    lives[idx].history.push((t, weight(s.maker_count), s.maker_count));
                }
            }
            Move::Breaker(marks) => {
                let mut before = heavy(&state, offset);
                before.retain(|s| s.maker_count < n);
                before.sort_by(heaviest_first);
                before.truncate(splitter.targets(b.eval(t) as usize, &mode));
                let targets: FxHashSet<Span> = before.iter().map(Segment::span).collect();

                state.apply_breaker(marks).map_err(replay_err)?;
                let after: FxHashMap<Span, Segment> = heavy(&state, offset).into_iter().map(|s| (s.span(), s)).collect();
                alive.retain(|span, idx| {
                    if after.contains_key(span) {
                        return true;
                    }
                    lives[*idx].died = Some((t, targets.contains(span)));
                    false
                });
                for span in &targets {
                    if let Some(&idx) = alive.get(span) {
                        unsplit.entry(t).or_default().push(lives[idx].snapshot(t));
                    }
                }
                for (span, s) in after {
                    alive.entry(span).or_insert_with(|| {
                        let w = weight(s.maker_count);
                        lives.push(Life { line: s.line, lo: s.lo, hi: s.hi, created: Some(t), entry: w, history: vec![(t, w, s.maker_count)], died: None });
                        lives.len() - 1
                    });
                }
            }
        }
    }
    if tau.is_none() {
        let mut live: Vec<&Life> = alive.values().map(|&i| &lives[i]).collect();
        live.sort_by(|a, b| {
            let (x, y) = (a.snapshot(last_turn), b.snapshot(last_turn));
            y.count.cmp(&x.count).then_with(|| x.line.cmp(&y.line)).then_with(|| x.lo.cmp(&y.lo))
        });
        final_span = live.first().map(|l| (l.line, l.lo, l.hi));
    }
    let final_idx = final_span.and_then(|span| alive.get(&span).copied());

    let is_bin = |i: usize, l: &Life| matches!(l.died, Some((d, true)) if d <= last_turn) || Some(i) == final_idx;
    let bins: Vec<usize> = lives.iter().enumerate().filter(|(i, l)| is_bin(*i, l)).map(|(i, _)| i).collect();
    for &i in &bins {
        let l = &lives[i];
        if l.history.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(IncidenceError::Replay { t: l.history[0].0, reason: format!("bin on {} lost weight", l.line) });
        }
    }

    let mut steps: Vec<ReductionStep> = (1..=last_turn)
        .map(|t| ReductionStep {
            t,
            weight_added: 0,
            bins: Vec::new(),
            kills: Vec::new(),
            nonzero_entries: Vec::new(),
            unsplit_targets: unsplit.remove(&t).unwrap_or_default(),
            bprime: bprime_at(t),
        })
        .collect();
    let mut total_entered = 0u64;
    let mut total_killed = 0u64;
    for &i in &bins {
        let l = &lives[i];
        let mut prev = l.entry;
        for &(t, w, _) in &l.history {
            if Some(t) == l.created || t > last_turn {
                continue;
            }
            let step = &mut steps[t as usize - 1];
            step.weight_added += w - prev;
            step.bins.push(l.snapshot(t));
            prev = w;
        }
        if let Some(c) = l.created {
            total_entered += l.entry;
            if l.entry > 0 {
                steps[c as usize - 1].nonzero_entries.push(l.snapshot(c));
            }
        }
        if let Some((d, true)) = l.died {
            let snap = l.snapshot(d);
            total_killed += snap.weight;
            steps[d as usize - 1].kills.push(snap);
        }
    }
    for step in &mut steps {
        step.bins.sort_by(|a, b| (a.line, a.lo).cmp(&(b.line, b.lo)));
    }

    let rate = m.eval(last_turn);
    let bprime_final = bprime_at(last_turn);
    let mut windows = Vec::with_capacity(steps.len());
    let mut added = 0u64;
    for (s, step) in steps.iter().rev().enumerate() {
        added += step.weight_added;
        let s = s as u64 + 1;
        let budget = szt_m_rate(s, rate as f64, bprime_final as f64, cfg);
        windows.push(WindowCheck { s, weight_added: added, szt_m: budget, slack: budget - added as f64 });
    }

    let final_weight = final_idx.map_or(0, |i| lives[i].weight_at(last_turn));
    let eps_n = ceil_count(epsilon * n as f64);
    let (winning_bin_weight, winning_bin_required) = match transcript.outcome {
        Outcome::MakerWin { m_tau, .. } => {
            let hypothesis = m_tau as usize + eps_n <= n;
            (Some(final_weight), hypothesis.then(|| eps_n.saturating_sub(offset) as u64))
        }
        Outcome::Survived { .. } => (None, None),
    };
    Ok(ReductionTrace {
        epsilon,
        n,
        offset,
        turns: last_turn,
        rate,
        bprime_final,
        total_added: steps.iter().map(|s| s.weight_added).sum(),
        total_entered,
        total_killed,
        final_weight,
        bins: bins.len(),
        steps,
        windows,
        winning_bin_weight,
        winning_bin_required,
    })
}
