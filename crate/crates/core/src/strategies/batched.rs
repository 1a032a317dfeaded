//! Whole-game point sets for the batched game, where Maker commits every point
//! up to time T at once and Breaker answers with his cumulative budget.

use std::collections::{BTreeSet, BinaryHeap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::split::{split_params, split_threshold, SplitRule};
use super::StrategyError;
use crate::board::BreakerMark;
use crate::geometry::{collinear_groups, GridPoint, LineKey};
use crate::num::ceil_count;
use crate::schedule::Schedule;

/// Rectangle of Maker points with its derivation.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangleSet {
    /// Batch horizon `ceil((n/2)^(1/alpha))`.
    pub t: u32,
    /// Maker's batched budget `sum_{t<=T} ceil(t^alpha)`.
    pub budget: u64,
    /// Rectangle height `floor(budget / n)`.
    pub h: u64,
    pub points: Vec<GridPoint>,
}

/// The integer points of `[0, n) x [0, h)`, with `h` as large as Maker's batched
/// budget for `m(t) = ceil(t^alpha)` up to `T = ceil((n/2)^(1/alpha))` allows.
pub fn maker_rectangle_batched(n: usize, alpha: f64) -> Result<RectangleSet, StrategyError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StrategyError::Config(format!("rectangle Maker needs 0 < alpha < 1, got {alpha}")));
    }
    if n < 2 {
        return Err(StrategyError::Config(format!("rectangle Maker needs n >= 2, got {n}")));
    }
    let t = ceil_count((n as f64 / 2.0).powf(1.0 / alpha)).max(1) as u32;
    let budget = Schedule::power(alpha, 1.0).map_err(|e| StrategyError::Config(e.to_string()))?.cumulative(t);
    let h = budget / n as u64;
    if h < 1 {
        return Err(StrategyError::Config(format!("budget {budget} cannot fill one row of length {n}")));
    }
    let points = (0..h as i64).flat_map(|y| (0..n as i64).map(move |x| GridPoint::new(x, y))).collect();
    Ok(RectangleSet { t, budget, h, points })
}

/// A near-square grid of at most `budget` points with its lower-left corner at the origin.
pub fn maker_grid_batched(budget: u64) -> Vec<GridPoint> {
    let w = (budget as f64).sqrt().floor().max(1.0) as i64;
    let h = budget as i64 / w;
    (0..h).flat_map(|y| (0..w).map(move |x| GridPoint::new(x, y))).collect()
}

/// Breaker's batched answer: epsilon-split every line holding at least
/// `ceil(epsilon n)` of Maker's points, taking Maker points where the split needs them.
pub fn breaker_batched_split(
    maker: &[GridPoint],
    epsilon: f64,
    n: usize,
    budget: usize,
) -> Result<Vec<GridPoint>, StrategyError> {
    let k = split_threshold(epsilon, n);
    let mut chosen: BTreeSet<GridPoint> = BTreeSet::new();
    for (line, params) in collinear_groups(maker, k) {
        for p in split_params(&params, None, None, k, SplitRule::Capturing) {
            chosen.insert(line.point_at(p)?);
        }
    }
    if chosen.len() > budget {
        return Err(StrategyError::BudgetExceeded { required: chosen.len(), available: budget });
    }
    Ok(chosen.into_iter().collect())
}

/// Outcome of the random batched Breaker.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomBatchedSet {
    pub points: Vec<GridPoint>,
    /// Candidate sets drawn, including the accepted one.
    pub attempts: usize,
    pub probability: f64,
    /// Run length every rich line must be cut below, `ceil(epsilon T^alpha)`.
    pub run_length: usize,
    /// Size bound `(2 / epsilon) T ln T`.
    pub size_bound: f64,
}

/// Whether any line in `groups` keeps `run` consecutive (in line order) points outside `hit`.
fn has_free_run(groups: &[Vec<usize>], hit: &[bool], run: usize) -> bool {
    groups.iter().any(|members| {
        let mut len = 0usize;
        members.iter().any(|&i| {
            if hit[i] {
                len = 0;
                false
            } else {
                len += 1;
                len >= run
            }
        })
    })
}

/// Sample each Maker point with probability `min(1, 2 ln T / (epsilon T^alpha))`
/// until the sample cuts every run of `ceil(epsilon T^alpha)` Maker points on a
/// line and has at most `(2 / epsilon) T ln T` points.
pub fn breaker_batched_random(
    maker: &[GridPoint],
    epsilon: f64,
    alpha: f64,
    t: u32,
    rng: &mut ChaCha8Rng,
    max_retries: usize,
) -> Result<RandomBatchedSet, StrategyError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StrategyError::Config(format!("random batched Breaker needs 0 < alpha < 1, got {alpha}")));
    }
    if t < 2 {
        return Err(StrategyError::Config(format!("random batched Breaker needs T >= 2, got {t}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(StrategyError::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let tf = t as f64;
    let scale = epsilon * tf.powf(alpha);
    let run = ceil_count(scale).max(1);
    let probability = (2.0 * tf.ln() / scale).min(1.0);
    let size_bound = 2.0 / epsilon * tf * tf.ln();

    let mut pts: Vec<GridPoint> = maker.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let groups: Vec<Vec<usize>> = if run >= 2 {
        collinear_groups(&pts, run)
            .into_iter()
            .map(|(line, params)| {
                params.iter().map(|&k| pts.binary_search(&line.point_at(k).expect("member")).expect("member")).collect()
            })
            .collect()
    } else {
        // every single point is a run of length 1
        (0..pts.len()).map(|i| vec![i]).collect()
    };

    let (mut missed, mut oversized) = (0usize, 0usize);
    for attempt in 1..=max_retries.max(1) {
        let hit: Vec<bool> = pts.iter().map(|_| probability >= 1.0 || rng.gen_bool(probability)).collect();
        let size = hit.iter().filter(|h| **h).count();
        let too_big = size as f64 > size_bound;
        let leaks = has_free_run(&groups, &hit, run);
        if too_big {
            oversized += 1;
        }
        if leaks {
            missed += 1;
        }
        if !too_big && !leaks {
            let points = pts.iter().zip(&hit).filter(|(_, h)| **h).map(|(p, _)| *p).collect();
            return Ok(RandomBatchedSet { points, attempts: attempt, probability, run_length: run, size_bound });
        }
    }
    Err(StrategyError::SamplingFailure { attempts: max_retries.max(1), missed, oversized })
}

/// Directed Breaker for the batched game: repeatedly marks the median Maker
/// point of the longest unbroken run (ties by line key), in that run's direction,
/// until every run is shorter than `k` or the budget is spent.
pub fn breaker_batched_directed_greedy(maker: &[GridPoint], k: usize, budget: usize) -> Vec<BreakerMark> {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    struct Run {
        len: usize,
        line: std::cmp::Reverse<LineKey>,
        params: Vec<i64>,
    }
    let k = k.max(2);
    let mut heap: BinaryHeap<Run> = collinear_groups(maker, k)
        .into_iter()
        .map(|(line, params)| Run { len: params.len(), line: std::cmp::Reverse(line), params })
        .collect();
    let mut out = Vec::new();
    while out.len() < budget {
        let Some(run) = heap.pop() else { break };
        let line = run.line.0;
        let mid = run.params.len() / 2;
        let point = line.point_at(run.params[mid]).expect("Maker point on its line");
        out.push(BreakerMark::directed(point, line.dir()));
        for part in [&run.params[..mid], &run.params[mid + 1..]] {
            if part.len() >= k {
                heap.push(Run { len: part.len(), line: run.line, params: part.to_vec() });
            }
        }
    }
    out
}
