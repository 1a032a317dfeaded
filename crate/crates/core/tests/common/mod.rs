//! Brute-force oracles shared by the integration tests and the acceptance run.
//! Nothing here calls into the engine's line index.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use linegame::board::{BreakerMark, GameMode, GameState, Variant};
use linegame::geometry::{canonical_direction, Direction, GridPoint};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn pt(x: i64, y: i64) -> GridPoint {
    GridPoint::new(x, y)
}

fn cross(o: GridPoint, a: GridPoint, b: GridPoint) -> i64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn parallel(dx: i64, dy: i64, d: Direction) -> bool {
    dx * d.dy() - dy * d.dx() == 0
}

/// `a*x + b*y = c` with `gcd(a, b) = 1` and a fixed sign.
fn line_of(p: GridPoint, q: GridPoint) -> (i64, i64, i64) {
    let (mut a, mut b) = (q.y - p.y, p.x - q.x);
    let g = num_gcd(a.abs(), b.abs());
    a /= g;
    b /= g;
    if a < 0 || (a == 0 && b < 0) {
        a = -a;
        b = -b;
    }
    (a, b, a * p.x + b * p.y)
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

/// Winning groups by exhaustive search: every collinear `n`-subset of Maker's
/// points with no blocking mark between its extremes, merged per line into the
/// runs that no mark separates.
pub fn brute_winning_groups(
    maker: &[GridPoint],
    marks: &[BreakerMark],
    n: usize,
    variant: Variant,
    batched: bool,
) -> BTreeSet<Vec<GridPoint>> {
    let captured: BTreeSet<GridPoint> = marks.iter().map(|m| m.point).collect();
    let mut pts: Vec<GridPoint> = maker.to_vec();
    if batched && variant == Variant::Standard {
        pts.retain(|p| !captured.contains(p));
    }
    pts.sort();
    pts.dedup();

    let blocks = |m: &BreakerMark, a: GridPoint, b: GridPoint| -> bool {
        if cross(a, b, m.point) != 0 {
            return false;
        }
        match (variant, m.dir) {
            (Variant::Directed, Some(d)) => parallel(b.x - a.x, b.y - a.y, d),
            (Variant::Directed, None) => false,
            (Variant::Standard, _) => true,
        }
    };

    let mut by_line: BTreeMap<(i64, i64, i64), BTreeSet<GridPoint>> = BTreeMap::new();
    for subset in pts.iter().copied().combinations(n) {
        let (first, last) = (subset[0], subset[n - 1]);
        if !subset.iter().all(|&p| cross(first, last, p) == 0) {
            continue;
        }
        let hit = marks.iter().any(|m| blocks(m, first, last) && first <= m.point && m.point <= last);
        if !hit {
            by_line.entry(line_of(first, last)).or_default().extend(subset);
        }
    }

    let mut out = BTreeSet::new();
    for members in by_line.values() {
        let members: Vec<GridPoint> = members.iter().copied().collect();
        let mut group = vec![members[0]];
        for w in members.windows(2) {
            let (a, b) = (w[0], w[1]);
            if marks.iter().any(|m| blocks(m, a, b) && a < m.point && m.point < b) {
                out.insert(std::mem::take(&mut group));
            }
            group.push(b);
        }
        out.insert(group);
    }
    out
}

/// The engine's winning segments as sorted Maker point lists.
pub fn engine_winning_groups(state: &GameState) -> BTreeSet<Vec<GridPoint>> {
    state
        .winning_segments()
        .iter()
        .map(|seg| {
            let mut pts: Vec<GridPoint> =
                state.maker_params(seg).into_iter().map(|k| seg.line.point_at(k).unwrap()).collect();
            pts.sort();
            pts
        })
        .collect()
}

fn small_direction(rng: &mut ChaCha8Rng) -> Direction {
    loop {
        let (dx, dy) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        if let Ok(d) = canonical_direction(dx, dy) {
            return d;
        }
    }
}

fn clamp_point(rng: &mut ChaCha8Rng, lim: i64) -> GridPoint {
    pt(rng.gen_range(-lim..=lim), rng.gen_range(-lim..=lim))
}

/// A random position in `[-8, 8]^2`: up to 25 Maker points, some of them
/// deliberately on a few lines, and up to 10 Breaker marks, half of them on
/// lines through two Maker points. Turn-based modes keep marks off Maker points.
pub fn random_board(rng: &mut ChaCha8Rng, mode: &GameMode) -> (Vec<GridPoint>, Vec<BreakerMark>) {
    const LIM: i64 = 8;
    let target = rng.gen_range(0..=25usize);
    let mut maker: BTreeSet<GridPoint> = BTreeSet::new();
    while maker.len() < target {
        if rng.gen_bool(0.6) {
            let start = clamp_point(rng, LIM);
            let d = small_direction(rng);
            let len = rng.gen_range(2..=6);
            for i in 0..len {
                let p = pt(start.x + i * d.dx(), start.y + i * d.dy());
                if p.x.abs() <= LIM && p.y.abs() <= LIM && maker.len() < target {
                    maker.insert(p);
                }
            }
        } else {
            maker.insert(clamp_point(rng, LIM));
        }
    }
    let maker: Vec<GridPoint> = maker.into_iter().collect();

    let count = rng.gen_range(0..=10usize);
    let mut marks: Vec<BreakerMark> = Vec::new();
    let mut used: BTreeSet<GridPoint> = BTreeSet::new();
    let mut tries = 0;
    while marks.len() < count && tries < 500 {
        tries += 1;
        let (p, dir) = if maker.len() >= 2 && rng.gen_bool(0.5) {
            let a = maker[rng.gen_range(0..maker.len())];
            let b = maker[rng.gen_range(0..maker.len())];
            if a == b {
                continue;
            }
            let d = canonical_direction(b.x - a.x, b.y - a.y).unwrap();
            let k = rng.gen_range(-4..=4);
            (pt(a.x + k * d.dx(), a.y + k * d.dy()), d)
        } else {
            (clamp_point(rng, LIM), small_direction(rng))
        };
        if p.x.abs() > LIM || p.y.abs() > LIM || used.contains(&p) {
            continue;
        }
        if !mode.batched && maker.binary_search(&p).is_ok() {
            continue;
        }
        used.insert(p);
        marks.push(match mode.variant {
            Variant::Directed => BreakerMark::directed(p, dir),
            Variant::Standard => BreakerMark::plain(p),
        });
    }
    (maker, marks)
}

/// Apply a board to a fresh state: Maker first, then Breaker.
pub fn build_state(mode: &GameMode, maker: &[GridPoint], marks: &[BreakerMark]) -> GameState {
    let mut state = GameState::new(mode.clone()).unwrap();
    state.apply_maker(maker).unwrap();
    state.apply_breaker(marks).unwrap();
    state
}

/// Pieces of the open interval `(lo, hi)` after cutting at `cuts`, each with
/// its Maker count and capacity (`None` when unbounded).
pub fn pieces(maker: &[i64], lo: Option<i64>, hi: Option<i64>, cuts: &[i64]) -> Vec<(usize, Option<i64>)> {
    let mut bounds: Vec<Option<i64>> = vec![lo];
    let mut sorted = cuts.to_vec();
    sorted.sort();
    bounds.extend(sorted.into_iter().map(Some));
    bounds.push(hi);
    bounds
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let count = maker.iter().filter(|&&k| a.map_or(true, |a| k > a) && b.map_or(true, |b| k < b)).count();
            let cap = match (a, b) {
                (Some(a), Some(b)) => Some(b - a - 1),
                _ => None,
            };
            (count, cap)
        })
        .collect()
}
