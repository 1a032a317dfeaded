//! Exact integer-lattice line geometry.
//!
//! Every lattice line is identified by a [`LineKey`]: a primitive direction with
//! a canonical sign and the offset `c = dy*x - dx*y`, which is constant along
//! the line. Positions along a line are integer parameters measured from a
//! deterministic anchor point, so `anchor + k*dir` enumerates the lattice
//! points of the line exactly once.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coordinates must satisfy `|x|, |y| <= COORD_LIMIT`.
pub const COORD_LIMIT: i64 = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("the zero vector has no direction")]
    ZeroVector,
    #[error("a line needs two distinct points, got {0} twice")]
    SamePoint(GridPoint),
    #[error("{point} does not lie on {line}")]
    NotOnLine { point: GridPoint, line: LineKey },
    #[error("coordinate {0} is outside the supported range")]
    OutOfRange(GridPoint),
    #[error("arithmetic overflow")]
    Overflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        GridPoint { x, y }
    }

    pub fn in_range(&self) -> bool {
        self.x.abs() <= COORD_LIMIT && self.y.abs() <= COORD_LIMIT
    }
}

impl From<(i64, i64)> for GridPoint {
    fn from((x, y): (i64, i64)) -> Self {
        GridPoint { x, y }
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A primitive lattice vector with `dx > 0`, or `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct Direction {
    dx: i64,
    dy: i64,
}

impl Direction {
    pub const HORIZONTAL: Direction = Direction { dx: 1, dy: 0 };
    pub const VERTICAL: Direction = Direction { dx: 0, dy: 1 };

    pub fn dx(&self) -> i64 {
        self.dx
    }

    pub fn dy(&self) -> i64 {
        self.dy
    }

    /// True when `(dx, dy)` is already primitive and canonically signed.
    pub fn is_canonical(dx: i64, dy: i64) -> bool {
        canonical_direction(dx, dy).map_or(false, |d| d.dx == dx && d.dy == dy)
    }
}

impl TryFrom<(i64, i64)> for Direction {
    type Error = GeometryError;

    fn try_from((dx, dy): (i64, i64)) -> Result<Self, Self::Error> {
        canonical_direction(dx, dy)
    }
}

impl From<Direction> for (i64, i64) {
    fn from(d: Direction) -> Self {
        (d.dx, d.dy)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.dx, self.dy)
    }
}

/// Reduce `(dx, dy)` to the unique primitive, canonically signed vector parallel to it.
pub fn canonical_direction(dx: i64, dy: i64) -> Result<Direction, GeometryError> {
    canonical_direction_wide(dx as i128, dy as i128)
}

fn canonical_direction_wide(dx: i128, dy: i128) -> Result<Direction, GeometryError> {
    if dx == 0 && dy == 0 {
        return Err(GeometryError::ZeroVector);
    }
    let g = dx.gcd(&dy);
    let (mut dx, mut dy) = (dx / g, dy / g);
    if dx < 0 || (dx == 0 && dy < 0) {
        dx = -dx;
        dy = -dy;
    }
    Ok(Direction {
        dx: i64::try_from(dx).map_err(|_| GeometryError::Overflow)?,
        dy: i64::try_from(dy).map_err(|_| GeometryError::Overflow)?,
    })
}

/// Canonical identification of a lattice line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineKey {
    dir: Direction,
    c: i128,
}

impl fmt::Display for LineKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line[{} c={}]", self.dir, self.c)
    }
}

/// The line through `p` and `q`.
pub fn line_key(p: GridPoint, q: GridPoint) -> Result<LineKey, GeometryError> {
    if p == q {
        return Err(GeometryError::SamePoint(p));
    }
    let dir = canonical_direction_wide(q.x as i128 - p.x as i128, q.y as i128 - p.y as i128)?;
    Ok(LineKey::through(p, dir))
}

/// Position of `p` along `line`, measured in steps of the line direction from its anchor.
pub fn line_param(line: &LineKey, p: GridPoint) -> Result<i64, GeometryError> {
    line.param(p)
}

impl LineKey {
    /// The line through `p` with direction `dir`.
    pub fn through(p: GridPoint, dir: Direction) -> LineKey {
        LineKey { dir, c: offset(dir, p) }
    }

    pub fn dir(&self) -> Direction {
        self.dir
    }

    pub fn offset(&self) -> i128 {
        self.c
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        offset(self.dir, p) == self.c
    }

    /// The canonical base point: for `dx > 0` the lattice point of the line with
    /// `0 <= x < dx`; for vertical lines `(c, 0)` where `x = c`.
    pub fn anchor_wide(&self) -> (i128, i128) {
        let (dx, dy) = (self.dir.dx as i128, self.dir.dy as i128);
        if dx == 0 {
            // c = dy*x - 0*y = x for the vertical direction (0, 1)
            return (self.c, 0);
        }
        // dy*x = c (mod dx); dy is invertible mod dx since gcd(dx, dy) = 1
        let x = if dx == 1 {
            0
        } else {
            let inv = dy.extended_gcd(&dx).x;
            (self.c.rem_euclid(dx) * inv.rem_euclid(dx)).rem_euclid(dx)
        };
        let y = (dy * x - self.c) / dx;
        (x, y)
    }

    pub fn anchor(&self) -> Result<GridPoint, GeometryError> {
        let (x, y) = self.anchor_wide();
        Ok(GridPoint {
            x: i64::try_from(x).map_err(|_| GeometryError::Overflow)?,
            y: i64::try_from(y).map_err(|_| GeometryError::Overflow)?,
        })
    }

    pub fn param(&self, p: GridPoint) -> Result<i64, GeometryError> {
        if !self.contains(p) {
            return Err(GeometryError::NotOnLine { point: p, line: *self });
        }
        Ok(self.param_unchecked(p))
    }

    /// Parameter of a point already known to lie on the line.
    pub(crate) fn param_unchecked(&self, p: GridPoint) -> i64 {
        if self.dir.dx == 0 {
            p.y
        } else {
            let (ax, _) = self.anchor_wide();
            ((p.x as i128 - ax) / self.dir.dx as i128) as i64
        }
    }

    /// The lattice point with parameter `k`.
    pub fn point_at(&self, k: i64) -> Result<GridPoint, GeometryError> {
        let (ax, ay) = self.anchor_wide();
        let x = ax + k as i128 * self.dir.dx as i128;
        let y = ay + k as i128 * self.dir.dy as i128;
        Ok(GridPoint {
            x: i64::try_from(x).map_err(|_| GeometryError::Overflow)?,
            y: i64::try_from(y).map_err(|_| GeometryError::Overflow)?,
        })
    }
}

fn offset(dir: Direction, p: GridPoint) -> i128 {
    dir.dy as i128 * p.x as i128 - dir.dx as i128 * p.y as i128
}

/// Floating slope of `q - p`, equal for parallel vectors. Distinct directions
/// can collide, so callers regroup colliding keys exactly.
pub(crate) fn slope_key(p: GridPoint, q: GridPoint) -> u64 {
    let (mut dx, mut dy) = (q.x - p.x, q.y - p.y);
    if dx < 0 {
        dx = -dx;
        dy = -dy;
    }
    if dx == 0 {
        return u64::MAX;
    }
    // both differences are exact in f64; adding 0.0 folds -0.0 into +0.0
    (dy as f64 / dx as f64 + 0.0).to_bits()
}

/// Primitive directions along which a line can hold `min_points` (at least 2)
/// lattice points inside a box of extents `w` by `h`: consecutive lattice points
/// on a line differ by exactly its direction, so `(min_points - 1) * |dx| <= w`
/// and likewise for `dy`. `None` when more than `limit` directions qualify.
pub(crate) fn short_directions(w: i64, h: i64, min_points: usize, limit: usize) -> Option<Vec<Direction>> {
    let steps = (min_points.max(2) - 1) as i64;
    let (amax, bmax) = (w / steps, h / steps);
    let rough = (amax as i128 + 1) * (2 * bmax as i128 + 1);
    if rough > 2 * limit as i128 + 2 {
        return None;
    }
    let mut out = Vec::new();
    if bmax >= 1 {
        out.push(Direction::VERTICAL);
    }
    for a in 1..=amax {
        for b in -bmax..=bmax {
            if a.gcd(&b) == 1 {
                out.push(Direction { dx: a, dy: b });
            }
        }
    }
    (out.len() <= limit).then_some(out)
}

/// Every line holding at least `min_size` (at least 2) of the distinct points,
/// with the sorted parameters of the points on it.
pub fn collinear_groups(points: &[GridPoint], min_size: usize) -> BTreeMap<LineKey, Vec<i64>> {
    let min_size = min_size.max(2);
    let mut pts: Vec<GridPoint> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();

    let mut out: BTreeMap<LineKey, Vec<i64>> = BTreeMap::new();
    if pts.len() < min_size {
        return out;
    }
    let (min_x, max_x) = pts.iter().fold((i64::MAX, i64::MIN), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
    let (min_y, max_y) = pts.iter().fold((i64::MAX, i64::MIN), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    let (w, h) = (max_x.saturating_sub(min_x), max_y.saturating_sub(min_y));
    // grouping by line per direction costs about one hash per point and direction,
    // the pairwise scan about half a hash per pair
    if let Some(dirs) = short_directions(w, h, min_size, pts.len() / 4) {
        let mut by_offset: FxHashMap<i128, Vec<GridPoint>> = FxHashMap::default();
        for d in dirs {
            by_offset.clear();
            for &p in &pts {
                by_offset.entry(LineKey::through(p, d).offset()).or_default().push(p);
            }
            for list in by_offset.values() {
                if list.len() >= min_size {
                    let key = LineKey::through(list[0], d);
                    let mut params: Vec<i64> = list.iter().map(|q| key.param_unchecked(*q)).collect();
                    params.sort_unstable();
                    out.insert(key, params);
                }
            }
        }
        return out;
    }
    let mut counts: FxHashMap<u64, u32> = FxHashMap::default();
    let mut members: FxHashMap<Direction, Vec<GridPoint>> = FxHashMap::default();
    for (i, &p) in pts.iter().enumerate() {
        if pts.len() - i < min_size {
            break;
        }
        counts.clear();
        for &q in &pts[i + 1..] {
            *counts.entry(slope_key(p, q)).or_insert(0) += 1;
        }
        counts.retain(|_, c| *c as usize + 1 >= min_size);
        if counts.is_empty() {
            continue;
        }
        members.clear();
        for &q in &pts[i + 1..] {
            if counts.contains_key(&slope_key(p, q)) {
                let d = canonical_direction(q.x - p.x, q.y - p.y).expect("distinct points");
                members.entry(d).or_default().push(q);
            }
        }
        for (d, list) in members.drain() {
            let key = LineKey::through(p, d);
            // p is the smallest member of any line first met here
            if list.len() + 1 < min_size || out.contains_key(&key) {
                continue;
            }
            let mut params: Vec<i64> = Vec::with_capacity(list.len() + 1);
            params.push(key.param_unchecked(p));
            params.extend(list.into_iter().map(|q| key.param_unchecked(q)));
            params.sort_unstable();
            out.insert(key, params);
        }
    }
    out
}

/// Lines holding at least `k` of the points, with their point counts, in key order.
pub fn rich_lines(points: &[GridPoint], k: usize) -> Vec<(LineKey, usize)> {
    collinear_groups(points, k)
        .into_iter()
        .map(|(key, params)| (key, params.len()))
        .collect()
}

/// 2-D cross product of `q - p` and `r - p`.
pub fn cross(p: GridPoint, q: GridPoint, r: GridPoint) -> i128 {
    let (ax, ay) = (q.x as i128 - p.x as i128, q.y as i128 - p.y as i128);
    let (bx, by) = (r.x as i128 - p.x as i128, r.y as i128 - p.y as i128);
    ax * by - ay * bx
}
