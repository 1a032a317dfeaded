//! Rules engine for the generalized n-in-a-row game.
//!
//! The plane is infinite, so the engine keeps a sparse index of the lattice
//! lines that carry at least `line_threshold` unblocked Maker points. A single
//! Maker point lies on infinitely many lines and two points span a line with no
//! room for a win, so the default threshold of 2 already indexes every line that
//! can matter; large simulations raise it to the smallest count any strategy in
//! the match reads. Win detection is exact as long as the threshold is at most `n`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Bound;

use indexmap::IndexSet;
use rustc_hash::{FxBuildHasher, FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{canonical_direction, collinear_groups, short_directions, slope_key, Direction, GeometryError, GridPoint, LineKey};
use crate::num::ceil_count;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Standard,
    Directed,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Standard => "standard",
            Variant::Directed => "directed",
        })
    }
}

/// Which game is being played. `batched` is orthogonal to the variant: the
/// directed-Breaker game is also played in batched form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameMode {
    pub variant: Variant,
    pub batched: bool,
    pub n: usize,
    pub epsilon: f64,
}

impl GameMode {
    pub fn new(variant: Variant, batched: bool, n: usize, epsilon: f64) -> Result<Self, BoardError> {
        let mode = GameMode { variant, batched, n, epsilon };
        mode.validate()?;
        Ok(mode)
    }

    pub fn standard(n: usize, epsilon: f64) -> Result<Self, BoardError> {
        Self::new(Variant::Standard, false, n, epsilon)
    }

    pub fn directed(n: usize, epsilon: f64) -> Result<Self, BoardError> {
        Self::new(Variant::Directed, false, n, epsilon)
    }

    pub fn batched(n: usize, epsilon: f64) -> Result<Self, BoardError> {
        Self::new(Variant::Standard, true, n, epsilon)
    }

    pub fn validate(&self) -> Result<(), BoardError> {
        if self.n < 2 {
            return Err(BoardError::InvalidMode(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(BoardError::InvalidMode(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.eps_n() < 2 {
            return Err(BoardError::InvalidMode(format!(
                "ceil(epsilon * n) must be at least 2, got {} for epsilon={} n={}",
                self.eps_n(),
                self.epsilon,
                self.n
            )));
        }
        Ok(())
    }

    /// `ceil(epsilon * n)`.
    pub fn eps_n(&self) -> usize {
        ceil_count(self.epsilon * self.n as f64)
    }

    pub fn is_directed(&self) -> bool {
        self.variant == Variant::Directed
    }
}

impl fmt::Display for GameMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.batched {
            write!(f, "batched-{}", self.variant)
        } else {
            write!(f, "{}", self.variant)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Player {
    Maker,
    Breaker,
}

/// A Breaker claim. In the directed variant the mark only blocks lines of its direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BreakerMark {
    pub point: GridPoint,
    pub dir: Option<Direction>,
}

impl BreakerMark {
    pub fn plain(point: GridPoint) -> Self {
        BreakerMark { point, dir: None }
    }

    pub fn directed(point: GridPoint, dir: Direction) -> Self {
        BreakerMark { point, dir: Some(dir) }
    }
}

impl fmt::Display for BreakerMark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dir {
            Some(d) => write!(f, "{}{}", self.point, d),
            None => write!(f, "{}", self.point),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IllegalReason {
    MakerOwned,
    BreakerOwned,
    AlreadyMarked,
    DuplicateInMove,
    MissingDirection,
    UnexpectedDirection,
    OutOfRange,
}

impl fmt::Display for IllegalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IllegalReason::MakerOwned => "point already belongs to Maker",
            IllegalReason::BreakerOwned => "point already belongs to Breaker",
            IllegalReason::AlreadyMarked => "point already marked in this direction",
            IllegalReason::DuplicateInMove => "point repeated within one move",
            IllegalReason::MissingDirection => "directed game requires a direction",
            IllegalReason::UnexpectedDirection => "only the directed game takes directions",
            IllegalReason::OutOfRange => "coordinate out of range",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoardError {
    #[error("invalid game mode: {0}")]
    InvalidMode(String),
    #[error("illegal {player:?} move at {mark}: {reason}")]
    IllegalMove { player: Player, mark: BreakerMark, reason: IllegalReason },
    #[error("line threshold must lie in 2..=n, got {0}")]
    InvalidThreshold(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl BoardError {
    /// The point a rejected move tripped over.
    pub fn offending_point(&self) -> Option<GridPoint> {
        match self {
            BoardError::IllegalMove { mark, .. } => Some(mark.point),
            _ => None,
        }
    }
}

/// A maximal stretch of a line free of blocking Breaker points. `lo` and `hi`
/// are the exclusive bounds (parameters of blocking points), `None` for infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub line: LineKey,
    pub lo: Option<i64>,
    pub hi: Option<i64>,
    pub maker_count: usize,
}

impl Segment {
    /// Integer points strictly between the bounds; `None` when unbounded.
    pub fn capacity(&self) -> Option<u64> {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => Some((hi - lo - 1) as u64),
            _ => None,
        }
    }

    /// Whether the segment holds at least `n` integer points in total.
    pub fn has_room(&self, n: usize) -> bool {
        self.capacity().map_or(true, |c| c >= n as u64)
    }

    pub fn contains_param(&self, k: i64) -> bool {
        self.lo.map_or(true, |lo| k > lo) && self.hi.map_or(true, |hi| k < hi)
    }

    /// Identity of the segment independent of its Maker count.
    pub fn span(&self) -> (LineKey, Option<i64>, Option<i64>) {
        (self.line, self.lo, self.hi)
    }
}

/// Per-line record: unblocked Maker parameters, blocking Breaker parameters and
/// Maker points that carry a blocking mark of this line's direction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct LineIndex {
    pub(crate) maker: BTreeSet<i64>,
    pub(crate) blockers: BTreeSet<i64>,
    pub(crate) blocked_maker: BTreeSet<i64>,
}

impl LineIndex {
    fn raw_count(&self) -> usize {
        self.maker.len() + self.blocked_maker.len()
    }
}

/// Whether `mark` blocks `line` under the rules of `variant`.
pub fn blocks(variant: Variant, mark: &BreakerMark, line: &LineKey) -> Result<bool, GeometryError> {
    if !line.contains(mark.point) {
        return Err(GeometryError::NotOnLine { point: mark.point, line: *line });
    }
    Ok(match variant {
        Variant::Standard => true,
        Variant::Directed => mark.dir == Some(line.dir()),
    })
}

#[derive(Clone, Debug)]
pub struct GameState {
    mode: GameMode,
    timestep: u32,
    maker: IndexSet<GridPoint, FxBuildHasher>,
    breaker: Vec<BreakerMark>,
    breaker_at: FxHashMap<GridPoint, Vec<Option<Direction>>>,
    captured: usize,
    lines: BTreeMap<LineKey, LineIndex>,
    point_lines: FxHashMap<GridPoint, Vec<LineKey>>,
    line_threshold: usize,
    directed_occupies: bool,
    max_abs: i64,
    /// `[min_x, max_x, min_y, max_y]` over every Maker point ever placed.
    maker_box: Option<[i64; 4]>,
}

impl GameState {
    pub fn new(mode: GameMode) -> Result<Self, BoardError> {
        mode.validate()?;
        Ok(GameState {
            mode,
            timestep: 0,
            maker: IndexSet::default(),
            breaker: Vec::new(),
            breaker_at: FxHashMap::default(),
            captured: 0,
            lines: BTreeMap::new(),
            point_lines: FxHashMap::default(),
            line_threshold: 2,
            directed_occupies: true,
            max_abs: 0,
            maker_box: None,
        })
    }

    /// Index only lines with at least `k` unblocked Maker points. Rebuilds the index.
    pub fn with_line_threshold(mut self, k: usize) -> Result<Self, BoardError> {
        self.set_line_threshold(k)?;
        Ok(self)
    }

    pub fn set_line_threshold(&mut self, k: usize) -> Result<(), BoardError> {
        if k < 2 || k > self.mode.n {
            return Err(BoardError::InvalidThreshold(k));
        }
        self.line_threshold = k;
        self.reindex();
        Ok(())
    }

    /// Whether a directed mark keeps Maker off its lattice point (default true).
    pub fn with_directed_occupancy(mut self, occupies: bool) -> Self {
        self.directed_occupies = occupies;
        self
    }

    pub fn mode(&self) -> &GameMode {
        &self.mode
    }

    pub fn n(&self) -> usize {
        self.mode.n
    }

    pub fn line_threshold(&self) -> usize {
        self.line_threshold
    }

    pub fn timestep(&self) -> u32 {
        self.timestep
    }

    pub fn set_timestep(&mut self, t: u32) {
        self.timestep = t;
    }

    pub fn maker_points(&self) -> impl ExactSizeIterator<Item = &GridPoint> + '_ {
        self.maker.iter()
    }

    pub fn maker_count(&self) -> usize {
        self.maker.len()
    }

    pub fn is_maker(&self, p: GridPoint) -> bool {
        self.maker.contains(&p)
    }

    /// All Breaker marks in the order they were played.
    pub fn breaker_marks(&self) -> &[BreakerMark] {
        &self.breaker
    }

    pub fn is_breaker_point(&self, p: GridPoint) -> bool {
        self.breaker_at.contains_key(&p)
    }

    /// Maker points Breaker claimed in the batched standard game.
    pub fn captured_count(&self) -> usize {
        self.captured
    }

    /// Largest absolute coordinate of any played point.
    pub fn max_abs_coord(&self) -> i64 {
        self.max_abs
    }

    pub fn blocks(&self, mark: &BreakerMark, line: &LineKey) -> Result<bool, GeometryError> {
        blocks(self.mode.variant, mark, line)
    }

    fn blocked_on(&self, p: GridPoint, line: &LineKey) -> bool {
        match self.breaker_at.get(&p) {
            None => false,
            Some(dirs) => match self.mode.variant {
                Variant::Standard => true,
                Variant::Directed => dirs.iter().any(|d| *d == Some(line.dir())),
            },
        }
    }

    pub fn can_maker_claim(&self, p: GridPoint) -> bool {
        p.in_range()
            && !self.maker.contains(&p)
            && (!self.breaker_at.contains_key(&p) || (self.mode.is_directed() && !self.directed_occupies))
    }

    /// Legality of a single Breaker mark against the current position.
    pub fn check_breaker_mark(&self, mark: &BreakerMark) -> Result<(), IllegalReason> {
        if !mark.point.in_range() {
            return Err(IllegalReason::OutOfRange);
        }
        match (self.mode.variant, mark.dir) {
            (Variant::Standard, Some(_)) => return Err(IllegalReason::UnexpectedDirection),
            (Variant::Directed, None) => return Err(IllegalReason::MissingDirection),
            _ => {}
        }
        if !self.mode.batched && self.maker.contains(&mark.point) {
            return Err(IllegalReason::MakerOwned);
        }
        if let Some(dirs) = self.breaker_at.get(&mark.point) {
            match self.mode.variant {
                Variant::Standard => return Err(IllegalReason::BreakerOwned),
                Variant::Directed => {
                    if dirs.contains(&mark.dir) {
                        return Err(IllegalReason::AlreadyMarked);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_maker(&mut self, points: &[GridPoint]) -> Result<(), BoardError> {
        let mut seen: FxHashSet<GridPoint> = FxHashSet::default();
        for &p in points {
            let reject = |reason| BoardError::IllegalMove { player: Player::Maker, mark: BreakerMark::plain(p), reason };
            if !p.in_range() {
                return Err(reject(IllegalReason::OutOfRange));
            }
            if !seen.insert(p) {
                return Err(reject(IllegalReason::DuplicateInMove));
            }
            if self.maker.contains(&p) {
                return Err(reject(IllegalReason::MakerOwned));
            }
            if !self.can_maker_claim(p) {
                return Err(reject(IllegalReason::BreakerOwned));
            }
        }
        for &p in points {
            self.add_maker_point(p);
        }
        Ok(())
    }

    pub fn apply_breaker(&mut self, marks: &[BreakerMark]) -> Result<(), BoardError> {
        let mut seen: FxHashSet<BreakerMark> = FxHashSet::default();
        for mark in marks {
            let reject = |reason| BoardError::IllegalMove { player: Player::Breaker, mark: *mark, reason };
            self.check_breaker_mark(mark).map_err(reject)?;
            let dup_key = match self.mode.variant {
                Variant::Standard => BreakerMark::plain(mark.point),
                Variant::Directed => *mark,
            };
            if !seen.insert(dup_key) {
                return Err(reject(IllegalReason::DuplicateInMove));
            }
        }
        for mark in marks {
            self.add_breaker_mark(*mark);
        }
        Ok(())
    }

    pub fn apply_move(&mut self, player: Player, mv: &Move) -> Result<(), BoardError> {
        match (player, mv) {
            (Player::Maker, Move::Maker(points)) => self.apply_maker(points),
            (Player::Breaker, Move::Breaker(marks)) => self.apply_breaker(marks),
            (p, _) => Err(BoardError::InvalidMode(format!("move does not belong to {p:?}"))),
        }
    }

    fn note_coords(&mut self, p: GridPoint) {
        self.max_abs = self.max_abs.max(p.x.abs()).max(p.y.abs());
    }

    fn add_maker_point(&mut self, p: GridPoint) {
        self.note_coords(p);
        self.maker_box = Some(grow_box(self.maker_box, p));
        let k = self.line_threshold;
        if self.maker.len() + 1 >= k {
            for (line, members) in self.heavy_lines_through(p, k - 1) {
                if self.lines.contains_key(&line) {
                    self.insert_on_line(line, p);
                } else {
                    let mut members = members.unwrap_or_else(|| self.maker_points_on(&line));
                    members.push(p);
                    self.materialize(line, &members);
                }
            }
        }
        self.maker.insert(p);
    }

    /// Lines through `p` holding at least `min_others` Maker points other than `p`.
    /// Members are returned for lines that are not indexed yet when they were
    /// gathered along the way.
    fn heavy_lines_through(&self, p: GridPoint, min_others: usize) -> Vec<(LineKey, Option<Vec<GridPoint>>)> {
        let min_others = min_others.max(1);
        if let Some(found) = self.heavy_lines_by_walking(p, min_others) {
            return found;
        }
        // Group by floating slope first: equal directions always share the key,
        // so only colliding (impure) groups need exact regrouping.
        let mut groups: FxHashMap<u64, (u32, u32)> = FxHashMap::default();
        for (i, q) in self.maker.iter().enumerate() {
            if *q == p {
                continue;
            }
            let e = groups.entry(slope_key(p, *q)).or_insert((0, i as u32));
            e.0 += 1;
        }
        let mut out = Vec::new();
        let mut impure: FxHashSet<u64> = FxHashSet::default();
        let mut candidates: Vec<(u64, u32, u32)> = groups
            .into_iter()
            .filter(|(_, (count, _))| *count as usize >= min_others)
            .map(|(key, (count, first))| (key, count, first))
            .collect();
        candidates.sort_unstable();
        for (key, count, first) in candidates {
            let q = *self.maker.get_index(first as usize).expect("index in range");
            let dir = canonical_direction(q.x - p.x, q.y - p.y).expect("distinct points");
            let line = LineKey::through(p, dir);
            match self.lines.get(&line) {
                Some(idx) if idx.raw_count() == count as usize => out.push((line, None)),
                _ => {
                    impure.insert(key);
                }
            }
        }
        if !impure.is_empty() {
            let mut exact: BTreeMap<LineKey, Vec<GridPoint>> = BTreeMap::new();
            for q in self.maker.iter() {
                if *q != p && impure.contains(&slope_key(p, *q)) {
                    let dir = canonical_direction(q.x - p.x, q.y - p.y).expect("distinct points");
                    exact.entry(LineKey::through(p, dir)).or_default().push(*q);
                }
            }
            for (line, members) in exact {
                if members.len() >= min_others {
                    out.push((line, Some(members)));
                }
            }
        }
        out
    }

    /// [`Self::heavy_lines_through`] by stepping along the few directions that fit
    /// `min_others + 1` lattice points into the Maker bounding box. `None` when
    /// that would probe more points than the pairwise scan touches.
    fn heavy_lines_by_walking(&self, p: GridPoint, min_others: usize) -> Option<Vec<(LineKey, Option<Vec<GridPoint>>)>> {
        let [x0, x1, y0, y1] = grow_box(self.maker_box, p);
        let budget = self.maker.len();
        let dirs = short_directions(x1 - x0, y1 - y0, min_others + 1, budget)?;
        let probes: usize = dirs
            .iter()
            .map(|d| {
                let along_x = if d.dx() == 0 { i64::MAX } else { (x1 - x0) / d.dx() };
                let along_y = if d.dy() == 0 { i64::MAX } else { (y1 - y0) / d.dy().abs() };
                along_x.min(along_y) as usize + 1
            })
            .sum();
        if probes > budget {
            return None;
        }
        let inside = |q: GridPoint| q.x >= x0 && q.x <= x1 && q.y >= y0 && q.y <= y1;
        let mut out = Vec::new();
        for d in dirs {
            let mut members = Vec::new();
            for sign in [1i64, -1] {
                let mut q = GridPoint::new(p.x + sign * d.dx(), p.y + sign * d.dy());
                while inside(q) {
                    if self.maker.contains(&q) {
                        members.push(q);
                    }
                    q = GridPoint::new(q.x + sign * d.dx(), q.y + sign * d.dy());
                }
            }
            if members.len() < min_others {
                continue;
            }
            let line = LineKey::through(p, d);
            match self.lines.get(&line) {
                Some(idx) if idx.raw_count() == members.len() => out.push((line, None)),
                _ => out.push((line, Some(members))),
            }
        }
        Some(out)
    }

    fn maker_points_on(&self, line: &LineKey) -> Vec<GridPoint> {
        self.maker.iter().copied().filter(|q| line.contains(*q)).collect()
    }

    fn insert_on_line(&mut self, line: LineKey, p: GridPoint) {
        let blocked = self.blocked_on(p, &line);
        let k = line.param_unchecked(p);
        let idx = self.lines.get_mut(&line).expect("indexed line");
        if blocked {
            idx.blocked_maker.insert(k);
        } else {
            idx.maker.insert(k);
            self.point_lines.entry(p).or_default().push(line);
        }
    }

    /// Index `line` if at least `line_threshold` of `members` are unblocked on it.
    fn materialize(&mut self, line: LineKey, members: &[GridPoint]) {
        let mut idx = LineIndex::default();
        let mut unblocked = Vec::new();
        for &q in members {
            let k = line.param_unchecked(q);
            if self.blocked_on(q, &line) {
                idx.blocked_maker.insert(k);
            } else {
                idx.maker.insert(k);
                unblocked.push(q);
            }
        }
        if idx.maker.len() < self.line_threshold {
            return;
        }
        for mark in &self.breaker {
            if line.contains(mark.point) && blocks(self.mode.variant, mark, &line).unwrap_or(false) {
                idx.blockers.insert(line.param_unchecked(mark.point));
            }
        }
        self.lines.insert(line, idx);
        for q in unblocked {
            self.point_lines.entry(q).or_default().push(line);
        }
    }

    fn drop_if_light(&mut self, line: LineKey) {
        let light = self.lines.get(&line).map_or(false, |idx| idx.maker.len() < self.line_threshold);
        if !light {
            return;
        }
        let idx = self.lines.remove(&line).expect("checked above");
        for k in idx.maker {
            let q = line.point_at(k).expect("indexed point");
            if let Some(list) = self.point_lines.get_mut(&q) {
                list.retain(|l| *l != line);
                if list.is_empty() {
                    self.point_lines.remove(&q);
                }
            }
        }
    }

    /// Indexed lines passing through a point that is not Maker's.
    fn indexed_lines_through(&self, q: GridPoint) -> Vec<LineKey> {
        if self.lines.len() <= self.maker.len() {
            return self.lines.keys().copied().filter(|l| l.contains(q)).collect();
        }
        self.heavy_lines_through(q, self.line_threshold)
            .into_iter()
            .map(|(line, _)| line)
            .filter(|line| self.lines.contains_key(line))
            .collect()
    }

    fn add_breaker_mark(&mut self, mark: BreakerMark) {
        self.note_coords(mark.point);
        let q = mark.point;
        self.breaker.push(mark);
        self.breaker_at.entry(q).or_default().push(mark.dir);
        match mark.dir {
            None => {
                if self.maker.contains(&q) {
                    // Batched capture: the point leaves Maker's set and blocks every line through it.
                    self.maker.swap_remove(&q);
                    self.captured += 1;
                    let through = self.point_lines.remove(&q).unwrap_or_default();
                    for line in through {
                        let k = line.param_unchecked(q);
                        if let Some(idx) = self.lines.get_mut(&line) {
                            idx.maker.remove(&k);
                            idx.blockers.insert(k);
                        }
                        self.drop_if_light(line);
                    }
                } else {
                    for line in self.indexed_lines_through(q) {
                        let k = line.param_unchecked(q);
                        self.lines.get_mut(&line).expect("indexed").blockers.insert(k);
                    }
                }
            }
            Some(dir) => {
                let line = LineKey::through(q, dir);
                let k = line.param_unchecked(q);
                if let Some(idx) = self.lines.get_mut(&line) {
                    idx.blockers.insert(k);
                    if idx.maker.remove(&k) {
                        idx.blocked_maker.insert(k);
                        if let Some(list) = self.point_lines.get_mut(&q) {
                            list.retain(|l| *l != line);
                            if list.is_empty() {
                                self.point_lines.remove(&q);
                            }
                        }
                    }
                    self.drop_if_light(line);
                }
            }
        }
    }

    fn reindex(&mut self) {
        self.lines.clear();
        self.point_lines.clear();
        let points: Vec<GridPoint> = self.maker.drain(..).collect();
        for p in points {
            self.add_maker_point(p);
        }
    }

    /// Unblocked Maker parameters and blocking Breaker parameters on `line`,
    /// read from the index when possible and scanned otherwise.
    fn line_contents(&self, line: &LineKey) -> (BTreeSet<i64>, BTreeSet<i64>) {
        if let Some(idx) = self.lines.get(line) {
            return (idx.maker.clone(), idx.blockers.clone());
        }
        let maker = self
            .maker
            .iter()
            .filter(|q| line.contains(**q) && !self.blocked_on(**q, line))
            .map(|q| line.param_unchecked(*q))
            .collect();
        let blockers = self
            .breaker
            .iter()
            .filter(|m| line.contains(m.point) && blocks(self.mode.variant, m, line).unwrap_or(false))
            .map(|m| line.param_unchecked(m.point))
            .collect();
        (maker, blockers)
    }

    /// The maximal blocking-free intervals of `line`, ordered by `lo`.
    pub fn segments_on_line(&self, line: &LineKey) -> Vec<Segment> {
        match self.lines.get(line) {
            Some(idx) => build_segments(*line, &idx.maker, &idx.blockers),
            None => {
                let (maker, blockers) = self.line_contents(line);
                build_segments(*line, &maker, &blockers)
            }
        }
    }

    /// Sorted parameters of the unblocked Maker points inside `seg`.
    pub fn maker_params(&self, seg: &Segment) -> Vec<i64> {
        let start = seg.lo.map_or(Bound::Unbounded, Bound::Excluded);
        let end = seg.hi.map_or(Bound::Unbounded, Bound::Excluded);
        match self.lines.get(&seg.line) {
            Some(idx) => idx.maker.range((start, end)).copied().collect(),
            None => self.line_contents(&seg.line).0.range((start, end)).copied().collect(),
        }
    }

    /// Segments with room for `n` points and at least one Maker point, over indexed lines.
    pub fn active_segments(&self) -> Vec<Segment> {
        let n = self.mode.n;
        self.indexed_segments(|s| s.maker_count >= 1 && s.has_room(n))
    }

    /// Segments holding at least `n` Maker points. Maker has won iff this is nonempty.
    pub fn winning_segments(&self) -> Vec<Segment> {
        let n = self.mode.n;
        self.indexed_segments(|s| s.maker_count >= n)
    }

    pub fn maker_has_won(&self) -> bool {
        !self.winning_segments().is_empty()
    }

    /// Largest Maker count over active segments (0 when none are indexed).
    pub fn max_active_count(&self) -> usize {
        self.active_segments().iter().map(|s| s.maker_count).max().unwrap_or(0)
    }

    fn indexed_segments(&self, keep: impl Fn(&Segment) -> bool) -> Vec<Segment> {
        let mut out = Vec::new();
        for (line, idx) in &self.lines {
            out.extend(build_segments(*line, &idx.maker, &idx.blockers).into_iter().filter(|s| keep(s)));
        }
        out
    }

    /// Indexed lines in key order.
    pub fn indexed_lines(&self) -> impl Iterator<Item = &LineKey> + '_ {
        self.lines.keys()
    }

    pub fn indexed_line_count(&self) -> usize {
        self.lines.len()
    }

    /// Rebuild the index from scratch with [`collinear_groups`] and compare it to
    /// the incrementally maintained one.
    pub fn audit_index(&self) -> Result<(), String> {
        let k = self.line_threshold;
        let points: Vec<GridPoint> = self.maker.iter().copied().collect();
        let mut expected: BTreeMap<LineKey, LineIndex> = BTreeMap::new();
        for (line, _) in collinear_groups(&points, k) {
            let mut idx = LineIndex::default();
            for &q in &points {
                if line.contains(q) {
                    let kq = line.param(q).map_err(|e| e.to_string())?;
                    if self.blocked_on(q, &line) {
                        idx.blocked_maker.insert(kq);
                    } else {
                        idx.maker.insert(kq);
                    }
                }
            }
            if idx.maker.len() < k {
                continue;
            }
            for m in &self.breaker {
                if line.contains(m.point) && blocks(self.mode.variant, m, &line).map_err(|e| e.to_string())? {
                    idx.blockers.insert(line.param(m.point).map_err(|e| e.to_string())?);
                }
            }
            expected.insert(line, idx);
        }
        if expected.len() != self.lines.len() {
            return Err(format!("index holds {} lines, rebuild finds {}", self.lines.len(), expected.len()));
        }
        for (line, idx) in &expected {
            match self.lines.get(line) {
                None => return Err(format!("{line} missing from index")),
                Some(got) if got != idx => return Err(format!("{line} differs: index {got:?}, rebuild {idx:?}")),
                _ => {}
            }
        }
        let mut incidences = 0usize;
        for (q, list) in &self.point_lines {
            for line in list {
                let idx = self.lines.get(line).ok_or_else(|| format!("{q} points at unindexed {line}"))?;
                if !idx.maker.contains(&line.param_unchecked(*q)) {
                    return Err(format!("{q} is not recorded on {line}"));
                }
                incidences += 1;
            }
        }
        let total: usize = self.lines.values().map(|idx| idx.maker.len()).sum();
        if total != incidences {
            return Err(format!("point-to-line map has {incidences} entries, index has {total}"));
        }
        Ok(())
    }
}

fn grow_box(b: Option<[i64; 4]>, p: GridPoint) -> [i64; 4] {
    match b {
        None => [p.x, p.x, p.y, p.y],
        Some([x0, x1, y0, y1]) => [x0.min(p.x), x1.max(p.x), y0.min(p.y), y1.max(p.y)],
    }
}

/// A move as recorded in transcripts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Maker(Vec<GridPoint>),
    Breaker(Vec<BreakerMark>),
}

impl Move {
    pub fn len(&self) -> usize {
        match self {
            Move::Maker(p) => p.len(),
            Move::Breaker(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn build_segments(line: LineKey, maker: &BTreeSet<i64>, blockers: &BTreeSet<i64>) -> Vec<Segment> {
    let mut out = Vec::with_capacity(blockers.len() + 1);
    let mut lo: Option<i64> = None;
    let count = |lo: Option<i64>, hi: Option<i64>| {
        let start = lo.map_or(Bound::Unbounded, Bound::Excluded);
        let end = hi.map_or(Bound::Unbounded, Bound::Excluded);
        maker.range((start, end)).count()
    };
    for &b in blockers {
        out.push(Segment { line, lo, hi: Some(b), maker_count: count(lo, Some(b)) });
        lo = Some(b);
    }
    out.push(Segment { line, lo, hi: None, maker_count: count(lo, None) });
    out
}
