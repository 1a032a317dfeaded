//! The weighted bin game `(b, M, T)`: `1 + sum b(t)` bins, Maker adds weight each
//! turn subject to "at most M(s) over the last s turns", then the `b(t)`
//! heaviest bins die. The survivor's weight is Maker's score.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Relative slack when comparing accumulated floating sums against `M(s)`.
const WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BinGameError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("schedule violates sum_(t>=s) b(t) >= b(T)(T-s+1)/2 at s={s}")]
    HypothesisViolated { s: usize },
    #[error("weight {added} over the last {s} turns exceeds M({s}) = {limit}")]
    ConstraintViolated { s: usize, added: f64, limit: f64 },
    #[error("bin {0} is not live")]
    DeadBin(usize),
    #[error("invalid weight {0}")]
    InvalidWeight(f64),
    #[error("all {0} turns have been played")]
    GameOver(usize),
}

/// Kill counts `b(1..T)` and budget increments `dM(1..T)`, `M(s) = dM(1) + ... + dM(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinSchedule {
    b: Vec<usize>,
    delta_m: Vec<f64>,
    m: Vec<f64>,
}

impl BinSchedule {
    pub fn new(b: Vec<usize>, delta_m: Vec<f64>) -> Result<Self, BinGameError> {
        if b.is_empty() {
            return Err(BinGameError::InvalidSchedule("T must be at least 1".into()));
        }
        if b.len() != delta_m.len() {
            return Err(BinGameError::InvalidSchedule(format!(
                "b has {} entries but dM has {}",
                b.len(),
                delta_m.len()
            )));
        }
        if let Some((i, d)) = delta_m.iter().enumerate().find(|(_, d)| !(d.is_finite() && **d >= 0.0)) {
            return Err(BinGameError::InvalidSchedule(format!("dM({}) = {d} is not a non-negative number", i + 1)));
        }
        let mut m = Vec::with_capacity(delta_m.len() + 1);
        m.push(0.0);
        let mut acc = 0.0;
        for d in &delta_m {
            acc += d;
            m.push(acc);
        }
        Ok(BinSchedule { b, delta_m, m })
    }

    pub fn turns(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn delta_m(&self) -> &[f64] {
        &self.delta_m
    }

    /// `M(s)`, with `M(0) = 0` and `M(s) = M(T)` beyond `T`.
    pub fn m(&self, s: usize) -> f64 {
        self.m[s.min(self.turns())]
    }

    pub fn bins(&self) -> usize {
        1 + self.b.iter().sum::<usize>()
    }

    /// Bins alive at the start of turn `s` (1-based): `1 + sum_{t>=s} b(t)`.
    pub fn live_at(&self, s: usize) -> usize {
        1 + self.b[s - 1..].iter().sum::<usize>()
    }

    /// Check `sum_{t=s}^{T} b(t) >= b(T)(T-s+1)/2` for every `s`.
    pub fn check_solo_hypothesis(&self) -> Result<(), BinGameError> {
        let t = self.turns();
        let bt = self.b[t - 1] as f64;
        let mut suffix = 0usize;
        let mut failing = None;
        for s in (1..=t).rev() {
            suffix += self.b[s - 1];
            if (suffix as f64) < bt * (t - s + 1) as f64 / 2.0 {
                failing = Some(s);
            }
        }
        match failing {
            Some(s) => Err(BinGameError::HypothesisViolated { s }),
            None => Ok(()),
        }
    }
}

/// What one turn did.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TurnRecord {
    pub turn: usize,
    pub added: f64,
    pub live_before: usize,
    pub average_after_adding: f64,
    pub average_after_kill: f64,
    pub killed: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BinState {
    weights: Vec<f64>,
    alive: Vec<bool>,
    turn: usize,
    weight_spent: Vec<f64>,
}

impl BinState {
    pub fn new(sched: &BinSchedule) -> Self {
        let bins = sched.bins();
        BinState { weights: vec![0.0; bins], alive: vec![true; bins], turn: 0, weight_spent: Vec::new() }
    }

    pub fn turn(&self) -> usize {
        self.turn
    }

    pub fn weight_spent(&self) -> &[f64] {
        &self.weight_spent
    }

    pub fn live_bins(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.alive[i]).collect()
    }

    pub fn weight(&self, bin: usize) -> f64 {
        self.weights[bin]
    }

    fn average(&self) -> f64 {
        let live = self.live_bins();
        if live.is_empty() {
            return 0.0;
        }
        live.iter().map(|&i| self.weights[i]).sum::<f64>() / live.len() as f64
    }

    /// Total weight in the surviving bin(s).
    pub fn final_weight(&self) -> f64 {
        self.live_bins().iter().map(|&i| self.weights[i]).sum()
    }

    /// Largest weight that may be added this turn while every suffix of the game
    /// (turns `s..=T`, bounded by `M(T - s + 1)`) can still stay within budget.
    pub fn allowance(&self, sched: &BinSchedule) -> f64 {
        let t = sched.turns();
        let now = self.turn + 1;
        let mut spent = 0.0;
        let mut best = f64::INFINITY;
        for start in (1..=now).rev() {
            if start < now {
                spent += self.weight_spent[start - 1];
            }
            best = best.min(sched.m(t - start + 1) - spent);
        }
        best.max(0.0)
    }

    /// Add weight, then kill the `b(turn)` heaviest live bins (lowest index first on ties).
    pub fn bin_step(&mut self, sched: &BinSchedule, additions: &[(usize, f64)]) -> Result<TurnRecord, BinGameError> {
        if self.turn >= sched.turns() {
            return Err(BinGameError::GameOver(sched.turns()));
        }
        let mut added = 0.0;
        for &(bin, w) in additions {
            if bin >= self.weights.len() || !self.alive[bin] {
                return Err(BinGameError::DeadBin(bin));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(BinGameError::InvalidWeight(w));
            }
            added += w;
        }
        // weight from turn `start` on only grows, so it must already fit M(T - start + 1)
        let t = sched.turns();
        let now = self.turn + 1;
        let mut suffix = added;
        for start in (1..=now).rev() {
            if start < now {
                suffix += self.weight_spent[start - 1];
            }
            let s = t - start + 1;
            let limit = sched.m(s);
            if suffix > limit + WEIGHT_TOL * limit.abs().max(1.0) {
                return Err(BinGameError::ConstraintViolated { s, added: suffix, limit });
            }
        }
        let live_before = self.live_bins().len();
        for &(bin, w) in additions {
            self.weights[bin] += w;
        }
        let average_after_adding = self.average();
        let kills = sched.b[self.turn];
        let mut order = self.live_bins();
        order.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]).then(a.cmp(&b)));
        let killed: Vec<usize> = order.into_iter().take(kills).collect();
        for &k in &killed {
            self.alive[k] = false;
        }
        self.turn += 1;
        self.weight_spent.push(added);
        Ok(TurnRecord {
            turn: self.turn,
            added,
            live_before,
            average_after_adding,
            average_after_kill: self.average(),
            killed,
        })
    }
}

/// `sum_s w_s / (sum_{t>=s} b(t) + 1)`: no play with per-turn totals `w` ends with more.
pub fn average_bound(w: &[f64], b: &[usize]) -> f64 {
    assert_eq!(w.len(), b.len(), "w and b must both have T entries");
    let mut suffix = 0usize;
    let mut total = 0.0;
    for s in (0..w.len()).rev() {
        suffix += b[s];
        total += w[s] / (suffix + 1) as f64;
    }
    total
}

/// `(2 / b(T)) sum_t dM(t) / t`, valid when `b` is not super-linear in the sense of
/// [`BinSchedule::check_solo_hypothesis`].
pub fn solo_bound(sched: &BinSchedule) -> Result<f64, BinGameError> {
    sched.check_solo_hypothesis()?;
    let bt = *sched.b.last().expect("T >= 1");
    if bt == 0 {
        return Err(BinGameError::InvalidSchedule("b(T) must be positive".into()));
    }
    let sum: f64 = sched.delta_m.iter().enumerate().map(|(i, d)| d / (i + 1) as f64).sum();
    Ok(2.0 / bt as f64 * sum)
}

/// Result of spreading each turn's weight evenly over the live bins.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EqualSpreadPlay {
    pub final_weight: f64,
    pub w: Vec<f64>,
    pub trace: Vec<TurnRecord>,
}

/// Play `w_s = dM(T - s + 1)` on turn `s`, split equally over the live bins.
pub fn equal_spread_play(sched: &BinSchedule) -> Result<EqualSpreadPlay, BinGameError> {
    let t = sched.turns();
    let w: Vec<f64> = (1..=t).map(|s| sched.delta_m[t - s]).collect();
    let mut state = BinState::new(sched);
    let mut trace = Vec::with_capacity(t);
    for &ws in &w {
        let live = state.live_bins();
        let share = ws / live.len() as f64;
        let adds: Vec<(usize, f64)> = live.into_iter().map(|i| (i, share)).collect();
        trace.push(state.bin_step(sched, &adds)?);
    }
    Ok(EqualSpreadPlay { final_weight: state.final_weight(), w, trace })
}

/// Result of a seeded random legal play.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomPlay {
    pub final_weight: f64,
    pub w: Vec<f64>,
    pub trace: Vec<TurnRecord>,
}

/// Each turn add a random share of the allowance, spread with random
/// proportions over a random nonempty set of live bins.
pub fn random_play(sched: &BinSchedule, rng: &mut ChaCha8Rng) -> Result<RandomPlay, BinGameError> {
    let mut state = BinState::new(sched);
    let mut w = Vec::with_capacity(sched.turns());
    let mut trace = Vec::with_capacity(sched.turns());
    for _ in 0..sched.turns() {
        // stay a hair inside the allowance so rounding never trips the check
        let total = state.allowance(sched) * rng.gen_range(0.0..=1.0) * (1.0 - 1e-12);
        let mut live = state.live_bins();
        live.shuffle(rng);
        live.truncate(rng.gen_range(1..=live.len()));
        let shares: Vec<f64> = live.iter().map(|_| rng.gen_range(0.0..1.0f64) + 1e-3).collect();
        let sum: f64 = shares.iter().sum();
        let adds: Vec<(usize, f64)> = live.iter().zip(&shares).map(|(&b, s)| (b, total * s / sum)).collect();
        let rec = state.bin_step(sched, &adds)?;
        w.push(rec.added);
        trace.push(rec);
    }
    Ok(RandomPlay { final_weight: state.final_weight(), w, trace })
}

/// Check every suffix sum of the complete play `w` against `M(s)`; reports the smallest failing `s`.
pub fn validate_play(w: &[f64], sched: &BinSchedule) -> Result<(), BinGameError> {
    let mut suffix = 0.0;
    for s in 1..=w.len() {
        suffix += w[w.len() - s];
        let limit = sched.m(s);
        if suffix > limit + WEIGHT_TOL * limit.abs().max(1.0) {
            return Err(BinGameError::ConstraintViolated { s, added: suffix, limit });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn heavy_bin_is_killed() {
        let sched = BinSchedule::new(vec![1], vec![10.0]).unwrap();
        let mut st = BinState::new(&sched);
        let rec = st.bin_step(&sched, &[(0, 10.0)]).unwrap();
        assert_eq!(rec.killed, vec![0]);
        assert_eq!(st.final_weight(), 0.0);
    }

    #[test]
    fn equal_weights_leave_half() {
        let sched = BinSchedule::new(vec![1], vec![10.0]).unwrap();
        let mut st = BinState::new(&sched);
        let rec = st.bin_step(&sched, &[(0, 5.0), (1, 5.0)]).unwrap();
        assert_eq!(rec.killed, vec![0]);
        assert_eq!(st.final_weight(), 5.0);
    }

    #[test]
    fn last_turn_over_budget_is_rejected() {
        let sched = BinSchedule::new(vec![1, 1], vec![2.0, 2.0]).unwrap();
        let mut st = BinState::new(&sched);
        st.bin_step(&sched, &[(0, 1.0)]).unwrap();
        let err = st.bin_step(&sched, &[(2, 3.0)]).unwrap_err();
        assert!(matches!(err, BinGameError::ConstraintViolated { s: 1, .. }));
    }

    #[test]
    fn average_bound_examples() {
        assert!(close(average_bound(&[3.0, 2.0], &[1, 1]), 2.0));
        assert!(close(average_bound(&[10.0], &[1]), 5.0));
        assert_eq!(average_bound(&[0.0; 4], &[1; 4]), 0.0);
    }

    #[test]
    fn solo_bound_examples() {
        let sched = BinSchedule::new(vec![2; 4], vec![4.0; 4]).unwrap();
        assert!(close(solo_bound(&sched).unwrap(), 25.0 / 3.0));
        let single = BinSchedule::new(vec![3], vec![7.0]).unwrap();
        assert!(close(solo_bound(&single).unwrap(), 14.0 / 3.0));
        let steep = BinSchedule::new(vec![0, 0, 0, 8], vec![1.0; 4]).unwrap();
        assert_eq!(solo_bound(&steep), Err(BinGameError::HypothesisViolated { s: 1 }));
    }

    #[test]
    fn equal_spread_examples() {
        // dM = (2, 3) induces w = (3, 2)
        let sched = BinSchedule::new(vec![1, 1], vec![2.0, 3.0]).unwrap();
        let play = equal_spread_play(&sched).unwrap();
        assert_eq!(play.w, vec![3.0, 2.0]);
        assert!(close(play.final_weight, 2.0));
        let ones = BinSchedule::new(vec![1; 3], vec![1.0; 3]).unwrap();
        assert!(close(equal_spread_play(&ones).unwrap().final_weight, 13.0 / 12.0));
        let one = BinSchedule::new(vec![4], vec![9.0]).unwrap();
        assert!(close(equal_spread_play(&one).unwrap().final_weight, 9.0 / 5.0));
    }

    #[test]
    fn validate_play_examples() {
        let sched = BinSchedule::new(vec![1; 3], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(validate_play(&[0.0; 3], &sched).is_ok());
        assert!(matches!(validate_play(&[0.0, 0.0, 2.0], &sched), Err(BinGameError::ConstraintViolated { s: 1, .. })));
        let spread = equal_spread_play(&sched).unwrap();
        assert!(validate_play(&spread.w, &sched).is_ok());
    }

    #[test]
    fn random_play_is_legal_and_bounded() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sched = BinSchedule::new(vec![2, 1, 3, 2], vec![3.0, 1.0, 4.0, 1.5]).unwrap();
        for _ in 0..20 {
            let play = random_play(&sched, &mut rng).unwrap();
            assert!(validate_play(&play.w, &sched).is_ok());
            assert!(play.final_weight <= average_bound(&play.w, sched.b()) + 1e-9);
        }
    }

    #[test]
    fn allowance_respects_every_window() {
        let sched = BinSchedule::new(vec![1; 3], vec![1.0, 1.0, 5.0]).unwrap();
        let mut st = BinState::new(&sched);
        // turns 1..3 share M(3) = 7
        assert_eq!(st.allowance(&sched), 7.0);
        st.bin_step(&sched, &[(0, 5.0)]).unwrap();
        // turns 1..3 leave 2, turns 2..3 alone would allow M(2) = 2
        assert_eq!(st.allowance(&sched), 2.0);
        st.bin_step(&sched, &[(1, 1.5)]).unwrap();
        // last turn: min(M(1) = 1, 7 - 6.5, 2 - 1.5)
        assert_eq!(st.allowance(&sched), 0.5);
    }
}
