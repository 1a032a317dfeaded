//! Maker and Breaker strategies behind a uniform interface: given the position
//! and this turn's budget, produce a move.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::board::{BoardError, BreakerMark, GameMode, GameState};
use crate::geometry::{GeometryError, GridPoint};
use crate::schedule::{split_spec, Schedule};

mod baseline;
mod batched;
mod greedy;
mod parallel;
mod split;

pub use baseline::{BreakerIdle, BreakerRandom, LineTargeting};
pub use batched::{
    breaker_batched_directed_greedy, breaker_batched_random, breaker_batched_split, maker_grid_batched,
    maker_rectangle_batched, RandomBatchedSet, RectangleSet,
};
pub use greedy::GreedyLine;
pub use parallel::{parallel_lines_window, ParallelLines, ParallelLinesPlan, PlanWindow};
pub(crate) use split::heaviest_first;
pub use split::{eps_split, split_params, split_threshold, SplitRule, SplitTop};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget exceeded: {required} points required, {available} available")]
    BudgetExceeded { required: usize, available: usize },
    #[error("sampling failed after {attempts} attempts ({missed} missed a rich run, {oversized} were too large)")]
    SamplingFailure { attempts: usize, missed: usize, oversized: usize },
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Read-only view handed to a strategy each turn.
pub struct StrategyContext<'a> {
    pub state: &'a GameState,
    pub t: u32,
    pub budget: usize,
    pub maker_schedule: &'a Schedule,
    pub breaker_schedule: &'a Schedule,
    pub rng: &'a mut ChaCha8Rng,
}

impl StrategyContext<'_> {
    pub fn mode(&self) -> &GameMode {
        self.state.mode()
    }

    pub fn n(&self) -> usize {
        self.state.n()
    }
}

pub trait MakerStrategy: Send {
    /// Canonical spec string, parseable by [`StrategySpec`].
    fn name(&self) -> String;

    /// Smallest Maker count on a line this strategy reads from the line index.
    fn min_tracked_count(&self, mode: &GameMode) -> usize;

    fn play(&mut self, ctx: &mut StrategyContext<'_>) -> Result<Vec<GridPoint>, StrategyError>;
}

pub trait BreakerStrategy: Send {
    fn name(&self) -> String;

    fn min_tracked_count(&self, mode: &GameMode) -> usize;

    fn play(&mut self, ctx: &mut StrategyContext<'_>) -> Result<Vec<BreakerMark>, StrategyError>;
}

/// A strategy name with parameters, written `name`, `name:k=v,...` or `name(k=v,...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategySpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl StrategySpec {
    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, StrategyError> {
        self.params
            .get(key)
            .map(|v| v.parse::<f64>().map_err(|_| StrategyError::Config(format!("{}: {key}={v} is not a number", self.name))))
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, StrategyError> {
        self.params
            .get(key)
            .map(|v| v.parse::<usize>().map_err(|_| StrategyError::Config(format!("{}: {key}={v} is not a count", self.name))))
            .transpose()
    }

    fn only_keys(&self, allowed: &[&str]) -> Result<(), StrategyError> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(StrategyError::Config(format!("{} does not take parameter {k:?}", self.name))),
            None => Ok(()),
        }
    }
}

impl FromStr for StrategySpec {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, params) = split_spec(s).ok_or_else(|| StrategyError::Config(format!("cannot parse strategy {s:?}")))?;
        if name.is_empty() {
            return Err(StrategyError::Config(format!("empty strategy name in {s:?}")));
        }
        Ok(StrategySpec { name, params: params.into_iter().collect() })
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", parts.join(","))?;
        }
        Ok(())
    }
}

pub fn build_maker(spec: &StrategySpec) -> Result<Box<dyn MakerStrategy>, StrategyError> {
    match spec.name.as_str() {
        "greedy" => {
            spec.only_keys(&[])?;
            Ok(Box::new(GreedyLine::new()))
        }
        "parallel-lines" => {
            spec.only_keys(&["c", "epsilon"])?;
            let c = spec.get_f64("c")?.unwrap_or(1.0);
            let eps = spec.get_f64("epsilon")?.unwrap_or(0.1);
            Ok(Box::new(ParallelLines::new(c, eps)?))
        }
        other => Err(StrategyError::Config(format!("unknown maker strategy {other:?}"))),
    }
}

pub fn build_breaker(spec: &StrategySpec) -> Result<Box<dyn BreakerStrategy>, StrategyError> {
    match spec.name.as_str() {
        "split-top" => {
            spec.only_keys(&["epsilon"])?;
            Ok(Box::new(SplitTop::new(spec.get_f64("epsilon")?)?))
        }
        "random" => {
            spec.only_keys(&[])?;
            Ok(Box::new(BreakerRandom::new()))
        }
        "idle" => {
            spec.only_keys(&[])?;
            Ok(Box::new(BreakerIdle))
        }
        "line-targeting" => {
            spec.only_keys(&[])?;
            Ok(Box::new(LineTargeting::new()))
        }
        other => Err(StrategyError::Config(format!("unknown breaker strategy {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings_parse() {
        let a: StrategySpec = "parallel-lines(c=1.44,epsilon=0.08)".parse().unwrap();
        let b: StrategySpec = "parallel-lines:c=1.44,epsilon=0.08".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get_f64("c").unwrap(), Some(1.44));
        let plain: StrategySpec = "idle".parse().unwrap();
        assert!(plain.params.is_empty());
        assert_eq!(plain.to_string(), "idle");
    }

    #[test]
    fn builders_reject_unknown_names_and_keys() {
        assert!(build_maker(&"telepathy".parse().unwrap()).is_err());
        assert!(build_breaker(&"split-top:delta=1".parse().unwrap()).is_err());
        assert!(build_breaker(&"split-top:epsilon=0.5".parse().unwrap()).is_ok());
        assert!(build_maker(&"parallel-lines:c=2".parse().unwrap()).is_ok());
    }
}
