//! Per-turn point budgets m(t) and b(t).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::ceil_slack;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("cannot parse schedule {0:?}")]
    Parse(String),
    #[error("explicit schedule decreases at t={t}: {prev} then {next}")]
    NotMonotone { t: usize, prev: u64, next: u64 },
    #[error("invalid schedule parameter: {0}")]
    Param(String),
}

/// A budget family. `power` is `ceil(c * t^alpha)`, `clog` is `ceil(c * ln(t + 1))`,
/// `const` is `c`, `explicit` lists `m(1), m(2), ...` and holds its last value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Schedule {
    Power { alpha: f64, c: f64 },
    Clog { c: f64 },
    Const { c: u64 },
    Zero,
    Explicit { values: Vec<u64> },
}

impl Schedule {
    pub fn power(alpha: f64, c: f64) -> Result<Self, ScheduleError> {
        if !(alpha.is_finite() && alpha >= 0.0 && c.is_finite() && c >= 0.0) {
            return Err(ScheduleError::Param(format!("power needs alpha >= 0 and c >= 0, got alpha={alpha} c={c}")));
        }
        Ok(Schedule::Power { alpha, c })
    }

    pub fn clog(c: f64) -> Result<Self, ScheduleError> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(ScheduleError::Param(format!("clog needs c >= 0, got {c}")));
        }
        Ok(Schedule::Clog { c })
    }

    pub fn explicit(values: Vec<u64>) -> Result<Self, ScheduleError> {
        for (i, w) in values.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(ScheduleError::NotMonotone { t: i + 2, prev: w[0], next: w[1] });
            }
        }
        Ok(Schedule::Explicit { values })
    }

    /// Re-check invariants, for schedules that arrive through deserialization.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        match self {
            Schedule::Power { alpha, c } => Schedule::power(*alpha, *c).map(|_| ()),
            Schedule::Clog { c } => Schedule::clog(*c).map(|_| ()),
            Schedule::Explicit { values } => Schedule::explicit(values.clone()).map(|_| ()),
            Schedule::Const { .. } | Schedule::Zero => Ok(()),
        }
    }

    /// Budget at timestep `t` (1-based); 0 for `t = 0`.
    pub fn eval(&self, t: u32) -> u64 {
        if t == 0 {
            return 0;
        }
        let tf = t as f64;
        match self {
            Schedule::Power { alpha, c } => ceil_slack(c * tf.powf(*alpha)).max(0) as u64,
            Schedule::Clog { c } => ceil_slack(c * (tf + 1.0).ln()).max(0) as u64,
            Schedule::Const { c } => *c,
            Schedule::Zero => 0,
            Schedule::Explicit { values } => {
                values.get(t as usize - 1).or(values.last()).copied().unwrap_or(0)
            }
        }
    }

    /// `sum_{t=1}^{T} eval(t)`.
    pub fn cumulative(&self, t_max: u32) -> u64 {
        (1..=t_max).map(|t| self.eval(t)).sum()
    }

    /// Smallest `t >= 1` with `eval(t) >= target`, searching up to `limit`.
    pub fn first_reaching(&self, target: u64, limit: u32) -> Option<u32> {
        (1..=limit).find(|&t| self.eval(t) >= target)
    }

    /// Exponent of a power family, if this is one.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            Schedule::Power { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Power { alpha, c } => write!(f, "power:alpha={alpha},c={c}"),
            Schedule::Clog { c } => write!(f, "clog:c={c}"),
            Schedule::Const { c } => write!(f, "const:c={c}"),
            Schedule::Zero => write!(f, "zero"),
            Schedule::Explicit { values } => {
                let parts: Vec<String> = values.iter().map(u64::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// Split `name:k=v,...` or `name(k=v,...)` into the name and its key-value pairs.
pub(crate) fn split_spec(s: &str) -> Option<(String, Vec<(String, String)>)> {
    let s = s.trim();
    let (name, rest) = if let Some(open) = s.find('(') {
        let body = s[open + 1..].strip_suffix(')')?;
        (&s[..open], body)
    } else if let Some((name, body)) = s.split_once(':') {
        (name, body)
    } else {
        (s, "")
    };
    let mut params = Vec::new();
    for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=')?;
        params.push((k.trim().to_string(), v.trim().to_string()));
    }
    Some((name.trim().to_string(), params))
}

impl FromStr for Schedule {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScheduleError::Parse(s.to_string());
        let trimmed = s.trim();
        if trimmed.chars().next().map_or(false, |c| c.is_ascii_digit()) {
            let body = trimmed.strip_prefix("explicit:").unwrap_or(trimmed);
            let values = body
                .split(',')
                .map(|v| v.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            return Schedule::explicit(values);
        }
        if let Some(body) = trimmed.strip_prefix("explicit:") {
            return body.parse();
        }
        // `const:3` is accepted as shorthand for `const:c=3`
        if let Some(v) = trimmed.strip_prefix("const:").filter(|v| !v.contains('=')) {
            return Ok(Schedule::Const { c: v.trim().parse().map_err(|_| bad())? });
        }
        let (name, params) = split_spec(trimmed).ok_or_else(bad)?;
        let get = |key: &str, default: f64| -> Result<f64, ScheduleError> {
            match params.iter().find(|(k, _)| k == key) {
                Some((_, v)) => v.parse().map_err(|_| bad()),
                None => Ok(default),
            }
        };
        for (k, _) in &params {
            if !matches!(k.as_str(), "alpha" | "c") {
                return Err(ScheduleError::Param(format!("unknown parameter {k:?} in {s:?}")));
            }
        }
        match name.as_str() {
            "power" => Schedule::power(get("alpha", 1.0)?, get("c", 1.0)?),
            "clog" => Schedule::clog(get("c", 1.0)?),
            "const" => {
                let c = get("c", 1.0)?;
                if c < 0.0 || c.fract() != 0.0 {
                    return Err(ScheduleError::Param(format!("const needs a non-negative integer, got {c}")));
                }
                Ok(Schedule::Const { c: c as u64 })
            }
            "zero" => Ok(Schedule::Zero),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_examples() {
        assert_eq!(Schedule::power(1.0, 1.0).unwrap().eval(3), 3);
        assert_eq!(Schedule::clog(2.0).unwrap().eval(7), 5);
        assert_eq!(Schedule::power(0.5, 1.0).unwrap().eval(10), 4);
        assert_eq!(Schedule::Const { c: 3 }.eval(100), 3);
        assert_eq!(Schedule::Zero.eval(5), 0);
        assert_eq!(Schedule::power(1.0, 1.0).unwrap().eval(0), 0);
    }

    #[test]
    fn power_half_at_perfect_squares() {
        let s = Schedule::power(0.5, 1.0).unwrap();
        assert_eq!(s.eval(16), 4);
        assert_eq!(s.eval(17), 5);
        assert_eq!(s.cumulative(4), 1 + 2 + 2 + 2);
    }

    #[test]
    fn explicit_lists_hold_their_last_value() {
        let s: Schedule = "1,2,2,5".parse().unwrap();
        assert_eq!(s.eval(4), 5);
        assert_eq!(s.eval(9), 5);
        assert_eq!(s.cumulative(5), 15);
        assert!(matches!("3,2".parse::<Schedule>(), Err(ScheduleError::NotMonotone { t: 2, .. })));
    }

    #[test]
    fn parse_round_trips() {
        for text in ["power:alpha=0.5,c=1", "clog:c=1.44", "const:c=3", "zero", "1,2,3"] {
            let s: Schedule = text.parse().unwrap();
            assert_eq!(s.to_string().parse::<Schedule>().unwrap(), s);
        }
        assert_eq!("power(alpha=1)".parse::<Schedule>().unwrap(), Schedule::Power { alpha: 1.0, c: 1.0 });
        assert_eq!("const:7".parse::<Schedule>().unwrap(), Schedule::Const { c: 7 });
        assert!("cubic".parse::<Schedule>().is_err());
        assert!("clog:d=2".parse::<Schedule>().is_err());
    }

    #[test]
    fn first_reaching_finds_the_minimal_time() {
        let s = Schedule::power(1.0, 1.0).unwrap();
        assert_eq!(s.first_reaching(100, 1000), Some(100));
        assert_eq!(Schedule::Zero.first_reaching(1, 1000), None);
    }
}
