//! Parameter sweeps over turn-based matches, written as CSV.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::runner::{run_match_specs, MatchConfig, MatchError};
use crate::board::{GameMode, Variant};
use crate::schedule::Schedule;
use crate::strategies::StrategySpec;

/// Column order of sweep CSV files.
pub const SWEEP_COLUMNS: [&str; 17] = [
    "kind",
    "n",
    "alpha",
    "b",
    "maker",
    "breaker",
    "seed",
    "replication",
    "outcome",
    "tau",
    "m_tau",
    "m_tau_over_n",
    "wins",
    "matches",
    "win_fraction",
    "wall_ms",
    "error",
];

fn default_replications() -> u32 {
    1
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_variant() -> Variant {
    Variant::Standard
}

/// A sweep grid, usually read from TOML:
///
/// ```toml
/// n = [128, 256]
/// alpha = [1.0]
/// b = ["clog:c=1", "clog:c=2"]
/// pairs = [["parallel-lines:c=1.44", "split-top"]]
/// seeds = [1, 2]
/// replications = 1
/// epsilon = 0.1
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    /// Breaker schedules.
    pub b: Vec<String>,
    /// `[maker, breaker]` strategy specs.
    pub pairs: Vec<[String; 2]>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    /// Coefficient of Maker's `power` schedule.
    #[serde(default)]
    pub m_c: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<u32>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, MatchError> {
        toml::from_str(text).map_err(|e| MatchError::Config(e.to_string()))
    }
}

/// One CSV row: a match (`kind = match`) or a per-parameter aggregate (`kind = aggregate`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: String,
    pub n: usize,
    pub alpha: f64,
    pub b: String,
    pub maker: String,
    pub breaker: String,
    pub seed: Option<u64>,
    pub replication: Option<u32>,
    pub outcome: Option<String>,
    pub tau: Option<u32>,
    pub m_tau: Option<u64>,
    pub m_tau_over_n: Option<f64>,
    pub wins: Option<usize>,
    pub matches: Option<usize>,
    pub win_fraction: Option<f64>,
    pub wall_ms: Option<u64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
struct Job {
    n: usize,
    alpha: f64,
    b: String,
    maker: String,
    breaker: String,
    seed: u64,
    replication: u32,
}

/// Seed of one replication: the configured seed for replication 0, a mix of
/// both otherwise.
pub fn replication_seed(seed: u64, replication: u32) -> u64 {
    if replication == 0 {
        return seed;
    }
    let mut z = seed ^ (replication as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_job(cfg: &SweepConfig, job: &Job) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        kind: "match".into(),
        n: job.n,
        alpha: job.alpha,
        b: job.b.clone(),
        maker: job.maker.clone(),
        breaker: job.breaker.clone(),
        seed: Some(job.seed),
        replication: Some(job.replication),
        outcome: None,
        tau: None,
        m_tau: None,
        m_tau_over_n: None,
        wins: None,
        matches: None,
        win_fraction: None,
        wall_ms: None,
        error: None,
    };
    let played = (|| -> Result<_, MatchError> {
        let mode = GameMode::new(cfg.variant, false, job.n, cfg.epsilon).map_err(|e| MatchError::Config(e.to_string()))?;
        let m = Schedule::power(job.alpha, cfg.m_c.unwrap_or(1.0)).map_err(|e| MatchError::Config(e.to_string()))?;
        let b: Schedule = job.b.parse().map_err(|e: crate::schedule::ScheduleError| MatchError::Config(e.to_string()))?;
        let maker: StrategySpec = job.maker.parse().map_err(|e: crate::strategies::StrategyError| MatchError::Config(e.to_string()))?;
        let breaker: StrategySpec =
            job.breaker.parse().map_err(|e: crate::strategies::StrategyError| MatchError::Config(e.to_string()))?;
        let mut mc = MatchConfig::new(mode, m, b, replication_seed(job.seed, job.replication));
        mc.max_steps = cfg.max_steps;
        run_match_specs(&mc, &maker, &breaker).map(|(r, _)| r)
    })();
    match played {
        Ok(r) => {
            row.outcome = Some(if r.maker_won() { "maker-win" } else { "survived" }.into());
            row.tau = r.tau;
            row.m_tau = r.m_tau;
            row.m_tau_over_n = r.m_tau_over_n(job.n);
        }
        Err(e) => {
            row.outcome = Some("error".into());
            row.error = Some(e.to_string());
        }
    }
    row.wall_ms = Some(start.elapsed().as_millis() as u64);
    row
}

fn sort_key(r: &SweepRow) -> (usize, u64, String, String, String, u64, u32) {
    (r.n, r.alpha.to_bits(), r.b.clone(), r.maker.clone(), r.breaker.clone(), r.seed.unwrap_or(0), r.replication.unwrap_or(0))
}

/// Run every match of the grid on `jobs` threads; returns match rows sorted by
/// parameters, then one aggregate row per parameter combination.
pub fn run_sweep(cfg: &SweepConfig, jobs: usize) -> Result<Vec<SweepRow>, MatchError> {
    let mut grid = Vec::new();
    for &n in &cfg.n {
        for &alpha in &cfg.alpha {
            for b in &cfg.b {
                for [maker, breaker] in &cfg.pairs {
                    for &seed in &cfg.seeds {
                        for replication in 0..cfg.replications {
                            grid.push(Job {
                                n,
                                alpha,
                                b: b.clone(),
                                maker: maker.clone(),
                                breaker: breaker.clone(),
                                seed,
                                replication,
                            });
                        }
                    }
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| MatchError::Config(e.to_string()))?;
    let mut rows: Vec<SweepRow> = pool.install(|| grid.par_iter().map(|job| run_job(cfg, job)).collect());
    // alpha is non-negative, so its bit pattern orders like the value
    rows.sort_by_cached_key(sort_key);

    let mut groups: BTreeMap<(usize, u64, String, String, String), (f64, usize, usize)> = BTreeMap::new();
    for r in &rows {
        let k = sort_key(r);
        let e = groups.entry((k.0, k.1, k.2, k.3, k.4)).or_insert((r.alpha, 0, 0));
        e.2 += 1;
        if r.outcome.as_deref() == Some("maker-win") {
            e.1 += 1;
        }
    }
    let aggregates: Vec<SweepRow> = groups
        .into_iter()
        .map(|((n, _, b, maker, breaker), (alpha, wins, matches))| SweepRow {
            kind: "aggregate".into(),
            n,
            alpha,
            b,
            maker,
            breaker,
            seed: None,
            replication: None,
            outcome: None,
            tau: None,
            m_tau: None,
            m_tau_over_n: None,
            wins: Some(wins),
            matches: Some(matches),
            win_fraction: Some(wins as f64 / matches as f64),
            wall_ms: None,
            error: None,
        })
        .collect();
    rows.extend(aggregates);
    Ok(rows)
}

/// Write the header and `rows` as CSV.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
