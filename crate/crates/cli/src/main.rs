use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use linegame::bingame::{average_bound, equal_spread_play, random_play, solo_bound, validate_play, BinSchedule, BinState};
use linegame::harness::{
    replay_verify, run_batched, run_match_specs, run_sweep, write_sweep_csv, BatchedBreaker, BatchedConfig, BatchedMaker,
    MatchConfig, MatchError, SweepConfig, Transcript,
};
use linegame::incidence::{reduce_to_bingame, st_monitor, IncidenceError, StConfig};
use linegame::strategies::StrategySpec;
use linegame::{GameMode, GridPoint, Move, Schedule, Variant};

#[derive(Parser)]
#[command(name = "linegame", version, about = "Maker-Breaker n-in-a-row games on the integer lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Standard,
    Directed,
}

impl From<ModeArg> for Variant {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Standard => Variant::Standard,
            ModeArg::Directed => Variant::Directed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PlayArg {
    EqualSpread,
    Random,
    Explicit,
}

#[derive(Subcommand)]
enum Command {
    /// Play one turn-based match.
    Simulate {
        #[arg(long)]
        n: usize,
        /// Maker plays ceil(t^alpha) unless --m-family is given.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        m_family: Option<String>,
        #[arg(long, default_value = "clog:c=1")]
        b_family: String,
        #[arg(long, default_value = "greedy")]
        maker: String,
        #[arg(long, default_value = "split-top")]
        breaker: String,
        /// Defaults to max(0.1, 2/n)
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum, default_value = "standard")]
        mode: ModeArg,
        #[arg(long)]
        max_steps: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the transcript here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play the batched game.
    Batched {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        /// Defaults to 1 - m(T)/n.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum, default_value = "standard")]
        mode: ModeArg,
        /// rectangle or grid.
        #[arg(long, default_value = "rectangle")]
        maker: String,
        /// split, random, directed-greedy or idle.
        #[arg(long, default_value = "split")]
        breaker: String,
        /// Batch horizon T for the grid Maker.
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long, default_value = "const:c=1")]
        b_family: String,
        #[arg(long, default_value_t = 100)]
        max_retries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play the weighted bin game.
    Bingame {
        #[arg(long = "T")]
        turns: usize,
        /// Kill counts: a schedule family or a comma-separated list.
        #[arg(long)]
        b: String,
        /// Budget increments: a schedule family or a comma-separated list.
        #[arg(long = "dM")]
        delta_m: String,
        #[arg(long, value_enum, default_value = "equal-spread")]
        play: PlayArg,
        /// Per-turn totals for --play explicit, spread equally over live bins.
        #[arg(long)]
        w: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reduce a split-top transcript to the bin game and run incidence monitors.
    Analyze {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2.5)]
        c: f64,
        #[arg(long, default_value_t = 2.5)]
        c_prime: f64,
        /// Rich-line threshold for the monitor; defaults to max(2, ceil(epsilon n)).
        #[arg(long)]
        k: Option<usize>,
        /// Write the window checks as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a parameter sweep from a TOML config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check that a transcript replays to its recorded outcome.
    Replay {
        #[arg(long)]
        transcript: PathBuf,
    },
}

/// Error with its exit code: 1 configuration, 2 illegal move, 3 invariant.
struct Failure {
    code: u8,
    message: String,
}

fn config(msg: impl ToString) -> Failure {
    Failure { code: 1, message: msg.to_string() }
}

impl From<MatchError> for Failure {
    fn from(e: MatchError) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

fn parse_schedule(s: &str) -> Result<Schedule, Failure> {
    s.parse().map_err(config)
}

/// `T` values from a comma-separated list (holding its last entry) or a schedule family.
fn series(spec: &str, turns: usize) -> Result<Vec<f64>, Failure> {
    let listed: Result<Vec<f64>, _> = spec.split(',').map(|v| v.trim().parse::<f64>()).collect();
    match listed {
        Ok(v) if !v.is_empty() => {
            let last = *v.last().expect("nonempty");
            Ok((0..turns).map(|i| v.get(i).copied().unwrap_or(last)).collect())
        }
        _ => {
            let sched = parse_schedule(spec)?;
            Ok((1..=turns as u32).map(|t| sched.eval(t) as f64).collect())
        }
    }
}

fn print_json(v: &serde_json::Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("json values serialize");
    // a closed pipe (e.g. `| head`) is not an error worth a panic
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn simulate(cmd: Command) -> Result<(), Failure> {
    let Command::Simulate { n, alpha, m_family, b_family, maker, breaker, epsilon, mode, max_steps, seed, out } = cmd
    else {
        unreachable!()
    };
    let epsilon = epsilon.unwrap_or_else(|| 0.1f64.max(2.0 / n.max(1) as f64));
    let mode = GameMode::new(mode.into(), false, n, epsilon).map_err(config)?;
    let m = match m_family {
        Some(s) => parse_schedule(&s)?,
        None => Schedule::power(alpha, 1.0).map_err(config)?,
    };
    let b = parse_schedule(&b_family)?;
    let maker: StrategySpec = maker.parse().map_err(config)?;
    let breaker: StrategySpec = breaker.parse().map_err(config)?;
    let mut cfg = MatchConfig::new(mode, m, b, seed);
    cfg.max_steps = max_steps;
    let (result, transcript) = run_match_specs(&cfg, &maker, &breaker)?;
    if let Some(path) = out {
        transcript.write_to(&path).map_err(config)?;
    }
    print_json(&json!({
        "maker": transcript.header.maker,
        "breaker": transcript.header.breaker,
        "outcome": result.outcome,
        "tau": result.tau,
        "m_tau": result.m_tau,
        "m_tau_over_n": result.m_tau_over_n(n),
        "maker_points": result.maker_points,
        "breaker_points": result.breaker_points,
        "max_active_count": result.steps.iter().map(|s| s.max_active_count).max(),
    }));
    Ok(())
}

fn batched(cmd: Command) -> Result<(), Failure> {
    let Command::Batched { n, alpha, epsilon, mode, maker, breaker, horizon, b_family, max_retries, seed } = cmd else {
        unreachable!()
    };
    let maker: BatchedMaker = maker.parse()?;
    // `batched-random(epsilon=0.5,max_retries=100)` overrides the flags
    let spec: StrategySpec = breaker.parse().map_err(config)?;
    let breaker: BatchedBreaker = spec.name.parse()?;
    if let Some(k) = spec.params.keys().find(|k| !matches!(k.as_str(), "epsilon" | "max_retries")) {
        return Err(config(format!("{} does not take parameter {k:?}", spec.name)));
    }
    let mut cfg = BatchedConfig::new(mode.into(), n, alpha, maker, breaker);
    cfg.epsilon = spec.get_f64("epsilon").map_err(config)?.or(epsilon);
    cfg.horizon = horizon;
    cfg.breaker_schedule = parse_schedule(&b_family)?;
    cfg.max_retries = spec.get_usize("max_retries").map_err(config)?.unwrap_or(max_retries);
    cfg.seed = seed;
    let result = run_batched(&cfg)?;
    print_json(&serde_json::to_value(&result).expect("result serializes"));
    Ok(())
}

fn bingame(cmd: Command) -> Result<(), Failure> {
    let Command::Bingame { turns, b, delta_m, play, w, seed } = cmd else { unreachable!() };
    let b: Vec<usize> = series(&b, turns)?
        .into_iter()
        .map(|v| if v >= 0.0 && v.fract() == 0.0 { Ok(v as usize) } else { Err(config(format!("kill count {v} is not a count"))) })
        .collect::<Result<_, _>>()?;
    let sched = BinSchedule::new(b, series(&delta_m, turns)?).map_err(config)?;
    let (final_weight, profile) = match play {
        PlayArg::EqualSpread => {
            let p = equal_spread_play(&sched).map_err(config)?;
            (p.final_weight, p.w)
        }
        PlayArg::Random => {
            let p = random_play(&sched, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(config)?;
            (p.final_weight, p.w)
        }
        PlayArg::Explicit => {
            let w = series(w.as_deref().ok_or_else(|| config("--play explicit needs --w"))?, turns)?;
            validate_play(&w, &sched).map_err(config)?;
            let mut state = BinState::new(&sched);
            for &ws in &w {
                let live = state.live_bins();
                let share = ws / live.len() as f64;
                let adds: Vec<(usize, f64)> = live.into_iter().map(|i| (i, share)).collect();
                state.bin_step(&sched, &adds).map_err(config)?;
            }
            (state.final_weight(), w)
        }
    };
    let solo = solo_bound(&sched).ok();
    print_json(&json!({
        "bins": sched.bins(),
        "final_weight": final_weight,
        "w": profile,
        "average_bound": average_bound(&profile, sched.b()),
        "solo_bound": solo,
    }));
    Ok(())
}

fn analyze(cmd: Command) -> Result<(), Failure> {
    let Command::Analyze { transcript, epsilon, n, c, c_prime, k, csv } = cmd else { unreachable!() };
    let cfg = StConfig::new(c, c_prime).map_err(config)?;
    let tr = Transcript::read_from(&transcript).map_err(config)?;
    let trace = reduce_to_bingame(&tr, epsilon, n, &cfg).map_err(|e| match e {
        IncidenceError::Replay { .. } => Failure { code: 2, message: e.to_string() },
        _ => config(e),
    })?;
    if let Some(path) = csv {
        let file = fs::File::create(&path).map_err(config)?;
        trace.write_csv(file).map_err(config)?;
    }
    let points: Vec<GridPoint> = tr
        .moves
        .iter()
        .filter_map(|r| match &r.mv {
            Move::Maker(p) => Some(p.iter().copied()),
            Move::Breaker(_) => None,
        })
        .flatten()
        .collect();
    let k = k.unwrap_or_else(|| ((epsilon * n as f64).ceil() as usize).max(2));
    let monitor = st_monitor("maker points", &points, k, &cfg).map_err(config)?;
    let violations = trace.violations();
    print_json(&json!({
        "turns": trace.turns,
        "offset": trace.offset,
        "rate": trace.rate,
        "bprime": trace.bprime_final,
        "bins": trace.bins,
        "total_added": trace.total_added,
        "total_entered": trace.total_entered,
        "total_killed": trace.total_killed,
        "final_weight": trace.final_weight,
        "winning_bin_weight": trace.winning_bin_weight,
        "winning_bin_required": trace.winning_bin_required,
        "violations": violations,
        "monitor": monitor,
    }));
    if !violations.is_empty() || !monitor.ok() {
        return Err(Failure { code: 3, message: "reduction or incidence monitor reported violations".into() });
    }
    Ok(())
}

fn sweep(cmd: Command) -> Result<(), Failure> {
    let Command::Sweep { config: path, out, jobs } = cmd else { unreachable!() };
    let text = fs::read_to_string(&path).map_err(config)?;
    let cfg = SweepConfig::from_toml(&text)?;
    let rows = run_sweep(&cfg, jobs)?;
    let file = fs::File::create(&out).map_err(config)?;
    write_sweep_csv(&rows, file).map_err(config)?;
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!("{} rows written to {}, {errors} failed matches", rows.len(), out.display());
    Ok(())
}

fn replay(cmd: Command) -> Result<(), Failure> {
    let Command::Replay { transcript } = cmd else { unreachable!() };
    let tr = Transcript::read_from(&transcript).map_err(config)?;
    match replay_verify(&tr) {
        Ok(r) => {
            print_json(&json!({ "ok": true, "outcome": r.result.outcome, "moves": tr.moves.len() }));
            Ok(())
        }
        Err(m) => Err(Failure { code: if m.illegal { 2 } else { 3 }, message: m.to_string() }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        c @ Command::Simulate { .. } => simulate(c),
        c @ Command::Batched { .. } => batched(c),
        c @ Command::Bingame { .. } => bingame(c),
        c @ Command::Analyze { .. } => analyze(c),
        c @ Command::Sweep { .. } => sweep(c),
        c @ Command::Replay { .. } => replay(c),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
