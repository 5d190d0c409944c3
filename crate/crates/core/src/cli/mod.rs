//! The `dgp` command line: argument parsing, dispatch to the solvers and artifact
//! emission. Every run writes its outputs plus a `manifest.json` that records the
//! resolved [`RunConfig`]; `dgp replay <manifest>` repeats a run from it.

mod config;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{Basin, Command, Method, Range, RunConfig, Target};
pub use output::{Manifest, OutputDir};

use crate::analysis::{phase_transition_scan, scan_bifurcations, vanthoff_decompose, ModelFamily};
use crate::asymptotics::{kramers_time, mfpt_asymptotic, PotentialGrid};
use crate::exact::{
    mfpt_backward_left, mfpt_backward_right, mfpt_exact_left, mfpt_exact_right, stationary_distribution, Support,
};
use crate::model::{build_expansion, find_fixed_points, BirthDeathModel, Stability};
use crate::simulate::{mc_mfpt, mc_mfpt_with, ssa_trajectory, McOptions, Stop};
use crate::{diffusion, Error, Result};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const USAGE: i32 = 64;
}

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "DGP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dgp", version, about = "Birth-death process analysis: exact, asymptotic, diffusion and Monte Carlo")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct Common {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// System size.
    #[arg(long = "V")]
    v: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores; DGP_THREADS overrides).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Exact stationary distribution -> stationary.csv.
    Stationary {
        #[command(flatten)]
        common: Common,
        /// Truncate the state space here instead of automatically.
        #[arg(long)]
        n_max: Option<u64>,
    },
    /// phi0, phi1 and Phi on a grid -> potential.csv.
    Potential {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0.01:3:300")]
        x_range: String,
    },
    /// Mean first passage times between named fixed points -> mfpt.json.
    Mfpt {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "lower")]
        from_basin: Basin,
        #[arg(long, value_enum, default_value = "past-barrier")]
        to: Target,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "exact,asymptotic,kramers")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 1000)]
        replicas: u64,
        /// Upper end of the fixed-point search.
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
        /// Wall-clock budget for the Monte-Carlo estimate.
        #[arg(long)]
        mc_budget_secs: Option<f64>,
    },
    /// One Gillespie trajectory -> trajectory.csv (and estimate.json with --absorb).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n0: u64,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long)]
        absorb: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        replicas: u64,
    },
    /// Bifurcation and phase-transition scan -> phase.csv, events.jsonl.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: String,
        #[arg(long)]
        range: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
    },
    /// van't Hoff decomposition of the exact potential -> vanthoff.csv.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0.05:2:40")]
        x_range: String,
    },
    /// Kramers-Moyal vs HGTT vs effective diffusion -> diffusion.csv.
    DiffusionCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0.05:3:60")]
        x_range: String,
    },
    /// Re-run the configuration recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Write to this directory instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config_from(common: Common, command: Command) -> RunConfig {
    RunConfig {
        command,
        model_path: common.model,
        v: common.v,
        seed: common.seed,
        out_dir: common.out,
        threads: common.threads,
    }
}

fn parse_config(sub: Sub) -> Result<RunConfig> {
    Ok(match sub {
        Sub::Stationary { common, n_max } => config_from(common, Command::Stationary { n_max }),
        Sub::Potential { common, x_range } => config_from(common, Command::Potential { x_range: x_range.parse()? }),
        Sub::Mfpt { common, from_basin, to, methods, replicas, x_max, mc_budget_secs } => {
            config_from(common, Command::Mfpt { from_basin, to, methods, replicas, x_max, mc_budget_secs })
        }
        Sub::Simulate { common, n0, t_max, absorb, replicas } => {
            config_from(common, Command::Simulate { n0, t_max, absorb, replicas })
        }
        Sub::Scan { common, param, range, x_min, x_max } => {
            config_from(common, Command::Scan { param, range: range.parse()?, x_min, x_max })
        }
        Sub::Decompose { common, x_range } => config_from(common, Command::Decompose { x_range: x_range.parse()? }),
        Sub::DiffusionCompare { common, x_range } => {
            config_from(common, Command::DiffusionCompare { x_range: x_range.parse()? })
        }
        Sub::Replay { manifest, out } => {
            let mut config = Manifest::read(&manifest)?.config;
            if let Some(out) = out {
                config.out_dir = out;
            }
            config
        }
    })
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        exit::VALIDATION
    } else {
        exit::NUMERICAL
    }
}

/// Entry point of the binary: parses `args` (including the program name), runs
/// the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => exit::USAGE,
                _ => exit::VALIDATION,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = parse_config(cli.command).and_then(|config| run(&config));
    match result {
        Ok(manifest) => {
            println!("wrote {} file(s) to {}", manifest.outputs.len() + 1, manifest.config.out_dir.display());
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn thread_count(config: &RunConfig) -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Domain(format!("{THREADS_ENV} must be a positive integer, got '{s}'"))),
        Err(_) => Ok(config.threads),
    }
}

/// Executes one run and writes its artifacts and manifest.
pub fn run(config: &RunConfig) -> Result<Manifest> {
    if !(config.v > 0.0) {
        return Err(Error::Domain(format!("--V must be positive, got {}", config.v)));
    }
    let model = BirthDeathModel::from_json_file(&config.model_path)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(config)? {
        if n == 0 {
            return Err(Error::Domain("thread count must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Numerical(format!("cannot start worker threads: {e}")))?;
    let mut out = OutputDir::create(&config.out_dir)?;
    pool.install(|| dispatch(config, &model, &mut out))?;
    out.finish(config)
}

fn dispatch(config: &RunConfig, model: &BirthDeathModel, out: &mut OutputDir) -> Result<()> {
    let v = config.v;
    match &config.command {
        Command::Stationary { n_max } => stationary(model, v, *n_max, out),
        Command::Potential { x_range } => potential(model, v, x_range, out),
        Command::Mfpt { from_basin, to, methods, replicas, x_max, mc_budget_secs } => {
            let req = MfptRequest {
                from: *from_basin,
                to: *to,
                methods,
                replicas: *replicas,
                x_max: *x_max,
                budget: mc_budget_secs.map(Duration::from_secs_f64),
                seed: config.seed,
            };
            mfpt(model, v, &req, out)
        }
        Command::Simulate { n0, t_max, absorb, replicas } => {
            simulate(model, v, *n0, *t_max, *absorb, *replicas, config.seed, out)
        }
        Command::Scan { param, range, x_min, x_max } => scan(model, param, range, (*x_min, *x_max), out),
        Command::Decompose { x_range } => decompose(model, v, x_range, out),
        Command::DiffusionCompare { x_range } => diffusion_compare(model, v, x_range, out),
    }
}

#[derive(Serialize)]
struct StationaryRow {
    n: u64,
    x: f64,
    p: f64,
    log_p: f64,
}

fn stationary(model: &BirthDeathModel, v: f64, n_max: Option<u64>, out: &mut OutputDir) -> Result<()> {
    let dist = stationary_distribution(model, v, n_max)?;
    if dist.support == Support::AbsorbedAtZero {
        log::warn!("state 0 is absorbing: the stationary law is a point mass at 0");
    }
    let rows: Vec<StationaryRow> = (0..=dist.n_max)
        .map(|n| {
            let lp = dist.log_probability(n);
            StationaryRow { n, x: n as f64 / v, p: lp.exp(), log_p: lp }
        })
        .collect();
    out.csv("stationary.csv", &rows)?;
    out.json(
        "stationary.json",
        &json!({
            "V": v,
            "support": dist.support,
            "n_max": dist.n_max,
            "tail_mass": dist.tail_mass,
            "mean": dist.mean(),
            "variance": dist.variance(),
            "mode": dist.mode(),
        }),
    )
}

fn potential(model: &BirthDeathModel, v: f64, range: &Range, out: &mut OutputDir) -> Result<()> {
    let exp = build_expansion(model)?;
    let grid = PotentialGrid::new(&exp, range.hi)?;
    let rows = grid.sample(range.lo, range.hi, range.points, v)?;
    out.csv("potential.csv", &rows)?;
    out.json("potential_meta.json", &json!({ "V": v, "quadrature": grid.info() }))
}

struct MfptRequest<'a> {
    from: Basin,
    to: Target,
    methods: &'a [Method],
    replicas: u64,
    x_max: f64,
    budget: Option<Duration>,
    seed: u64,
}

/// Start, end and barrier of a passage, resolved from the fixed points.
#[derive(Debug, Serialize)]
struct Passage {
    x_from: f64,
    x_to: f64,
    barrier: f64,
    rightward: bool,
}

fn resolve_passage(model: &BirthDeathModel, from: Basin, to: Target, x_max: f64) -> Result<Passage> {
    let exp = build_expansion(model)?;
    let fps = find_fixed_points(&exp, 0.0, x_max)?;
    let stable: Vec<f64> =
        fps.iter().filter(|f| f.stability == Stability::Stable && f.location > 0.0).map(|f| f.location).collect();
    let unstable: Vec<f64> =
        fps.iter().filter(|f| f.stability == Stability::Unstable && f.location > 0.0).map(|f| f.location).collect();
    if stable.len() < 2 {
        return Err(Error::Precondition(format!(
            "need two basins on (0, {x_max}] to name a passage, found stable points {stable:?}"
        )));
    }
    let (x_from, rightward) = match from {
        Basin::Lower => (stable[0], true),
        Basin::Upper => (*stable.last().unwrap(), false),
    };
    let barrier = if rightward {
        unstable.iter().copied().find(|&u| u > x_from)
    } else {
        unstable.iter().copied().rev().find(|&u| u < x_from)
    }
    .ok_or_else(|| Error::Precondition("no barrier next to the starting basin".into()))?;
    let beyond = if rightward {
        stable.iter().copied().find(|&s| s > barrier)
    } else {
        stable.iter().copied().rev().find(|&s| s < barrier)
    }
    .ok_or_else(|| Error::Precondition("no basin beyond the barrier".into()))?;
    let x_to = match (to, rightward) {
        (Target::Barrier, _) => barrier,
        (Target::PastBarrier, _) => 0.5 * (barrier + beyond),
        (Target::UpperBasin, true) => *stable.last().unwrap(),
        (Target::LowerBasin, false) => stable[0],
        (t, _) => {
            return Err(Error::Domain(format!("target {t:?} lies behind the starting basin {from:?}")));
        }
    };
    Ok(Passage { x_from, x_to, barrier, rightward })
}

fn outcome<T: Serialize>(r: Result<T>) -> (Value, Option<Error>) {
    match r {
        Ok(v) => (serde_json::to_value(v).unwrap_or(Value::Null), None),
        Err(e) => (json!({ "error": e.to_string() }), Some(e)),
    }
}

fn mfpt(model: &BirthDeathModel, v: f64, req: &MfptRequest<'_>, out: &mut OutputDir) -> Result<()> {
    let passage = resolve_passage(model, req.from, req.to, req.x_max)?;
    let n_from = (passage.x_from * v).round() as u64;
    let n_to = (passage.x_to * v).round() as u64;
    if n_from == n_to {
        return Err(Error::Domain(format!("start and target both map to n = {n_from} at V = {v}")));
    }
    let exp = build_expansion(model)?;
    let mut estimates = serde_json::Map::new();
    let mut failures = Vec::new();
    for method in req.methods {
        let (value, err) = match method {
            Method::Exact => outcome(exact_estimate(model, v, n_from, n_to, passage.rightward)),
            Method::Asymptotic => outcome((|| {
                if !passage.rightward {
                    return Err(Error::Precondition("the asymptotic MFPT integral is implemented for rightward passages".into()));
                }
                let grid = PotentialGrid::new(&exp, n_to as f64 / v + 2.0 / v)?;
                let t = mfpt_asymptotic(&exp, &grid, v, n_from as f64 / v, n_to as f64 / v)?;
                Ok(json!({ "time": t }))
            })()),
            Method::Kramers => outcome((|| {
                let grid = PotentialGrid::new(&exp, passage.x_from.max(passage.barrier) * 1.01)?;
                let k = kramers_time(&exp, &grid, v, passage.x_from, passage.barrier)?;
                let mut value = serde_json::to_value(&k)?;
                value["logTime"] = json!(k.log_time());
                Ok(value)
            })()),
            Method::Mc => outcome(mc_mfpt_with(
                model,
                v,
                n_from,
                n_to,
                req.replicas,
                req.seed,
                McOptions { budget: req.budget },
            )),
        };
        let name = serde_json::to_value(method)?.as_str().unwrap_or("method").to_string();
        estimates.insert(name, value);
        failures.extend(err);
    }
    if !req.methods.is_empty() && failures.len() == req.methods.len() {
        return Err(failures.remove(0));
    }
    out.json(
        "mfpt.json",
        &json!({
            "V": v,
            "from": { "basin": req.from, "x": passage.x_from, "n": n_from },
            "to": { "target": req.to, "x": passage.x_to, "n": n_to },
            "barrier": passage.barrier,
            "estimates": estimates,
        }),
    )
}

/// Exact passage time, cross-checked against the backward-equation solve when
/// the state space is small enough for it.
fn exact_estimate(model: &BirthDeathModel, v: f64, n_from: u64, n_to: u64, rightward: bool) -> Result<Value> {
    const ORACLE_LIMIT: u64 = 200_000;
    if rightward {
        let t = mfpt_exact_right(model, v, n_from, n_to)?;
        let oracle = if n_to <= ORACLE_LIMIT { Some(mfpt_backward_right(model, v, n_to)?[n_from as usize]) } else { None };
        Ok(json!({ "time": t, "tridiagonal": oracle }))
    } else {
        let top = stationary_distribution(model, v, None)?.n_max.max(n_from);
        let t = mfpt_exact_left(model, v, n_from, n_to, top)?;
        let oracle = if top - n_to <= ORACLE_LIMIT {
            Some(mfpt_backward_left(model, v, n_to, top)?[(n_from - n_to - 1) as usize])
        } else {
            None
        };
        Ok(json!({ "time": t, "tridiagonal": oracle, "reflecting_top": top }))
    }
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    n: u64,
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    model: &BirthDeathModel,
    v: f64,
    n0: u64,
    t_max: f64,
    absorb: Option<u64>,
    replicas: u64,
    seed: u64,
    out: &mut OutputDir,
) -> Result<()> {
    let traj = ssa_trajectory(model, v, n0, Stop::TMax(t_max), seed)?;
    let mut rows = vec![TrajectoryRow { t: 0.0, n: n0 }];
    rows.extend(traj.times.iter().zip(&traj.states).map(|(&t, &n)| TrajectoryRow { t, n }));
    out.csv("trajectory.csv", &rows)?;
    if traj.absorbed {
        log::warn!("trajectory was absorbed at n = {}", traj.states.last().copied().unwrap_or(n0));
    }
    if let Some(target) = absorb {
        let est = mc_mfpt(model, v, n0, target, replicas, seed)?;
        out.json("estimate.json", &est)?;
    }
    Ok(())
}

fn tagged<T: Serialize>(kind: &str, value: &T) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    if let Value::Object(map) = &mut v {
        map.insert("type".into(), json!(kind));
    }
    Ok(v)
}

fn scan(model: &BirthDeathModel, param: &str, range: &Range, x_range: (f64, f64), out: &mut OutputDir) -> Result<()> {
    let bound = model.scan().map(|s| s.name.as_str());
    if bound != Some(param) {
        return Err(Error::Domain(format!(
            "model binds scan parameter {bound:?}, but --param {param} was requested"
        )));
    }
    let family = ModelFamily::from_scan(model)?;
    let grid = range.grid();
    let mut events: Vec<Value> = scan_bifurcations(&family, &grid, x_range)?
        .iter()
        .map(|e| tagged("bifurcation", e))
        .collect::<Result<_>>()?;
    match phase_transition_scan(&family, &grid, x_range) {
        Ok(diagram) => {
            out.csv("phase.csv", &diagram.rows())?;
            for t in &diagram.transitions {
                events.push(tagged("maxwell", t)?);
            }
        }
        Err(Error::AbsorbingFamily) => {
            log::warn!("phase scan skipped: {}", Error::AbsorbingFamily);
            events.push(json!({ "type": "phase-scan-refused", "reason": Error::AbsorbingFamily.to_string() }));
        }
        Err(e) => return Err(e),
    }
    out.jsonl("events.jsonl", &events)
}

/// Grid points snapped to the lattice `n/V` and deduplicated.
fn lattice_points(range: &Range, v: f64) -> Vec<f64> {
    let mut ns: Vec<u64> = range.grid().iter().map(|x| (x * v).round().max(1.0) as u64).collect();
    ns.dedup();
    ns.into_iter().map(|n| n as f64 / v).collect()
}

fn decompose(model: &BirthDeathModel, v: f64, range: &Range, out: &mut OutputDir) -> Result<()> {
    let curves = vanthoff_decompose(model, v, &lattice_points(range, v))?;
    out.csv("vanthoff.csv", &curves.rows())
}

fn diffusion_compare(model: &BirthDeathModel, v: f64, range: &Range, out: &mut OutputDir) -> Result<()> {
    let exp = build_expansion(model)?;
    let rows = diffusion::compare(&exp, v, &range.grid())?;
    out.csv("diffusion.csv", &rows)
}

/// Convenience for tests and examples: run a command line given as a string slice.
pub fn run_args(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("dgp").chain(args.iter().copied()))
}

/// The manifest written by a finished run in `dir`.
pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    Manifest::read(&dir.join("manifest.json"))
}
