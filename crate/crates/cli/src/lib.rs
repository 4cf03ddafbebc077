//! Command-line driver for `helm-core`.
//!
//! ```text
//! helm-sim check <config> [--out DIR] [--json]
//! helm-sim run   <config> [--out DIR] [--dt X] [--t-end X] [--force]
//! helm-sim sweep <config> [--spec FILE] [--out DIR] [--dt X] [--t-end X] [--force]
//! ```
//!
//! Exit codes: 0 clean, 1 usage or parse error, 2 refused by the
//! feasibility check, 3 runtime fault.

pub mod figures;
pub mod plot;
pub mod sweep;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use helm_core::scenario::ScenarioConfig;
use helm_core::sim::{assess, run_scenario, Assessment, RunOutput};

pub use sweep::{SweepSpec, THREADS_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "helm-sim",
    version,
    about = "Path-following simulator for underactuated surface vessels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the feasibility checks and size the tube; no simulation.
    Check {
        #[command(flatten)]
        common: Common,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Simulate one scenario and write the time series, monitor report and plots.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Run a grid of scenario variants in parallel.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep specification (`[[axis]]` tables). Without it the sweep has one cell.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (TOML).
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the integration step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Override the final time.
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Simulate even if the feasibility check refuses the scenario.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum Exit {
    Clean = 0,
    Usage = 1,
    Refused = 2,
    Fault = 3,
}

/// Error in the command line or in a CLI-level input file.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Exit::Usage as i32
            } else {
                Exit::Clean as i32
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code as i32,
        Err(e) => {
            eprintln!("error: {e:#}");
            classify(&e) as i32
        }
    }
}

pub fn dispatch(cli: &Cli) -> anyhow::Result<Exit> {
    match &cli.command {
        Command::Check { common, json } => cmd_check(common, *json),
        Command::Run { common } => cmd_run(common),
        Command::Sweep { common, spec } => cmd_sweep(common, spec.as_deref()),
    }
}

/// Maps an error to an exit code by the first recognised cause.
pub fn classify(e: &anyhow::Error) -> Exit {
    use helm_core::Error as E;
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return Exit::Usage;
        }
        if let Some(ce) = cause.downcast_ref::<E>() {
            return match ce {
                E::Parse { .. }
                | E::Config(_)
                | E::InvalidVessel(_)
                | E::InvalidPath(_)
                | E::Io { .. } => Exit::Usage,
                E::Infeasible { .. } => Exit::Refused,
                _ => Exit::Fault,
            };
        }
    }
    Exit::Fault
}

/// Loads the scenario and applies the command-line overrides.
pub fn load_config(c: &Common) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(&c.config)?;
    if let Some(dt) = c.dt {
        cfg.sim.dt = dt;
    }
    if let Some(t) = c.t_end {
        cfg.sim.t_end = t;
    }
    cfg.force |= c.force;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_check(c: &Common, json: bool) -> anyhow::Result<Exit> {
    let cfg = load_config(c)?;
    let a = assess(&cfg)?;
    let body = serde_json::to_string_pretty(&a)?;
    if json {
        println!("{body}");
    } else {
        print!("{}", render_assessment(&c.config, &a));
    }
    if let Some(dir) = &c.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write(&dir.join("check.json"), format!("{body}\n"))?;
    }
    Ok(if a.admitted {
        Exit::Clean
    } else {
        Exit::Refused
    })
}

/// Human-readable feasibility report.
pub fn render_assessment(config: &Path, a: &Assessment) -> String {
    let f = &a.feasibility;
    let opt = |v: Option<f64>, prec: usize| match v {
        Some(x) if x.is_finite() => format!("{x:.prec$}"),
        _ => "-".to_string(),
    };
    let mark = |p: bool| if p { "PASS" } else { "FAIL" };
    let mut s = String::new();
    let _ = writeln!(s, "feasibility check: {}", config.display());
    let _ = writeln!(
        s,
        "  surge reference      u_rd in [{}, {}] m/s",
        f.u_rd_min, f.u_rd_max
    );
    let _ = writeln!(s, "  current bound        V_max = {:.4} m/s", f.v_max);
    let _ = writeln!(s, "  X_max, Y_min         {:.6}, {:.6}", f.x_max, f.y_min);
    let _ = writeln!(
        s,
        "  curvature bound      Y_min/X_max = {:.4} 1/m (path kappa_max = {})",
        f.lemma2_bound, f.kappa_max
    );
    let _ = writeln!(
        s,
        "  look-ahead           delta = {} m (minimum {} m)",
        f.delta,
        opt(f.delta_min, 3)
    );
    let _ = writeln!(s, "  margin               sigma = {}", opt(f.sigma, 6));
    let _ = writeln!(
        s,
        "  tube radius          {} m",
        opt(f.tube_radius_sigma, 3)
    );
    let ass = &f.assumptions;
    for (name, v) in [
        ("current bound", &ass.current_bounded),
        ("sway damping", &ass.sway_damped),
        ("speed dominates", &ass.speed_dominates),
        ("curvature bound", &f.lemma2),
        ("look-ahead/tube", &f.lemma3),
    ] {
        let _ = writeln!(s, "  [{}] {name:<17} {}", mark(v.pass), v.detail);
    }
    if let (Some(th), Some(y)) = (a.theta0, a.y_bp0) {
        let _ = writeln!(
            s,
            "  initial position     theta0 = {th:.3} m, y_bp = {y:.3} m"
        );
    }
    if a.admitted {
        let _ = writeln!(s, "verdict: admitted");
    } else {
        let _ = writeln!(s, "verdict: refused");
        for r in &a.reasons {
            let _ = writeln!(s, "  - {r}");
        }
    }
    s
}

fn cmd_run(c: &Common) -> anyhow::Result<Exit> {
    let cfg = load_config(c)?;
    let out_dir = c.out.clone().unwrap_or_else(|| PathBuf::from("helm-out"));
    let out = match run_scenario(&cfg) {
        Ok(o) => o,
        Err(helm_core::Error::Infeasible { reasons }) => {
            eprintln!("refused by the feasibility check (use --force to run anyway):");
            for r in reasons {
                eprintln!("  - {r}");
            }
            return Ok(Exit::Refused);
        }
        Err(e) => return Err(e.into()),
    };
    write_run_outputs(&out_dir, &cfg, &out, true)?;
    let r = &out.report;
    println!(
        "{}: t_final = {} s, {} steps, clean = {}{}",
        c.config.display(),
        r.t_final,
        r.steps,
        r.clean,
        if r.end_of_path { " (end of path)" } else { "" }
    );
    if let Some(last) = out.series.last() {
        println!(
            "  final |y_bp| = {:.3e} m, |x_bp| = {:.3e} m, |psi_tilde| = {:.3e} rad",
            last.y_bp.abs(),
            last.x_bp.abs(),
            last.psi_tilde.abs()
        );
    }
    for f in &r.faults {
        println!("  fault at t = {}: {:?}: {}", f.t, f.kind, f.message);
    }
    println!("  outputs in {}", out_dir.display());
    Ok(if r.clean { Exit::Clean } else { Exit::Fault })
}

/// Writes `timeseries.csv`, `monitor.json` and `feasibility.json`, plus the
/// five plots when `plots` is set.
pub fn write_run_outputs(
    dir: &Path,
    cfg: &ScenarioConfig,
    out: &RunOutput,
    plots: bool,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut csv = Vec::new();
    out.series.write_csv(&mut csv)?;
    write(&dir.join("timeseries.csv"), csv)?;
    write(
        &dir.join("monitor.json"),
        format!("{}\n", serde_json::to_string_pretty(&out.report)?),
    )?;
    write(
        &dir.join("feasibility.json"),
        format!("{}\n", serde_json::to_string_pretty(&out.assessment)?),
    )?;
    if plots {
        figures::write_all(dir, cfg, out)?;
    }
    Ok(())
}

fn cmd_sweep(c: &Common, spec_path: Option<&Path>) -> anyhow::Result<Exit> {
    let cfg = load_config(c)?;
    let spec = match spec_path {
        Some(p) => SweepSpec::load(p)?,
        None => SweepSpec::default(),
    };
    let threads = sweep::threads_from_env()?;
    let out_dir = c.out.clone().unwrap_or_else(|| PathBuf::from("helm-sweep"));
    let cells = sweep::run_sweep(&cfg, &spec, &out_dir, threads)?;
    print!("{}", sweep::render_table(&spec, &cells));
    println!("summary in {}", out_dir.join("summary.csv").display());
    Ok(Exit::Clean)
}

pub(crate) fn write(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
