//! Command-line frontend.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analytic::gausson_field;
use crate::config::{conventions, parse_config, Meta, RunConfig};
use crate::error::{argument, Error, Result};
use crate::grid::Field;
use crate::harness::{
    converge_in_eps, converge_in_tau, default_reference_tau, initial_field, scenario_2d,
    table_eps_tau, NormKind, Reference, ScenarioCase, ScenarioOptions,
};
use crate::integrators::{evolve, Observers};
use crate::output;
use crate::par;
use crate::regularization::{RegKind, Regularization};

/// Environment variable that overrides `--workers`.
pub const WORKERS_ENV: &str = "LOGSPLIT_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "logsplit",
    version,
    about = "Splitting solvers for the regularized logarithmic Schrodinger equation"
)]
struct Cli {
    /// Worker threads for sweeps (default: available processors).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single evolution; writes series.csv, final_state.csv and meta.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time-step sweep; writes sweep.csv.
    ConvergeTau {
        #[command(flatten)]
        common: SweepArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        taus: Vec<f64>,
        /// `fine` (same-eps Strang solve) or `analytic`.
        #[arg(long, default_value = "fine")]
        reference: String,
        /// Step of the fine reference (default: min(taus)/100, at least 1e-5).
        #[arg(long)]
        tau_ref: Option<f64>,
        #[arg(long, default_value = "h1")]
        norm: String,
    },
    /// Regularization sweep against the analytic Gausson; writes sweep.csv.
    ConvergeEps {
        #[command(flatten)]
        common: SweepArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        #[arg(long, default_value = "l2")]
        norm: String,
    },
    /// eps x tau error table; writes table.csv.
    Table {
        #[command(flatten)]
        common: SweepArgs,
        #[arg(long, default_value_t = 0.025)]
        eps0: f64,
        #[arg(long, default_value_t = 0.1)]
        tau0: f64,
        #[arg(long, default_value_t = 9)]
        eps_steps: usize,
        #[arg(long, default_value_t = 10)]
        tau_steps: usize,
    },
    /// Samples of F, f, f' and f'' over [0, rho_max]; writes regfun.csv.
    Regfun {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long)]
        rho_max: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Two-Gausson interaction in 2D; writes density snapshots and report.json.
    Scenario2d {
        #[arg(long)]
        case: String,
        /// Full-size grid (h = 1/16) and eps = 1e-12 instead of the desk preset.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        final_time: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Base configuration; defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl SweepArgs {
    fn load(&self) -> Result<RunConfig> {
        match &self.config {
            Some(p) => parse_config(p),
            None => Ok(RunConfig::default()),
        }
    }
}

/// Effective worker count: `LOGSPLIT_WORKERS`, then `--workers`, then the
/// number of processors.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            Error::Argument(format!(
                "{WORKERS_ENV}: expected a positive integer, got '{v}'"
            ))
        })?;
        if n == 0 {
            return Err(argument(format!("{WORKERS_ENV}: must be at least 1")));
        }
        return Ok(n);
    }
    match flag {
        Some(0) => Err(argument("--workers: must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(par::default_workers()),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Config(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn warn_eps(reg: &Regularization) {
    if reg.kind() != RegKind::ExactLog && reg.epsilon() == 1.0 {
        eprintln!("warning: eps = 1 regularizes every density below 1");
    }
}

fn write_meta(dir: &Path, command: &str, cfg: Value, extra: Option<Value>) -> Result<()> {
    let meta = Meta {
        version: crate::VERSION,
        command,
        config: cfg,
        conventions: conventions(),
        extra,
    };
    output::write_json(&dir.join("meta.json"), &meta)
}

fn dispatch(cli: Cli) -> Result<()> {
    let workers = resolve_workers(cli.workers)?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = parse_config(&config)?;
            let dir = out
                .or_else(|| cfg.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            run(&cfg, &dir)
        }
        Command::ConvergeTau {
            common,
            taus,
            reference,
            tau_ref,
            norm,
        } => {
            let base = common.load()?;
            warn_eps(&base.reg);
            let norm = NormKind::parse(&norm)?;
            let reference = match reference.as_str() {
                "analytic" => Reference::Analytic,
                "fine" => Reference::Fine {
                    tau: tau_ref.unwrap_or_else(|| default_reference_tau(base.final_time, &taus)),
                },
                other => return Err(argument(format!("--reference: unknown value '{other}'"))),
            };
            let r = converge_in_tau(&base, &taus, reference, norm, workers)?;
            output::write_sweep(&common.out.join("sweep.csv"), &r)?;
            write_meta(
                &common.out,
                "converge-tau",
                base.emit(),
                Some(
                    json!({"reference": r.reference, "norm": r.fit_norm, "fitted_order": r.fitted_order,
                    "energy_order": r.energy_order, "mass_drift": r.mass_drifts}),
                ),
            )?;
            println!(
                "fitted order: {}",
                r.fitted_order
                    .map(output::fmt_num)
                    .unwrap_or_else(|| "n/a".into())
            );
            Ok(())
        }
        Command::ConvergeEps {
            common,
            epsilons,
            norm,
        } => {
            let base = common.load()?;
            let norm = NormKind::parse(&norm)?;
            let r = converge_in_eps(&base, &epsilons, norm, workers)?;
            output::write_sweep(&common.out.join("sweep.csv"), &r)?;
            write_meta(
                &common.out,
                "converge-eps",
                base.emit(),
                Some(
                    json!({"norm": r.fit_norm, "fitted_order": r.fitted_order, "energy_order": r.energy_order}),
                ),
            )?;
            println!(
                "fitted order: {}",
                r.fitted_order
                    .map(output::fmt_num)
                    .unwrap_or_else(|| "n/a".into())
            );
            Ok(())
        }
        Command::Table {
            common,
            eps0,
            tau0,
            eps_steps,
            tau_steps,
        } => {
            let base = common.load()?;
            let t = table_eps_tau(&base, eps0, tau0, eps_steps, tau_steps, workers)?;
            output::write_table(&common.out.join("table.csv"), &t)?;
            write_meta(
                &common.out,
                "table",
                base.emit(),
                Some(
                    json!({"diagonal": t.diagonal, "row_orders": t.row_orders, "mass_drift": t.mass_drift}),
                ),
            )?;
            Ok(())
        }
        Command::Regfun {
            kind,
            eps,
            n,
            rho_max,
            samples,
            out,
        } => {
            let kind = RegKind::parse(&kind, n)?;
            let reg = match (kind, eps) {
                (RegKind::ExactLog, _) => Regularization::exact(),
                (_, Some(e)) => Regularization::new(kind, e)?,
                (_, None) => return Err(argument("--eps: required for regularized kinds")),
            };
            if !(rho_max > 0.0) || !rho_max.is_finite() {
                return Err(argument("--rho-max: must be positive"));
            }
            if samples == 0 {
                return Err(argument("--samples: must be at least 1"));
            }
            warn_eps(&reg);
            let rows = output::regfun_rows(&reg, &output::regfun_grid(rho_max, samples));
            output::write_regfun(&out.join("regfun.csv"), &rows)?;
            Ok(())
        }
        Command::Scenario2d {
            case,
            full,
            final_time,
            out,
        } => {
            let case = ScenarioCase::parse(&case)?;
            let mut opts = if full {
                ScenarioOptions::full(case, final_time.unwrap_or(10.0))
            } else {
                ScenarioOptions::desk()
            };
            if let Some(t) = final_time {
                opts.final_time = t;
            }
            let report = scenario_2d(case, &opts, Some(&out))?;
            output::write_json(
                &out.join("report.json"),
                &json!({"options": opts, "report": report}),
            )?;
            println!(
                "case {}: mass drift {}, momentum drift {}, mirror asymmetry {}",
                case.name(),
                output::fmt_num(report.mass_drift),
                output::fmt_num(report.momentum_drift),
                output::fmt_num(report.mirror_asymmetry)
            );
            Ok(())
        }
    }
}

/// Single evolution as configured; writes `series.csv`, `final_state.csv`
/// and `meta.json` into `dir`.
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<()> {
    warn_eps(&cfg.reg);
    let u0 = initial_field(cfg)?;
    let evolve_cfg = cfg.evolve_config();
    let oracle_spec = cfg
        .oracle_spec()
        .filter(|_| cfg.observables.errors)
        .cloned();
    let oracle = |t: f64| -> Result<Field> {
        let spec = oracle_spec
            .as_ref()
            .expect("oracle only used when configured");
        gausson_field(spec, &cfg.domain, t)
    };
    let mut observers = Observers::every(cfg.stride());
    observers.energy = cfg.observables.energy;
    if oracle_spec.is_some() {
        observers = observers.with_oracle(&oracle);
    }
    let (u, series) = evolve(&u0, &evolve_cfg, observers)?;
    output::write_series(&dir.join("series.csv"), &series)?;
    output::write_state(&dir.join("final_state.csv"), &u)?;
    write_meta(
        dir,
        "run",
        cfg.emit(),
        Some(json!({"steps": cfg.steps(), "mass_drift": series.mass_drift()})),
    )
}
