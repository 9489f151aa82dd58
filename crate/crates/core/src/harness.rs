//! Convergence sweeps, the eps x tau error table and 2D interaction runs.
//!
//! Sweep cells are independent evolutions and run on up to `workers`
//! threads; results are assembled in input order, so output does not depend
//! on scheduling.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytic::{gausson_field, superpose, GaussonSpec};
use crate::config::{integral_steps, RunConfig};
use crate::error::{argument, Error, Result};
use crate::grid::{DomainSpec, Field};
use crate::integrators::{evolve, final_errors, EvolveConfig, Observers, SplitScheme};
use crate::observables::{energy_error, momentum, ErrorNorms, Meter};
use crate::par;
use crate::regularization::Regularization;

/// Relative change below which a halving step counts as a plateau.
pub const PLATEAU_CHANGE: f64 = 0.05;

/// Smallest reference step used when the caller does not choose one.
pub const MIN_REFERENCE_TAU: f64 = 1e-5;

/// Least-squares slope of `ln(error)` against `ln(param)`.
pub fn observed_order(errors: &[f64], params: &[f64]) -> Result<f64> {
    check_fit_input(errors, params)?;
    let xs: Vec<f64> = params.iter().map(|p| p.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(argument("parameters must not all be equal"));
    }
    Ok(sxy / sxx)
}

/// Rates `ln(e_i / e_{i+1}) / ln(p_i / p_{i+1})` between neighbours.
pub fn pairwise_rates(errors: &[f64], params: &[f64]) -> Result<Vec<f64>> {
    check_fit_input(errors, params)?;
    Ok(errors
        .windows(2)
        .zip(params.windows(2))
        .map(|(e, p)| (e[0] / e[1]).ln() / (p[0] / p[1]).ln())
        .collect())
}

fn check_fit_input(errors: &[f64], params: &[f64]) -> Result<()> {
    if errors.len() != params.len() || errors.len() < 2 {
        return Err(argument(
            "errors and params need the same length, at least 2",
        ));
    }
    if let Some(bad) = errors
        .iter()
        .chain(params)
        .find(|v| !(**v > 0.0) || !v.is_finite())
    {
        return Err(argument(format!(
            "fit inputs must be positive and finite, got {bad}"
        )));
    }
    Ok(())
}

/// Indices kept for a slope fit over a refinement ladder: entries whose
/// error is positive and changed by at least [`PLATEAU_CHANGE`] relative to
/// the previous entry (the first entry is always kept).
pub fn non_plateau_indices(errors: &[f64]) -> Vec<usize> {
    let mut keep = Vec::new();
    for (i, &e) in errors.iter().enumerate() {
        if !(e > 0.0) || !e.is_finite() {
            continue;
        }
        if i > 0 {
            let prev = errors[i - 1];
            if prev > 0.0 && ((prev - e) / prev).abs() < PLATEAU_CHANGE {
                continue;
            }
        }
        keep.push(i);
    }
    keep
}

/// Fitted order over the non-plateau points, or `None` with fewer than 3.
pub fn fit_order(errors: &[f64], params: &[f64]) -> Option<f64> {
    let keep = non_plateau_indices(errors);
    if keep.len() < 3 {
        return None;
    }
    let e: Vec<f64> = keep.iter().map(|&i| errors[i]).collect();
    let p: Vec<f64> = keep.iter().map(|&i| params[i]).collect();
    observed_order(&e, &p).ok()
}

/// Error norm used for order fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L2,
    H1,
    Linf,
    DensityL1,
}

impl NormKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "l2" => Ok(NormKind::L2),
            "h1" => Ok(NormKind::H1),
            "linf" => Ok(NormKind::Linf),
            "density_l1" => Ok(NormKind::DensityL1),
            other => Err(argument(format!(
                "unknown norm '{other}' (expected l2, h1, linf or density_l1)"
            ))),
        }
    }

    pub fn pick(&self, e: &ErrorNorms) -> f64 {
        match self {
            NormKind::L2 => e.l2,
            NormKind::H1 => e.h1,
            NormKind::Linf => e.linf,
            NormKind::DensityL1 => e.density_l1,
        }
    }
}

/// What the numerical solutions are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Reference {
    /// The exact Gausson of the unregularized equation.
    Analytic,
    /// A Strang (BAB) solve of the same regularized equation with step `tau`.
    Fine { tau: f64 },
}

/// Result of a one-parameter sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub param_name: String,
    pub params: Vec<f64>,
    pub errors: Vec<ErrorNorms>,
    /// Energy error per cell: `|E(u0) - E_reg(u0)|` for eps sweeps, the
    /// largest drift of the regularized energy along the run for tau sweeps.
    pub energy_errors: Vec<f64>,
    /// Relative mass drift per cell.
    pub mass_drifts: Vec<f64>,
    pub fit_norm: NormKind,
    pub fitted_order: Option<f64>,
    pub energy_order: Option<f64>,
    pub reference: Reference,
    pub metadata: SweepMeta,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepMeta {
    pub scheme: &'static str,
    pub reg_kind: &'static str,
    pub order_n: Option<u32>,
    pub epsilon: Option<f64>,
    pub tau: Option<f64>,
    pub lambda: f64,
    pub points: Vec<usize>,
    pub final_time: f64,
}

impl SweepResult {
    pub fn fit_errors(&self) -> Vec<f64> {
        self.errors.iter().map(|e| self.fit_norm.pick(e)).collect()
    }

    pub fn pairwise(&self) -> Vec<f64> {
        pairwise_rates(&self.fit_errors(), &self.params).unwrap_or_default()
    }
}

fn meta(base: &RunConfig, eps: Option<f64>, tau: Option<f64>) -> SweepMeta {
    let order_n = match base.reg.kind() {
        crate::regularization::RegKind::LocalEnergy(n) => Some(n),
        _ => None,
    };
    SweepMeta {
        scheme: base.scheme.name(),
        reg_kind: base.reg.kind().name(),
        order_n,
        epsilon: eps,
        tau,
        lambda: base.lambda,
        points: base.domain.points().to_vec(),
        final_time: base.final_time,
    }
}

/// Initial field of a run.
pub fn initial_field(cfg: &RunConfig) -> Result<Field> {
    superpose(&cfg.gaussons, &cfg.domain, 0.0)
}

fn single_gausson(cfg: &RunConfig) -> Result<&GaussonSpec> {
    cfg.oracle_spec()
        .ok_or_else(|| argument("an analytic reference needs a single-Gausson initial state"))
}

/// Default reference step: `min(taus) / 100`, but not below
/// [`MIN_REFERENCE_TAU`], adjusted so that it divides `T`.
pub fn default_reference_tau(final_time: f64, taus: &[f64]) -> f64 {
    let smallest = taus.iter().copied().fold(f64::INFINITY, f64::min);
    let target = (smallest / 100.0).max(MIN_REFERENCE_TAU);
    if final_time == 0.0 {
        return target;
    }
    let steps = (final_time / target).ceil().max(1.0);
    final_time / steps
}

fn cell_config(
    base: &RunConfig,
    tau: f64,
    reg: Regularization,
    scheme: SplitScheme,
) -> Result<EvolveConfig> {
    let steps = integral_steps(base.final_time, tau).ok_or_else(|| {
        Error::Argument(format!(
            "tau = {tau} does not divide T = {}",
            base.final_time
        ))
    })?;
    Ok(EvolveConfig {
        tau,
        steps,
        lambda: base.lambda,
        reg,
        scheme,
    })
}

/// Errors at `T` for each step size in `taus`, with orders fitted in `norm`.
pub fn converge_in_tau(
    base: &RunConfig,
    taus: &[f64],
    reference: Reference,
    norm: NormKind,
    workers: usize,
) -> Result<SweepResult> {
    if taus.is_empty() {
        return Err(argument("need at least one time step"));
    }
    for &tau in taus {
        if !(tau > 0.0) || integral_steps(base.final_time, tau).is_none() {
            return Err(argument(format!(
                "tau = {tau} does not divide T = {}",
                base.final_time
            )));
        }
    }
    let u0 = initial_field(base)?;
    let exact: Field = match reference {
        Reference::Analytic => gausson_field(single_gausson(base)?, &base.domain, base.final_time)?,
        Reference::Fine { tau } => {
            let cfg = cell_config(base, tau, base.reg, SplitScheme::StrangBAB)?;
            evolve(&u0, &cfg, Observers::none())?.0
        }
    };
    // Record energies on the coarsest step's time grid when every step size divides it.
    let coarsest = taus.iter().copied().fold(0.0, f64::max);
    let cells = par::map_jobs(taus, workers, |&tau| -> Result<(ErrorNorms, f64, f64)> {
        let cfg = cell_config(base, tau, base.reg, base.scheme)?;
        let every = integral_steps(coarsest, tau)
            .filter(|&k| k > 0)
            .unwrap_or(1);
        let mut obs = Observers::every(every);
        obs.include_initial = true;
        let (u, series) = evolve(&u0, &cfg, obs)?;
        let errors = Meter::new(&base.domain).error_norms(&exact, &u)?;
        Ok((errors, series.energy_fluctuation(), series.mass_drift()))
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    let errors: Vec<ErrorNorms> = cells.iter().map(|c| c.0).collect();
    let energy_errors: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let mass_drifts: Vec<f64> = cells.iter().map(|c| c.2).collect();
    let fit: Vec<f64> = errors.iter().map(|e| norm.pick(e)).collect();
    Ok(SweepResult {
        param_name: "tau".into(),
        params: taus.to_vec(),
        fitted_order: fit_order(&fit, taus),
        energy_order: fit_order(&energy_errors, taus),
        errors,
        energy_errors,
        mass_drifts,
        fit_norm: norm,
        reference,
        metadata: meta(base, Some(base.reg.epsilon()), None),
    })
}

/// Errors at `T` against the analytic Gausson for each regularization
/// parameter, using the base configuration's step size and scheme.
pub fn converge_in_eps(
    base: &RunConfig,
    epsilons: &[f64],
    norm: NormKind,
    workers: usize,
) -> Result<SweepResult> {
    if epsilons.is_empty() {
        return Err(argument("need at least one epsilon"));
    }
    let spec = single_gausson(base)?;
    let u0 = initial_field(base)?;
    let exact = gausson_field(spec, &base.domain, base.final_time)?;
    let regs = epsilons
        .iter()
        .map(|&eps| base.reg.with_epsilon(eps))
        .collect::<Result<Vec<_>>>()?;
    let cells = par::map_jobs(&regs, workers, |reg| -> Result<(ErrorNorms, f64, f64)> {
        let cfg = cell_config(base, base.tau, *reg, base.scheme)?;
        let mut obs = Observers::every(cfg.steps.max(1));
        obs.energy = false;
        let (u, series) = evolve(&u0, &cfg, obs)?;
        let errors = Meter::new(&base.domain).error_norms(&exact, &u)?;
        Ok((
            errors,
            energy_error(&u0, base.lambda, reg),
            series.mass_drift(),
        ))
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    let errors: Vec<ErrorNorms> = cells.iter().map(|c| c.0).collect();
    let energy_errors: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let mass_drifts: Vec<f64> = cells.iter().map(|c| c.2).collect();
    let fit: Vec<f64> = errors.iter().map(|e| norm.pick(e)).collect();
    let fitted_order = if epsilons.len() >= 3 {
        observed_order(&fit, epsilons).ok()
    } else {
        None
    };
    let energy_order = if epsilons.len() >= 3 {
        observed_order(&energy_errors, epsilons).ok()
    } else {
        None
    };
    Ok(SweepResult {
        param_name: "eps".into(),
        params: epsilons.to_vec(),
        errors,
        energy_errors,
        mass_drifts,
        fit_norm: norm,
        fitted_order,
        energy_order,
        reference: Reference::Analytic,
        metadata: meta(base, None, Some(base.tau)),
    })
}

/// Matrix of L2 errors against the analytic Gausson over the ladders
/// `eps_i = eps0 / 4^i` and `tau_j = tau0 / 2^j`.
#[derive(Debug, Clone, Serialize)]
pub struct TableResult {
    pub epsilons: Vec<f64>,
    pub taus: Vec<f64>,
    /// `errors[i][j]` for `epsilons[i]`, `taus[j]`.
    pub errors: Vec<Vec<f64>>,
    /// `rates[i][j]` between columns `j - 1` and `j`; `None` in column 0.
    pub rates: Vec<Vec<Option<f64>>>,
    /// Order fitted along each row over its non-plateau cells.
    pub row_orders: Vec<Option<f64>>,
    /// Cells `(i, i + 1)` where `tau^2` tracks `eps` along the ladders.
    pub diagonal: Vec<(usize, usize)>,
    pub mass_drift: f64,
    pub norm: NormKind,
    pub reference: Reference,
    pub metadata: SweepMeta,
}

impl TableResult {
    /// Rates at the diagonal cells.
    pub fn diagonal_rates(&self) -> Vec<f64> {
        self.diagonal
            .iter()
            .filter_map(|&(i, j)| self.rates[i][j])
            .collect()
    }

    /// Last value of each row, the tau -> 0 limit when the row has plateaued.
    pub fn row_limits(&self) -> Vec<f64> {
        self.errors
            .iter()
            .map(|r| *r.last().expect("non-empty row"))
            .collect()
    }
}

pub fn table_eps_tau(
    base: &RunConfig,
    eps0: f64,
    tau0: f64,
    eps_steps: usize,
    tau_steps: usize,
    workers: usize,
) -> Result<TableResult> {
    if eps_steps == 0 || tau_steps == 0 {
        return Err(argument("the table needs at least one row and one column"));
    }
    let spec = single_gausson(base)?;
    let epsilons: Vec<f64> = (0..eps_steps).map(|i| eps0 / 4f64.powi(i as i32)).collect();
    let taus: Vec<f64> = (0..tau_steps).map(|j| tau0 / 2f64.powi(j as i32)).collect();
    let regs = epsilons
        .iter()
        .map(|&e| base.reg.with_epsilon(e))
        .collect::<Result<Vec<_>>>()?;
    let u0 = initial_field(base)?;
    let exact = gausson_field(spec, &base.domain, base.final_time)?;
    let oracle = |t: f64| -> Result<Field> {
        debug_assert!(t == base.final_time || t >= 0.0);
        Ok(exact.clone())
    };
    let jobs: Vec<(usize, usize)> = (0..eps_steps)
        .flat_map(|i| (0..tau_steps).map(move |j| (i, j)))
        .collect();
    let cells = par::map_jobs(&jobs, workers, |&(i, j)| -> Result<(f64, f64)> {
        let cfg = cell_config(base, taus[j], regs[i], base.scheme)?;
        let (u, _) = evolve(&u0, &cfg, Observers::none())?;
        let drift = (crate::observables::mass(&u) - crate::observables::mass(&u0)).abs()
            / crate::observables::mass(&u0);
        Ok((final_errors(&u, &oracle, base.final_time)?.l2, drift))
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    let mut errors = vec![vec![0.0; tau_steps]; eps_steps];
    let mut mass_drift: f64 = 0.0;
    for (&(i, j), &(e, drift)) in jobs.iter().zip(&cells) {
        errors[i][j] = e;
        mass_drift = mass_drift.max(drift);
    }
    let rates: Vec<Vec<Option<f64>>> = errors
        .iter()
        .map(|row| {
            (0..tau_steps)
                .map(|j| {
                    (j > 0 && row[j] > 0.0 && row[j - 1] > 0.0)
                        .then(|| (row[j - 1] / row[j]).ln() / 2f64.ln())
                })
                .collect()
        })
        .collect();
    let row_orders = errors.iter().map(|row| fit_order(row, &taus)).collect();
    let diagonal = (0..eps_steps)
        .filter(|&i| i + 1 < tau_steps)
        .map(|i| (i, i + 1))
        .collect();
    Ok(TableResult {
        epsilons,
        taus,
        errors,
        rates,
        row_orders,
        diagonal,
        mass_drift,
        norm: NormKind::L2,
        reference: Reference::Analytic,
        metadata: meta(base, Some(eps0), Some(tau0)),
    })
}

/// Two-Gausson interaction presets in 2D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScenarioCase {
    /// Two resting Gaussons at `(-2, 0)` and `(2, 0)`.
    I,
    /// A slow Gausson next to a lighter resting one.
    II,
    /// A resting Gausson and one moving perpendicular to their separation.
    III,
}

impl ScenarioCase {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "i" | "1" => Ok(ScenarioCase::I),
            "ii" | "2" => Ok(ScenarioCase::II),
            "iii" | "3" => Ok(ScenarioCase::III),
            other => Err(argument(format!(
                "unknown case '{other}' (expected i, ii or iii)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioCase::I => "i",
            ScenarioCase::II => "ii",
            ScenarioCase::III => "iii",
        }
    }

    pub fn gaussons(&self, lambda: f64) -> Result<Vec<GaussonSpec>> {
        let b = std::f64::consts::PI.powf(-0.25);
        let g = |amp: f64, v: [f64; 2], c: [f64; 2]| {
            GaussonSpec::new(lambda, amp, v.to_vec(), c.to_vec())
        };
        match self {
            ScenarioCase::I => Ok(vec![
                g(b, [0.0, 0.0], [-2.0, 0.0])?,
                g(b, [0.0, 0.0], [2.0, 0.0])?,
            ]),
            ScenarioCase::II => Ok(vec![
                g(b, [-0.15, 0.0], [0.0, 0.0])?,
                g(b / 1.5, [0.0, 0.0], [5.0, 0.0])?,
            ]),
            ScenarioCase::III => Ok(vec![
                g(b, [0.0, 0.0], [-2.0, 0.0])?,
                g(b, [0.0, 0.85], [2.0, 0.0])?,
            ]),
        }
    }

    /// Half-width of the square box in the full-size configuration.
    pub fn full_half_width(&self) -> f64 {
        match self {
            ScenarioCase::III => 48.0,
            _ => 16.0,
        }
    }
}

/// Run parameters of a 2D scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioOptions {
    pub half_width: f64,
    pub points: usize,
    pub tau: f64,
    pub final_time: f64,
    pub epsilon: f64,
    pub order: u32,
    pub lambda: f64,
    /// Number of evenly spaced density snapshots after `t = 0`.
    pub snapshots: usize,
    /// Check invariants every this many steps.
    pub check_every: usize,
}

impl ScenarioOptions {
    /// Reduced grid and horizon for quick runs: `256^2` on `[-16, 16]^2`, `T = 1`.
    pub fn desk() -> Self {
        Self {
            half_width: 16.0,
            points: 256,
            tau: 1e-3,
            final_time: 1.0,
            epsilon: 1e-6,
            order: 4,
            lambda: -1.0,
            snapshots: 4,
            check_every: 10,
        }
    }

    /// Mesh `h = 1/16`, `eps = 1e-12`, `tau = 1e-3`, box size per case.
    pub fn full(case: ScenarioCase, final_time: f64) -> Self {
        let half_width = case.full_half_width();
        Self {
            half_width,
            points: (2.0 * half_width * 16.0) as usize,
            tau: 1e-3,
            final_time,
            epsilon: 1e-12,
            order: 4,
            lambda: -1.0,
            snapshots: 10,
            check_every: 100,
        }
    }
}

/// Summary of a scenario run.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub case: ScenarioCase,
    pub steps: usize,
    pub mass_drift: f64,
    /// Largest `| |u(x,y)|^2 - |u(-x,y)|^2 |` over the checked steps.
    pub mirror_asymmetry: f64,
    /// Largest change of the momentum `Im ∫ conj(u) ∇u` over the checked steps.
    pub momentum_drift: f64,
    pub snapshot_times: Vec<f64>,
    pub files: Vec<PathBuf>,
}

/// Largest density mismatch under `(x, y) -> (-x, y)` on a box symmetric about 0.
pub fn mirror_asymmetry(f: &Field) -> f64 {
    let d = f.domain();
    let (nx, ny) = (d.points()[0], d.points()[1]);
    let v = f.values();
    let mut worst: f64 = 0.0;
    for i in 0..nx {
        let mirror = (nx - i) % nx;
        for j in 0..ny {
            let a = v[i * ny + j].norm_sqr();
            let b = v[mirror * ny + j].norm_sqr();
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// Runs a 2D interaction case and writes density snapshots to `out_dir`
/// (when given).
pub fn scenario_2d(
    case: ScenarioCase,
    opts: &ScenarioOptions,
    out_dir: Option<&Path>,
) -> Result<ScenarioReport> {
    let domain = DomainSpec::cube(2, -opts.half_width, opts.half_width, opts.points)?;
    let reg = Regularization::local_energy(opts.order, opts.epsilon)?;
    let steps =
        integral_steps(opts.final_time, opts.tau).ok_or_else(|| argument("T/tau not integral"))?;
    let u0 = superpose(&case.gaussons(opts.lambda)?, &domain, 0.0)?;
    let m0 = crate::observables::mass(&u0);
    let p0 = momentum(&u0);
    let snapshot_steps: Vec<usize> = (0..=opts.snapshots)
        .map(|s| (s * steps).checked_div(opts.snapshots).unwrap_or(steps))
        .collect();

    let mut report = ScenarioReport {
        case,
        steps,
        mass_drift: 0.0,
        mirror_asymmetry: 0.0,
        momentum_drift: 0.0,
        snapshot_times: Vec::new(),
        files: Vec::new(),
    };
    let check = |u: &Field, report: &mut ScenarioReport| {
        let m = crate::observables::mass(u);
        report.mass_drift = report.mass_drift.max((m - m0).abs() / m0);
        let p = momentum(u);
        let dp = p
            .iter()
            .zip(&p0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.momentum_drift = report.momentum_drift.max(dp);
        if case == ScenarioCase::I {
            report.mirror_asymmetry = report.mirror_asymmetry.max(mirror_asymmetry(u));
        }
    };

    let cfg = EvolveConfig {
        tau: opts.tau,
        steps: 1,
        lambda: opts.lambda,
        reg,
        scheme: SplitScheme::StrangBAB,
    };
    let mut prop = crate::integrators::Propagator::new(&domain, cfg)?;
    let mut u = u0;
    let snapshot = |u: &Field, k: usize, report: &mut ScenarioReport| -> Result<()> {
        let t = k as f64 * opts.tau;
        report.snapshot_times.push(t);
        if let Some(dir) = out_dir {
            let path = dir.join(format!("snapshot_{:06}.csv", k));
            crate::output::write_state(&path, u)?;
            report.files.push(path);
        }
        Ok(())
    };
    check(&u, &mut report);
    if snapshot_steps.contains(&0) {
        snapshot(&u, 0, &mut report)?;
    }
    for k in 1..=steps {
        prop.step(u.values_mut()).map_err(|e| match e {
            Error::Domain(detail) => Error::Blowup { step: k, detail },
            other => other,
        })?;
        if !u.is_finite() {
            return Err(Error::Blowup {
                step: k,
                detail: "non-finite value in the 2D state".into(),
            });
        }
        if k % opts.check_every.max(1) == 0 || k == steps {
            check(&u, &mut report);
        }
        if snapshot_steps.contains(&k) {
            snapshot(&u, k, &mut report)?;
        }
    }
    Ok(report)
}
