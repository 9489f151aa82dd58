//! Time splitting for `i u_t = -Δu + λ u f_reg(|u|^2)`.
//!
//! The equation is split into the free flow `A: i v_t = -Δv`, solved exactly
//! in Fourier space (`v̂_k(t) = e^{-i t |k|^2} v̂_k(0)`), and the pointwise
//! flow `B: i w_t = λ w f_reg(|w|^2)`, which keeps `|w|` fixed and therefore
//! reduces to the phase rotation `w(t) = w(0) e^{-i t λ f_reg(|w(0)|^2)}`.

use num_complex::Complex64;

use crate::error::{argument, Error, Result};
use crate::grid::{DomainSpec, Field, Fourier};
use crate::observables::{ErrorNorms, Meter, ObservableSeries};
use crate::par;
use crate::regularization::{RegKind, Regularization};

/// Composition used to advance one step of size `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitScheme {
    /// `A(tau) ∘ B(tau)`: nonlinear phase first.
    LieAB,
    /// `B(tau) ∘ A(tau)`: free flow first.
    LieBA,
    /// `B(tau/2) ∘ A(tau) ∘ B(tau/2)`.
    StrangBAB,
    /// `A(tau/2) ∘ B(tau) ∘ A(tau/2)`.
    StrangABA,
}

impl SplitScheme {
    pub const ALL: [SplitScheme; 4] = [
        SplitScheme::LieAB,
        SplitScheme::LieBA,
        SplitScheme::StrangBAB,
        SplitScheme::StrangABA,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SplitScheme::LieAB => "lie_ab",
            SplitScheme::LieBA => "lie_ba",
            SplitScheme::StrangBAB => "strang_bab",
            SplitScheme::StrangABA => "strang_aba",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| {
                argument(format!(
                    "unknown scheme '{name}' (expected lie_ab, lie_ba, strang_bab or strang_aba)"
                ))
            })
    }

    /// Scheme whose step with `-tau` inverts a step of this scheme with `tau`.
    pub fn mirrored(&self) -> Self {
        match self {
            SplitScheme::LieAB => SplitScheme::LieBA,
            SplitScheme::LieBA => SplitScheme::LieAB,
            other => *other,
        }
    }

    /// Classical order of accuracy.
    pub fn order(&self) -> u32 {
        match self {
            SplitScheme::LieAB | SplitScheme::LieBA => 1,
            SplitScheme::StrangBAB | SplitScheme::StrangABA => 2,
        }
    }
}

/// Parameters of a time integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub tau: f64,
    pub steps: usize,
    pub lambda: f64,
    pub reg: Regularization,
    pub scheme: SplitScheme,
}

impl EvolveConfig {
    pub fn final_time(&self) -> f64 {
        self.tau * self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() {
            return Err(argument(format!("tau must be finite, got {}", self.tau)));
        }
        if !self.lambda.is_finite() {
            return Err(argument(format!(
                "lambda must be finite, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Stateful stepper holding FFT plans, `|k|^2` and cached free-flow
/// multipliers for one domain.
pub struct Propagator {
    fourier: Fourier,
    k2: Vec<f64>,
    multipliers: Vec<(u64, Vec<Complex64>)>,
    cfg: EvolveConfig,
}

impl Propagator {
    pub fn new(domain: &DomainSpec, cfg: EvolveConfig) -> Result<Self> {
        cfg.validate()?;
        let fourier = Fourier::new(domain);
        let k2 = fourier.squared_wavenumbers();
        Ok(Self {
            fourier,
            k2,
            multipliers: Vec::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &EvolveConfig {
        &self.cfg
    }

    fn multiplier(&mut self, t: f64) -> usize {
        let key = t.to_bits();
        if let Some(pos) = self.multipliers.iter().position(|(k, _)| *k == key) {
            return pos;
        }
        let m = self
            .k2
            .iter()
            .map(|k2| Complex64::from_polar(1.0, -t * k2))
            .collect();
        self.multipliers.push((key, m));
        self.multipliers.len() - 1
    }

    /// Free Schrödinger flow over time `t`, in place.
    pub fn flow_a(&mut self, values: &mut [Complex64], t: f64) {
        if t == 0.0 {
            return;
        }
        let idx = self.multiplier(t);
        self.fourier.forward(values);
        let m = &self.multipliers[idx].1;
        par::for_each_indexed(values, |i, v| *v *= m[i]);
        self.fourier.inverse(values);
    }

    /// Nonlinear phase flow over time `t`, in place.
    pub fn flow_b(&self, values: &mut [Complex64], t: f64) -> Result<()> {
        apply_phase(values, t, self.cfg.lambda, &self.cfg.reg)
    }

    /// One step of the configured scheme.
    pub fn step(&mut self, values: &mut [Complex64]) -> Result<()> {
        let tau = self.cfg.tau;
        match self.cfg.scheme {
            SplitScheme::LieAB => {
                self.flow_b(values, tau)?;
                self.flow_a(values, tau);
            }
            SplitScheme::LieBA => {
                self.flow_a(values, tau);
                self.flow_b(values, tau)?;
            }
            SplitScheme::StrangBAB => {
                self.flow_b(values, 0.5 * tau)?;
                self.flow_a(values, tau);
                self.flow_b(values, 0.5 * tau)?;
            }
            SplitScheme::StrangABA => {
                self.flow_a(values, 0.5 * tau);
                self.flow_b(values, tau)?;
                self.flow_a(values, 0.5 * tau);
            }
        }
        Ok(())
    }
}

fn apply_phase(values: &mut [Complex64], t: f64, lambda: f64, reg: &Regularization) -> Result<()> {
    if t == 0.0 {
        return Ok(());
    }
    if reg.kind() == RegKind::ExactLog {
        if let Some(i) = values.iter().position(|v| v.norm_sqr() == 0.0) {
            return Err(Error::Domain(format!(
                "exact logarithm evaluated at a zero sample (grid index {i})"
            )));
        }
    }
    let scale = -t * lambda;
    par::for_each_indexed(values, |_, v| {
        let theta = scale * reg.f_unchecked(v.norm_sqr());
        let (s, c) = theta.sin_cos();
        *v *= Complex64::new(c, s);
    });
    Ok(())
}

/// `e^{i t Δ} f` computed spectrally.
pub fn flow_a(f: &Field, t: f64) -> Field {
    let cfg = EvolveConfig {
        tau: t,
        steps: 0,
        lambda: 0.0,
        reg: Regularization::exact(),
        scheme: SplitScheme::LieBA,
    };
    let mut prop = Propagator::new(f.domain(), cfg).expect("finite time");
    let mut out = f.clone();
    prop.flow_a(out.values_mut(), t);
    out
}

/// Pointwise `u e^{-i t λ f_reg(|u|^2)}`.
pub fn flow_b(f: &Field, t: f64, lambda: f64, reg: &Regularization) -> Result<Field> {
    let mut out = f.clone();
    apply_phase(out.values_mut(), t, lambda, reg)?;
    Ok(out)
}

/// One step of `cfg.scheme` with step size `cfg.tau`.
pub fn step(f: &Field, cfg: &EvolveConfig) -> Result<Field> {
    let mut prop = Propagator::new(f.domain(), *cfg)?;
    let mut out = f.clone();
    prop.step(out.values_mut())?;
    Ok(out)
}

/// Reference solution evaluated at a given time.
pub type Oracle<'a> = &'a (dyn Fn(f64) -> Result<Field> + Sync);

/// What to record while evolving.
#[derive(Clone, Copy, Default)]
pub struct Observers<'a> {
    /// Record every `every` steps (and always after the last step); 0 disables recording.
    pub every: usize,
    /// Also record the initial state at `t = 0`.
    pub include_initial: bool,
    /// Evaluate regularized and exact energies.
    pub energy: bool,
    /// Reference solution for the error columns.
    pub oracle: Option<Oracle<'a>>,
}

impl<'a> Observers<'a> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn every(every: usize) -> Self {
        Self {
            every,
            include_initial: true,
            energy: true,
            oracle: None,
        }
    }

    pub fn with_oracle(mut self, oracle: Oracle<'a>) -> Self {
        self.oracle = Some(oracle);
        self
    }
}

struct Recorder<'a> {
    observers: Observers<'a>,
    meter: Meter,
    series: ObservableSeries,
}

impl<'a> Recorder<'a> {
    fn record(&mut self, f: &Field, t: f64, cfg: &EvolveConfig) -> Result<()> {
        let s = &mut self.series;
        s.times.push(t);
        s.mass.push(crate::observables::mass(f));
        if self.observers.energy {
            s.energy_reg
                .push(self.meter.energy(f, cfg.lambda, &cfg.reg));
            s.energy_exact
                .push(self.meter.energy(f, cfg.lambda, &Regularization::exact()));
        }
        if let Some(oracle) = self.observers.oracle {
            let exact = oracle(t)?;
            let e = self.meter.error_norms(&exact, f)?;
            s.errors.get_or_insert_with(Vec::new).push(e);
        }
        Ok(())
    }
}

/// Advances `f0` by `cfg.steps` steps, recording observables at
/// `t_k = k tau`. Fails with [`Error::Blowup`] as soon as a non-finite
/// value appears.
pub fn evolve(
    f0: &Field,
    cfg: &EvolveConfig,
    observers: Observers<'_>,
) -> Result<(Field, ObservableSeries)> {
    let mut prop = Propagator::new(f0.domain(), *cfg)?;
    let mut state = f0.clone();
    let mut recorder = Recorder {
        observers,
        meter: Meter::new(f0.domain()),
        series: ObservableSeries::default(),
    };
    if observers.oracle.is_some() {
        recorder.series.errors = Some(Vec::new());
    }
    if observers.include_initial {
        recorder.record(&state, 0.0, cfg)?;
    }
    for k in 1..=cfg.steps {
        prop.step(state.values_mut()).map_err(|e| match e {
            Error::Domain(detail) => Error::Blowup { step: k, detail },
            other => other,
        })?;
        if let Some(i) = state
            .values()
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Blowup {
                step: k,
                detail: format!("non-finite value at grid index {i}"),
            });
        }
        let due = observers.every > 0 && (k % observers.every == 0 || k == cfg.steps);
        if due {
            recorder.record(&state, k as f64 * cfg.tau, cfg)?;
        }
    }
    Ok((state, recorder.series))
}

/// Final-time errors of `final_state` against `oracle` at `t`.
pub fn final_errors(final_state: &Field, oracle: Oracle<'_>, t: f64) -> Result<ErrorNorms> {
    let exact = oracle(t)?;
    Meter::new(final_state.domain()).error_norms(&exact, final_state)
}
