//! Mass, energy and error functionals of grid functions.

use serde::Serialize;

use crate::error::Result;
use crate::grid::{ensure_same_domain, norm_l2, DomainSpec, Field, Fourier};
use crate::par;
use crate::regularization::Regularization;

/// Discrete error norms between two grid functions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
    pub linf: f64,
    /// L1 norm of the density difference `|a|^2 - |b|^2`.
    pub density_l1: f64,
}

/// Time series of observables recorded along an evolution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    /// Energy with the regularized density used by the run.
    pub energy_reg: Vec<f64>,
    /// Energy with the exact density `rho ln rho - rho`.
    pub energy_exact: Vec<f64>,
    /// Errors against an oracle, when one was supplied.
    pub errors: Option<Vec<ErrorNorms>>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest relative deviation of the mass from its first record.
    pub fn mass_drift(&self) -> f64 {
        let Some(&m0) = self.mass.first() else {
            return 0.0;
        };
        self.mass
            .iter()
            .map(|m| (m - m0).abs() / m0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Largest absolute deviation of the regularized energy from its first record.
    pub fn energy_fluctuation(&self) -> f64 {
        let Some(&e0) = self.energy_reg.first() else {
            return 0.0;
        };
        self.energy_reg
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluator that keeps FFT plans for one domain between calls.
pub struct Meter {
    fourier: Fourier,
    k2: Vec<f64>,
    scratch: Vec<num_complex::Complex64>,
}

impl Meter {
    pub fn new(domain: &DomainSpec) -> Self {
        let fourier = Fourier::new(domain);
        let k2 = fourier.squared_wavenumbers();
        Self {
            fourier,
            k2,
            scratch: Vec::new(),
        }
    }

    /// `sum_axes ||∂u||^2`, evaluated in Fourier space.
    pub fn kinetic(&mut self, f: &Field) -> f64 {
        self.scratch.clear();
        self.scratch.extend_from_slice(f.values());
        self.fourier.forward(&mut self.scratch);
        let weight = f.domain().cell_volume() / f.domain().len() as f64;
        let k2 = &self.k2;
        let sum: f64 = self
            .scratch
            .iter()
            .zip(k2)
            .map(|(v, k)| k * v.norm_sqr())
            .sum();
        weight * sum
    }

    /// `||u||_{H1}` through the Fourier multiplier `1 + |k|^2`.
    pub fn h1(&mut self, f: &Field) -> f64 {
        let l2 = norm_l2(f);
        (l2 * l2 + self.kinetic(f)).sqrt()
    }

    pub fn energy(&mut self, f: &Field, lambda: f64, reg: &Regularization) -> f64 {
        self.kinetic(f) + lambda * potential(f, reg)
    }

    pub fn error_norms(&mut self, a: &Field, b: &Field) -> Result<ErrorNorms> {
        let diff = a.difference(b)?;
        let density: f64 = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs())
            .sum();
        Ok(ErrorNorms {
            l2: norm_l2(&diff),
            h1: self.h1(&diff),
            linf: diff.max_modulus(),
            density_l1: a.domain().cell_volume() * density,
        })
    }
}

fn potential(f: &Field, reg: &Regularization) -> f64 {
    f.domain().cell_volume() * par::sum_by(f.values(), |v| reg.big_f_unchecked(v.norm_sqr()))
}

/// `||u||^2`.
pub fn mass(f: &Field) -> f64 {
    let n = norm_l2(f);
    n * n
}

/// `int |∇u|^2 + λ F_reg(|u|^2)` with the trapezoidal rule for the potential part.
pub fn energy(f: &Field, lambda: f64, reg: &Regularization) -> f64 {
    Meter::new(f.domain()).energy(f, lambda, reg)
}

pub fn error_norms(a: &Field, b: &Field) -> Result<ErrorNorms> {
    ensure_same_domain(a, b)?;
    Meter::new(a.domain()).error_norms(a, b)
}

/// `|E(u0) - E_reg(u0)|`; only the potential parts differ.
pub fn energy_error(f0: &Field, lambda: f64, reg: &Regularization) -> f64 {
    let exact = Regularization::exact();
    let diff = f0.domain().cell_volume()
        * par::sum_by(f0.values(), |v| {
            let rho = v.norm_sqr();
            reg.big_f_unchecked(rho) - exact.big_f_unchecked(rho)
        });
    (lambda * diff).abs()
}

/// Momentum `Im int conj(u) ∂u` per axis.
pub fn momentum(f: &Field) -> Vec<f64> {
    let mut fourier = Fourier::new(f.domain());
    let h = f.domain().cell_volume();
    (0..f.domain().dim())
        .map(|axis| {
            let d = fourier.derivative(f, axis);
            h * f
                .values()
                .iter()
                .zip(d.values())
                .map(|(u, du)| (u.conj() * du).im)
                .sum::<f64>()
        })
        .collect()
}
