//! Moving Gausson solutions of the logarithmic Schrödinger equation
//! `i u_t = -Δu + λ u ln|u|^2`:
//!
//! ```text
//! u(x, t) = b exp( i(x·v - (a + |v|^2) t) + (λ/2) |x - x0 - 2 v t|^2 ),
//! a = -λ (d - ln b^2).
//! ```
//!
//! For `λ < 0` the profile is a Gaussian travelling with velocity `2v`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::grid::{DomainSpec, Field, MAX_DIM};

/// Tail-to-peak ratio above which a sampled Gausson is considered clipped.
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussonSpec {
    pub lambda: f64,
    /// Peak amplitude `b`.
    pub amplitude: f64,
    pub velocity: Vec<f64>,
    pub center: Vec<f64>,
}

impl GaussonSpec {
    pub fn new(lambda: f64, amplitude: f64, velocity: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        let spec = Self {
            lambda,
            amplitude,
            velocity,
            center,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The standard test profile: `b = (-λπ)^{-1/4}`, velocity `v` on every
    /// axis, centred at the origin.
    pub fn standard(dim: usize, lambda: f64, speed: f64) -> Result<Self> {
        Self::new(
            lambda,
            (-lambda * PI).powf(-0.25),
            vec![speed; dim],
            vec![0.0; dim],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda < 0.0) {
            return Err(argument(format!(
                "Gausson needs lambda < 0, got {}",
                self.lambda
            )));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(argument(format!(
                "Gausson amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        let dim = self.velocity.len();
        if dim == 0 || dim > MAX_DIM || self.center.len() != dim {
            return Err(argument(
                "Gausson velocity and center must both have length 1 or 2",
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.velocity.len()
    }

    /// `a_d = -λ (d - ln b^2)`.
    pub fn decay_constant(&self) -> f64 {
        -self.lambda * (self.dim() as f64 - (self.amplitude * self.amplitude).ln())
    }

    /// Exact mass `b^2 (π / -λ)^{d/2}` on the whole space.
    pub fn mass(&self) -> f64 {
        self.amplitude.powi(2) * (PI / -self.lambda).powf(self.dim() as f64 / 2.0)
    }

    pub fn value(&self, x: &[f64], t: f64) -> Complex64 {
        let v2: f64 = self.velocity.iter().map(|v| v * v).sum();
        let mut phase = -(self.decay_constant() + v2) * t;
        let mut r2 = 0.0;
        for ((xi, vi), ci) in x.iter().zip(&self.velocity).zip(&self.center) {
            phase += xi * vi;
            let shifted = xi - ci - 2.0 * vi * t;
            r2 += shifted * shifted;
        }
        Complex64::from_polar(self.amplitude * (0.5 * self.lambda * r2).exp(), phase)
    }

    /// Ratio between the modulus at the nearest box face and the peak, at time `t`.
    pub fn tail_ratio(&self, domain: &DomainSpec, t: f64) -> f64 {
        let mut nearest = f64::INFINITY;
        for axis in 0..self.dim().min(domain.dim()) {
            let c = self.center[axis] + 2.0 * self.velocity[axis] * t;
            let gap = (c - domain.lower()[axis]).min(domain.upper()[axis] - c);
            nearest = nearest.min(gap);
        }
        if nearest <= 0.0 {
            return 1.0;
        }
        (0.5 * self.lambda * nearest * nearest).exp()
    }
}

/// `a_d` for a spec; see [`GaussonSpec::decay_constant`].
pub fn decay_constant(spec: &GaussonSpec) -> f64 {
    spec.decay_constant()
}

pub fn gausson_value(spec: &GaussonSpec, x: &[f64], t: f64) -> Complex64 {
    spec.value(x, t)
}

fn check_dims(spec: &GaussonSpec, domain: &DomainSpec) -> Result<()> {
    if spec.dim() != domain.dim() {
        return Err(argument(format!(
            "Gausson is {}-dimensional but the domain is {}-dimensional",
            spec.dim(),
            domain.dim()
        )));
    }
    Ok(())
}

/// Samples the Gausson on the grid. Tails are not wrapped around the
/// periodic box; call [`GaussonSpec::tail_ratio`] to check the clipping.
pub fn gausson_field(spec: &GaussonSpec, domain: &DomainSpec, t: f64) -> Result<Field> {
    check_dims(spec, domain)?;
    Ok(Field::sample(domain, |x| spec.value(x, t)))
}

/// Pointwise sum of several Gaussons at `t = 0`; the sum is initial data,
/// not a solution, so other times are rejected.
pub fn superpose(specs: &[GaussonSpec], domain: &DomainSpec, t: f64) -> Result<Field> {
    if t != 0.0 {
        return Err(argument("a Gausson superposition is only defined at t = 0"));
    }
    if specs.is_empty() {
        return Err(argument("superpose needs at least one Gausson"));
    }
    for s in specs {
        check_dims(s, domain)?;
    }
    Ok(Field::sample(domain, |x| {
        specs.iter().map(|s| s.value(x, 0.0)).sum()
    }))
}
