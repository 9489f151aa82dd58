//! Logarithmic nonlinearity `f(rho) = ln rho`, its energy density
//! `F(rho) = rho ln rho - rho`, and the regularized replacements.
//!
//! * [`RegKind::LocalEnergy`] keeps `F` untouched for `rho >= eps^2` and
//!   replaces it below the threshold by `rho * Q_n(rho)`, where `Q_n` is the
//!   degree-`n` Taylor polynomial of `ln rho - 1` at `eps^2`. The result is
//!   `C^n` in `rho`.
//! * [`RegKind::SqrtShift`] uses `f = 2 ln(eps + sqrt(rho))`.
//! * [`RegKind::SquareShift`] uses `f = ln(eps^2 + rho)`.
//!
//! Polynomial branches are evaluated in `s = 1 - rho / eps^2` by Horner's
//! rule. At exactly `rho = eps^2` the logarithmic branch is used.

use std::fmt;

use crate::error::{argument, Error, Result};

/// Nonlinearity family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegKind {
    ExactLog,
    /// Local energy regularization of order `n >= 2`.
    LocalEnergy(u32),
    SqrtShift,
    SquareShift,
}

impl RegKind {
    /// Name used in configuration files and CSV metadata.
    pub fn name(&self) -> &'static str {
        match self {
            RegKind::ExactLog => "exact_log",
            RegKind::LocalEnergy(_) => "local_energy",
            RegKind::SqrtShift => "sqrt_shift",
            RegKind::SquareShift => "square_shift",
        }
    }

    /// Parses a kind name; `order` is only consulted for `local_energy`.
    pub fn parse(name: &str, order: u32) -> Result<Self> {
        match name {
            "exact_log" => Ok(RegKind::ExactLog),
            "local_energy" => {
                if order < 2 {
                    Err(argument("n must be ≥ 2"))
                } else {
                    Ok(RegKind::LocalEnergy(order))
                }
            }
            "sqrt_shift" => Ok(RegKind::SqrtShift),
            "square_shift" => Ok(RegKind::SquareShift),
            other => Err(argument(format!(
                "unknown regularization kind '{other}' (expected exact_log, local_energy, sqrt_shift or square_shift)"
            ))),
        }
    }
}

impl fmt::Display for RegKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegKind::LocalEnergy(n) => write!(f, "local_energy(n={n})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A nonlinearity family together with its regularization parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    kind: RegKind,
    epsilon: f64,
}

impl Regularization {
    pub fn new(kind: RegKind, epsilon: f64) -> Result<Self> {
        if let RegKind::LocalEnergy(n) = kind {
            if n < 2 {
                return Err(argument("n must be ≥ 2"));
            }
        }
        if kind != RegKind::ExactLog && !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(argument(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn exact() -> Self {
        Self {
            kind: RegKind::ExactLog,
            epsilon: 0.0,
        }
    }

    pub fn local_energy(order: u32, epsilon: f64) -> Result<Self> {
        Self::new(RegKind::LocalEnergy(order), epsilon)
    }

    pub fn kind(&self) -> RegKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same family with another parameter.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.kind, epsilon)
    }

    /// The regularized nonlinearity `f(rho)`.
    pub fn f_value(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        if self.kind == RegKind::ExactLog && rho == 0.0 {
            return Err(Error::Domain("ln(rho) is undefined at rho = 0".into()));
        }
        Ok(self.f_unchecked(rho))
    }

    /// `f(rho)` without argument checks; used in the time-stepping hot loop.
    /// Returns `-inf` for the exact logarithm at zero density.
    #[inline]
    pub fn f_unchecked(&self, rho: f64) -> f64 {
        let eps = self.epsilon;
        match self.kind {
            RegKind::ExactLog => rho.ln(),
            RegKind::LocalEnergy(n) => {
                let eps2 = eps * eps;
                if rho >= eps2 {
                    rho.ln()
                } else {
                    local_f_poly(n, eps2, 1.0 - rho / eps2)
                }
            }
            RegKind::SqrtShift => 2.0 * (eps + rho.sqrt()).ln(),
            RegKind::SquareShift => (eps * eps + rho).ln(),
        }
    }

    /// First derivative `f'(rho)`.
    pub fn f_prime(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        let eps = self.epsilon;
        match self.kind {
            RegKind::ExactLog | RegKind::SqrtShift if rho == 0.0 => Err(Error::Domain(format!(
                "f' of {} diverges at rho = 0",
                self.kind.name()
            ))),
            RegKind::ExactLog => Ok(1.0 / rho),
            RegKind::LocalEnergy(n) => {
                let eps2 = eps * eps;
                if rho >= eps2 {
                    Ok(1.0 / rho)
                } else {
                    let s = 1.0 - rho / eps2;
                    // s^k coefficients: 1 for k < n-1, n+1 for k = n-1.
                    let mut acc = (n + 1) as f64;
                    for _ in 0..n - 1 {
                        acc = acc * s + 1.0;
                    }
                    Ok(acc / eps2)
                }
            }
            RegKind::SqrtShift => {
                let r = rho.sqrt();
                Ok(1.0 / (r * (eps + r)))
            }
            RegKind::SquareShift => Ok(1.0 / (eps * eps + rho)),
        }
    }

    /// Second derivative `f''(rho)`.
    pub fn f_second(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        let eps = self.epsilon;
        match self.kind {
            RegKind::ExactLog | RegKind::SqrtShift if rho == 0.0 => Err(Error::Domain(format!(
                "f'' of {} diverges at rho = 0",
                self.kind.name()
            ))),
            RegKind::ExactLog => Ok(-1.0 / (rho * rho)),
            RegKind::LocalEnergy(n) => {
                let eps2 = eps * eps;
                if rho >= eps2 {
                    return Ok(-1.0 / (rho * rho));
                }
                let s = 1.0 - rho / eps2;
                // (n^2 - 1) s^{n-2} + sum_{k=0}^{n-3} (k + 1) s^k
                let n = n as usize;
                let mut acc = (n * n - 1) as f64;
                for k in (0..n.saturating_sub(2)).rev() {
                    acc = acc * s + (k + 1) as f64;
                }
                Ok(-acc / (eps2 * eps2))
            }
            RegKind::SqrtShift => {
                let r = rho.sqrt();
                let denom = eps * r + rho;
                Ok(-(1.0 + 0.5 * eps / r) / (denom * denom))
            }
            RegKind::SquareShift => {
                let d = eps * eps + rho;
                Ok(-1.0 / (d * d))
            }
        }
    }

    /// Energy density `F(rho) = int_0^rho f`. The exact kind uses the
    /// continuous extension `F(0) = 0`.
    pub fn big_f(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.big_f_unchecked(rho))
    }

    #[inline]
    pub fn big_f_unchecked(&self, rho: f64) -> f64 {
        let eps = self.epsilon;
        match self.kind {
            RegKind::ExactLog => exact_big_f(rho),
            RegKind::LocalEnergy(n) => {
                let eps2 = eps * eps;
                if rho >= eps2 {
                    exact_big_f(rho)
                } else {
                    rho * local_q_poly(n, eps2, 1.0 - rho / eps2)
                }
            }
            RegKind::SqrtShift => {
                let r = rho.sqrt();
                2.0 * rho * (eps + r).ln() + 2.0 * eps * r
                    - rho
                    - 2.0 * eps * eps * (r / eps).ln_1p()
            }
            RegKind::SquareShift => {
                let e2 = eps * eps;
                // (e2 + rho) ln(e2 + rho) - rho - e2 ln e2, rearranged to avoid cancellation
                e2 * (rho / e2).ln_1p() + rho * (e2 + rho).ln() - rho
            }
        }
    }
}

fn check_density(rho: f64) -> Result<()> {
    if rho.is_nan() || rho < 0.0 {
        return Err(argument(format!("density must be non-negative, got {rho}")));
    }
    Ok(())
}

fn exact_big_f(rho: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else {
        rho * rho.ln() - rho
    }
}

/// `ln eps^2 - 1 - sum_{k=1}^n s^k / k`.
#[inline]
fn local_q_poly(n: u32, eps2: f64, s: f64) -> f64 {
    let mut acc = 1.0 / n as f64;
    for k in (1..n).rev() {
        acc = acc * s + 1.0 / k as f64;
    }
    eps2.ln() - 1.0 - acc * s
}

/// `ln eps^2 - ((n+1)/n) s^n - sum_{k=1}^{n-1} s^k / k`.
#[inline]
fn local_f_poly(n: u32, eps2: f64, s: f64) -> f64 {
    let mut acc = (n + 1) as f64 / n as f64;
    for k in (1..n).rev() {
        acc = acc * s + 1.0 / k as f64;
    }
    eps2.ln() - acc * s
}

fn check_local(n: u32, eps: f64, rho: f64) -> Result<()> {
    if n < 2 {
        return Err(argument("n must be ≥ 2"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(argument(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    if !(0.0..=eps * eps).contains(&rho) {
        return Err(argument(format!(
            "rho = {rho} outside [0, eps^2 = {}]",
            eps * eps
        )));
    }
    Ok(())
}

/// Taylor polynomial `Q_n(rho)` of `ln rho - 1` at `eps^2`, for `rho` in `[0, eps^2]`.
pub fn q_poly(n: u32, eps: f64, rho: f64) -> Result<f64> {
    check_local(n, eps, rho)?;
    let eps2 = eps * eps;
    Ok(local_q_poly(n, eps2, 1.0 - rho / eps2))
}

/// Derivative of [`q_poly`] in `rho`: `(1/eps^2) sum_{k=1}^n s^{k-1}`.
pub fn q_poly_prime(n: u32, eps: f64, rho: f64) -> Result<f64> {
    check_local(n, eps, rho)?;
    let eps2 = eps * eps;
    let s = 1.0 - rho / eps2;
    let mut acc = 1.0;
    for _ in 1..n {
        acc = acc * s + 1.0;
    }
    Ok(acc / eps2)
}

/// Taylor remainder `Q(rho) - Q_n(rho) = int_{eps^2}^{rho} (s - rho)^n / s^{n+1} ds`
/// by adaptive quadrature. Returns `-inf` at `rho = 0`.
pub fn taylor_remainder(n: u32, eps: f64, rho: f64) -> Result<f64> {
    check_local(n, eps, rho)?;
    if rho == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let eps2 = eps * eps;
    // With s = e^y the integrand becomes (1 - rho e^{-y})^n on [ln rho, ln eps^2].
    let g = |y: f64| (1.0 - rho * (-y).exp()).powi(n as i32);
    let (a, b) = (rho.ln(), eps2.ln());
    Ok(-adaptive_simpson(&g, a, b, 1e-14, 48))
}

fn adaptive_simpson<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (g(a), g(b));
    let m = 0.5 * (a + b);
    let fm = g(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(g, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `k`-th derivative of the polynomial branch `rho Q_n(rho)` of the local
/// energy density, valid for any `rho` (not only below the threshold).
pub fn polynomial_branch_derivative(n: u32, eps: f64, rho: f64, k: u32) -> f64 {
    let eps2 = eps * eps;
    let s = 1.0 - rho / eps2;
    // d^j Q_n / d rho^j for j >= 1: -(-1/eps^2)^j sum_{m=j}^n (m-1)!/(m-j)! s^{m-j}
    let q_derivative = |j: u32| -> f64 {
        if j == 0 {
            return local_q_poly(n, eps2, s);
        }
        if j > n {
            return 0.0;
        }
        let mut sum = 0.0;
        for m in (j..=n).rev() {
            let falling: f64 = ((m - j + 1)..m).map(|v| v as f64).product();
            sum = sum * s + falling;
        }
        let sign = if j.is_multiple_of(2) { -1.0 } else { 1.0 };
        sign * sum / eps2.powi(j as i32)
    };
    if k == 0 {
        rho * q_derivative(0)
    } else {
        rho * q_derivative(k) + k as f64 * q_derivative(k - 1)
    }
}

/// `k`-th derivative of `rho ln rho - rho` at `rho > 0`.
pub fn log_branch_derivative(rho: f64, k: u32) -> f64 {
    match k {
        0 => exact_big_f(rho),
        1 => rho.ln(),
        _ => {
            let factorial: f64 = (1..=(k - 2)).map(|v| v as f64).product();
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * factorial / rho.powi(k as i32 - 1)
        }
    }
}
