//! Periodic uniform grids, discrete Fourier transforms and discrete norms.
//!
//! Grid points along an axis are `lower + j * h` for `j = 0..N`; the upper
//! edge is identified with the lower one, so a scaled sum over the grid is
//! exactly the periodic trapezoidal rule.
//!
//! DFT normalization: the forward transform is unnormalized and the inverse
//! carries the `1 / prod(N)` factor.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::par;

/// Maximum supported spatial dimension.
pub const MAX_DIM: usize = 2;

/// Descriptor of a periodic box `[lower, upper)` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    points: Vec<usize>,
}

impl DomainSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        let dim = points.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(argument(format!("dimension must be 1 or 2, got {dim}")));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(argument(
                "lower, upper and points must have the same length",
            ));
        }
        for axis in 0..dim {
            if !(lower[axis].is_finite() && upper[axis].is_finite()) || upper[axis] <= lower[axis] {
                return Err(argument(format!(
                    "axis {axis}: upper ({}) must exceed lower ({})",
                    upper[axis], lower[axis]
                )));
            }
            if points[axis] < 4 || !points[axis].is_multiple_of(2) {
                return Err(argument(format!(
                    "axis {axis}: points must be even and at least 4, got {}",
                    points[axis]
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            points,
        })
    }

    /// The same interval `[lower, upper)` with `points` samples on every axis.
    pub fn cube(dim: usize, lower: f64, upper: f64, points: usize) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim], vec![points; dim])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.length(axis) / self.points[axis] as f64
    }

    /// Product of the spacings, the weight of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Measure of the box.
    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.length(a)).product()
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coordinate(&self, axis: usize, index: usize) -> f64 {
        self.lower[axis] + index as f64 * self.spacing(axis)
    }

    /// Multi-index of a flat row-major index (axis 0 varies slowest).
    pub fn unravel(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rest = flat;
        for axis in (0..self.dim()).rev() {
            idx[axis] = rest % self.points[axis];
            rest /= self.points[axis];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.points)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Physical position of a flat grid index; unused trailing entries are 0.
    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unravel(flat);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim() {
            x[axis] = self.coordinate(axis, idx[axis]);
        }
        x
    }
}

/// Signed DFT angular frequencies `2 pi m / L` along one axis, in FFT order
/// `0, 1, .., N/2 - 1, -N/2, .., -1`.
pub fn wavenumbers(domain: &DomainSpec, axis: usize) -> Result<Vec<f64>> {
    if axis >= domain.dim() {
        return Err(argument(format!(
            "axis {axis} out of range for a {}-dimensional domain",
            domain.dim()
        )));
    }
    let n = domain.points[axis];
    let scale = 2.0 * PI / domain.length(axis);
    Ok((0..n)
        .map(|m| {
            let signed = if m < n / 2 {
                m as f64
            } else {
                m as f64 - n as f64
            };
            scale * signed
        })
        .collect())
}

/// Complex grid function on a [`DomainSpec`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    domain: DomainSpec,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(domain: &DomainSpec) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); domain.len()],
            domain: domain.clone(),
        }
    }

    pub fn from_values(domain: &DomainSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(argument(format!(
                "field has {} values but the domain has {} points",
                values.len(),
                domain.len()
            )));
        }
        Ok(Self {
            domain: domain.clone(),
            values,
        })
    }

    /// Samples `func` at every grid point.
    pub fn sample<F>(domain: &DomainSpec, func: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync + Send,
    {
        let dim = domain.dim();
        let mut field = Self::zeros(domain);
        let dom = &field.domain.clone();
        par::for_each_indexed(&mut field.values, |i, v| {
            let x = dom.position(i);
            *v = func(&x[..dim]);
        });
        field
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `|u|^2` at every grid point.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Pointwise difference `self - other`.
    pub fn difference(&self, other: &Field) -> Result<Self> {
        ensure_same_domain(self, other)?;
        Ok(Self {
            domain: self.domain.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn ensure_same_domain(a: &Field, b: &Field) -> Result<()> {
    if a.domain != b.domain {
        return Err(argument("fields live on different domains"));
    }
    Ok(())
}

/// Discrete L2 norm `sqrt(prod(h) * sum |u|^2)`.
pub fn norm_l2(f: &Field) -> f64 {
    (f.domain.cell_volume() * par::sum_by(&f.values, |v| v.norm_sqr())).sqrt()
}

/// Discrete L1 norm `prod(h) * sum |u|`.
pub fn norm_l1(f: &Field) -> f64 {
    f.domain.cell_volume() * par::sum_by(&f.values, |v| v.norm())
}

pub fn norm_linf(f: &Field) -> f64 {
    f.max_modulus()
}

/// `sqrt(prod(h) * sum (1 + |x|^2)^alpha |u|^2)`.
pub fn norm_l2_weighted(f: &Field, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(argument(format!("alpha must be non-negative, got {alpha}")));
    }
    let dim = f.domain.dim();
    let mut weighted = 0.0;
    for (i, v) in f.values.iter().enumerate() {
        let x = f.domain.position(i);
        let r2: f64 = x[..dim].iter().map(|c| c * c).sum();
        weighted += (1.0 + r2).powf(alpha) * v.norm_sqr();
    }
    Ok((f.domain.cell_volume() * weighted).sqrt())
}

/// Discrete H1 norm using spectral derivatives.
pub fn norm_h1(f: &Field) -> f64 {
    let mut fourier = Fourier::new(&f.domain);
    let l2 = norm_l2(f);
    let mut total = l2 * l2;
    for axis in 0..f.domain.dim() {
        let d = fourier.derivative(f, axis);
        let n = norm_l2(&d);
        total += n * n;
    }
    total.sqrt()
}

/// Periodic trapezoidal rule of grid samples `g`.
pub fn trapezoid_integral(domain: &DomainSpec, g: &[f64]) -> Result<f64> {
    if g.len() != domain.len() {
        return Err(argument(format!(
            "integrand has {} samples but the domain has {} points",
            g.len(),
            domain.len()
        )));
    }
    Ok(domain.cell_volume() * par::sum_by(g, |v| *v))
}

/// Spectral derivative along `axis`: multiplies DFT coefficients by `i k`.
pub fn spectral_derivative(f: &Field, axis: usize) -> Result<Field> {
    if axis >= f.domain.dim() {
        return Err(argument(format!("axis {axis} out of range")));
    }
    Ok(Fourier::new(&f.domain).derivative(f, axis))
}

/// Reusable FFT plans and wavenumber tables for one domain.
pub struct Fourier {
    domain: DomainSpec,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    wavenumbers: Vec<Vec<f64>>,
    transposed: Vec<Complex64>,
}

impl Fourier {
    pub fn new(domain: &DomainSpec) -> Self {
        let mut planner = FftPlanner::new();
        let forward = domain
            .points
            .iter()
            .map(|&n| planner.plan_fft_forward(n))
            .collect();
        let inverse = domain
            .points
            .iter()
            .map(|&n| planner.plan_fft_inverse(n))
            .collect();
        let wavenumbers = (0..domain.dim())
            .map(|a| wavenumbers(domain, a).expect("axis in range"))
            .collect();
        Self {
            domain: domain.clone(),
            forward,
            inverse,
            wavenumbers,
            transposed: Vec::new(),
        }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// `|k|^2` for every Fourier mode, in the same layout as the values.
    pub fn squared_wavenumbers(&self) -> Vec<f64> {
        let dim = self.domain.dim();
        (0..self.domain.len())
            .map(|flat| {
                let idx = self.domain.unravel(flat);
                (0..dim).map(|a| self.wavenumbers[a][idx[a]].powi(2)).sum()
            })
            .collect()
    }

    /// Unnormalized forward DFT in place.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// Inverse DFT in place, including the `1 / prod(N)` factor.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
        let scale = 1.0 / data.len() as f64;
        par::for_each_indexed(data, |_, v| *v *= scale);
    }

    fn transform(&mut self, data: &mut [Complex64], forward: bool) {
        assert_eq!(
            data.len(),
            self.domain.len(),
            "buffer does not match the domain"
        );
        let plans = if forward {
            &self.forward
        } else {
            &self.inverse
        };
        let dim = self.domain.dim();
        let last = self.domain.points[dim - 1];
        run_rows(&plans[dim - 1], data, last);
        if dim == 2 {
            let (rows, cols) = (self.domain.points[0], self.domain.points[1]);
            self.transposed.resize(data.len(), Complex64::new(0.0, 0.0));
            transpose(data, &mut self.transposed, rows, cols);
            run_rows(&plans[0], &mut self.transposed, rows);
            transpose(&self.transposed, data, cols, rows);
        }
    }

    /// Spectral derivative of `f` along `axis`.
    pub fn derivative(&mut self, f: &Field, axis: usize) -> Field {
        let mut values = f.values.clone();
        self.forward(&mut values);
        let k = &self.wavenumbers[axis];
        let dom = &self.domain;
        par::for_each_indexed(&mut values, |i, v| {
            let ka = k[dom.unravel(i)[axis]];
            *v *= Complex64::new(0.0, ka);
        });
        self.inverse(&mut values);
        Field {
            domain: f.domain.clone(),
            values,
        }
    }
}

fn run_rows(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], row: usize) {
    let scratch_len = plan.get_inplace_scratch_len();
    par::for_each_row(
        data,
        row,
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, chunk| plan.process_with_scratch(chunk, scratch),
    );
}

/// Writes the `rows x cols` row-major matrix `src` into `dst` as `cols x rows`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const BLOCK: usize = 32;
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_1d(n: usize) -> DomainSpec {
        DomainSpec::cube(1, -16.0, 16.0, n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn domain_validation() {
        assert!(DomainSpec::cube(1, 1.0, 1.0, 8).is_err());
        assert!(DomainSpec::cube(1, 0.0, 1.0, 6).is_ok());
        assert!(DomainSpec::cube(1, 0.0, 1.0, 7).is_err());
        assert!(DomainSpec::cube(1, 0.0, 1.0, 2).is_err());
        assert!(DomainSpec::cube(3, 0.0, 1.0, 8).is_err());
        assert!(DomainSpec::new(vec![0.0], vec![1.0, 2.0], vec![8]).is_err());
    }

    #[test]
    fn wavenumber_ladders() {
        let d = DomainSpec::cube(1, -16.0, 16.0, 4).unwrap();
        let k = wavenumbers(&d, 0).unwrap();
        let expect = [0.0, PI / 16.0, -PI / 8.0, -PI / 16.0];
        for (a, b) in k.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let d = DomainSpec::cube(1, 0.0, 2.0 * PI, 8).unwrap();
        let k = wavenumbers(&d, 0).unwrap();
        let expect = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (a, b) in k.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(wavenumbers(&d, 1).is_err());
    }

    #[test]
    fn wavenumbers_symmetric_except_nyquist() {
        for n in [4, 6, 10, 64] {
            let d = DomainSpec::cube(1, -3.0, 5.0, n).unwrap();
            let mut k = wavenumbers(&d, 0).unwrap();
            let nyquist = k[n / 2];
            assert!((nyquist + PI * n as f64 / 8.0).abs() < 1e-12);
            k.remove(n / 2);
            let sum: f64 = k.iter().sum();
            assert!(sum.abs() < 1e-12);
        }
    }

    #[test]
    fn sample_excludes_upper_edge() {
        let d = unit_1d(8);
        let f = Field::sample(&d, |x| c(x[0], 0.0));
        assert_eq!(f.values()[0].re, -16.0);
        assert_eq!(f.values()[7].re, 12.0);
        let ones = Field::sample(&d, |_| c(1.0, 0.0));
        assert!(ones.values().iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn sampled_plane_wave_is_a_single_mode() {
        let d = unit_1d(16);
        let k1 = wavenumbers(&d, 0).unwrap()[1];
        let f = Field::sample(&d, |x| Complex64::from_polar(1.0, k1 * x[0]));
        let mut fourier = Fourier::new(&d);
        let mut hat = f.values().to_vec();
        fourier.forward(&mut hat);
        // x starts at -16, so the mode picks up the phase e^{-i k1 16}.
        for (m, v) in hat.iter().enumerate() {
            if m == 1 {
                assert!((v.norm() - 16.0).abs() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12, "mode {m} = {v}");
            }
        }
    }

    #[test]
    fn norms_of_simple_fields() {
        let d = unit_1d(2048);
        let ones = Field::sample(&d, |_| c(1.0, 0.0));
        assert!((norm_l2(&ones) - 32f64.sqrt()).abs() < 1e-12);
        assert!((norm_l1(&ones) - 32.0).abs() < 1e-11);
        assert_eq!(norm_linf(&ones), 1.0);
        assert!((norm_h1(&ones) - 32f64.sqrt()).abs() < 1e-10);

        let zero = Field::zeros(&d);
        assert_eq!(norm_l2(&zero), 0.0);
        assert_eq!(norm_l1(&zero), 0.0);
        assert_eq!(norm_linf(&zero), 0.0);
        assert_eq!(norm_h1(&zero), 0.0);
        assert_eq!(norm_l2_weighted(&zero, 1.5).unwrap(), 0.0);

        let mut spike = Field::zeros(&d);
        spike.values_mut()[17] = c(2.0, 0.0);
        assert!((norm_l1(&spike) - 2.0 / 64.0).abs() < 1e-15);
        assert_eq!(norm_linf(&spike), 2.0);
    }

    #[test]
    fn h1_of_constant_and_plane_wave() {
        let d = unit_1d(128);
        let cst = Field::sample(&d, |_| c(0.0, -3.0));
        assert!((norm_h1(&cst) - 3.0 * 32f64.sqrt()).abs() < 1e-12);
        let k = wavenumbers(&d, 0).unwrap()[5];
        let wave = Field::sample(&d, |x| Complex64::from_polar(1.0, k * x[0]));
        let expect = (1.0 + k * k).sqrt() * 32f64.sqrt();
        assert!((norm_h1(&wave) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn weighted_norm() {
        let d = unit_1d(2048);
        let f = Field::sample(&d, |x| c((-x[0] * x[0]).exp(), 0.3));
        let plain = norm_l2(&f);
        assert!((norm_l2_weighted(&f, 0.0).unwrap() - plain).abs() < 1e-14 * plain);
        assert!(norm_l2_weighted(&f, -1.0).is_err());
        let mut delta = Field::zeros(&d);
        delta.values_mut()[1024] = c(1.0, 0.0); // x = 0
        let w = norm_l2_weighted(&delta, 2.0).unwrap();
        assert!((w - (1.0f64 / 64.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gaussian_mass_and_trapezoid() {
        let d = unit_1d(2048);
        let b = PI.powf(-0.25);
        let f = Field::sample(&d, |x| c(b * (-0.5 * x[0] * x[0]).exp(), 0.0));
        assert!((norm_l2(&f) - 1.0).abs() < 1e-12);
        let rho = f.density();
        assert!((trapezoid_integral(&d, &rho).unwrap() - 1.0).abs() < 1e-12);

        let d2 = DomainSpec::cube(2, -16.0, 16.0, 16).unwrap();
        assert!((trapezoid_integral(&d2, &vec![1.0; 256]).unwrap() - 1024.0).abs() < 1e-10);
        assert_eq!(trapezoid_integral(&d2, &vec![0.0; 256]).unwrap(), 0.0);
        assert!(trapezoid_integral(&d2, &[1.0; 3]).is_err());
    }

    #[test]
    fn derivative_of_plane_wave_2d() {
        let d = DomainSpec::new(vec![-4.0, 0.0], vec![4.0, 2.0], vec![16, 8]).unwrap();
        let kx = wavenumbers(&d, 0).unwrap()[3];
        let ky = wavenumbers(&d, 1).unwrap()[6];
        let f = Field::sample(&d, |x| Complex64::from_polar(1.0, kx * x[0] + ky * x[1]));
        for (axis, k) in [(0, kx), (1, ky)] {
            let df = spectral_derivative(&f, axis).unwrap();
            for (a, b) in df.values().iter().zip(f.values()) {
                assert!((a - b * Complex64::new(0.0, k)).norm() < 1e-12);
            }
        }
        assert!(spectral_derivative(&f, 2).is_err());
    }

    #[test]
    fn difference_rejects_mismatched_domains() {
        let a = Field::zeros(&unit_1d(8));
        let b = Field::zeros(&unit_1d(16));
        assert!(a.difference(&b).is_err());
        assert!(Field::from_values(&unit_1d(8), vec![c(0.0, 0.0); 3]).is_err());
    }

    fn arb_field() -> impl Strategy<Value = Field> {
        (1usize..=2, prop::sample::select(vec![4usize, 6, 8, 12, 16]))
            .prop_flat_map(|(dim, n)| {
                let d = DomainSpec::cube(dim, -2.0, 3.0, n).unwrap();
                let len = d.len();
                (
                    Just(d),
                    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), len),
                )
            })
            .prop_map(|(d, vals)| {
                Field::from_values(&d, vals.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn parseval(f in arb_field()) {
            let mut fourier = Fourier::new(f.domain());
            let mut hat = f.values().to_vec();
            fourier.forward(&mut hat);
            let n = f.domain().len() as f64;
            let spectral = f.domain().cell_volume() / n * hat.iter().map(|v| v.norm_sqr()).sum::<f64>();
            let l2 = norm_l2(&f);
            prop_assert!((spectral - l2 * l2).abs() <= 1e-12 * (l2 * l2).max(1e-300));
        }

        #[test]
        fn fft_round_trip(f in arb_field()) {
            let mut fourier = Fourier::new(f.domain());
            let mut buf = f.values().to_vec();
            fourier.forward(&mut buf);
            fourier.inverse(&mut buf);
            let scale = norm_linf(&f).max(1e-300);
            for (a, b) in buf.iter().zip(f.values()) {
                prop_assert!((a - b).norm() <= 1e-12 * scale);
            }
        }

        #[test]
        fn h1_dominates_l2(f in arb_field()) {
            prop_assert!(norm_h1(&f) >= norm_l2(&f) * (1.0 - 1e-14));
        }

        #[test]
        fn trapezoid_matches_mass(f in arb_field()) {
            let l2 = norm_l2(&f);
            let t = trapezoid_integral(f.domain(), &f.density()).unwrap();
            prop_assert!((t - l2 * l2).abs() <= 1e-14 * (l2 * l2).max(1e-300));
        }
    }
}
