//! Periodic grids, sampled fields and the FFT plumbing shared by every
//! spectral operator.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{GchError, Result};

/// Uniform periodic grid on `[-L, L)` with `N` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_length: f64,
    n_points: usize,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 16;

    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(GchError::InvalidGrid(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        if n_points < Self::MIN_POINTS || !n_points.is_power_of_two() {
            return Err(GchError::InvalidGrid(format!(
                "N must be a power of two >= {}, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self {
            half_length,
            n_points,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Period `2L`.
    pub fn period(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.period() / self.n_points as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Signed integer mode index of FFT bin `k` (Nyquist reported as `+N/2`).
    pub fn mode_index(&self, k: usize) -> i64 {
        let n = self.n_points as i64;
        let k = k as i64;
        if k <= n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Angular wavenumber `pi k / L` of FFT bin `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        PI * self.mode_index(k) as f64 / self.half_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.wavenumber(k)).collect()
    }

    pub fn nyquist(&self) -> f64 {
        PI * (self.n_points / 2) as f64 / self.half_length
    }

    pub fn is_nyquist_bin(&self, k: usize) -> bool {
        k == self.n_points / 2
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(GchError::GridMismatch {
                expected_l: self.half_length,
                expected_n: self.n_points,
                found_l: other.half_length,
                found_n: other.n_points,
            })
        }
    }
}

/// Samples of a real periodic function on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(GchError::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GchError::InvalidParameter(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self { grid, values })
    }

    /// Builds a function without the finiteness scan. Used on hot paths whose
    /// outputs are checked by the caller.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_raw(grid, vec![0.0; grid.n_points()])
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.n_points()])
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rectangle-rule integral over one period.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    /// Cyclic shift by `cells` grid cells: `out[i] = self[i - cells]`.
    pub fn shifted(&self, cells: isize) -> Self {
        let n = self.values.len() as isize;
        let values = (0..n)
            .map(|i| self.values[(i - cells).rem_euclid(n) as usize])
            .collect();
        Self::from_raw(self.grid, values)
    }
}

struct PlanPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<PlanPair> {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<usize, Arc<PlanPair>>)>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let (planner, map) = &mut *guard;
    if let Some(p) = map.get(&n) {
        return Arc::clone(p);
    }
    let pair = Arc::new(PlanPair {
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    });
    map.insert(n, Arc::clone(&pair));
    pair
}

/// Unnormalized forward DFT of the samples.
pub fn spectrum(u: &GridFunction) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = u.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plans(buf.len()).forward.process(&mut buf);
    buf
}

/// Inverse of [`spectrum`]; keeps the real part.
pub fn synthesize(grid: GridSpec, mut coeffs: Vec<Complex64>) -> GridFunction {
    debug_assert_eq!(coeffs.len(), grid.n_points());
    plans(coeffs.len()).inverse.process(&mut coeffs);
    let inv_n = 1.0 / grid.n_points() as f64;
    GridFunction::from_raw(grid, coeffs.into_iter().map(|c| c.re * inv_n).collect())
}

/// Applies a real or complex Fourier multiplier `symbol(k, xi)` to an
/// already transformed spectrum.
pub fn apply_symbol(
    grid: GridSpec,
    coeffs: &[Complex64],
    symbol: impl Fn(usize, f64) -> Complex64,
) -> GridFunction {
    let shaped = coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| c * symbol(k, grid.wavenumber(k)))
        .collect();
    synthesize(grid, shaped)
}

/// Multiplier `(i xi)^order`, with the Nyquist bin dropped for odd orders.
pub fn derivative_symbol(grid: GridSpec, order: u32) -> impl Fn(usize, f64) -> Complex64 {
    move |k, xi| {
        if order % 2 == 1 && grid.is_nyquist_bin(k) {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, xi).powu(order)
    }
}

/// Exact derivative of the trigonometric interpolant.
pub fn derivative(u: &GridFunction, order: u32) -> GridFunction {
    if order == 0 {
        return u.clone();
    }
    let coeffs = spectrum(u);
    apply_symbol(u.grid, &coeffs, derivative_symbol(u.grid, order))
}

/// 2/3-rule truncation: drops every mode with `|k| > N/3`.
pub fn dealias(u: &GridFunction) -> GridFunction {
    let coeffs = spectrum(u);
    dealias_spectrum(u.grid, coeffs)
}

pub(crate) fn dealias_spectrum(grid: GridSpec, mut coeffs: Vec<Complex64>) -> GridFunction {
    let cutoff = grid.n_points() as i64 / 3;
    for (k, c) in coeffs.iter_mut().enumerate() {
        if grid.mode_index(k).abs() > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    synthesize(grid, coeffs)
}

/// Trigonometric resampling of `u` onto `target` (same period required).
pub fn resample(u: &GridFunction, target: GridSpec) -> Result<GridFunction> {
    if target.half_length() != u.grid.half_length() {
        return Err(GchError::InvalidParameter(
            "resampling requires a common period".into(),
        ));
    }
    let src = u.grid;
    if src == target {
        return Ok(u.clone());
    }
    let coeffs = spectrum(u);
    let (ns, nt) = (src.n_points(), target.n_points());
    let scale = nt as f64 / ns as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); nt];
    let keep = (ns.min(nt) / 2) as i64;
    for (k, &c) in coeffs.iter().enumerate() {
        let mode = src.mode_index(k);
        if mode.abs() > keep {
            continue;
        }
        let mut c = c * scale;
        if mode.abs() == keep {
            // split the shared Nyquist coefficient evenly between +/- keep
            c *= 0.5;
            let kt_pos = keep as usize;
            let kt_neg = nt - keep as usize;
            out[kt_pos] += c;
            out[kt_neg % nt] += c;
            continue;
        }
        let kt = mode.rem_euclid(nt as i64) as usize;
        out[kt] += c;
    }
    Ok(synthesize(target, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(20.0, 64).unwrap()
    }

    #[test]
    fn rejects_small_or_non_pow2_grids() {
        assert!(GridSpec::new(20.0, 8).is_err());
        assert!(GridSpec::new(20.0, 100).is_err());
        assert!(GridSpec::new(-1.0, 64).is_err());
        assert!(GridSpec::new(f64::NAN, 64).is_err());
    }

    #[test]
    fn nodes_start_at_minus_l() {
        let g = grid();
        assert_eq!(g.node(0), -20.0);
        assert!((g.spacing() - 40.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn arithmetic_requires_same_grid() {
        let a = GridFunction::zeros(grid());
        let b = GridFunction::zeros(GridSpec::new(10.0, 64).unwrap());
        assert!(matches!(a.add(&b), Err(GchError::GridMismatch { .. })));
    }

    #[test]
    fn non_finite_samples_rejected() {
        let mut v = vec![0.0; 64];
        v[3] = f64::NAN;
        assert!(GridFunction::new(grid(), v).is_err());
    }

    #[test]
    fn fft_roundtrip() {
        let g = grid();
        let u = GridFunction::from_fn(g, |x| (-(x * x)).exp() + 0.1 * x.sin());
        let back = synthesize(g, spectrum(&u));
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_survives_spectral_derivative_exactly() {
        let u = GridFunction::constant(grid(), 3.25);
        assert_eq!(derivative(&u, 1).sup_norm(), 0.0);
        assert_eq!(derivative(&u, 2).sup_norm(), 0.0);
    }

    #[test]
    fn resample_preserves_trig_polynomial() {
        let g = grid();
        let fine = GridSpec::new(20.0, 256).unwrap();
        let f = |x: f64| (std::f64::consts::PI * 3.0 * x / 20.0).cos();
        let up = resample(&GridFunction::from_fn(g, f), fine).unwrap();
        let exact = GridFunction::from_fn(fine, f);
        assert!(up.sub(&exact).unwrap().sup_norm() < 1e-13);
        let down = resample(&exact, g).unwrap();
        assert!(down.sub(&GridFunction::from_fn(g, f)).unwrap().sup_norm() < 1e-13);
    }

    #[test]
    fn shift_is_cyclic() {
        let g = grid();
        let u = GridFunction::from_fn(g, |x| x);
        let s = u.shifted(3);
        assert_eq!(s.values()[3], u.values()[0]);
        assert_eq!(s.values()[0], u.values()[61]);
    }
}
