//! The generalized Camassa-Holm model on the periodic grid.
//!
//! Velocity `u` and momentum `m = u - u_xx` are linked through the Green's
//! kernel `G(x) = e^{-|x|}/2` of `1 - d^2/dx^2`, applied here through its exact
//! periodic symbol `1/(1 + xi^2)`. The kernel itself is inferred from the
//! integral form of the velocity equation; the round trip
//! `momentum(helmholtz_inverse(m)) == m` is what pins it down in the tests.
//!
//! Evolution laws (characteristic speed `-u_x`):
//!
//! ```text
//! m_t - u_x m_x = -m^2/2 + u m + u_x^2/2 - u^2/2
//! u_t - u_x u_x = G * (u_x^2 + u_xx^2/2) - u_x^2/2
//! ```

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GchError, Result};
use crate::spectral::{
    apply_symbol, spectrum, synthesize, BesovMeter, GridFunction, GridSpec, CHI_INNER,
};

/// Velocity, momentum and the cached velocity derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: GridFunction,
    pub m: GridFunction,
    pub u_x: GridFunction,
    pub u_xx: GridFunction,
}

impl FieldPair {
    /// Derives `u` and its derivatives from the momentum.
    pub fn from_momentum(m: GridFunction) -> Self {
        let grid = *m.grid();
        let mh = spectrum(&m);
        let uh: Vec<Complex64> = mh
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let xi = grid.wavenumber(k);
                c / (1.0 + xi * xi)
            })
            .collect();
        let (u, u_x, u_xx) = velocity_and_derivatives(grid, &uh);
        Self { u, m, u_x, u_xx }
    }

    /// Derives the momentum and derivatives from the velocity.
    pub fn from_velocity(u: GridFunction) -> Self {
        let grid = *u.grid();
        let uh = spectrum(&u);
        let m = apply_symbol(grid, &uh, |_, xi| Complex64::new(1.0 + xi * xi, 0.0));
        let (_, u_x, u_xx) = velocity_and_derivatives(grid, &uh);
        Self { u, m, u_x, u_xx }
    }

    /// Assembles a pair from independently obtained fields. `u_xx` is set to
    /// `u - m` so the momentum identity holds pointwise.
    pub fn from_parts(u: GridFunction, m: GridFunction, u_x: GridFunction) -> Result<Self> {
        let u_xx = u.sub(&m)?;
        u.grid().ensure_same(u_x.grid())?;
        Ok(Self { u, m, u_x, u_xx })
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    /// `max |m - (u - u_xx)| / max(|m|_inf, tiny)`.
    pub fn consistency_error(&self) -> f64 {
        let scale = self.m.sup_norm().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for i in 0..self.m.len() {
            let r = self.m.values()[i] - (self.u.values()[i] - self.u_xx.values()[i]);
            worst = worst.max(r.abs());
        }
        worst / scale
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            u: self.u.scale(alpha),
            m: self.m.scale(alpha),
            u_x: self.u_x.scale(alpha),
            u_xx: self.u_xx.scale(alpha),
        }
    }

    /// Columns `x, u, u_x, u_xx, m`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "u", "u_x", "u_xx", "m"])?;
        let g = self.grid();
        for i in 0..g.n_points() {
            w.write_record(&[
                g.node(i).to_string(),
                self.u.values()[i].to_string(),
                self.u_x.values()[i].to_string(),
                self.u_xx.values()[i].to_string(),
                self.m.values()[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn velocity_and_derivatives(
    grid: GridSpec,
    uh: &[Complex64],
) -> (GridFunction, GridFunction, GridFunction) {
    let u = synthesize(grid, uh.to_vec());
    let u_x = apply_symbol(grid, uh, |k, xi| {
        if grid.is_nyquist_bin(k) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, xi)
        }
    });
    let u_xx = apply_symbol(grid, uh, |_, xi| Complex64::new(-xi * xi, 0.0));
    (u, u_x, u_xx)
}

/// `u = (1 - d^2/dx^2)^{-1} m`.
pub fn helmholtz_inverse(m: &GridFunction) -> GridFunction {
    let grid = *m.grid();
    apply_symbol(grid, &spectrum(m), |_, xi| Complex64::new(1.0 / (1.0 + xi * xi), 0.0))
}

/// `G * f` with `G = e^{-|x|}/2` periodized.
pub fn green_convolve(f: &GridFunction) -> GridFunction {
    helmholtz_inverse(f)
}

/// `(dG/dx) * f`.
pub fn green_deriv_convolve(f: &GridFunction) -> GridFunction {
    let grid = *f.grid();
    apply_symbol(grid, &spectrum(f), |k, xi| {
        if grid.is_nyquist_bin(k) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, xi / (1.0 + xi * xi))
        }
    })
}

/// `m = u - u_xx`.
pub fn momentum(u: &GridFunction) -> GridFunction {
    let grid = *u.grid();
    apply_symbol(grid, &spectrum(u), |_, xi| Complex64::new(1.0 + xi * xi, 0.0))
}

/// Pointwise source `F = -m^2/2 + u m + u_x^2/2 - u^2/2`.
pub fn rhs_m_form(m: &GridFunction, u: &GridFunction, u_x: &GridFunction) -> Result<GridFunction> {
    m.grid().ensure_same(u.grid())?;
    m.grid().ensure_same(u_x.grid())?;
    let values = m
        .values()
        .iter()
        .zip(u.values())
        .zip(u_x.values())
        .map(|((&m, &u), &ux)| source_expanded(m, u, ux))
        .collect();
    Ok(GridFunction::from_raw(*m.grid(), values))
}

#[inline]
pub(crate) fn source_expanded(m: f64, u: f64, ux: f64) -> f64 {
    -0.5 * m * m + u * m + 0.5 * ux * ux - 0.5 * u * u
}

/// The factored form `u_x^2/2 - (u - m)^2/2` of the same source.
pub fn rhs_m_form_factored(
    m: &GridFunction,
    u: &GridFunction,
    u_x: &GridFunction,
) -> Result<GridFunction> {
    m.grid().ensure_same(u.grid())?;
    m.grid().ensure_same(u_x.grid())?;
    let values = m
        .values()
        .iter()
        .zip(u.values())
        .zip(u_x.values())
        .map(|((&m, &u), &ux)| 0.5 * ux * ux - 0.5 * (u - m) * (u - m))
        .collect();
    Ok(GridFunction::from_raw(*m.grid(), values))
}

/// `G * (u_x^2 + u_xx^2/2) - u_x^2/2`, the right side of the transport form
/// `u_t - u_x u_x = rhs`.
pub fn rhs_u_form(u: &GridFunction) -> GridFunction {
    let grid = *u.grid();
    let uh = spectrum(u);
    let (_, u_x, u_xx) = velocity_and_derivatives(grid, &uh);
    let f = GridFunction::from_raw(
        grid,
        u_x.values()
            .iter()
            .zip(u_xx.values())
            .map(|(&a, &b)| a * a + 0.5 * b * b)
            .collect(),
    );
    let gf = green_convolve(&f);
    GridFunction::from_raw(
        grid,
        gf.values()
            .iter()
            .zip(u_x.values())
            .map(|(&g, &a)| g - 0.5 * a * a)
            .collect(),
    )
}

/// Initial velocity profiles. Lengths are in the grid's `x` units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDataSpec {
    /// `a exp(-((x - c)/w)^2)`
    Gaussian {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    /// `a exp(-sqrt((x - c)^2 + eps^2))`; `eps` defaults to `8h`.
    SmoothedPeakon {
        amplitude: f64,
        smoothing: Option<f64>,
        center: f64,
    },
    /// Random trigonometric velocity whose spectrum sits in blocks
    /// `<= max_block` (and inside the 2/3 band); `amplitude` is its sup norm.
    BandLimitedRandom {
        seed: u64,
        max_block: i32,
        amplitude: f64,
    },
    Constant { value: f64 },
}

pub const DEFAULT_SMOOTHING_CELLS: f64 = 8.0;
pub const MIN_SMOOTHING_CELLS: f64 = 4.0;

impl InitialDataSpec {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let h = grid.spacing();
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(GchError::InvalidParameter(format!("{name} = {v} is not finite")))
            }
        };
        match *self {
            Self::Gaussian {
                amplitude,
                width,
                center,
            } => {
                finite("amplitude", amplitude)?;
                finite("center", center)?;
                if !(width.is_finite() && width >= MIN_SMOOTHING_CELLS * h) {
                    return Err(GchError::Unresolvable(format!(
                        "gaussian width {width} below {MIN_SMOOTHING_CELLS} cells (h = {h})"
                    )));
                }
            }
            Self::SmoothedPeakon {
                amplitude,
                smoothing,
                center,
            } => {
                finite("amplitude", amplitude)?;
                finite("center", center)?;
                let eps = smoothing.unwrap_or(DEFAULT_SMOOTHING_CELLS * h);
                if !(eps.is_finite() && eps > 0.0) {
                    return Err(GchError::InvalidParameter(format!("smoothing {eps} must be > 0")));
                }
                if eps < MIN_SMOOTHING_CELLS * h {
                    return Err(GchError::Unresolvable(format!(
                        "smoothing {eps} below {MIN_SMOOTHING_CELLS} cells (h = {h})"
                    )));
                }
            }
            Self::BandLimitedRandom {
                max_block,
                amplitude,
                ..
            } => {
                finite("amplitude", amplitude)?;
                if max_block < -1 {
                    return Err(GchError::InvalidParameter(format!(
                        "max_block {max_block} < -1"
                    )));
                }
            }
            Self::Constant { value } => finite("value", value)?,
        }
        Ok(())
    }
}

pub fn make_initial_data(spec: &InitialDataSpec, grid: GridSpec) -> Result<FieldPair> {
    spec.validate(&grid)?;
    let h = grid.spacing();
    let u = match *spec {
        InitialDataSpec::Gaussian {
            amplitude,
            width,
            center,
        } => GridFunction::from_fn(grid, |x| {
            let z = (x - center) / width;
            amplitude * (-z * z).exp()
        }),
        InitialDataSpec::SmoothedPeakon {
            amplitude,
            smoothing,
            center,
        } => {
            let eps = smoothing.unwrap_or(DEFAULT_SMOOTHING_CELLS * h);
            GridFunction::from_fn(grid, |x| {
                let d = x - center;
                amplitude * (-(d * d + eps * eps).sqrt()).exp()
            })
        }
        InitialDataSpec::BandLimitedRandom {
            seed,
            max_block,
            amplitude,
        } => band_limited_random(grid, seed, max_block, amplitude),
        InitialDataSpec::Constant { value } => GridFunction::constant(grid, value),
    };
    if let InitialDataSpec::Constant { value } = *spec {
        // (1 - d^2/dx^2) has eigenvalue one on constants
        return Ok(FieldPair {
            m: GridFunction::constant(grid, value),
            u_x: GridFunction::zeros(grid),
            u_xx: GridFunction::zeros(grid),
            u,
        });
    }
    Ok(FieldPair::from_velocity(u))
}

fn band_limited_random(grid: GridSpec, seed: u64, max_block: i32, amplitude: f64) -> GridFunction {
    if amplitude == 0.0 {
        return GridFunction::zeros(grid);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n_points();
    // blocks above max_block vanish for |xi| <= 3/4 * 2^{max_block + 1}
    let xi_cap = CHI_INNER * 2f64.powi(max_block + 1);
    let k_cap = (n / 3) as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n / 2 {
        let xi = grid.wavenumber(k);
        if xi > xi_cap || k as i64 > k_cap {
            break;
        }
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let c = Complex64::new(re, im) / (1.0 + xi * xi);
        coeffs[k] = c;
        coeffs[n - k] = c.conj();
    }
    let raw = synthesize(grid, coeffs);
    let top = raw.sup_norm();
    if top == 0.0 {
        return raw;
    }
    raw.scale(amplitude / top)
}

/// Rescales the pair so that `meter.norm(m) == target`.
pub fn normalize_momentum(pair: &FieldPair, target: f64, meter: &BesovMeter) -> Result<FieldPair> {
    if !(target.is_finite() && target >= 0.0) {
        return Err(GchError::InvalidParameter(format!("target norm {target}")));
    }
    let current = meter.norm(&pair.m)?;
    if current == 0.0 {
        return Ok(pair.clone());
    }
    Ok(pair.scaled(target / current))
}
