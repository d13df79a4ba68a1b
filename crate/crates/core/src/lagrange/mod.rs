//! Characteristic (Lagrangian) formulation.
//!
//! Particles move with `dy/dt = -u_x(t, y)`. Along them the system closes in
//! `(y, y_xi, M, U, U_xi)` with two nonlocal integrals against the kernel
//! `e^{-|x|}/2` and its derivative:
//!
//! ```text
//! dy/dt    = -U_xi / y_xi
//! dy_xi/dt = (M - U) y_xi
//! dM/dt    = -M^2/2 + U M + (U_xi/y_xi)^2/2 - U^2/2
//! dU/dt    = A - (U_xi/y_xi)^2/2
//! dU_xi/dt = -B y_xi - U_xi (U - M)
//! ```
//!
//! `A` is `G * (u_x^2 + u_xx^2/2)` and `-B` is `G_x * (u_x^2 + u_xx^2/2)`,
//! both composed with `y`.

mod interp;

use std::io::Write;

use serde::Serialize;

use crate::error::{GchError, Result};
use crate::euler::AbortInfo;
use crate::model::{green_deriv_convolve, helmholtz_inverse, FieldPair};
use crate::spectral::{resample, GridFunction, GridSpec};

pub use interp::{eval_sorted, hermite, pchip_slopes};

/// Threshold of the Jacobian contract `y_xi >= 1/2`.
pub const BREACH_THRESHOLD: f64 = 0.5;
pub const WARN_THRESHOLD: f64 = 0.6;
/// Smallest `y_xi` the right side accepts.
pub const MIN_JACOBIAN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    grid: GridSpec,
    pub t: f64,
    pub y: Vec<f64>,
    pub yxi: Vec<f64>,
    pub m: Vec<f64>,
    pub u: Vec<f64>,
    pub uxi: Vec<f64>,
    /// `int_0^t (M - U) dtau`, advanced by the same integrator.
    pub strain: Vec<f64>,
}

impl ParticleEnsemble {
    /// Label grid: `xi_i` are its nodes.
    pub fn labels(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn xi(&self, i: usize) -> f64 {
        self.grid.node(i)
    }

    pub fn period(&self) -> f64 {
        self.grid.period()
    }

    pub fn min_yxi(&self) -> f64 {
        self.yxi.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Strictly increasing positions, including across the periodic seam.
    pub fn is_monotone(&self) -> bool {
        let n = self.len();
        self.y.windows(2).all(|w| w[1] > w[0]) && self.y[0] + self.period() > self.y[n - 1]
    }

    pub fn is_finite(&self) -> bool {
        [&self.y, &self.yxi, &self.m, &self.u, &self.uxi]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    fn first_violation(&self) -> Option<usize> {
        let n = self.len();
        (0..n - 1)
            .find(|&i| !(self.y[i + 1] > self.y[i]))
            .or(if self.y[0] + self.period() > self.y[n - 1] {
                None
            } else {
                Some(n - 1)
            })
    }

    fn ensure_monotone(&self) -> Result<()> {
        match self.first_violation() {
            None => Ok(()),
            Some(index) => Err(GchError::MonotonicityLost { index, t: self.t }),
        }
    }

    /// Columns `xi, y, yxi, M, U, Uxi`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["xi", "y", "yxi", "M", "U", "Uxi"])?;
        for i in 0..self.len() {
            w.write_record(&[
                self.xi(i).to_string(),
                self.y[i].to_string(),
                self.yxi[i].to_string(),
                self.m[i].to_string(),
                self.u[i].to_string(),
                self.uxi[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn combine(&self, d: &Derivatives, h: f64) -> Self {
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + h * y).collect();
        Self {
            grid: self.grid,
            t: self.t + h,
            y: add(&self.y, &d.y),
            yxi: add(&self.yxi, &d.yxi),
            m: add(&self.m, &d.m),
            u: add(&self.u, &d.u),
            uxi: add(&self.uxi, &d.uxi),
            strain: add(&self.strain, &d.strain),
        }
    }
}

/// Particles at the label nodes of an `n_particles` grid. Data on a different
/// grid are first resampled trigonometrically.
pub fn init_particles(m0: &GridFunction, n_particles: usize) -> Result<ParticleEnsemble> {
    let labels = GridSpec::new(m0.grid().half_length(), n_particles)?;
    let m = if labels == *m0.grid() {
        m0.clone()
    } else {
        resample(m0, labels)?
    };
    let u = helmholtz_inverse(&m);
    let ux = green_deriv_convolve(&m);
    Ok(ParticleEnsemble {
        grid: labels,
        t: 0.0,
        y: labels.nodes(),
        yxi: vec![1.0; n_particles],
        m: m.into_values(),
        u: u.into_values(),
        uxi: ux.into_values(),
        strain: vec![0.0; n_particles],
    })
}

/// Weights `[(U_xi/y_xi)^2 + (U - M)^2/2] y_xi dxi` of the trapezoid rule.
pub fn kernel_weights(ens: &ParticleEnsemble) -> Vec<f64> {
    let dxi = ens.grid.spacing();
    (0..ens.len())
        .map(|i| {
            let q = ens.uxi[i] / ens.yxi[i];
            let r = ens.u[i] - ens.m[i];
            (q * q + 0.5 * r * r) * ens.yxi[i] * dxi
        })
        .collect()
}

/// `(A_i, B_i)` with
/// `A_i = 1/2 sum_j sum_{k=-1..1} e^{-|y_i - y_j - 2kL|} w_j` and `B_i` the same
/// sum weighted by `sign(y_i - y_j - 2kL)`.
///
/// Uses one left-to-right and one right-to-left sweep over the three
/// concatenated periods with segment factors `e^{-(y_{q+1} - y_q)}`.
pub fn nonlocal_integrals(ens: &ParticleEnsemble) -> Result<(Vec<f64>, Vec<f64>)> {
    ens.ensure_monotone()?;
    let n = ens.len();
    let w = kernel_weights(ens);
    let period = ens.period();
    let pos = |q: usize| ens.y[q % n] + period * ((q / n) as f64 - 1.0);
    let total = 3 * n;
    let decay: Vec<f64> = (0..total - 1).map(|q| (-(pos(q + 1) - pos(q))).exp()).collect();

    let mut left = vec![0.0; total];
    for q in 0..total - 1 {
        left[q + 1] = decay[q] * (left[q] + w[q % n]);
    }
    let mut right = vec![0.0; total];
    for q in (1..total).rev() {
        right[q - 1] = decay[q - 1] * (right[q] + w[q % n]);
    }
    let a = (0..n)
        .map(|i| 0.5 * (left[n + i] + w[i] + right[n + i]))
        .collect();
    let b = (0..n).map(|i| 0.5 * (left[n + i] - right[n + i])).collect();
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub y: Vec<f64>,
    pub yxi: Vec<f64>,
    pub m: Vec<f64>,
    pub u: Vec<f64>,
    pub uxi: Vec<f64>,
    pub strain: Vec<f64>,
}

pub fn rhs_lagrange(ens: &ParticleEnsemble) -> Result<Derivatives> {
    let min = ens.min_yxi();
    if !(min >= MIN_JACOBIAN) {
        return Err(GchError::Breaking {
            t: ens.t,
            min_yxi: min,
        });
    }
    let (a, b) = nonlocal_integrals(ens)?;
    let n = ens.len();
    let mut d = Derivatives {
        y: Vec::with_capacity(n),
        yxi: Vec::with_capacity(n),
        m: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        uxi: Vec::with_capacity(n),
        strain: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (yx, mm, uu, ux) = (ens.yxi[i], ens.m[i], ens.u[i], ens.uxi[i]);
        let q = ux / yx;
        d.y.push(-q);
        d.yxi.push((mm - uu) * yx);
        d.m.push(-0.5 * mm * mm + uu * mm + 0.5 * q * q - 0.5 * uu * uu);
        d.u.push(a[i] - 0.5 * q * q);
        d.uxi.push(-b[i] * yx - ux * (uu - mm));
        d.strain.push(mm - uu);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangeControls {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_cap: f64,
    pub output_every: usize,
    pub warn_threshold: f64,
}

impl LagrangeControls {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            cfl_cap: crate::euler::TimeControls::DEFAULT_CFL,
            output_every: 1,
            warn_threshold: WARN_THRESHOLD,
        }
    }

    pub fn with_cfl_cap(mut self, cap: f64) -> Self {
        self.cfl_cap = cap;
        self
    }

    pub fn with_output_every(mut self, every: usize) -> Self {
        self.output_every = every;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(GchError::InvalidParameter(format!("dt = {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(GchError::InvalidParameter(format!("t_end = {}", self.t_end)));
        }
        if !(self.cfl_cap > 0.0) || self.output_every == 0 {
            return Err(GchError::InvalidParameter(format!(
                "cfl_cap = {}, output_every = {}",
                self.cfl_cap, self.output_every
            )));
        }
        Ok(())
    }

    /// `min(dt, cfl_cap dxi min(y_xi) / max |U_xi / y_xi|)`.
    pub fn effective_dt(&self, ens: &ParticleEnsemble) -> f64 {
        let speed = ens
            .uxi
            .iter()
            .zip(&ens.yxi)
            .fold(0.0_f64, |a, (u, y)| a.max((u / y).abs()))
            .max(1e-12);
        self.dt
            .min(self.cfl_cap * ens.grid.spacing() * ens.min_yxi() / speed)
    }
}

fn rk4(ens: &ParticleEnsemble, h: f64) -> Result<ParticleEnsemble> {
    let k1 = rhs_lagrange(ens)?;
    let k2 = rhs_lagrange(&ens.combine(&k1, 0.5 * h))?;
    let k3 = rhs_lagrange(&ens.combine(&k2, 0.5 * h))?;
    let k4 = rhs_lagrange(&ens.combine(&k3, h))?;
    let avg = |sel: fn(&Derivatives) -> &Vec<f64>| -> Vec<f64> {
        (0..ens.len())
            .map(|i| (sel(&k1)[i] + 2.0 * sel(&k2)[i] + 2.0 * sel(&k3)[i] + sel(&k4)[i]) / 6.0)
            .collect()
    };
    let sum = Derivatives {
        y: avg(|d| &d.y),
        yxi: avg(|d| &d.yxi),
        m: avg(|d| &d.m),
        u: avg(|d| &d.u),
        uxi: avg(|d| &d.uxi),
        strain: avg(|d| &d.strain),
    };
    let mut next = ens.combine(&sum, h);
    next.t = ens.t + h;
    Ok(next)
}

fn check_step(ens: &ParticleEnsemble) -> Result<()> {
    if !ens.is_finite() {
        return Err(GchError::Breaking {
            t: ens.t,
            min_yxi: f64::NAN,
        });
    }
    let min = ens.min_yxi();
    if !(min > 0.0) {
        return Err(GchError::Breaking { t: ens.t, min_yxi: min });
    }
    ens.ensure_monotone()
}

/// One RK4 step of size `controls.effective_dt(ens)`.
pub fn step(ens: &ParticleEnsemble, controls: &LagrangeControls) -> Result<ParticleEnsemble> {
    controls.validate()?;
    let next = rk4(ens, controls.effective_dt(ens))?;
    check_step(&next)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreakingReport {
    pub min_yxi: f64,
    pub t_of_min: f64,
    pub breached: bool,
    /// First crossing of the threshold, linearly interpolated in time.
    pub t_breach: Option<f64>,
}

/// Minimum of `y_xi` over a `(t, min_i y_xi)` history.
pub fn breaking_monitor(history: &[(f64, f64)]) -> BreakingReport {
    let mut min = f64::INFINITY;
    let mut t_of_min = 0.0;
    for &(t, v) in history {
        if v < min {
            min = v;
            t_of_min = t;
        }
    }
    let t_breach = history.windows(2).find_map(|w| {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        (v0 >= BREACH_THRESHOLD && v1 < BREACH_THRESHOLD)
            .then(|| t0 + (t1 - t0) * (v0 - BREACH_THRESHOLD) / (v0 - v1))
    });
    let t_breach = t_breach.or_else(|| {
        history
            .first()
            .filter(|(_, v)| *v < BREACH_THRESHOLD)
            .map(|(t, _)| *t)
    });
    BreakingReport {
        min_yxi: min,
        t_of_min,
        breached: min < BREACH_THRESHOLD,
        t_breach,
    }
}

#[derive(Debug, Clone)]
pub struct LagrangeRun {
    pub snapshots: Vec<ParticleEnsemble>,
    /// `(t, min_i y_xi)` after every step.
    pub history: Vec<(f64, f64)>,
    pub report: BreakingReport,
    pub abort: Option<AbortInfo>,
    pub warnings: Vec<String>,
}

impl LagrangeRun {
    pub fn last(&self) -> &ParticleEnsemble {
        self.snapshots.last().expect("run holds the initial ensemble")
    }
}

/// Integrates to `t_end`, landing exactly on every output time. A failed step
/// ends the run and is recorded in [`LagrangeRun::abort`].
pub fn simulate_lagrange(
    ens0: ParticleEnsemble,
    controls: &LagrangeControls,
) -> Result<LagrangeRun> {
    controls.validate()?;
    check_step(&ens0)?;
    let mut ens = ens0;
    let mut history = vec![(ens.t, ens.min_yxi())];
    let mut snapshots = vec![ens.clone()];
    let mut abort = None;
    let mut warnings = Vec::new();
    let mut warned = false;
    let out_dt = controls.output_every as f64 * controls.dt;
    let n_out = if controls.t_end == 0.0 {
        0
    } else {
        ((controls.t_end / out_dt) - 1e-9).ceil().max(1.0) as usize
    };
    'outer: for k in 1..=n_out {
        let target = if k == n_out {
            controls.t_end
        } else {
            k as f64 * out_dt
        };
        while ens.t < target {
            let mut h = controls.effective_dt(&ens).min(target - ens.t);
            if target - ens.t - h < 1e-9 * controls.dt {
                h = target - ens.t;
            }
            match rk4(&ens, h).and_then(|e| check_step(&e).map(|_| e)) {
                Ok(next) => ens = next,
                Err(e) => {
                    abort = Some(AbortInfo {
                        t: ens.t + h,
                        reason: e.to_string(),
                    });
                    break 'outer;
                }
            }
            let min = ens.min_yxi();
            history.push((ens.t, min));
            if !warned && min < controls.warn_threshold {
                warned = true;
                warnings.push(format!(
                    "min y_xi = {min:.4} below {} at t = {:.4}",
                    controls.warn_threshold, ens.t
                ));
            }
        }
        ens.t = target;
        if let Some(last) = history.last_mut() {
            last.0 = target;
        }
        snapshots.push(ens.clone());
    }
    Ok(LagrangeRun {
        report: breaking_monitor(&history),
        snapshots,
        history,
        abort,
        warnings,
    })
}

/// Interpolates the ensemble back to the nodes of `grid`.
///
/// `u` uses cubic Hermite pieces with the exact slopes `U_xi / y_xi`; `m` and
/// `u_x` use monotone (Fritsch-Carlson) cubics. All three are extended by one
/// period on each side before interpolating.
pub fn to_eulerian(ens: &ParticleEnsemble, grid: GridSpec) -> Result<FieldPair> {
    ens.ensure_monotone()?;
    if grid.half_length() != ens.grid.half_length() {
        return Err(GchError::GridMismatch {
            expected_l: ens.grid.half_length(),
            expected_n: ens.len(),
            found_l: grid.half_length(),
            found_n: grid.n_points(),
        });
    }
    let n = ens.len();
    let period = ens.period();
    let ext = |v: &[f64], shift: bool| -> Vec<f64> {
        (0..3 * n)
            .map(|q| v[q % n] + if shift { period * ((q / n) as f64 - 1.0) } else { 0.0 })
            .collect()
    };
    let x = ext(&ens.y, true);
    let slope: Vec<f64> = ens.uxi.iter().zip(&ens.yxi).map(|(a, b)| a / b).collect();
    let u_vals = ext(&ens.u, false);
    let m_vals = ext(&ens.m, false);
    let ux_vals = ext(&slope, false);
    let dm = pchip_slopes(&x, &m_vals);
    let dux = pchip_slopes(&x, &ux_vals);

    let nodes = grid.nodes();
    let u = eval_sorted(&x, &u_vals, &ux_vals, &nodes);
    let m = eval_sorted(&x, &m_vals, &dm, &nodes);
    let ux = eval_sorted(&x, &ux_vals, &dux, &nodes);
    FieldPair::from_parts(
        GridFunction::new(grid, u)?,
        GridFunction::new(grid, m)?,
        GridFunction::new(grid, ux)?,
    )
}

/// `max_i |U_i - U'_i|` between ensembles on the same labels.
pub fn velocity_distance(a: &ParticleEnsemble, b: &ParticleEnsemble) -> Result<f64> {
    a.grid.ensure_same(&b.grid)?;
    Ok(a.u
        .iter()
        .zip(&b.u)
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs())))
}
