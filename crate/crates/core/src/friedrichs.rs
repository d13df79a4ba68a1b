//! Frozen-coefficient iteration for the momentum equation.
//!
//! Iterate `n + 1` solves the linear transport problem
//! `f_t - (u_n)_x f_x = F(m_n, u_n)` with `f(0) = S_{n+1} m0`, where `m_n` is
//! the previous iterate sampled on a uniform time lattice. Coefficients are
//! read between lattice points by cubic Lagrange interpolation in `t`.

use std::io::Write;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{GchError, Result};
use crate::model::{helmholtz_inverse, rhs_m_form, rhs_m_form_factored};
use crate::spectral::{
    dealias_spectrum, derivative, low_cutoff, spectrum, synthesize, BesovMeter, GridFunction,
    GridSpec,
};

/// Grid functions sampled at `t_k = k dt`, `k = 0..len`.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    dt: f64,
    samples: Vec<GridFunction>,
}

impl TimeSeries {
    pub fn new(dt: f64, samples: Vec<GridFunction>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(GchError::InvalidParameter(format!("sample spacing {dt}")));
        }
        let first = samples
            .first()
            .ok_or_else(|| GchError::InvalidParameter("empty time series".into()))?;
        for s in &samples[1..] {
            first.grid().ensure_same(s.grid())?;
        }
        Ok(Self { dt, samples })
    }

    /// The same field at every lattice time.
    pub fn constant(f: GridFunction, dt: f64, len: usize) -> Result<Self> {
        Self::new(dt, vec![f; len.max(1)])
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn grid(&self) -> &GridSpec {
        self.samples[0].grid()
    }

    pub fn samples(&self) -> &[GridFunction] {
        &self.samples
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.samples.len() - 1)
    }

    pub fn last(&self) -> &GridFunction {
        self.samples.last().expect("non-empty")
    }

    pub fn map(&self, f: impl Fn(&GridFunction) -> GridFunction) -> Self {
        Self {
            dt: self.dt,
            samples: self.samples.iter().map(f).collect(),
        }
    }

    /// Cubic Lagrange interpolation through the four nearest samples.
    pub fn at(&self, t: f64) -> GridFunction {
        let len = self.samples.len();
        let s = t / self.dt;
        let k = s.round();
        if (s - k).abs() < 1e-10 && k >= 0.0 && (k as usize) < len {
            return self.samples[k as usize].clone();
        }
        if len < 4 {
            // linear fallback for very short series
            let i = (s.floor().max(0.0) as usize).min(len.saturating_sub(2));
            if len == 1 {
                return self.samples[0].clone();
            }
            let w = s - i as f64;
            return self.samples[i]
                .scale(1.0 - w)
                .axpy(w, &self.samples[i + 1])
                .expect("same grid");
        }
        let base = (s.floor() as isize - 1).clamp(0, len as isize - 4) as usize;
        let nodes: [f64; 4] = std::array::from_fn(|i| (base + i) as f64);
        let weights: [f64; 4] = std::array::from_fn(|i| {
            (0..4)
                .filter(|&j| j != i)
                .map(|j| (s - nodes[j]) / (nodes[i] - nodes[j]))
                .product()
        });
        let grid = *self.grid();
        let n = grid.n_points();
        let mut out = vec![0.0; n];
        for (w, f) in weights.iter().zip(&self.samples[base..base + 4]) {
            for (o, v) in out.iter_mut().zip(f.values()) {
                *o += w * v;
            }
        }
        GridFunction::from_raw(grid, out)
    }

    /// `max_k |a_k - b_k|` measured by `norm`.
    pub fn sup_distance(
        &self,
        other: &TimeSeries,
        norm: impl Fn(&GridFunction) -> Result<f64>,
    ) -> Result<f64> {
        if self.len() != other.len() {
            return Err(GchError::InvalidParameter(format!(
                "time series lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        let mut worst = 0.0_f64;
        for (a, b) in self.samples.iter().zip(&other.samples) {
            worst = worst.max(norm(&a.sub(b)?)?);
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportControls {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_cap: f64,
}

impl TransportControls {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            cfl_cap: crate::euler::TimeControls::DEFAULT_CFL,
        }
    }

    fn n_steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0 && self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(GchError::InvalidParameter(format!(
                "dt = {}, t_end = {}",
                self.dt, self.t_end
            )));
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.dt.max(self.t_end) {
            return Err(GchError::InvalidParameter(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

fn transport_tendency(f: &GridFunction, v: &GridFunction, g: &GridFunction) -> GridFunction {
    let grid = *f.grid();
    let f_x = derivative(f, 1);
    let raw: Vec<f64> = (0..grid.n_points())
        .map(|i| g.values()[i] - v.values()[i] * f_x.values()[i])
        .collect();
    dealias_spectrum(grid, spectrum(&GridFunction::from_raw(grid, raw)))
}

/// RK4 solution of `f_t + v f_x = g`, sampled every `dt`.
///
/// `velocity` and `source` must cover `[0, t_end]`; their values at stage
/// times come from [`TimeSeries::at`].
pub fn linear_transport_solve(
    velocity: &TimeSeries,
    source: &TimeSeries,
    init: &GridFunction,
    controls: &TransportControls,
) -> Result<TimeSeries> {
    let steps = controls.n_steps()?;
    let grid = *init.grid();
    grid.ensure_same(velocity.grid())?;
    grid.ensure_same(source.grid())?;
    for (name, ts) in [("velocity", velocity), ("source", source)] {
        if ts.t_end() < controls.t_end - 1e-9 * controls.dt && ts.len() > 1 {
            return Err(GchError::InvalidParameter(format!(
                "{name} series ends at {} before t_end = {}",
                ts.t_end(),
                controls.t_end
            )));
        }
    }
    let vmax = velocity
        .samples()
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.sup_norm()));
    let courant = controls.dt * vmax / grid.spacing();
    if courant > controls.cfl_cap {
        return Err(GchError::CflViolation {
            courant,
            cap: controls.cfl_cap,
        });
    }

    let dt = controls.dt;
    let mut out = Vec::with_capacity(steps + 1);
    let mut f = init.clone();
    out.push(f.clone());
    let coeffs = |t: f64| {
        let pick = |ts: &TimeSeries| {
            if ts.len() == 1 {
                ts.samples()[0].clone()
            } else {
                ts.at(t)
            }
        };
        (pick(velocity), pick(source))
    };
    let mut now = coeffs(0.0);
    for k in 0..steps {
        let t = k as f64 * dt;
        let mid = coeffs(t + 0.5 * dt);
        let next = coeffs(t + dt);
        let stage = |y: &GridFunction, k: &GridFunction, a: f64| y.axpy(a, k).expect("same grid");
        let k1 = transport_tendency(&f, &now.0, &now.1);
        let k2 = transport_tendency(&stage(&f, &k1, 0.5 * dt), &mid.0, &mid.1);
        let k3 = transport_tendency(&stage(&f, &k2, 0.5 * dt), &mid.0, &mid.1);
        let k4 = transport_tendency(&stage(&f, &k3, dt), &next.0, &next.1);
        let n = grid.n_points();
        let values = (0..n)
            .map(|i| {
                f.values()[i]
                    + dt / 6.0
                        * (k1.values()[i]
                            + 2.0 * k2.values()[i]
                            + 2.0 * k3.values()[i]
                            + k4.values()[i])
            })
            .collect();
        f = GridFunction::from_raw(grid, values);
        if !f.is_finite() {
            return Err(GchError::Blowup {
                t: t + dt,
                reason: "non-finite transport solution".into(),
                linf_u: f64::NAN,
                linf_ux: f64::NAN,
                linf_m: f64::NAN,
            });
        }
        out.push(f.clone());
        now = next;
    }
    TimeSeries::new(dt, out)
}

/// Iterates `m_0, ..., m_{n_max}` with their diagnostics.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub iterates: Vec<TimeSeries>,
    /// `diffs[n] = sup_t |m_{n+1} - m_n|_B`.
    pub diffs: Vec<f64>,
    /// `norms[n] = sup_t |m_n|_B`.
    pub norms: Vec<f64>,
    /// `ratios[n] = diffs[n] / diffs[n-1]` where the denominator is above
    /// the round-off floor.
    pub ratios: Vec<Option<f64>>,
    /// `U_n(t) = int_0^t |m_n|_B`, on the sample lattice.
    pub integrated_norms: Vec<Vec<f64>>,
    /// Besov norm of every sample of every iterate.
    pub norm_series: Vec<Vec<f64>>,
    pub initial_norm: f64,
    pub t_end: f64,
    /// Largest gap between the expanded and factored source evaluations.
    pub source_form_gap: f64,
    pub fitted_c: Option<f64>,
}

impl IterationTrace {
    pub fn n_max(&self) -> usize {
        self.iterates.len() - 1
    }

    /// Columns `n, sup_norm, diff, contraction_ratio`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "sup_norm", "diff", "contraction_ratio"])?;
        for n in 0..self.norms.len() {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record(&[
                n.to_string(),
                self.norms[n].to_string(),
                opt(self.diffs.get(n).copied()),
                opt(self.ratios.get(n).copied().flatten()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Relative floor below which a difference counts as round-off.
pub const DIFF_FLOOR_REL: f64 = 1e-13;

/// Norm level treated as divergence: ten times the Step-1 bound with `C = 1`.
pub fn divergence_limit(initial_norm: f64, t_end: f64) -> f64 {
    10.0 * initial_norm / (1.0 - 2.0 * initial_norm * t_end).max(0.1)
}

fn frozen_coefficients(m: &GridFunction) -> (GridFunction, GridFunction, f64) {
    let grid = *m.grid();
    let u = helmholtz_inverse(m);
    let uh = spectrum(&u);
    let u_x = synthesize(
        grid,
        uh.iter()
            .enumerate()
            .map(|(k, &c)| {
                if grid.is_nyquist_bin(k) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, grid.wavenumber(k))
                }
            })
            .collect(),
    );
    let g = rhs_m_form(m, &u, &u_x).expect("same grid");
    let g2 = rhs_m_form_factored(m, &u, &u_x).expect("same grid");
    let gap = g.sub(&g2).expect("same grid").sup_norm();
    (u_x.scale(-1.0), g, gap)
}

/// Runs the iteration from the time-constant iterate `m_0(t) = m0`.
pub fn iterate(
    m0: &GridFunction,
    n_max: usize,
    controls: &TransportControls,
    meter: &BesovMeter,
) -> Result<IterationTrace> {
    let steps = controls.n_steps()?;
    let bank = meter.bank();
    bank.grid().ensure_same(m0.grid())?;
    let a = meter.norm(m0)?;
    let limit = divergence_limit(a, controls.t_end);
    let floor = DIFF_FLOOR_REL * a.max(f64::MIN_POSITIVE);

    let norms_of = |ts: &TimeSeries| -> Result<Vec<f64>> {
        ts.samples().iter().map(|f| meter.norm(f)).collect()
    };
    let integrate = |v: &[f64]| {
        let mut acc = vec![0.0; v.len()];
        for k in 1..v.len() {
            acc[k] = acc[k - 1] + 0.5 * controls.dt * (v[k - 1] + v[k]);
        }
        acc
    };

    let first = TimeSeries::constant(m0.clone(), controls.dt, steps + 1)?;
    let ns = norms_of(&first)?;
    let mut trace = IterationTrace {
        norms: vec![ns.iter().cloned().fold(0.0, f64::max)],
        integrated_norms: vec![integrate(&ns)],
        norm_series: vec![ns],
        iterates: vec![first],
        diffs: vec![],
        ratios: vec![],
        initial_norm: a,
        t_end: controls.t_end,
        source_form_gap: 0.0,
        fitted_c: None,
    };

    for n in 0..n_max {
        let prev = &trace.iterates[n];
        let mut vel = Vec::with_capacity(prev.len());
        let mut src = Vec::with_capacity(prev.len());
        for m in prev.samples() {
            let (v, g, gap) = frozen_coefficients(m);
            trace.source_form_gap = trace.source_form_gap.max(gap);
            vel.push(v);
            src.push(g);
        }
        let vel = TimeSeries::new(controls.dt, vel)?;
        let src = TimeSeries::new(controls.dt, src)?;
        let init = low_cutoff(m0, n as i32 + 1, bank)?;
        let next = linear_transport_solve(&vel, &src, &init, controls)?;

        let ns = norms_of(&next)?;
        let sup = ns.iter().cloned().fold(0.0, f64::max);
        if sup > limit {
            return Err(GchError::Divergence {
                n: n + 1,
                norm: sup,
                limit,
            });
        }
        let diff = next.sup_distance(prev, |f| meter.norm(f))?;
        let ratio = trace
            .diffs
            .last()
            .filter(|&&d| d > floor)
            .map(|&d| diff / d);
        trace.diffs.push(diff);
        trace.ratios.push(ratio);
        trace.norms.push(sup);
        trace.integrated_norms.push(integrate(&ns));
        trace.norm_series.push(ns);
        trace.iterates.push(next);
    }
    Ok(trace)
}

/// Smallest `C >= 1` with `v <= C a / (1 - 2 C^2 a t)` at one sample.
pub fn point_constant(v: f64, a: f64, t: f64) -> f64 {
    if a == 0.0 {
        return if v == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let c = if t == 0.0 {
        v / a
    } else {
        // positive root of 2 v a t C^2 + a C - v = 0
        if v == 0.0 {
            0.0
        } else {
            2.0 * v / (a + (a * a + 8.0 * v * v * a * t).sqrt())
        }
    };
    c.max(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct AprioriReport {
    pub fitted_c: f64,
    /// `1 / (2 C^2 |m0|)`, the horizon allowed by the premise.
    pub premise_t_bound: f64,
    pub holds: bool,
}

/// Fits the smallest `C >= 1` such that every recorded `(n, t)` obeys
/// `|m_n(t)| <= C a / (1 - 2 C^2 a t)` and checks `2 C^2 a T < 1`.
pub fn apriori_bound_check(trace: &mut IterationTrace) -> Result<AprioriReport> {
    if trace.iterates.len() < 5 {
        return Err(GchError::BoundFit(format!(
            "need at least 5 iterates, have {}",
            trace.iterates.len()
        )));
    }
    let a = trace.initial_norm;
    let dt = trace.iterates[0].dt();
    let mut c = 1.0_f64;
    let mut worst = (0usize, 0.0_f64);
    for (n, series) in trace.norm_series.iter().enumerate() {
        for (k, &v) in series.iter().enumerate() {
            let ck = point_constant(v, a, k as f64 * dt);
            if ck > c {
                c = ck;
                worst = (n, k as f64 * dt);
            }
        }
    }
    if !c.is_finite() || 2.0 * c * c * a * trace.t_end >= 1.0 {
        return Err(GchError::BoundFit(format!(
            "C = {c} violates 2 C^2 |m0| T < 1 (|m0| = {a}, T = {}); binding sample n = {}, t = {}",
            trace.t_end, worst.0, worst.1
        )));
    }
    trace.fitted_c = Some(c);
    Ok(AprioriReport {
        fitted_c: c,
        premise_t_bound: if a == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (2.0 * c * c * a)
        },
        holds: true,
    })
}

pub const AMPLITUDE_DRIFT_TOL: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeStability {
    pub scales: Vec<f64>,
    pub fitted: Vec<f64>,
    /// `(max C - min C) / max C`.
    pub drift: f64,
    /// The largest per-run constant, valid for every run.
    pub common_c: f64,
    pub stable: bool,
}

/// Repeats the iteration on `scale * m0` for each scale and compares the
/// fitted constants.
pub fn amplitude_stability(
    m0: &GridFunction,
    scales: &[f64],
    n_max: usize,
    controls: &TransportControls,
    meter: &BesovMeter,
) -> Result<(Vec<IterationTrace>, AmplitudeStability)> {
    let mut traces = Vec::with_capacity(scales.len());
    let mut fitted = Vec::with_capacity(scales.len());
    for &s in scales {
        let mut tr = iterate(&m0.scale(s), n_max, controls, meter)?;
        fitted.push(apriori_bound_check(&mut tr)?.fitted_c);
        traces.push(tr);
    }
    let hi = fitted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = fitted.iter().cloned().fold(f64::INFINITY, f64::min);
    let drift = if fitted.is_empty() { 0.0 } else { (hi - lo) / hi };
    Ok((
        traces,
        AmplitudeStability {
            scales: scales.to_vec(),
            fitted,
            drift,
            common_c: hi.max(1.0),
            stable: drift <= AMPLITUDE_DRIFT_TOL,
        },
    ))
}
