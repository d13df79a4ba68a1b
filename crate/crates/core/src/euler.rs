//! Method-of-lines pseudospectral solver in Eulerian variables.
//!
//! Both the momentum form and the velocity form are advanced with classical
//! RK4; every quadratic product is 2/3-dealiased before it re-enters the
//! state. Besides NaN and `|u_x|_inf` guards, the run tracks the Eulerian
//! compression budget `exp(-int_0^t max_x (u_xx)^+ dt)`, a lower bound for the
//! Jacobian `y_xi` of every characteristic.

use std::io::Write;

use log::warn;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GchError, Result};
use crate::model::{momentum, source_expanded, FieldPair};
use crate::spectral::{dealias_spectrum, spectrum, synthesize, BesovMeter, GridFunction, GridSpec};

/// Which variable the solver evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Momentum,
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeControls {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_cap: f64,
    /// Largest admissible `|u_x|_inf`.
    pub safety: f64,
    /// Output every this many base steps.
    pub output_every: usize,
    /// Abort once the compression budget falls below this value.
    pub jacobian_floor: Option<f64>,
    /// Existence-window heuristic `T_est = theta / |m0|`.
    pub existence_theta: f64,
}

impl TimeControls {
    pub const DEFAULT_CFL: f64 = 0.3;
    pub const DEFAULT_SAFETY: f64 = 1.0e3;
    pub const DEFAULT_THETA: f64 = 0.5;

    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            cfl_cap: Self::DEFAULT_CFL,
            safety: Self::DEFAULT_SAFETY,
            output_every: 1,
            jacobian_floor: Some(0.5),
            existence_theta: Self::DEFAULT_THETA,
        }
    }

    pub fn with_output_every(mut self, every: usize) -> Self {
        self.output_every = every;
        self
    }

    pub fn with_cfl_cap(mut self, cap: f64) -> Self {
        self.cfl_cap = cap;
        self
    }

    pub fn with_jacobian_floor(mut self, floor: Option<f64>) -> Self {
        self.jacobian_floor = floor;
        self
    }

    pub fn with_safety(mut self, safety: f64) -> Self {
        self.safety = safety;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(GchError::InvalidParameter(what));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end = {}", self.t_end));
        }
        if !(self.cfl_cap.is_finite() && self.cfl_cap > 0.0) {
            return bad(format!("cfl_cap = {}", self.cfl_cap));
        }
        if !(self.safety > 0.0) {
            return bad(format!("safety = {}", self.safety));
        }
        if self.output_every == 0 {
            return bad("output_every = 0".into());
        }
        Ok(())
    }

    /// `min(dt, cfl_cap h / max(|u_x|_inf, 1e-12))`.
    pub fn effective_dt(&self, grid: &GridSpec, linf_ux: f64) -> f64 {
        self.dt
            .min(self.cfl_cap * grid.spacing() / linf_ux.max(1e-12))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerState {
    pub t: f64,
    pub fields: FieldPair,
    pub step_count: usize,
}

impl EulerState {
    pub fn from_momentum(m0: GridFunction) -> Self {
        Self {
            t: 0.0,
            fields: FieldPair::from_momentum(m0),
            step_count: 0,
        }
    }
}

fn rk4(y: &GridFunction, dt: f64, rhs: impl Fn(&GridFunction) -> GridFunction) -> GridFunction {
    let grid = *y.grid();
    let n = y.len();
    let stage = |k: &GridFunction, a: f64| {
        GridFunction::from_raw(
            grid,
            (0..n).map(|i| y.values()[i] + a * k.values()[i]).collect(),
        )
    };
    let k1 = rhs(y);
    let k2 = rhs(&stage(&k1, 0.5 * dt));
    let k3 = rhs(&stage(&k2, 0.5 * dt));
    let k4 = rhs(&stage(&k3, dt));
    let values = (0..n)
        .map(|i| {
            y.values()[i]
                + dt / 6.0
                    * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i])
        })
        .collect();
    GridFunction::from_raw(grid, values)
}

/// `m_t = u_x m_x + F(m, u, u_x)`, dealiased.
pub fn momentum_tendency(m: &GridFunction) -> GridFunction {
    let grid = *m.grid();
    let mh = spectrum(m);
    let uh: Vec<Complex64> = mh
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let xi = grid.wavenumber(k);
            c / (1.0 + xi * xi)
        })
        .collect();
    let d = |coeffs: &[Complex64]| {
        synthesize(
            grid,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    if grid.is_nyquist_bin(k) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * Complex64::new(0.0, grid.wavenumber(k))
                    }
                })
                .collect(),
        )
    };
    let u = synthesize(grid, uh.clone());
    let u_x = d(&uh);
    let m_x = d(&mh);
    let raw: Vec<Complex64> = (0..grid.n_points())
        .map(|i| {
            let (mv, uv, uxv, mxv) = (m.values()[i], u.values()[i], u_x.values()[i], m_x.values()[i]);
            Complex64::new(uxv * mxv + source_expanded(mv, uv, uxv), 0.0)
        })
        .collect();
    dealiased(grid, raw)
}

/// `u_t = u_x^2 + G * (u_x^2 + u_xx^2/2) - u_x^2/2`, dealiased.
pub fn velocity_tendency(u: &GridFunction) -> GridFunction {
    let grid = *u.grid();
    let uh = spectrum(u);
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
    let u_xx = synthesize(
        grid,
        uh.iter()
            .enumerate()
            .map(|(k, &c)| {
                let xi = grid.wavenumber(k);
                c * (-xi * xi)
            })
            .collect(),
    );
    let n = grid.n_points();
    let mut local = Vec::with_capacity(n);
    let mut nonlocal = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (u_x.values()[i], u_xx.values()[i]);
        local.push(0.5 * a * a);
        nonlocal.push(a * a + 0.5 * b * b);
    }
    let lh = spectrum(&GridFunction::from_raw(grid, local));
    let nh = spectrum(&GridFunction::from_raw(grid, nonlocal));
    let total: Vec<Complex64> = (0..n)
        .map(|k| {
            let xi = grid.wavenumber(k);
            lh[k] + nh[k] / (1.0 + xi * xi)
        })
        .collect();
    dealias_spectrum(grid, total)
}

fn dealiased(grid: GridSpec, raw: Vec<Complex64>) -> GridFunction {
    let f = GridFunction::from_raw(grid, raw.into_iter().map(|c| c.re).collect());
    dealias_spectrum(grid, spectrum(&f))
}

fn blowup(t: f64, reason: impl Into<String>, fields: Option<&FieldPair>) -> GchError {
    let (linf_u, linf_ux, linf_m) = fields
        .map(|f| (f.u.sup_norm(), f.u_x.sup_norm(), f.m.sup_norm()))
        .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    GchError::Blowup {
        t,
        reason: reason.into(),
        linf_u,
        linf_ux,
        linf_m,
    }
}

fn advance(state: &EulerState, h: f64, form: Form, controls: &TimeControls) -> Result<EulerState> {
    let fields = match form {
        Form::Momentum => {
            let m = rk4(&state.fields.m, h, momentum_tendency);
            if !m.is_finite() {
                return Err(blowup(state.t + h, "non-finite momentum", None));
            }
            FieldPair::from_momentum(m)
        }
        Form::Velocity => {
            let u = rk4(&state.fields.u, h, velocity_tendency);
            if !u.is_finite() {
                return Err(blowup(state.t + h, "non-finite velocity", None));
            }
            FieldPair::from_velocity(u)
        }
    };
    let t = state.t + h;
    if !(fields.u_x.is_finite() && fields.m.is_finite()) {
        return Err(blowup(t, "non-finite derived fields", None));
    }
    if fields.u_x.sup_norm() > controls.safety {
        return Err(blowup(t, "|u_x|_inf above safety limit", Some(&fields)));
    }
    Ok(EulerState {
        t,
        fields,
        step_count: state.step_count + 1,
    })
}

fn step_with(state: &EulerState, controls: &TimeControls, form: Form) -> Result<EulerState> {
    controls.validate()?;
    let h = controls.effective_dt(state.fields.grid(), state.fields.u_x.sup_norm());
    advance(state, h, form, controls)
}

/// One RK4 step of the momentum form with the effective step size.
pub fn step_m_form(state: &EulerState, controls: &TimeControls) -> Result<EulerState> {
    step_with(state, controls, Form::Momentum)
}

/// One RK4 step of the velocity form with the effective step size.
pub fn step_u_form(state: &EulerState, controls: &TimeControls) -> Result<EulerState> {
    step_with(state, controls, Form::Velocity)
}

/// Quantities recorded at every output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monitor {
    pub t: f64,
    pub besov_m: f64,
    pub linf_u: f64,
    pub linf_ux: f64,
    pub mass_m: f64,
    /// `|u_x|_{L^2}^2`
    pub l2_ux_sq: f64,
    /// `|u_xx|_{L^2}^2`
    pub l2_uxx_sq: f64,
    /// Compression budget `exp(-int max (u_xx)^+ dt)`.
    pub jacobian_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbortInfo {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub form: Form,
    pub snapshots: Vec<EulerState>,
    pub monitors: Vec<Monitor>,
    pub abort: Option<AbortInfo>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> &EulerState {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }

    pub fn into_result(self) -> Result<Self> {
        match &self.abort {
            None => Ok(self),
            Some(a) => {
                let last = self.last();
                Err(blowup(a.t, a.reason.clone(), Some(&last.fields)))
            }
        }
    }

    /// Columns `t, besov_m, linf_u, linf_ux, mass_m`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "besov_m", "linf_u", "linf_ux", "mass_m"])?;
        for r in &self.monitors {
            w.write_record(&[
                r.t.to_string(),
                r.besov_m.to_string(),
                r.linf_u.to_string(),
                r.linf_ux.to_string(),
                r.mass_m.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn monitor(state: &EulerState, meter: &BesovMeter, jacobian_bound: f64) -> Result<Monitor> {
    let f = &state.fields;
    let h = f.grid().spacing();
    Ok(Monitor {
        t: state.t,
        besov_m: meter.norm(&f.m)?,
        linf_u: f.u.sup_norm(),
        linf_ux: f.u_x.sup_norm(),
        mass_m: f.m.integral(),
        l2_ux_sq: h * f.u_x.values().iter().map(|v| v * v).sum::<f64>(),
        l2_uxx_sq: h * f.u_xx.values().iter().map(|v| v * v).sum::<f64>(),
        jacobian_bound,
    })
}

fn positive_part_max(f: &GridFunction) -> f64 {
    f.values().iter().fold(0.0_f64, |a, &v| a.max(v))
}

/// Integrates from `m0` to `controls.t_end`, recording a snapshot every
/// `output_every` base steps. Stepping failures end the run early and are
/// reported in [`Trajectory::abort`].
pub fn simulate(
    m0: &GridFunction,
    controls: &TimeControls,
    form: Form,
    meter: &BesovMeter,
) -> Result<Trajectory> {
    controls.validate()?;
    meter.bank().grid().ensure_same(m0.grid())?;
    if !m0.is_finite() {
        return Err(GchError::InvalidParameter("non-finite initial momentum".into()));
    }
    let mut warnings = Vec::new();
    let norm0 = meter.norm(m0)?;
    if norm0 > 0.0 {
        let t_est = controls.existence_theta / norm0;
        if controls.t_end > t_est {
            let msg = format!(
                "t_end = {} exceeds the heuristic existence window {:.4} (theta = {}, |m0| = {:.4})",
                controls.t_end, t_est, controls.existence_theta, norm0
            );
            warn!("{msg}");
            warnings.push(msg);
        }
    }

    let mut state = EulerState::from_momentum(m0.clone());
    let mut budget = 0.0_f64;
    let mut compress = positive_part_max(&state.fields.u_xx);
    let mut snapshots = vec![state.clone()];
    let mut monitors = vec![monitor(&state, meter, 1.0)?];
    let mut abort = None;

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
        while state.t < target {
            let mut h = controls
                .effective_dt(state.fields.grid(), state.fields.u_x.sup_norm())
                .min(target - state.t);
            if target - state.t - h < 1e-9 * controls.dt {
                h = target - state.t;
            }
            match advance(&state, h, form, controls) {
                Ok(next) => state = next,
                Err(e) => {
                    abort = Some(AbortInfo {
                        t: state.t + h,
                        reason: e.to_string(),
                    });
                    break 'outer;
                }
            }
            let c = positive_part_max(&state.fields.u_xx);
            budget += 0.5 * h * (compress + c);
            compress = c;
            if let Some(floor) = controls.jacobian_floor {
                if (-budget).exp() < floor {
                    abort = Some(AbortInfo {
                        t: state.t,
                        reason: format!(
                            "compression budget exp(-int max u_xx^+) = {:.4} below {floor}",
                            (-budget).exp()
                        ),
                    });
                    break 'outer;
                }
            }
        }
        state.t = target;
        if form == Form::Momentum {
            // m <- momentum(helmholtz_inverse(m)) keeps the cached pair consistent
            let m = momentum(&state.fields.u);
            state.fields = FieldPair::from_momentum(m);
        }
        snapshots.push(state.clone());
        monitors.push(monitor(&state, meter, (-budget).exp())?);
    }
    Ok(Trajectory {
        form,
        snapshots,
        monitors,
        abort,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassBalanceRow {
    pub t: f64,
    /// Centered difference of `int m dx`.
    pub lhs: f64,
    /// `3/2 |u_x|^2 + 1/2 |u_xx|^2`.
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassBalanceReport {
    pub rows: Vec<MassBalanceRow>,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

pub const MASS_BALANCE_TOL: f64 = 1e-5;
pub const MASS_BALANCE_MAX_CADENCE: f64 = 1e-2;

/// Checks `d/dt int m dx = 3/2 |u_x|_2^2 + 1/2 |u_xx|_2^2` along a trajectory.
///
/// Integrating the momentum equation over a period, `u_x m_x` contributes
/// `|u_x|^2 + |u_xx|^2` and the source contributes `|u_x|^2/2 - |u_xx|^2/2`
/// (using `m - u = -u_xx`). The residual is relative to `max rhs`, or absolute
/// when the right side vanishes identically.
pub fn mass_balance_check(traj: &Trajectory) -> MassBalanceReport {
    let mon = &traj.monitors;
    let tolerance = MASS_BALANCE_TOL;
    let cadence_ok = mon
        .windows(2)
        .all(|w| w[1].t - w[0].t <= MASS_BALANCE_MAX_CADENCE * (1.0 + 1e-9));
    if mon.len() < 3 || !cadence_ok {
        return MassBalanceReport {
            rows: vec![],
            residual: f64::NAN,
            tolerance,
            verdict: Verdict::Inconclusive,
        };
    }
    let rows: Vec<MassBalanceRow> = mon
        .windows(3)
        .map(|w| {
            let (h1, h2) = (w[1].t - w[0].t, w[2].t - w[1].t);
            let lhs = (h1 * h1 * (w[2].mass_m - w[1].mass_m)
                + h2 * h2 * (w[1].mass_m - w[0].mass_m))
                / (h1 * h2 * (h1 + h2));
            MassBalanceRow {
                t: w[1].t,
                lhs,
                rhs: 1.5 * w[1].l2_ux_sq + 0.5 * w[1].l2_uxx_sq,
            }
        })
        .collect();
    let scale = rows.iter().fold(0.0_f64, |a, r| a.max(r.rhs.abs()));
    let worst = rows.iter().fold(0.0_f64, |a, r| a.max((r.lhs - r.rhs).abs()));
    let residual = if scale > 0.0 { worst / scale } else { worst };
    MassBalanceReport {
        rows,
        residual,
        tolerance,
        verdict: if residual < tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}

/// Observed order from three solutions at steps `dt, dt/2, dt/4`.
pub fn richardson_order(coarse: &GridFunction, mid: &GridFunction, fine: &GridFunction) -> f64 {
    let e1 = coarse.sub(mid).map(|d| d.sup_norm()).unwrap_or(f64::NAN);
    let e2 = mid.sub(fine).map(|d| d.sup_norm()).unwrap_or(f64::NAN);
    (e1 / e2).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meter(g: GridSpec) -> BesovMeter {
        BesovMeter::critical(g, 2.0).unwrap()
    }

    #[test]
    fn zero_and_constants_are_exact_equilibria() {
        let g = GridSpec::new(20.0, 128).unwrap();
        for c in [0.0, 0.37] {
            let m0 = GridFunction::constant(g, c);
            let mut st = EulerState::from_momentum(m0.clone());
            let ctl = TimeControls::new(1e-2, 10.0);
            for _ in 0..1000 {
                st = step_m_form(&st, &ctl).unwrap();
            }
            assert!(st.fields.m.sub(&m0).unwrap().sup_norm() <= 1e-12);
            let mut su = EulerState::from_momentum(m0.clone());
            for _ in 0..1000 {
                su = step_u_form(&su, &ctl).unwrap();
            }
            assert!(su.fields.u.sub(&m0).unwrap().sup_norm() <= 1e-12);
        }
    }

    #[test]
    fn invalid_controls_rejected() {
        let mut c = TimeControls::new(0.0, 1.0);
        assert!(c.validate().is_err());
        c.dt = 1e-3;
        c.output_every = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn effective_dt_obeys_cfl() {
        let g = GridSpec::new(20.0, 64).unwrap();
        let c = TimeControls::new(1.0, 1.0);
        let h = g.spacing();
        assert!((c.effective_dt(&g, 2.0) - 0.3 * h / 2.0).abs() < 1e-15);
        assert_eq!(c.effective_dt(&g, 0.0), 1.0_f64.min(0.3 * h / 1e-12));
    }

    #[test]
    fn simulate_zero_stays_zero() {
        let g = GridSpec::new(20.0, 64).unwrap();
        let tr = simulate(
            &GridFunction::zeros(g),
            &TimeControls::new(1e-2, 0.1),
            Form::Momentum,
            &meter(g),
        )
        .unwrap();
        assert!(tr.completed());
        assert_eq!(tr.snapshots.len(), 11);
        for s in &tr.snapshots {
            assert_eq!(s.fields.m.sup_norm(), 0.0);
        }
        let rep = mass_balance_check(&tr);
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn coarse_cadence_is_inconclusive() {
        let g = GridSpec::new(20.0, 64).unwrap();
        let tr = simulate(
            &GridFunction::constant(g, 0.1),
            &TimeControls::new(5e-2, 0.2),
            Form::Momentum,
            &meter(g),
        )
        .unwrap();
        assert_eq!(mass_balance_check(&tr).verdict, Verdict::Inconclusive);
    }
}
