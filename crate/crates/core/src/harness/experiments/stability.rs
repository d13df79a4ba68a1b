//! Lipschitz dependence of `(u, u_x)` in `L^inf` on the data in the critical
//! Besov norm.

use super::{euler, line_plot, sup_over_snapshots};
use crate::error::{GchError, Result};
use crate::euler::Form;
use crate::harness::config::RunConfig;
use crate::harness::report::{ExperimentReport, Output, VerdictEntry};
use crate::spectral::{BesovMeter, GridFunction, GridSpec};

pub const MAX_BASE_NORM: f64 = 0.5;
pub const SPREAD_TOL: f64 = 2.0;

/// The fixed smooth perturbation direction of the momentum.
pub fn perturbation(grid: GridSpec) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        let z = x - 1.0;
        (1.0 + 0.5 * z) * (-0.5 * z * z).exp()
    })
}

pub fn stability(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("stability", cfg);
    let grid = cfg.grid_spec()?;
    let meter = cfg.meter()?;
    let base = cfg.initial_fields()?;
    let a = meter.norm(&base.m)?;
    if a > MAX_BASE_NORM {
        return Err(GchError::Config(format!(
            "stability needs |m0| <= {MAX_BASE_NORM}, got {a}"
        )));
    }
    let deltas = cfg
        .experiment
        .deltas
        .clone()
        .unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]);
    let ps = cfg
        .experiment
        .p_values
        .clone()
        .unwrap_or_else(|| vec![1.0, 2.0, 4.0]);
    let phi = perturbation(grid);
    let controls = cfg.time_controls();

    let t1 = match euler(&base.m, &controls, Form::Momentum, &meter)? {
        Ok(t) => t,
        Err(why) => {
            rep.push(VerdictEntry::inconclusive("base_run", why));
            return Ok(rep);
        }
    };
    let mut numerators = Vec::with_capacity(deltas.len());
    for &d in &deltas {
        if d == 0.0 {
            numerators.push(0.0);
            continue;
        }
        let m2 = base.m.axpy(d, &phi)?;
        let t2 = match euler(&m2, &controls, Form::Momentum, &meter)? {
            Ok(t) => t,
            Err(why) => {
                rep.push(VerdictEntry::inconclusive(&format!("run_delta_{d:e}"), why));
                return Ok(rep);
            }
        };
        numerators.push(sup_over_snapshots(&t1, &t2, |x, y| {
            Ok(x.u.sub(&y.u)?.sup_norm() + x.u_x.sub(&y.u_x)?.sup_norm())
        })?);
    }

    let mut rows = Vec::new();
    for &p in &ps {
        let meter_p = BesovMeter::critical(grid, p)?;
        let mut rs = Vec::new();
        for (&d, &num) in deltas.iter().zip(&numerators) {
            let r = if d == 0.0 {
                0.0
            } else {
                num / meter_p.norm(&phi.scale(d))?
            };
            rows.push(vec![p, d, r]);
            if d != 0.0 {
                rs.push(r);
            }
        }
        let hi = rs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = rs.iter().cloned().fold(f64::INFINITY, f64::min);
        if rs.is_empty() {
            rep.push(VerdictEntry::flag(&format!("R_spread_p{p}"), true, "no nonzero delta"));
        } else {
            rep.push(
                VerdictEntry::at_most(&format!("R_spread_p{p}"), hi / lo, SPREAD_TOL)
                    .with_detail(format!("R in [{lo:.6}, {hi:.6}]")),
            );
            rep.fit(&format!("R_max_p{p}"), hi);
        }
    }
    out.table("stability_R.csv", &["p", "delta", "R"], &rows)?;
    out.plot(line_plot("stability_R.csv", vec![3], "R(delta)", false));
    out.write("trajectory_base.csv", |w| t1.write_csv(w))?;
    Ok(rep)
}
