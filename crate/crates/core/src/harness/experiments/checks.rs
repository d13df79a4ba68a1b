//! Single-purpose checks: the Jacobian contract, the mass identity and the
//! temporal order of the three solvers.

use std::io::Write as _;

use super::line_plot;
use crate::error::{GchError, Result};
use crate::euler::{mass_balance_check, richardson_order, simulate, Form, Verdict};
use crate::harness::config::RunConfig;
use crate::harness::report::{ExperimentReport, Output, VerdictEntry};
use crate::lagrange::{
    init_particles, simulate_lagrange, velocity_distance, LagrangeControls, BREACH_THRESHOLD,
};
use crate::model::{make_initial_data, InitialDataSpec};
use crate::spectral::GridFunction;

pub const BREACH_TIME_TOL: f64 = 0.1;
pub const ORDER_TOL: f64 = 3.8;

fn particles(cfg: &RunConfig, m0: &GridFunction) -> Result<crate::lagrange::ParticleEnsemble> {
    init_particles(m0, cfg.experiment.n_particles.unwrap_or(cfg.grid.n_points))
}

pub fn jacobian(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("jacobian", cfg);
    let grid = cfg.grid_spec()?;
    let meter = cfg.meter()?;
    let t = &cfg.time;
    let lc = LagrangeControls::new(t.dt, t.t_end).with_cfl_cap(t.cfl_cap);

    let m0 = cfg.initial_fields()?.m;
    let run = simulate_lagrange(particles(cfg, &m0)?, &lc)?;
    if let Some(a) = &run.abort {
        rep.push(VerdictEntry::inconclusive("reference_min_yxi", a.reason.clone()));
    } else {
        rep.push(VerdictEntry::at_least(
            "reference_min_yxi",
            run.report.min_yxi,
            BREACH_THRESHOLD,
        ));
    }
    let rows: Vec<Vec<f64>> = run.history.iter().map(|&(t, v)| vec![t, v]).collect();
    out.table("min_yxi_reference.csv", &["t", "min_yxi"], &rows)?;
    let json = serde_json::to_string_pretty(&run.report)? + "\n";
    out.write("breaking_reference.json", |w| Ok(w.write_all(json.as_bytes())?))?;

    let amp = cfg.experiment.steep_amplitude.unwrap_or(3.0);
    let t_steep = cfg.experiment.steep_t_end.unwrap_or(2.0);
    let steep = make_initial_data(
        &InitialDataSpec::SmoothedPeakon {
            amplitude: amp,
            smoothing: None,
            center: 0.0,
        },
        grid,
    )?
    .m;
    let lc = LagrangeControls::new(t.dt, t_steep).with_cfl_cap(t.cfl_cap);
    let lrun = simulate_lagrange(particles(cfg, &steep)?, &lc)?;
    let mut tc = cfg.time_controls();
    tc.t_end = t_steep;
    if tc.jacobian_floor.is_none() {
        tc = tc.with_jacobian_floor(Some(BREACH_THRESHOLD));
    }
    let etr = simulate(&steep, &tc, Form::Momentum, &meter)?;
    let rows: Vec<Vec<f64>> = lrun.history.iter().map(|&(t, v)| vec![t, v]).collect();
    out.table("min_yxi_steep.csv", &["t", "min_yxi"], &rows)?;
    out.write("trajectory_steep.csv", |w| etr.write_csv(w))?;
    out.plot(line_plot("min_yxi_steep.csv", vec![2], "min y_xi, steep data", false));
    let json = serde_json::to_string_pretty(&lrun.report)? + "\n";
    out.write("breaking_steep.json", |w| Ok(w.write_all(json.as_bytes())?))?;

    rep.push(VerdictEntry::flag(
        "steep_breach_flagged",
        lrun.report.breached,
        format!("min y_xi = {:.4}", lrun.report.min_yxi),
    ));
    match (lrun.report.t_breach, &etr.abort) {
        (Some(tl), Some(a)) => {
            rep.fit("t_breach_lagrange", tl);
            rep.fit("t_abort_euler", a.t);
            rep.push(
                VerdictEntry::at_most("breach_time_agreement", (tl - a.t).abs() / a.t, BREACH_TIME_TOL)
                    .with_detail(a.reason.clone()),
            );
        }
        (tl, abort) => rep.push(VerdictEntry::flag(
            "breach_time_agreement",
            false,
            format!("breach at {tl:?}, Eulerian abort {:?}", abort.as_ref().map(|a| a.t)),
        )),
    }
    Ok(rep)
}

pub fn mass_balance(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("mass_balance", cfg);
    let grid = cfg.grid_spec()?;
    let meter = cfg.meter()?;
    let controls = cfg.time_controls();
    let m0 = cfg.initial_fields()?.m;
    let tr = simulate(&m0, &controls, Form::Momentum, &meter)?;
    let r = mass_balance_check(&tr);
    match (r.verdict, &tr.abort) {
        (_, Some(a)) => rep.push(VerdictEntry::inconclusive("residual", a.reason.clone())),
        (Verdict::Inconclusive, _) => rep.push(VerdictEntry::inconclusive(
            "residual",
            "output cadence too coarse for centered differences",
        )),
        _ => rep.push(VerdictEntry::below("residual", r.residual, r.tolerance)),
    }
    let rows: Vec<Vec<f64>> = r.rows.iter().map(|x| vec![x.t, x.lhs, x.rhs]).collect();
    out.table("mass_balance.csv", &["t", "dmass_dt", "production"], &rows)?;
    out.plot(line_plot("mass_balance.csv", vec![2, 3], "d/dt int m vs production", false));

    let mut short = controls;
    short.t_end = (100.0 * controls.dt).min(controls.t_end);
    for (name, m) in [
        ("constant_residual", GridFunction::constant(grid, 0.3)),
        ("zero_residual", GridFunction::zeros(grid)),
    ] {
        let tr = simulate(&m, &short, Form::Momentum, &meter)?;
        let r = mass_balance_check(&tr);
        if r.verdict == Verdict::Inconclusive {
            rep.push(VerdictEntry::inconclusive(name, "cadence too coarse"));
        } else {
            rep.push(VerdictEntry::at_most(name, r.residual, 0.0));
        }
    }
    Ok(rep)
}

pub fn convergence(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("convergence", cfg);
    let meter = cfg.meter()?;
    let m0 = cfg.initial_fields()?.m;
    let dts = cfg
        .experiment
        .dt_sequence
        .clone()
        .unwrap_or_else(|| vec![0.1, 0.05, 0.025]);
    if dts.len() != 3 {
        return Err(GchError::Config(format!(
            "experiment.dt_sequence needs three steps, got {}",
            dts.len()
        )));
    }
    let base = cfg.time_controls();
    let mut table = vec![vec![0.0; 4]; 2];
    for (col, form) in [(1, Form::Momentum), (2, Form::Velocity)] {
        let mut u = Vec::new();
        for &dt in &dts {
            let mut c = base;
            c.dt = dt;
            let tr = simulate(&m0, &c, form, &meter)?;
            if let Some(a) = &tr.abort {
                rep.push(VerdictEntry::inconclusive(&format!("order_{form:?}"), a.reason.clone()));
                return Ok(rep);
            }
            u.push(tr.last().fields.u.clone());
        }
        let e1 = u[0].sub(&u[1])?.sup_norm();
        let e2 = u[1].sub(&u[2])?.sup_norm();
        table[0][col] = e1;
        table[1][col] = e2;
        let name = match form {
            Form::Momentum => "order_m_form",
            Form::Velocity => "order_u_form",
        };
        rep.push(VerdictEntry::at_least(name, richardson_order(&u[0], &u[1], &u[2]), ORDER_TOL));
    }
    let mut ens = Vec::new();
    for &dt in &dts {
        let lc = LagrangeControls::new(dt, base.t_end).with_cfl_cap(base.cfl_cap);
        let run = simulate_lagrange(particles(cfg, &m0)?, &lc)?;
        if let Some(a) = &run.abort {
            rep.push(VerdictEntry::inconclusive("order_lagrange", a.reason.clone()));
            return Ok(rep);
        }
        ens.push(run.last().clone());
    }
    let e1 = velocity_distance(&ens[0], &ens[1])?;
    let e2 = velocity_distance(&ens[1], &ens[2])?;
    table[0][3] = e1;
    table[1][3] = e2;
    rep.push(VerdictEntry::at_least("order_lagrange", (e1 / e2).log2(), ORDER_TOL));
    table[0][0] = dts[0];
    table[1][0] = dts[1];
    out.table("richardson.csv", &["dt", "m_form", "u_form", "lagrange"], &table)?;
    out.plot(line_plot("richardson.csv", vec![2, 3, 4], "successive differences", true));
    Ok(rep)
}
