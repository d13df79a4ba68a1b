//! The momentum form, the velocity form and the particle solver against each
//! other.

use super::{euler, line_plot};
use crate::error::Result;
use crate::euler::Form;
use crate::harness::config::RunConfig;
use crate::harness::report::{ExperimentReport, Output, VerdictEntry};
use crate::lagrange::{init_particles, simulate_lagrange, to_eulerian, LagrangeControls};
use crate::spectral::{resample, BesovMeter, GridFunction};

pub const DISTANCE_TOL: f64 = 1e-4;
pub const SLOPE_TOL: f64 = 1.9;
/// Pairs closer than this at every resolution are treated as converged.
pub const NOISE_FLOOR: f64 = 1e-10;

const PAIRS: [(usize, usize, &str); 3] = [
    (0, 1, "m_form-u_form"),
    (0, 2, "m_form-lagrange"),
    (1, 2, "u_form-lagrange"),
];

pub fn crosscheck(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("crosscheck", cfg);
    let n_ref = cfg.grid.n_points;
    let mut levels = cfg
        .experiment
        .refinements
        .clone()
        .unwrap_or_else(|| vec![n_ref / 4, n_ref / 2, n_ref]);
    levels.sort_unstable();
    levels.dedup();
    let fine = *levels.last().expect("at least one level");
    let m_fine = cfg.with_points(fine).initial_fields()?.m;

    // distances[level][pair]
    let mut distances: Vec<[f64; 3]> = Vec::new();
    for &n in &levels {
        let c = cfg.with_points(n);
        let grid = c.grid_spec()?;
        let meter = BesovMeter::critical(grid, cfg.besov.p)?;
        let m0 = if n == fine {
            m_fine.clone()
        } else {
            resample(&m_fine, grid)?
        };
        let controls = c.time_controls();
        let mut finals: Vec<GridFunction> = Vec::with_capacity(3);
        for form in [Form::Momentum, Form::Velocity] {
            match euler(&m0, &controls, form, &meter)? {
                Ok(t) => finals.push(t.last().fields.u.clone()),
                Err(why) => {
                    rep.push(VerdictEntry::inconclusive(&format!("run_N{n}"), why));
                    return Ok(rep);
                }
            }
        }
        let lc = LagrangeControls::new(controls.dt, controls.t_end).with_cfl_cap(controls.cfl_cap);
        let ens = init_particles(&m0, cfg.experiment.n_particles.unwrap_or(n))?;
        let run = simulate_lagrange(ens, &lc)?;
        if let Some(a) = &run.abort {
            rep.push(VerdictEntry::inconclusive(
                &format!("run_N{n}"),
                format!("particle solver aborted at t = {:.6}: {}", a.t, a.reason),
            ));
            return Ok(rep);
        }
        finals.push(to_eulerian(run.last(), grid)?.u);
        let mut d = [0.0; 3];
        for (slot, &(i, j, _)) in d.iter_mut().zip(PAIRS.iter()) {
            *slot = finals[i].sub(&finals[j])?.sup_norm();
        }
        distances.push(d);
        if n == fine {
            let rows: Vec<Vec<f64>> = (0..grid.n_points())
                .map(|k| {
                    vec![
                        grid.node(k),
                        finals[0].values()[k],
                        finals[1].values()[k],
                        finals[2].values()[k],
                    ]
                })
                .collect();
            out.table("final_u.csv", &["x", "u_m_form", "u_u_form", "u_lagrange"], &rows)?;
        }
    }

    let last = distances.last().expect("one level");
    let worst = last.iter().cloned().fold(0.0, f64::max);
    rep.push(VerdictEntry::below("max_pairwise_distance", worst, DISTANCE_TOL));
    for (p, &(_, _, name)) in PAIRS.iter().enumerate() {
        rep.fit(&format!("distance_{name}"), last[p]);
        if levels.len() < 2 {
            continue;
        }
        if distances.iter().any(|d| d[p] <= NOISE_FLOOR) {
            rep.notes.push(format!(
                "{name}: distance at the {NOISE_FLOOR:e} noise floor; no refinement slope"
            ));
            continue;
        }
        let slope = levels
            .windows(2)
            .zip(distances.windows(2))
            .map(|(n, d)| (d[0][p] / d[1][p]).log2() / (n[1] as f64 / n[0] as f64).log2())
            .fold(f64::INFINITY, f64::min);
        rep.push(VerdictEntry::at_least(&format!("slope_{name}"), slope, SLOPE_TOL));
    }
    let rows: Vec<Vec<f64>> = levels
        .iter()
        .zip(&distances)
        .map(|(&n, d)| vec![n as f64, d[0], d[1], d[2]])
        .collect();
    out.table(
        "crosscheck_distances.csv",
        &["N", "m_form-u_form", "m_form-lagrange", "u_form-lagrange"],
        &rows,
    )?;
    out.plot(line_plot("crosscheck_distances.csv", vec![2, 3, 4], "pairwise |u(T)| distances", true));
    Ok(rep)
}
