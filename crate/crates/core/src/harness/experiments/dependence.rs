//! Convergence of solutions from the truncated data `S_n m0` to the solution
//! from `m0`.

use super::{euler, line_plot, sup_over_snapshots};
use crate::error::Result;
use crate::euler::Form;
use crate::harness::config::RunConfig;
use crate::harness::report::{ExperimentReport, Output, VerdictEntry};
use crate::spectral::low_cutoff;

/// Data differences below this fraction of `|m0|` are round-off.
pub const DATA_FLOOR_REL: f64 = 1e-12;
/// Solution differences from round-off data must stay below this fraction.
pub const SOLUTION_FLOOR_REL: f64 = 1e-10;
pub const K_DRIFT_TOL: f64 = 0.2;
/// The drift of `K` is judged on approximants with `n` at least this.
pub const K_DRIFT_FROM: i32 = 3;

pub fn continuous_dependence(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("continuous_dependence", cfg);
    let meter = cfg.meter()?;
    let controls = cfg.time_controls();
    let cutoffs = cfg
        .experiment
        .cutoffs
        .clone()
        .unwrap_or_else(|| (2..=7).collect());
    let seeds = cfg
        .experiment
        .seeds
        .clone()
        .unwrap_or_else(|| vec![cfg.run.seed]);

    let mut passed = 0;
    for &seed in &seeds {
        let m_inf = cfg.initial_fields_with_seed(seed)?.m;
        let a = meter.norm(&m_inf)?;
        let tag = format!("seed{seed}");
        let t_inf = match euler(&m_inf, &controls, Form::Momentum, &meter)? {
            Ok(t) => t,
            Err(why) => {
                rep.push(VerdictEntry::inconclusive(&format!("{tag}_target"), why));
                continue;
            }
        };
        let mut rows = Vec::new();
        let mut aborted = None;
        for &n in &cutoffs {
            let m_n = low_cutoff(&m_inf, n, meter.bank())?;
            let d = meter.norm(&m_n.sub(&m_inf)?)?;
            let e = match euler(&m_n, &controls, Form::Momentum, &meter)? {
                Ok(t_n) => sup_over_snapshots(&t_n, &t_inf, |x, y| meter.norm(&x.m.sub(&y.m)?))?,
                Err(why) => {
                    aborted = Some(why);
                    break;
                }
            };
            rows.push((n, d, e));
        }
        if let Some(why) = aborted {
            rep.push(VerdictEntry::inconclusive(&format!("{tag}_approximant"), why));
            continue;
        }

        let d_floor = DATA_FLOOR_REL * a;
        let e_floor = SOLUTION_FLOOR_REL * a;
        let resolved: Vec<_> = rows.iter().filter(|r| r.1 > d_floor).cloned().collect();
        let degenerate: Vec<_> = rows.iter().filter(|r| r.1 <= d_floor).cloned().collect();
        let decreasing = resolved.windows(2).all(|w| w[1].2 < w[0].2);
        let floor_ok = degenerate.iter().all(|r| r.2 <= e_floor);
        let monotone = VerdictEntry::flag(
            &format!("{tag}_E_decreasing"),
            decreasing && floor_ok,
            format!(
                "{} resolved approximants, {} at the round-off floor",
                resolved.len(),
                degenerate.len()
            ),
        );

        let ks: Vec<f64> = resolved
            .iter()
            .filter(|r| r.0 >= K_DRIFT_FROM)
            .map(|r| r.2 / r.1)
            .collect();
        let k_all = resolved.iter().map(|r| r.2 / r.1).fold(0.0_f64, f64::max);
        let drift = if ks.is_empty() {
            0.0
        } else {
            let hi = ks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = ks.iter().cloned().fold(f64::INFINITY, f64::min);
            (hi - lo) / hi
        };
        let drift_v = VerdictEntry::at_most(&format!("{tag}_K_drift"), drift, K_DRIFT_TOL)
            .with_detail(format!("{} approximant(s) with n >= {K_DRIFT_FROM}", ks.len()));
        if monotone.passed() && drift_v.passed() {
            passed += 1;
        }
        rep.push(monotone);
        rep.push(drift_v);
        rep.fit(&format!("K_{tag}"), k_all);

        let file = format!("dependence_{tag}.csv");
        let table: Vec<Vec<f64>> = rows
            .iter()
            .map(|&(n, d, e)| vec![n as f64, d, e, if d > d_floor { e / d } else { f64::NAN }])
            .collect();
        out.table(&file, &["n", "D", "E", "K"], &table)?;
        out.plot(line_plot(&file, vec![2, 3], &format!("E_n and D_n, {tag}"), true));
    }
    rep.push(
        VerdictEntry::flag(
            "seeds_passed",
            passed == seeds.len(),
            format!("{passed}/{}", seeds.len()),
        ),
    );
    Ok(rep)
}
