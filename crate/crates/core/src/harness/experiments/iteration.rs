use std::io::Write as _;

use super::{euler, line_plot};
use crate::error::{GchError, Result};
use crate::euler::{Form, TimeControls};
use crate::friedrichs::{apriori_bound_check, iterate, TransportControls, AMPLITUDE_DRIFT_TOL};
use crate::harness::config::RunConfig;
use crate::harness::report::{ExperimentReport, Output, VerdictEntry};

pub const LIMIT_TOL: f64 = 1e-5;
/// Contraction is judged from this iterate on.
pub const CONTRACTION_FROM: usize = 3;

pub fn iteration(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("iteration", cfg);
    let meter = cfg.meter()?;
    let m0 = cfg.initial_fields()?.m;
    let n_max = cfg.experiment.n_max.unwrap_or(12);
    let scales = cfg
        .experiment
        .amplitudes
        .clone()
        .unwrap_or_else(|| vec![1.0, 0.5, 0.25]);
    let controls = TransportControls {
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        cfl_cap: cfg.time.cfl_cap,
    };

    let mut fitted = Vec::new();
    let mut fits_json = Vec::new();
    let mut worst_ratio = 0.0_f64;
    for (idx, &s) in scales.iter().enumerate() {
        let tag = format!("a{idx}");
        let data = m0.scale(s);
        let mut trace = match iterate(&data, n_max, &controls, &meter) {
            Ok(t) => t,
            Err(e @ GchError::Divergence { .. }) => {
                rep.push(VerdictEntry::flag(&format!("{tag}_converges"), false, e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        for (n, r) in trace.ratios.iter().enumerate() {
            if let Some(r) = r {
                if n >= CONTRACTION_FROM {
                    worst_ratio = worst_ratio.max(*r);
                }
            }
        }
        match apriori_bound_check(&mut trace) {
            Ok(fit) => {
                fitted.push(fit.fitted_c);
                rep.fit(&format!("C_{tag}"), fit.fitted_c);
                fits_json.push(serde_json::json!({
                    "scale": s,
                    "initial_norm": trace.initial_norm,
                    "fitted_C": fit.fitted_c,
                    "premise_T_bound": fit.premise_t_bound,
                }));
            }
            Err(e) => rep.push(VerdictEntry::flag(&format!("{tag}_apriori_fit"), false, e.to_string())),
        }
        let file = format!("iteration_trace_{tag}.csv");
        out.write(&file, |w| trace.write_csv(w))?;
        out.plot(line_plot(&file, vec![3], &format!("sup_t |m_(n+1) - m_n|, scale {s}"), true));

        if idx == 0 {
            let tc = TimeControls::new(cfg.time.dt, cfg.time.t_end).with_cfl_cap(cfg.time.cfl_cap);
            match euler(&data, &tc, Form::Momentum, &meter)? {
                Ok(tr) => {
                    let last = trace.iterates.last().expect("iterates");
                    let mut gap = 0.0_f64;
                    if tr.snapshots.len() != last.len() {
                        return Err(GchError::InvalidParameter(
                            "iterate and solver lattices differ".into(),
                        ));
                    }
                    for (snap, m) in tr.snapshots.iter().zip(last.samples()) {
                        gap = gap.max(snap.fields.m.sub(m)?.sup_norm());
                    }
                    rep.push(VerdictEntry::below("limit_vs_nonlinear", gap, LIMIT_TOL));
                }
                Err(why) => rep.push(VerdictEntry::inconclusive("limit_vs_nonlinear", why)),
            }
        }
    }
    rep.push(
        VerdictEntry::below("max_contraction_ratio", worst_ratio, 1.0)
            .with_detail(format!("ratios for n >= {CONTRACTION_FROM}")),
    );
    if !fitted.is_empty() {
        let hi = fitted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = fitted.iter().cloned().fold(f64::INFINITY, f64::min);
        rep.push(VerdictEntry::at_most("C_drift", (hi - lo) / hi, AMPLITUDE_DRIFT_TOL));
        rep.fit("C", hi);
    }
    let json = serde_json::to_string_pretty(&fits_json)? + "\n";
    out.write("apriori_fit.json", |w| Ok(w.write_all(json.as_bytes())?))?;
    Ok(rep)
}
