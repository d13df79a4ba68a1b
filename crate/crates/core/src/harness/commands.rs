//! The single-run subcommands.

use std::io::Write as _;
use std::path::Path;

use super::config::RunConfig;
use super::experiments::{self, run_with};
use super::report::{ExperimentReport, Output, PlotSpec, VerdictEntry};
use crate::error::Result;
use crate::euler::{simulate, Form};
use crate::friedrichs::{apriori_bound_check, iterate, TransportControls};
use crate::lagrange::{init_particles, simulate_lagrange, LagrangeControls, BREACH_THRESHOLD};
use crate::spectral::besov_sequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Iterate,
    Lagrange,
    Norms,
    Experiment,
    Crosscheck,
}

/// Runs `cmd` on `cfg`, writing into `dir`.
pub fn run_command(cmd: Command, cfg: &RunConfig, dir: &Path) -> Result<ExperimentReport> {
    match cmd {
        Command::Simulate => run_with(simulate_cmd, cfg, dir),
        Command::Iterate => run_with(iterate_cmd, cfg, dir),
        Command::Lagrange => run_with(lagrange_cmd, cfg, dir),
        Command::Norms => run_with(norms_cmd, cfg, dir),
        Command::Crosscheck => run_with(experiments::crosscheck, cfg, dir),
        Command::Experiment => {
            let name = cfg.run.experiment.as_deref().ok_or_else(|| {
                crate::error::GchError::Config("run.experiment is required for `experiment`".into())
            })?;
            experiments::run_experiment(name, cfg, dir)
        }
    }
}

fn simulate_cmd(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("simulate", cfg);
    let meter = cfg.meter()?;
    let m0 = cfg.initial_fields()?.m;
    let tr = simulate(&m0, &cfg.time_controls(), Form::Momentum, &meter)?;
    out.write("trajectory.csv", |w| tr.write_csv(w))?;
    for (k, s) in tr.snapshots.iter().enumerate() {
        out.write(&format!("fields/snapshot_{k:05}.csv"), |w| s.fields.write_csv(w))?;
    }
    out.plot(PlotSpec {
        file: "trajectory.csv".into(),
        x: 1,
        ys: vec![2, 3, 4],
        title: "monitors".into(),
        log_y: false,
    });
    rep.notes.extend(tr.warnings.iter().cloned());
    let last = tr.monitors.last().expect("initial monitor");
    rep.fit("besov_m_final", last.besov_m);
    rep.fit("jacobian_bound_final", last.jacobian_bound);
    match &tr.abort {
        None => rep.push(VerdictEntry::flag("completed", true, format!("t = {}", last.t))),
        Some(a) => rep.push(VerdictEntry::flag(
            "completed",
            false,
            format!("aborted at t = {:.6}: {}", a.t, a.reason),
        )),
    }
    Ok(rep)
}

fn iterate_cmd(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("iterate", cfg);
    let meter = cfg.meter()?;
    let m0 = cfg.initial_fields()?.m;
    let controls = TransportControls {
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        cfl_cap: cfg.time.cfl_cap,
    };
    let mut trace = iterate(&m0, cfg.experiment.n_max.unwrap_or(12), &controls, &meter)?;
    out.write("iteration_trace.csv", |w| trace.write_csv(w))?;
    out.plot(PlotSpec {
        file: "iteration_trace.csv".into(),
        x: 1,
        ys: vec![3],
        title: "sup_t |m_(n+1) - m_n|".into(),
        log_y: true,
    });
    let worst = trace
        .ratios
        .iter()
        .enumerate()
        .filter(|(n, _)| *n >= 3)
        .filter_map(|(_, r)| *r)
        .fold(0.0_f64, f64::max);
    rep.push(VerdictEntry::below("max_contraction_ratio", worst, 1.0));
    match apriori_bound_check(&mut trace) {
        Ok(fit) => {
            rep.fit("C", fit.fitted_c);
            rep.fit("premise_T_bound", fit.premise_t_bound);
            let json = serde_json::to_string_pretty(&fit)? + "\n";
            out.write("apriori_fit.json", |w| Ok(w.write_all(json.as_bytes())?))?;
        }
        Err(e) => rep.push(VerdictEntry::flag("apriori_fit", false, e.to_string())),
    }
    Ok(rep)
}

fn lagrange_cmd(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("lagrange", cfg);
    let m0 = cfg.initial_fields()?.m;
    let t = &cfg.time;
    let lc = LagrangeControls::new(t.dt, t.t_end)
        .with_cfl_cap(t.cfl_cap)
        .with_output_every(t.output_every);
    let ens = init_particles(&m0, cfg.experiment.n_particles.unwrap_or(cfg.grid.n_points))?;
    let run = simulate_lagrange(ens, &lc)?;
    for (k, e) in run.snapshots.iter().enumerate() {
        out.write(&format!("ensembles/ensemble_{k:05}.csv"), |w| e.write_csv(w))?;
    }
    let rows: Vec<Vec<f64>> = run.history.iter().map(|&(t, v)| vec![t, v]).collect();
    out.table("min_yxi.csv", &["t", "min_yxi"], &rows)?;
    out.plot(PlotSpec {
        file: "min_yxi.csv".into(),
        x: 1,
        ys: vec![2],
        title: "min y_xi".into(),
        log_y: false,
    });
    let json = serde_json::to_string_pretty(&run.report)? + "\n";
    out.write("breaking.json", |w| Ok(w.write_all(json.as_bytes())?))?;
    rep.notes.extend(run.warnings.iter().cloned());
    if let Some(a) = &run.abort {
        rep.push(VerdictEntry::flag(
            "completed",
            false,
            format!("aborted at t = {:.6}: {}", a.t, a.reason),
        ));
    }
    rep.push(VerdictEntry::at_least("min_yxi", run.report.min_yxi, BREACH_THRESHOLD));
    Ok(rep)
}

fn norms_cmd(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("norms", cfg);
    let meter = cfg.meter()?;
    let pair = cfg.initial_fields()?;
    rep.fit("besov_norm_m0", meter.norm(&pair.m)?);
    rep.fit("besov_norm_u0", meter.norm(&pair.u)?);
    rep.fit("j_max", meter.bank().j_max() as f64);
    let seq = besov_sequence(&pair.m, meter.params(), meter.bank())?;
    let rows: Vec<Vec<f64>> = meter
        .bank()
        .block_indices()
        .zip(&seq)
        .map(|(j, &v)| vec![j as f64, v])
        .collect();
    out.table("besov_sequence.csv", &["j", "weighted_block_norm"], &rows)?;
    out.write("filter_bank.csv", |w| meter.bank().write_csv(w))?;
    out.write("initial_fields.csv", |w| pair.write_csv(w))?;
    Ok(rep)
}
