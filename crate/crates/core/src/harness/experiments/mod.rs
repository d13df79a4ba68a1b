//! Experiments behind `gchlab experiment`. Each one takes a validated config,
//! writes its series into an [`Output`] and returns a judged report.

mod checks;
mod crosscheck;
mod dependence;
mod iteration;
mod stability;
mod suite;

use std::path::Path;
use std::time::Instant;

pub use checks::{convergence, jacobian, mass_balance};
pub use crosscheck::crosscheck;
pub use dependence::continuous_dependence;
pub use iteration::iteration;
pub use stability::stability;
pub use suite::{cutoff_tail, random_sample, spectral_suite, tail_is_monotone};

use super::config::RunConfig;
use super::report::{ExperimentReport, Output, PlotSpec};
use crate::error::{GchError, Result};
use crate::euler::{simulate, Form, TimeControls, Trajectory};
use crate::spectral::{BesovMeter, GridFunction};

pub const EXPERIMENTS: &[&str] = &[
    "stability",
    "continuous_dependence",
    "crosscheck",
    "iteration",
    "spectral_suite",
    "mass_balance",
    "jacobian",
    "convergence",
];

type Runner = fn(&RunConfig, &mut Output) -> Result<ExperimentReport>;

fn lookup(name: &str) -> Option<Runner> {
    Some(match name {
        "stability" => stability,
        "continuous_dependence" => continuous_dependence,
        "crosscheck" => crosscheck,
        "iteration" => iteration,
        "spectral_suite" => spectral_suite,
        "mass_balance" => mass_balance,
        "jacobian" => jacobian,
        "convergence" => convergence,
        _ => return None,
    })
}

/// Runs experiment `name` and writes everything under `dir`.
pub fn run_experiment(name: &str, cfg: &RunConfig, dir: &Path) -> Result<ExperimentReport> {
    let runner = lookup(name).ok_or_else(|| {
        GchError::Config(format!(
            "unknown experiment \"{name}\"; expected one of {}",
            EXPERIMENTS.join(", ")
        ))
    })?;
    run_with(runner, cfg, dir)
}

pub(crate) fn run_with(runner: Runner, cfg: &RunConfig, dir: &Path) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut out = Output::create(dir)?;
    let mut report = runner(cfg, &mut out)?;
    report.runtime_s = start.elapsed().as_secs_f64();
    out.finish(&mut report)?;
    Ok(report)
}

/// Euler run that turns an abort into `Err(reason)`.
fn euler(
    m0: &GridFunction,
    controls: &TimeControls,
    form: Form,
    meter: &BesovMeter,
) -> Result<std::result::Result<Trajectory, String>> {
    let tr = simulate(m0, controls, form, meter)?;
    Ok(match &tr.abort {
        None => Ok(tr),
        Some(a) => Err(format!("{form:?} solver aborted at t = {:.6}: {}", a.t, a.reason)),
    })
}

/// `max_k f(a_k, b_k)` over paired snapshots.
fn sup_over_snapshots(
    a: &Trajectory,
    b: &Trajectory,
    f: impl Fn(&crate::model::FieldPair, &crate::model::FieldPair) -> Result<f64>,
) -> Result<f64> {
    if a.snapshots.len() != b.snapshots.len() {
        return Err(GchError::InvalidParameter(format!(
            "snapshot counts differ: {} vs {}",
            a.snapshots.len(),
            b.snapshots.len()
        )));
    }
    let mut worst = 0.0_f64;
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        worst = worst.max(f(&x.fields, &y.fields)?);
    }
    Ok(worst)
}

fn line_plot(file: &str, ys: Vec<usize>, title: &str, log_y: bool) -> PlotSpec {
    PlotSpec {
        file: file.into(),
        x: 1,
        ys,
        title: title.into(),
        log_y,
    }
}
