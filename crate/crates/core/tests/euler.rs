mod common;

use common::*;
use gchlab::euler::*;
use gchlab::model::{make_initial_data, normalize_momentum, InitialDataSpec};
use gchlab::spectral::{BesovMeter, GridFunction, GridSpec};

fn gaussian_m0(g: GridSpec, target: f64) -> (GridFunction, BesovMeter) {
    let m = meter(g);
    let pair = make_initial_data(
        &InitialDataSpec::Gaussian {
            amplitude: 1.0,
            width: 1.0,
            center: 0.0,
        },
        g,
    )
    .unwrap();
    (normalize_momentum(&pair, target, &m).unwrap().m, m)
}

#[test]
fn outputs_land_on_the_requested_times() {
    let g = grid(20.0, 256);
    let (m0, meter) = gaussian_m0(g, 0.25);
    let c = TimeControls::new(0.01, 0.25).with_output_every(5);
    let tr = simulate(&m0, &c, Form::Momentum, &meter).unwrap();
    assert!(tr.completed());
    let times: Vec<f64> = tr.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(times.len(), 6);
    for (k, t) in times.iter().enumerate() {
        assert!((t - 0.05 * k as f64).abs() < 1e-12, "{times:?}");
    }
    assert_eq!(tr.monitors.len(), tr.snapshots.len());
    assert!(tr.warnings.is_empty());
}

#[test]
fn the_two_forms_agree() {
    let g = grid(20.0, 512);
    let (m0, meter) = gaussian_m0(g, 0.25);
    let c = TimeControls::new(1e-2, 0.5).with_output_every(10);
    let a = simulate(&m0, &c, Form::Momentum, &meter).unwrap();
    let b = simulate(&m0, &c, Form::Velocity, &meter).unwrap();
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        assert!(sup_dist(&x.fields.u, &y.fields.u) < 1e-12);
    }
}

#[test]
fn temporal_order_is_four() {
    let g = grid(20.0, 256);
    let (m0, meter) = gaussian_m0(g, 0.9);
    let run = |dt: f64, form| {
        let c = TimeControls::new(dt, 0.4)
            .with_cfl_cap(100.0)
            .with_jacobian_floor(None)
            .with_output_every((0.4 / dt).round() as usize);
        simulate(&m0, &c, form, &meter).unwrap().last().fields.u.clone()
    };
    for form in [Form::Momentum, Form::Velocity] {
        let p = richardson_order(&run(0.1, form), &run(0.05, form), &run(0.025, form));
        assert!(p > 3.8 && p < 4.3, "{form:?}: {p}");
    }
}

#[test]
fn richardson_of_synthetic_errors() {
    let g = grid(1.0, 16);
    let exact = GridFunction::from_fn(g, |x| x.sin());
    let err = GridFunction::from_fn(g, |x| 1.0 + x * x);
    let at = |h: f64| exact.axpy(h.powi(3), &err).unwrap();
    let p = richardson_order(&at(0.4), &at(0.2), &at(0.1));
    assert!((p - 3.0).abs() < 1e-9, "{p}");
}

#[test]
fn mass_identity_along_a_run() {
    let g = grid(20.0, 1024);
    let (m0, meter) = gaussian_m0(g, 0.25);
    let c = TimeControls::new(5e-4, 0.5).with_output_every(4);
    let tr = simulate(&m0, &c, Form::Momentum, &meter).unwrap();
    let rep = mass_balance_check(&tr);
    assert_eq!(rep.verdict, Verdict::Pass, "{}", rep.residual);
    assert!(rep.residual < MASS_BALANCE_TOL);
    // mass grows: the production is positive
    let first = tr.monitors.first().unwrap().mass_m;
    let last = tr.monitors.last().unwrap().mass_m;
    assert!(last > first);
}

#[test]
fn mass_identity_is_exact_for_equilibria() {
    let g = grid(20.0, 256);
    let meter = meter(g);
    for c in [0.0, 0.3] {
        let m0 = GridFunction::constant(g, c);
        let tr = simulate(&m0, &TimeControls::new(1e-3, 0.05), Form::Momentum, &meter).unwrap();
        let rep = mass_balance_check(&tr);
        assert_eq!(rep.residual, 0.0);
        assert_eq!(rep.verdict, Verdict::Pass);
    }
}

#[test]
fn coarse_cadence_is_inconclusive() {
    let g = grid(20.0, 256);
    let (m0, meter) = gaussian_m0(g, 0.25);
    let c = TimeControls::new(0.01, 0.2).with_output_every(5);
    let rep = mass_balance_check(&simulate(&m0, &c, Form::Momentum, &meter).unwrap());
    assert_eq!(rep.verdict, Verdict::Inconclusive);
}

#[test]
fn steep_data_trip_the_compression_budget() {
    let g = grid(20.0, 1024);
    let meter = meter(g);
    let m0 = make_initial_data(
        &InitialDataSpec::SmoothedPeakon {
            amplitude: 3.0,
            smoothing: None,
            center: 0.0,
        },
        g,
    )
    .unwrap()
    .m;
    let c = TimeControls::new(1e-3, 1.0).with_output_every(10);
    let tr = simulate(&m0, &c, Form::Momentum, &meter).unwrap();
    let abort = tr.abort.as_ref().expect("abort");
    assert!(abort.t > 0.4 && abort.t < 0.7, "{}", abort.t);
    let last = tr.monitors.last().unwrap();
    assert!(last.jacobian_bound >= 0.5 * 0.99);
    assert!(tr.clone().into_result().is_err());
    assert!(!tr.warnings.is_empty(), "existence window warning");
}

#[test]
fn jacobian_bound_is_the_exponential_budget() {
    // exp(-int max(u_xx)^+ dt) starts at one and never grows.
    let g = grid(20.0, 512);
    let (m0, meter) = gaussian_m0(g, 0.25);
    let c = TimeControls::new(1e-3, 0.2).with_jacobian_floor(None);
    let tr = simulate(&m0, &c, Form::Momentum, &meter).unwrap();
    for w in tr.monitors.windows(2) {
        assert!(w[1].jacobian_bound <= w[0].jacobian_bound);
        assert!(w[1].jacobian_bound > 0.0 && w[1].jacobian_bound <= 1.0);
    }
    assert_eq!(tr.monitors[0].jacobian_bound, 1.0);
}

#[test]
fn controls_are_validated() {
    let g = grid(20.0, 256);
    let (m0, meter) = gaussian_m0(g, 0.25);
    for c in [
        TimeControls::new(0.0, 1.0),
        TimeControls::new(0.01, -1.0),
        TimeControls::new(0.01, 1.0).with_output_every(0),
        TimeControls::new(0.01, 1.0).with_cfl_cap(0.0),
    ] {
        assert!(simulate(&m0, &c, Form::Momentum, &meter).is_err());
    }
    let other = GridFunction::zeros(grid(10.0, 256));
    assert!(simulate(&other, &TimeControls::new(0.01, 0.1), Form::Momentum, &meter).is_err());
}

#[test]
fn monitors_are_written_as_csv() {
    let g = grid(20.0, 256);
    let (m0, meter) = gaussian_m0(g, 0.25);
    let tr = simulate(&m0, &TimeControls::new(0.01, 0.05), Form::Momentum, &meter).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,besov_m,linf_u,linf_ux,mass_m");
    assert_eq!(lines.count(), tr.monitors.len());
}
