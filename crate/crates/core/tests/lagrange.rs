mod common;

use common::*;
use gchlab::euler::{simulate, velocity_tendency, Form, TimeControls};
use gchlab::lagrange::*;
use gchlab::model::{make_initial_data, normalize_momentum, FieldPair, InitialDataSpec};
use gchlab::spectral::{derivative, GridFunction, GridSpec};

fn rel_err(fast: &[f64], slow: &[f64]) -> f64 {
    let scale = slow.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let err = fast
        .iter()
        .zip(slow)
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    err / scale
}

#[test]
fn sweeps_match_direct_summation() {
    let g = grid(20.0, 256);
    for seed in 0..5 {
        let ens = scrambled_ensemble(g, seed);
        assert!(ens.is_monotone());
        let (a, b) = nonlocal_integrals(&ens).unwrap();
        let (a0, b0) = brute_force_integrals(&ens);
        assert!(rel_err(&a, &a0) < 1e-12, "A, seed {seed}");
        assert!(rel_err(&b, &b0) < 1e-12, "B, seed {seed}");
    }
}

#[test]
fn kernel_weights_by_hand() {
    let g = grid(20.0, 64);
    let mut ens = init_particles(&GridFunction::zeros(g), 64).unwrap();
    ens.uxi[3] = 2.0;
    ens.yxi[3] = 4.0;
    ens.u[3] = 1.0;
    ens.m[3] = -1.0;
    let w = kernel_weights(&ens);
    // ((2/4)^2 + (1 - (-1))^2 / 2) * 4 * h
    assert!((w[3] - (0.25 + 2.0) * 4.0 * g.spacing()).abs() < 1e-15);
    assert!(w.iter().enumerate().all(|(i, &v)| i == 3 || v == 0.0));
}

fn gaussian_pair(g: GridSpec, target: f64) -> FieldPair {
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
    normalize_momentum(&pair, target, &m).unwrap()
}

#[test]
fn initial_ensemble_sits_on_the_grid() {
    let g = grid(20.0, 256);
    let pair = gaussian_pair(g, 0.5);
    let ens = init_particles(&pair.m, 256).unwrap();
    assert_eq!(ens.y, g.nodes());
    assert!(ens.yxi.iter().all(|&v| v == 1.0));
    assert!(ens.strain.iter().all(|&v| v == 0.0));
    assert!(sup_dist(&GridFunction::new(g, ens.u.clone()).unwrap(), &pair.u) < 1e-15);
    assert!(sup_dist(&GridFunction::new(g, ens.uxi.clone()).unwrap(), &pair.u_x) < 1e-14);
    let back = to_eulerian(&ens, g).unwrap();
    assert!(sup_dist(&back.u, &pair.u) < 1e-15);
    assert!(sup_dist(&back.m, &pair.m) < 1e-15);
}

/// At `t = 0` (`y = xi`, `y_xi = 1`) the particle system must reproduce the
/// Eulerian rates seen along the characteristic `dy/dt = -u_x`:
/// `dU = u_t - u_x^2`, `dU_xi = u_xt - 2 u_x u_xx`, `dM = m_t - u_x m_x`.
#[test]
fn characteristic_rates_match_the_eulerian_equation() {
    let errs: Vec<(f64, f64, f64)> = [512usize, 1024]
        .iter()
        .map(|&n| {
            let g = grid(20.0, n);
            let pair = gaussian_pair(g, 0.5);
            let ens = init_particles(&pair.m, n).unwrap();
            let d = rhs_lagrange(&ens).unwrap();
            let u_t = velocity_tendency(&pair.u);
            let u_xt = derivative(&u_t, 1);
            let (ux, uxx) = (pair.u_x.values(), pair.u_xx.values());
            let (_, b) = nonlocal_integrals(&ens).unwrap();
            let mut e_u = 0.0_f64;
            let mut e_uxi = 0.0_f64;
            let mut e_flip = 0.0_f64;
            for i in 0..n {
                e_u = e_u.max((d.u[i] - (u_t.values()[i] - ux[i] * ux[i])).abs());
                let expect = u_xt.values()[i] - 2.0 * ux[i] * uxx[i];
                e_uxi = e_uxi.max((d.uxi[i] - expect).abs());
                // the same rate with the opposite sign on the B term
                let flipped = d.uxi[i] + 2.0 * b[i] * ens.yxi[i];
                e_flip = e_flip.max((flipped - expect).abs());
            }
            for i in 0..n {
                assert!((d.y[i] + ux[i]).abs() < 1e-14);
                assert!((d.yxi[i] + uxx[i]).abs() < 1e-13);
                let f = -0.5 * pair.m.values()[i].powi(2) + pair.u.values()[i] * pair.m.values()[i]
                    + 0.5 * ux[i] * ux[i]
                    - 0.5 * pair.u.values()[i].powi(2);
                assert!((d.m[i] - f).abs() < 1e-14);
            }
            (e_u, e_uxi, e_flip)
        })
        .collect();
    let (coarse, fine) = (errs[0], errs[1]);
    // the trapezoid rule over the kinked kernel is second order
    assert!(fine.0 < 1e-4 && fine.1 < 1e-4, "{errs:?}");
    assert!(coarse.0 / fine.0 > 3.5 && coarse.1 / fine.1 > 3.5, "{errs:?}");
    // a sign error in the B term would be visible at order one
    assert!(fine.2 > 1e3 * fine.1, "{errs:?}");
}

#[test]
fn particles_track_the_eulerian_solution() {
    let g = grid(20.0, 512);
    let pair = gaussian_pair(g, 0.25);
    let (dt, t_end) = (1e-2, 0.5);
    let run = simulate_lagrange(init_particles(&pair.m, 512).unwrap(), &LagrangeControls::new(dt, t_end))
        .unwrap();
    assert!(run.abort.is_none());
    assert!((run.last().t - t_end).abs() < 1e-12);
    let tr = simulate(&pair.m, &TimeControls::new(dt, t_end), Form::Momentum, &meter(g)).unwrap();
    let back = to_eulerian(run.last(), g).unwrap();
    let d = sup_dist(&back.u, &tr.last().fields.u);
    assert!(d < 1e-5, "{d}");
    assert!(!run.report.breached);
    assert!(run.report.min_yxi > 0.9);
    // strain integrates M - U, so y_xi = exp(strain)
    let last = run.last();
    for i in 0..last.len() {
        assert!((last.yxi[i] - last.strain[i].exp()).abs() < 1e-8);
    }
}

#[test]
fn steep_data_breach_the_contract() {
    let g = grid(20.0, 1024);
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
    let run = simulate_lagrange(init_particles(&m0, 1024).unwrap(), &LagrangeControls::new(1e-3, 0.8))
        .unwrap();
    assert!(run.report.breached);
    let tb = run.report.t_breach.unwrap();
    assert!(tb > 0.4 && tb < 0.7, "{tb}");
    assert!(!run.warnings.is_empty());
}

#[test]
fn breaking_monitor_interpolates_the_crossing() {
    let h = [(0.0, 1.0), (0.1, 0.8), (0.2, 0.6), (0.3, 0.4), (0.4, 0.3)];
    let r = breaking_monitor(&h);
    assert!(r.breached);
    assert!((r.t_breach.unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(r.min_yxi, 0.3);
    assert_eq!(r.t_of_min, 0.4);
    let calm = breaking_monitor(&[(0.0, 1.0), (1.0, 0.7)]);
    assert!(!calm.breached && calm.t_breach.is_none());
    let born = breaking_monitor(&[(0.0, 0.4), (1.0, 0.45)]);
    assert_eq!(born.t_breach, Some(0.0));
}

#[test]
fn hermite_is_exact_on_cubics() {
    let p = |x: f64| 1.0 + x - 2.0 * x * x + 0.3 * x * x * x;
    let dp = |x: f64| 1.0 - 4.0 * x + 0.9 * x * x;
    let (x0, x1) = (-0.5, 1.25);
    for k in 0..=10 {
        let x = x0 + (x1 - x0) * k as f64 / 10.0;
        let v = hermite(x0, x1, p(x0), p(x1), dp(x0), dp(x1), x);
        assert!((v - p(x)).abs() < 1e-14);
    }
    let xs: Vec<f64> = (0..8).map(|i| i as f64 * 0.3 - 1.0).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| dp(x)).collect();
    let targets = [-1.0, -0.77, 0.0, 0.4, 1.1];
    for (t, v) in targets.iter().zip(eval_sorted(&xs, &vs, &ds, &targets)) {
        assert!((v - p(*t)).abs() < 1e-13);
    }
}

#[test]
fn pchip_keeps_monotone_data_monotone() {
    let xs = [0.0, 1.0, 1.5, 4.0, 4.2, 6.0];
    let vs = [0.0, 0.1, 3.0, 3.1, 3.1, 10.0];
    let ds = pchip_slopes(&xs, &vs);
    assert!(ds.iter().all(|&d| d >= 0.0));
    assert_eq!(ds[4], 0.0, "flat neighbour forces a zero slope");
    let fine: Vec<f64> = (0..=600).map(|k| k as f64 * 0.01).collect();
    let vals = eval_sorted(&xs, &vs, &ds, &fine);
    assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-14));
    // linear data are reproduced
    let lin: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
    let dl = pchip_slopes(&xs, &lin);
    assert!(dl.iter().all(|&d| (d - 2.0).abs() < 1e-14));
}

#[test]
fn ensembles_are_written_as_csv() {
    let g = grid(20.0, 64);
    let ens = init_particles(&GridFunction::constant(g, 0.5), 64).unwrap();
    let mut buf = Vec::new();
    ens.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("xi,y,yxi,M,U,Uxi\n"));
    assert_eq!(text.lines().count(), 65);
}

#[test]
fn folded_maps_are_rejected() {
    let g = grid(20.0, 64);
    let mut ens = init_particles(&GridFunction::zeros(g), 64).unwrap();
    ens.y.swap(10, 11);
    assert!(!ens.is_monotone());
    assert!(nonlocal_integrals(&ens).is_err());
    assert!(to_eulerian(&ens, g).is_err());
}
