mod common;

use common::*;
use gchlab::spectral::*;

#[test]
fn derivatives_of_trigonometric_data_are_exact() {
    let g = grid(20.0, 256);
    let t = Trig::new(g, 0.7, &[(1.0, -0.5), (0.0, 0.3), (0.2, 0.2), (-0.4, 0.0)]);
    let u = t.on(g, 0);
    for d in 1..=3 {
        let err = sup_dist(&derivative(&u, d), &t.on(g, d));
        // round-off in every bin is amplified by up to Nyquist^d
        assert!(err < 1e-14 * g.nyquist().powi(d as i32).max(1.0), "order {d}: {err}");
    }
}

#[test]
fn gaussian_derivatives_converge_spectrally() {
    let g = grid(20.0, 512);
    let f = gaussian(1.0, 1.0);
    let u = sample(g, |x| f(x)[0]);
    for d in 1..=3u32 {
        let exact = sample(g, |x| f(x)[d as usize]);
        assert!(sup_dist(&derivative(&u, d), &exact) < 1e-11);
    }
}

#[test]
fn multipliers_follow_the_profiles() {
    let g = grid(20.0, 1024);
    let bank = DyadicFilterBank::new(g).unwrap();
    assert_eq!(bank.j_min(), -1);
    assert_eq!(bank.j_max(), 6);
    let xi = g.wavenumbers();
    for k in 0..g.n_points() {
        assert_eq!(bank.multiplier(-1).unwrap()[k], chi(xi[k]));
        for j in 0..bank.j_max() {
            let expect = chi(xi[k] / 2f64.powi(j + 1)) - chi(xi[k] / 2f64.powi(j));
            assert!((bank.multiplier(j).unwrap()[k] - expect).abs() < 1e-15);
        }
    }
    assert!(bank.multiplier(7).is_none());
    assert!(bank.multiplier(-2).is_none());
}

#[test]
fn profile_values() {
    assert_eq!(chi(0.0), 1.0);
    assert_eq!(chi(0.75), 1.0);
    assert_eq!(chi(4.0 / 3.0), 0.0);
    assert_eq!(chi(-0.5), 1.0);
    // symmetric point of the exponential ratio
    assert!((chi((0.75 + 4.0 / 3.0) / 2.0) - 0.5).abs() < 1e-15);
    assert_eq!(phi(0.5), 0.0);
    assert_eq!(phi(1.5), 1.0);
    assert_eq!(phi(3.0), 0.0);
}

#[test]
fn block_limit_tracks_nyquist() {
    // Nyquist pi N / (2L); blocks continue while 3/4 * 2^(j+1) < Nyquist.
    for (l, n) in [(20.0, 64), (20.0, 256), (20.0, 1024), (5.0, 1024), (50.0, 128)] {
        let g = grid(l, n);
        let nyq = std::f64::consts::PI * n as f64 / (2.0 * l);
        let j = block_limit(&g).unwrap();
        assert!(0.75 * 2f64.powi(j) < nyq && 0.75 * 2f64.powi(j + 1) >= nyq, "L={l} N={n}");
    }
}

#[test]
fn single_mode_norm_matches_closed_form() {
    // cos(xi x) with xi = 2^j * 1.5 sits where phi_j = 1; its L^2 norm on
    // [-L, L) is sqrt(L), so |u|_{B^{1/2}_{2,1}} = 2^{j/2} sqrt(L).
    let l = 16.0 * std::f64::consts::PI;
    let g = grid(l, 1024);
    let m = meter(g);
    for j in 0..4 {
        let xi = 1.5 * 2f64.powi(j);
        let u = sample(g, |x| (xi * x).cos());
        let k = (xi * l / std::f64::consts::PI).round();
        assert!((k * std::f64::consts::PI / l - xi).abs() < 1e-12, "mode on the grid");
        let expect = 2f64.powf(j as f64 / 2.0) * l.sqrt();
        let got = m.norm(&u).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect, "j={j}: {got} vs {expect}");
    }
}

#[test]
fn constants_live_in_the_lowest_block() {
    let g = grid(20.0, 256);
    let m = meter(g);
    let c = GridFunction::constant(g, 2.0);
    let seq = besov_sequence(&c, m.params(), m.bank()).unwrap();
    // 2^{-1/2} |2|_{L^2} with |2|_{L^2} = 2 sqrt(40)
    assert!((seq[0] - 2f64.powf(-0.5) * 2.0 * 40f64.sqrt()).abs() < 1e-12);
    assert!(seq[1..].iter().all(|&v| v < 1e-13));
}

#[test]
fn lp_norms_by_hand() {
    let g = grid(1.0, 64);
    let u = sample(g, |x| if x < 0.0 { -1.0 } else { 2.0 });
    let h = g.spacing();
    assert!((lp_norm(&u, 1.0) - h * (32.0 + 64.0)).abs() < 1e-13);
    assert!((lp_norm(&u, 2.0) - (h * (32.0 + 32.0 * 4.0)).sqrt()).abs() < 1e-13);
    assert_eq!(lp_norm(&u, f64::INFINITY), 2.0);
    assert_eq!(lr_norm(&[3.0, -4.0], 2.0), 5.0);
    assert_eq!(lr_norm(&[3.0, -4.0], 1.0), 7.0);
    assert_eq!(lr_norm(&[3.0, -4.0], f64::INFINITY), 4.0);
}

#[test]
fn low_cutoff_is_the_partial_sum() {
    let g = grid(20.0, 512);
    let bank = DyadicFilterBank::new(g).unwrap();
    let f = gaussian(1.0, 0.3);
    let u = sample(g, |x| f(x)[0]);
    let blocks = bank.blocks(&u).unwrap();
    let mut acc = GridFunction::zeros(g);
    for (j, b) in bank.block_indices().zip(&blocks) {
        acc = acc.add(b).unwrap();
        let s = low_cutoff(&u, j + 1, &bank).unwrap();
        assert!(sup_dist(&acc, &s) < 1e-14, "j = {j}");
        assert!(sup_dist(b, &dyadic_block(&u, j, &bank).unwrap()) == 0.0);
    }
    assert!(sup_dist(&low_cutoff(&u, bank.j_max() + 1, &bank).unwrap(), &u) < 1e-14);
}

#[test]
fn bony_pieces_add_up_to_the_product() {
    let g = grid(20.0, 512);
    let bank = DyadicFilterBank::new(g).unwrap();
    let u = sample(g, |x| (-(x * x)).exp() * (3.0 * x).cos());
    let v = sample(g, |x| 1.0 / (1.0 + x * x));
    let parts = bony_decompose(&u, &v, &bank).unwrap();
    let sum = parts
        .t_u_v
        .add(&parts.t_v_u)
        .unwrap()
        .add(&parts.remainder)
        .unwrap();
    assert!(sup_dist(&sum, &u.mul(&v).unwrap()) < 1e-13);
    assert!(parts.residual < 1e-13);
}

#[test]
fn resampling_preserves_band_limited_data() {
    let coarse = grid(20.0, 128);
    let fine = grid(20.0, 512);
    let t = Trig::new(coarse, 0.1, &[(0.5, 0.2), (0.0, -0.3), (0.1, 0.0)]);
    let up = resample(&t.on(coarse, 0), fine).unwrap();
    assert!(sup_dist(&up, &t.on(fine, 0)) < 1e-14);
    let down = resample(&up, coarse).unwrap();
    assert!(sup_dist(&down, &t.on(coarse, 0)) < 1e-14);
}

#[test]
fn grid_validation() {
    assert!(GridSpec::new(20.0, 1000).is_err());
    assert!(GridSpec::new(0.0, 256).is_err());
    assert!(GridSpec::new(f64::NAN, 256).is_err());
    let g = grid(20.0, 256);
    assert_eq!(g.node(0), -20.0);
    assert_eq!(g.period(), 40.0);
    assert!(GridFunction::new(g, vec![0.0; 255]).is_err());
    let other = GridFunction::zeros(grid(10.0, 256));
    assert!(GridFunction::zeros(g).add(&other).is_err());
}
