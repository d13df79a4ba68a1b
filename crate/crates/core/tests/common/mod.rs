#![allow(dead_code)]

use gchlab::spectral::{BesovMeter, GridFunction, GridSpec};

pub fn grid(l: f64, n: usize) -> GridSpec {
    GridSpec::new(l, n).unwrap()
}

pub fn meter(g: GridSpec) -> BesovMeter {
    BesovMeter::critical(g, 2.0).unwrap()
}

/// `a exp(-(x/w)^2)` and its first four derivatives, in closed form.
pub fn gaussian(a: f64, w: f64) -> impl Fn(f64) -> [f64; 5] {
    move |x| {
        let z = x / w;
        let e = a * (-z * z).exp();
        let w2 = w * w;
        [
            e,
            -2.0 * z / w * e,
            (4.0 * z * z - 2.0) / w2 * e,
            (-8.0 * z * z * z + 12.0 * z) / (w2 * w) * e,
            (16.0 * z.powi(4) - 48.0 * z * z + 12.0) / (w2 * w2) * e,
        ]
    }
}

pub fn sample(g: GridSpec, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::from_fn(g, f)
}

/// Trigonometric polynomial `sum_k c_k cos(xi_k x) + s_k sin(xi_k x)` over the
/// grid modes `1..=k_max`, plus a mean.
pub struct Trig {
    pub mean: f64,
    pub modes: Vec<(f64, f64, f64)>,
}

impl Trig {
    pub fn new(g: GridSpec, mean: f64, coeffs: &[(f64, f64)]) -> Self {
        let modes = coeffs
            .iter()
            .enumerate()
            .map(|(k, &(c, s))| (std::f64::consts::PI * (k + 1) as f64 / g.half_length(), c, s))
            .collect();
        Trig { mean, modes }
    }

    /// `d`-th derivative at `x`.
    pub fn eval(&self, d: u32, x: f64) -> f64 {
        let mut v = if d == 0 { self.mean } else { 0.0 };
        for &(xi, c, s) in &self.modes {
            // derivative of cos(xi x + phase) shifts the phase by pi/2
            let shift = d as f64 * std::f64::consts::FRAC_PI_2;
            let amp = xi.powi(d as i32);
            v += amp * (c * (xi * x + shift).cos() + s * (xi * x + shift).sin());
        }
        v
    }

    pub fn on(&self, g: GridSpec, d: u32) -> GridFunction {
        GridFunction::from_fn(g, |x| self.eval(d, x))
    }
}

pub fn sup_dist(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sub(b).unwrap().sup_norm()
}

/// `(A, B)` by direct summation against the periodized kernels
/// `sum_k e^{-|r + kP|}/2 = cosh(L - r) / (2 sinh L)` and
/// `sum_k sign(r + kP) e^{-|r + kP|}/2 = sinh(L - r) / (2 sinh L)`, `r` in `[0, P)`.
pub fn brute_force_integrals(ens: &gchlab::lagrange::ParticleEnsemble) -> (Vec<f64>, Vec<f64>) {
    let n = ens.len();
    let l = 0.5 * ens.period();
    let dxi = ens.period() / n as f64;
    let w: Vec<f64> = (0..n)
        .map(|j| {
            let ux = ens.uxi[j] / ens.yxi[j];
            let uxx = ens.m[j] - ens.u[j];
            (ux * ux + 0.5 * uxx * uxx) * ens.yxi[j] * dxi
        })
        .collect();
    let denom = 2.0 * l.sinh();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let r = (ens.y[i] - ens.y[j]).rem_euclid(2.0 * l);
            a[i] += (l - r).cosh() / denom * w[j];
            if i != j {
                b[i] += (l - r).sinh() / denom * w[j];
            }
        }
    }
    (a, b)
}

/// Particles from band-limited random data, then displaced by the smooth
/// monotone map `xi + alpha sin(pi xi / L)` plus a jitter of a tenth of a cell.
pub fn scrambled_ensemble(g: GridSpec, seed: u64) -> gchlab::lagrange::ParticleEnsemble {
    use gchlab::model::{make_initial_data, InitialDataSpec};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pair = make_initial_data(
        &InitialDataSpec::BandLimitedRandom {
            seed,
            max_block: rng.gen_range(0..=4),
            amplitude: rng.gen_range(0.1..2.0),
        },
        g,
    )
    .unwrap();
    let mut ens = gchlab::lagrange::init_particles(&pair.m, g.n_points()).unwrap();
    let l = g.half_length();
    let k = std::f64::consts::PI / l;
    let alpha = rng.gen_range(0.0..0.8) / k;
    let h = g.spacing();
    for i in 0..ens.len() {
        let xi = ens.xi(i);
        ens.y[i] = xi + alpha * (k * xi).sin() + 0.1 * h * rng.gen_range(-1.0..1.0);
        ens.yxi[i] = 1.0 + alpha * k * (k * xi).cos();
    }
    ens
}
