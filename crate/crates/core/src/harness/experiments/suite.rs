//! Property checks of the Littlewood-Paley machinery over seeded random data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::harness::config::RunConfig;
use crate::harness::report::{ExperimentReport, Output, VerdictEntry};
use crate::model::{make_initial_data, InitialDataSpec};
use crate::spectral::{
    besov_norm, bony_decompose, interpolation_check, low_cutoff, BesovParams, DyadicFilterBank,
    GridFunction, GridSpec,
};

pub const PARTITION_TOL: f64 = 1e-14;
pub const RECONSTRUCTION_TOL: f64 = 1e-13;
pub const BONY_TOL: f64 = 1e-12;
pub const EQUALITY_TOL: f64 = 1e-12;

/// Largest `|sum_j phi_j(xi_k) - 1|` over the bins.
pub fn partition_defect(bank: &DyadicFilterBank) -> f64 {
    (0..bank.grid().n_points())
        .map(|k| {
            let s: f64 = bank
                .block_indices()
                .map(|j| bank.multiplier(j).expect("in range")[k])
                .sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// `|sum_j Delta_j u - u|_inf / |u|_inf`.
pub fn reconstruction_error(u: &GridFunction, bank: &DyadicFilterBank) -> Result<f64> {
    let mut acc = GridFunction::zeros(*u.grid());
    for b in bank.blocks(u)? {
        acc = acc.add(&b)?;
    }
    let top = u.sup_norm();
    let err = acc.sub(u)?.sup_norm();
    Ok(if top == 0.0 { err } else { err / top })
}

/// `|S_j u - u|_B` for `j = 0 ..= j_max + 1`.
pub fn cutoff_tail(u: &GridFunction, params: &BesovParams, bank: &DyadicFilterBank) -> Result<Vec<f64>> {
    (0..=bank.j_max() + 1)
        .map(|j| besov_norm(&low_cutoff(u, j, bank)?.sub(u)?, params, bank))
        .collect()
}

/// Round-off floor for the cutoff tail, relative to `|u|_B`.
pub const TAIL_NOISE_REL: f64 = 1e-13;

/// Nonincreasing up to round-off relative to `norm = |u|_B`, ending at zero.
pub fn tail_is_monotone(tail: &[f64], norm: f64) -> bool {
    tail.windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-12) + TAIL_NOISE_REL * norm)
        && tail.last().map_or(true, |&v| v == 0.0)
}

/// A single Fourier mode sitting where one block multiplier is exactly one.
pub fn single_block_mode(bank: &DyadicFilterBank) -> Option<GridFunction> {
    let grid = *bank.grid();
    (1..grid.n_points() / 2).find_map(|k| {
        let active: Vec<f64> = bank
            .block_indices()
            .map(|j| bank.multiplier(j).expect("in range")[k])
            .filter(|&m| m != 0.0)
            .collect();
        let xi = grid.wavenumber(k);
        (active == [1.0] && bank.multiplier(bank.j_max()).expect("top")[k] == 0.0)
            .then(|| GridFunction::from_fn(grid, move |x| (xi * x).cos()))
    })
}

pub fn random_sample(grid: GridSpec, j_max: i32, seed: u64) -> Result<(GridFunction, [f64; 5])> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_block = rng.gen_range(0..=j_max);
    let s1: f64 = rng.gen_range(-1.0..1.0);
    let s2 = s1 + rng.gen_range(0.1..2.0);
    let lambda = rng.gen_range(0.05..0.95);
    let p = [1.0, 2.0, 4.0, f64::INFINITY][rng.gen_range(0..4)];
    let r = [1.0, 2.0, f64::INFINITY][rng.gen_range(0..3)];
    let u = make_initial_data(
        &InitialDataSpec::BandLimitedRandom {
            seed: rng.gen(),
            max_block,
            amplitude: 1.0,
        },
        grid,
    )?
    .u;
    Ok((u, [s1, s2, lambda, p, r]))
}

pub fn spectral_suite(cfg: &RunConfig, out: &mut Output) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("spectral_suite", cfg);
    let grid = cfg.grid_spec()?;
    let meter = cfg.meter()?;
    let bank = meter.bank();
    let samples = cfg.experiment.samples.unwrap_or(100);

    rep.push(VerdictEntry::below("partition_of_unity", partition_defect(bank), PARTITION_TOL));
    out.write("filter_bank.csv", |w| bank.write_csv(w))?;

    let mut rows = Vec::with_capacity(samples);
    let (mut worst_rec, mut worst_bony) = (0.0_f64, 0.0_f64);
    let (mut interp_ok, mut tail_ok) = (0usize, 0usize);
    for i in 0..samples {
        let seed = cfg.run.seed.wrapping_add(i as u64);
        let (u, [s1, s2, lambda, p, r]) = random_sample(grid, bank.j_max(), seed)?;
        let rec = reconstruction_error(&u, bank)?;
        worst_rec = worst_rec.max(rec);
        let ir = interpolation_check(&u, s1, s2, lambda, p, r, bank)?;
        interp_ok += ir.holds as usize;
        let tail = cutoff_tail(&u, meter.params(), bank)?;
        let mono = tail_is_monotone(&tail, besov_norm(&u, meter.params(), bank)?);
        tail_ok += mono as usize;
        let (v, _) = random_sample(grid, bank.j_max(), seed ^ 0x9e37_79b9_7f4a_7c15)?;
        let parts = bony_decompose(&u, &v, bank)?;
        let scale = u.sup_norm() * v.sup_norm();
        let bony = if scale == 0.0 {
            0.0
        } else {
            parts.residual / scale
        };
        worst_bony = worst_bony.max(bony);
        rows.push(vec![seed as f64, rec, ir.ratio, bony, mono as u8 as f64]);
    }
    rep.push(VerdictEntry::below("reconstruction", worst_rec, RECONSTRUCTION_TOL));
    rep.push(VerdictEntry::flag(
        "interpolation_inequality",
        interp_ok == samples,
        format!("{interp_ok}/{samples}"),
    ));
    rep.push(VerdictEntry::flag(
        "cutoff_convergence_monotone",
        tail_ok == samples,
        format!("{tail_ok}/{samples}"),
    ));
    rep.push(VerdictEntry::below("bony_identity", worst_bony, BONY_TOL));

    match single_block_mode(bank) {
        Some(u) => {
            let ir = interpolation_check(&u, 0.0, 1.0, 0.5, meter.params().p, 1.0, bank)?;
            rep.push(VerdictEntry::below("single_block_equality", (ir.ratio - 1.0).abs(), EQUALITY_TOL));
        }
        None => rep.push(VerdictEntry::inconclusive(
            "single_block_equality",
            "no bin lies in the interior of a single block",
        )),
    }
    out.table(
        "spectral_suite.csv",
        &["seed", "reconstruction", "interpolation_ratio", "bony_residual", "cutoff_monotone"],
        &rows,
    )?;
    Ok(rep)
}
