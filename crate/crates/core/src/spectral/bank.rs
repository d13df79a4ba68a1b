//! Littlewood-Paley filter bank on the discrete frequency lattice.
//!
//! The low-pass profile `chi` equals one on `|xi| <= 3/4` and vanishes for
//! `|xi| >= 4/3`; in between it is the `C^inf` ratio
//! `psi(1-t) / (psi(1-t) + psi(t))` with `psi(t) = exp(-1/t)`. The annulus
//! profile is `phi(xi) = chi(xi/2) - chi(xi)`, supported in `[3/4, 8/3]`, so
//! the blocks telescope into a partition of unity. The highest block is
//! flattened to `1 - chi(2^{-j_max} xi)`, closing the partition at Nyquist.

use std::io::Write;

use rustfft::num_complex::Complex64;

use super::grid::{apply_symbol, spectrum, GridFunction, GridSpec};
use crate::error::{GchError, Result};

/// Version tag of the profile construction. Besov norms are only comparable
/// between runs that share it.
pub const FILTER_BANK_VERSION: &str = "lp-expratio-v1";

pub const CHI_INNER: f64 = 3.0 / 4.0;
pub const CHI_OUTER: f64 = 4.0 / 3.0;

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Radial low-pass profile `chi(|xi|)`.
pub fn chi(xi: f64) -> f64 {
    let r = xi.abs();
    if r <= CHI_INNER {
        return 1.0;
    }
    if r >= CHI_OUTER {
        return 0.0;
    }
    let t = (r - CHI_INNER) / (CHI_OUTER - CHI_INNER);
    let a = psi(1.0 - t);
    a / (a + psi(t))
}

/// Annulus profile `phi(xi) = chi(xi/2) - chi(xi)`.
pub fn phi(xi: f64) -> f64 {
    chi(0.5 * xi) - chi(xi)
}

/// Precomputed multipliers of `Delta_j` for `j = -1 ..= j_max`.
#[derive(Debug, Clone)]
pub struct DyadicFilterBank {
    grid: GridSpec,
    j_max: i32,
    multipliers: Vec<Vec<f64>>,
}

/// Largest block index whose annulus still meets the grid's frequencies.
pub fn block_limit(grid: &GridSpec) -> Option<i32> {
    let nyq = grid.nyquist();
    if nyq <= CHI_INNER {
        return None;
    }
    let mut j = 0;
    while CHI_INNER * 2f64.powi(j + 1) < nyq {
        j += 1;
    }
    Some(j)
}

pub fn make_filter_bank(grid: GridSpec) -> Result<DyadicFilterBank> {
    let j_max = block_limit(&grid).ok_or_else(|| {
        GchError::InvalidGrid(format!(
            "Nyquist frequency {:.4} cannot host blocks j = -1, 0 (needs > {CHI_INNER})",
            grid.nyquist()
        ))
    })?;
    let xi = grid.wavenumbers();
    let mut multipliers = Vec::with_capacity(j_max as usize + 2);
    multipliers.push(xi.iter().map(|&x| chi(x)).collect::<Vec<_>>());
    for j in 0..=j_max {
        let s = 2f64.powi(-j);
        let row = if j == j_max {
            xi.iter().map(|&x| 1.0 - chi(s * x)).collect()
        } else {
            xi.iter().map(|&x| phi(s * x)).collect()
        };
        multipliers.push(row);
    }
    Ok(DyadicFilterBank {
        grid,
        j_max,
        multipliers,
    })
}

impl DyadicFilterBank {
    pub fn new(grid: GridSpec) -> Result<Self> {
        make_filter_bank(grid)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        -1
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn block_indices(&self) -> impl Iterator<Item = i32> {
        -1..=self.j_max
    }

    /// Multiplier values of block `j` over the FFT bins.
    pub fn multiplier(&self, j: i32) -> Option<&[f64]> {
        if j < -1 || j > self.j_max {
            return None;
        }
        Some(&self.multipliers[(j + 1) as usize])
    }

    /// Multiplier of `S_j = sum_{j' < j} Delta_{j'}`, summed block by block.
    pub fn cutoff_multiplier(&self, j: i32) -> Vec<f64> {
        let n = self.grid.n_points();
        let mut acc = vec![0.0; n];
        for jj in -1..j.min(self.j_max + 1) {
            for (a, m) in acc.iter_mut().zip(&self.multipliers[(jj + 1) as usize]) {
                *a += m;
            }
        }
        acc
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        self.grid.ensure_same(u.grid())
    }

    /// All blocks of `u` from a single forward transform.
    pub fn blocks(&self, u: &GridFunction) -> Result<Vec<GridFunction>> {
        self.check(u)?;
        let coeffs = spectrum(u);
        Ok(self
            .multipliers
            .iter()
            .map(|m| block_from_spectrum(self.grid, &coeffs, m))
            .collect())
    }

    /// Writes `xi_k, chi, phi_0, ..., phi_jmax` over the FFT bins, sorted by
    /// frequency.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["xi_k".to_string(), "chi".to_string()];
        header.extend((0..=self.j_max).map(|j| format!("phi_{j}")));
        w.write_record(&header)?;
        let n = self.grid.n_points();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&k| self.grid.mode_index(k));
        for k in order {
            let mut row = vec![self.grid.wavenumber(k).to_string()];
            row.extend(self.multipliers.iter().map(|m| m[k].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn block_from_spectrum(grid: GridSpec, coeffs: &[Complex64], m: &[f64]) -> GridFunction {
    apply_symbol(grid, coeffs, |k, _| Complex64::new(m[k], 0.0))
}

/// `Delta_j u`. Returns zero for `j < -1`.
pub fn dyadic_block(u: &GridFunction, j: i32, bank: &DyadicFilterBank) -> Result<GridFunction> {
    bank.check(u)?;
    if j < -1 {
        return Ok(GridFunction::zeros(bank.grid));
    }
    let m = bank.multiplier(j).ok_or(GchError::BlockOutOfRange {
        j,
        j_max: bank.j_max,
    })?;
    Ok(block_from_spectrum(bank.grid, &spectrum(u), m))
}

/// `S_j u`: zero for `j <= -1`, the identity for `j > j_max`.
pub fn low_cutoff(u: &GridFunction, j: i32, bank: &DyadicFilterBank) -> Result<GridFunction> {
    bank.check(u)?;
    if j <= -1 {
        return Ok(GridFunction::zeros(bank.grid));
    }
    if j > bank.j_max {
        return Ok(u.clone());
    }
    let m = bank.cutoff_multiplier(j);
    Ok(block_from_spectrum(bank.grid, &spectrum(u), &m))
}
