use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bank::DyadicFilterBank;
use super::grid::GridFunction;
use crate::error::{GchError, Result};

/// Rectangle-rule `L^p` norm; `p = inf` gives the sup norm.
pub fn lp_norm(u: &GridFunction, p: f64) -> f64 {
    if p.is_infinite() {
        return u.sup_norm();
    }
    let h = u.grid().spacing();
    if p == 1.0 {
        return h * u.values().iter().map(|v| v.abs()).sum::<f64>();
    }
    if p == 2.0 {
        return (h * u.values().iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    // scale by the sup norm to keep |u|^p in range
    let top = u.sup_norm();
    if top == 0.0 {
        return 0.0;
    }
    let s: f64 = u.values().iter().map(|v| (v.abs() / top).powf(p)).sum();
    top * (h * s).powf(1.0 / p)
}

/// `l^r` norm of a finite sequence.
pub fn lr_norm(seq: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return seq.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    }
    if r == 1.0 {
        return seq.iter().map(|v| v.abs()).sum();
    }
    let top = seq.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if top == 0.0 {
        return 0.0;
    }
    top * seq.iter().map(|v| (v.abs() / top).powf(r)).sum::<f64>().powf(1.0 / r)
}

/// Indices `(s, p, r)` of `B^s_{p,r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        let params = Self { s, p, r };
        params.validate()?;
        Ok(params)
    }

    /// The critical space `B^{1/p}_{p,1}`.
    pub fn critical(p: f64) -> Result<Self> {
        Self::new(1.0 / p, p, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(GchError::InvalidParameter(format!("s = {}", self.s)));
        }
        if self.p.is_nan() || self.p < 1.0 {
            return Err(GchError::InvalidParameter(format!("p = {} < 1", self.p)));
        }
        if self.r.is_nan() || self.r < 1.0 {
            return Err(GchError::InvalidParameter(format!("r = {} < 1", self.r)));
        }
        Ok(())
    }
}

/// The weighted block sequence `2^{js} |Delta_j u|_{L^p}` for `j = -1..=j_max`.
pub fn besov_sequence(
    u: &GridFunction,
    params: &BesovParams,
    bank: &DyadicFilterBank,
) -> Result<Vec<f64>> {
    let blocks = bank.blocks(u)?;
    Ok(bank
        .block_indices()
        .zip(blocks.iter())
        .map(|(j, b)| 2f64.powf(j as f64 * params.s) * lp_norm(b, params.p))
        .collect())
}

pub fn besov_norm(u: &GridFunction, params: &BesovParams, bank: &DyadicFilterBank) -> Result<f64> {
    params.validate()?;
    Ok(lr_norm(&besov_sequence(u, params, bank)?, params.r))
}

/// Outcome of one interpolation-inequality probe.
#[derive(Debug, Clone, Serialize)]
pub struct InterpolationReport {
    pub s1: f64,
    pub s2: f64,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, 0 when both sides vanish.
    pub ratio: f64,
    pub holds: bool,
}

pub const INTERPOLATION_REL_TOL: f64 = 1e-12;

/// Checks `|u|_{B^{l s1 + (1-l) s2}} <= |u|_{B^{s1}}^l |u|_{B^{s2}}^{1-l}`
/// with constant one.
#[allow(clippy::too_many_arguments)]
pub fn interpolation_check(
    u: &GridFunction,
    s1: f64,
    s2: f64,
    lambda: f64,
    p: f64,
    r: f64,
    bank: &DyadicFilterBank,
) -> Result<InterpolationReport> {
    if !(s1 < s2) {
        return Err(GchError::InvalidParameter(format!("need s1 < s2, got {s1}, {s2}")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(GchError::InvalidParameter(format!("lambda = {lambda} not in (0,1)")));
    }
    let s = lambda * s1 + (1.0 - lambda) * s2;
    let lhs = besov_norm(u, &BesovParams::new(s, p, r)?, bank)?;
    let n1 = besov_norm(u, &BesovParams::new(s1, p, r)?, bank)?;
    let n2 = besov_norm(u, &BesovParams::new(s2, p, r)?, bank)?;
    let rhs = n1.powf(lambda) * n2.powf(1.0 - lambda);
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(InterpolationReport {
        s1,
        s2,
        lambda,
        lhs,
        rhs,
        ratio,
        holds: lhs <= rhs * (1.0 + INTERPOLATION_REL_TOL),
    })
}

/// A filter bank paired with fixed Besov indices; the norm every monitor uses.
#[derive(Debug, Clone)]
pub struct BesovMeter {
    bank: Arc<DyadicFilterBank>,
    params: BesovParams,
}

impl BesovMeter {
    pub fn new(bank: Arc<DyadicFilterBank>, params: BesovParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { bank, params })
    }

    /// `B^{1/p}_{p,1}` on a fresh bank for `grid`.
    pub fn critical(grid: super::GridSpec, p: f64) -> Result<Self> {
        Self::new(
            Arc::new(DyadicFilterBank::new(grid)?),
            BesovParams::critical(p)?,
        )
    }

    pub fn bank(&self) -> &DyadicFilterBank {
        &self.bank
    }

    pub fn bank_arc(&self) -> Arc<DyadicFilterBank> {
        Arc::clone(&self.bank)
    }

    pub fn params(&self) -> &BesovParams {
        &self.params
    }

    pub fn norm(&self, u: &GridFunction) -> Result<f64> {
        besov_norm(u, &self.params, &self.bank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    #[test]
    fn lp_of_one_and_zero() {
        let g = GridSpec::new(20.0, 64).unwrap();
        let one = GridFunction::constant(g, 1.0);
        assert!((lp_norm(&one, 2.0) - 40f64.sqrt()).abs() < 1e-13);
        assert!((lp_norm(&one, 1.0) - 40.0).abs() < 1e-12);
        assert!((lp_norm(&one, 3.0) - 40f64.powf(1.0 / 3.0)).abs() < 1e-13);
        let zero = GridFunction::zeros(g);
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            assert_eq!(lp_norm(&zero, p), 0.0);
        }
    }

    #[test]
    fn lr_norm_orders() {
        let s = [3.0, -4.0, 0.5];
        assert_eq!(lr_norm(&s, 1.0), 7.5);
        assert_eq!(lr_norm(&s, f64::INFINITY), 4.0);
        assert!((lr_norm(&[3.0, 4.0], 2.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(BesovParams::new(0.5, 0.5, 1.0).is_err());
        assert!(BesovParams::new(0.5, 2.0, 0.9).is_err());
        assert!(BesovParams::new(0.5, f64::INFINITY, f64::INFINITY).is_ok());
        let c = BesovParams::critical(4.0).unwrap();
        assert_eq!((c.s, c.p, c.r), (0.25, 4.0, 1.0));
    }

    #[test]
    fn interpolation_rejects_bad_parameters() {
        let g = GridSpec::new(20.0, 64).unwrap();
        let bank = DyadicFilterBank::new(g).unwrap();
        let u = GridFunction::zeros(g);
        assert!(interpolation_check(&u, 1.0, 0.0, 0.5, 2.0, 1.0, &bank).is_err());
        assert!(interpolation_check(&u, 0.0, 1.0, 1.0, 2.0, 1.0, &bank).is_err());
        let rep = interpolation_check(&u, 0.0, 1.0, 0.5, 2.0, 1.0, &bank).unwrap();
        assert!(rep.holds);
    }
}
