use super::bank::DyadicFilterBank;
use super::grid::GridFunction;
use crate::error::Result;

/// Paraproducts and remainder of `uv`.
#[derive(Debug, Clone)]
pub struct BonyParts {
    /// `T_u v = sum_j S_{j-1} u Delta_j v`
    pub t_u_v: GridFunction,
    /// `T_v u`
    pub t_v_u: GridFunction,
    /// `R(u, v) = sum_j sum_{|j'-j| <= 1} Delta_j u Delta_{j'} v`
    pub remainder: GridFunction,
    /// `max |T_u v + T_v u + R - uv|`
    pub residual: f64,
}

pub fn bony_decompose(
    u: &GridFunction,
    v: &GridFunction,
    bank: &DyadicFilterBank,
) -> Result<BonyParts> {
    u.grid().ensure_same(v.grid())?;
    let du = bank.blocks(u)?;
    let dv = bank.blocks(v)?;
    let grid = *u.grid();
    let n = grid.n_points();
    let nb = du.len();

    // running partial sums S_{j-1} of each factor, index b = j + 1
    let mut s_u = vec![0.0; n];
    let mut s_v = vec![0.0; n];
    let mut t_u_v = vec![0.0; n];
    let mut t_v_u = vec![0.0; n];
    let mut rem = vec![0.0; n];
    for b in 0..nb {
        // S_{j-1} collects blocks with index < j - 1, i.e. b' < b - 1
        if b >= 2 {
            for i in 0..n {
                s_u[i] += du[b - 2].values()[i];
                s_v[i] += dv[b - 2].values()[i];
            }
        }
        let (ub, vb) = (du[b].values(), dv[b].values());
        for i in 0..n {
            t_u_v[i] += s_u[i] * vb[i];
            t_v_u[i] += s_v[i] * ub[i];
        }
        let lo = b.saturating_sub(1);
        let hi = (b + 1).min(nb - 1);
        for bp in lo..=hi {
            let vp = dv[bp].values();
            for i in 0..n {
                rem[i] += ub[i] * vp[i];
            }
        }
    }
    let residual = (0..n)
        .map(|i| (t_u_v[i] + t_v_u[i] + rem[i] - u.values()[i] * v.values()[i]).abs())
        .fold(0.0_f64, f64::max);
    Ok(BonyParts {
        t_u_v: GridFunction::from_raw(grid, t_u_v),
        t_v_u: GridFunction::from_raw(grid, t_v_u),
        remainder: GridFunction::from_raw(grid, rem),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    #[test]
    fn zero_factor_gives_zero_parts() {
        let g = GridSpec::new(20.0, 128).unwrap();
        let bank = DyadicFilterBank::new(g).unwrap();
        let u = GridFunction::from_fn(g, |x| (-x * x).exp());
        let z = GridFunction::zeros(g);
        let parts = bony_decompose(&u, &z, &bank).unwrap();
        assert_eq!(parts.t_u_v.sup_norm(), 0.0);
        assert_eq!(parts.remainder.sup_norm(), 0.0);
        assert!(parts.t_v_u.sup_norm() < 1e-300 || parts.t_v_u.sup_norm() == 0.0);
    }
}
