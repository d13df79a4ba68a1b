//! Discrete Littlewood-Paley calculus on a periodic grid.

mod bank;
mod bony;
mod grid;
mod norms;

pub use bank::{
    block_limit, chi, dyadic_block, CHI_INNER, CHI_OUTER, low_cutoff, make_filter_bank, phi, DyadicFilterBank,
    FILTER_BANK_VERSION,
};
pub use bony::{bony_decompose, BonyParts};
pub use grid::{
    apply_symbol, dealias, derivative, derivative_symbol, resample, spectrum, synthesize,
    GridFunction, GridSpec,
};
pub(crate) use grid::dealias_spectrum;
pub use norms::{
    besov_norm, besov_sequence, interpolation_check, lp_norm, lr_norm, BesovMeter, BesovParams,
    InterpolationReport, INTERPOLATION_REL_TOL,
};
