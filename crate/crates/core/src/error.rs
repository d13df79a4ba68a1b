use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum GchError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected (L={expected_l}, N={expected_n}), found (L={found_l}, N={found_n})")]
    GridMismatch {
        expected_l: f64,
        expected_n: usize,
        found_l: f64,
        found_n: usize,
    },

    #[error("dyadic block {j} outside [-1, {j_max}]")]
    BlockOutOfRange { j: i32, j_max: i32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("initial data not resolvable on this grid: {0}")]
    Unresolvable(String),

    #[error("incipient blow-up at t={t}: {reason} (|u|_inf={linf_u:.3e}, |u_x|_inf={linf_ux:.3e}, |m|_inf={linf_m:.3e})")]
    Blowup {
        t: f64,
        reason: String,
        linf_u: f64,
        linf_ux: f64,
        linf_m: f64,
    },

    #[error("Lagrangian map lost monotonicity at particle {index} (t={t})")]
    MonotonicityLost { index: usize, t: f64 },

    #[error("wave breaking: y_xi = {min_yxi:.3e} at t={t}")]
    Breaking { t: f64, min_yxi: f64 },

    #[error("CFL violation: |v|_inf*dt/h = {courant:.3} exceeds cap {cap}")]
    CflViolation { courant: f64, cap: f64 },

    #[error("iteration diverged at n={n}: norm {norm:.3e} exceeds {limit:.3e}")]
    Divergence { n: usize, norm: f64, limit: f64 },

    #[error("bound fit failed: {0}")]
    BoundFit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GchError>;
