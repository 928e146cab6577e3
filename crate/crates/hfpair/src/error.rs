use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum HfError {
    #[error("potential must be strictly positive (min sampled value {min})")]
    NonPositivePotential { min: f64 },

    #[error("operation requires a nonzero pair state")]
    ZeroState,

    #[error("analytic gradient fields (∇V·x, ∇ρ·x) are not available on this problem")]
    MissingGradientFields,

    #[error("state does not satisfy the solution identities (residual {residual:.3e} > {allowed:.3e})")]
    NotASolution { residual: f64, allowed: f64 },

    #[error("requested fibering root does not exist (dip value {dip:.3e})")]
    RootAbsent { dip: f64 },

    #[error("fibering map has no positive p-power coefficient; the ray never meets the Nehari set")]
    NoPositivePower,

    #[error("fibering map is degenerate at the dip (|dip| {dip:.3e} below tolerance); refusing projection")]
    DegenerateFibering { dip: f64 },

    #[error("construction does not fit inside the grid box: {0}")]
    BoxTooSmall(String),

    #[error("solver did not converge after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("energy diverged below the sentinel ({energy:.3e}); functional unbounded along this path")]
    Diverged { energy: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("grids do not match")]
    GridMismatch,

    #[error("config error: {0}")]
    Config(String),

    #[error("guard violation: {0}")]
    Guard(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HfError>;
