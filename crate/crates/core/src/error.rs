use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BgcError {
    #[error("{field} must be {requirement} (got {value})")]
    InvalidParameter {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("negative time {0} is outside the semigroup")]
    NegativeTime(f64),

    #[error("oscillatory term (dz = ({dp}, {dq})) does not describe a state")]
    NotAState { dp: f64, dq: f64 },

    #[error("pure-state singularity: symplectic eigenvalue {z} is too close to 1")]
    PureStateSingularity { z: f64 },

    #[error("kernel is distributional (Gaussian width {width:e})")]
    DistributionalKernel { width: f64 },

    #[error("quadrature did not converge: estimated error {achieved:e} > tolerance {tolerance:e}")]
    QuadratureNotConverged { achieved: f64, tolerance: f64 },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("step halving failed to converge after {halvings} halvings (change {change:e})")]
    StepHalvingFailed { halvings: u32, change: f64 },

    #[error("real part of the width matrix lost positive definiteness at t = {t}")]
    WidthDegenerate { t: f64 },

    #[error("density matrix has negative eigenvalue mass {mass:e}; grid too coarse")]
    NegativeEigenvalues { mass: f64 },

    #[error("grid mismatch: {0}")]
    Grid(String),

    #[error("hyperbolic functions overflow at |omega t| = {0}")]
    Overflow(f64),
}

pub type Result<T> = std::result::Result<T, BgcError>;

pub(crate) fn require(cond: bool, field: &'static str, requirement: &'static str, value: f64) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(BgcError::InvalidParameter { field, requirement, value })
    }
}
