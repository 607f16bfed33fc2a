//! Dense complex linear algebra with certified error bounds.
//!
//! Indices are zero-based throughout: `sigma(0)` is the largest singular value.

mod bounds;
pub mod matrix;
mod svd;

pub use bounds::{
    angle_bound, lstsq, pseudo_kernel_angle_bound, pseudo_kernel_basis, reciprocal_gap, sigma_interval,
    sigma_interval_all, sigma_radius, solve_ls_with_bound, weyl_gap, AngleBound, LsSolution, PseudoKernel,
};
pub use matrix::{ComplexMatrix, C64};
pub use svd::{svd, svd_with_eps, SvdResult, SVD_BACKWARD_CONSTANT};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("matrix has no entries")]
    Empty,
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("Jacobi SVD did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("need at least two singular values, got {0}")]
    TooFewValues(usize),
    #[error("certification impossible: denominator {0:e} is not positive")]
    CertificationImpossible(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Unit roundoff used by all bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachineEps(f64);

impl MachineEps {
    pub const DEFAULT: f64 = 1.0 / 9007199254740992.0; // 2^-53

    pub fn new(value: f64) -> Result<Self, LinalgError> {
        let upper = 1.0 / 1048576.0; // 2^-20
        if value > 0.0 && value < upper {
            Ok(Self(value))
        } else {
            Err(LinalgError::InvalidInput(format!("machine eps {value:e} outside (0, 2^-20)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for MachineEps {
    fn default() -> Self {
        Self(Self::DEFAULT)
    }
}

/// Certified enclosure `lower ≤ σ ≤ upper` around a computed singular value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaBounds {
    pub computed: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SigmaBounds {
    pub fn new(computed: f64, radius: f64) -> Self {
        Self { computed, lower: (computed - radius).max(0.0), upper: computed + radius }
    }

    pub fn exact(value: f64) -> Self {
        Self { computed: value, lower: value, upper: value }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}
