use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical cutoffs shared by every rank and singularity decision.
///
/// `rank_tol` is a relative singular-value cutoff applied to normalized
/// vectors. `singularity_tol` bounds a determinant after it has been divided
/// by its Hadamard bound, so it is scale free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rank_tol: f64,
    pub singularity_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            singularity_tol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, singularity_tol: f64) -> Result<Self> {
        let t = Self {
            rank_tol,
            singularity_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v < 1.0;
        if ok(self.rank_tol) && ok(self.singularity_tol) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "tolerances must lie in (0, 1), got rank_tol={} singularity_tol={}",
                self.rank_tol, self.singularity_tol
            )))
        }
    }
}
