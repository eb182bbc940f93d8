use serde::Serialize;

use crate::error::Result;
use crate::linalg::{CMat, CVec, C64, ONE};
use crate::spectral::operator::OperatorSpec;
use crate::spectral::spark::build_lambda_matrix;
use crate::tolerance::Tolerance;

/// Distinct eigenvalues, the coordinate subspaces `E_s` spanned by the
/// cyclic vectors of their Jordan blocks, and the power matrix `Lambda`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralProfile {
    pub n: usize,
    pub distinct_eigenvalues: Vec<C64>,
    /// Multiplicity of each root in the minimal polynomial.
    pub multiplicities: Vec<usize>,
    /// Canonical coordinates `k_j^s` whose basis vectors span `E_s`.
    pub penthouse_bases: Vec<Vec<usize>>,
    #[serde(skip)]
    pub lambda_matrix: CMat,
}

impl SpectralProfile {
    pub fn d(&self) -> usize {
        self.distinct_eigenvalues.len()
    }

    /// `n x r_s` matrix of standard basis columns spanning `E_s`.
    pub fn basis_matrix(&self, s: usize) -> CMat {
        let coords = &self.penthouse_bases[s];
        let mut m = CMat::zeros(self.n, coords.len());
        for (j, &k) in coords.iter().enumerate() {
            m[(k, j)] = ONE;
        }
        m
    }

    /// Coordinates of `P_s v` in the basis of `E_s`.
    pub fn project(&self, s: usize, v: &CVec) -> CVec {
        let coords = &self.penthouse_bases[s];
        CVec::from_iterator(coords.len(), coords.iter().map(|&k| v[k]))
    }
}

/// The penthouse family of an operator given by its factorization.
pub fn penthouse_family(spec: &OperatorSpec, tol: &Tolerance) -> Result<SpectralProfile> {
    let roots = spec.roots();
    let distinct: Vec<C64> = roots.iter().map(|r| r.value).collect();
    Ok(SpectralProfile {
        n: spec.n(),
        lambda_matrix: build_lambda_matrix(&distinct, tol)?,
        distinct_eigenvalues: distinct,
        multiplicities: roots.iter().map(|r| r.multiplicity()).collect(),
        penthouse_bases: roots.iter().map(|r| r.first_rows.clone()).collect(),
    })
}
