//! Small dense complex linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn embed_matrix(a: &DMatrix<f64>) -> CMat {
    a.map(|v| C64::new(v, 0.0))
}

pub fn embed_vector(x: &DVector<f64>) -> CVec {
    x.map(|v| C64::new(v, 0.0))
}

pub fn embed_slice(x: &[f64]) -> CVec {
    CVec::from_iterator(x.len(), x.iter().map(|&v| C64::new(v, 0.0)))
}

/// Largest imaginary magnitude in a matrix, used to assert realness.
pub fn max_imag(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.im.abs()))
}

pub fn real_part(a: &CMat) -> DMatrix<f64> {
    a.map(|z| z.re)
}

pub fn spectral_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |m: f64, &s| m.max(s))
}

/// Numerical rank of a list of column vectors. Each vector is normalized
/// first; exact zero vectors are ignored. A singular value counts when it
/// exceeds `rank_tol` times the largest one.
pub fn numerical_rank(cols: &[CVec], rank_tol: f64) -> usize {
    let normalized: Vec<CVec> = cols
        .iter()
        .filter_map(|c| {
            let nrm = c.norm();
            (nrm > 0.0 && nrm.is_finite()).then(|| c / C64::new(nrm, 0.0))
        })
        .collect();
    if normalized.is_empty() {
        return 0;
    }
    let m = CMat::from_columns(&normalized);
    rank_by_svd(&m, rank_tol)
}

pub fn rank_by_svd(m: &CMat, rank_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0, |a: f64, &s| a.max(s));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * smax).count()
}

/// A unit vector spanning (numerically) the kernel of `m`. Wide matrices are
/// padded with zero rows so the thin SVD carries the full right basis.
pub fn null_vector(m: &CMat) -> CVec {
    let (rows, cols) = m.shape();
    let square = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (imin, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(bi, bs), (i, &s)| {
                    if s < bs {
                        (i, s)
                    } else {
                        (bi, bs)
                    }
                },
            );
    v_t.row(imin).adjoint().into_owned()
}

/// Determinant via LU.
pub fn det(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().lu().determinant()
}

/// Incrementally grown orthonormal basis (two-pass modified Gram-Schmidt).
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    dim: usize,
    vectors: Vec<CVec>,
}

impl OrthoBasis {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: Vec::with_capacity(dim),
        }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vectors
    }

    pub fn newest(&self) -> Option<&CVec> {
        self.vectors.last()
    }

    pub fn is_full(&self) -> bool {
        self.vectors.len() == self.dim
    }

    /// Residual norm of unit-normalized `v` after projecting out the basis.
    pub fn residual(&self, v: &CVec) -> (CVec, f64) {
        let nrm = v.norm();
        if nrm == 0.0 {
            return (v.clone(), 0.0);
        }
        let mut w = v / C64::new(nrm, 0.0);
        for _ in 0..2 {
            for q in &self.vectors {
                let c = q.dotc(&w);
                w.axpy(-c, q, ONE);
            }
        }
        let r = w.norm();
        (w, r)
    }

    /// Adds `v` when it leaves the current span by more than `tol`; returns
    /// whether the rank grew.
    pub fn try_insert(&mut self, v: &CVec, tol: f64) -> bool {
        if self.is_full() {
            return false;
        }
        let (w, r) = self.residual(v);
        if r > tol {
            self.vectors.push(w / C64::new(r, 0.0));
            true
        } else {
            false
        }
    }
}
