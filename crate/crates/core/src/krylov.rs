//! Krylov subspaces, (A, x)-annihilators and minimal polynomials.

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{numerical_rank, spectral_norm, CMat, CVec, OrthoBasis, C64, ONE};
use crate::poly::Polynomial;
use crate::tolerance::Tolerance;

/// The first `order` vectors `x, Ax, ..., A^{order-1} x` together with the
/// numerical rank of their span.
#[derive(Debug, Clone)]
pub struct KrylovBasis {
    pub generator: CVec,
    pub order: usize,
    pub vectors: Vec<CVec>,
    pub rank: usize,
}

impl KrylovBasis {
    pub fn new(a: &CMat, x: &CVec, order: usize, tol: &Tolerance) -> Result<Self> {
        check_dims(a, x)?;
        let vectors = krylov_vectors(a, x, order);
        let rank = numerical_rank(&vectors, tol.rank_tol);
        Ok(Self {
            generator: x.clone(),
            order,
            vectors,
            rank,
        })
    }
}

fn check_dims(a: &CMat, x: &CVec) -> Result<()> {
    if !a.is_square() {
        return Err(dim_mismatch(format!(
            "operator is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() != x.len() {
        return Err(dim_mismatch(format!(
            "operator is {n}x{n} but vector has length {}",
            x.len(),
            n = a.nrows()
        )));
    }
    Ok(())
}

/// `[x, Ax, ..., A^{count-1} x]`.
pub fn krylov_vectors(a: &CMat, x: &CVec, count: usize) -> Vec<CVec> {
    let mut out = Vec::with_capacity(count);
    let mut v = x.clone();
    for i in 0..count {
        if i > 0 {
            v = a * &v;
        }
        out.push(v.clone());
    }
    out
}

/// Dimension of the maximal Krylov subspace of `(a, x)`.
///
/// The sequence is grown Arnoldi-style: the next candidate is `A q` for the
/// newest orthonormal direction `q`, which spans the same space as the raw
/// powers without their blow-up. Growth stops at the first candidate whose
/// residual against the current span is at most `rank_tol`. An exactly zero
/// `x` has rank 0.
pub fn krylov_rank(a: &CMat, x: &CVec, tol: &Tolerance) -> Result<usize> {
    check_dims(a, x)?;
    if x.norm() == 0.0 {
        return Ok(0);
    }
    let mut basis = OrthoBasis::new(x.len());
    let mut candidate = x.clone();
    while basis.try_insert(&candidate, tol.rank_tol) && !basis.is_full() {
        candidate = a * basis.newest().expect("basis is nonempty");
    }
    Ok(basis.rank())
}

/// Horner evaluation of `p(A) x` without forming `p(A)`.
pub fn eval_poly_on_operator(p: &Polynomial, a: &CMat, x: &CVec) -> Result<CVec> {
    check_dims(a, x)?;
    let coeffs = p.coeffs();
    let Some((&lead, rest)) = coeffs.split_last() else {
        return Ok(CVec::zeros(x.len()));
    };
    let mut v = x * lead;
    for &c in rest.iter().rev() {
        v = a * &v;
        v.axpy(c, x, ONE);
    }
    Ok(v)
}

/// Solves `min || K c - b ||` with columns of `K` scaled to unit norm first.
fn scaled_least_squares(cols: &[CVec], b: &CVec) -> Result<Vec<C64>> {
    let scales: Vec<f64> = cols
        .iter()
        .map(|c| {
            let n = c.norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let scaled: Vec<CVec> = cols
        .iter()
        .zip(&scales)
        .map(|(c, &s)| c / C64::new(s, 0.0))
        .collect();
    let k = CMat::from_columns(&scaled);
    let svd = k.svd(true, true);
    let sol = svd
        .solve(b, 0.0)
        .map_err(|e| Error::NumericalDegeneracy(format!("least squares failed: {e}")))?;
    Ok(sol
        .iter()
        .zip(&scales)
        .map(|(&c, &s)| c / C64::new(s, 0.0))
        .collect())
}

fn monic_from_solution(degree: usize, sol: &[C64]) -> Polynomial {
    let mut coeffs: Vec<C64> = sol.iter().map(|&c| -c).collect();
    coeffs.resize(degree, C64::new(0.0, 0.0));
    coeffs.push(ONE);
    Polynomial::new(coeffs)
}

/// The monic `(A, x)`-annihilator: least-degree `p` with `p(A) x = 0`.
///
/// Its degree is [`krylov_rank`]; the coefficients express `A^k x` in the
/// Krylov basis by least squares. The residual is checked explicitly
/// against `singularity_tol * ||x|| * max(1, ||A||^k)`.
pub fn annihilator(a: &CMat, x: &CVec, tol: &Tolerance) -> Result<Polynomial> {
    let k = krylov_rank(a, x, tol)?;
    if k == 0 {
        return Err(Error::InvalidArgument(
            "the zero vector has no monic annihilator".into(),
        ));
    }
    let mut powers = krylov_vectors(a, x, k + 1);
    let target = powers.pop().unwrap();
    let sol = scaled_least_squares(&powers, &target)?;
    let p = monic_from_solution(k, &sol);

    let residual = eval_poly_on_operator(&p, a, x)?.norm();
    let bound = tol.singularity_tol * x.norm() * spectral_norm(a).powi(k as i32).max(1.0);
    if !(residual <= bound) {
        return Err(Error::NumericalDegeneracy(format!(
            "annihilator residual {residual:e} exceeds {bound:e} (degree {k})"
        )));
    }
    Ok(p)
}

/// Numerical minimal polynomial of a dense matrix, obtained by running the
/// Krylov growth on `vec(I), vec(A), vec(A^2), ...` in the space of
/// matrices. Operators with an explicit factorization should prefer
/// `OperatorSpec::minimal_polynomial`, which is exact.
pub fn minimal_polynomial(a: &CMat, tol: &Tolerance) -> Result<Polynomial> {
    if !a.is_square() {
        return Err(dim_mismatch("minimal polynomial needs a square matrix"));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Polynomial::one());
    }
    let vec_of = |m: &CMat| CVec::from_column_slice(m.as_slice());
    let mut basis = OrthoBasis::new(n * n);
    let mut powers: Vec<CVec> = Vec::new();
    let mut current = CMat::identity(n, n);
    loop {
        let v = vec_of(&current);
        if !basis.try_insert(&v, tol.rank_tol) {
            let sol = scaled_least_squares(&powers, &v)?;
            let p = monic_from_solution(powers.len(), &sol);
            return Ok(p);
        }
        powers.push(v);
        current = a * &current;
        if powers.len() > n {
            return Err(Error::NumericalDegeneracy(
                "minimal polynomial degree exceeded the dimension".into(),
            ));
        }
    }
}
