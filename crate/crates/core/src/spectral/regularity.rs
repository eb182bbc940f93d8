//! Exhaustive iteration-regularity test.
//!
//! For `k >= 2` and a multiset `S` of `k` minimal-polynomial roots, a
//! `k`-partial annihilator vanishing on `S` with support in a `k`-set
//! `T ⊂ {0..2k-2}` exists exactly when the polynomials `x^t mod q_S`
//! (`t ∈ T`) are dependent, where `q_S = prod_{s ∈ S} (x - lambda_s)`. The
//! residues form the `k x (2k-1)` matrix `[I | R]` with column `j` of `R`
//! holding `x^{k+j} mod q_S`. Its maximal minors are, up to sign, the square
//! minors of `R` whose rows avoid `T ∩ {0..k-1}`.
//!
//! Since `0` is no root, `x^{min T}` can be divided out of any violating
//! polynomial, so it suffices to take `0 ∈ T`. Those minors are exactly the
//! square minors of `R` with row 0 deleted, all of which are swept.
//!
//! Singularity is judged on the confluent Vandermonde submatrix
//! `V_{S,T} = V_{S,0..k} [I | R]_{:,T}` with its columns scaled to unit
//! norm over all of `S`: a minor is singular when the determinant is at most
//! `singularity_tol` times the product of the row norms. Scaling the columns
//! first makes the test invariant under `A -> cA`, as regularity itself is.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{null_vector, CMat, C64, ONE, ZERO};
use crate::poly::Polynomial;
use crate::spectral::minors::{mask_elements, sweep_minors, ColumnLevels};
use crate::spectral::operator::OperatorSpec;
use crate::tolerance::Tolerance;

/// Largest minimal-polynomial degree the exhaustive search accepts.
pub const REGULARITY_MAX_DEGREE: usize = 16;
/// Largest ambient dimension the exhaustive search accepts.
pub const REGULARITY_MAX_DIMENSION: usize = 24;

/// A `k`-partial annihilator with at most `k` nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationWitness {
    pub k: usize,
    /// The roots it vanishes on, repeated by multiplicity.
    pub roots: Vec<C64>,
    /// Its support.
    pub exponents: Vec<usize>,
    pub polynomial: Polynomial,
    /// Column-equilibrated `|det V_{S,T}|` over the product of its row norms.
    pub normalized_det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityVerdict {
    pub regular: bool,
    pub witness: Option<IterationWitness>,
    /// Smallest normalized determinant met (the witness's when irregular);
    /// infinite when nothing beyond `k = 1` had to be checked.
    pub margin: f64,
}

/// A Jordan cell `lambda I + N` is iteration regular iff `lambda != 0`.
pub fn jordan_cell_regular(lambda: C64, n: usize) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidArgument("Jordan cell of size 0".into()));
    }
    Ok(lambda != ZERO)
}

/// Decides iteration regularity from the factorization of `spec`; `B` plays
/// no role.
pub fn iteration_regular(spec: &OperatorSpec, tol: &Tolerance) -> Result<RegularityVerdict> {
    let n = spec.n();
    if n > REGULARITY_MAX_DIMENSION {
        return Err(Error::EnumerationCap {
            what: "dimension",
            size: n,
            limit: REGULARITY_MAX_DIMENSION,
        });
    }
    let roots: Vec<(C64, usize)> = spec
        .roots()
        .iter()
        .map(|r| (r.value, r.multiplicity()))
        .collect();
    iteration_regular_roots(&roots, tol)
}

/// Same test from `(root, multiplicity in the minimal polynomial)` pairs.
pub fn iteration_regular_roots(
    roots: &[(C64, usize)],
    tol: &Tolerance,
) -> Result<RegularityVerdict> {
    let degree: usize = roots.iter().map(|r| r.1).sum();
    if degree > REGULARITY_MAX_DEGREE {
        return Err(Error::EnumerationCap {
            what: "minimal polynomial degree",
            size: degree,
            limit: REGULARITY_MAX_DEGREE,
        });
    }
    if roots.iter().any(|r| r.1 == 0) {
        return Err(Error::InvalidArgument("root with multiplicity 0".into()));
    }
    let scale = roots.iter().fold(1.0, |m: f64, r| m.max(r.0.norm()));

    // k = 1: only c x^t, which vanishes on a root only if that root is 0
    if let Some(&(zero, _)) = roots
        .iter()
        .find(|r| r.0.norm() <= tol.singularity_tol * scale)
    {
        return Ok(RegularityVerdict {
            regular: false,
            witness: Some(IterationWitness {
                k: 1,
                roots: vec![zero],
                exponents: vec![1],
                polynomial: Polynomial::monomial(1),
                normalized_det: 0.0,
            }),
            margin: 0.0,
        });
    }

    let conj_of = conjugate_pairing(roots, scale, tol);
    let mut margin = f64::INFINITY;
    for k in 2..=degree {
        let mut multisets = Vec::new();
        compositions(roots, k, &mut vec![0; roots.len()], 0, &mut multisets);
        if let Some(pairing) = &conj_of {
            // S and conj(S) have conjugate minors; keep the lex-smaller one
            multisets.retain(|a| {
                let mut c = vec![0; a.len()];
                for (s, &m) in a.iter().enumerate() {
                    c[pairing[s]] = m;
                }
                c >= *a
            });
        }
        let levels = ColumnLevels::new(k - 1, k - 1);
        // nonnegative floats order like their bit patterns
        let least = AtomicU64::new(f64::INFINITY.to_bits());
        let found = multisets.par_iter().find_map_first(|a| {
            match check_multiset(roots, a, k, &levels, tol) {
                Ok(m) => {
                    least.fetch_min(m.to_bits(), Ordering::Relaxed);
                    None
                }
                Err(w) => Some(w),
            }
        });
        if let Some(w) = found {
            return Ok(RegularityVerdict {
                regular: false,
                margin: w.normalized_det,
                witness: Some(w),
            });
        }
        margin = margin.min(f64::from_bits(least.into_inner()));
    }
    Ok(RegularityVerdict {
        regular: true,
        witness: None,
        margin,
    })
}

/// `pairing[s]` is the index of `conj(lambda_s)` when the spectrum is closed
/// under conjugation with matching multiplicities.
fn conjugate_pairing(roots: &[(C64, usize)], scale: f64, tol: &Tolerance) -> Option<Vec<usize>> {
    roots
        .iter()
        .map(|&(v, m)| {
            roots.iter().position(|&(w, mw)| {
                mw == m && (w - v.conj()).norm() <= tol.singularity_tol * scale
            })
        })
        .collect()
}

/// Multiplicity vectors `a` with `a_s <= m_s` and `sum a = k`, in ascending
/// lexicographic order.
fn compositions(
    roots: &[(C64, usize)],
    k: usize,
    cur: &mut Vec<usize>,
    pos: usize,
    out: &mut Vec<Vec<usize>>,
) {
    let used: usize = cur[..pos].iter().sum();
    if pos == roots.len() {
        if used == k {
            out.push(cur.clone());
        }
        return;
    }
    let room: usize = roots[pos + 1..].iter().map(|r| r.1).sum();
    let lo = k.saturating_sub(used + room);
    let hi = roots[pos].1.min(k - used);
    for a in lo..=hi {
        cur[pos] = a;
        compositions(roots, k, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

/// `k x (k-1)` matrix whose column `j` holds the coefficients of
/// `x^{k+j} mod q`, `q` monic of degree `k`.
fn residue_matrix(q: &Polynomial, k: usize) -> CMat {
    let qc = q.coeffs();
    let mut r = CMat::zeros(k, k.saturating_sub(1));
    let mut cur: Vec<C64> = qc[..k].iter().map(|&c| -c).collect();
    for j in 0..k - 1 {
        for i in 0..k {
            r[(i, j)] = cur[i];
        }
        // multiply by x and reduce
        let lead = cur[k - 1];
        let mut next = vec![ZERO; k];
        for i in (1..k).rev() {
            next[i] = cur[i - 1];
        }
        for i in 0..k {
            next[i] -= lead * qc[i];
        }
        cur = next;
    }
    r
}

/// The confluent Vandermonde matrix `V_S` over exponents `0..=2k-2`, with
/// row `(lambda, m)` holding the `m`-th derivative of `x^t` at `lambda`,
/// after scaling every column to unit norm (`U = V diag(1/c)`).
struct Vandermonde {
    /// `weights[r][t] = |U[r][t]|^2`.
    weights: Vec<Vec<f64>>,
    /// Squared column norms `c_t^2` of `V`.
    col_norm2: Vec<f64>,
    /// `|det U[:, 0..k]|^2`.
    head_det2: f64,
}

impl Vandermonde {
    fn new(roots: &[(C64, usize)], k: usize) -> Self {
        let width = 2 * k - 1;
        let mut v = CMat::zeros(k, width);
        let mut row = 0;
        for &(lambda, mult) in roots {
            for m in 0..mult {
                for t in m..width {
                    let falling: f64 = ((t - m + 1)..=t).map(|x| x as f64).product();
                    v[(row, t)] = lambda.powu((t - m) as u32) * falling;
                }
                row += 1;
            }
        }
        let col_norm2: Vec<f64> = (0..width).map(|t| v.column(t).norm_squared()).collect();
        for t in 0..width {
            let c = col_norm2[t].sqrt();
            v.column_mut(t).iter_mut().for_each(|z| *z /= c);
        }
        let head_det2 = crate::linalg::det(&v.columns(0, k).into_owned()).norm_sqr();
        let weights = (0..k)
            .map(|r| (0..width).map(|t| v[(r, t)].norm_sqr()).collect())
            .collect();
        Self {
            weights,
            col_norm2,
            head_det2,
        }
    }
}

/// Sweeps every reduced minor for the multiset `mult`; returns the least
/// violation in (size, row subset, column subset) order, or the smallest
/// normalized determinant seen.
fn check_multiset(
    roots: &[(C64, usize)],
    mult: &[usize],
    k: usize,
    levels: &ColumnLevels,
    tol: &Tolerance,
) -> std::result::Result<f64, IterationWitness> {
    let chosen: Vec<(C64, usize)> = roots
        .iter()
        .zip(mult)
        .filter(|(_, &m)| m > 0)
        .map(|(r, &m)| (r.0, m))
        .collect();
    let flat: Vec<C64> = chosen
        .iter()
        .flat_map(|&(v, m)| std::iter::repeat_n(v, m))
        .collect();
    let q = Polynomial::from_roots(flat.iter().copied());
    let r = residue_matrix(&q, k);
    let reduced = r.rows(1, k - 1).into_owned();
    let vdm = Vandermonde::new(&chosen, k);

    // det U_{S,T} = det U_{S,0..k} * minor * prod_{deleted t} c_t / prod_{t in k + C} c_t
    // col_weight[j][c * k + row]: squared norm of a U row over exponents k + C
    let mut col_weight: Vec<Vec<f64>> = Vec::new();
    let mut col_scale2: Vec<Vec<f64>> = Vec::new();
    for j in 0..=levels.max_size() {
        let masks = &levels.level(j).masks;
        let mut w = vec![0.0; masks.len() * k];
        let mut sc = vec![1.0; masks.len()];
        for (ci, &cm) in masks.iter().enumerate() {
            for b in mask_elements(cm) {
                sc[ci] *= vdm.col_norm2[k + b];
                for (row, wr) in vdm.weights.iter().enumerate() {
                    w[ci * k + row] += wr[k + b];
                }
            }
        }
        col_weight.push(w);
        col_scale2.push(sc);
    }

    let tol2 = tol.singularity_tol * tol.singularity_tol;
    let mut head_weight = vec![0.0; k];
    let mut margin2 = f64::INFINITY;
    let mut best: Option<(usize, u64, usize, f64)> = None;
    sweep_minors(&reduced, levels, |rm, j, vals| {
        // exponents below k stay in T unless their row is deleted
        for (row, w) in vdm.weights.iter().enumerate() {
            head_weight[row] = (0..k)
                .filter(|&t| t == 0 || rm & (1u64 << (t - 1)) == 0)
                .map(|t| w[t])
                .sum();
        }
        let deleted2: f64 = mask_elements(rm)
            .into_iter()
            .map(|i| vdm.col_norm2[i + 1])
            .product();
        let scale = vdm.head_det2 * deleted2;
        let cw = &col_weight[j];
        let cs = &col_scale2[j];
        for (ci, v) in vals.iter().enumerate() {
            let mut bound = 1.0;
            for row in 0..k {
                bound *= head_weight[row] + cw[ci * k + row];
            }
            let val2 = v.norm_sqr() * scale / cs[ci];
            if val2 <= tol2 * bound {
                let cand = (j, rm, ci);
                if best.is_none_or(|b| cand < (b.0, b.1, b.2)) {
                    best = Some((j, rm, ci, (val2 / bound).sqrt()));
                }
                break;
            }
            let ratio = val2 / bound;
            if ratio < margin2 {
                margin2 = ratio;
            }
        }
        best.map_or(usize::MAX, |b| b.0)
    });

    let Some((j, rm, ci, normalized)) = best else {
        return Ok(margin2.sqrt());
    };
    let skipped_rows: Vec<usize> = mask_elements(rm).into_iter().map(|i| i + 1).collect();
    let mut exponents: Vec<usize> = (0..k).filter(|i| !skipped_rows.contains(i)).collect();
    exponents.extend(
        mask_elements(levels.level(j).masks[ci])
            .into_iter()
            .map(|c| k + c),
    );
    let m = CMat::from_fn(k, k, |i, col| {
        let t = exponents[col];
        if t < k {
            if i == t {
                ONE
            } else {
                ZERO
            }
        } else {
            r[(i, t - k)]
        }
    });
    let c = null_vector(&m);
    let mut coeffs = vec![ZERO; exponents[k - 1] + 1];
    for (idx, &t) in exponents.iter().enumerate() {
        coeffs[t] = c[idx];
    }
    let polynomial = Polynomial::new(coeffs)
        .trimmed(tol.rank_tol)
        .monic()
        .unwrap_or_else(|_| Polynomial::monomial(k));
    Err(IterationWitness {
        k,
        roots: flat,
        exponents,
        polynomial,
        normalized_det: normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn residues_of_rotation() {
        let q = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        let r = residue_matrix(&q, 2);
        assert_eq!(r[(0, 0)], c(-1.0, 0.0));
        assert_eq!(r[(1, 0)], ZERO);
    }

    #[test]
    fn residues_match_division() {
        let q = Polynomial::from_roots([c(0.5, 0.0), c(-2.0, 1.0), c(3.0, 0.0)]);
        let r = residue_matrix(&q, 3);
        for j in 0..2 {
            let (_, rem) = Polynomial::monomial(3 + j).div_rem(&q).unwrap();
            for i in 0..3 {
                let want = rem.coeffs().get(i).copied().unwrap_or(ZERO);
                assert!((r[(i, j)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn compositions_respect_bounds() {
        let roots = [(c(1.0, 0.0), 2), (c(2.0, 0.0), 1)];
        let mut out = Vec::new();
        compositions(&roots, 2, &mut vec![0; 2], 0, &mut out);
        assert_eq!(out, vec![vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn rotation_witness() {
        let roots = [(c(0.0, 1.0), 1), (c(0.0, -1.0), 1)];
        let v = iteration_regular_roots(&roots, &Tolerance::default()).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.k, 2);
        assert_eq!(w.exponents, vec![0, 2]);
        let want = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        assert!((&w.polynomial - &want).coeff_norm() < 1e-12);
    }

    #[test]
    fn plus_minus_one_fails_with_x2_minus_1() {
        let roots = [(c(1.0, 0.0), 1), (c(-1.0, 0.0), 1)];
        let v = iteration_regular_roots(&roots, &Tolerance::default()).unwrap();
        let w = v.witness.unwrap();
        let want = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        assert!((&w.polynomial - &want).coeff_norm() < 1e-12);
    }

    #[test]
    fn jordan_cells() {
        assert!(jordan_cell_regular(c(3.0, 0.0), 4).unwrap());
        assert!(!jordan_cell_regular(ZERO, 2).unwrap());
        assert!(jordan_cell_regular(c(-1.0, 0.0), 1).unwrap());
        let single = [(c(3.0, 0.0), 4)];
        assert!(
            iteration_regular_roots(&single, &Tolerance::default())
                .unwrap()
                .regular
        );
    }
}
