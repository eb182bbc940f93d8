//! Spark, the Lambda (Vandermonde) matrix and totally full spark.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, CMat, CVec, C64};
use crate::spectral::minors::{mask_elements, minor_count, subsets, sweep_minors, ColumnLevels};
use crate::tolerance::Tolerance;

/// Largest column count accepted by [`spark`].
pub const SPARK_MAX_COLUMNS: usize = 24;
/// Largest number of minors [`totally_full_spark`] will evaluate.
pub const TFS_MINOR_BUDGET: u64 = 50_000_000;

/// `Lambda[s][l] = lambda_s^l` for `l = 0..2d-2`.
pub fn build_lambda_matrix(eigenvalues: &[C64], tol: &Tolerance) -> Result<CMat> {
    let d = eigenvalues.len();
    if d == 0 {
        return Err(Error::InvalidArgument("no eigenvalues given".into()));
    }
    let scale = eigenvalues.iter().fold(1.0, |m: f64, v| m.max(v.norm()));
    for i in 0..d {
        for j in 0..i {
            if (eigenvalues[i] - eigenvalues[j]).norm() <= tol.singularity_tol * scale {
                return Err(Error::InvalidArgument(format!(
                    "eigenvalues {j} and {i} coincide ({})",
                    eigenvalues[i]
                )));
            }
        }
    }
    Ok(CMat::from_fn(d, 2 * d - 1, |s, l| {
        eigenvalues[s].powu(l as u32)
    }))
}

/// Size of the smallest linearly dependent set of columns; `rows + 1` when
/// every `rows`-subset is independent.
pub fn spark(m: &CMat, tol: &Tolerance) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows > cols {
        return Err(Error::InvalidArgument(format!(
            "spark needs a wide matrix, got {rows}x{cols}"
        )));
    }
    if cols > SPARK_MAX_COLUMNS {
        return Err(Error::EnumerationCap {
            what: "spark columns",
            size: cols,
            limit: SPARK_MAX_COLUMNS,
        });
    }
    let columns: Vec<CVec> = (0..cols).map(|j| m.column(j).into_owned()).collect();
    for s in 1..=rows {
        for mask in subsets(cols, s) {
            let chosen: Vec<CVec> = mask_elements(mask)
                .into_iter()
                .map(|j| columns[j].clone())
                .collect();
            if numerical_rank(&chosen, tol.rank_tol) < s {
                return Ok(s);
            }
        }
    }
    Ok(rows + 1)
}

/// A singular square submatrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularMinor {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// `|det|` divided by the product of the submatrix row norms, after
    /// column equilibration.
    pub normalized_det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfsVerdict {
    pub full: bool,
    pub witness: Option<SingularMinor>,
    pub minors_checked: u64,
}

/// Whether every square submatrix is invertible.
///
/// The columns are first scaled to unit norm. A minor then counts as
/// singular when `|det|` is at most `singularity_tol` times the product of
/// the row norms of the submatrix (its Hadamard bound).
/// The witness is the least singular minor ordered by size, then row subset,
/// then column subset, each subset in colex order.
pub fn totally_full_spark(m: &CMat, tol: &Tolerance) -> Result<TfsVerdict> {
    let (nr, nc) = m.shape();
    let total = minor_count(nr, nc);
    if nr > 63 || nc > 32 || total > TFS_MINOR_BUDGET {
        return Err(Error::BudgetExceeded {
            budget: TFS_MINOR_BUDGET,
        });
    }
    let max_size = nr.min(nc);
    let levels = ColumnLevels::new(nc, max_size);
    // every column scaled to unit norm; singularity is unaffected
    let mut m = m.clone();
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    let m = &m;
    let abs2 = m.map(|z| z.norm_sqr());
    // row_sq[j][r][c]: squared norm of row r over column subset c of size j
    let row_sq: Vec<Vec<Vec<f64>>> = (0..=max_size)
        .map(|j| {
            (0..nr)
                .map(|r| {
                    levels
                        .level(j)
                        .masks
                        .iter()
                        .map(|&cm| mask_elements(cm).iter().map(|&c| abs2[(r, c)]).sum())
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut checked = 0u64;
    // canonical order: (size, row mask, column index)
    let mut best: Option<(usize, u64, usize, f64)> = None;
    sweep_minors(m, &levels, |rm, j, vals| {
        let rows = mask_elements(rm);
        checked += vals.len() as u64;
        for (ci, v) in vals.iter().enumerate() {
            let bound: f64 = rows.iter().map(|&r| row_sq[j][r][ci].sqrt()).product();
            let normalized = if bound > 0.0 { v.norm() / bound } else { 0.0 };
            if !(normalized > tol.singularity_tol) {
                let cand = (j, rm, ci, normalized);
                if best.is_none_or(|b| (cand.0, cand.1, cand.2) < (b.0, b.1, b.2)) {
                    best = Some(cand);
                }
                break;
            }
        }
        best.map_or(usize::MAX, |b| b.0)
    });
    let witness = best.map(|(j, rm, ci, normalized)| SingularMinor {
        rows: mask_elements(rm),
        cols: mask_elements(levels.level(j).masks[ci]),
        normalized_det: normalized,
    });
    Ok(TfsVerdict {
        full: witness.is_none(),
        witness,
        minors_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reals(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn lambda_shape_and_entries() {
        let l = build_lambda_matrix(&reals(&[1.0, 2.0]), &Tolerance::default()).unwrap();
        assert_eq!(l.shape(), (2, 3));
        assert_eq!(l[(1, 2)], C64::new(4.0, 0.0));
        assert!(build_lambda_matrix(&reals(&[1.0, 1.0]), &Tolerance::default()).is_err());
    }

    #[test]
    fn spark_of_vandermonde_rows() {
        let l = build_lambda_matrix(&reals(&[1.0, 2.0]), &Tolerance::default()).unwrap();
        assert_eq!(spark(&l, &Tolerance::default()).unwrap(), 3);
        let m = CMat::from_row_slice(2, 3, &reals(&[1.0, 2.0, 0.0, 1.0, 2.0, 0.0]));
        assert_eq!(spark(&m, &Tolerance::default()).unwrap(), 1);
        let eye = CMat::identity(3, 3);
        assert_eq!(spark(&eye, &Tolerance::default()).unwrap(), 4);
        let m = CMat::from_row_slice(2, 3, &reals(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]));
        assert_eq!(spark(&m, &Tolerance::default()).unwrap(), 2);
    }

    #[test]
    fn tfs_examples() {
        let tol = Tolerance::default();
        let one = CMat::from_element(1, 1, C64::new(0.0, 0.0));
        assert!(!totally_full_spark(&one, &tol).unwrap().full);
        let good = build_lambda_matrix(&reals(&[1.0, 2.0]), &tol).unwrap();
        assert!(totally_full_spark(&good, &tol).unwrap().full);
        let bad = build_lambda_matrix(&reals(&[1.0, -1.0]), &tol).unwrap();
        let v = totally_full_spark(&bad, &tol).unwrap();
        assert!(!v.full);
        let w = v.witness.unwrap();
        assert_eq!(w.rows, vec![0, 1]);
        assert_eq!(w.cols, vec![0, 2]);
    }
}
