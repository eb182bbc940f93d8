//! The complement property and the phaseless ambiguity it rules out.
//!
//! The oracle searches for a partition `F = F1 ∪ F2` with both parts rank
//! deficient. Vectors are assigned in order, the first one always to `F1`
//! (the property is symmetric in the two parts). A branch dies as soon as a
//! part reaches rank `n`. Parallel vectors are merged first: copies can
//! always sit on the same side of a witness without raising either rank.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{embed_slice, null_vector, numerical_rank, CMat, CVec, OrthoBasis};
use crate::tolerance::Tolerance;

/// Hard limit on the number of distinct directions.
pub const CP_MAX_VECTORS: usize = 63;
/// Search nodes visited before giving up with `BudgetExceeded`.
pub const CP_NODE_BUDGET: u64 = 20_000_000;

/// Index sets of a bipartition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpVerdict {
    pub holds: bool,
    pub witness: Option<Partition>,
    pub nodes: u64,
}

fn check_family(f: &[Vec<f64>]) -> Result<usize> {
    let n = f
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("empty vector family".into()))?;
    if n == 0 {
        return Err(Error::InvalidArgument("vectors of length 0".into()));
    }
    if let Some(v) = f.iter().find(|v| v.len() != n) {
        return Err(dim_mismatch(format!(
            "family mixes lengths {n} and {}",
            v.len()
        )));
    }
    Ok(n)
}

/// Groups parallel vectors. Returns the representatives and, for each
/// original index, its group; exact zero vectors map to `None`.
fn dedup_directions(f: &[CVec], tol: f64) -> (Vec<CVec>, Vec<Option<usize>>) {
    let mut reps: Vec<CVec> = Vec::new();
    let mut group = Vec::with_capacity(f.len());
    for v in f {
        if v.norm() == 0.0 {
            group.push(None);
            continue;
        }
        let hit = reps.iter().position(|r| {
            let mut b = OrthoBasis::new(v.len());
            b.try_insert(r, tol);
            b.residual(v).1 <= tol
        });
        match hit {
            Some(g) => group.push(Some(g)),
            None => {
                reps.push(v.clone());
                group.push(Some(reps.len() - 1));
            }
        }
    }
    (reps, group)
}

/// Number of pairwise non-parallel nonzero vectors.
pub fn distinct_directions(f: &[Vec<f64>], tol: &Tolerance) -> usize {
    let cf: Vec<CVec> = f.iter().map(|v| embed_slice(v)).collect();
    dedup_directions(&cf, tol.rank_tol).0.len()
}

struct Search<'a> {
    vecs: &'a [CVec],
    n: usize,
    tol: f64,
    nodes: u64,
    budget: u64,
    side: Vec<u8>,
}

impl Search<'_> {
    /// Returns `Ok(true)` when a witness was completed in `self.side`.
    fn descend(&mut self, idx: usize, b1: &OrthoBasis, b2: &OrthoBasis) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded {
                budget: self.budget,
            });
        }
        if idx == self.vecs.len() {
            return Ok(true);
        }
        let v = &self.vecs[idx];
        for s in [1u8, 2] {
            if idx == 0 && s == 2 {
                break;
            }
            let mut next = if s == 1 { b1.clone() } else { b2.clone() };
            next.try_insert(v, self.tol);
            if next.rank() == self.n {
                continue;
            }
            self.side[idx] = s;
            let found = if s == 1 {
                self.descend(idx + 1, &next, b2)?
            } else {
                self.descend(idx + 1, b1, &next)?
            };
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Whether every bipartition of `f` has a part spanning `R^n`.
///
/// On failure the witness is the first deficient partition in depth-first
/// order (vector `i` tried on the first side before the second).
pub fn complement_property(f: &[Vec<f64>], tol: &Tolerance) -> Result<CpVerdict> {
    complement_property_with_budget(f, tol, CP_NODE_BUDGET)
}

pub fn complement_property_with_budget(
    f: &[Vec<f64>],
    tol: &Tolerance,
    budget: u64,
) -> Result<CpVerdict> {
    let n = check_family(f)?;
    let cf: Vec<CVec> = f.iter().map(|v| embed_slice(v)).collect();
    let (reps, group) = dedup_directions(&cf, tol.rank_tol);
    if reps.len() > CP_MAX_VECTORS {
        return Err(Error::EnumerationCap {
            what: "distinct vectors in the complement-property search",
            size: reps.len(),
            limit: CP_MAX_VECTORS,
        });
    }
    if reps.is_empty() {
        // every part spans only {0}
        return Ok(CpVerdict {
            holds: false,
            witness: Some(Partition {
                first: (0..f.len()).collect(),
                second: Vec::new(),
            }),
            nodes: 0,
        });
    }
    let mut search = Search {
        vecs: &reps,
        n,
        tol: tol.rank_tol,
        nodes: 0,
        budget,
        side: vec![0; reps.len()],
    };
    let empty = OrthoBasis::new(n);
    let found = search.descend(0, &empty, &empty)?;
    let witness = found.then(|| {
        let mut p = Partition {
            first: Vec::new(),
            second: Vec::new(),
        };
        for (i, g) in group.iter().enumerate() {
            match g.map(|g| search.side[g]) {
                Some(2) => p.second.push(i),
                _ => p.first.push(i),
            }
        }
        p
    });
    Ok(CpVerdict {
        holds: !found,
        witness,
        nodes: search.nodes,
    })
}

/// `x1 + x2` and `x1 - x2` give the same unsigned samples on `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityPair {
    pub partition: Partition,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// `max_f | |<plus, f>| - |<minus, f>| |`.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionVerdict {
    pub injective: bool,
    pub ambiguity: Option<AmbiguityPair>,
}

/// A unit vector orthogonal to every vector in `rows`.
fn orthogonal_unit(rows: &[&Vec<f64>], n: usize) -> Vec<f64> {
    if rows.is_empty() {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        return e;
    }
    let m = CMat::from_fn(rows.len(), n, |i, j| rows[i][j].into());
    let v = null_vector(&m);
    // real matrix: rotate the kernel vector onto the real axis
    let pivot = v
        .iter()
        .fold(v[0], |p, z| if z.norm() > p.norm() { *z } else { p });
    let phase = pivot.conj() / pivot.norm();
    let x: Vec<f64> = v.iter().map(|z| (z * phase).re).collect();
    let nrm = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    x.into_iter().map(|t| t / nrm).collect()
}

/// Same verdict as [`complement_property`]; on failure also returns the
/// ambiguity pair built from the witness partition.
pub fn does_phaseless_reconstruction(
    f: &[Vec<f64>],
    tol: &Tolerance,
) -> Result<ReconstructionVerdict> {
    let cp = complement_property(f, tol)?;
    let Some(partition) = cp.witness else {
        return Ok(ReconstructionVerdict {
            injective: true,
            ambiguity: None,
        });
    };
    let n = f[0].len();
    let part = |idx: &[usize]| idx.iter().map(|&i| &f[i]).collect::<Vec<_>>();
    let x1 = orthogonal_unit(&part(&partition.first), n);
    let x2 = orthogonal_unit(&part(&partition.second), n);
    let plus: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a - b).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let max_deviation = f
        .iter()
        .map(|v| {
            let s = v
                .iter()
                .map(|t| t * t)
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE);
            (dot(&plus, v).abs() - dot(&minus, v).abs()).abs() / s
        })
        .fold(0.0, f64::max);
    Ok(ReconstructionVerdict {
        injective: false,
        ambiguity: Some(AmbiguityPair {
            partition,
            plus,
            minus,
            max_deviation,
        }),
    })
}

/// Numerical rank of a subfamily, as used to audit witnesses.
pub fn family_rank(f: &[Vec<f64>], idx: &[usize], tol: &Tolerance) -> usize {
    let cols: Vec<CVec> = idx.iter().map(|&i| embed_slice(&f[i])).collect();
    numerical_rank(&cols, tol.rank_tol)
}
