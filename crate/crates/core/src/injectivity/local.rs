//! Local complementarity with respect to the penthouse family.
//!
//! A partition `{I1, I2}` violates the property when each side fails to
//! span some `E_j`. For every pair `(j1, j2)` we search for a partition with
//! `I1` deficient in `E_{j1}` and `I2` deficient in `E_{j2}`, exactly like
//! the complement-property search but with one target space per side.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{CVec, OrthoBasis};
use crate::spectral::SpectralProfile;
use crate::tolerance::Tolerance;

pub const LC_MAX_INDICES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LcWitness {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    /// Penthouse index left unspanned by `first`.
    pub first_fails_at: usize,
    /// Penthouse index left unspanned by `second`.
    pub second_fails_at: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcVerdict {
    pub holds: bool,
    pub witness: Option<LcWitness>,
}

struct PairSearch<'a> {
    one: &'a [CVec],
    two: &'a [CVec],
    dim_one: usize,
    dim_two: usize,
    tol: f64,
    side: Vec<u8>,
}

impl PairSearch<'_> {
    fn descend(&mut self, idx: usize, b1: &OrthoBasis, b2: &OrthoBasis) -> bool {
        if idx == self.one.len() {
            return true;
        }
        for s in [1u8, 2] {
            let (mut next, full) = if s == 1 {
                (b1.clone(), self.dim_one)
            } else {
                (b2.clone(), self.dim_two)
            };
            let v = if s == 1 {
                &self.one[idx]
            } else {
                &self.two[idx]
            };
            next.try_insert(v, self.tol);
            if next.rank() == full {
                continue;
            }
            self.side[idx] = s;
            let found = if s == 1 {
                self.descend(idx + 1, &next, b2)
            } else {
                self.descend(idx + 1, b1, &next)
            };
            if found {
                return true;
            }
        }
        false
    }
}

/// Whether `psi` (canonical coordinates) is locally complementary with
/// respect to the penthouse family of `profile`. The witness is the first
/// violation over `(j1, j2)` in lexicographic order, then depth first with
/// each index tried on the first side before the second.
pub fn locally_complementary(
    psi: &[CVec],
    profile: &SpectralProfile,
    tol: &Tolerance,
) -> Result<LcVerdict> {
    if psi.len() > LC_MAX_INDICES {
        return Err(Error::EnumerationCap {
            what: "sampling locations",
            size: psi.len(),
            limit: LC_MAX_INDICES,
        });
    }
    if psi.is_empty() {
        return Err(Error::InvalidArgument("no sampling locations".into()));
    }
    if let Some(v) = psi.iter().find(|v| v.len() != profile.n) {
        return Err(dim_mismatch(format!(
            "vector of length {} against dimension {}",
            v.len(),
            profile.n
        )));
    }
    let d = profile.d();
    let projected: Vec<Vec<CVec>> = (0..d)
        .map(|j| psi.iter().map(|v| profile.project(j, v)).collect())
        .collect();
    for j1 in 0..d {
        for j2 in 0..d {
            let mut search = PairSearch {
                one: &projected[j1],
                two: &projected[j2],
                dim_one: profile.penthouse_bases[j1].len(),
                dim_two: profile.penthouse_bases[j2].len(),
                tol: tol.rank_tol,
                side: vec![0; psi.len()],
            };
            let e1 = OrthoBasis::new(search.dim_one);
            let e2 = OrthoBasis::new(search.dim_two);
            if search.descend(0, &e1, &e2) {
                let (first, second): (Vec<usize>, Vec<usize>) =
                    (0..psi.len()).partition(|&i| search.side[i] == 1);
                return Ok(LcVerdict {
                    holds: false,
                    witness: Some(LcWitness {
                        first,
                        second,
                        first_fails_at: j1,
                        second_fails_at: j2,
                    }),
                });
            }
        }
    }
    Ok(LcVerdict {
        holds: true,
        witness: None,
    })
}
