use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::injectivity::complement::{distinct_directions, Partition};
use crate::injectivity::local::{locally_complementary, LcWitness};
use crate::krylov::krylov_rank;
use crate::linalg::CVec;
use crate::spectral::{
    iteration_regular, penthouse_family, totally_full_spark, IterationWitness, OperatorSpec,
    SingularMinor,
};
use crate::tolerance::Tolerance;

/// Sampling functionals `phi_i` with optional time budgets `L_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSet {
    pub vectors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<usize>>,
}

impl FunctionalSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let s = Self {
            vectors,
            budgets: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// Point evaluations `e_i` at the given locations.
    pub fn standard_basis(n: usize, locations: &[usize]) -> Result<Self> {
        if let Some(&i) = locations.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!(
                "location {i} outside 0..{n}"
            )));
        }
        Self::new(
            locations
                .iter()
                .map(|&i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    e
                })
                .collect(),
        )
    }

    pub fn with_budgets(mut self, budgets: Vec<usize>) -> Result<Self> {
        self.budgets = Some(budgets);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self
            .vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("empty functional set".into()))?;
        for (i, v) in self.vectors.iter().enumerate() {
            if v.len() != n {
                return Err(dim_mismatch(format!(
                    "functional {i} has length {}, expected {n}",
                    v.len()
                )));
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(Error::InvalidArgument(format!("functional {i} is zero")));
            }
        }
        if let Some(b) = &self.budgets {
            if b.len() != self.vectors.len() {
                return Err(dim_mismatch(format!(
                    "{} budgets for {} functionals",
                    b.len(),
                    self.vectors.len()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Guaranteed,
    NecessaryConditionFailed,
    Inconclusive,
}

/// Which sufficient condition produced a guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SufficiencyPath {
    /// Diagonalizable operator whose eigenvalue power matrix has totally
    /// full spark.
    DiagonalTotallyFullSpark,
    /// Iteration-regular canonical form.
    IterationRegular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Finding {
    LocalComplementarity {
        holds: bool,
        witness: Option<LcWitness>,
    },
    /// A complement-property family in `R^n` needs `2n - 1` vectors.
    Cardinality {
        distinct_vectors: usize,
        required: usize,
        witness: Option<Partition>,
    },
    TotallyFullSpark {
        full: bool,
        witness: Option<SingularMinor>,
    },
    IterationRegularity {
        regular: bool,
        margin: f64,
        witness: Option<IterationWitness>,
    },
    TimeBudget {
        index: usize,
        provided: usize,
        required: usize,
    },
    Skipped {
        what: String,
        reason: String,
    },
}

/// One element `(A^T)^power phi_index` of the induced family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedVector {
    pub index: usize,
    pub power: usize,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub path: Option<SufficiencyPath>,
    pub findings: Vec<Finding>,
    /// `r_i`, the degree of the `(J, B phi_i)`-annihilator.
    pub krylov_ranks: Vec<usize>,
    /// `2 r_i - 2`, the last sampling time the guarantee uses.
    pub time_budgets: Vec<usize>,
    pub induced_family: Vec<InducedVector>,
}

impl Certificate {
    pub fn family_vectors(&self) -> Vec<Vec<f64>> {
        self.induced_family
            .iter()
            .map(|v| v.vector.clone())
            .collect()
    }
}

/// `{(A^T)^l phi_i : l = 0..2 r_i - 2}`, grouped by functional.
pub fn induced_vector_family(
    spec: &OperatorSpec,
    phi: &FunctionalSet,
    ranks: &[usize],
) -> Result<Vec<InducedVector>> {
    if phi.dim() != spec.n() {
        return Err(dim_mismatch(format!(
            "functionals have length {} but the operator is {n}x{n}",
            phi.dim(),
            n = spec.n()
        )));
    }
    if ranks.len() != phi.len() {
        return Err(dim_mismatch("one Krylov rank per functional is required"));
    }
    let mut out = Vec::new();
    for (i, (v, &r)) in phi.vectors.iter().zip(ranks).enumerate() {
        let mut cur = v.clone();
        for power in 0..(2 * r).saturating_sub(1) {
            if power > 0 {
                cur = spec.apply_transpose(&cur);
            }
            out.push(InducedVector {
                index: i,
                power,
                vector: cur.clone(),
            });
        }
    }
    Ok(out)
}

/// `r_i` for every functional, computed on the canonical form.
pub fn krylov_ranks(
    spec: &OperatorSpec,
    phi: &FunctionalSet,
    tol: &Tolerance,
) -> Result<Vec<usize>> {
    let j = spec.canonical();
    phi.vectors
        .iter()
        .map(|v| {
            let psi: CVec = spec.to_canonical(v);
            krylov_rank(j, &psi, tol)
        })
        .collect()
}

/// Combines the necessary and sufficient conditions into a verdict.
///
/// Local complementarity of `B phi_i` with respect to the penthouse family
/// is necessary, as is a family of at least `2n - 1` distinct directions.
/// Sufficiency comes from totally full spark of the power matrix (for
/// diagonalizable operators) or from iteration regularity.
pub fn certify(spec: &OperatorSpec, phi: &FunctionalSet, tol: &Tolerance) -> Result<Certificate> {
    phi.validate()?;
    let n = spec.n();
    if phi.dim() != n {
        return Err(dim_mismatch(format!(
            "functionals have length {} but the operator is {n}x{n}",
            phi.dim()
        )));
    }
    let ranks = krylov_ranks(spec, phi, tol)?;
    let time_budgets: Vec<usize> = ranks.iter().map(|&r| (2 * r).saturating_sub(2)).collect();
    let induced_family = induced_vector_family(spec, phi, &ranks)?;
    let mut findings = Vec::new();
    let finish = |verdict, path, findings| Certificate {
        verdict,
        path,
        findings,
        krylov_ranks: ranks.clone(),
        time_budgets: time_budgets.clone(),
        induced_family: induced_family.clone(),
    };

    let profile = penthouse_family(spec, tol)?;
    let psi: Vec<CVec> = phi.vectors.iter().map(|v| spec.to_canonical(v)).collect();
    let lc = locally_complementary(&psi, &profile, tol)?;
    findings.push(Finding::LocalComplementarity {
        holds: lc.holds,
        witness: lc.witness,
    });
    if !lc.holds {
        return Ok(finish(Verdict::NecessaryConditionFailed, None, findings));
    }

    let vectors: Vec<Vec<f64>> = induced_family.iter().map(|v| v.vector.clone()).collect();
    let distinct = distinct_directions(&vectors, tol);
    let required = 2 * n - 1;
    if distinct < required {
        findings.push(Finding::Cardinality {
            distinct_vectors: distinct,
            required,
            witness: Some(cardinality_witness(&vectors, n, tol)),
        });
        return Ok(finish(Verdict::NecessaryConditionFailed, None, findings));
    }
    findings.push(Finding::Cardinality {
        distinct_vectors: distinct,
        required,
        witness: None,
    });

    let mut path = None;
    if spec.is_diagonalizable() {
        match totally_full_spark(&profile.lambda_matrix, tol) {
            Ok(t) => {
                if t.full {
                    path = Some(SufficiencyPath::DiagonalTotallyFullSpark);
                }
                findings.push(Finding::TotallyFullSpark {
                    full: t.full,
                    witness: t.witness,
                });
            }
            Err(e) => findings.push(Finding::Skipped {
                what: "totally_full_spark".into(),
                reason: e.to_string(),
            }),
        }
    }
    if path.is_none() {
        match iteration_regular(spec, tol) {
            Ok(v) => {
                if v.regular {
                    path = Some(SufficiencyPath::IterationRegular);
                }
                findings.push(Finding::IterationRegularity {
                    regular: v.regular,
                    margin: v.margin,
                    witness: v.witness,
                });
            }
            Err(e) => findings.push(Finding::Skipped {
                what: "iteration_regular".into(),
                reason: e.to_string(),
            }),
        }
    }

    let mut verdict = if path.is_some() {
        Verdict::Guaranteed
    } else {
        Verdict::Inconclusive
    };
    if let Some(budgets) = &phi.budgets {
        for (index, (&provided, &required)) in budgets.iter().zip(&time_budgets).enumerate() {
            if provided < required {
                findings.push(Finding::TimeBudget {
                    index,
                    provided,
                    required,
                });
                if verdict == Verdict::Guaranteed {
                    verdict = Verdict::Inconclusive;
                }
            }
        }
    }
    Ok(finish(verdict, path, findings))
}

/// Splits fewer than `2n - 1` directions into two rank-deficient parts:
/// greedily fill the first part up to rank `n - 1`, the rest has fewer than
/// `n` distinct directions.
fn cardinality_witness(vectors: &[Vec<f64>], n: usize, tol: &Tolerance) -> Partition {
    let mut basis = crate::linalg::OrthoBasis::new(n);
    let mut p = Partition {
        first: Vec::new(),
        second: Vec::new(),
    };
    for (i, v) in vectors.iter().enumerate() {
        let cv = crate::linalg::embed_slice(v);
        let (_, r) = basis.residual(&cv);
        if r <= tol.rank_tol || basis.rank() + 1 < n {
            basis.try_insert(&cv, tol.rank_tol);
            p.first.push(i);
        } else {
            p.second.push(i);
        }
    }
    p
}
