use proptest::prelude::*;

use phaseless::injectivity::{
    certify, complement_property, distinct_directions, does_phaseless_reconstruction, family_rank,
    locally_complementary, FunctionalSet, Verdict,
};
use phaseless::linalg::{CMat, CVec, C64};
use phaseless::spectral::penthouse_family;
use phaseless::{OperatorSpec, Tolerance};

/// Small integer families, so exact dependencies are common.
fn family() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=3).prop_flat_map(|n| {
        prop::collection::vec(
            prop::collection::vec(-2i32..=2, n)
                .prop_filter("nonzero", |v| v.iter().any(|&x| x != 0))
                .prop_map(|v| v.into_iter().map(f64::from).collect()),
            1..=7,
        )
    })
}

/// Diagonalizable operators with positive eigenvalues from a 0.5 grid.
fn spec_and_functionals() -> impl Strategy<Value = (OperatorSpec, FunctionalSet)> {
    (2usize..=4)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(1i32..=6, n),
                prop::collection::vec(-0.4f64..0.4, n * n),
                prop::collection::vec(prop::collection::vec(-2i32..=2, n), 1..=3),
            )
        })
        .prop_filter_map("degenerate", |(eigs, b, phis)| {
            let n = eigs.len();
            let tol = Tolerance::default();
            let b = CMat::from_fn(n, n, |i, j| {
                C64::new(b[i * n + j] + if i == j { 1.0 } else { 0.0 }, 0.0)
            });
            let s = b.clone().svd(false, false).singular_values;
            if s.max() / s.min() > 100.0 {
                return None;
            }
            let eigs = eigs
                .iter()
                .map(|&k| C64::new(0.5 * k as f64, 0.0))
                .collect();
            let spec = OperatorSpec::diagonalizable(b, eigs, &tol).ok()?;
            let phis = phis
                .into_iter()
                .map(|v| v.into_iter().map(f64::from).collect())
                .collect();
            let phi = FunctionalSet::new(phis).ok()?;
            Some((spec, phi))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reconstruction_matches_complement_property(f in family()) {
        let tol = Tolerance::default();
        let cp = complement_property(&f, &tol).unwrap();
        let pr = does_phaseless_reconstruction(&f, &tol).unwrap();
        prop_assert_eq!(cp.holds, pr.injective);
        let n = f[0].len();
        if let Some(w) = &cp.witness {
            prop_assert!(family_rank(&f, &w.first, &tol) < n);
            prop_assert!(family_rank(&f, &w.second, &tol) < n);
            let mut all: Vec<usize> = w.first.iter().chain(&w.second).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..f.len()).collect::<Vec<_>>());
        }
        if let Some(a) = &pr.ambiguity {
            prop_assert!(a.max_deviation < 1e-10, "deviation {}", a.max_deviation);
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let diff: Vec<f64> = a.plus.iter().zip(&a.minus).map(|(x, y)| x - y).collect();
            let sum: Vec<f64> = a.plus.iter().zip(&a.minus).map(|(x, y)| x + y).collect();
            prop_assert!(norm(&diff) > 1e-6 && norm(&sum) > 1e-6, "pair is ± one vector");
        }
        if f.len() < 2 * n - 1 {
            prop_assert!(!cp.holds);
        }
    }

    #[test]
    fn certificate_is_sound((spec, phi) in spec_and_functionals()) {
        let tol = Tolerance::default();
        let n = spec.n();
        let cert = certify(&spec, &phi, &tol).unwrap();
        let fam = cert.family_vectors();
        let oracle = complement_property(&fam, &tol).unwrap().holds;
        let profile = penthouse_family(&spec, &tol).unwrap();
        let psi: Vec<CVec> = phi.vectors.iter().map(|v| spec.to_canonical(v)).collect();
        let lc = locally_complementary(&psi, &profile, &tol).unwrap().holds;
        if oracle {
            prop_assert!(lc, "complement property without local complementarity");
        }
        if cert.verdict == Verdict::Guaranteed {
            prop_assert!(oracle);
            prop_assert!(distinct_directions(&fam, &tol) >= 2 * n - 1);
        }
        if cert.verdict == Verdict::NecessaryConditionFailed {
            prop_assert!(!oracle);
        }
    }
}
