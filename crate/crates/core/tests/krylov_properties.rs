use nalgebra::DMatrix;
use proptest::prelude::*;

use phaseless::krylov::{annihilator, eval_poly_on_operator, krylov_rank, minimal_polynomial};
use phaseless::linalg::{embed_matrix, embed_slice, CMat};
use phaseless::Tolerance;

/// Diagonal operators with eigenvalues from a small grid, so repeats occur.
fn diagonal_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec((1i32..=4).prop_map(|k| k as f64 * 0.5), n),
            prop::collection::vec(-2.0f64..2.0, n),
        )
    })
}

fn diag(v: &[f64]) -> CMat {
    embed_matrix(&DMatrix::from_diagonal(
        &nalgebra::DVector::from_column_slice(v),
    ))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn annihilator_degree_is_krylov_rank((eigs, x) in diagonal_case()) {
        let tol = Tolerance::default();
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let a = diag(&eigs);
        let xc = embed_slice(&x);
        let p = annihilator(&a, &xc, &tol).unwrap();
        let m = minimal_polynomial(&a, &tol).unwrap();
        let k = krylov_rank(&a, &xc, &tol).unwrap();
        prop_assert_eq!(p.degree(), Some(k));
        prop_assert!(k <= m.degree().unwrap());
        let (_, rem) = m.div_rem(&p).unwrap();
        prop_assert!(rem.coeff_norm() < 1e-8, "remainder {:?}", rem);
        let r = eval_poly_on_operator(&p, &a, &xc).unwrap();
        prop_assert!(r.norm() < 1e-8 * (1.0 + xc.norm()));
    }

    #[test]
    fn krylov_rank_is_similarity_invariant(
        (eigs, x) in diagonal_case(),
        entries in prop::collection::vec(-0.4f64..0.4, 25),
    ) {
        let tol = Tolerance::default();
        let n = eigs.len();
        let b = DMatrix::from_fn(n, n, |i, j| entries[i * 5 + j] + if i == j { 1.0 } else { 0.0 });
        let s = b.clone().svd(false, false).singular_values;
        prop_assume!(s.max() / s.min() < 1e3);
        let bc = embed_matrix(&b);
        let bi = bc.clone().try_inverse().unwrap();
        let a = diag(&eigs);
        let xc = embed_slice(&x);
        prop_assert_eq!(
            krylov_rank(&(&bi * &a * &bc), &(&bi * &xc), &tol).unwrap(),
            krylov_rank(&a, &xc, &tol).unwrap()
        );
    }
}
