use proptest::prelude::*;

use phaseless::circulant::{
    circulant_spectral_profile, circular_convolve, dft, dft_matrix, idft, make_decreasing_kernel,
    sample_random_circulant,
};
use phaseless::linalg::{embed_slice, CMat, CVec};
use phaseless::Tolerance;

fn odd_n() -> impl Strategy<Value = usize> {
    (1usize..=7).prop_map(|k| 2 * k + 1)
}

fn decreasing_profile(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, len).prop_map(|steps| {
        let mut v: Vec<f64> = steps
            .iter()
            .rev()
            .scan(0.0, |acc, s| {
                *acc += s;
                Some(*acc)
            })
            .collect();
        v.reverse();
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_theorem(
        (a, x) in (3usize..=12).prop_flat_map(|n| (
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
        ))
    ) {
        let n = a.len();
        let direct = circular_convolve(&a, &x);
        let f = dft_matrix(n);
        let a_hat = CVec::from_vec(dft(&a));
        let via = f.adjoint() * CMat::from_diagonal(&a_hat) * &f * embed_slice(&x);
        for (d, v) in direct.iter().zip(via.iter()) {
            prop_assert!((d - v.re).abs() < 1e-10 && v.im.abs() < 1e-10);
        }
        let back = idft(&dft(&x));
        for (u, v) in x.iter().zip(&back) {
            prop_assert!((u - v.re).abs() < 1e-12);
        }
    }

    #[test]
    fn decreasing_profiles_have_half_plus_one_values(
        (n, profile) in odd_n().prop_flat_map(|n| (Just(n), decreasing_profile(n.div_ceil(2))))
    ) {
        let tol = Tolerance::default();
        let k = make_decreasing_kernel(n, &profile).unwrap();
        prop_assert!(k.is_symmetric());
        let (p, spec) = circulant_spectral_profile(&k, &tol).unwrap();
        prop_assert_eq!(p.d(), n.div_ceil(2));
        prop_assert_eq!(spec.distinct_eigenvalues().len(), n.div_ceil(2));
    }
}

#[test]
fn random_circulants_are_real() {
    let tol = Tolerance::default();
    for seed in 0..100 {
        for n in [5, 9, 15] {
            let (model, spec) = sample_random_circulant(n, seed, &tol).unwrap();
            assert!(
                model.assembly_imag < 1e-10,
                "seed {seed}: {}",
                model.assembly_imag
            );
            assert_eq!(spec.n(), n);
            assert!(model.sigma.iter().all(|s| (s.norm() - 1.0).abs() < 1e-12));
        }
    }
}

#[test]
fn random_circulants_are_reproducible() {
    let tol = Tolerance::default();
    let (a, _) = sample_random_circulant(11, 4, &tol).unwrap();
    let (b, _) = sample_random_circulant(11, 4, &tol).unwrap();
    let (c, _) = sample_random_circulant(11, 5, &tol).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.sigma, c.sigma);
}
