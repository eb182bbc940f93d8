//! Circular convolution operators, the unitary DFT and the random circulant
//! model.
//!
//! Convention: `F[j][k] = w^{jk} / sqrt(n)` with `w = exp(-2 pi i / n)`, and
//! `a_hat(k) = sum_j a_j w^{jk}` (unnormalized). Convolution by `a` is then
//! `F^* diag(a_hat) F`.

use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{embed_matrix, CMat, CVec, C64};
use crate::rng::{stream, TAG_CIRCULANT};
use crate::spectral::{penthouse_family, OperatorSpec, SpectralProfile};
use crate::tolerance::Tolerance;

fn root_of_unity(n: usize, e: usize) -> C64 {
    let e = e % n;
    C64::from_polar(1.0, -2.0 * PI * e as f64 / n as f64)
}

/// The unitary DFT matrix `F_n`.
pub fn dft_matrix(n: usize) -> CMat {
    let s = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |j, k| root_of_unity(n, j * k) * s)
}

/// Unnormalized DFT of a real sequence.
pub fn dft(x: &[f64]) -> Vec<C64> {
    let n = x.len();
    (0..n)
        .map(|k| (0..n).map(|j| root_of_unity(n, j * k) * x[j]).sum())
        .collect()
}

/// Inverse of [`dft`].
pub fn idft(x_hat: &[C64]) -> Vec<C64> {
    let n = x_hat.len();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| root_of_unity(n, j * k).conj() * x_hat[k])
                .sum::<C64>()
                / n as f64
        })
        .collect()
}

/// Direct `O(n^2)` circular convolution `(a * x)_j = sum_k a_{j-k} x_k`.
pub fn circular_convolve(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|j| (0..n).map(|k| a[(j + n - k) % n] * x[k]).sum())
        .collect()
}

/// A real convolution kernel together with its DFT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirculantKernel {
    pub a: Vec<f64>,
    pub dft: Vec<C64>,
}

impl CirculantKernel {
    pub fn new(a: Vec<f64>) -> Self {
        let dft = dft(&a);
        Self { a, dft }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n();
        let scale = self.a.iter().fold(1.0, |m: f64, v| m.max(v.abs()));
        (1..n).all(|j| (self.a[j] - self.a[n - j]).abs() <= 1e-12 * scale)
    }
}

const ROUND_TRIP_TOL: f64 = 1e-10;

/// Real symmetric kernel with `a_hat(0) = profile[0]` and
/// `a_hat(k) = a_hat(n - k) = profile[k]` for `k = 1..(n-1)/2`.
pub fn make_decreasing_kernel(n: usize, profile: &[f64]) -> Result<CirculantKernel> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "kernel length must be odd and at least 3, got {n}"
        )));
    }
    let half = n.div_ceil(2);
    if profile.len() != half {
        return Err(Error::DimensionMismatch(format!(
            "profile needs (n+1)/2 = {half} entries, got {}",
            profile.len()
        )));
    }
    if profile.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "profile must be positive, got {profile:?}"
        )));
    }
    if profile.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidArgument(format!(
            "profile must be strictly decreasing, got {profile:?}"
        )));
    }
    let mut a_hat = vec![C64::new(0.0, 0.0); n];
    a_hat[0] = C64::new(profile[0], 0.0);
    for k in 1..half {
        a_hat[k] = C64::new(profile[k], 0.0);
        a_hat[n - k] = a_hat[k];
    }
    let complex_a = idft(&a_hat);
    let a: Vec<f64> = complex_a.iter().map(|z| z.re).collect();
    let imag = complex_a.iter().fold(0.0, |m: f64, z| m.max(z.im.abs()));
    let kernel = CirculantKernel::new(a);
    let err = kernel
        .dft
        .iter()
        .zip(&a_hat)
        .fold(0.0, |m: f64, (x, y)| m.max((x - y).norm()));
    if imag > ROUND_TRIP_TOL * profile[0] || err > ROUND_TRIP_TOL * profile[0] {
        return Err(Error::NumericalDegeneracy(format!(
            "kernel round trip failed (imag {imag:e}, dft error {err:e})"
        )));
    }
    Ok(kernel)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Whether all pairwise differences of a 3-set of residues are coprime
/// with `n`.
pub fn coprime_criterion(set: &[i64], n: usize) -> Result<bool> {
    if set.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "the criterion takes exactly 3 residues, got {}",
            set.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let n = n as i64;
    let r: Vec<i64> = set.iter().map(|v| v.rem_euclid(n)).collect();
    if r[0] == r[1] || r[0] == r[2] || r[1] == r[2] {
        return Err(Error::InvalidArgument(format!(
            "residues {set:?} are not distinct mod {n}"
        )));
    }
    Ok((0..3).all(|j| (j + 1..3).all(|k| gcd((r[j] - r[k]).unsigned_abs(), n as u64) == 1)))
}

/// Spectral data of a symmetric convolution with `(n+1)/2` distinct DFT
/// values; `E_0 = span{e_0}` and `E_k = span{e_k, e_{n-k}}`.
pub fn circulant_spectral_profile(
    kernel: &CirculantKernel,
    tol: &Tolerance,
) -> Result<(SpectralProfile, OperatorSpec)> {
    let n = kernel.n();
    if !kernel.is_symmetric() {
        return Err(Error::InvalidArgument("kernel is not symmetric".into()));
    }
    let spec = OperatorSpec::circulant(&kernel.a, tol)?;
    let profile = penthouse_family(&spec, tol)?;
    if profile.d() != n.div_ceil(2) {
        return Err(Error::InvalidArgument(format!(
            "expected {} distinct DFT values, found {}",
            n.div_ceil(2),
            profile.d()
        )));
    }
    Ok((profile, spec))
}

/// `psi_i = conj(F_n) e_i`.
pub fn functional_image(n: usize, i: usize) -> CVec {
    let s = 1.0 / (n as f64).sqrt();
    CVec::from_fn(n, |k, _| root_of_unity(n, k * i).conj() * s)
}

/// A sampled unit-modulus DFT spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomCirculantModel {
    pub n: usize,
    pub seed: u64,
    pub sigma: Vec<C64>,
    /// Largest imaginary magnitude of `F^* diag(sigma) F` before rounding to
    /// a real matrix.
    pub assembly_imag: f64,
}

/// `sigma_0 = ±1`, `sigma_w = exp(2 pi i theta_w)` for `1 <= w <= (n-1)/2`
/// and `sigma_{n-w} = conj(sigma_w)`; `A = F^* diag(sigma) F`.
pub fn sample_random_circulant(
    n: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<(RandomCirculantModel, OperatorSpec)> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "random circulant needs odd n >= 3, got {n}"
        )));
    }
    let mut rng = stream(seed, &[TAG_CIRCULANT, n as u64]);
    let mut sigma = vec![C64::new(0.0, 0.0); n];
    sigma[0] = C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0);
    for w in 1..=(n - 1) / 2 {
        let theta: f64 = rng.random();
        sigma[w] = C64::from_polar(1.0, 2.0 * PI * theta);
        sigma[n - w] = sigma[w].conj();
    }
    let f = dft_matrix(n);
    let assembled = f.adjoint() * CMat::from_diagonal(&CVec::from_vec(sigma.clone())) * &f;
    let assembly_imag = crate::linalg::max_imag(&assembled);
    let spec = OperatorSpec::dft_diagonal(sigma.clone(), tol)?;
    debug_assert!((embed_matrix(spec.matrix()) - &assembled).norm() < 1e-8);
    Ok((
        RandomCirculantModel {
            n,
            seed,
            sigma,
            assembly_imag,
        },
        spec,
    ))
}
