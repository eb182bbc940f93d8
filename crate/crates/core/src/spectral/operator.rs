use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::circulant::{dft, dft_matrix};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{max_imag, real_part, CMat, CVec, C64, ONE};
use crate::poly::Polynomial;
use crate::tolerance::Tolerance;

/// Eigenvalue together with the sizes of its Jordan blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanGroup {
    pub eigenvalue: C64,
    /// Nonincreasing block sizes `t_1 >= t_2 >= ...`.
    pub sizes: Vec<usize>,
}

/// How the evolution operator was supplied.
#[derive(Debug, Clone, PartialEq)]
pub enum Factorization {
    /// `A^T = B^{-1} diag(eigenvalues) B`.
    Diagonalizable { b: CMat, eigenvalues: Vec<C64> },
    /// Circular convolution by a real kernel.
    Circulant { kernel: Vec<f64> },
    /// `A^T = B^{-1} J B` with `J` assembled from the block groups.
    Jordan { b: CMat, blocks: Vec<JordanGroup> },
}

/// One distinct eigenvalue of the canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRoot {
    pub value: C64,
    /// Block sizes, largest first; the first entry is the multiplicity of the
    /// root in the minimal polynomial.
    pub block_sizes: Vec<usize>,
    /// Canonical-form coordinates of the first row of each block.
    pub first_rows: Vec<usize>,
    /// All canonical-form coordinates belonging to this root.
    pub coordinates: Vec<usize>,
}

impl SpectralRoot {
    pub fn multiplicity(&self) -> usize {
        self.block_sizes[0]
    }
}

/// An evolution operator with an explicit spectral factorization and its
/// assembled dense real matrix.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    factorization: Factorization,
    matrix: DMatrix<f64>,
    b: CMat,
    b_inv: CMat,
    canonical: CMat,
    roots: Vec<SpectralRoot>,
}

const REAL_TOL: f64 = 1e-9;
const REPRODUCTION_TOL: f64 = 1e-8;

fn eigen_scale(values: impl Iterator<Item = C64>) -> f64 {
    values.fold(1.0, |m: f64, v| m.max(v.norm()))
}

fn same_eigenvalue(a: C64, b: C64, scale: f64, tol: &Tolerance) -> bool {
    (a - b).norm() <= tol.singularity_tol * scale
}

impl OperatorSpec {
    /// Diagonal operator with real eigenvalues, `B = I`.
    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self> {
        let n = eigenvalues.len();
        Self::diagonalizable(
            CMat::identity(n, n),
            eigenvalues.iter().map(|&v| C64::new(v, 0.0)).collect(),
            &Tolerance::default(),
        )
    }

    pub fn diagonalizable(b: CMat, eigenvalues: Vec<C64>, tol: &Tolerance) -> Result<Self> {
        let n = eigenvalues.len();
        if b.shape() != (n, n) {
            return Err(dim_mismatch(format!(
                "B is {}x{} but {n} eigenvalues were given",
                b.nrows(),
                b.ncols()
            )));
        }
        let canonical = CMat::from_diagonal(&CVec::from_vec(eigenvalues.clone()));
        let roots = group_diagonal(&eigenvalues, tol);
        let factorization = Factorization::Diagonalizable {
            b: b.clone(),
            eigenvalues,
        };
        Self::assemble(factorization, b, canonical, roots)
    }

    pub fn jordan(b: CMat, blocks: Vec<JordanGroup>, tol: &Tolerance) -> Result<Self> {
        let n: usize = blocks.iter().map(|g| g.sizes.iter().sum::<usize>()).sum();
        if b.shape() != (n, n) {
            return Err(dim_mismatch(format!(
                "B is {}x{} but the blocks have total size {n}",
                b.nrows(),
                b.ncols()
            )));
        }
        let scale = eigen_scale(blocks.iter().map(|g| g.eigenvalue));
        for (i, g) in blocks.iter().enumerate() {
            if g.sizes.is_empty() || g.sizes.contains(&0) {
                return Err(Error::InvalidArgument(format!(
                    "group {i} needs at least one block of positive size"
                )));
            }
            if g.sizes.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "block sizes of group {i} must be nonincreasing, got {:?}",
                    g.sizes
                )));
            }
            for h in &blocks[..i] {
                if same_eigenvalue(g.eigenvalue, h.eigenvalue, scale, tol) {
                    return Err(Error::InvalidArgument(format!(
                        "eigenvalue {} appears in two groups",
                        g.eigenvalue
                    )));
                }
            }
        }

        let mut canonical = CMat::zeros(n, n);
        let mut roots = Vec::with_capacity(blocks.len());
        let mut offset = 0;
        for g in &blocks {
            let mut root = SpectralRoot {
                value: g.eigenvalue,
                block_sizes: g.sizes.clone(),
                first_rows: Vec::new(),
                coordinates: Vec::new(),
            };
            for &size in &g.sizes {
                root.first_rows.push(offset);
                for i in 0..size {
                    canonical[(offset + i, offset + i)] = g.eigenvalue;
                    if i > 0 {
                        // lower shift: e_first is the cyclic vector of the block
                        canonical[(offset + i, offset + i - 1)] = ONE;
                    }
                    root.coordinates.push(offset + i);
                }
                offset += size;
            }
            roots.push(root);
        }
        let factorization = Factorization::Jordan {
            b: b.clone(),
            blocks,
        };
        Self::assemble(factorization, b, canonical, roots)
    }

    /// Circular convolution `x -> a * x`. Diagonalized by the unitary DFT with
    /// `A^T = F diag(a_hat) conj(F)`, i.e. `B = conj(F)`.
    pub fn circulant(kernel: &[f64], tol: &Tolerance) -> Result<Self> {
        let n = kernel.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty convolution kernel".into()));
        }
        let a_hat = dft(kernel);
        let b = dft_matrix(n).map(|z| z.conj());
        let canonical = CMat::from_diagonal(&CVec::from_vec(a_hat.clone()));
        let roots = group_diagonal(&a_hat, tol);
        let spec = Self::assemble(
            Factorization::Circulant {
                kernel: kernel.to_vec(),
            },
            b,
            canonical,
            roots,
        )?;
        let direct = circulant_matrix(kernel);
        let err = (&spec.matrix - &direct).norm() / direct.norm().max(f64::MIN_POSITIVE);
        if err > REPRODUCTION_TOL {
            return Err(Error::NumericalDegeneracy(format!(
                "DFT assembly disagrees with direct convolution (rel. error {err:e})"
            )));
        }
        Ok(Self {
            matrix: direct,
            ..spec
        })
    }

    /// `A = F^* diag(sigma) F` for a DFT-domain spectrum; `sigma` must be
    /// conjugate symmetric for the result to be real.
    pub fn dft_diagonal(sigma: Vec<C64>, tol: &Tolerance) -> Result<Self> {
        let n = sigma.len();
        let b = dft_matrix(n).map(|z| z.conj());
        Self::diagonalizable(b, sigma, tol)
    }

    fn assemble(
        factorization: Factorization,
        b: CMat,
        canonical: CMat,
        roots: Vec<SpectralRoot>,
    ) -> Result<Self> {
        let n = b.nrows();
        let b_inv = b
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalDegeneracy("B is not invertible".into()))?;
        let a_t = &b_inv * &canonical * &b;
        let a_c = a_t.transpose();
        let scale = a_c.iter().fold(1.0, |m: f64, z| m.max(z.norm()));
        let imag = max_imag(&a_c);
        if imag > REAL_TOL * scale {
            return Err(Error::InvalidArgument(format!(
                "assembled operator is not real (max imaginary part {imag:e})"
            )));
        }
        let matrix = real_part(&a_c);
        // B A^T B^{-1} must give back the canonical form
        let back = &b * crate::linalg::embed_matrix(&matrix).transpose() * &b_inv;
        let denom = canonical.norm().max(f64::MIN_POSITIVE);
        let err = (&back - &canonical).norm() / denom;
        if err > REPRODUCTION_TOL * (1.0 + b.norm() * b_inv.norm() / n.max(1) as f64) {
            return Err(Error::NumericalDegeneracy(format!(
                "factorization does not reproduce the canonical form (rel. error {err:e})"
            )));
        }
        Ok(Self {
            factorization,
            matrix,
            b,
            b_inv,
            canonical,
            roots,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    /// The assembled real operator `A`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn b_inv(&self) -> &CMat {
        &self.b_inv
    }

    /// The canonical (diagonal or Jordan) form `J` with `A^T = B^{-1} J B`.
    pub fn canonical(&self) -> &CMat {
        &self.canonical
    }

    pub fn roots(&self) -> &[SpectralRoot] {
        &self.roots
    }

    pub fn distinct_eigenvalues(&self) -> Vec<C64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.roots.iter().all(|r| r.multiplicity() == 1)
    }

    /// Exact minimal polynomial `prod (x - lambda_s)^{t_1^(s)}`.
    pub fn minimal_polynomial(&self) -> Polynomial {
        Polynomial::from_roots(
            self.roots
                .iter()
                .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity())),
        )
    }

    pub fn minimal_polynomial_degree(&self) -> usize {
        self.roots.iter().map(SpectralRoot::multiplicity).sum()
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..n).map(|j| self.matrix[(i, j)] * x[j]).sum();
        }
        out
    }

    /// `A^T x`.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..n).map(|i| self.matrix[(i, j)] * x[i]).sum();
        }
        out
    }

    /// `B phi` for a real functional.
    pub fn to_canonical(&self, phi: &[f64]) -> CVec {
        &self.b * crate::linalg::embed_slice(phi)
    }
}

/// Circulant matrix with `A[j][k] = a[(j - k) mod n]`.
pub fn circulant_matrix(kernel: &[f64]) -> DMatrix<f64> {
    let n = kernel.len();
    DMatrix::from_fn(n, n, |j, k| kernel[(j + n - k) % n])
}

fn group_diagonal(eigenvalues: &[C64], tol: &Tolerance) -> Vec<SpectralRoot> {
    let scale = eigen_scale(eigenvalues.iter().copied());
    let mut roots: Vec<SpectralRoot> = Vec::new();
    for (i, &v) in eigenvalues.iter().enumerate() {
        match roots
            .iter_mut()
            .find(|r| same_eigenvalue(r.value, v, scale, tol))
        {
            Some(r) => {
                r.block_sizes.push(1);
                r.first_rows.push(i);
                r.coordinates.push(i);
            }
            None => roots.push(SpectralRoot {
                value: v,
                block_sizes: vec![1],
                first_rows: vec![i],
                coordinates: vec![i],
            }),
        }
    }
    roots
}

// ---- file format -------------------------------------------------------

pub const OPERATOR_SCHEMA: &str = "phaseless-operator/v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexMatrixFile {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

impl ComplexMatrixFile {
    fn to_matrix(&self) -> Result<CMat> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if self.re.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        let mut m = CMat::zeros(rows, cols);
        for (i, row) in self.re.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)].re = v;
            }
        }
        if let Some(im) = &self.im {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err(Error::Parse("imaginary part has a different shape".into()));
            }
            for (i, row) in im.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    m[(i, j)].im = v;
                }
            }
        }
        Ok(m)
    }

    fn from_matrix(m: &CMat) -> Self {
        let re = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
            .collect();
        let im: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
            .collect();
        let any_im = im.iter().flatten().any(|&v| v != 0.0);
        Self {
            re,
            im: any_im.then_some(im),
        }
    }
}

/// On-disk description of an explicit factorization.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorFile {
    Diagonalizable {
        schema: String,
        b: ComplexMatrixFile,
        eigenvalues: Vec<[f64; 2]>,
    },
    Jordan {
        schema: String,
        b: ComplexMatrixFile,
        blocks: Vec<JordanGroupFile>,
    },
    Circulant {
        schema: String,
        kernel: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JordanGroupFile {
    pub eigenvalue: [f64; 2],
    pub sizes: Vec<usize>,
}

impl OperatorFile {
    pub fn from_spec(spec: &OperatorSpec) -> Self {
        let schema = OPERATOR_SCHEMA.to_string();
        match spec.factorization() {
            Factorization::Diagonalizable { b, eigenvalues } => Self::Diagonalizable {
                schema,
                b: ComplexMatrixFile::from_matrix(b),
                eigenvalues: eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            },
            Factorization::Jordan { b, blocks } => Self::Jordan {
                schema,
                b: ComplexMatrixFile::from_matrix(b),
                blocks: blocks
                    .iter()
                    .map(|g| JordanGroupFile {
                        eigenvalue: [g.eigenvalue.re, g.eigenvalue.im],
                        sizes: g.sizes.clone(),
                    })
                    .collect(),
            },
            Factorization::Circulant { kernel } => Self::Circulant {
                schema,
                kernel: kernel.clone(),
            },
        }
    }

    pub fn into_spec(self, tol: &Tolerance) -> Result<OperatorSpec> {
        let check = |s: &str| {
            if s == OPERATOR_SCHEMA {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "unsupported operator schema {s:?}, expected {OPERATOR_SCHEMA:?}"
                )))
            }
        };
        match self {
            Self::Diagonalizable {
                schema,
                b,
                eigenvalues,
            } => {
                check(&schema)?;
                OperatorSpec::diagonalizable(
                    b.to_matrix()?,
                    eigenvalues.iter().map(|z| C64::new(z[0], z[1])).collect(),
                    tol,
                )
            }
            Self::Jordan { schema, b, blocks } => {
                check(&schema)?;
                OperatorSpec::jordan(
                    b.to_matrix()?,
                    blocks
                        .into_iter()
                        .map(|g| JordanGroup {
                            eigenvalue: C64::new(g.eigenvalue[0], g.eigenvalue[1]),
                            sizes: g.sizes,
                        })
                        .collect(),
                    tol,
                )
            }
            Self::Circulant { schema, kernel } => {
                check(&schema)?;
                OperatorSpec::circulant(&kernel, tol)
            }
        }
    }
}
