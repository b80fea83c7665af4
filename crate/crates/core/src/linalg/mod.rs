//! Dense Hermitian linear algebra: spectral decomposition, functional
//! calculus, the Fréchet derivative of the matrix logarithm and the norms
//! used throughout the crate.

mod frechet;
mod gauss;

pub use frechet::{
    frechet_log, frechet_log_quadrature, frechet_log_quadrature_with_tol, log_divided_difference,
    QUADRATURE_TOL,
};
pub use gauss::gauss_legendre_unit;

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::Comparison;

/// Dense complex square matrix, row/column indexed from zero.
pub type CMatrix = DMatrix<Complex64>;

/// Default relative Hermiticity tolerance, measured against `‖A‖_op`.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Spectrum below this value is outside the domain of `log` and `sqrt`.
pub const EIGENVALUE_FLOOR: f64 = 1e-13;

#[inline]
pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub(crate) const IMAG: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub(crate) fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_same_dim(a: &CMatrix, b: &CMatrix) -> Result<usize> {
    let n = ensure_square(a)?;
    let m = ensure_square(b)?;
    if n != m {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m,
        });
    }
    Ok(n)
}

fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `(A + A*)/2`; the result is exactly Hermitian in floating point.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Real trace of a matrix that is Hermitian up to round-off.
pub fn real_trace(m: &CMatrix) -> f64 {
    m.trace().re
}

/// `tr(AB)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `AB − BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    ensure_same_dim(a, b)?;
    Ok(a * b - b * a)
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().fold(0.0, |acc, &s| acc.max(s))
}

/// Sum of singular values.
pub fn trace_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().sum()
}

/// Operator norm of `A − A*`, computed from the spectrum of the Hermitian
/// matrix `i(A − A*)`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let skew = CMatrix::from_fn(n, n, |i, j| IMAG * (a[(i, j)] - a[(j, i)].conj()));
    if skew.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    spectral_radius_of_hermitian(&hermitian_part(&skew))
}

fn spectral_radius_of_hermitian(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0, |acc, &x| acc.max(x.abs()))
}

/// Dense Hermitian operator. The stored matrix is the input as given; the
/// measured defect `‖A − A*‖_op` is kept alongside it.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian {
    matrix: CMatrix,
    defect: f64,
}

impl Hermitian {
    /// Validates Hermiticity with the default relative tolerance.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITICITY_TOL)
    }

    /// Validates `‖A − A*‖_op ≤ rel_tol · ‖A‖_op`.
    pub fn with_tolerance(matrix: CMatrix, rel_tol: f64) -> Result<Self> {
        ensure_square(&matrix)?;
        ensure_finite(&matrix)?;
        let defect = hermiticity_defect(&matrix);
        if defect > 0.0 {
            let scale = spectral_radius_of_hermitian(&hermitian_part(&matrix));
            let tolerance = rel_tol * scale.max(f64::MIN_POSITIVE);
            if defect > tolerance {
                return Err(Error::NotHermitian { defect, tolerance });
            }
        }
        Ok(Self { matrix, defect })
    }

    /// Symmetrizes `(A + A*)/2`. Only for callers that explicitly opt in.
    pub fn hermitize(matrix: &CMatrix) -> Self {
        Self {
            matrix: hermitian_part(matrix),
            defect: 0.0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
            defect: 0.0,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
            defect: 0.0,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| real(x)));
        Self {
            matrix: CMatrix::from_diagonal(&v),
            defect: 0.0,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.defect
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * real(factor),
            defect: self.defect * factor.abs(),
        }
    }

    pub fn trace(&self) -> f64 {
        real_trace(&self.matrix)
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        eig_hermitian(self)
    }

    /// Ascending eigenvalues without eigenvectors.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = hermitian_part(&self.matrix)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `max |λ|`.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(0.0, |acc, &x| acc.max(x.abs()))
    }

    /// `Σ |λ|`.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|x| x.abs()).sum()
    }
}

impl AsRef<CMatrix> for Hermitian {
    fn as_ref(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Eigenvalues in ascending order with the matching unitary eigenvector matrix.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(f(λ)) U*` for a complex-valued spectral function.
    pub fn map_complex(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        scaled * u.adjoint()
    }

    /// `U diag(f(λ)) U*`, symmetrized so the result is exactly Hermitian.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        Hermitian::hermitize(&self.map_complex(|x| real(f(x))))
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_complex(real)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Express `B` in the eigenbasis: `U* B U`.
    pub fn to_eigenbasis(&self, b: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * b * &self.eigenvectors
    }

    pub fn from_eigenbasis(&self, b: &CMatrix) -> CMatrix {
        &self.eigenvectors * b * self.eigenvectors.adjoint()
    }
}

/// Spectral decomposition of a Hermitian operator, eigenvalues ascending.
pub fn eig_hermitian(a: &Hermitian) -> Result<SpectralDecomposition> {
    let n = a.dim();
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let sym = hermitian_part(a.matrix());
    let max_iter = 64 * n + 1000;
    let Some(eig) = sym.clone().try_symmetric_eigen(f64::EPSILON, max_iter) else {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += sym[(i, j)].norm_sqr();
                }
            }
        }
        return Err(Error::EigenNoConvergence {
            residual: off.sqrt(),
        });
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Scalar functions available through the functional calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFunction {
    Log,
    Exp,
    Sqrt,
}

/// Applies `f` on the spectrum. `log` and `sqrt` reject any eigenvalue at or
/// below [`EIGENVALUE_FLOOR`]; nothing is clamped.
pub fn matrix_function(a: &Hermitian, f: MatrixFunction) -> Result<Hermitian> {
    let spec = eig_hermitian(a)?;
    apply_function(&spec, f)
}

pub(crate) fn apply_function(spec: &SpectralDecomposition, f: MatrixFunction) -> Result<Hermitian> {
    match f {
        MatrixFunction::Exp => Ok(spec.map(f64::exp)),
        MatrixFunction::Log | MatrixFunction::Sqrt => {
            if let Some(&bad) = spec.eigenvalues.iter().find(|&&x| x <= EIGENVALUE_FLOOR) {
                return Err(Error::Domain {
                    eigenvalue: bad,
                    floor: EIGENVALUE_FLOOR,
                });
            }
            Ok(if f == MatrixFunction::Log {
                spec.map(f64::ln)
            } else {
                spec.map(f64::sqrt)
            })
        }
    }
}

pub fn log_hermitian(a: &Hermitian) -> Result<Hermitian> {
    matrix_function(a, MatrixFunction::Log)
}

pub fn exp_hermitian(a: &Hermitian) -> Result<Hermitian> {
    matrix_function(a, MatrixFunction::Exp)
}

/// Golden–Thompson: `lhs = tr e^{X+Y}`, `rhs = tr(e^X e^Y)`.
pub fn golden_thompson_check(x: &Hermitian, y: &Hermitian) -> Result<Comparison> {
    ensure_same_dim(x.matrix(), y.matrix())?;
    let sum = Hermitian::hermitize(&(x.matrix() + y.matrix()));
    let lhs = exp_hermitian(&sum)?.trace();
    let ex = exp_hermitian(x)?;
    let ey = exp_hermitian(y)?;
    let rhs = trace_of_product(ex.matrix(), ey.matrix()).re;
    Ok(Comparison::new(lhs, rhs))
}
