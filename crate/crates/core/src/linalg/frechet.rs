use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{ensure_same_dim, gauss_legendre_unit, real, CMatrix, Hermitian, EIGENVALUE_FLOOR};
use crate::error::{Error, Result};

/// Relative tolerance of the node-doubling check in [`frechet_log_quadrature`].
pub const QUADRATURE_TOL: f64 = 1e-10;

/// First divided difference of `log`: `(log a − log b)/(a − b)`, `1/a` on the
/// diagonal. Uses `2 atanh((a−b)/(a+b))` when `a` and `b` are close.
pub fn log_divided_difference(a: f64, b: f64) -> f64 {
    if a == b {
        return 1.0 / a;
    }
    let r = (a - b) / (a + b);
    if r.abs() < 0.5 {
        2.0 * r.atanh() / (a - b)
    } else {
        (a.ln() - b.ln()) / (a - b)
    }
}

/// `D(log)_X[B]` by divided differences in the eigenbasis of `X`.
pub fn frechet_log(x: &Hermitian, direction: &CMatrix) -> Result<CMatrix> {
    ensure_same_dim(x.matrix(), direction)?;
    let spec = x.eig()?;
    if let Some(&bad) = spec.eigenvalues.iter().find(|&&l| l <= EIGENVALUE_FLOOR) {
        return Err(Error::Domain {
            eigenvalue: bad,
            floor: EIGENVALUE_FLOOR,
        });
    }
    let mut bt = spec.to_eigenbasis(direction);
    let lam = &spec.eigenvalues;
    for a in 0..lam.len() {
        for b in 0..lam.len() {
            bt[(a, b)] *= log_divided_difference(lam[a], lam[b]);
        }
    }
    Ok(spec.from_eigenbasis(&bt))
}

/// `∫₀^∞ (X+s)⁻¹ B (X+s)⁻¹ ds` by Gauss–Legendre quadrature after
/// `s = u/(1−u)`, with resolvents from LU solves (no eigendecomposition).
///
/// The rule is run with `nodes` and `2·nodes`; the finer value is returned
/// when the two agree to [`QUADRATURE_TOL`].
pub fn frechet_log_quadrature(x: &Hermitian, direction: &CMatrix, nodes: usize) -> Result<CMatrix> {
    frechet_log_quadrature_with_tol(x, direction, nodes, QUADRATURE_TOL)
}

pub fn frechet_log_quadrature_with_tol(
    x: &Hermitian,
    direction: &CMatrix,
    nodes: usize,
    rel_tol: f64,
) -> Result<CMatrix> {
    ensure_same_dim(x.matrix(), direction)?;
    if nodes == 0 {
        return Err(crate::error::argument("quadrature needs at least one node"));
    }
    let coarse = resolvent_rule(x.matrix(), direction, nodes)?;
    let fine = resolvent_rule(x.matrix(), direction, 2 * nodes)?;
    let defect = (&fine - &coarse).norm();
    if defect > rel_tol * fine.norm().max(1.0) {
        return Err(Error::Convergence { nodes, defect });
    }
    Ok(fine)
}

// With M(u) = (1−u)X + u·1 the integrand (X+s)⁻¹B(X+s)⁻¹ ds becomes
// M⁻¹ B M⁻¹ du, bounded on [0, 1].
fn resolvent_rule(x: &CMatrix, b: &CMatrix, nodes: usize) -> Result<CMatrix> {
    let n = x.nrows();
    let (us, ws) = gauss_legendre_unit(nodes);
    let mut acc = CMatrix::zeros(n, n);
    for (&u, &w) in us.iter().zip(&ws) {
        let m: CMatrix = x * real(1.0 - u) + DMatrix::<Complex64>::identity(n, n) * real(u);
        let inv = m.lu().try_inverse().ok_or(Error::Domain {
            eigenvalue: 0.0,
            floor: EIGENVALUE_FLOOR,
        })?;
        acc += (&inv * b * &inv) * real(w);
    }
    Ok(acc)
}
