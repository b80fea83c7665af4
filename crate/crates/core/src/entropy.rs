//! Von Neumann and relative entropies, trace distance, and the inequality
//! checks built on them.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_same_dim, exp_hermitian, real_trace, trace_of_product, CMatrix, Hermitian,
    SpectralDecomposition, EIGENVALUE_FLOOR, HERMITICITY_TOL,
};
use crate::tensor::{partial_trace, symmetry_defect, tensor_power, ManyBodySpace};
use crate::Comparison;

/// Tolerances deciding what counts as a density operator and where the
/// numerical kernel begins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPolicy {
    /// Allowed `|tr Γ − 1|`.
    pub trace_tol: f64,
    /// Eigenvalues in `[−negativity_tol, 0)` are clipped to zero.
    pub negativity_tol: f64,
    /// Eigenvalues at or below this value span the kernel of `Γ′`.
    pub floor: f64,
    /// Mass of `Γ` on the kernel of `Γ′` above this value makes `S` infinite.
    pub kernel_tol: f64,
}

impl Default for DensityPolicy {
    fn default() -> Self {
        Self {
            trace_tol: 1e-8,
            negativity_tol: 1e-10,
            floor: EIGENVALUE_FLOOR,
            kernel_tol: 1e-10,
        }
    }
}

/// Symmetry tolerance for the block subadditivity precondition.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    /// `f64::INFINITY` when the kernel condition fails.
    pub value: f64,
    /// Mass of the first argument on the numerical kernel of the second.
    pub mass_below_floor: f64,
}

impl EntropyValue {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    pub fn finite(&self) -> Result<f64> {
        if self.is_infinite() {
            Err(Error::InfiniteEntropy {
                mass: self.mass_below_floor,
            })
        } else {
            Ok(self.value)
        }
    }
}

/// Validates a nominal density and returns its spectral decomposition with
/// slightly negative eigenvalues clipped and the spectrum renormalized.
pub fn density_spectrum(gamma: &CMatrix, policy: &DensityPolicy) -> Result<SpectralDecomposition> {
    let h = Hermitian::with_tolerance(gamma.clone(), HERMITICITY_TOL)?;
    let tr = h.trace();
    if (tr - 1.0).abs() > policy.trace_tol {
        return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
    }
    let mut spec = h.eig()?;
    let min = spec.min();
    if min < -policy.negativity_tol {
        return Err(Error::NotDensity(format!("eigenvalue {min} is negative")));
    }
    for l in spec.eigenvalues.iter_mut() {
        *l = l.max(0.0);
    }
    let total: f64 = spec.eigenvalues.iter().sum();
    for l in spec.eigenvalues.iter_mut() {
        *l /= total;
    }
    Ok(spec)
}

fn entropy_of_spectrum(lam: &[f64]) -> f64 {
    -lam.iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

/// `−tr Γ log Γ` with `0 log 0 = 0`.
pub fn von_neumann_entropy(gamma: &CMatrix) -> Result<f64> {
    von_neumann_entropy_with(gamma, &DensityPolicy::default())
}

pub fn von_neumann_entropy_with(gamma: &CMatrix, policy: &DensityPolicy) -> Result<f64> {
    Ok(entropy_of_spectrum(
        &density_spectrum(gamma, policy)?.eigenvalues,
    ))
}

/// `tr(Γ log Γ − Γ log Γ′)`, evaluated in the two eigenbases.
pub fn relative_entropy(gamma: &CMatrix, reference: &CMatrix) -> Result<EntropyValue> {
    relative_entropy_with(gamma, reference, &DensityPolicy::default())
}

pub fn relative_entropy_with(
    gamma: &CMatrix,
    reference: &CMatrix,
    policy: &DensityPolicy,
) -> Result<EntropyValue> {
    ensure_same_dim(gamma, reference)?;
    let a = density_spectrum(gamma, policy)?;
    let b = density_spectrum(reference, policy)?;
    // overlap[(i, j)] = |⟨u_i|v_j⟩|²
    let cross = a.eigenvectors.adjoint() * &b.eigenvectors;
    let n = a.dim();
    let mut kernel_mass = 0.0;
    let mut cross_term = 0.0;
    for j in 0..n {
        let mu = b.eigenvalues[j];
        let weight: f64 = (0..n)
            .map(|i| a.eigenvalues[i] * cross[(i, j)].norm_sqr())
            .sum();
        if mu <= policy.floor {
            kernel_mass += weight;
        } else {
            cross_term += weight * mu.ln();
        }
    }
    if kernel_mass > policy.kernel_tol {
        return Ok(EntropyValue {
            value: f64::INFINITY,
            mass_below_floor: kernel_mass,
        });
    }
    Ok(EntropyValue {
        value: -entropy_of_spectrum(&a.eigenvalues) - cross_term,
        mass_below_floor: kernel_mass,
    })
}

/// `Σ |eigenvalues of Γ − Γ′|` (no factor ½).
pub fn trace_distance(gamma: &CMatrix, other: &CMatrix) -> Result<f64> {
    ensure_same_dim(gamma, other)?;
    let diff = Hermitian::hermitize(&(gamma - other));
    Ok(diff.eig()?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// `‖Γ − Γ′‖₁² ≤ 2 S(Γ, Γ′)`.
pub fn pinsker_check(gamma: &CMatrix, other: &CMatrix) -> Result<Comparison> {
    let d = trace_distance(gamma, other)?;
    let s = relative_entropy(gamma, other)?;
    Ok(Comparison::new(d * d, 2.0 * s.value))
}

/// `S(Γ^{N:k}, γ^{⊗k}) ≤ (k/N)·S(Γ, γ^{⊗N})` for a symmetric `Γ`.
pub fn block_subadditivity_check(
    gamma_n: &CMatrix,
    gamma: &CMatrix,
    k: usize,
    space: &ManyBodySpace,
) -> Result<Comparison> {
    let n = space.legs();
    if k == 0 || k > n {
        return Err(crate::error::argument(format!(
            "block size {k} outside 1..={n}"
        )));
    }
    let defect = symmetry_defect(gamma_n, space)?;
    if defect > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { defect });
    }
    let full_ref = tensor_power(gamma, space)?;
    let rhs = relative_entropy(gamma_n, &full_ref)?.value * k as f64 / n as f64;
    let keep: Vec<usize> = (1..=k).collect();
    let marginal = partial_trace(gamma_n, &keep, space)?;
    let small = ManyBodySpace::with_cap(space.site_dim(), k, space.cap())?;
    let lhs = relative_entropy(&marginal, &tensor_power(gamma, &small)?)?.value;
    Ok(Comparison::new(lhs, rhs))
}

/// `tr(ρA) ≤ λ⁻¹ S(ρ, σ) + λ⁻¹ log tr(σ e^{λA})`.
pub fn entropy_inequality_check(
    rho: &CMatrix,
    sigma: &CMatrix,
    a: &Hermitian,
    lambda: f64,
) -> Result<Comparison> {
    if !(lambda > 0.0) {
        return Err(crate::error::argument("lambda must be positive"));
    }
    ensure_same_dim(rho, a.matrix())?;
    let s = relative_entropy(rho, sigma)?.finite()?;
    let lhs = trace_of_product(rho, a.matrix()).re;
    let e = exp_hermitian(&a.scaled(lambda))?;
    let z = real_trace(&(sigma * e.matrix()));
    Ok(Comparison::new(lhs, (s + z.ln()) / lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::random::{random_density, random_hermitian, random_pure, seeded};

    fn diag(v: &[f64]) -> CMatrix {
        Hermitian::from_diagonal(v).into_matrix()
    }

    #[test]
    fn von_neumann_examples() {
        let pure = random_pure(&mut seeded(1), 4);
        assert!(von_neumann_entropy(pure.matrix()).unwrap().abs() < 1e-12);
        let mixed = CMatrix::identity(4, 4) * real(0.25);
        assert!((von_neumann_entropy(&mixed).unwrap() - 4f64.ln()).abs() < 1e-14);
        let s = von_neumann_entropy(&diag(&[0.3, 0.7])).unwrap();
        let want = -0.3 * 0.3f64.ln() - 0.7 * 0.7f64.ln();
        assert!((s - want).abs() < 1e-15);
        assert!((s - 0.6109).abs() < 1e-4);
    }

    #[test]
    fn rejects_non_densities() {
        assert!(matches!(
            von_neumann_entropy(&diag(&[0.5, 0.6])),
            Err(Error::NotDensity(_))
        ));
        assert!(matches!(
            von_neumann_entropy(&diag(&[1.1, -0.1])),
            Err(Error::NotDensity(_))
        ));
        // tiny negativity is clipped
        assert!(von_neumann_entropy(&diag(&[1.0 + 5e-11, -5e-11])).is_ok());
    }

    #[test]
    fn relative_entropy_examples() {
        let a = diag(&[0.3, 0.7]);
        let b = diag(&[0.5, 0.5]);
        assert!(relative_entropy(&a, &a).unwrap().value.abs() < 1e-15);
        let s = relative_entropy(&a, &b).unwrap().value;
        let kl = 0.3 * 0.6f64.ln() + 0.7 * 1.4f64.ln();
        assert!((s - kl).abs() < 1e-15);
        assert!((s - 0.08228).abs() < 1e-5);

        let rank_deficient = diag(&[1.0, 0.0]);
        let r = relative_entropy(&a, &rank_deficient).unwrap();
        assert!(r.is_infinite());
        assert!((r.mass_below_floor - 0.7).abs() < 1e-15);
        assert!(r.finite().is_err());
        // the kernel of Γ′ inside the kernel of Γ is harmless
        let r = relative_entropy(&rank_deficient, &a).unwrap();
        assert!((r.value + 0.3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn trace_distance_examples() {
        let a = diag(&[0.3, 0.7]);
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert!((trace_distance(&a, &diag(&[0.5, 0.5])).unwrap() - 0.4).abs() < 1e-15);
        assert!(
            (trace_distance(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap() - 2.0).abs() < 1e-15
        );
    }

    #[test]
    fn pinsker_example() {
        let c = pinsker_check(&diag(&[0.3, 0.7]), &diag(&[0.5, 0.5])).unwrap();
        assert!((c.lhs - 0.16).abs() < 1e-14);
        assert!((c.rhs - 0.16456).abs() < 1e-5);
        assert!(c.holds(1e-10));
    }

    #[test]
    fn block_subadditivity_cases() {
        let mut rng = seeded(21);
        let gamma = random_density(&mut rng, 2, 0.1);
        let space = ManyBodySpace::new(2, 3).unwrap();
        let product = tensor_power(gamma.matrix(), &space).unwrap();
        let c = block_subadditivity_check(&product, gamma.matrix(), 2, &space).unwrap();
        assert!(c.lhs.abs() < 1e-12 && c.rhs.abs() < 1e-12);

        let raw = random_density(&mut rng, 8, 0.01);
        let sym = crate::tensor::symmetrize(raw.matrix(), &space).unwrap();
        let c = block_subadditivity_check(sym.matrix(), gamma.matrix(), 3, &space).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-12);
        let c = block_subadditivity_check(sym.matrix(), gamma.matrix(), 1, &space).unwrap();
        assert!(c.margin() > 1e-6);

        assert!(matches!(
            block_subadditivity_check(raw.matrix(), gamma.matrix(), 1, &space),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn entropy_inequality_cases() {
        let mut rng = seeded(30);
        let rho = random_density(&mut rng, 3, 0.05);
        let sigma = random_density(&mut rng, 3, 0.05);
        let c = entropy_inequality_check(rho.matrix(), sigma.matrix(), &Hermitian::zeros(3), 1.0)
            .unwrap();
        assert!(c.lhs.abs() < 1e-15);
        assert!(
            (c.rhs
                - relative_entropy(rho.matrix(), sigma.matrix())
                    .unwrap()
                    .value)
                .abs()
                < 1e-14
        );

        let a = random_hermitian(&mut rng, 3);
        for lambda in [0.1, 1.0, 10.0] {
            let c = entropy_inequality_check(sigma.matrix(), sigma.matrix(), &a, lambda).unwrap();
            assert!(c.holds(1e-12));
        }
        assert!(entropy_inequality_check(rho.matrix(), sigma.matrix(), &a, 0.0).is_err());
    }
}
