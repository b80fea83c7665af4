//! Seeded sampling of test operators. Every draw goes through a counter-based
//! ChaCha stream so that a seed fixes the output bit for bit.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{real, real_trace, CMatrix, Hermitian};

pub type ScenarioRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> ScenarioRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent entries uniform in the unit square.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Hermitian {
    Hermitian::hermitize(&random_complex(rng, dim, dim))
}

/// Faithful density `(1 − d·m₀)·GG*/tr(GG*) + m₀·1`, so its smallest
/// eigenvalue is at least `min_eig`. Requires `d·min_eig < 1`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, min_eig: f64) -> Hermitian {
    assert!(dim as f64 * min_eig < 1.0, "floor too large for dimension");
    let g = random_complex(rng, dim, dim);
    let gg = &g * g.adjoint();
    let t = real_trace(&gg);
    let mut m = gg * real((1.0 - dim as f64 * min_eig) / t);
    for i in 0..dim {
        m[(i, i)] += real(min_eig);
    }
    Hermitian::hermitize(&m)
}

/// Pure state `|ψ⟩⟨ψ|` for a uniformly random direction.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Hermitian {
    let v = random_complex(rng, dim, 1);
    let v = &v / real(v.norm());
    Hermitian::hermitize(&(&v * v.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_has_floor_and_unit_trace() {
        let mut rng = seeded(3);
        for dim in 1..6 {
            let rho = random_density(&mut rng, dim, 0.05);
            assert!((rho.trace() - 1.0).abs() < 1e-13);
            assert!(rho.min_eigenvalue() >= 0.05 - 1e-13);
        }
    }

    #[test]
    fn seed_determines_draws() {
        let a = random_hermitian(&mut seeded(9), 4);
        let b = random_hermitian(&mut seeded(9), 4);
        assert_eq!(a.matrix(), b.matrix());
    }
}
