//! Lindblad models, mean-field potential, the N-body and Hartree generators
//! and their time integration.

mod integrator;

pub use integrator::{
    exact_unitary_flow, integrate, step_halving_error, Flow, IntegratorConfig, StepDiagnostics,
    Trajectory, POSITIVITY_LIMIT, TRACE_DRIFT_LIMIT,
};

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{argument, Error, Result};
use crate::linalg::{ensure_square, operator_norm, real, CMatrix, Hermitian, IMAG};
use crate::random::{random_complex, random_hermitian, seeded};
use crate::tensor::{embed_one_body, embed_two_body, flip_conjugate, ManyBodySpace};

/// Allowed `‖SWS − W‖_op` relative to `max(1, ‖W‖_op)`.
pub const EXCHANGE_TOL: f64 = 1e-12;

/// Allowed `‖LL* − L*L‖_op` relative to `max(1, ‖L‖²_op)`.
pub const NORMALITY_TOL: f64 = 1e-12;

/// One-body Hamiltonian `h`, exchange-symmetric two-body interaction `W`
/// and jump operator `L` on a site space of dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    site_dim: usize,
    h: Hermitian,
    w: Hermitian,
    l: CMatrix,
    normal_l: bool,
}

impl LindbladModel {
    pub fn new(h: Hermitian, w: Hermitian, l: CMatrix) -> Result<Self> {
        let d = h.dim();
        if d == 0 {
            return Err(argument("site dimension must be positive"));
        }
        if w.dim() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: w.dim(),
            });
        }
        let ld = ensure_square(&l)?;
        if ld != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: ld,
            });
        }
        let defect = operator_norm(&(flip_conjugate(w.matrix())? - w.matrix()));
        if defect > EXCHANGE_TOL * w.operator_norm().max(1.0) {
            return Err(Error::NotSymmetric { defect });
        }
        let normal_l = normality_defect(&l) <= NORMALITY_TOL * operator_norm(&l).powi(2).max(1.0);
        Ok(Self {
            site_dim: d,
            h,
            w,
            l,
            normal_l,
        })
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn h(&self) -> &Hermitian {
        &self.h
    }

    pub fn w(&self) -> &Hermitian {
        &self.w
    }

    pub fn l(&self) -> &CMatrix {
        &self.l
    }

    pub fn normal_l(&self) -> bool {
        self.normal_l
    }

    pub fn is_closed(&self) -> bool {
        self.l.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    /// Same `h` and `W` with `L = 0`.
    pub fn closed(&self) -> Self {
        Self {
            l: CMatrix::zeros(self.site_dim, self.site_dim),
            normal_l: true,
            ..self.clone()
        }
    }

    pub fn with_interaction(&self, w: Hermitian) -> Result<Self> {
        Self::new(self.h.clone(), w, self.l.clone())
    }

    pub fn with_jump(&self, l: CMatrix) -> Result<Self> {
        Self::new(self.h.clone(), self.w.clone(), l)
    }
}

/// `‖LL* − L*L‖_op`.
pub fn normality_defect(l: &CMatrix) -> f64 {
    operator_norm(&(l * l.adjoint() - l.adjoint() * l))
}

/// Periodic 1-D lattice Laplacian `Σ_{|y−x|=1}(u(x) − u(y))`, on-site
/// interaction `Σ_k |kk⟩⟨kk|` and dephasing `L = √κ · diag(0, 1, …, n−1)`.
///
/// A lattice of two sites has both neighbours of each site equal to the
/// other site, so the wraparound edge is counted twice.
pub fn bose_hubbard_model(lattice_size: usize, dephasing: f64) -> Result<LindbladModel> {
    if lattice_size < 2 {
        return Err(argument("lattice size must be at least 2"));
    }
    if !(dephasing >= 0.0) {
        return Err(argument("dephasing rate must be nonnegative"));
    }
    let n = lattice_size;
    let mut h = CMatrix::zeros(n, n);
    for x in 0..n {
        h[(x, x)] += real(2.0);
        h[(x, (x + 1) % n)] -= real(1.0);
        h[(x, (x + n - 1) % n)] -= real(1.0);
    }
    let mut w = CMatrix::zeros(n * n, n * n);
    for k in 0..n {
        w[(k * n + k, k * n + k)] = real(1.0);
    }
    let s = dephasing.sqrt();
    let l = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            real(s * i as f64)
        } else {
            real(0.0)
        }
    });
    LindbladModel::new(Hermitian::new(h)?, Hermitian::new(w)?, l)
}

/// Random `h`, exchange-symmetrized `W` rescaled to `‖W‖_op = w_norm_target`
/// and a jump operator that is diagonal (normal) when `l_diag` is set.
pub fn random_model(
    d: usize,
    seed: u64,
    w_norm_target: f64,
    l_diag: bool,
) -> Result<LindbladModel> {
    if d == 0 {
        return Err(argument("site dimension must be positive"));
    }
    if !(w_norm_target >= 0.0) {
        return Err(argument("interaction norm must be nonnegative"));
    }
    let mut rng = seeded(seed);
    let h = random_hermitian(&mut rng, d);
    let raw = random_hermitian(&mut rng, d * d);
    let sym = (raw.matrix() + flip_conjugate(raw.matrix())?) * real(0.5);
    let sym = Hermitian::hermitize(&sym);
    let norm = sym.operator_norm();
    let w = if norm > 0.0 {
        sym.scaled(w_norm_target / norm)
    } else {
        sym
    };
    let l = if l_diag {
        let diag: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        CMatrix::from_fn(d, d, |i, j| if i == j { diag[i] } else { real(0.0) })
    } else {
        random_complex(&mut rng, d, d)
    };
    LindbladModel::new(h, w, l)
}

/// `V^γ = tr₂((1⊗γ)W)`: `V[a,b] = Σ_{c,f} γ[c,f] W[(a,f),(b,c)]`.
pub fn mean_field_potential(gamma: &CMatrix, w: &CMatrix) -> Result<Hermitian> {
    let d = ensure_square(gamma)?;
    let n = ensure_square(w)?;
    if n != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: n,
        });
    }
    let mut v = CMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..d {
                for f in 0..d {
                    acc += gamma[(c, f)] * w[(a * d + f, b * d + c)];
                }
            }
            v[(a, b)] = acc;
        }
    }
    Ok(Hermitian::hermitize(&v))
}

/// `tr₁((γ⊗1)W)`: `U[a,b] = Σ_{c,f} γ[c,f] W[(f,a),(c,b)]`.
pub fn mean_field_potential_first(gamma: &CMatrix, w: &CMatrix) -> Result<Hermitian> {
    let d = ensure_square(gamma)?;
    let n = ensure_square(w)?;
    if n != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: n,
        });
    }
    let mut v = CMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..d {
                for f in 0..d {
                    acc += gamma[(c, f)] * w[(f * d + a, c * d + b)];
                }
            }
            v[(a, b)] = acc;
        }
    }
    Ok(Hermitian::hermitize(&v))
}

/// `H_N = Σ_j h_j + (N−1)⁻¹ Σ_{i<j} W_ij`.
pub fn n_body_hamiltonian(model: &LindbladModel, space: &ManyBodySpace) -> Result<Hermitian> {
    check_space(model, space)?;
    let n = space.legs();
    let dim = space.total_dim();
    let mut out = CMatrix::zeros(dim, dim);
    for j in 1..=n {
        out += embed_one_body(model.h.matrix(), j, space)?;
    }
    if n > 1 {
        let scale = real(1.0 / (n - 1) as f64);
        for i in 1..=n {
            for j in i + 1..=n {
                out += embed_two_body(model.w.matrix(), i, j, space)? * scale;
            }
        }
    }
    Ok(Hermitian::hermitize(&out))
}

fn check_space(model: &LindbladModel, space: &ManyBodySpace) -> Result<()> {
    if space.site_dim() != model.site_dim {
        return Err(Error::DimensionMismatch {
            expected: model.site_dim,
            found: space.site_dim(),
        });
    }
    Ok(())
}

/// `𝓛_L(A) = LAL* − ½(L*LA + AL*L)`.
pub fn dissipator(l: &CMatrix, a: &CMatrix) -> CMatrix {
    let ldl = l.adjoint() * l;
    l * a * l.adjoint() - (&ldl * a + a * &ldl) * real(0.5)
}

/// Precomputed N-body generator: `H_N`, the embedded jumps `L_j` and
/// `K = Σ_j L_j* L_j`.
#[derive(Debug, Clone)]
pub struct NBodyGenerator {
    hamiltonian: CMatrix,
    jumps: Vec<CMatrix>,
    jumps_adjoint: Vec<CMatrix>,
    half_k: CMatrix,
}

impl NBodyGenerator {
    pub fn new(model: &LindbladModel, space: &ManyBodySpace) -> Result<Self> {
        let hamiltonian = n_body_hamiltonian(model, space)?.into_matrix();
        let dim = space.total_dim();
        let mut jumps = Vec::new();
        let mut jumps_adjoint = Vec::new();
        let mut k = CMatrix::zeros(dim, dim);
        if !model.is_closed() {
            for j in 1..=space.legs() {
                let lj = embed_one_body(&model.l, j, space)?;
                let ljd = lj.adjoint();
                k += &ljd * &lj;
                jumps.push(lj);
                jumps_adjoint.push(ljd);
            }
        }
        Ok(Self {
            hamiltonian,
            jumps,
            jumps_adjoint,
            half_k: k * real(0.5),
        })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    /// `−i[H_N, Γ] + Σ_j 𝓛_{L_j}(Γ)`.
    pub fn rhs(&self, gamma: &CMatrix) -> CMatrix {
        let mut out = (&self.hamiltonian * gamma - gamma * &self.hamiltonian) * (-IMAG);
        if !self.jumps.is_empty() {
            for (l, ld) in self.jumps.iter().zip(&self.jumps_adjoint) {
                out += l * gamma * ld;
            }
            out -= &self.half_k * gamma + gamma * &self.half_k;
        }
        out
    }
}

/// `−i[H_N, Γ] + Σ_j 𝓛_{L_j}(Γ)`.
pub fn lindblad_rhs(
    gamma: &CMatrix,
    model: &LindbladModel,
    space: &ManyBodySpace,
) -> Result<CMatrix> {
    let g = NBodyGenerator::new(model, space)?;
    if gamma.nrows() != space.total_dim() || gamma.ncols() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.total_dim(),
            found: gamma.nrows(),
        });
    }
    Ok(g.rhs(gamma))
}

/// `−i[h + V^γ, γ] + 𝓛_L(γ)`.
pub fn hartree_rhs(gamma: &CMatrix, model: &LindbladModel) -> Result<CMatrix> {
    let d = ensure_square(gamma)?;
    if d != model.site_dim {
        return Err(Error::DimensionMismatch {
            expected: model.site_dim,
            found: d,
        });
    }
    Ok(hartree_rhs_unchecked(gamma, model))
}

pub(crate) fn hartree_rhs_unchecked(gamma: &CMatrix, model: &LindbladModel) -> CMatrix {
    let v = mean_field_potential(gamma, model.w.matrix()).expect("dimensions checked");
    let hv = model.h.matrix() + v.matrix();
    let mut out = (&hv * gamma - gamma * &hv) * (-IMAG);
    if !model.is_closed() {
        out += dissipator(&model.l, gamma);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_trace;
    use crate::random::random_density;
    use crate::tensor::{conjugate_by_permutation, symmetry_defect, tensor_power, Permutation};

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn bose_hubbard_two_sites() {
        let m = bose_hubbard_model(2, 0.1).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[real(2.0), real(-2.0), real(-2.0), real(2.0)]);
        assert_eq!(m.h().matrix(), &want);
        let w = Hermitian::from_diagonal(&[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(m.w().matrix(), w.matrix());
        assert!(m.normal_l());
        assert!(bose_hubbard_model(1, 0.1).is_err());
    }

    #[test]
    fn bose_hubbard_laplacian_kills_constants() {
        for n in 2..7 {
            let m = bose_hubbard_model(n, 0.0).unwrap();
            let ones = nalgebra::DVector::from_element(n, real(1.0));
            assert!((m.h().matrix() * ones).norm() < 1e-15);
            if n > 2 {
                assert_eq!(m.h().matrix()[(0, n - 1)], real(-1.0));
                assert_eq!(m.h().matrix()[(0, 0)], real(2.0));
            }
        }
    }

    #[test]
    fn random_model_contract() {
        let m = random_model(3, 42, 1.5, true).unwrap();
        let defect = operator_norm(&(flip_conjugate(m.w().matrix()).unwrap() - m.w().matrix()));
        assert!(defect < 1e-15);
        assert!((m.w().operator_norm() - 1.5).abs() < 1e-12);
        assert!(m.normal_l());
        assert_eq!(m, random_model(3, 42, 1.5, true).unwrap());
        assert!(!random_model(3, 42, 1.5, false).unwrap().normal_l());
    }

    #[test]
    fn asymmetric_interaction_rejected() {
        let mut rng = seeded(1);
        let h = random_hermitian(&mut rng, 2);
        let w = random_hermitian(&mut rng, 4);
        let l = CMatrix::zeros(2, 2);
        assert!(matches!(
            LindbladModel::new(h, w, l),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn mean_field_examples() {
        let bh = bose_hubbard_model(2, 0.0).unwrap();
        let g = Hermitian::from_diagonal(&[0.6, 0.4]);
        let v = mean_field_potential(g.matrix(), bh.w().matrix()).unwrap();
        assert!(close(v.matrix(), g.matrix(), 1e-15));
        let mixed = CMatrix::identity(2, 2) * real(0.5);
        let v = mean_field_potential(&mixed, bh.w().matrix()).unwrap();
        assert!(close(v.matrix(), &mixed, 1e-15));
    }

    #[test]
    fn mean_field_partial_trace_orders_agree() {
        for seed in 0..20 {
            let m = random_model(3, seed, 1.0, true).unwrap();
            let g = random_density(&mut seeded(seed + 100), 3, 0.01);
            let a = mean_field_potential(g.matrix(), m.w().matrix()).unwrap();
            let b = mean_field_potential_first(g.matrix(), m.w().matrix()).unwrap();
            assert!(close(a.matrix(), b.matrix(), 1e-12));
            assert!(a.operator_norm() <= m.w().operator_norm() + 1e-12);
        }
    }

    #[test]
    fn two_body_hamiltonian_is_single_pair() {
        let m = random_model(2, 3, 1.0, true).unwrap();
        let space = ManyBodySpace::new(2, 2).unwrap();
        let h = n_body_hamiltonian(&m, &space).unwrap();
        let want = embed_one_body(m.h().matrix(), 1, &space).unwrap()
            + embed_one_body(m.h().matrix(), 2, &space).unwrap()
            + m.w().matrix();
        assert!(close(h.matrix(), &want, 1e-14));

        let space = ManyBodySpace::new(2, 4).unwrap();
        let h = n_body_hamiltonian(&m, &space).unwrap();
        assert!(symmetry_defect(h.matrix(), &space).unwrap() < 1e-13);
        let pi = Permutation::new(alloc::vec![3, 1, 4, 2]).unwrap();
        let c = conjugate_by_permutation(h.matrix(), &pi, &space).unwrap();
        assert!(close(&c, h.matrix(), 1e-13));

        let free = m.with_interaction(Hermitian::zeros(4)).unwrap();
        let h = n_body_hamiltonian(&free, &space).unwrap();
        let mut want = CMatrix::zeros(16, 16);
        for j in 1..=4 {
            want += embed_one_body(m.h().matrix(), j, &space).unwrap();
        }
        assert!(close(h.matrix(), &want, 1e-14));

        let single = ManyBodySpace::new(2, 1).unwrap();
        assert!(close(
            n_body_hamiltonian(&m, &single).unwrap().matrix(),
            m.h().matrix(),
            0.0
        ));
    }

    #[test]
    fn dissipator_examples() {
        let l = Hermitian::from_diagonal(&[1.0, -1.0]).into_matrix();
        let sx = CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)]);
        assert!(close(&dissipator(&l, &sx), &(&sx * real(-2.0)), 1e-15));
        let normal = random_model(3, 9, 1.0, true).unwrap();
        assert!(dissipator(normal.l(), &CMatrix::identity(3, 3)).norm() < 1e-14);
        let mut rng = seeded(4);
        let general = random_complex(&mut rng, 3, 3);
        let a = random_complex(&mut rng, 3, 3);
        assert!(dissipator(&general, &a).trace().norm() < 1e-13);
    }

    #[test]
    fn lindblad_rhs_properties() {
        let m = random_model(2, 5, 1.0, true).unwrap();
        let space = ManyBodySpace::new(2, 3).unwrap();
        let g = random_density(&mut seeded(6), 8, 0.01);
        let r = lindblad_rhs(g.matrix(), &m, &space).unwrap();
        assert!(r.trace().norm() < 1e-12);
        assert!((&r - r.adjoint()).norm() < 1e-13);

        let closed = m.closed();
        let h = n_body_hamiltonian(&closed, &space).unwrap();
        let stationary = crate::dynamics::exact_unitary_flow(&h, &CMatrix::identity(8, 8), 0.3)
            .unwrap()
            * real(0.125);
        assert!(lindblad_rhs(&stationary, &closed, &space).unwrap().norm() < 1e-13);

        let free = closed.with_interaction(Hermitian::zeros(4)).unwrap();
        let g1 = random_density(&mut seeded(7), 2, 0.1);
        let prod = tensor_power(g1.matrix(), &space).unwrap();
        let r = lindblad_rhs(&prod, &free, &space).unwrap();
        let one = (m.h().matrix() * g1.matrix() - g1.matrix() * m.h().matrix()) * (-IMAG);
        let want = one.kronecker(g1.matrix()).kronecker(g1.matrix())
            + g1.matrix().kronecker(&one).kronecker(g1.matrix())
            + g1.matrix().kronecker(g1.matrix()).kronecker(&one);
        assert!(close(&r, &want, 1e-13));
    }

    #[test]
    fn hartree_rhs_properties() {
        let m = random_model(3, 8, 1.0, true).unwrap().closed();
        let mixed = CMatrix::identity(3, 3) * real(1.0 / 3.0);
        assert!(hartree_rhs(&mixed, &m).unwrap().norm() < 1e-15);
        let open = random_model(3, 8, 1.0, true).unwrap();
        let g = random_density(&mut seeded(2), 3, 0.05);
        let r = hartree_rhs(g.matrix(), &open).unwrap();
        assert!(r.trace().norm() < 1e-14);
        assert!((&r - r.adjoint()).norm() < 1e-14);

        // with diagonal h, W, L and γ the flow stays diagonal
        let bh = bose_hubbard_model(3, 0.2).unwrap();
        let dh = LindbladModel::new(
            Hermitian::from_diagonal(&[0.1, 0.5, -0.3]),
            bh.w().clone(),
            bh.l().clone(),
        )
        .unwrap();
        let gd = Hermitian::from_diagonal(&[0.2, 0.3, 0.5]);
        assert!(hartree_rhs(gd.matrix(), &dh).unwrap().norm() < 1e-15);
        let r = hartree_rhs(gd.matrix(), &bh).unwrap();
        assert!(r.norm() > 1e-3);
        assert!(real_trace(&r).abs() < 1e-15);
    }
}
