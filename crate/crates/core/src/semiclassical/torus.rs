use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{argument, Error, Result};
use crate::linalg::{operator_norm, CMatrix, Hermitian};

/// Largest admissible squared-norm tail of a truncated coherent state.
pub const TAIL_TOL: f64 = 1e-12;

/// Gaussian weights below `e^{-TAIL_EXPONENT}` are dropped from theta sums.
const TAIL_EXPONENT: f64 = 45.0;

/// Fourier modes `−K..=K` on `L²(𝕋)` at Planck constant `ħ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusHilbert {
    hbar: f64,
    cutoff: usize,
}

impl TorusHilbert {
    /// Fails when the coherent state at `p = 0` does not fit in the modes.
    pub fn new(hbar: f64, cutoff: usize) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(argument("hbar must be positive and finite"));
        }
        if cutoff == 0 {
            return Err(argument("Fourier cutoff must be at least 1"));
        }
        let space = Self { hbar, cutoff };
        let tail = space.tail(0.0);
        if tail > TAIL_TOL {
            return Err(Error::Truncation {
                tail,
                tolerance: TAIL_TOL,
            });
        }
        Ok(space)
    }

    /// Smallest cutoff holding every coherent state with `|p| ≤ p_max`.
    pub fn for_momentum(hbar: f64, p_max: f64) -> Result<Self> {
        if !(p_max >= 0.0) || !p_max.is_finite() {
            return Err(argument("momentum bound must be nonnegative"));
        }
        let mut space = Self::new(hbar, 1).or_else(|_| {
            let k = (p_max / (2.0 * PI * hbar)).ceil() as usize + theta_radius(hbar);
            Self::new(hbar, k.max(1))
        })?;
        while space.tail(p_max).max(space.tail(-p_max)) > TAIL_TOL {
            space.cutoff += 1;
        }
        while space.cutoff > 1 {
            let smaller = Self {
                cutoff: space.cutoff - 1,
                ..space
            };
            if smaller
                .tail(p_max)
                .max(smaller.tail(-p_max))
                .max(smaller.tail(0.0))
                > TAIL_TOL
            {
                break;
            }
            space = smaller;
        }
        Ok(space)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    /// Fourier mode of basis index `idx`.
    pub fn mode(&self, idx: usize) -> i64 {
        idx as i64 - self.cutoff as i64
    }

    /// `2πħ`, the phase-space cell volume.
    pub fn cell(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    /// Squared-norm fraction of `|z⟩` outside the modes, for momentum `p`.
    pub fn tail(&self, p: f64) -> f64 {
        let (lo, hi) = self.theta_range(p);
        let k = self.cutoff as i64;
        let mut inside = 0.0;
        let mut outside = 0.0;
        for n in lo..=hi {
            let w = self.weight(p, n);
            if n.abs() <= k {
                inside += w;
            } else {
                outside += w;
            }
        }
        outside / (inside + outside)
    }

    fn weight(&self, p: f64, n: i64) -> f64 {
        let s = p - self.cell() * n as f64;
        (-s * s / self.hbar).exp()
    }

    fn theta_range(&self, p: f64) -> (i64, i64) {
        let center = (p / self.cell()).round() as i64;
        let r = theta_radius(self.hbar) as i64;
        (center - r, center + r)
    }

    /// `Σ_{n∈ℤ} e^{−(p−2πħn)²/ħ}`.
    fn theta(&self, p: f64) -> f64 {
        let (lo, hi) = self.theta_range(p);
        (lo..=hi).map(|n| self.weight(p, n)).sum()
    }
}

fn theta_radius(hbar: f64) -> usize {
    // e^{−4π²ħ r²} below e^{−TAIL_EXPONENT}
    (TAIL_EXPONENT / (4.0 * PI * PI * hbar)).sqrt().ceil() as usize + 2
}

/// Fourier coefficients of `|z⟩` on the retained modes, normalized on all of
/// `L²(𝕋)`, together with the squared-norm tail that was cut off.
pub fn projected_coherent_state(z: (f64, f64), space: &TorusHilbert) -> (DVector<Complex64>, f64) {
    let (q, p) = z;
    let hbar = space.hbar;
    let amplitude = 1.0 / space.theta(p).sqrt();
    let coeffs = DVector::from_fn(space.dim(), |idx, _| {
        let n = space.mode(idx) as f64;
        let s = p - space.cell() * n;
        let phase = q * (p / hbar - 2.0 * PI * n);
        Complex64::from_polar(amplitude * (-s * s / (2.0 * hbar)).exp(), phase)
    });
    (coeffs, space.tail(p))
}

/// `|z⟩` for `z = (q, p)`, `q ∈ [0,1)`, as a unit vector of Fourier
/// coefficients.
pub fn coherent_state(z: (f64, f64), space: &TorusHilbert) -> Result<DVector<Complex64>> {
    if !z.0.is_finite() || !z.1.is_finite() {
        return Err(Error::NonFinite);
    }
    let (coeffs, tail) = projected_coherent_state(z, space);
    if tail > TAIL_TOL {
        return Err(Error::Truncation {
            tail,
            tolerance: TAIL_TOL,
        });
    }
    Ok(coeffs)
}

pub fn overlap(a: (f64, f64), b: (f64, f64), space: &TorusHilbert) -> Result<Complex64> {
    Ok(coherent_state(a, space)?.dotc(&coherent_state(b, space)?))
}

/// Product quadrature on `[0,1) × [−P, P]`: uniform `q`, midpoint `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    q_nodes: Vec<f64>,
    p_nodes: Vec<f64>,
    weight: f64,
}

impl PhaseSpaceGrid {
    pub fn new(nq: usize, np: usize, p_max: f64) -> Result<Self> {
        if nq == 0 || np == 0 {
            return Err(argument("grid needs at least one node per axis"));
        }
        if !(p_max > 0.0) || !p_max.is_finite() {
            return Err(argument("momentum window must be positive"));
        }
        let h = 2.0 * p_max / np as f64;
        Ok(Self {
            q_nodes: (0..nq).map(|j| j as f64 / nq as f64).collect(),
            p_nodes: (0..np).map(|k| -p_max + (k as f64 + 0.5) * h).collect(),
            weight: h / nq as f64,
        })
    }

    pub fn q_nodes(&self) -> &[f64] {
        &self.q_nodes
    }

    pub fn p_nodes(&self) -> &[f64] {
        &self.p_nodes
    }

    /// Common weight of every node.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.q_nodes.len() * self.p_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total weight, the area `2P` of the window.
    pub fn measure(&self) -> f64 {
        self.weight * self.len() as f64
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.q_nodes
            .iter()
            .flat_map(move |&q| self.p_nodes.iter().map(move |&p| (q, p)))
    }
}

/// `ħ = 0.005`, modes holding every coherent state with `|p| ≤ 0.3`, and a
/// 48 × 72 grid on `[0,1) × [−1, 1]`.
pub fn standard_window() -> (TorusHilbert, PhaseSpaceGrid) {
    let space = TorusHilbert::for_momentum(0.005, 0.3).expect("valid constants");
    let grid = PhaseSpaceGrid::new(48, 72, 1.0).expect("valid constants");
    (space, grid)
}

/// Finitely supported nonnegative measure on `𝕋 × ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<(f64, f64)>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<(f64, f64)>, masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: masses.len(),
            });
        }
        if points
            .iter()
            .any(|&(q, p)| !q.is_finite() || !p.is_finite())
            || masses.iter().any(|m| !m.is_finite())
        {
            return Err(Error::NonFinite);
        }
        if let Some(m) = masses.iter().find(|&&m| m < 0.0) {
            return Err(argument(alloc::format!("negative mass {m}")));
        }
        Ok(Self { points, masses })
    }

    pub fn dirac(z: (f64, f64)) -> Self {
        Self {
            points: alloc::vec![z],
            masses: alloc::vec![1.0],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let total = self.total();
        if !(total > 0.0) {
            return Err(argument("measure has no mass"));
        }
        Ok(Self {
            points: self.points.clone(),
            masses: self.masses.iter().map(|m| m / total).collect(),
        })
    }
}

fn nonnegative_spectrum(gamma: &Hermitian) -> Result<(Vec<f64>, CMatrix)> {
    let eig = gamma.eig()?;
    let min = eig.min();
    if min < -crate::entropy::DensityPolicy::default().negativity_tol {
        return Err(Error::NotDensity(alloc::format!(
            "eigenvalue {min} is negative"
        )));
    }
    let values = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    Ok((values, eig.eigenvectors))
}

fn husimi_value(values: &[f64], vectors: &CMatrix, c: &DVector<Complex64>, cell: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &l) in values.iter().enumerate() {
        if l > 0.0 {
            acc += l * vectors.column(k).dotc(c).norm_sqr();
        }
    }
    acc / cell
}

/// `(2πħ)⁻¹⟨z|Γ|z⟩` at each point, with `|z⟩` projected onto the modes.
pub fn husimi_density(
    gamma: &Hermitian,
    space: &TorusHilbert,
    points: &[(f64, f64)],
) -> Result<Vec<f64>> {
    if gamma.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: gamma.dim(),
        });
    }
    let (values, vectors) = nonnegative_spectrum(gamma)?;
    Ok(points
        .iter()
        .map(|&z| {
            husimi_value(
                &values,
                &vectors,
                &projected_coherent_state(z, space).0,
                space.cell(),
            )
        })
        .collect())
}

/// Husimi density times the quadrature weight at every grid node.
pub fn husimi(
    gamma: &Hermitian,
    space: &TorusHilbert,
    grid: &PhaseSpaceGrid,
) -> Result<DiscreteMeasure> {
    let points: Vec<(f64, f64)> = grid.points().collect();
    let density = husimi_density(gamma, space, &points)?;
    let masses = density.iter().map(|h| h * grid.weight()).collect();
    Ok(DiscreteMeasure { points, masses })
}

/// `Σ_a μ_a |z_a⟩⟨z_a|`, the Toeplitz quantization rescaled by `2πħ` so
/// that probability measures map to density operators.
pub fn toeplitz(mu: &DiscreteMeasure, space: &TorusHilbert) -> Result<Hermitian> {
    let dim = space.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for (&z, &m) in mu.points.iter().zip(&mu.masses) {
        let c = coherent_state(z, space)?;
        out += (&c * c.adjoint()) * Complex64::new(m, 0.0);
    }
    Ok(Hermitian::hermitize(&out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionDefect {
    /// `‖Σ_grid w|z⟩⟨z| − 2πħ·1‖_op` on the retained modes.
    pub absolute: f64,
    /// The same divided by `2πħ`.
    pub relative: f64,
}

pub fn resolution_identity_check(space: &TorusHilbert, grid: &PhaseSpaceGrid) -> ResolutionDefect {
    let dim = space.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    let w = Complex64::new(grid.weight(), 0.0);
    for z in grid.points() {
        let c = projected_coherent_state(z, space).0;
        acc += (&c * c.adjoint()) * w;
    }
    for k in 0..dim {
        acc[(k, k)] -= space.cell();
    }
    let absolute = operator_norm(&acc);
    ResolutionDefect {
        absolute,
        relative: absolute / space.cell(),
    }
}

/// `sup_grid |𝓗[Op(μ)](z) − (2πħ)⁻¹ Σ_a μ_a Σ_k e^{−((q−q_a+k)² + (p−p_a)²)/(2ħ)}|`.
pub fn duality_check(
    mu: &DiscreteMeasure,
    space: &TorusHilbert,
    grid: &PhaseSpaceGrid,
) -> Result<f64> {
    let op = toeplitz(mu, space)?;
    let points: Vec<(f64, f64)> = grid.points().collect();
    let lhs = husimi_density(&op, space, &points)?;
    let hbar = space.hbar();
    let images = theta_radius(hbar) as i64;
    let mut worst: f64 = 0.0;
    for (&(q, p), h) in points.iter().zip(lhs) {
        let mut rhs = 0.0;
        for (&(qa, pa), &m) in mu.points.iter().zip(&mu.masses) {
            let dp = p - pa;
            let dq = (q - qa) - (q - qa).round();
            for k in -images..=images {
                let s = dq + k as f64;
                rhs += m * (-(s * s + dp * dp) / (2.0 * hbar)).exp();
            }
        }
        worst = worst.max((h - rhs / space.cell()).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, seeded};
    use rand::Rng;

    #[test]
    fn norms_across_hbar() {
        for &hbar in &[0.02, 0.05, 0.1, 0.2, 0.5] {
            let space = TorusHilbert::for_momentum(hbar, 1.0).unwrap();
            for &(q, p) in &[(0.0, 0.0), (0.3, 0.7), (0.9, -1.0), (0.5, 0.01)] {
                let c = coherent_state((q, p), &space).unwrap();
                assert!((c.norm() - 1.0).abs() < 1e-12, "hbar={hbar}");
            }
        }
    }

    #[test]
    fn small_cutoff_is_rejected() {
        assert!(matches!(
            TorusHilbert::new(0.005, 3),
            Err(Error::Truncation { .. })
        ));
        let space = TorusHilbert::for_momentum(0.05, 0.0).unwrap();
        assert!(matches!(
            coherent_state((0.0, 3.0), &space),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn momentum_shift_by_one_cell_shifts_modes() {
        let space = TorusHilbert::for_momentum(0.05, 1.5).unwrap();
        let (q, p) = (0.37, 0.2);
        let a = projected_coherent_state((q, p), &space).0;
        let b = projected_coherent_state((q, p + space.cell()), &space).0;
        for idx in 1..space.dim() {
            assert!((b[idx] - a[idx - 1]).norm() < 1e-14);
        }
    }

    #[test]
    fn overlaps_decay_with_distance() {
        let space = TorusHilbert::for_momentum(0.005, 0.2).unwrap();
        let mut last = 1.0 + 1e-15;
        for k in 0..9 {
            let d = 0.02 * k as f64;
            let o = overlap((0.2, 0.0), (0.2 + d, d), &space).unwrap().norm();
            assert!(o < last);
            last = o;
            let flat = (-(2.0 * d * d) / (4.0 * 0.005)).exp();
            assert!((o - flat).abs() < 1e-8);
        }
    }

    #[test]
    fn toeplitz_of_dirac_is_projector() {
        let space = TorusHilbert::for_momentum(0.05, 0.5).unwrap();
        let z = (0.4, -0.3);
        let t = toeplitz(&DiscreteMeasure::dirac(z), &space).unwrap();
        let c = coherent_state(z, &space).unwrap();
        assert!((t.matrix() - &c * c.adjoint()).norm() < 1e-15);
        assert!((t.trace() - 1.0).abs() < 1e-12);
        let ev = t.eigenvalues();
        assert!(ev.iter().filter(|&&l| l > 1e-10).count() == 1);
    }

    #[test]
    fn husimi_peaks_at_centre_and_is_nonnegative() {
        let space = TorusHilbert::for_momentum(0.02, 0.6).unwrap();
        let z0 = (0.25, 0.1);
        let t = toeplitz(&DiscreteMeasure::dirac(z0), &space).unwrap();
        let grid = PhaseSpaceGrid::new(40, 40, 0.6).unwrap();
        let mu = husimi(&t, &space, &grid).unwrap();
        assert!(mu.masses().iter().all(|&m| m >= 0.0));
        let (k, _) = mu
            .masses()
            .iter()
            .enumerate()
            .fold((0, -1.0), |b, (i, &m)| if m > b.1 { (i, m) } else { b });
        let (q, p) = mu.points()[k];
        assert!((q - z0.0).abs() <= 1.0 / 40.0 && (p - z0.1).abs() <= 0.6 / 40.0 * 2.0);
    }

    #[test]
    fn husimi_mass_converges_with_window() {
        let space = TorusHilbert::new(0.02, 6).unwrap();
        let gamma = random_density(&mut seeded(4), space.dim(), 0.0);
        let mut last = f64::INFINITY;
        for &pm in &[0.5, 0.8, 1.1, 1.4] {
            let grid = PhaseSpaceGrid::new(16, 160, pm).unwrap();
            let err = (husimi(&gamma, &space, &grid).unwrap().total() - 1.0).abs();
            assert!(err < last || err < 1e-12);
            last = err;
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn resolution_improves_with_grid_and_window() {
        let space = TorusHilbert::new(0.02, 6).unwrap();
        let coarse = resolution_identity_check(&space, &PhaseSpaceGrid::new(8, 12, 1.2).unwrap());
        let fine = resolution_identity_check(&space, &PhaseSpaceGrid::new(16, 40, 1.2).unwrap());
        assert!(fine.absolute < coarse.absolute);
        let narrow = resolution_identity_check(&space, &PhaseSpaceGrid::new(16, 40, 0.7).unwrap());
        assert!(fine.absolute < narrow.absolute);
    }

    #[test]
    fn uniform_measure_gives_flat_husimi() {
        let space = TorusHilbert::for_momentum(0.02, 0.3).unwrap();
        let mut pts = Vec::new();
        for j in 0..24 {
            pts.push((j as f64 / 24.0, 0.0));
        }
        let n = pts.len();
        let mu = DiscreteMeasure::new(pts, alloc::vec![1.0 / n as f64; n]).unwrap();
        let op = toeplitz(&mu, &space).unwrap();
        let qs: Vec<(f64, f64)> = (0..50).map(|j| (j as f64 / 50.0, 0.0)).collect();
        let h = husimi_density(&op, &space, &qs).unwrap();
        let (lo, hi) = h
            .iter()
            .fold((f64::INFINITY, 0.0f64), |a, &x| (a.0.min(x), a.1.max(x)));
        assert!((hi - lo) / hi < 1e-6);
    }

    #[test]
    fn negative_mass_rejected() {
        assert!(DiscreteMeasure::new(alloc::vec![(0.0, 0.0)], alloc::vec![-0.1]).is_err());
    }

    #[test]
    fn duality_for_point_masses() {
        let space = TorusHilbert::for_momentum(0.005, 0.3).unwrap();
        let grid = PhaseSpaceGrid::new(40, 40, 0.6).unwrap();
        let mut rng = seeded(8);
        for _ in 0..3 {
            let z = (rng.gen::<f64>(), rng.gen_range(-0.3..0.3));
            assert!(duality_check(&DiscreteMeasure::dirac(z), &space, &grid).unwrap() < 1e-6);
        }
    }
}
