//! Fluctuation operator, Hamiltonian defect, entropy production operator,
//! mixed moments and the Gronwall bounds assembled from them.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{mean_field_potential, LindbladModel, Trajectory};
use crate::entropy::relative_entropy;
use crate::error::{argument, Error, Result};
use crate::linalg::{
    exp_hermitian, frechet_log, log_hermitian, operator_norm, real, real_trace, trace_of_product,
    CMatrix, Hermitian, EIGENVALUE_FLOOR, IMAG,
};
use crate::tensor::{embed_one_body, embed_two_body, symmetry_defect, tensor_power, ManyBodySpace};
use crate::Comparison;

/// Default combinatorial constant.
pub const C0: f64 = 8.0;

/// Allowed `‖Σ X_ij/(N−1) + i[δH, log γ^{⊗N}]‖_op` relative to `max(1, ‖A‖_op)`.
pub const PRODUCTION_CONSISTENCY_TOL: f64 = 1e-9;

/// Relative tolerance for vanishing mixed moments, scaled by `max(1, ‖X‖^m)`.
pub const CANCELLATION_TOL: f64 = 1e-10;

fn ensure_faithful(gamma: &Hermitian) -> Result<f64> {
    let min = gamma.min_eigenvalue();
    if min <= EIGENVALUE_FLOOR {
        return Err(Error::Domain {
            eigenvalue: min,
            floor: EIGENVALUE_FLOOR,
        });
    }
    Ok(min)
}

fn check_pair_dims(gamma: &Hermitian, w: &Hermitian) -> Result<usize> {
    let d = gamma.dim();
    if w.dim() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: w.dim(),
        });
    }
    Ok(d)
}

/// `X = −i[W − V^γ⊗1, (log γ)⊗1]` on `𝔥⊗𝔥`.
pub fn fluctuation_operator(gamma: &Hermitian, w: &Hermitian) -> Result<Hermitian> {
    let d = check_pair_dims(gamma, w)?;
    ensure_faithful(gamma)?;
    let log_g = log_hermitian(gamma)?;
    let v = mean_field_potential(gamma.matrix(), w.matrix())?;
    let id = CMatrix::identity(d, d);
    let centered = w.matrix() - v.matrix().kronecker(&id);
    let lg = log_g.matrix().kronecker(&id);
    let x = (&centered * &lg - &lg * &centered) * (-IMAG);
    Ok(Hermitian::hermitize(&x))
}

/// `δH_N = (N−1)⁻¹ Σ_{i<j} W_ij − Σ_j V^γ_j`.
pub fn hamiltonian_defect(
    w: &Hermitian,
    gamma: &Hermitian,
    space: &ManyBodySpace,
) -> Result<Hermitian> {
    check_pair_dims(gamma, w)?;
    let n = space.legs();
    let dim = space.total_dim();
    let v = mean_field_potential(gamma.matrix(), w.matrix())?;
    let mut out = CMatrix::zeros(dim, dim);
    if n > 1 {
        let scale = real(1.0 / (n - 1) as f64);
        for i in 1..=n {
            for j in i + 1..=n {
                out += embed_two_body(w.matrix(), i, j, space)? * scale;
            }
        }
    }
    for j in 1..=n {
        out -= embed_one_body(v.matrix(), j, space)?;
    }
    Ok(Hermitian::hermitize(&out))
}

/// `A = (N−1)⁻¹ Σ_{i≠j} X_ij`, cross-checked against `−i[δH_N, log γ^{⊗N}]`.
pub fn entropy_production_operator(
    gamma: &Hermitian,
    w: &Hermitian,
    space: &ManyBodySpace,
) -> Result<Hermitian> {
    let (a, defect) = entropy_production_pair(gamma, w, space)?;
    if defect > PRODUCTION_CONSISTENCY_TOL * a.operator_norm().max(1.0) {
        return Err(Error::Consistency {
            what: "fluctuation sum differs from defect commutator",
            defect,
        });
    }
    Ok(a)
}

/// The fluctuation-sum form of `A` and its operator-norm distance to the
/// commutator form.
pub fn entropy_production_pair(
    gamma: &Hermitian,
    w: &Hermitian,
    space: &ManyBodySpace,
) -> Result<(Hermitian, f64)> {
    let n = space.legs();
    if n < 2 {
        return Err(argument("entropy production needs at least two particles"));
    }
    let x = fluctuation_operator(gamma, w)?;
    let dim = space.total_dim();
    let mut sum = CMatrix::zeros(dim, dim);
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                sum += embed_two_body(x.matrix(), i, j, space)?;
            }
        }
    }
    let a = Hermitian::hermitize(&(sum * real(1.0 / (n - 1) as f64)));

    let dh = hamiltonian_defect(w, gamma, space)?;
    let log_g = log_hermitian(gamma)?;
    let mut log_power = CMatrix::zeros(dim, dim);
    for j in 1..=n {
        log_power += embed_one_body(log_g.matrix(), j, space)?;
    }
    let other = (dh.matrix() * &log_power - &log_power * dh.matrix()) * (-IMAG);
    let defect = operator_norm(&(a.matrix() - other));
    Ok((a, defect))
}

/// Ordered index pairs `(i_ν, j_ν)`, 1-based, with `i_ν ≠ j_ν`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexPattern {
    pairs: Vec<(usize, usize)>,
}

/// Which hypothesis of the cancellation rule a pattern meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    /// `i_ν` occurs nowhere else among the `i`s or `j`s.
    Row(usize),
    /// `j_ν` occurs nowhere else among the `j`s or `i`s.
    Column(usize),
}

impl IndexPattern {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(argument("pattern must have at least one pair"));
        }
        for &(i, j) in &pairs {
            if i == 0 || j == 0 {
                return Err(argument("pattern indices are 1-based"));
            }
            if i == j {
                return Err(argument(format!(
                    "pattern pair ({i}, {j}) repeats an index"
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    pub fn max_index(&self) -> usize {
        self.pairs.iter().map(|&(i, j)| i.max(j)).max().unwrap_or(0)
    }

    /// First position (1-based) at which the cancellation rule applies.
    pub fn witness(&self) -> Option<Witness> {
        let count = |x: usize| {
            self.pairs
                .iter()
                .map(|&(i, j)| (i == x) as usize + (j == x) as usize)
                .sum::<usize>()
        };
        for (nu, &(i, j)) in self.pairs.iter().enumerate() {
            if count(i) == 1 {
                return Some(Witness::Row(nu + 1));
            }
            if count(j) == 1 {
                return Some(Witness::Column(nu + 1));
            }
        }
        None
    }
}

/// `γ^{⊗N}` together with every embedded `X_ij`, for repeated moment
/// evaluation on one space.
pub struct MomentEngine {
    space: ManyBodySpace,
    reference: CMatrix,
    x: Hermitian,
    x_norm: f64,
    pairs: Vec<(usize, usize)>,
    embedded: Vec<CMatrix>,
}

impl MomentEngine {
    pub fn new(gamma: &Hermitian, w: &Hermitian, space: &ManyBodySpace) -> Result<Self> {
        if space.site_dim() != gamma.dim() {
            return Err(Error::DimensionMismatch {
                expected: gamma.dim(),
                found: space.site_dim(),
            });
        }
        let x = fluctuation_operator(gamma, w)?;
        let n = space.legs();
        let mut pairs = Vec::new();
        let mut embedded = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    pairs.push((i, j));
                    embedded.push(embed_two_body(x.matrix(), i, j, space)?);
                }
            }
        }
        Ok(Self {
            space: *space,
            reference: tensor_power(gamma.matrix(), space)?,
            x_norm: x.operator_norm(),
            x,
            pairs,
            embedded,
        })
    }

    pub fn x(&self) -> &Hermitian {
        &self.x
    }

    pub fn x_norm(&self) -> f64 {
        self.x_norm
    }

    fn slot(&self, pair: (usize, usize)) -> Result<usize> {
        self.pairs.iter().position(|&p| p == pair).ok_or_else(|| {
            argument(format!(
                "pair {pair:?} outside 1..={} or repeats an index",
                self.space.legs()
            ))
        })
    }

    /// `tr(γ^{⊗N} X_{i₁j₁} ⋯ X_{i_m j_m})` by dense products.
    pub fn moment(&self, pattern: &IndexPattern) -> Result<Complex64> {
        let mut prod = self.reference.clone();
        let (last, init) = pattern.pairs.split_last().expect("nonempty pattern");
        for &p in init {
            prod = &prod * &self.embedded[self.slot(p)?];
        }
        Ok(trace_of_product(&prod, &self.embedded[self.slot(*last)?]))
    }

    /// Visits every pattern of order `m` in lexicographic order, reusing
    /// prefix products.
    pub fn sweep(&self, m: usize, mut visit: impl FnMut(&IndexPattern, Complex64)) {
        if m == 0 {
            return;
        }
        let mut stack: Vec<usize> = Vec::with_capacity(m);
        let mut prefixes: Vec<CMatrix> = Vec::with_capacity(m);
        prefixes.push(self.reference.clone());
        self.descend(m, &mut stack, &mut prefixes, &mut visit);
    }

    fn descend(
        &self,
        m: usize,
        stack: &mut Vec<usize>,
        prefixes: &mut Vec<CMatrix>,
        visit: &mut impl FnMut(&IndexPattern, Complex64),
    ) {
        let depth = stack.len();
        for s in 0..self.pairs.len() {
            stack.push(s);
            if depth + 1 == m {
                let value = trace_of_product(&prefixes[depth], &self.embedded[s]);
                let pattern = IndexPattern {
                    pairs: stack.iter().map(|&k| self.pairs[k]).collect(),
                };
                visit(&pattern, value);
            } else {
                let next = &prefixes[depth] * &self.embedded[s];
                prefixes.push(next);
                self.descend(m, stack, prefixes, visit);
                prefixes.pop();
            }
            stack.pop();
        }
    }
}

pub fn mixed_moment(
    gamma: &Hermitian,
    w: &Hermitian,
    pattern: &IndexPattern,
    space: &ManyBodySpace,
) -> Result<Complex64> {
    if pattern.max_index() > space.legs() {
        return Err(argument("pattern index exceeds the particle number"));
    }
    MomentEngine::new(gamma, w, space)?.moment(pattern)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancellationOutcome {
    pub witness: Witness,
    pub moment: Complex64,
    /// `max(1, ‖X‖_op^m)`.
    pub scale: f64,
}

impl CancellationOutcome {
    pub fn relative(&self) -> f64 {
        self.moment.norm() / self.scale
    }

    pub fn holds(&self) -> bool {
        self.relative() <= CANCELLATION_TOL
    }
}

/// Evaluates a mixed moment the cancellation rule predicts to vanish.
/// Patterns outside the rule are rejected.
pub fn cancellation_check(
    gamma: &Hermitian,
    w: &Hermitian,
    pattern: &IndexPattern,
    space: &ManyBodySpace,
) -> Result<CancellationOutcome> {
    let witness = pattern
        .witness()
        .ok_or_else(|| argument("no index occurs exactly once; the rule makes no prediction"))?;
    let engine = MomentEngine::new(gamma, w, space)?;
    if pattern.max_index() > space.legs() {
        return Err(argument("pattern index exceeds the particle number"));
    }
    let moment = engine.moment(pattern)?;
    Ok(CancellationOutcome {
        witness,
        moment,
        scale: engine.x_norm().powi(pattern.order() as i32).max(1.0),
    })
}

/// `i[B, log X] − D(log)_X[i[B, X]]` in operator norm.
pub fn commutator_log_defect(x: &Hermitian, b: &Hermitian) -> Result<f64> {
    let log_x = log_hermitian(x)?;
    let lhs = (b.matrix() * log_x.matrix() - log_x.matrix() * b.matrix()) * IMAG;
    let dir = (b.matrix() * x.matrix() - x.matrix() * b.matrix()) * IMAG;
    let rhs = frechet_log(x, &dir)?;
    Ok(operator_norm(&(lhs - rhs)))
}

/// `tr(Γ̇ (log Γ − log σ)) − tr(Γ D(log)_σ[σ̇])`, the time derivative of
/// `S(Γ_t, σ_t)` along differentiable faithful families.
pub fn relative_entropy_derivative(
    gamma: &Hermitian,
    gamma_dot: &CMatrix,
    sigma: &Hermitian,
    sigma_dot: &CMatrix,
) -> Result<f64> {
    let lg = log_hermitian(gamma)?;
    let ls = log_hermitian(sigma)?;
    let first = trace_of_product(gamma_dot, &(lg.matrix() - ls.matrix())).re;
    let second = trace_of_product(gamma.matrix(), &frechet_log(sigma, sigma_dot)?).re;
    Ok(first - second)
}

/// `tr(−i[H, Γ] log Γ)` for a faithful `Γ`.
pub fn unitary_entropy_production(h: &Hermitian, gamma: &Hermitian) -> Result<f64> {
    let lg = log_hermitian(gamma)?;
    let comm = (h.matrix() * gamma.matrix() - gamma.matrix() * h.matrix()) * (-IMAG);
    Ok(trace_of_product(&comm, lg.matrix()).re)
}

fn check_synchronized(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.times.len() != b.times.len()
        || a.times
            .iter()
            .zip(&b.times)
            .any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0))
    {
        return Err(argument("trajectories are not on a common time grid"));
    }
    Ok(())
}

/// Relative entropy `S(Γ_t, γ_t^{⊗N})` and production `tr(Γ_t A_t)` on a
/// pair of synchronized trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub times: Vec<f64>,
    pub entropy: Vec<f64>,
    pub production: Vec<f64>,
}

pub fn entropy_series(
    many: &Trajectory,
    one: &Trajectory,
    w: &Hermitian,
    space: &ManyBodySpace,
) -> Result<EntropySeries> {
    check_synchronized(many, one)?;
    let mut entropy = Vec::with_capacity(many.len());
    let mut production = Vec::with_capacity(many.len());
    for (big, small) in many.states.iter().zip(&one.states) {
        let gamma = Hermitian::hermitize(small);
        let reference = tensor_power(gamma.matrix(), space)?;
        entropy.push(relative_entropy(big, &reference)?.finite()?);
        let a = entropy_production_operator(&gamma, w, space)?;
        production.push(trace_of_product(big, a.matrix()).re);
    }
    Ok(EntropySeries {
        times: many.times.clone(),
        entropy,
        production,
    })
}

/// One interior grid point of the entropy production check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductionPoint {
    pub time: f64,
    /// Central difference of `S`.
    pub derivative: f64,
    pub production: f64,
}

impl ProductionPoint {
    pub fn abs_error(&self) -> f64 {
        (self.derivative - self.production).abs()
    }

    pub fn relative_error(&self) -> f64 {
        self.abs_error() / self.production.abs()
    }

    /// `tr(ΓA) − dS/dt`, nonnegative when the inequality holds exactly.
    pub fn margin(&self) -> f64 {
        self.production - self.derivative
    }
}

/// Central differences of the entropy at interior grid points.
pub fn production_points(series: &EntropySeries) -> Vec<ProductionPoint> {
    let t = &series.times;
    (1..t.len().saturating_sub(1))
        .map(|k| ProductionPoint {
            time: t[k],
            derivative: (series.entropy[k + 1] - series.entropy[k - 1]) / (t[k + 1] - t[k - 1]),
            production: series.production[k],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductionReport {
    pub closed: bool,
    pub points: Vec<ProductionPoint>,
    /// Worst relative error (closed) or worst `dS/dt − tr(ΓA)` (open).
    pub worst: f64,
    pub passed: bool,
}

/// Relative error of the closed identity must stay below this.
pub const CLOSED_IDENTITY_TOL: f64 = 1e-3;

/// Slack of the open-system inequality.
pub const OPEN_INEQUALITY_SLACK: f64 = 1e-6;

/// Compares the central difference of `t ↦ S(Γ_t, γ_t^{⊗N})` with
/// `tr(Γ_t A_t)`: equality when closed, `dS/dt ≤ tr(ΓA)` otherwise.
pub fn entropy_production_identity_check(
    many: &Trajectory,
    one: &Trajectory,
    model: &LindbladModel,
    space: &ManyBodySpace,
    closed: bool,
) -> Result<ProductionReport> {
    let series = entropy_series(many, one, model.w(), space)?;
    let points = production_points(&series);
    let (worst, passed) = if closed {
        let worst = points
            .iter()
            .fold(0.0, |a: f64, p| a.max(p.relative_error()));
        (worst, worst < CLOSED_IDENTITY_TOL)
    } else {
        let worst = points.iter().fold(f64::NEG_INFINITY, |a: f64, p| {
            a.max(p.derivative - p.production)
        });
        (worst, worst <= OPEN_INEQUALITY_SLACK)
    };
    Ok(ProductionReport {
        closed,
        points,
        worst,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XNormPoint {
    pub time: f64,
    pub x_norm: f64,
    /// `4‖W‖/m₀` with the initial floor.
    pub bound: f64,
    pub min_eigenvalue: f64,
    /// `4‖W‖/λ_min(γ_t)`.
    pub tight_bound: f64,
}

/// `‖X(γ_t)‖_op ≤ 4‖W‖_op/m₀` along a one-body trajectory.
pub fn x_norm_bound_check(one: &Trajectory, w: &Hermitian) -> Result<Vec<XNormPoint>> {
    let first = one
        .states
        .first()
        .ok_or_else(|| argument("empty trajectory"))?;
    let m0 = ensure_faithful(&Hermitian::hermitize(first))?;
    let w_norm = w.operator_norm();
    let mut out = Vec::with_capacity(one.len());
    for (&time, state) in one.times.iter().zip(&one.states) {
        let gamma = Hermitian::hermitize(state);
        let min = gamma.min_eigenvalue();
        if min <= 0.0 {
            return Err(Error::Positivity {
                time,
                min_eigenvalue: min,
            });
        }
        let x = fluctuation_operator(&gamma, w)?;
        out.push(XNormPoint {
            time,
            x_norm: x.operator_norm(),
            bound: 4.0 * w_norm / m0,
            min_eigenvalue: min,
            tight_bound: 4.0 * w_norm / min,
        });
    }
    Ok(out)
}

/// Scalar inputs of the Gronwall constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallConstants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub horizon: f64,
    pub v_sup: f64,
    pub grad_v_sup: f64,
    pub m0: f64,
    pub w_norm: f64,
    /// Overrides `4‖W‖/m₀` as `C_W` when set.
    pub c_w: Option<f64>,
}

impl Default for GronwallConstants {
    fn default() -> Self {
        Self {
            c0: C0,
            c1: 1.0,
            c2: 1.0,
            horizon: 1.0,
            v_sup: 1.0,
            grad_v_sup: 1.0,
            m0: 1.0,
            w_norm: 1.0,
            c_w: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GronwallKind {
    Continuous,
    Lindblad,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallValue {
    /// Factor multiplying `S₀ + log 2`.
    pub factor: f64,
    /// `C(t)` (continuous-space form only).
    pub c_of_t: Option<f64>,
    /// `(4C₀C(t))⁻¹` (continuous-space form only).
    pub lambda: Option<f64>,
}

impl GronwallConstants {
    fn validate(&self, kind: GronwallKind) -> Result<()> {
        let mut all = alloc::vec![self.c0];
        match kind {
            GronwallKind::Continuous => {
                all.extend([self.c1, self.c2, self.horizon, self.v_sup, self.grad_v_sup])
            }
            GronwallKind::Lindblad => {
                all.extend([self.m0, self.w_norm]);
                if let Some(c) = self.c_w {
                    all.push(c);
                }
            }
        }
        if all.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(argument("Gronwall constants must be positive and finite"));
        }
        Ok(())
    }

    /// `C(t) = 2C₁‖∇V‖ + 4(C₁‖∇V‖ + C₂)‖V‖t`.
    pub fn c_of_t(&self, t: f64) -> f64 {
        2.0 * self.c1 * self.grad_v_sup
            + 4.0 * (self.c1 * self.grad_v_sup + self.c2) * self.v_sup * t
    }

    /// `exp(8C₀C₁‖∇V‖T + 16C₀(C₁‖∇V‖ + C₂)‖V‖T²)`.
    pub fn continuous_constant(&self) -> Result<f64> {
        self.validate(GronwallKind::Continuous)?;
        let t = self.horizon;
        Ok((8.0 * self.c0 * self.c1 * self.grad_v_sup * t
            + 16.0 * self.c0 * (self.c1 * self.grad_v_sup + self.c2) * self.v_sup * t * t)
            .exp())
    }

    /// `C_W`, defaulting to `4‖W‖/m₀`.
    pub fn c_w(&self) -> f64 {
        self.c_w.unwrap_or(4.0 * self.w_norm / self.m0)
    }
}

/// `e^{4C₀C(T)t}` for the continuous-space form, `e^{32 C_W t}` for the
/// Lindblad form.
pub fn gronwall_constant(
    kind: GronwallKind,
    c: &GronwallConstants,
    t: f64,
) -> Result<GronwallValue> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(argument("time must be nonnegative"));
    }
    c.validate(kind)?;
    Ok(match kind {
        GronwallKind::Continuous => {
            let ct = c.c_of_t(t);
            GronwallValue {
                factor: (4.0 * c.c0 * c.c_of_t(c.horizon) * t).exp(),
                c_of_t: Some(ct),
                lambda: Some(1.0 / (4.0 * c.c0 * ct)),
            }
        }
        GronwallKind::Lindblad => GronwallValue {
            factor: (4.0 * c.c0 * c.c_w() * t).exp(),
            c_of_t: None,
            lambda: None,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthPoint {
    pub time: f64,
    pub entropy: f64,
    /// `e^{32 sup‖X‖ t}(S₀ + log 2)`.
    pub bound_sup: f64,
    /// `e^{128‖W‖t/m₀}(S₀ + log 2)`.
    pub bound_explicit: f64,
}

impl GrowthPoint {
    pub fn margin_sup(&self) -> f64 {
        self.bound_sup - self.entropy
    }

    pub fn margin_explicit(&self) -> f64 {
        self.bound_explicit - self.entropy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub m0: f64,
    pub w_norm: f64,
    /// Trajectory supremum of `‖X(γ_t)‖_op`.
    pub x_sup: f64,
    pub points: Vec<GrowthPoint>,
}

impl GrowthReport {
    pub fn holds(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.margin_sup() >= 0.0 && p.margin_explicit() >= 0.0)
    }
}

/// Evaluates `S(Γ_t, γ_t^{⊗N})` against both exponential bounds on the
/// trajectories `many` (N-body) and `one` (Hartree), where `m0` is a lower
/// bound for the spectrum of `γ₀`.
pub fn entropy_growth_check(
    model: &LindbladModel,
    space: &ManyBodySpace,
    many: &Trajectory,
    one: &Trajectory,
    m0: f64,
) -> Result<GrowthReport> {
    if !model.normal_l() {
        return Err(argument("jump operator must be normal"));
    }
    check_synchronized(many, one)?;
    let first = many
        .states
        .first()
        .ok_or_else(|| argument("empty trajectory"))?;
    let defect = symmetry_defect(first, space)?;
    if defect > crate::entropy::SYMMETRY_TOL {
        return Err(Error::NotSymmetric { defect });
    }
    let min0 = ensure_faithful(&Hermitian::hermitize(&one.states[0]))?;
    if !(m0 > 0.0) || m0 > min0 {
        return Err(argument(format!(
            "floor {m0} is not a positive lower bound for the spectrum of the initial state (minimum {min0})"
        )));
    }
    let w_norm = model.w().operator_norm();
    let xs = x_norm_bound_check(one, model.w())?;
    let x_sup = xs.iter().fold(0.0, |a: f64, p| a.max(p.x_norm));
    let mut entropies = Vec::with_capacity(many.len());
    for (big, small) in many.states.iter().zip(&one.states) {
        let reference = tensor_power(small, space)?;
        entropies.push(relative_entropy(big, &reference)?.finite()?);
    }
    let base = entropies[0] + core::f64::consts::LN_2;
    let points = many
        .times
        .iter()
        .zip(&entropies)
        .map(|(&t, &s)| GrowthPoint {
            time: t,
            entropy: s,
            bound_sup: (4.0 * C0 * x_sup * t).exp() * base,
            bound_explicit: (128.0 * w_norm * t / m0).exp() * base,
        })
        .collect();
    Ok(GrowthReport {
        m0,
        w_norm,
        x_sup,
        points,
    })
}

/// `tr(γ^{⊗N} e^{λA}) ≤ (1 − 2C₀‖X‖λ)⁻¹`, the exponential moment evaluated
/// exactly on `d^N`.
pub fn moment_partition_bound_check(
    gamma: &Hermitian,
    w: &Hermitian,
    space: &ManyBodySpace,
    lambda: f64,
) -> Result<Comparison> {
    let x_norm = fluctuation_operator(gamma, w)?.operator_norm();
    if !(lambda > 0.0) || 2.0 * C0 * x_norm * lambda >= 1.0 {
        return Err(argument(format!(
            "lambda {lambda} outside (0, 1/(2 C0 ‖X‖)) for ‖X‖ = {x_norm}"
        )));
    }
    let a = entropy_production_operator(gamma, w, space)?;
    let reference = tensor_power(gamma.matrix(), space)?;
    let e = exp_hermitian(&a.scaled(lambda))?;
    let lhs = real_trace(&(reference * e.matrix()));
    Ok(Comparison::new(
        lhs,
        1.0 / (1.0 - 2.0 * C0 * x_norm * lambda),
    ))
}

/// `(4C₀‖X‖)⁻¹` for the given pair, the choice that makes the bound equal 2.
pub fn critical_lambda(gamma: &Hermitian, w: &Hermitian) -> Result<f64> {
    let x_norm = fluctuation_operator(gamma, w)?.operator_norm();
    if x_norm == 0.0 {
        return Err(argument("fluctuation vanishes; every lambda is admissible"));
    }
    Ok(1.0 / (4.0 * C0 * x_norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{bose_hubbard_model, integrate, random_model, Flow, IntegratorConfig};
    use crate::random::{random_density, random_hermitian, seeded};
    use crate::tensor::partial_trace;

    fn mixed(d: usize) -> Hermitian {
        Hermitian::from_diagonal(&alloc::vec![1.0 / d as f64; d])
    }

    #[test]
    fn maximally_mixed_state_has_no_fluctuation() {
        let m = random_model(3, 1, 1.0, true).unwrap();
        let x = fluctuation_operator(&mixed(3), m.w()).unwrap();
        assert!(x.operator_norm() < 1e-14);
        let space = ManyBodySpace::new(3, 3).unwrap();
        let a = entropy_production_operator(&mixed(3), m.w(), &space).unwrap();
        assert!(a.operator_norm() < 1e-13);
    }

    #[test]
    fn fluctuation_is_centered_and_bounded() {
        for seed in 0..20 {
            let m = random_model(3, seed, 1.0, true).unwrap();
            let g = random_density(&mut seeded(seed + 7), 3, 0.05);
            let x = fluctuation_operator(&g, m.w()).unwrap();
            assert!(x.operator_norm() <= 4.0 * m.w().operator_norm() / g.min_eigenvalue());
            let space = ManyBodySpace::new(3, 2).unwrap();
            let weighted = g.matrix().kronecker(&CMatrix::identity(3, 3)) * x.matrix();
            let first = partial_trace(&weighted, &[2], &space).unwrap();
            assert!(first.norm() < 1e-12);
            let weighted = CMatrix::identity(3, 3).kronecker(g.matrix()) * x.matrix();
            let second = partial_trace(&weighted, &[1], &space).unwrap();
            assert!(second.norm() < 1e-12);
        }
    }

    #[test]
    fn fluctuation_rejects_singular_state() {
        let m = random_model(2, 1, 1.0, true).unwrap();
        let pure = Hermitian::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            fluctuation_operator(&pure, m.w()),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn defect_for_two_site_bose_hubbard() {
        let bh = bose_hubbard_model(2, 0.0).unwrap();
        let p = 0.3;
        let g = Hermitian::from_diagonal(&[p, 1.0 - p]);
        let space = ManyBodySpace::new(2, 2).unwrap();
        let dh = hamiltonian_defect(bh.w(), &g, &space).unwrap();
        // W₁₂ − V₁ − V₂ with V = diag(p, 1−p)
        let want = [1.0 - 2.0 * p, -1.0, -1.0, 1.0 - 2.0 * (1.0 - p)];
        for (k, &v) in want.iter().enumerate() {
            assert!((dh.matrix()[(k, k)].re - v).abs() < 1e-15);
        }
        let off: f64 = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| dh.matrix()[(r, c)].norm())
            .sum();
        assert_eq!(off, 0.0);

        let space = ManyBodySpace::new(2, 4).unwrap();
        let m = random_model(2, 3, 1.0, true).unwrap();
        let g = random_density(&mut seeded(3), 2, 0.1);
        let dh = hamiltonian_defect(m.w(), &g, &space).unwrap();
        assert!(symmetry_defect(dh.matrix(), &space).unwrap() < 1e-12);
    }

    #[test]
    fn two_constructions_of_production_agree() {
        for (d, n) in [(2usize, 2usize), (2, 3), (2, 4), (3, 2), (3, 3)] {
            for seed in 0..5 {
                let m = random_model(d, seed, 1.0, true).unwrap();
                let g = random_density(&mut seeded(seed + 11), d, 0.05);
                let space = ManyBodySpace::new(d, n).unwrap();
                let (a, defect) = entropy_production_pair(&g, m.w(), &space).unwrap();
                assert!(
                    defect <= 1e-10 * a.operator_norm(),
                    "d={d} n={n} seed={seed}"
                );
            }
        }
        let m = random_model(2, 0, 1.0, true).unwrap();
        let g = random_density(&mut seeded(0), 2, 0.05);
        let space = ManyBodySpace::new(2, 2).unwrap();
        let a = entropy_production_operator(&g, m.w(), &space).unwrap();
        let x = fluctuation_operator(&g, m.w()).unwrap();
        let want = embed_two_body(x.matrix(), 1, 2, &space).unwrap()
            + embed_two_body(x.matrix(), 2, 1, &space).unwrap();
        assert!((a.matrix() - want).norm() < 1e-14);
    }

    #[test]
    fn witness_detection() {
        let p = IndexPattern::new(alloc::vec![(1, 2), (3, 2)]).unwrap();
        assert_eq!(p.witness(), Some(Witness::Row(1)));
        let p = IndexPattern::new(alloc::vec![(1, 2), (2, 1)]).unwrap();
        assert_eq!(p.witness(), None);
        let p = IndexPattern::new(alloc::vec![(1, 2), (1, 3)]).unwrap();
        assert_eq!(p.witness(), Some(Witness::Column(1)));
        assert!(IndexPattern::new(alloc::vec![(2, 2)]).is_err());
    }

    #[test]
    fn moments_vanish_where_predicted() {
        let m = random_model(2, 4, 1.0, true).unwrap();
        let g = random_density(&mut seeded(5), 2, 0.05);
        let space = ManyBodySpace::new(2, 3).unwrap();
        for pairs in [
            alloc::vec![(1, 2)],
            alloc::vec![(2, 1)],
            alloc::vec![(1, 2), (3, 2)],
        ] {
            let p = IndexPattern::new(pairs).unwrap();
            assert!(cancellation_check(&g, m.w(), &p, &space).unwrap().holds());
        }
        let silent = IndexPattern::new(alloc::vec![(1, 2), (2, 1)]).unwrap();
        assert!(matches!(
            cancellation_check(&g, m.w(), &silent, &space),
            Err(Error::Argument(_))
        ));
        let repeated = IndexPattern::new(alloc::vec![(1, 2), (1, 2)]).unwrap();
        let v = mixed_moment(&g, m.w(), &repeated, &space).unwrap();
        let x_norm = fluctuation_operator(&g, m.w()).unwrap().operator_norm();
        assert!(v.norm() > 1e-6);
        assert!(v.norm() <= x_norm * x_norm + 1e-12);
    }

    #[test]
    fn sweep_matches_direct_products() {
        let m = random_model(2, 6, 1.0, true).unwrap();
        let g = random_density(&mut seeded(6), 2, 0.05);
        let space = ManyBodySpace::new(2, 3).unwrap();
        let engine = MomentEngine::new(&g, m.w(), &space).unwrap();
        let mut count = 0;
        engine.sweep(3, |p, v| {
            count += 1;
            let direct = engine.moment(p).unwrap();
            assert!((v - direct).norm() < 1e-14);
            if p.witness().is_some() {
                assert!(v.norm() < 1e-12);
            }
        });
        assert_eq!(count, 216);
    }

    #[test]
    fn commutator_log_identity() {
        for seed in 0..10 {
            let mut rng = seeded(seed);
            let x = random_density(&mut rng, 4, 0.02);
            let b = random_hermitian(&mut rng, 4);
            assert!(commutator_log_defect(&x, &b).unwrap() < 1e-9);
        }
    }

    #[test]
    fn unitary_flow_produces_no_entropy() {
        let mut rng = seeded(3);
        let g = random_density(&mut rng, 5, 0.02);
        let h = random_hermitian(&mut rng, 5);
        assert!(unitary_entropy_production(&h, &g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gronwall_values() {
        let c = GronwallConstants {
            m0: 0.2,
            w_norm: 1.0,
            ..Default::default()
        };
        assert_eq!(
            gronwall_constant(GronwallKind::Lindblad, &c, 0.0)
                .unwrap()
                .factor,
            1.0
        );
        let v = gronwall_constant(GronwallKind::Lindblad, &c, 0.3).unwrap();
        assert!((v.factor.ln() - 128.0 * 0.3 / 0.2).abs() < 1e-12);
        let mut last = 0.0;
        for k in 0..20 {
            let v = gronwall_constant(GronwallKind::Continuous, &c, k as f64 * 0.05).unwrap();
            assert!(v.factor >= last);
            last = v.factor;
        }
        let c1 = GronwallConstants {
            c1: 0.5,
            c2: 0.25,
            horizon: 2.0,
            v_sup: 0.3,
            grad_v_sup: 0.7,
            ..Default::default()
        };
        let at_horizon = gronwall_constant(GronwallKind::Continuous, &c1, 2.0).unwrap();
        assert!((at_horizon.factor / c1.continuous_constant().unwrap() - 1.0).abs() < 1e-12);
        let ct = at_horizon.c_of_t.unwrap();
        assert!((at_horizon.lambda.unwrap() * 32.0 * ct - 1.0).abs() < 1e-14);
        assert!(gronwall_constant(
            GronwallKind::Lindblad,
            &GronwallConstants { m0: 0.0, ..c },
            1.0
        )
        .is_err());
    }

    #[test]
    fn partition_bound_small_case() {
        let m = random_model(2, 2, 1.0, true).unwrap();
        let g = random_density(&mut seeded(2), 2, 0.1);
        let space = ManyBodySpace::new(2, 3).unwrap();
        let lambda = critical_lambda(&g, m.w()).unwrap();
        let c = moment_partition_bound_check(&g, m.w(), &space, lambda).unwrap();
        assert!((c.rhs - 2.0).abs() < 1e-14);
        assert!(c.lhs >= 1.0 - 1e-12 && c.holds(1e-8));
        assert!(moment_partition_bound_check(&g, m.w(), &space, 4.0 * lambda).is_err());
    }

    #[test]
    fn entropy_growth_on_short_run() {
        let m = random_model(2, 12, 1.0, true).unwrap();
        let g0 = random_density(&mut seeded(12), 2, 0.2);
        let space = ManyBodySpace::new(2, 3).unwrap();
        let big0 = tensor_power(g0.matrix(), &space).unwrap();
        let cfg = IntegratorConfig::new(1e-3).with_stride(10);
        let many = integrate(Flow::NBody(space), &big0, &m, 0.2, &cfg).unwrap();
        let one = integrate(Flow::Hartree, g0.matrix(), &m, 0.2, &cfg).unwrap();
        let report = entropy_growth_check(&m, &space, &many, &one, 0.2).unwrap();
        assert!(report.holds());
        assert!(entropy_growth_check(&m, &space, &many, &one, 0.9).is_err());
        assert!(report.x_sup <= 4.0 / report.m0);
    }
}
