//! Parameterized verification routines producing [`CheckRow`]s. The suite
//! and the scenario runner share them.

use num_bigint::BigUint;
use qrelent_core::combinatorics::{bound_check, count_i, enumerate_i, BoundCase, BoundReport};
use qrelent_core::dynamics::{
    exact_unitary_flow, integrate, n_body_hamiltonian, random_model, Flow, IntegratorConfig,
    LindbladModel, Trajectory,
};
use qrelent_core::entropy::{block_subadditivity_check, entropy_inequality_check, pinsker_check};
use qrelent_core::fluctuation::{
    commutator_log_defect, critical_lambda, entropy_growth_check,
    entropy_production_identity_check, moment_partition_bound_check, x_norm_bound_check,
    MomentEngine, ProductionReport,
};
use qrelent_core::linalg::{
    frechet_log, frechet_log_quadrature, golden_thompson_check, log_hermitian, operator_norm, real,
};
use qrelent_core::random::{random_density, random_hermitian, seeded, ScenarioRng};
use qrelent_core::semiclassical::{
    coherent_state, dist1, dist_mk2, duality_check, husimi, monotonicity_check,
    resolution_identity_check, solve_hbar_crossing, standard_window, toeplitz, total_variation,
    uniform_envelope, BoundParams, DiscreteMeasure, PhaseSpaceGrid, TorusHilbert,
};
use qrelent_core::tensor::{symmetrize, tensor_power};
use qrelent_core::{CMatrix, Comparison, Hermitian, ManyBodySpace};
use rand::Rng;

use crate::report::CheckRow;
use crate::scenario::{Initial, ToleranceSpec};

type Result<T> = qrelent_core::Result<T>;

/// Every threshold a check row is judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub cancellation: f64,
    pub closed_identity: f64,
    /// Minimal error reduction when the step is halved.
    pub halving_ratio: f64,
    pub open_slack: f64,
    pub inequality: f64,
    pub frechet_quadrature: f64,
    pub frechet_difference: f64,
    pub commutator_log: f64,
    pub block_equality: f64,
    pub x_norm: f64,
    pub floor: f64,
    pub crossing: f64,
    pub envelope_ratio: f64,
    pub norm: f64,
    pub husimi_mass: f64,
    pub toeplitz_trace: f64,
    pub psd: f64,
    pub resolution: f64,
    pub resolution_floor: f64,
    pub duality: f64,
    pub transport: f64,
    pub order_window: (f64, f64),
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cancellation: 1e-10,
            closed_identity: 1e-3,
            halving_ratio: 3.5,
            open_slack: 1e-6,
            inequality: 1e-10,
            frechet_quadrature: 1e-8,
            frechet_difference: 1e-5,
            commutator_log: 1e-9,
            block_equality: 1e-10,
            x_norm: 1e-8,
            floor: 1e-8,
            crossing: 1e-10,
            envelope_ratio: 10.0,
            norm: 1e-12,
            husimi_mass: 1e-4,
            toeplitz_trace: 1e-6,
            psd: 1e-10,
            resolution: 1e-4,
            resolution_floor: 1e-12,
            duality: 1e-6,
            transport: 1e-12,
            order_window: (12.0, 20.0),
        }
    }
}

impl Tolerances {
    /// Replaces every absolute or relative error tolerance and every slack
    /// by `v`. Ratio windows and the rounding floor are structural and stay.
    pub fn overridden(v: f64) -> Self {
        Self {
            cancellation: v,
            closed_identity: v,
            open_slack: v,
            inequality: v,
            frechet_quadrature: v,
            frechet_difference: v,
            commutator_log: v,
            block_equality: v,
            x_norm: v,
            floor: v,
            crossing: v,
            norm: v,
            husimi_mass: v,
            toeplitz_trace: v,
            psd: v,
            resolution: v,
            duality: v,
            transport: v,
            ..Self::default()
        }
    }

    pub fn with_spec(mut self, spec: &ToleranceSpec) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$( if let Some(v) = spec.$f { self.$f = v; } )*};
        }
        take!(
            cancellation,
            closed_identity,
            open_slack,
            inequality,
            frechet_quadrature,
            frechet_difference,
            commutator_log,
            block_equality,
            x_norm,
            floor,
            crossing,
            norm,
            husimi_mass,
            toeplitz_trace,
            psd,
            resolution,
            duality,
            transport
        );
        self
    }
}

fn comparison_row(check: &str, index: String, c: Comparison, slack: f64) -> CheckRow {
    CheckRow::upper(check, index, c.lhs, c.rhs, slack)
}

/// Tolerance scaled to the size of the compared quantities.
fn scaled(tol: f64, c: Comparison) -> f64 {
    tol * c.lhs.abs().max(c.rhs.abs()).max(1.0)
}

/// Random faithful one-body state and the matching N-body initial state.
pub fn initial_states(
    site_dim: usize,
    space: &ManyBodySpace,
    floor: f64,
    initial: Initial,
    seed: u64,
) -> Result<(Hermitian, CMatrix)> {
    let mut rng = seeded(seed);
    let gamma = random_density(&mut rng, site_dim, floor);
    let big = match initial {
        Initial::Product => tensor_power(gamma.matrix(), space)?,
        Initial::SymmetrizedRandom => {
            let dim = space.total_dim();
            let raw = random_density(&mut rng, dim, 0.16 / dim as f64);
            symmetrize(raw.matrix(), space)?.into_matrix()
        }
    };
    Ok((gamma, big))
}

pub struct Pair {
    pub many: Trajectory,
    pub one: Trajectory,
}

pub fn run_pair(
    model: &LindbladModel,
    space: &ManyBodySpace,
    gamma: &Hermitian,
    big: &CMatrix,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<Pair> {
    Ok(Pair {
        many: integrate(Flow::NBody(*space), big, model, horizon, config)?,
        one: integrate(Flow::Hartree, gamma.matrix(), model, horizon, config)?,
    })
}

fn t_index(t: f64) -> String {
    format!("t={t:.6}")
}

// ---------------------------------------------------------------- moments

#[derive(Debug, Clone, PartialEq)]
pub struct CancellationParams {
    pub site_dims: Vec<usize>,
    pub max_particles: usize,
    pub max_order: usize,
    pub samples: usize,
    pub floor: f64,
}

impl Default for CancellationParams {
    fn default() -> Self {
        Self {
            site_dims: vec![2, 3],
            max_particles: 4,
            max_order: 3,
            samples: 20,
            floor: 0.05,
        }
    }
}

/// Worst `|tr(γ^{⊗N} X_{i₁j₁}⋯X_{i_m j_m})| / max(1, ‖X‖^m)` over the
/// patterns with a cancellation witness, one row per `(d, N, m, sample)`.
pub fn cancellation(p: &CancellationParams, seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for &d in &p.site_dims {
        let floor = p.floor.min(0.5 / d as f64);
        for s in 0..p.samples {
            let sample_seed = seed.wrapping_add(1000 * d as u64 + s as u64);
            let mut rng = seeded(sample_seed);
            let gamma = random_density(&mut rng, d, floor);
            let w = random_model(d, sample_seed, 1.0, true)?.w().clone();
            for n in 2..=p.max_particles {
                let space = ManyBodySpace::new(d, n)?;
                let engine = MomentEngine::new(&gamma, &w, &space)?;
                for m in 1..=p.max_order {
                    let scale = engine.x_norm().powi(m as i32).max(1.0);
                    let mut worst = 0.0f64;
                    let mut tested = 0usize;
                    engine.sweep(m, |pattern, moment| {
                        if pattern.witness().is_some() {
                            tested += 1;
                            worst = worst.max(moment.norm() / scale);
                        }
                    });
                    rows.push(CheckRow::upper(
                        "cancellation",
                        format!("d={d};N={n};m={m};sample={s};patterns={tested}"),
                        worst,
                        tol.cancellation,
                        0.0,
                    ));
                }
            }
        }
    }
    Ok(rows)
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_string().parse().unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationRow {
    pub report: BoundReport,
    pub enumerated: BigUint,
}

impl EnumerationRow {
    pub fn closed_form(&self) -> Option<BigUint> {
        let n = self.report.n;
        match self.report.m {
            1 => Some(BigUint::from(0u8)),
            2 => Some(BigUint::from(2 * n * n.saturating_sub(1))),
            _ => None,
        }
    }

    pub fn holds(&self) -> bool {
        self.report.holds()
            && self.enumerated == self.report.exact
            && self.closed_form().is_none_or(|c| c == self.report.exact)
    }
}

/// Exact counts and bound chain for every `(m, N)` in the rectangle and
/// the extra pairs.
pub fn enumeration_table(
    m_max: usize,
    n_max: usize,
    extra: &[(usize, usize)],
    cap: u128,
) -> Result<Vec<EnumerationRow>> {
    let mut cases: Vec<(usize, usize)> = Vec::new();
    for m in 1..=m_max {
        for n in 1..=n_max {
            cases.push((m, n));
        }
    }
    for &c in extra {
        if !cases.contains(&c) {
            cases.push(c);
        }
    }
    cases
        .into_iter()
        .map(|(m, n)| {
            let report = bound_check(m, n, cap)?;
            let enumerated = enumerate_i(m, n, cap, |_| {})?;
            Ok(EnumerationRow { report, enumerated })
        })
        .collect()
}

pub fn combinatorics(cap: u128) -> Result<Vec<CheckRow>> {
    let table = enumeration_table(3, 6, &[(4, 4)], cap)?;
    let mut rows = Vec::new();
    for r in &table {
        let b = &r.report;
        let idx = || format!("m={};N={}", b.m, b.n);
        let (e, mid, out) = (
            big_to_f64(&b.exact),
            big_to_f64(&b.middle),
            big_to_f64(&b.outer),
        );
        let mid_name = match b.case {
            BoundCase::Small => "exact-le-stirling-sum",
            BoundCase::Large => "exact-le-power",
        };
        rows.push(CheckRow::exact(
            mid_name,
            idx(),
            e,
            mid,
            b.exact <= b.middle,
        ));
        rows.push(CheckRow::exact(
            "middle-le-outer",
            idx(),
            mid,
            out,
            b.middle <= b.outer,
        ));
        let recount = count_i(b.m, b.n, cap)?;
        rows.push(CheckRow::exact(
            "enumeration-matches-count",
            idx(),
            big_to_f64(&r.enumerated),
            big_to_f64(&recount),
            r.enumerated == recount,
        ));
        if let Some(c) = r.closed_form() {
            rows.push(CheckRow::exact(
                "closed-form",
                idx(),
                e,
                big_to_f64(&c),
                c == b.exact,
            ));
        }
    }
    for pair in table.windows(2) {
        let (a, b) = (&pair[0].report, &pair[1].report);
        if a.m == b.m && b.n == a.n + 1 {
            rows.push(CheckRow::exact(
                "nondecreasing-in-n",
                format!("m={};N={}", b.m, b.n),
                big_to_f64(&b.exact),
                big_to_f64(&a.exact),
                a.exact <= b.exact,
            ));
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------- production

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductionParams {
    pub particles: usize,
    pub horizon: f64,
    pub dt: f64,
}

impl Default for ProductionParams {
    fn default() -> Self {
        Self {
            particles: 3,
            horizon: 0.5,
            dt: 1e-3,
        }
    }
}

fn production_run(
    model: &LindbladModel,
    space: &ManyBodySpace,
    gamma: &Hermitian,
    big: &CMatrix,
    p: &ProductionParams,
    dt: f64,
    closed: bool,
) -> Result<ProductionReport> {
    let pair = run_pair(
        model,
        space,
        gamma,
        big,
        p.horizon,
        &IntegratorConfig::new(dt),
    )?;
    entropy_production_identity_check(&pair.many, &pair.one, model, space, closed)
}

/// Closed system: central difference of the entropy against `tr(ΓA)` and
/// the error reduction under step halving. Open system: `dS/dt ≤ tr(ΓA)`.
pub fn production_identity(
    p: &ProductionParams,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<CheckRow>> {
    let space = ManyBodySpace::new(2, p.particles)?;
    let open = random_model(2, seed, 1.0, true)?;
    let closed = open.closed();
    let (gamma, big) = initial_states(2, &space, 0.2, Initial::SymmetrizedRandom, seed + 100)?;
    let mut rows = Vec::new();

    let coarse = production_run(&closed, &space, &gamma, &big, p, p.dt, true)?;
    let fine = production_run(&closed, &space, &gamma, &big, p, p.dt / 2.0, true)?;
    for q in &coarse.points {
        rows.push(CheckRow::upper(
            "closed-relative-error",
            t_index(q.time),
            q.relative_error(),
            tol.closed_identity,
            0.0,
        ));
    }
    let coarse_err = coarse
        .points
        .iter()
        .fold(0.0f64, |a, q| a.max(q.abs_error()));
    // fine interior point 2k−1 sits at coarse interior point k−1
    let fine_err = fine
        .points
        .iter()
        .skip(1)
        .step_by(2)
        .fold(0.0f64, |a, q| a.max(q.abs_error()));
    rows.push(CheckRow::lower(
        "halving-error-ratio",
        format!("dt={:e}", p.dt),
        coarse_err / fine_err,
        tol.halving_ratio,
        0.0,
    ));

    let report = production_run(&open, &space, &gamma, &big, p, p.dt, false)?;
    for q in &report.points {
        rows.push(CheckRow::upper(
            "open-inequality",
            t_index(q.time),
            q.derivative,
            q.production,
            tol.open_slack,
        ));
    }
    Ok(rows)
}

// ---------------------------------------------------------------- entropy growth

/// Both exponential entropy bounds at every stored time of one run.
pub fn growth_rows(
    model: &LindbladModel,
    space: &ManyBodySpace,
    pair: &Pair,
    m0: f64,
    label: &str,
) -> Result<Vec<CheckRow>> {
    let report = entropy_growth_check(model, space, &pair.many, &pair.one, m0)?;
    let mut rows = Vec::with_capacity(2 * report.points.len());
    for p in &report.points {
        let idx = format!("{label}{}", t_index(p.time));
        rows.push(CheckRow::upper(
            "entropy-le-explicit",
            idx.clone(),
            p.entropy,
            p.bound_explicit,
            0.0,
        ));
        rows.push(CheckRow::upper(
            "entropy-le-trajectory-sup",
            idx,
            p.entropy,
            p.bound_sup,
            0.0,
        ));
    }
    Ok(rows)
}

pub fn entropy_growth(particles: &[usize], seed: u64) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let model = random_model(2, seed, 1.0, true)?;
    for &n in particles {
        let space = ManyBodySpace::new(2, n)?;
        let (gamma, big) = initial_states(2, &space, 0.2, Initial::Product, seed + 100)?;
        let config = IntegratorConfig::new(1e-3).with_stride(10);
        let pair = run_pair(&model, &space, &gamma, &big, 0.5, &config)?;
        rows.extend(growth_rows(&model, &space, &pair, 0.2, &format!("N={n};"))?);
    }
    Ok(rows)
}

// ---------------------------------------------------------------- identities

fn frechet_sample(rng: &mut ScenarioRng, i: usize) -> (Hermitian, Hermitian) {
    let dim = 2 + i % 4;
    let x = random_density(rng, dim, 0.05 / dim as f64);
    let b = random_hermitian(rng, dim);
    (x, b)
}

pub fn frechet_quadrature(count: usize, seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|i| {
            let (x, b) = frechet_sample(&mut rng, i);
            let d = frechet_log(&x, b.matrix())?;
            let q = frechet_log_quadrature(&x, b.matrix(), 200)?;
            let rel = operator_norm(&(&d - q)) / operator_norm(&d).max(1.0);
            Ok(CheckRow::upper(
                "frechet-vs-quadrature",
                format!("{i}"),
                rel,
                tol.frechet_quadrature,
                0.0,
            ))
        })
        .collect()
}

pub fn frechet_difference(count: usize, seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let eps = 1e-5;
    (0..count)
        .map(|i| {
            let (x, b) = frechet_sample(&mut rng, i);
            let d = frechet_log(&x, b.matrix())?;
            let plus = Hermitian::hermitize(&(x.matrix() + b.matrix() * real(eps)));
            let minus = Hermitian::hermitize(&(x.matrix() - b.matrix() * real(eps)));
            let fd = (log_hermitian(&plus)?.into_matrix() - log_hermitian(&minus)?.into_matrix())
                * real(0.5 / eps);
            let rel = operator_norm(&(&d - fd)) / operator_norm(&d).max(1.0);
            Ok(CheckRow::upper(
                "frechet-vs-difference",
                format!("{i}"),
                rel,
                tol.frechet_difference,
                0.0,
            ))
        })
        .collect()
}

pub fn commutator_log(count: usize, seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|i| {
            let (x, b) = frechet_sample(&mut rng, i);
            let defect = commutator_log_defect(&x, &b)? / b.operator_norm().max(1.0);
            Ok(CheckRow::upper(
                "commutator-log",
                format!("{i}"),
                defect,
                tol.commutator_log,
                0.0,
            ))
        })
        .collect()
}

pub fn golden_thompson(count: usize, seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|i| {
            let dim = 2 + i % 5;
            let x = random_hermitian(&mut rng, dim);
            let y = random_hermitian(&mut rng, dim);
            let c = golden_thompson_check(&x, &y)?;
            Ok(comparison_row(
                "golden-thompson",
                format!("{i}"),
                c,
                scaled(tol.inequality, c),
            ))
        })
        .collect()
}

pub fn entropy_inequality(count: usize, seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|i| {
            let dim = 2 + i % 5;
            let rho = random_density(&mut rng, dim, 0.0);
            let sigma = random_density(&mut rng, dim, 0.02 / dim as f64);
            let a = random_hermitian(&mut rng, dim);
            let lambda = rng.gen_range(0.05..3.0);
            let c = entropy_inequality_check(rho.matrix(), sigma.matrix(), &a, lambda)?;
            Ok(comparison_row(
                "entropy-inequality",
                format!("{i}"),
                c,
                scaled(tol.inequality, c),
            ))
        })
        .collect()
}

/// Symmetric N-body states paired with one-body references: half from a
/// Lindblad run against the Hartree solution, half random.
fn metric_instances(count: usize, seed: u64) -> Result<Vec<(ManyBodySpace, CMatrix, CMatrix)>> {
    let space = ManyBodySpace::new(2, 3)?;
    let simulated = count / 2;
    let mut out = Vec::with_capacity(count);
    if simulated > 0 {
        let model = random_model(2, seed, 1.0, true)?;
        let (gamma, big) = initial_states(2, &space, 0.2, Initial::SymmetrizedRandom, seed + 1)?;
        let horizon: f64 = 0.5;
        let dt = 1e-3;
        let steps = (horizon / dt).round() as usize;
        let stride = (steps / simulated).max(1);
        let config = IntegratorConfig::new(dt).with_stride(stride);
        let pair = run_pair(&model, &space, &gamma, &big, horizon, &config)?;
        for (a, b) in pair
            .many
            .states
            .iter()
            .zip(&pair.one.states)
            .skip(1)
            .take(simulated)
        {
            out.push((space, symmetrize(a, &space)?.into_matrix(), b.clone()));
        }
    }
    let mut rng = seeded(seed + 2);
    while out.len() < count {
        let n = 2 + out.len() % 3;
        let sp = ManyBodySpace::new(2, n)?;
        let raw = random_density(&mut rng, sp.total_dim(), 0.0);
        let big = symmetrize(raw.matrix(), &sp)?.into_matrix();
        let small = random_density(&mut rng, 2, 0.05).into_matrix();
        out.push((sp, big, small));
    }
    Ok(out)
}

pub fn pinsker(count: usize, seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    metric_instances(count, seed)?
        .iter()
        .enumerate()
        .map(|(i, (space, big, small))| {
            let reference = tensor_power(small, space)?;
            let c = pinsker_check(big, &reference)?;
            Ok(comparison_row("pinsker", format!("{i}"), c, tol.inequality))
        })
        .collect()
}

pub fn block_subadditivity(count: usize, seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::with_capacity(2 * count);
    for (i, (space, big, small)) in metric_instances(count, seed)?.iter().enumerate() {
        let n = space.legs();
        let k = 1 + i % (n - 1);
        let c = block_subadditivity_check(big, small, k, space)?;
        rows.push(comparison_row(
            "block-subadditivity",
            format!("{i};k={k}"),
            c,
            tol.inequality,
        ));
        let full = block_subadditivity_check(big, small, n, space)?;
        rows.push(CheckRow::upper(
            "block-equality-at-n",
            format!("{i};k={n}"),
            (full.lhs - full.rhs).abs(),
            tol.block_equality,
            0.0,
        ));
    }
    Ok(rows)
}

/// One Hartree–Lindblad trajectory description for the X-norm check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XNormCase {
    pub label: &'static str,
    pub site_dim: usize,
    pub floor: f64,
    pub bose_hubbard: bool,
}

pub const X_NORM_CASES: [XNormCase; 6] = [
    XNormCase {
        label: "random-d2-a",
        site_dim: 2,
        floor: 0.2,
        bose_hubbard: false,
    },
    XNormCase {
        label: "random-d2-b",
        site_dim: 2,
        floor: 0.1,
        bose_hubbard: false,
    },
    XNormCase {
        label: "random-d3",
        site_dim: 3,
        floor: 0.1,
        bose_hubbard: false,
    },
    XNormCase {
        label: "random-d4",
        site_dim: 4,
        floor: 0.05,
        bose_hubbard: false,
    },
    XNormCase {
        label: "bose-hubbard-3",
        site_dim: 3,
        floor: 0.1,
        bose_hubbard: true,
    },
    XNormCase {
        label: "bose-hubbard-4",
        site_dim: 4,
        floor: 0.05,
        bose_hubbard: true,
    },
];

pub fn x_norm_rows(
    one: &Trajectory,
    w: &Hermitian,
    label: &str,
    tol: &Tolerances,
) -> Result<Vec<CheckRow>> {
    let points = x_norm_bound_check(one, w)?;
    let m0 = Hermitian::hermitize(&one.states[0]).min_eigenvalue();
    let mut rows = Vec::with_capacity(2 * points.len());
    for p in &points {
        let idx = format!("{label};{}", t_index(p.time));
        rows.push(CheckRow::upper(
            "x-norm",
            idx.clone(),
            p.x_norm,
            p.bound,
            tol.x_norm,
        ));
        rows.push(CheckRow::lower(
            "spectral-floor",
            idx,
            p.min_eigenvalue,
            m0,
            tol.floor,
        ));
    }
    Ok(rows)
}

pub fn x_norm(cases: &[XNormCase], seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let case_seed = seed + i as u64;
        let model = if case.bose_hubbard {
            qrelent_core::dynamics::bose_hubbard_model(case.site_dim, 0.5)?
        } else {
            random_model(case.site_dim, case_seed, 1.0, true)?
        };
        let gamma = random_density(&mut seeded(case_seed + 100), case.site_dim, case.floor);
        let config = IntegratorConfig::new(1e-3).with_stride(20);
        let one = integrate(Flow::Hartree, gamma.matrix(), &model, 1.0, &config)?;
        rows.extend(x_norm_rows(&one, model.w(), case.label, tol)?);
    }
    Ok(rows)
}

pub fn partition_bound(models: usize, seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let space = ManyBodySpace::new(2, 3)?;
    (0..models)
        .map(|i| {
            let s = seed + i as u64;
            let model = random_model(2, s, 1.0, true)?;
            let gamma = random_density(&mut seeded(s + 100), 2, 0.1);
            let lambda = critical_lambda(&gamma, model.w())?;
            let c = moment_partition_bound_check(&gamma, model.w(), &space, lambda)?;
            Ok(comparison_row(
                "partition-bound",
                format!("model={i};lambda={lambda:.6e}"),
                c,
                tol.inequality,
            ))
        })
        .collect()
}

// ---------------------------------------------------------------- semiclassical

/// Random constants in a range where `f` and `g` cross inside the bracket.
fn sample_params(rng: &mut ScenarioRng) -> BoundParams {
    BoundParams {
        c0: 8.0,
        c1: rng.gen_range(0.01..0.2),
        c2: rng.gen_range(0.01..0.1),
        horizon: rng.gen_range(0.1..1.0),
        n: 10f64.powf(rng.gen_range(4.0..12.0)),
        k: rng.gen_range(1..=3) as f64,
        d: rng.gen_range(1..=2) as f64,
        phi_sup: rng.gen_range(0.1..1.0),
        grad_phi_sup: rng.gen_range(0.1..1.0),
        lip_grad_phi: rng.gen_range(0.1..0.5),
    }
}

pub fn semiclassical_samples(
    samples: usize,
    grid_points: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let mut rows = Vec::with_capacity(2 * samples);
    for i in 0..samples {
        let p = sample_params(&mut rng);
        let t = p.horizon * rng.gen_range(0.05..=1.0);
        let mono = monotonicity_check(&p, t, grid_points)?;
        rows.push(CheckRow::exact(
            "monotone-single-crossing",
            format!("{i}"),
            mono.sign_changes as f64,
            1.0,
            mono.holds(),
        ));
        let crossing = solve_hbar_crossing(&p, t)?;
        rows.push(CheckRow::upper(
            "crossing-relative-defect",
            format!("{i}"),
            crossing.relative_defect,
            tol.crossing,
            0.0,
        ));
    }
    Ok(rows)
}

pub fn envelope(p: &BoundParams, n_grid: &[f64], tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let table = uniform_envelope(p, n_grid)?;
    let mut rows = Vec::new();
    for r in &table {
        let idx = format!("N={:e}", r.n);
        rows.push(CheckRow::exact(
            "crossing-below-sqrt-scale",
            idx.clone(),
            r.hbar_t,
            r.hbar_sqrt,
            r.hbar_t < r.hbar_sqrt,
        ));
        rows.push(CheckRow::upper(
            "envelope-le-g-at-sqrt",
            idx,
            r.value,
            r.g_at_sqrt,
            0.0,
        ));
    }
    let (lo, hi) = table.iter().fold((f64::INFINITY, 0.0f64), |a, r| {
        (a.0.min(r.scaled), a.1.max(r.scaled))
    });
    rows.push(CheckRow::exact(
        "scaled-envelope-ratio",
        "grid",
        hi / lo,
        tol.envelope_ratio,
        hi / lo < tol.envelope_ratio,
    ));
    Ok(rows)
}

// ---------------------------------------------------------------- quantization

pub const REFINEMENT: [(usize, usize); 5] = [(6, 9), (12, 18), (24, 36), (36, 54), (48, 72)];

fn random_point(rng: &mut ScenarioRng, p_max: f64) -> (f64, f64) {
    (rng.gen::<f64>(), rng.gen_range(-p_max..p_max))
}

fn random_measure(rng: &mut ScenarioRng, len: usize, p_max: f64) -> Result<DiscreteMeasure> {
    let points = (0..len).map(|_| random_point(rng, p_max)).collect();
    let masses = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    DiscreteMeasure::new(points, masses)?.normalized()
}

pub fn quantization(
    states: usize,
    pairs: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<CheckRow>> {
    let mut rng = seeded(seed);
    let mut rows = Vec::new();

    for &hbar in &[0.02, 0.05, 0.1, 0.2, 0.5] {
        let space = TorusHilbert::for_momentum(hbar, 1.0)?;
        for j in 0..10 {
            let c = coherent_state(random_point(&mut rng, 1.0), &space)?;
            rows.push(CheckRow::upper(
                "coherent-norm",
                format!("hbar={hbar};{j}"),
                (c.norm() - 1.0).abs(),
                tol.norm,
                0.0,
            ));
        }
    }

    let (space, grid) = standard_window();
    // holds the coherent state of every grid point
    let wide = TorusHilbert::for_momentum(
        space.hbar(),
        grid.p_nodes().iter().fold(0.0, |a: f64, &p| a.max(p.abs())),
    )?;
    for s in 0..states {
        let gamma = random_density(&mut rng, space.dim(), 0.0);
        let mu = husimi(&gamma, &space, &grid)?;
        let min = mu.masses().iter().fold(f64::INFINITY, |a, &m| a.min(m));
        rows.push(CheckRow::lower(
            "husimi-nonnegative",
            format!("{s}"),
            min,
            0.0,
            0.0,
        ));
        rows.push(CheckRow::upper(
            "husimi-mass",
            format!("{s}"),
            (mu.total() - 1.0).abs(),
            tol.husimi_mass,
            0.0,
        ));
        let measures = [
            ("husimi", mu.normalized()?),
            ("random", random_measure(&mut rng, 12, 0.3)?),
        ];
        for (name, m) in &measures {
            let op = toeplitz(m, &wide)?;
            let idx = format!("{name}-{s}");
            rows.push(CheckRow::lower(
                "toeplitz-psd",
                idx.clone(),
                op.min_eigenvalue(),
                0.0,
                tol.psd,
            ));
            rows.push(CheckRow::upper(
                "toeplitz-trace",
                idx,
                (op.trace() - 1.0).abs(),
                tol.toeplitz_trace,
                0.0,
            ));
        }
    }

    let window = resolution_identity_check(&space, &grid);
    rows.push(CheckRow::upper(
        "resolution-standard",
        "48x72",
        window.absolute,
        tol.resolution,
        0.0,
    ));
    let mut last: Option<f64> = None;
    for &(nq, np) in &REFINEMENT {
        let d = resolution_identity_check(&space, &PhaseSpaceGrid::new(nq, np, 1.0)?).absolute;
        if let Some(prev) = last {
            let pass = d < prev || d.max(prev) < tol.resolution_floor;
            rows.push(CheckRow::exact(
                "resolution-refinement",
                format!("{nq}x{np}"),
                d,
                prev,
                pass,
            ));
        }
        last = Some(d);
    }

    for j in 0..5 {
        let z = random_point(&mut rng, 0.3);
        let d = duality_check(&DiscreteMeasure::dirac(z), &space, &grid)?;
        rows.push(CheckRow::upper(
            "duality-point-mass",
            format!("{j}"),
            d,
            tol.duality,
            0.0,
        ));
    }

    for j in 0..pairs {
        let mu = random_measure(&mut rng, 8, 0.3)?;
        // half the pairs share support, so total variation is not saturated
        let nu = if j % 2 == 0 {
            let masses = mu
                .masses()
                .iter()
                .map(|&m| m * rng.gen_range(0.5..1.5))
                .collect();
            DiscreteMeasure::new(mu.points().to_vec(), masses)?.normalized()?
        } else {
            random_measure(&mut rng, 6, 0.3)?
        };
        let d1 = dist1(&mu, &nu)?;
        rows.push(CheckRow::upper(
            "dist1-le-tv",
            format!("{j}"),
            d1,
            total_variation(&mu, &nu),
            tol.transport,
        ));
        rows.push(CheckRow::upper(
            "dist1-le-mk2",
            format!("{j}"),
            d1,
            dist_mk2(&mu, &nu)?,
            tol.transport,
        ));
    }
    Ok(rows)
}

// ---------------------------------------------------------------- integrator

/// Global errors of two step sizes against the exact unitary flow.
pub fn order_ratio(
    model: &LindbladModel,
    particles: usize,
    seed: u64,
    dt: f64,
    horizon: f64,
) -> Result<(f64, f64)> {
    let d = model.site_dim();
    let space = ManyBodySpace::new(d, particles)?;
    let initial = random_density(&mut seeded(seed), space.total_dim(), 0.0).into_matrix();
    let h = n_body_hamiltonian(model, &space)?;
    let exact = exact_unitary_flow(&h, &initial, horizon)?;
    let err = |step: f64| -> Result<f64> {
        let run = integrate(
            Flow::NBody(space),
            &initial,
            model,
            horizon,
            &IntegratorConfig::new(step),
        )?;
        Ok((run.final_state() - &exact).norm())
    };
    let coarse = err(dt)?;
    let fine = err(dt / 2.0)?;
    Ok((coarse, fine))
}

pub fn integrator_order(seed: u64, tol: &Tolerances) -> Result<Vec<CheckRow>> {
    let (lo, hi) = tol.order_window;
    let mut rows = Vec::new();
    for k in 0..3u64 {
        let s = seed + k;
        let free = random_model(2, s, 1.0, true)?.closed();
        let free = free.with_interaction(Hermitian::zeros(4))?;
        let single = random_model(3, s, 1.0, true)?.closed();
        for (label, model, n) in [("w0-N2", &free, 2), ("N1", &single, 1)] {
            let (coarse, fine) = order_ratio(model, n, s + 50, 0.1, 1.0)?;
            let ratio = coarse / fine;
            rows.push(CheckRow::within(
                "error-ratio",
                format!("{label};seed={s}"),
                ratio,
                lo,
                hi,
            ));
        }
    }
    Ok(rows)
}
