//! Executes one scenario into a [`Report`].

use qrelent_core::combinatorics::BoundCase;
use qrelent_core::dynamics::{IntegratorConfig, POSITIVITY_LIMIT, TRACE_DRIFT_LIMIT};
use qrelent_core::entropy::relative_entropy;
use qrelent_core::linalg::real_trace;
use qrelent_core::semiclassical::{monotonicity_check, uniform_envelope};
use qrelent_core::tensor::tensor_power;
use qrelent_core::{Hermitian, ManyBodySpace};

use crate::checks::{self, CancellationParams, Tolerances, X_NORM_CASES};
use crate::report::{fmt_f64, CheckRow, Report, Table};
use crate::scenario::{Identity, Kind, Scenario};

type Result<T> = qrelent_core::Result<T>;

pub const SIMULATE_COLUMNS: [&str; 7] = [
    "scenario",
    "time",
    "trace_many",
    "min_eigenvalue_many",
    "min_eigenvalue_one",
    "relative_entropy",
    "pass",
];

pub const ENUMERATE_COLUMNS: [&str; 10] = [
    "scenario",
    "m",
    "n",
    "exact",
    "stirling_bound",
    "c0_bound",
    "case",
    "enumerated",
    "c0_ratio",
    "pass",
];

pub const SEMICLASSICAL_COLUMNS: [&str; 9] = [
    "scenario",
    "n",
    "hbar_t",
    "value",
    "hbar_sqrt",
    "g_at_sqrt",
    "scaled",
    "monotone",
    "pass",
];

/// Runs `scenario`; numerical failures become a diagnostic report.
pub fn run(scenario: &Scenario, cap: Option<usize>) -> Report {
    let tol = Tolerances::default().with_spec(&scenario.tolerances);
    let kind = scenario.kind.name();
    let result = match scenario.kind {
        Kind::Simulate => simulate(scenario, cap),
        Kind::Enumerate => enumerate(scenario),
        Kind::SemiclassicalBounds => semiclassical(scenario, &tol),
        _ => checks_for(scenario, &tol, cap).map(|rows| {
            let passed = rows.iter().all(|r| r.pass);
            (Table::checks(&scenario.id, &rows), passed)
        }),
    };
    match result {
        Ok((table, passed)) => Report {
            id: scenario.id.clone(),
            kind: kind.into(),
            seed: scenario.seed,
            table,
            passed,
            error: None,
        },
        Err(e) => Report::failed_with(&scenario.id, kind, scenario.seed, kind, &e),
    }
}

fn space_for(scenario: &Scenario, cap: Option<usize>) -> Result<ManyBodySpace> {
    let d = scenario.model().site_dim();
    let n = scenario.run().particles;
    match cap {
        Some(c) => ManyBodySpace::with_cap(d, n, c),
        None => ManyBodySpace::new(d, n),
    }
}

fn simulate(s: &Scenario, cap: Option<usize>) -> Result<(Table, bool)> {
    let run = s.run();
    let model = s.model().build(s.seed)?;
    let space = space_for(s, cap)?;
    let (gamma, big) = checks::initial_states(
        space.site_dim(),
        &space,
        run.floor,
        run.initial,
        s.seed + 100,
    )?;
    let config = IntegratorConfig::new(run.dt).with_stride(run.stride);
    let pair = checks::run_pair(&model, &space, &gamma, &big, run.horizon, &config)?;
    let mut table = Table::new(&SIMULATE_COLUMNS);
    let mut passed = true;
    for ((t, many), one) in pair
        .many
        .times
        .iter()
        .zip(&pair.many.states)
        .zip(&pair.one.states)
    {
        let trace = real_trace(many);
        let min_many = Hermitian::hermitize(many).min_eigenvalue();
        let min_one = Hermitian::hermitize(one).min_eigenvalue();
        let entropy = relative_entropy(many, &tensor_power(one, &space)?)?.value;
        let ok = (trace - 1.0).abs() <= TRACE_DRIFT_LIMIT
            && min_many >= -POSITIVITY_LIMIT
            && min_one >= -POSITIVITY_LIMIT;
        passed &= ok;
        table.push(vec![
            s.id.clone(),
            fmt_f64(*t),
            fmt_f64(trace),
            fmt_f64(min_many),
            fmt_f64(min_one),
            fmt_f64(entropy),
            ok.to_string(),
        ]);
    }
    Ok((table, passed))
}

fn enumerate(s: &Scenario) -> Result<(Table, bool)> {
    let spec = s.enumerate.clone().unwrap_or_default();
    let rows = checks::enumeration_table(spec.m_max, spec.n_max, &spec.extra, spec.search_cap)?;
    let mut table = Table::new(&ENUMERATE_COLUMNS);
    let mut passed = true;
    for r in &rows {
        let b = &r.report;
        let ok = r.holds();
        passed &= ok;
        table.push(vec![
            s.id.clone(),
            b.m.to_string(),
            b.n.to_string(),
            b.exact.to_string(),
            b.middle.to_string(),
            b.outer.to_string(),
            match b.case {
                BoundCase::Small => "small".into(),
                BoundCase::Large => "large".into(),
            },
            r.enumerated.to_string(),
            fmt_f64(b.c0_ratio()),
            ok.to_string(),
        ]);
    }
    Ok((table, passed))
}

fn semiclassical(s: &Scenario, tol: &Tolerances) -> Result<(Table, bool)> {
    let spec = s.semiclassical.clone().unwrap_or_default();
    let p = spec.params();
    let rows = uniform_envelope(&p, &spec.n_grid)?;
    let mut table = Table::new(&SEMICLASSICAL_COLUMNS);
    let mut passed = true;
    for r in &rows {
        let mono = monotonicity_check(&p.with_n(r.n), p.horizon, spec.monotonicity_samples)?;
        let ok = r.holds() && mono.holds();
        passed &= ok;
        table.push(vec![
            s.id.clone(),
            fmt_f64(r.n),
            fmt_f64(r.hbar_t),
            fmt_f64(r.value),
            fmt_f64(r.hbar_sqrt),
            fmt_f64(r.g_at_sqrt),
            fmt_f64(r.scaled),
            mono.holds().to_string(),
            ok.to_string(),
        ]);
    }
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |a, r| {
        (a.0.min(r.scaled), a.1.max(r.scaled))
    });
    passed &= hi / lo < tol.envelope_ratio;
    Ok((table, passed))
}

fn checks_for(s: &Scenario, tol: &Tolerances, cap: Option<usize>) -> Result<Vec<CheckRow>> {
    match s.kind {
        Kind::VerifyEntropyGrowth => {
            let run = s.run();
            let model = s.model().build(s.seed)?;
            let space = space_for(s, cap)?;
            let (gamma, big) = checks::initial_states(
                space.site_dim(),
                &space,
                run.floor,
                run.initial,
                s.seed + 100,
            )?;
            let config = IntegratorConfig::new(run.dt).with_stride(run.stride);
            let pair = checks::run_pair(&model, &space, &gamma, &big, run.horizon, &config)?;
            checks::growth_rows(&model, &space, &pair, run.floor, "")
        }
        Kind::VerifyCancellation => {
            let spec = s.cancellation.clone().unwrap_or_default();
            let params = CancellationParams {
                site_dims: spec.site_dims,
                max_particles: spec.max_particles,
                max_order: spec.max_order,
                samples: spec.samples,
                ..CancellationParams::default()
            };
            checks::cancellation(&params, s.seed, tol)
        }
        Kind::VerifyIdentities => {
            let spec = s.identities.as_ref().expect("validated");
            let mut rows = Vec::new();
            for (k, id) in spec.checks.iter().enumerate() {
                let seed = s.seed.wrapping_add(10_000 * k as u64);
                let n = spec.count;
                rows.extend(match id {
                    Identity::FrechetQuadrature => checks::frechet_quadrature(n, seed, tol)?,
                    Identity::FrechetDifference => checks::frechet_difference(n, seed, tol)?,
                    Identity::CommutatorLog => checks::commutator_log(n, seed, tol)?,
                    Identity::GoldenThompson => checks::golden_thompson(n, seed, tol)?,
                    Identity::EntropyInequality => checks::entropy_inequality(n, seed, tol)?,
                    Identity::Pinsker => checks::pinsker(n, seed, tol)?,
                    Identity::BlockSubadditivity => checks::block_subadditivity(n, seed, tol)?,
                    Identity::PartitionBound => checks::partition_bound(n, seed, tol)?,
                    Identity::XNorm => checks::x_norm(&X_NORM_CASES, seed, tol)?,
                });
            }
            Ok(rows)
        }
        Kind::QuantizationChecks => {
            let spec = s.quantization.clone().unwrap_or_default();
            checks::quantization(spec.states, spec.transport_pairs, s.seed, tol)
        }
        Kind::Simulate | Kind::Enumerate | Kind::SemiclassicalBounds => {
            unreachable!("tabular kinds")
        }
    }
}
