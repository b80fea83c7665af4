use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{hartree_rhs_unchecked, LindbladModel, NBodyGenerator};
use crate::error::{argument, Error, Result};
use crate::linalg::{
    ensure_square, hermitian_part, hermiticity_defect, real, real_trace, CMatrix, Hermitian,
};
use crate::tensor::ManyBodySpace;

/// A step whose state has an eigenvalue below `−POSITIVITY_LIMIT` aborts.
pub const POSITIVITY_LIMIT: f64 = 1e-6;

/// A step whose trace moves further than this from 1 aborts.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Which equation to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    /// `∂Γ = −i[H_N, Γ] + Σ_j 𝓛_{L_j}(Γ)` on the given space.
    NBody(ManyBodySpace),
    /// `∂γ = −i[h + V^γ, γ] + 𝓛_L(γ)`, with `V^γ` re-evaluated at every stage.
    Hartree,
}

/// Classical fourth-order Runge–Kutta with fixed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub hermitize_each_step: bool,
    pub renormalize_trace: bool,
    /// Store every `record_stride`-th step (the final time is always stored).
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    /// `1e-3 · min(1, 1/scale)` for a generator of operator-norm size `scale`.
    pub fn default_dt(scale: f64) -> f64 {
        1e-3 * if scale > 1.0 { 1.0 / scale } else { 1.0 }
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            hermitize_each_step: true,
            renormalize_trace: true,
            record_stride: 1,
        }
    }
}

/// Measured after each step, before any Hermitization or renormalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub trace_drift: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &CMatrix {
        self.states
            .last()
            .expect("trajectory stores the initial state")
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.diagnostics
            .iter()
            .fold(0.0, |a, d| a.max(d.trace_drift))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics
            .iter()
            .fold(f64::INFINITY, |a, d| a.min(d.min_eigenvalue))
    }
}

enum Rhs<'a> {
    NBody(NBodyGenerator),
    Hartree(&'a LindbladModel),
}

impl Rhs<'_> {
    fn eval(&self, state: &CMatrix) -> CMatrix {
        match self {
            Rhs::NBody(g) => g.rhs(state),
            Rhs::Hartree(m) => hartree_rhs_unchecked(state, m),
        }
    }
}

fn diagnose(state: &CMatrix) -> StepDiagnostics {
    StepDiagnostics {
        trace_drift: (real_trace(state) - 1.0).abs(),
        hermiticity_defect: hermiticity_defect(state),
        min_eigenvalue: Hermitian::hermitize(state).min_eigenvalue(),
    }
}

/// Integrates on `[0, t_final]` with `n = round(t_final/dt)` equal steps of
/// size `t_final/n`. Positivity is monitored and never repaired.
pub fn integrate(
    flow: Flow,
    initial: &CMatrix,
    model: &LindbladModel,
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(config.dt > 0.0) || !config.dt.is_finite() {
        return Err(argument("time step must be positive and finite"));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(argument("final time must be nonnegative and finite"));
    }
    if config.record_stride == 0 {
        return Err(argument("record stride must be positive"));
    }
    let dim = ensure_square(initial)?;
    let rhs = match flow {
        Flow::NBody(space) => {
            if dim != space.total_dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.total_dim(),
                    found: dim,
                });
            }
            Rhs::NBody(NBodyGenerator::new(model, &space)?)
        }
        Flow::Hartree => {
            if dim != model.site_dim() {
                return Err(Error::DimensionMismatch {
                    expected: model.site_dim(),
                    found: dim,
                });
            }
            Rhs::Hartree(model)
        }
    };
    let steps = ((t_final / config.dt).round() as usize).max(if t_final > 0.0 { 1 } else { 0 });
    let h = if steps > 0 {
        t_final / steps as f64
    } else {
        0.0
    };

    let mut state = initial.clone();
    let mut out = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
    };
    out.times.push(0.0);
    out.states.push(state.clone());
    out.diagnostics.push(diagnose(&state));

    let half = real(0.5 * h);
    let full = real(h);
    let sixth = real(h / 6.0);
    for step in 1..=steps {
        let k1 = rhs.eval(&state);
        let k2 = rhs.eval(&(&state + &k1 * half));
        let k3 = rhs.eval(&(&state + &k2 * half));
        let k4 = rhs.eval(&(&state + &k3 * full));
        state += (k1 + (k2 + k3) * real(2.0) + k4) * sixth;

        let time = step as f64 * h;
        if state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let diag = diagnose(&state);
        if diag.min_eigenvalue < -POSITIVITY_LIMIT {
            return Err(Error::Positivity {
                time,
                min_eigenvalue: diag.min_eigenvalue,
            });
        }
        if diag.trace_drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift {
                time,
                drift: diag.trace_drift,
            });
        }
        if config.hermitize_each_step {
            state = hermitian_part(&state);
        }
        if config.renormalize_trace {
            let tr = real_trace(&state);
            state /= Complex64::new(tr, 0.0);
        }
        if step % config.record_stride == 0 || step == steps {
            out.times.push(time);
            out.states.push(state.clone());
            out.diagnostics.push(diag);
        }
    }
    Ok(out)
}

/// Richardson estimate `‖ρ_{dt}(T) − ρ_{dt/2}(T)‖_F / 15` of the error of
/// the `dt/2` run.
pub fn step_halving_error(
    flow: Flow,
    initial: &CMatrix,
    model: &LindbladModel,
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<f64> {
    let coarse = integrate(flow, initial, model, t_final, config)?;
    let fine_config = IntegratorConfig {
        dt: config.dt / 2.0,
        ..*config
    };
    let fine = integrate(flow, initial, model, t_final, &fine_config)?;
    Ok((coarse.final_state() - fine.final_state()).norm() / 15.0)
}

/// `e^{−iHt} Γ₀ e^{iHt}` through the spectral decomposition of `H`.
pub fn exact_unitary_flow(h: &Hermitian, initial: &CMatrix, t: f64) -> Result<CMatrix> {
    let n = ensure_square(initial)?;
    if n != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: n,
        });
    }
    let spec = h.eig()?;
    let u = spec.map_complex(|l| Complex64::from_polar(1.0, -l * t));
    Ok(&u * initial * u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{n_body_hamiltonian, random_model};
    use crate::entropy::von_neumann_entropy;
    use crate::linalg::trace_of_product;
    use crate::random::{random_density, seeded};
    use crate::tensor::{symmetrize, symmetry_defect, tensor_power};

    #[test]
    fn free_hartree_matches_unitary_oracle() {
        let m = random_model(3, 1, 1.0, true).unwrap().closed();
        let free = m.with_interaction(Hermitian::zeros(9)).unwrap();
        let g0 = random_density(&mut seeded(2), 3, 0.05);
        let traj = integrate(
            Flow::Hartree,
            g0.matrix(),
            &free,
            1.0,
            &IntegratorConfig::new(1e-3),
        )
        .unwrap();
        let exact = exact_unitary_flow(free.h(), g0.matrix(), 1.0).unwrap();
        assert!((traj.final_state() - exact).norm() < 1e-8);
        assert_eq!(traj.len(), 1001);
        assert!((traj.times[1000] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fourth_order_error_ratio() {
        let m = random_model(2, 3, 1.0, true).unwrap().closed();
        let free = m.with_interaction(Hermitian::zeros(4)).unwrap();
        let g0 = random_density(&mut seeded(4), 2, 0.05);
        let exact = exact_unitary_flow(free.h(), g0.matrix(), 1.0).unwrap();
        let err = |dt: f64| {
            let t = integrate(
                Flow::Hartree,
                g0.matrix(),
                &free,
                1.0,
                &IntegratorConfig::new(dt),
            )
            .unwrap();
            (t.final_state() - &exact).norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn closed_n_body_conserves_entropy_energy_and_symmetry() {
        let m = random_model(2, 5, 1.0, true).unwrap().closed();
        let space = ManyBodySpace::new(2, 3).unwrap();
        let raw = random_density(&mut seeded(6), 8, 0.01);
        let g0 = symmetrize(raw.matrix(), &space).unwrap();
        let traj = integrate(
            Flow::NBody(space),
            g0.matrix(),
            &m,
            1.0,
            &IntegratorConfig::new(1e-3).with_stride(100),
        )
        .unwrap();
        let h = n_body_hamiltonian(&m, &space).unwrap();
        let s0 = von_neumann_entropy(g0.matrix()).unwrap();
        let e0 = trace_of_product(g0.matrix(), h.matrix()).re;
        for state in &traj.states {
            assert!((von_neumann_entropy(state).unwrap() - s0).abs() < 1e-6);
            assert!((trace_of_product(state, h.matrix()).re - e0).abs() < 1e-6);
            assert!(symmetry_defect(state, &space).unwrap() < 1e-8);
        }
        assert!(traj.max_trace_drift() < 1e-8);
        assert_eq!(traj.len(), 11);
    }

    #[test]
    fn lindblad_flow_keeps_symmetry_and_positivity() {
        let m = random_model(2, 7, 1.0, true).unwrap();
        let space = ManyBodySpace::new(2, 3).unwrap();
        let g = random_density(&mut seeded(8), 2, 0.2);
        let g0 = tensor_power(g.matrix(), &space).unwrap();
        let traj = integrate(
            Flow::NBody(space),
            &g0,
            &m,
            0.5,
            &IntegratorConfig::new(1e-3),
        )
        .unwrap();
        for state in &traj.states {
            assert!(symmetry_defect(state, &space).unwrap() < 1e-8);
        }
        assert!(traj.min_eigenvalue() > -1e-8);
        assert!(traj.max_trace_drift() < 1e-8);
    }

    #[test]
    fn hartree_lindblad_keeps_lower_bound() {
        for seed in 0..5 {
            let m = random_model(3, seed, 1.0, true).unwrap();
            let g0 = random_density(&mut seeded(seed + 50), 3, 0.2);
            let traj = integrate(
                Flow::Hartree,
                g0.matrix(),
                &m,
                1.0,
                &IntegratorConfig::new(1e-3),
            )
            .unwrap();
            assert!(traj.min_eigenvalue() >= 0.2 - 1e-8, "seed {seed}");
        }
    }

    #[test]
    fn oversized_step_is_reported() {
        let m = random_model(2, 9, 1.0, true).unwrap();
        let strong = m.with_jump(m.l() * real(6.0)).unwrap();
        let space = ManyBodySpace::new(2, 2).unwrap();
        let g = random_density(&mut seeded(1), 4, 0.0);
        let err = integrate(
            Flow::NBody(space),
            g.matrix(),
            &strong,
            5.0,
            &IntegratorConfig::new(0.5),
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::Positivity { .. } | Error::NonFinite),
            "{err:?}"
        );
    }

    #[test]
    fn richardson_estimate_is_small() {
        let m = random_model(2, 2, 1.0, true).unwrap();
        let g0 = random_density(&mut seeded(3), 2, 0.1);
        let e = step_halving_error(
            Flow::Hartree,
            g0.matrix(),
            &m,
            1.0,
            &IntegratorConfig::new(1e-2),
        )
        .unwrap();
        assert!(e < 1e-9);
    }
}
