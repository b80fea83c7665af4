//! Scenario documents: one TOML table per run, schema `qrelent/1`.

use std::path::{Path, PathBuf};

use qrelent_core::dynamics::{bose_hubbard_model, random_model, LindbladModel};
use qrelent_core::semiclassical::BoundParams;
use qrelent_core::tensor::DEFAULT_DIM_CAP;
use serde::Deserialize;

use crate::error::{HarnessError, Result};

pub const SCHEMA: &str = "qrelent/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Simulate,
    #[serde(rename = "verify-theorem3")]
    VerifyEntropyGrowth,
    VerifyCancellation,
    VerifyIdentities,
    Enumerate,
    SemiclassicalBounds,
    QuantizationChecks,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::VerifyEntropyGrowth => "verify-theorem3",
            Kind::VerifyCancellation => "verify-cancellation",
            Kind::VerifyIdentities => "verify-identities",
            Kind::Enumerate => "enumerate",
            Kind::SemiclassicalBounds => "semiclassical-bounds",
            Kind::QuantizationChecks => "quantization-checks",
        }
    }

    fn needs_model(self) -> bool {
        matches!(self, Kind::Simulate | Kind::VerifyEntropyGrowth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builder {
    Random,
    BoseHubbard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Jump {
    #[default]
    Diagonal,
    General,
    None,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub builder: Builder,
    #[serde(default = "default_site_dim")]
    pub site_dim: usize,
    #[serde(default = "default_w_norm")]
    pub w_norm: f64,
    #[serde(default)]
    pub jump: Jump,
    #[serde(default = "default_lattice")]
    pub lattice_size: usize,
    #[serde(default = "default_dephasing")]
    pub dephasing: f64,
    #[serde(default)]
    pub closed: bool,
}

fn default_site_dim() -> usize {
    2
}
fn default_w_norm() -> f64 {
    1.0
}
fn default_lattice() -> usize {
    3
}
fn default_dephasing() -> f64 {
    0.5
}

impl ModelSpec {
    pub fn site_dim(&self) -> usize {
        match self.builder {
            Builder::Random => self.site_dim,
            Builder::BoseHubbard => self.lattice_size,
        }
    }

    pub fn build(&self, seed: u64) -> qrelent_core::Result<LindbladModel> {
        let model = match self.builder {
            Builder::Random => {
                random_model(self.site_dim, seed, self.w_norm, self.jump != Jump::General)?
            }
            Builder::BoseHubbard => bose_hubbard_model(self.lattice_size, self.dephasing)?,
        };
        Ok(if self.closed || self.jump == Jump::None {
            model.closed()
        } else {
            model
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initial {
    /// `γ₀^{⊗N}` with a random faithful `γ₀`.
    #[default]
    Product,
    /// A symmetrized random faithful N-body state.
    SymmetrizedRandom,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub particles: usize,
    pub horizon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Spectral floor of the random one-body initial state.
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default)]
    pub initial: Initial,
}

fn default_dt() -> f64 {
    1e-3
}
fn default_stride() -> usize {
    1
}
fn default_floor() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CancellationSpec {
    #[serde(default = "default_site_dims")]
    pub site_dims: Vec<usize>,
    #[serde(default = "default_four")]
    pub max_particles: usize,
    #[serde(default = "default_three")]
    pub max_order: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_site_dims() -> Vec<usize> {
    vec![2, 3]
}
fn default_four() -> usize {
    4
}
fn default_three() -> usize {
    3
}
fn default_samples() -> usize {
    20
}

impl Default for CancellationSpec {
    fn default() -> Self {
        Self {
            site_dims: default_site_dims(),
            max_particles: 4,
            max_order: 3,
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    FrechetQuadrature,
    FrechetDifference,
    CommutatorLog,
    GoldenThompson,
    EntropyInequality,
    Pinsker,
    BlockSubadditivity,
    PartitionBound,
    XNorm,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesSpec {
    pub checks: Vec<Identity>,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_count() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateSpec {
    #[serde(default = "default_three")]
    pub m_max: usize,
    #[serde(default = "default_five")]
    pub n_max: usize,
    /// Additional `(m, N)` pairs beyond the rectangle.
    #[serde(default)]
    pub extra: Vec<(usize, usize)>,
    #[serde(default = "default_search_cap")]
    pub search_cap: u128,
}

fn default_five() -> usize {
    5
}
fn default_search_cap() -> u128 {
    qrelent_core::combinatorics::DEFAULT_SEARCH_CAP
}

impl Default for EnumerateSpec {
    fn default() -> Self {
        Self {
            m_max: 3,
            n_max: 5,
            extra: Vec::new(),
            search_cap: default_search_cap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiclassicalSpec {
    #[serde(default)]
    pub c0: Option<f64>,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub phi_sup: Option<f64>,
    #[serde(default)]
    pub grad_phi_sup: Option<f64>,
    #[serde(default)]
    pub lip_grad_phi: Option<f64>,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<f64>,
    #[serde(default = "default_mono_samples")]
    pub monotonicity_samples: usize,
}

pub fn default_n_grid() -> Vec<f64> {
    vec![1e4, 1e6, 1e8, 1e10, 1e12]
}
fn default_mono_samples() -> usize {
    200
}

impl Default for SemiclassicalSpec {
    fn default() -> Self {
        Self {
            c0: None,
            c1: None,
            c2: None,
            horizon: None,
            k: None,
            d: None,
            phi_sup: None,
            grad_phi_sup: None,
            lip_grad_phi: None,
            n_grid: default_n_grid(),
            monotonicity_samples: default_mono_samples(),
        }
    }
}

impl SemiclassicalSpec {
    /// Reference constants with any given field replaced.
    pub fn params(&self) -> BoundParams {
        let r = BoundParams::reference();
        BoundParams {
            c0: self.c0.unwrap_or(r.c0),
            c1: self.c1.unwrap_or(r.c1),
            c2: self.c2.unwrap_or(r.c2),
            horizon: self.horizon.unwrap_or(r.horizon),
            n: r.n,
            k: self.k.unwrap_or(r.k),
            d: self.d.unwrap_or(r.d),
            phi_sup: self.phi_sup.unwrap_or(r.phi_sup),
            grad_phi_sup: self.grad_phi_sup.unwrap_or(r.grad_phi_sup),
            lip_grad_phi: self.lip_grad_phi.unwrap_or(r.lip_grad_phi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizationSpec {
    #[serde(default = "default_states")]
    pub states: usize,
    #[serde(default = "default_pairs")]
    pub transport_pairs: usize,
}

fn default_states() -> usize {
    5
}
fn default_pairs() -> usize {
    20
}

impl Default for QuantizationSpec {
    fn default() -> Self {
        Self {
            states: 5,
            transport_pairs: 20,
        }
    }
}

/// Optional per-scenario tolerance replacements, keyed like [`crate::checks::Tolerances`].
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub cancellation: Option<f64>,
    pub closed_identity: Option<f64>,
    pub open_slack: Option<f64>,
    pub inequality: Option<f64>,
    pub frechet_quadrature: Option<f64>,
    pub frechet_difference: Option<f64>,
    pub commutator_log: Option<f64>,
    pub block_equality: Option<f64>,
    pub x_norm: Option<f64>,
    pub floor: Option<f64>,
    pub crossing: Option<f64>,
    pub norm: Option<f64>,
    pub husimi_mass: Option<f64>,
    pub toeplitz_trace: Option<f64>,
    pub psd: Option<f64>,
    pub resolution: Option<f64>,
    pub duality: Option<f64>,
    pub transport: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub id: String,
    pub kind: Kind,
    pub seed: u64,
    /// CSV file name inside the output directory; `<id>.csv` when absent.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub run: Option<RunSpec>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub cancellation: Option<CancellationSpec>,
    #[serde(default)]
    pub identities: Option<IdentitiesSpec>,
    #[serde(default)]
    pub enumerate: Option<EnumerateSpec>,
    #[serde(default)]
    pub semiclassical: Option<SemiclassicalSpec>,
    #[serde(default)]
    pub quantization: Option<QuantizationSpec>,
}

impl Scenario {
    pub fn output_name(&self) -> String {
        self.output
            .clone()
            .unwrap_or_else(|| format!("{}.csv", self.id))
    }

    pub fn model(&self) -> &ModelSpec {
        self.model.as_ref().expect("validated")
    }

    pub fn run(&self) -> &RunSpec {
        self.run.as_ref().expect("validated")
    }
}

/// Parses and validates one scenario document. `origin` only labels errors.
pub fn parse_scenario(text: &str, origin: &Path, cap: Option<usize>) -> Result<Scenario> {
    let scenario: Scenario = toml::from_str(text)
        .map_err(|e| HarnessError::schema(origin, e.to_string().trim_end().to_string()))?;
    validate(&scenario, cap.unwrap_or(DEFAULT_DIM_CAP))
        .map_err(|m| HarnessError::schema(origin, m))?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path, cap: Option<usize>) -> Result<Scenario> {
    let text =
        std::fs::read_to_string(path).map_err(|e| HarnessError::io(PathBuf::from(path), e))?;
    parse_scenario(&text, path, cap)
}

fn positive(name: &str, x: f64) -> std::result::Result<(), String> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(format!(
            "field `{name}` must be positive and finite, got {x}"
        ))
    }
}

fn validate(s: &Scenario, cap: usize) -> std::result::Result<(), String> {
    if s.schema != SCHEMA {
        return Err(format!(
            "field `schema` must be \"{SCHEMA}\", got \"{}\"",
            s.schema
        ));
    }
    if s.id.is_empty()
        || !s
            .id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return Err("field `id` must be nonempty and use only [A-Za-z0-9_-]".into());
    }
    if let Some(out) = &s.output {
        if out.is_empty() || out.contains(['/', '\\']) {
            return Err("field `output` must be a bare file name".into());
        }
    }
    if s.kind.needs_model() {
        let model = s
            .model
            .as_ref()
            .ok_or_else(|| format!("kind `{}` requires a [model] table", s.kind.name()))?;
        let run = s
            .run
            .as_ref()
            .ok_or_else(|| format!("kind `{}` requires a [run] table", s.kind.name()))?;
        if model.builder == Builder::Random && model.site_dim == 0 {
            return Err("field `model.site_dim` must be at least 1".into());
        }
        if model.builder == Builder::BoseHubbard && model.lattice_size < 2 {
            return Err("field `model.lattice_size` must be at least 2".into());
        }
        if !(model.w_norm >= 0.0) || !(model.dephasing >= 0.0) {
            return Err("fields `model.w_norm` and `model.dephasing` must be nonnegative".into());
        }
        if run.particles == 0 {
            return Err("field `run.particles` must be at least 1".into());
        }
        positive("run.horizon", run.horizon)?;
        positive("run.dt", run.dt)?;
        positive("run.floor", run.floor)?;
        if run.stride == 0 {
            return Err("field `run.stride` must be at least 1".into());
        }
        let d = model.site_dim();
        if run.floor * d as f64 >= 1.0 {
            return Err(format!("field `run.floor` must be below 1/{d}"));
        }
        let dim = (d as u128).checked_pow(run.particles as u32);
        if dim.is_none_or(|n| n > cap as u128) {
            return Err(format!(
                "state space {d}^{} exceeds the dimension cap {cap}",
                run.particles
            ));
        }
    }
    if let Some(c) = &s.cancellation {
        if c.site_dims.is_empty()
            || c.site_dims.contains(&0)
            || c.max_particles < 2
            || c.max_order == 0
        {
            return Err(
                "[cancellation] needs site_dims ≥ 1, max_particles ≥ 2 and max_order ≥ 1".into(),
            );
        }
        for &d in &c.site_dims {
            let dim = (d as u128).checked_pow(c.max_particles as u32);
            if dim.is_none_or(|n| n > cap as u128) {
                return Err(format!(
                    "state space {d}^{} exceeds the dimension cap {cap}",
                    c.max_particles
                ));
            }
        }
    }
    if s.kind == Kind::VerifyIdentities {
        let ids = s
            .identities
            .as_ref()
            .ok_or("kind `verify-identities` requires an [identities] table")?;
        if ids.checks.is_empty() || ids.count == 0 {
            return Err("[identities] needs a nonempty `checks` list and count ≥ 1".into());
        }
    }
    if let Some(e) = &s.enumerate {
        if e.m_max == 0 || e.n_max == 0 || e.extra.iter().any(|&(m, n)| m == 0 || n == 0) {
            return Err("[enumerate] orders and particle numbers must be positive".into());
        }
    }
    if let Some(sc) = &s.semiclassical {
        sc.params()
            .validate()
            .map_err(|e| format!("[semiclassical]: {e}"))?;
        if sc.n_grid.is_empty() || sc.n_grid.iter().any(|&n| !(n > 1.0) || !n.is_finite()) {
            return Err("[semiclassical] `n_grid` entries must be finite and exceed 1".into());
        }
        if sc.monotonicity_samples < 2 {
            return Err("[semiclassical] `monotonicity_samples` must be at least 2".into());
        }
    }
    if let Some(q) = &s.quantization {
        if q.states == 0 || q.transport_pairs == 0 {
            return Err("[quantization] counts must be positive".into());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema = "qrelent/1"
id = "sim"
kind = "simulate"
seed = 3

[model]
builder = "random"

[run]
particles = 2
horizon = 0.1
"#;

    #[test]
    fn defaults_filled() {
        let s = parse_scenario(MINIMAL, Path::new("mem"), None).unwrap();
        assert_eq!(s.run().dt, 1e-3);
        assert_eq!(s.run().stride, 1);
        assert_eq!(s.model().site_dim, 2);
        assert_eq!(s.output_name(), "sim.csv");
        assert_eq!(s.tolerances, ToleranceSpec::default());
    }

    #[test]
    fn cap_enforced() {
        let text = MINIMAL.replace("particles = 2", "particles = 13");
        let err = parse_scenario(&text, Path::new("mem"), None).unwrap_err();
        assert!(err.to_string().contains("dimension cap"));
        assert!(parse_scenario(MINIMAL, Path::new("mem"), Some(3)).is_err());
    }

    #[test]
    fn wrong_schema() {
        let text = MINIMAL.replace("qrelent/1", "qrelent/0");
        assert!(parse_scenario(&text, Path::new("mem"), None).is_err());
    }
}
