use alloc::string::String;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("not Hermitian: defect {defect:e} exceeds tolerance {tolerance:e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("eigensolver did not converge (residual {residual:e})")]
    EigenNoConvergence { residual: f64 },

    #[error("eigenvalue {eigenvalue:e} lies at or below the domain floor {floor:e}")]
    Domain { eigenvalue: f64, floor: f64 },

    #[error("quadrature not converged with {nodes} nodes (doubling defect {defect:e})")]
    Convergence { nodes: usize, defect: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("total dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("state is not permutation symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },

    #[error("positivity lost at t = {time}: minimum eigenvalue {min_eigenvalue:e}")]
    Positivity { time: f64, min_eigenvalue: f64 },

    #[error("trace drift {drift:e} at t = {time}")]
    TraceDrift { time: f64, drift: f64 },

    #[error("relative entropy is infinite (mass {mass:e} on the reference kernel)")]
    InfiniteEntropy { mass: f64 },

    #[error("internal consistency check failed: {what} (defect {defect:e})")]
    Consistency { what: &'static str, defect: f64 },

    #[error(
        "coherent state truncation tail {tail:e} exceeds {tolerance:e}; raise the Fourier cutoff"
    )]
    Truncation { tail: f64, tolerance: f64 },

    #[error("transport problem infeasible: masses {source_mass} vs {target_mass}")]
    Infeasible { source_mass: f64, target_mass: f64 },

    #[error("transport simplex exceeded {iterations} pivots")]
    PivotLimit { iterations: usize },

    #[error("no sign change of f - g in [{lo:e}, {hi:e}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("search space {size} exceeds the enumeration cap {cap}")]
    SearchSpace { size: u128, cap: u128 },

    #[error("geometric series with ratio {ratio} does not converge")]
    Divergent { ratio: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
