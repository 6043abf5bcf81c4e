//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while constructing or validating c.d.f. families.
#[derive(Debug, Error)]
pub enum DistributionError {
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
    #[error("drift function must be nondecreasing with a(0) = 0: {0}")]
    NonMonotoneDrift(String),
    #[error("cdf values must be nondecreasing in y: row t[{t_index}], columns y[{y_index}] > y[{}]", y_index + 1)]
    NotMonotoneInY { t_index: usize, y_index: usize },
    #[error("cdf values must be nonincreasing in t: column y[{y_index}], rows t[{t_index}] < t[{}]", t_index + 1)]
    NotMonotoneInT { t_index: usize, y_index: usize },
    #[error("cdf value out of [0, 1] at t[{t_index}], y[{y_index}]: {value}")]
    ValueOutOfRange {
        t_index: usize,
        y_index: usize,
        value: f64,
    },
    #[error("grid must be strictly increasing and have at least {min} entries: {what}")]
    DegenerateGrid { what: String, min: usize },
    #[error("distribution has an atom-like concentration near y = {y}: mass {mass:.3e} within width 1e-6")]
    AtomDetected { y: f64, mass: f64 },
    #[error("table edges must span the full range: first column must be 0 and last column 1 (got {lo} and {hi} at t[{t_index}])")]
    IncompleteRange { t_index: usize, lo: f64, hi: f64 },
    #[error("failed to read cdf table: {0}")]
    Io(String),
}

/// Errors from paths, grids and intensity models.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("time grid must start at 0 and be strictly increasing ({0})")]
    BadGrid(String),
    #[error("path values must be nondecreasing: index {index}, component {component}")]
    NotMonotone { index: usize, component: usize },
    #[error("path length {got} does not match grid length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("paths are defined on different grids")]
    GridMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rate values must be nonincreasing in t: index {0}")]
    RateIncreases(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Errors from the fixed-point solver and curve construction.
#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("u-grid resolution must be at least 64 (got {0})")]
    ResolutionTooLow(usize),
    #[error("broken cdf/model contract at t={t}: G(0)={g0:.3e} must be <= 0 and G(1)={g1:.3e} must be >= 0")]
    BrokenContract { t: f64, g0: f64, g1: f64 },
    #[error("root refinement stalled at u={u} with |G|={residual:.3e} > tol_root")]
    RefinementStalled { u: f64, residual: f64 },
    #[error("selected branch decreases at grid index {index}: {prev} -> {next}")]
    NonMonotoneBranch { index: usize, prev: f64, next: f64 },
    #[error("branch index {index} out of range ({available} candidates at t={t})")]
    BranchIndexOutOfRange {
        index: usize,
        available: usize,
        t: f64,
    },
    #[error("curves are on different grids")]
    GridMismatch,
    #[error("maximal curve is below minimal curve at grid index {0}")]
    CurvesOutOfOrder(usize),
    #[error("switch time {0} is not a grid time")]
    SwitchNotOnGrid(f64),
    #[error("density unavailable for this family; uniqueness diagnostic skipped")]
    DensityUnavailable,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from the single-agent layer.
#[derive(Debug, Error)]
pub enum AgentError {
    #[error("intensity must be nonnegative: gamma[{index}] = {value}")]
    NegativeIntensity { index: usize, value: f64 },
    #[error("gamma - r must be nondecreasing along the grid: index {0}")]
    NotMonotone(usize),
    #[error("exp variate must be positive (got {0})")]
    BadExpVariate(f64),
    #[error("stopping time is infinite and r+ was not declared integrable")]
    UndeclaredInfiniteStop,
    #[error("stopping time {tau} exceeds horizon {horizon}")]
    BeyondHorizon { tau: f64, horizon: f64 },
    #[error("optimality contract violated: alternative payoff exceeds the rule's by {gap:.3e}")]
    OptimalityViolated { gap: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from the finite-n population simulator.
#[derive(Debug, Error)]
pub enum PopulationError {
    #[error("population must have at least one agent")]
    EmptyPopulation,
    #[error("integrability check failed for agent {agent}: no crossing by the horizon and r+ not declared integrable")]
    Integrability { agent: usize },
    #[error("candidate path must take values in [0, 1]: index {index}, value {value}")]
    CandidateOutOfRange { index: usize, value: f64 },
    #[error("audit sample size {sample} exceeds population size {n}")]
    SampleTooLarge { sample: usize, n: usize },
    #[error("interest rate must be positive for the sunspot game (got {0})")]
    NonPositiveRate(f64),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}
