//! Solver and simulator for mean-field games of optimal stopping.
//!
//! A continuum of agents each holds a defaultable claim paying interest `r`
//! until a Cox-process default with intensity `gamma`. Intensities grow with
//! time, a common signal `X`, a private signal `Y` and the fraction `rho` of
//! agents that have already stopped, so each agent's optimal rule is "leave
//! as soon as `gamma - r >= 0`" and equilibrium proportions are exactly the
//! zeros of
//!
//! ```text
//! 1 - u = F_t(g^{-1}(t, x, r, u)),        u in [0, 1],
//! ```
//!
//! where `F_t` is the c.d.f. of the private signal. The crate solves this
//! equation for all branches ([`equilibrium`]), evaluates single agents
//! exactly through the adjusted-rate identity ([`agent`]), and verifies
//! candidate equilibria by reproducible finite-n Monte Carlo
//! ([`population`]).

pub mod agent;
pub mod distributions;
pub mod equilibrium;
pub mod error;
pub mod grid;
pub mod model;
pub mod population;
pub mod scenario;

pub use agent::{default_time, AgentProblem, OptimalityReport};
pub use distributions::{
    cdf_from_csv, cdf_from_table, three_mass_family, uniform_shifted_family, Drift,
    PiecewiseLinearCdf, ShiftedFamily, TableCdf, TimeIndexedCdf,
};
pub use equilibrium::{
    build_curve, fixed_point_gap, global_uniqueness_bound, randomized_switch, solve_all,
    uniqueness_diagnostic, BranchPolicy, EquilibriumCurve, SolutionSet, SolverOptions,
    UniquenessReport,
};
pub use error::{AgentError, DistributionError, EquilibriumError, ModelError, PopulationError};
pub use grid::{path_from_function, MonotonePath, StepPath, TimeGrid};
pub use model::{
    check_integrability, AdditiveModel, IntegrabilityReport, IntensityModel, NumericInverseModel,
    RateFunction,
};
pub use population::{
    fixed_point_residual, payoff_audit, payoff_audit_with_behavior, simulate, sunspot_game,
    AuditReport, PopulationConfig, PopulationResult, SunspotGame,
};
pub use scenario::{
    common_noise_uniform, sunspot_horizon, three_mass_scenario, uniform_toy, Scenario,
};
