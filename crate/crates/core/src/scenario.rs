//! Runtime bundle tying a noise family, an intensity model, a rate and a
//! realized common-noise path to one grid, plus builders for the standard
//! scenarios used by the CLI and the test suites.

use std::sync::Arc;

use crate::distributions::{three_mass_family, uniform_shifted_family, Drift, TimeIndexedCdf};
use crate::error::ModelError;
use crate::grid::{path_from_function, MonotonePath, StepPath, TimeGrid};
use crate::model::{AdditiveModel, IntensityModel, RateFunction};

#[derive(Clone)]
pub struct Scenario {
    pub cdf: Arc<dyn TimeIndexedCdf>,
    pub model: Arc<dyn IntensityModel>,
    pub rate: RateFunction,
    pub x_path: MonotonePath,
    /// Declares the first admissibility branch: positive interest integrable
    /// over the whole (conceptually infinite) horizon. Scenarios whose grid
    /// horizon genuinely ends the game may declare this to permit
    /// never-stopping agents.
    pub r_plus_integrable: bool,
}

impl Scenario {
    pub fn new(
        cdf: Arc<dyn TimeIndexedCdf>,
        model: Arc<dyn IntensityModel>,
        rate: RateFunction,
        x_path: MonotonePath,
        r_plus_integrable: bool,
    ) -> Result<Self, ModelError> {
        if x_path.dim() != model.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: model.dim(),
                got: x_path.dim(),
            });
        }
        Ok(Scenario {
            cdf,
            model,
            rate,
            x_path,
            r_plus_integrable,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.x_path.grid()
    }

    pub fn horizon(&self) -> f64 {
        self.grid().horizon()
    }

    pub fn rate_path(&self) -> StepPath {
        self.rate.sample_path(&self.x_path)
    }
}

fn zero_path(grid: &TimeGrid) -> MonotonePath {
    MonotonePath::scalar(grid.clone(), vec![0.0; grid.len()]).expect("constant path")
}

/// Pure idiosyncratic noise: uniform signal with linear growth, no common
/// noise. The equilibrium is `min(a(t) / (1 - c), 1)` for `c < 1`.
pub fn uniform_toy(r: f64, c: f64, horizon: f64, steps: usize) -> Result<Scenario, ModelError> {
    let grid = TimeGrid::uniform(horizon, steps)?;
    let cdf = uniform_shifted_family(r, Drift::new(|t| t).map_err(dist_err)?).map_err(dist_err)?;
    let model = AdditiveModel::new(c)?.with_strict_time(true);
    Scenario::new(
        Arc::new(cdf),
        Arc::new(model),
        RateFunction::constant(r)?,
        zero_path(&grid),
        false,
    )
}

/// Concentrated three-block signal with linear growth; the regime with
/// multiple equilibrium branches.
pub fn three_mass_scenario(
    eps: f64,
    c: f64,
    r: f64,
    horizon: f64,
    steps: usize,
) -> Result<Scenario, ModelError> {
    let grid = TimeGrid::uniform(horizon, steps)?;
    let cdf = three_mass_family(eps, Drift::new(|t| t).map_err(dist_err)?).map_err(dist_err)?;
    let model = AdditiveModel::new(c)?.with_strict_time(true);
    Scenario::new(
        Arc::new(cdf),
        Arc::new(model),
        RateFunction::constant(r)?,
        zero_path(&grid),
        false,
    )
}

/// Uniform signal frozen until `t_jump`, then pushed past every threshold:
/// everyone still in the game stops at `t_jump`. At the critical interaction
/// `c = 1` the pre-jump equation is tautological and any increasing path is
/// an equilibrium.
pub fn sunspot_horizon(
    c: f64,
    r: f64,
    t_jump: f64,
    horizon: f64,
    steps: usize,
) -> Result<Scenario, ModelError> {
    if !(t_jump > 0.0 && t_jump <= horizon) {
        return Err(ModelError::Invalid(format!(
            "jump time {t_jump} must lie in (0, horizon]"
        )));
    }
    let grid = TimeGrid::uniform(horizon, steps)?;
    let drift = Drift::new(move |t| if t < t_jump { 0.0 } else { 2.0 }).map_err(dist_err)?;
    let cdf = uniform_shifted_family(r, drift).map_err(dist_err)?;
    let model = AdditiveModel::new(c)?;
    Scenario::new(
        Arc::new(cdf),
        Arc::new(model),
        RateFunction::constant(r)?,
        zero_path(&grid),
        false,
    )
}

/// Uniform signal without drift plus a deterministic common-noise path
/// `X_t = min(t^2, 2)`. For `c < 1` the unique branch is
/// `min(X_t / (1 - c), 1)`.
pub fn common_noise_uniform(
    r: f64,
    c: f64,
    horizon: f64,
    steps: usize,
) -> Result<Scenario, ModelError> {
    let grid = TimeGrid::uniform(horizon, steps)?;
    let cdf = uniform_shifted_family(r, Drift::none()).map_err(dist_err)?;
    let model = AdditiveModel::new(c)?.with_strict_time(true);
    let x_path = path_from_function(|t| (t * t).min(2.0), &grid)?;
    Scenario::new(
        Arc::new(cdf),
        Arc::new(model),
        RateFunction::constant(r)?,
        x_path,
        false,
    )
}

fn dist_err(e: crate::error::DistributionError) -> ModelError {
    ModelError::Invalid(e.to_string())
}
