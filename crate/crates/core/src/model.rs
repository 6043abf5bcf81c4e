//! Intensity models, interest-rate functions and the integrability check.
//!
//! An intensity model supplies `g(t, x, y, u)` -- the perceived default
//! intensity given time, common signal `x`, private signal `y` and stopped
//! proportion `u` -- together with its inverse in `y`. Both must be
//! nondecreasing in every argument; the solver relies on this throughout.

use std::sync::Arc;

use crate::error::ModelError;
use crate::grid::{MonotonePath, StepPath};

pub trait IntensityModel: Send + Sync {
    /// The intensity `g(t, x, y, u)`.
    fn intensity(&self, t: f64, x: &[f64], y: f64, u: f64) -> f64;

    /// The private-signal level `y` with `g(t, x, y, u) = target`.
    /// Implementations may clamp to their declared y-bracket; clamping is
    /// harmless as long as the bracket contains the signal's support.
    fn inverse(&self, t: f64, x: &[f64], target: f64, u: f64) -> f64;

    /// Dimension of the common signal `x`.
    fn dim(&self) -> usize {
        1
    }

    /// Whether the intensity is strictly increasing in time along the
    /// scenario's driving paths. Declared, not inferred: it depends on the
    /// paths, not on `g` alone. Strictness makes the stopping rule the
    /// unique optimizer.
    fn strict_in_time(&self) -> bool {
        false
    }
}

/// `g(t, x, y, u) = x + y + c u` with scalar common noise.
#[derive(Clone, Debug)]
pub struct AdditiveModel {
    c: f64,
    strict_in_time: bool,
}

impl AdditiveModel {
    pub fn new(c: f64) -> Result<Self, ModelError> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(ModelError::Invalid(format!(
                "interaction strength c = {c} must be nonnegative"
            )));
        }
        Ok(AdditiveModel {
            c,
            strict_in_time: false,
        })
    }

    /// Declares that the scenario's driving paths are strictly increasing.
    pub fn with_strict_time(mut self, strict: bool) -> Self {
        self.strict_in_time = strict;
        self
    }

    pub fn interaction(&self) -> f64 {
        self.c
    }
}

impl IntensityModel for AdditiveModel {
    fn intensity(&self, _t: f64, x: &[f64], y: f64, u: f64) -> f64 {
        x[0] + y + self.c * u
    }

    fn inverse(&self, _t: f64, x: &[f64], target: f64, u: f64) -> f64 {
        target - x[0] - self.c * u
    }

    fn strict_in_time(&self) -> bool {
        self.strict_in_time
    }
}

/// Wraps a custom monotone intensity whose inverse has no closed form.
/// The inverse is computed by bisection in `y` over the declared bracket
/// (the signal's support hint extended by `margin`) to within 1e-12, and
/// clamps at the bracket endpoints when the target is out of range.
pub struct NumericInverseModel {
    g: Arc<dyn Fn(f64, &[f64], f64, f64) -> f64 + Send + Sync>,
    y_lo: f64,
    y_hi: f64,
    dim: usize,
    strict_in_time: bool,
}

const INVERSE_TOL: f64 = 1e-12;

impl NumericInverseModel {
    pub fn new(
        g: impl Fn(f64, &[f64], f64, f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
        margin: f64,
        dim: usize,
    ) -> Result<Self, ModelError> {
        if !(support.1 > support.0) || !(margin >= 0.0) {
            return Err(ModelError::Invalid(format!(
                "bad y bracket [{}, {}] with margin {margin}",
                support.0, support.1
            )));
        }
        if dim == 0 {
            return Err(ModelError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(NumericInverseModel {
            g: Arc::new(g),
            y_lo: support.0 - margin,
            y_hi: support.1 + margin,
            dim,
            strict_in_time: false,
        })
    }

    pub fn with_strict_time(mut self, strict: bool) -> Self {
        self.strict_in_time = strict;
        self
    }
}

impl IntensityModel for NumericInverseModel {
    fn intensity(&self, t: f64, x: &[f64], y: f64, u: f64) -> f64 {
        (self.g)(t, x, y, u)
    }

    fn inverse(&self, t: f64, x: &[f64], target: f64, u: f64) -> f64 {
        let (mut lo, mut hi) = (self.y_lo, self.y_hi);
        let f_lo = (self.g)(t, x, lo, u);
        if f_lo >= target {
            return lo;
        }
        if (self.g)(t, x, hi, u) <= target {
            return hi;
        }
        while hi - lo > INVERSE_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.g)(t, x, mid, u) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn strict_in_time(&self) -> bool {
        self.strict_in_time
    }
}

// ---------------------------------------------------------------------------
// Interest rate
// ---------------------------------------------------------------------------

/// Interest rate `r(t, x)`, nonincreasing in `t` and in each coordinate of
/// `x`. The built-in variants are structurally monotone; the time table is
/// validated at construction.
#[derive(Clone, Debug)]
pub enum RateFunction {
    Constant(f64),
    /// Step function of time only; values must be nonincreasing.
    TimeTable(StepPath),
}

impl RateFunction {
    pub fn constant(r: f64) -> Result<Self, ModelError> {
        if !r.is_finite() {
            return Err(ModelError::Invalid(format!("rate {r} must be finite")));
        }
        Ok(RateFunction::Constant(r))
    }

    pub fn time_table(path: StepPath) -> Result<Self, ModelError> {
        if path.dim() != 1 {
            return Err(ModelError::DimensionMismatch {
                expected: 1,
                got: path.dim(),
            });
        }
        for k in 1..path.grid().len() {
            if path.value(k) > path.value(k - 1) {
                return Err(ModelError::RateIncreases(k));
            }
        }
        Ok(RateFunction::TimeTable(path))
    }

    pub fn eval(&self, t: f64, _x: &[f64]) -> f64 {
        match self {
            RateFunction::Constant(r) => *r,
            RateFunction::TimeTable(path) => {
                let k = path.grid().step_index(t).unwrap_or(0);
                path.value(k)
            }
        }
    }

    /// Samples the rate along a common-noise path into a step path.
    pub fn sample_path(&self, x_path: &MonotonePath) -> StepPath {
        let grid = x_path.grid().clone();
        let values = grid
            .times()
            .iter()
            .enumerate()
            .map(|(k, &t)| self.eval(t, x_path.row(k)))
            .collect();
        StepPath::scalar(grid, values).expect("length matches by construction")
    }
}

// ---------------------------------------------------------------------------
// Integrability
// ---------------------------------------------------------------------------

/// Outcome of the admissibility check for one realized scenario path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrabilityReport {
    /// First grid time where `gamma - r >= 0`, infinite if none.
    pub first_crossing: f64,
    /// Whether the stopping problem is well posed: the crossing happens by
    /// the horizon, or positive interest was declared integrable.
    pub ok: bool,
}

/// Checks, along one realized path tuple, that the optimal stopping problem
/// has a finite solution: either `gamma - r` crosses zero by `horizon`, or
/// the scenario declares `r+` integrable. All paths must share one grid.
pub fn check_integrability(
    model: &dyn IntensityModel,
    rate: &RateFunction,
    x_path: &MonotonePath,
    y_path: &MonotonePath,
    rho_path: &MonotonePath,
    horizon: f64,
    r_plus_integrable: bool,
) -> Result<IntegrabilityReport, ModelError> {
    if x_path.grid() != y_path.grid() || x_path.grid() != rho_path.grid() {
        return Err(ModelError::GridMismatch);
    }
    if y_path.dim() != 1 || rho_path.dim() != 1 {
        return Err(ModelError::DimensionMismatch {
            expected: 1,
            got: y_path.dim().max(rho_path.dim()),
        });
    }
    let grid = x_path.grid();
    let mut first_crossing = f64::INFINITY;
    for (k, &t) in grid.times().iter().enumerate() {
        let x = x_path.row(k);
        let gamma = model.intensity(t, x, y_path.value(k), rho_path.value(k));
        if gamma - rate.eval(t, x) >= 0.0 {
            first_crossing = t;
            break;
        }
    }
    let ok = first_crossing <= horizon || r_plus_integrable;
    Ok(IntegrabilityReport { first_crossing, ok })
}
