//! Time grids and cadlag step paths.
//!
//! Every process in the crate lives on a shared, strictly increasing grid
//! `t_0 = 0 < t_1 < ... < t_K` and is a right-continuous step path: constant
//! on `[t_k, t_{k+1})`, with the last value extending beyond `t_K`. Integrals
//! over step paths are exact sums, and "evaluation at t" is unambiguous.

use std::sync::Arc;

use crate::error::ModelError;

/// Strictly increasing time grid starting at 0. Cheap to clone and share.
#[derive(Clone, Debug)]
pub struct TimeGrid(Arc<Vec<f64>>);

impl PartialEq for TimeGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self, ModelError> {
        if times.is_empty() {
            return Err(ModelError::BadGrid("grid is empty".into()));
        }
        if times[0] != 0.0 {
            return Err(ModelError::BadGrid(format!(
                "first grid time is {}, expected 0",
                times[0]
            )));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(ModelError::BadGrid(format!(
                    "times {} and {} are not strictly increasing",
                    w[0], w[1]
                )));
            }
        }
        Ok(TimeGrid(Arc::new(times)))
    }

    /// Uniform grid with `steps` intervals covering `[0, horizon]`.
    ///
    /// Nodes are computed as `horizon * k / steps` so the endpoints are exact.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self, ModelError> {
        if !(horizon > 0.0) || steps == 0 {
            return Err(ModelError::BadGrid(format!(
                "horizon {horizon} and steps {steps} must be positive"
            )));
        }
        let times = (0..=steps)
            .map(|k| horizon * k as f64 / steps as f64)
            .collect();
        TimeGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// Last grid time; doubles as the scenario horizon.
    pub fn horizon(&self) -> f64 {
        *self.0.last().unwrap()
    }

    /// Index of the step active at time `t`: the largest `k` with `t_k <= t`.
    /// Returns `None` for `t` before the grid start.
    pub fn step_index(&self, t: f64) -> Option<usize> {
        if t < self.0[0] {
            return None;
        }
        Some(match self.0.partition_point(|&s| s <= t) {
            0 => 0,
            p => p - 1,
        })
    }
}

/// Right-continuous step path on a [`TimeGrid`], scalar or `dim`-vector valued.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPath {
    grid: TimeGrid,
    dim: usize,
    data: Vec<f64>,
}

impl StepPath {
    pub fn scalar(grid: TimeGrid, values: Vec<f64>) -> Result<Self, ModelError> {
        StepPath::vector(grid, 1, values)
    }

    /// Row-major data: `data[k * dim + j]` is component `j` at grid index `k`.
    pub fn vector(grid: TimeGrid, dim: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if data.len() != grid.len() * dim {
            return Err(ModelError::LengthMismatch {
                expected: grid.len() * dim,
                got: data.len() / dim,
            });
        }
        Ok(StepPath { grid, dim, data })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let data = grid.times().iter().map(|&t| f(t)).collect();
        StepPath { grid, dim: 1, data }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    /// First component at grid index `k` (the whole value for scalar paths).
    pub fn value(&self, k: usize) -> f64 {
        self.data[k * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// Cadlag evaluation: value of the step active at `t`.
    pub fn at(&self, t: f64) -> &[f64] {
        let k = self.grid.step_index(t).unwrap_or(0);
        self.row(k)
    }
}

/// Step path with componentwise nondecreasing values.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonePath(StepPath);

impl MonotonePath {
    pub fn new(path: StepPath) -> Result<Self, ModelError> {
        let dim = path.dim;
        for k in 1..path.grid.len() {
            for j in 0..dim {
                if path.data[k * dim + j] < path.data[(k - 1) * dim + j] {
                    return Err(ModelError::NotMonotone {
                        index: k,
                        component: j,
                    });
                }
            }
        }
        Ok(MonotonePath(path))
    }

    pub fn scalar(grid: TimeGrid, values: Vec<f64>) -> Result<Self, ModelError> {
        MonotonePath::new(StepPath::scalar(grid, values)?)
    }

    pub fn vector(grid: TimeGrid, dim: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        MonotonePath::new(StepPath::vector(grid, dim, data)?)
    }

    pub fn as_step(&self) -> &StepPath {
        &self.0
    }

    pub fn grid(&self) -> &TimeGrid {
        self.0.grid()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        self.0.row(k)
    }

    pub fn value(&self, k: usize) -> f64 {
        self.0.value(k)
    }

    pub fn values(&self) -> &[f64] {
        self.0.values()
    }

    pub fn at(&self, t: f64) -> &[f64] {
        self.0.at(t)
    }
}

/// Samples a nondecreasing function at the grid points.
///
/// Rejects functions that decrease anywhere on the grid.
pub fn path_from_function(
    f: impl Fn(f64) -> f64,
    grid: &TimeGrid,
) -> Result<MonotonePath, ModelError> {
    let values: Vec<f64> = grid.times().iter().map(|&t| f(t)).collect();
    MonotonePath::scalar(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_hits_endpoints_exactly() {
        let g = TimeGrid::uniform(1.0, 10).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.t(0), 0.0);
        assert_eq!(g.t(3), 0.3);
        assert_eq!(g.horizon(), 1.0);
    }

    #[test]
    fn grid_must_start_at_zero_and_increase() {
        assert!(TimeGrid::new(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.2, 0.2]).is_err());
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn step_index_is_cadlag() {
        let g = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(g.step_index(0.0), Some(0));
        assert_eq!(g.step_index(0.49), Some(0));
        assert_eq!(g.step_index(0.5), Some(1));
        assert_eq!(g.step_index(2.0), Some(2));
        assert_eq!(g.step_index(-0.1), None);
    }

    #[test]
    fn path_from_function_samples_grid() {
        let g = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        let p = path_from_function(|t| t, &g).unwrap();
        assert_eq!(p.values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn path_from_function_accepts_capped_monotone() {
        let g = TimeGrid::uniform(4.0, 8).unwrap();
        assert!(path_from_function(|t| (0.5 + t).min(2.0), &g).is_ok());
    }

    #[test]
    fn path_from_function_rejects_decreasing() {
        let g = TimeGrid::new(vec![0.0, 2.0, 4.0]).unwrap();
        let err = path_from_function(|t| t.sin(), &g).unwrap_err();
        assert!(matches!(err, ModelError::NotMonotone { .. }));
    }

    #[test]
    fn vector_path_checks_componentwise() {
        let g = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        assert!(MonotonePath::vector(g.clone(), 2, vec![0.0, 1.0, 1.0, 0.5]).is_err());
        assert!(MonotonePath::vector(g, 2, vec![0.0, 1.0, 1.0, 1.0]).is_ok());
    }
}
