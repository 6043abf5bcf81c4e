//! Single-agent layer: the threshold stopping rule, the Cox default time,
//! and payoff evaluation through the adjusted-rate identity.
//!
//! Conditioning away the default indicator turns the defaultable reward into
//! `exp(integral of (r - gamma))`, which we evaluate exactly over the step
//! paths. The rule "stop as soon as `gamma - r >= 0`" maximizes that
//! expression when `gamma - r` is nondecreasing; `optimality_check` verifies
//! this against exhaustive grid enumeration and is the regression oracle for
//! everything built on top.
//!
//! All stopping times live on the scenario grid. A crossing strictly inside
//! a step is attributed to the step's left endpoint, per the cadlag
//! convention. Infinite times are represented by `f64::INFINITY`.

use crate::error::AgentError;
use crate::grid::{MonotonePath, StepPath};

/// Tolerance on the optimality gap; a larger gap means the monotonicity
/// contract was broken upstream.
pub const OPTIMALITY_TOL: f64 = 1e-12;

/// One agent's realized stopping problem along a scenario path.
#[derive(Clone, Debug)]
pub struct AgentProblem<'a> {
    gamma: MonotonePath,
    rate: &'a StepPath,
    r_plus_integrable: bool,
}

impl<'a> AgentProblem<'a> {
    /// Validates the problem: shared grid, nonnegative intensity, and
    /// `gamma - r` nondecreasing along the grid.
    pub fn new(
        gamma: MonotonePath,
        rate: &'a StepPath,
        r_plus_integrable: bool,
    ) -> Result<Self, AgentError> {
        if gamma.grid() != rate.grid() {
            return Err(AgentError::Model(crate::error::ModelError::GridMismatch));
        }
        if gamma.dim() != 1 || rate.dim() != 1 {
            return Err(AgentError::Model(
                crate::error::ModelError::DimensionMismatch {
                    expected: 1,
                    got: gamma.dim().max(rate.dim()),
                },
            ));
        }
        let mut prev = f64::NEG_INFINITY;
        for k in 0..gamma.grid().len() {
            let g = gamma.value(k);
            if g < 0.0 {
                return Err(AgentError::NegativeIntensity { index: k, value: g });
            }
            let excess = g - rate.value(k);
            if excess < prev {
                return Err(AgentError::NotMonotone(k));
            }
            prev = excess;
        }
        Ok(AgentProblem {
            gamma,
            rate,
            r_plus_integrable,
        })
    }

    pub fn gamma(&self) -> &MonotonePath {
        &self.gamma
    }

    pub fn horizon(&self) -> f64 {
        self.gamma.grid().horizon()
    }

    /// First grid time with `gamma - r >= 0`, infinite if none by the
    /// horizon.
    pub fn stopping_time(&self) -> f64 {
        match self.stopping_index() {
            Some(k) => self.gamma.grid().t(k),
            None => f64::INFINITY,
        }
    }

    pub fn stopping_index(&self) -> Option<usize> {
        (0..self.gamma.grid().len()).find(|&k| self.gamma.value(k) - self.rate.value(k) >= 0.0)
    }

    /// Integral of `r - gamma` from 0 to each grid node, exact over steps.
    fn adjusted_prefix(&self) -> Vec<f64> {
        let grid = self.gamma.grid();
        let mut acc = 0.0;
        let mut prefix = Vec::with_capacity(grid.len());
        prefix.push(0.0);
        for k in 0..grid.len() - 1 {
            acc += (self.rate.value(k) - self.gamma.value(k)) * (grid.t(k + 1) - grid.t(k));
            prefix.push(acc);
        }
        prefix
    }

    /// Expected reward of stopping at `tau`: `exp(integral_0^tau (r - gamma))`.
    ///
    /// This is exact for a stopping time that is deterministic given the
    /// path, so it serves as the variance-free evaluation everywhere; the
    /// raw indicator form exists only as a Monte Carlo oracle in tests.
    ///
    /// `tau = infinity` is allowed only when positive interest was declared
    /// integrable; the integral is then truncated at the horizon.
    pub fn payoff(&self, tau: f64) -> Result<f64, AgentError> {
        let grid = self.gamma.grid();
        if tau.is_infinite() {
            if !self.r_plus_integrable {
                return Err(AgentError::UndeclaredInfiniteStop);
            }
            return Ok(self.adjusted_prefix().last().unwrap().exp());
        }
        if tau > grid.horizon() || tau < 0.0 {
            return Err(AgentError::BeyondHorizon {
                tau,
                horizon: grid.horizon(),
            });
        }
        let k = grid.step_index(tau).unwrap();
        let prefix = self.adjusted_prefix();
        let partial = (self.rate.value(k) - self.gamma.value(k)) * (tau - grid.t(k));
        Ok((prefix[k] + partial).exp())
    }

    /// Compares the rule's stopping time against every grid alternative.
    ///
    /// Returns the worst shortfall (clamped at zero); a shortfall beyond
    /// [`OPTIMALITY_TOL`] is a contract violation and comes back as an
    /// error. Also reports whether the rule picked the earliest maximizer
    /// (vacuously true when the rule never stops) and whether strict
    /// increase of `gamma - r` makes that maximizer unique.
    pub fn optimality_check(&self) -> Result<OptimalityReport, AgentError> {
        let grid = self.gamma.grid();
        let prefix = self.adjusted_prefix();
        let stop_idx = self.stopping_index();
        let log_star = match stop_idx {
            Some(k) => prefix[k],
            None => {
                if !self.r_plus_integrable {
                    return Err(AgentError::UndeclaredInfiniteStop);
                }
                *prefix.last().unwrap()
            }
        };
        let payoff_star = log_star.exp();

        let mut best = f64::NEG_INFINITY;
        let mut best_idx = 0;
        for (k, &s) in prefix.iter().enumerate() {
            if s > best {
                best = s;
                best_idx = k;
            }
        }
        let gap = (best.exp() - payoff_star).max(0.0);
        if gap > OPTIMALITY_TOL {
            return Err(AgentError::OptimalityViolated { gap });
        }

        let earliest_optimal = match stop_idx {
            Some(k) => best_idx == k,
            None => true,
        };
        let strictly_increasing = (1..grid.len()).all(|k| {
            self.gamma.value(k) - self.rate.value(k)
                > self.gamma.value(k - 1) - self.rate.value(k - 1)
        });
        Ok(OptimalityReport {
            tau_star: self.stopping_time(),
            best_alternative_gap: gap,
            earliest_optimal,
            unique_optimal: earliest_optimal && strictly_increasing && stop_idx.is_some(),
        })
    }

    /// Shortfall of stopping at `tau` against the best grid alternative,
    /// clamped at zero. Zero for the rule's own stopping time; positive when
    /// `tau` came from a different (mis-specified) intensity path, which is
    /// what the population audit exploits.
    pub fn payoff_shortfall(&self, tau: f64) -> Result<f64, AgentError> {
        let prefix = self.adjusted_prefix();
        let best = prefix.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((best.exp() - self.payoff(tau)?).max(0.0))
    }

    /// Default time for a given exponential draw; see [`default_time`].
    pub fn default_time(&self, exp_variate: f64) -> Result<f64, AgentError> {
        default_time(&self.gamma, exp_variate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalityReport {
    pub tau_star: f64,
    /// Best alternative payoff minus the rule's payoff, clamped at zero.
    pub best_alternative_gap: f64,
    /// The rule stopped at the earliest grid maximizer.
    pub earliest_optimal: bool,
    /// Strict increase of `gamma - r` made the maximizer unique.
    pub unique_optimal: bool,
}

/// First time the cumulative hazard of `gamma` reaches `exp_variate`:
/// the jump of a Cox process with this intensity. The hazard is summed
/// exactly over steps and inverted linearly inside the crossing step;
/// infinite if the total hazard by the horizon falls short.
pub fn default_time(gamma: &MonotonePath, exp_variate: f64) -> Result<f64, AgentError> {
    if !(exp_variate > 0.0) {
        return Err(AgentError::BadExpVariate(exp_variate));
    }
    let grid = gamma.grid();
    let mut hazard = 0.0;
    for k in 0..grid.len() - 1 {
        let g = gamma.value(k);
        let dt = grid.t(k + 1) - grid.t(k);
        let next = hazard + g * dt;
        if next >= exp_variate {
            return Ok(grid.t(k) + (exp_variate - hazard) / g);
        }
        hazard = next;
    }
    Ok(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    fn scalar_path(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> MonotonePath {
        MonotonePath::scalar(grid.clone(), grid.times().iter().map(|&t| f(t)).collect()).unwrap()
    }

    fn const_rate(grid: &TimeGrid, r: f64) -> StepPath {
        StepPath::scalar(grid.clone(), vec![r; grid.len()]).unwrap()
    }

    #[test]
    fn sunspot_agent_stops_at_its_index() {
        // gamma = (r - i + rho_t) with rho_t = X_t = t: crossing at t = i
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let rate = const_rate(&grid, 1.0);
        for j in 1..=10usize {
            let i = j as f64 / 10.0;
            let gamma = scalar_path(&grid, |t| (1.0 - i + t.min(1.0)).max(0.0));
            let p = AgentProblem::new(gamma, &rate, false).unwrap();
            assert_eq!(p.stopping_time(), i, "agent {i}");
        }
    }

    #[test]
    fn stopping_boundary_cases() {
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let rate = const_rate(&grid, 1.0);

        let at_rate = scalar_path(&grid, |_| 1.0);
        assert_eq!(
            AgentProblem::new(at_rate, &rate, false)
                .unwrap()
                .stopping_time(),
            0.0
        );

        let below = scalar_path(&grid, |_| 0.0);
        let p = AgentProblem::new(below, &rate, true).unwrap();
        assert!(p.stopping_time().is_infinite());
    }

    #[test]
    fn default_time_inverts_hazard() {
        let grid = TimeGrid::uniform(2.0, 20).unwrap();
        let unit = scalar_path(&grid, |_| 1.0);
        assert!((default_time(&unit, 0.7).unwrap() - 0.7).abs() < 1e-15);

        let none = scalar_path(&grid, |_| 0.0);
        assert!(default_time(&none, 0.5).unwrap().is_infinite());

        // 0 on [0,1), 2 on [1,2): hazard hits 1 at t = 1.5
        let grid2 = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let step = MonotonePath::scalar(grid2, vec![0.0, 2.0, 2.0]).unwrap();
        assert!((default_time(&step, 1.0).unwrap() - 1.5).abs() < 1e-15);

        assert!(default_time(&unit, 0.0).is_err());
    }

    #[test]
    fn payoff_constant_integrand() {
        let grid = TimeGrid::uniform(1.0, 100).unwrap();
        let rate = const_rate(&grid, 1.5);
        let gamma = scalar_path(&grid, |_| 0.5);
        let p = AgentProblem::new(gamma, &rate, true).unwrap();
        for tau in [0.0_f64, 0.25, 0.8, 1.0] {
            let expected = ((1.5 - 0.5) * tau).exp();
            assert!((p.payoff(tau).unwrap() - expected).abs() <= 1e-12);
        }
        assert_eq!(p.payoff(0.0).unwrap(), 1.0);
    }

    #[test]
    fn immediate_crossing_makes_waiting_costly() {
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let rate = const_rate(&grid, 1.0);
        let gamma = scalar_path(&grid, |t| 1.5 + t);
        let p = AgentProblem::new(gamma, &rate, false).unwrap();
        assert_eq!(p.stopping_time(), 0.0);
        let p0 = p.payoff(0.0).unwrap();
        for k in 1..=10 {
            assert!(p.payoff(k as f64 / 10.0).unwrap() < p0);
        }
    }

    #[test]
    fn infinite_tau_requires_declaration() {
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let rate = const_rate(&grid, 1.0);
        let gamma = scalar_path(&grid, |_| 0.0);
        let p = AgentProblem::new(gamma.clone(), &rate, false).unwrap();
        assert!(matches!(
            p.payoff(f64::INFINITY),
            Err(AgentError::UndeclaredInfiniteStop)
        ));
        let declared = AgentProblem::new(gamma, &rate, true).unwrap();
        assert!(declared.payoff(f64::INFINITY).is_ok());
    }

    #[test]
    fn rule_beats_every_grid_alternative() {
        let grid = TimeGrid::uniform(2.0, 40).unwrap();
        let rate = const_rate(&grid, 1.0);
        let gamma = scalar_path(&grid, |t| 0.3 + 0.9 * t);
        let p = AgentProblem::new(gamma, &rate, false).unwrap();
        let report = p.optimality_check().unwrap();
        assert!(report.best_alternative_gap <= OPTIMALITY_TOL);
        assert!(report.earliest_optimal);
        assert!(report.unique_optimal);
    }

    #[test]
    fn strictly_increasing_crossing_at_expected_time() {
        // gamma - r crosses zero at exactly t = 0.4; exhaustive enumeration
        // must agree that 0.4 is the unique argmax
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let rate = const_rate(&grid, 1.0);
        let gamma = scalar_path(&grid, |t| 0.6 + t);
        let p = AgentProblem::new(gamma, &rate, false).unwrap();
        assert!((p.stopping_time() - 0.4).abs() < 1e-15);

        let mut best = (f64::NEG_INFINITY, 0.0);
        for &t in grid.times() {
            let v = p.payoff(t).unwrap();
            if v > best.0 {
                best = (v, t);
            }
        }
        assert_eq!(best.1, p.stopping_time());
        assert!(p.optimality_check().unwrap().unique_optimal);
    }

    #[test]
    fn flat_excess_ties_resolve_to_time_zero() {
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let rate = const_rate(&grid, 1.0);
        let gamma = scalar_path(&grid, |_| 1.0);
        let p = AgentProblem::new(gamma, &rate, false).unwrap();
        let report = p.optimality_check().unwrap();
        assert_eq!(report.tau_star, 0.0);
        assert_eq!(report.best_alternative_gap, 0.0);
        assert!(report.earliest_optimal);
        assert!(!report.unique_optimal);
    }

    #[test]
    fn problem_validation_rejects_broken_inputs() {
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let rate = const_rate(&grid, 1.0);
        // negative intensity
        let neg = MonotonePath::scalar(grid.clone(), vec![-0.5, 0.0, 0.5, 1.0, 1.5]).unwrap();
        assert!(matches!(
            AgentProblem::new(neg, &rate, false),
            Err(AgentError::NegativeIntensity { index: 0, .. })
        ));
        // gamma - r decreasing (rate grows while gamma is flat)
        let growing = StepPath::scalar(grid.clone(), vec![0.0, 0.5, 1.0, 1.5, 2.0]).unwrap();
        let flat = MonotonePath::scalar(grid, vec![1.0; 5]).unwrap();
        assert!(matches!(
            AgentProblem::new(flat, &growing, false),
            Err(AgentError::NotMonotone(1))
        ));
    }
}
