//! Finite-n Monte Carlo population: the computable stand-in for the
//! continuum of agents.
//!
//! Each agent owns a counter-based random stream derived from
//! `(master_seed, agent index)`, so its draws depend neither on the
//! population size nor on scheduling. The agent loop is data-parallel with
//! no shared mutable state and aggregation runs in fixed agent order, which
//! makes results bitwise identical across worker counts.
//!
//! Private signal paths use the quantile coupling: one uniform draw `U` per
//! agent and `Y_t = F_t^{-1}(U)`, which for drifted families reduces to
//! `Y_t = U' + a(t)` with `U'` distributed by the base law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agent::AgentProblem;
use crate::equilibrium::EquilibriumCurve;
use crate::error::PopulationError;
use crate::grid::{MonotonePath, StepPath, TimeGrid};
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug)]
pub struct PopulationConfig {
    pub n_agents: usize,
    pub master_seed: u64,
}

#[derive(Clone, Debug)]
pub struct PopulationResult {
    /// Per-agent stopping time, infinite when the agent never stops.
    pub stopping_times: Vec<f64>,
    /// Per-agent uniform draw behind the private signal (the risk index for
    /// the sunspot game, which has no randomness).
    pub uniform_draws: Vec<f64>,
    /// Fraction of agents stopped by each grid time.
    pub empirical_path: Vec<f64>,
    /// `sup_t |empirical - selected|`, the fixed-point defect.
    pub sup_residual: f64,
    /// Per-agent optimality shortfall against grid enumeration.
    pub payoff_gaps: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct AuditReport {
    pub worst_gap: f64,
    pub worst_agent: usize,
    pub sampled: usize,
}

/// The uniform variate behind agent `index`.
fn agent_draw(master_seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng.r#gen()
}

struct AgentOutcome {
    draw: f64,
    tau: f64,
    stop_index: Option<usize>,
    gap: f64,
}

/// Cumulative max; scrubs sub-epsilon float dips from branch selections so
/// downstream monotone validation stays exact.
fn cummax(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut run = f64::NEG_INFINITY;
    for &v in values {
        run = run.max(v);
        out.push(run);
    }
    out
}

fn agent_outcome(
    scn: &Scenario,
    rate_path: &StepPath,
    rho_eval: &[f64],
    rho_behavior: &[f64],
    index: usize,
    master_seed: u64,
) -> Result<AgentOutcome, PopulationError> {
    let grid = scn.grid();
    let draw = agent_draw(master_seed, index);

    let signal = cummax(
        &grid
            .times()
            .iter()
            .map(|&t| scn.cdf.sample(t, draw))
            .collect::<Vec<f64>>(),
    );
    let intensity = |rho: &[f64], k: usize| {
        scn.model
            .intensity(grid.t(k), scn.x_path.row(k), signal[k], rho[k])
    };

    let gamma_eval: Vec<f64> = (0..grid.len()).map(|k| intensity(rho_eval, k)).collect();
    let problem = AgentProblem::new(
        MonotonePath::scalar(grid.clone(), gamma_eval)?,
        rate_path,
        scn.r_plus_integrable,
    )
    .map_err(PopulationError::Agent)?;

    let stop_index = if std::ptr::eq(rho_eval, rho_behavior) {
        problem.stopping_index()
    } else {
        (0..grid.len()).find(|&k| intensity(rho_behavior, k) - rate_path.value(k) >= 0.0)
    };
    if stop_index.is_none() && !scn.r_plus_integrable {
        return Err(PopulationError::Integrability { agent: index });
    }
    let tau = stop_index.map_or(f64::INFINITY, |k| grid.t(k));
    let gap = problem.payoff_shortfall(tau)?;
    Ok(AgentOutcome {
        draw,
        tau,
        stop_index,
        gap,
    })
}

fn run_population(
    scn: &Scenario,
    cfg: &PopulationConfig,
    rho: &[f64],
) -> Result<PopulationResult, PopulationError> {
    if cfg.n_agents == 0 {
        return Err(PopulationError::EmptyPopulation);
    }
    let grid = scn.grid();
    let rho = cummax(rho);
    let rate_path = scn.rate_path();

    let outcomes: Vec<AgentOutcome> = (0..cfg.n_agents)
        .into_par_iter()
        .map(|i| agent_outcome(scn, &rate_path, &rho, &rho, i, cfg.master_seed))
        .collect::<Result<_, _>>()?;

    Ok(assemble(grid, &rho, outcomes))
}

fn assemble(grid: &TimeGrid, rho: &[f64], outcomes: Vec<AgentOutcome>) -> PopulationResult {
    let n = outcomes.len();
    let mut counts = vec![0usize; grid.len()];
    for o in &outcomes {
        if let Some(k) = o.stop_index {
            counts[k] += 1;
        }
    }
    let mut empirical = Vec::with_capacity(grid.len());
    let mut acc = 0usize;
    for &c in &counts {
        acc += c;
        empirical.push(acc as f64 / n as f64);
    }
    let sup_residual = empirical
        .iter()
        .zip(rho)
        .map(|(e, r)| (e - r).abs())
        .fold(0.0, f64::max);
    PopulationResult {
        stopping_times: outcomes.iter().map(|o| o.tau).collect(),
        uniform_draws: outcomes.iter().map(|o| o.draw).collect(),
        empirical_path: empirical,
        sup_residual,
        payoff_gaps: outcomes.into_iter().map(|o| o.gap).collect(),
    }
}

/// Simulates the population best-responding to the curve's selected branch
/// and measures how closely the realized stopped fraction tracks it.
pub fn simulate(
    scn: &Scenario,
    cfg: &PopulationConfig,
    curve: &EquilibriumCurve,
) -> Result<PopulationResult, PopulationError> {
    if curve.grid() != scn.grid() {
        return Err(PopulationError::Model(
            crate::error::ModelError::GridMismatch,
        ));
    }
    run_population(scn, cfg, curve.selected())
}

/// Residual of an explicit candidate proportion path: agents best-respond to
/// the candidate and the sup-distance between the realized fraction and the
/// candidate comes back. Small residuals certify an (approximate)
/// equilibrium; non-solutions stay bounded away from zero as n grows.
pub fn fixed_point_residual(
    scn: &Scenario,
    cfg: &PopulationConfig,
    candidate: &MonotonePath,
) -> Result<f64, PopulationError> {
    if candidate.grid() != scn.grid() {
        return Err(PopulationError::Model(
            crate::error::ModelError::GridMismatch,
        ));
    }
    for (k, &v) in candidate.values().iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(PopulationError::CandidateOutOfRange { index: k, value: v });
        }
    }
    Ok(run_population(scn, cfg, candidate.values())?.sup_residual)
}

/// Re-derives a deterministic sample of agents and returns the worst
/// optimality shortfall. Gaps beyond [`crate::agent::OPTIMALITY_TOL`] mean
/// the published curve and the agents' behavior are inconsistent.
pub fn payoff_audit(
    scn: &Scenario,
    cfg: &PopulationConfig,
    curve: &EquilibriumCurve,
    sample_size: usize,
) -> Result<AuditReport, PopulationError> {
    let selected = cummax(curve.selected());
    audit_inner(scn, cfg, &selected, &selected, sample_size)
}

/// Audit with a separate behavior path: agents stop according to
/// `behavior`'s intensities but are scored against the curve actually in
/// force. A behavior differing from the curve shows up as positive gaps.
pub fn payoff_audit_with_behavior(
    scn: &Scenario,
    cfg: &PopulationConfig,
    curve: &EquilibriumCurve,
    behavior: &MonotonePath,
    sample_size: usize,
) -> Result<AuditReport, PopulationError> {
    if behavior.grid() != scn.grid() {
        return Err(PopulationError::Model(
            crate::error::ModelError::GridMismatch,
        ));
    }
    let selected = cummax(curve.selected());
    audit_inner(scn, cfg, &selected, behavior.values(), sample_size)
}

fn audit_inner(
    scn: &Scenario,
    cfg: &PopulationConfig,
    rho_eval: &[f64],
    rho_behavior: &[f64],
    sample_size: usize,
) -> Result<AuditReport, PopulationError> {
    if sample_size > cfg.n_agents {
        return Err(PopulationError::SampleTooLarge {
            sample: sample_size,
            n: cfg.n_agents,
        });
    }
    if sample_size == 0 {
        return Err(PopulationError::EmptyPopulation);
    }
    let rate_path = scn.rate_path();
    let stride = cfg.n_agents / sample_size;
    let indices: Vec<usize> = (0..sample_size).map(|j| j * stride).collect();
    let gaps: Vec<(usize, f64)> = indices
        .par_iter()
        .map(|&i| {
            agent_outcome(scn, &rate_path, rho_eval, rho_behavior, i, cfg.master_seed)
                .map(|o| (i, o.gap))
        })
        .collect::<Result<_, _>>()?;
    let (worst_agent, worst_gap) =
        gaps.into_iter()
            .fold((0, 0.0), |acc, (i, g)| if g > acc.1 { (i, g) } else { acc });
    Ok(AuditReport {
        worst_gap,
        worst_agent,
        sampled: sample_size,
    })
}

// ---------------------------------------------------------------------------
// Sunspot game
// ---------------------------------------------------------------------------

/// Equilibrium of the n-player coordination game where agent `i` in
/// `{1/n, ..., 1}` uses intensity `(r - i + rho_t) v 0` and the public
/// signal x drives everyone: agent `i` stops as soon as `x_t >= i`, and the
/// stopped fraction is the grid floor of `x_t` clamped to `[0, 1]`.
#[derive(Clone, Debug)]
pub struct SunspotGame {
    pub result: PopulationResult,
    /// The realized equilibrium proportion path.
    pub rho: MonotonePath,
}

/// Runs the sunspot game. There is no randomness: the self-consistency
/// residual is exactly zero, which is itself asserted by construction
/// (stopping decisions and the proportion path use the same comparison).
pub fn sunspot_game(
    n: usize,
    x_path: &MonotonePath,
    r: f64,
) -> Result<SunspotGame, PopulationError> {
    if n == 0 {
        return Err(PopulationError::EmptyPopulation);
    }
    if !(r > 0.0) {
        return Err(PopulationError::NonPositiveRate(r));
    }
    if x_path.dim() != 1 {
        return Err(PopulationError::Model(
            crate::error::ModelError::DimensionMismatch {
                expected: 1,
                got: x_path.dim(),
            },
        ));
    }
    let grid = x_path.grid().clone();
    let xs = x_path.values();
    let nf = n as f64;
    let index_of = |j: usize| (j + 1) as f64 / nf;

    // number of thresholds m/n at or below x; the same comparison the agents
    // use, so the stopped count and the proportion path agree exactly
    let count_reached = |x: f64| -> usize {
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            if mid as f64 / nf <= x {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    };
    let rho_values: Vec<f64> = xs
        .iter()
        .map(|&x| count_reached(x.clamp(0.0, 1.0)) as f64 / nf)
        .collect();
    let rho = MonotonePath::scalar(grid.clone(), rho_values.clone())?;
    let rate_path = StepPath::scalar(grid.clone(), vec![r; grid.len()])?;

    let outcomes: Vec<AgentOutcome> = (0..n)
        .into_par_iter()
        .map(|j| -> Result<AgentOutcome, PopulationError> {
            let i = index_of(j);
            let stop_index = {
                let first = xs.partition_point(|&x| x < i);
                (first < xs.len()).then_some(first)
            };
            let gamma: Vec<f64> = rho_values.iter().map(|&u| (r - i + u).max(0.0)).collect();
            let problem = AgentProblem::new(
                MonotonePath::scalar(grid.clone(), gamma)?,
                &rate_path,
                // the horizon ends the game; agents above the signal's reach
                // legitimately never stop
                true,
            )?;
            debug_assert_eq!(stop_index, problem.stopping_index());
            let tau = stop_index.map_or(f64::INFINITY, |k| grid.t(k));
            let gap = problem.payoff_shortfall(tau)?;
            Ok(AgentOutcome {
                draw: i,
                tau,
                stop_index,
                gap,
            })
        })
        .collect::<Result<_, _>>()?;

    let result = assemble(&grid, &rho_values, outcomes);
    Ok(SunspotGame { result, rho })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::path_from_function;

    #[test]
    fn empirical_path_counts_stopping_times() {
        // four agents stopping at 0.1, 0.2, 0.3, 0.4: half are gone by 0.25
        let grid = TimeGrid::uniform(0.5, 5).unwrap();
        let outcomes = (1..=4)
            .map(|j| AgentOutcome {
                draw: 0.0,
                tau: j as f64 / 10.0,
                stop_index: Some(j),
                gap: 0.0,
            })
            .collect();
        let result = assemble(&grid, &vec![0.0; 6], outcomes);
        let k = grid.step_index(0.25).unwrap();
        assert_eq!(result.empirical_path[k], 0.5);
    }

    #[test]
    fn sunspot_floor_counts_thresholds() {
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let x = path_from_function(|t| 0.37 * (t / 0.5).min(1.0), &grid).unwrap();
        let game = sunspot_game(10, &x, 1.0).unwrap();
        assert_eq!(game.result.sup_residual, 0.0);
        let k = grid.step_index(0.5).unwrap();
        assert_eq!(game.rho.value(k), 0.3);
        let gap = game.result.payoff_gaps.iter().cloned().fold(0.0, f64::max);
        assert!(gap <= 1e-12);
    }

    #[test]
    fn sunspot_positive_start_stops_a_block_at_zero() {
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let x = path_from_function(|t| 0.2 + t, &grid).unwrap();
        let game = sunspot_game(10, &x, 1.0).unwrap();
        assert_eq!(game.result.empirical_path[0], 0.2);
        assert_eq!(
            game.result
                .stopping_times
                .iter()
                .filter(|&&tau| tau == 0.0)
                .count(),
            2
        );
    }

    #[test]
    fn sunspot_rejects_nonpositive_rate() {
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        let x = path_from_function(|t| t, &grid).unwrap();
        assert!(matches!(
            sunspot_game(4, &x, 0.0),
            Err(PopulationError::NonPositiveRate(_))
        ));
    }

    #[test]
    fn audit_sample_size_validated() {
        let scn = crate::scenario::uniform_toy(1.0, 0.5, 1.0, 10).unwrap();
        let cfg = PopulationConfig {
            n_agents: 5,
            master_seed: 1,
        };
        let curve = crate::equilibrium::build_curve(
            scn.cdf.as_ref(),
            scn.model.as_ref(),
            &scn.rate,
            &scn.x_path,
            crate::equilibrium::BranchPolicy::Maximal,
            &crate::equilibrium::SolverOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            payoff_audit(&scn, &cfg, &curve, 10),
            Err(PopulationError::SampleTooLarge { .. })
        ));
    }
}
