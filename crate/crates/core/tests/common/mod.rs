//! Shared helpers for the integration and acceptance suites: a dense-scan
//! root oracle kept independent of the production solver, and a generator of
//! randomized scenario tuples.

#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stopfield::{
    fixed_point_gap, three_mass_family, uniform_shifted_family, AdditiveModel, Drift,
    IntensityModel, TimeIndexedCdf,
};

/// Dense-grid zero scan, the independent oracle for the solver: evaluates
/// the gap on `points + 1` nodes and returns one bracket per detected zero.
/// Sign-change cells give `(u_lo, u_hi)` brackets; runs of nodes within
/// `1e-13` of zero collapse to one degenerate bracket.
pub fn dense_zero_brackets(
    cdf: &dyn TimeIndexedCdf,
    model: &dyn IntensityModel,
    t: f64,
    x: &[f64],
    r: f64,
    points: usize,
) -> Vec<(f64, f64)> {
    let gap = |u: f64| fixed_point_gap(cdf, model, t, x, r, u);
    let mut brackets = Vec::new();
    let mut prev_u = 0.0;
    let mut prev_g = gap(0.0);
    let mut in_zero_run = prev_g.abs() <= 1e-13;
    let mut run_start = 0.0;
    for j in 1..=points {
        let u = j as f64 / points as f64;
        let g = gap(u);
        let near_zero = g.abs() <= 1e-13;
        if near_zero {
            if !in_zero_run {
                in_zero_run = true;
                run_start = u;
            }
        } else {
            if in_zero_run {
                brackets.push((run_start, prev_u));
                in_zero_run = false;
            } else if prev_g * g < 0.0 {
                brackets.push((prev_u, u));
            }
        }
        prev_u = u;
        prev_g = g;
    }
    if in_zero_run {
        brackets.push((run_start, prev_u));
    }
    brackets
}

/// Number of distinct zeros the dense scan sees.
pub fn dense_zero_count(
    cdf: &dyn TimeIndexedCdf,
    model: &dyn IntensityModel,
    t: f64,
    x: &[f64],
    r: f64,
    points: usize,
) -> usize {
    dense_zero_brackets(cdf, model, t, x, r, points).len()
}

/// Standardized deviation between the indicator-form Monte Carlo estimate of
/// the defaultable payoff and the adjusted-rate evaluation, for one
/// randomized problem. The integrals and the survival indicator are computed
/// from scratch here so the oracle stays independent of the implementation.
pub fn payoff_identity_z(seed: u64, problem: u64, draws: usize) -> f64 {
    use stopfield::{AgentProblem, MonotonePath, StepPath, TimeGrid};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(problem);
    let grid = TimeGrid::uniform(1.0, 50).unwrap();
    let r = rng.gen_range(0.5..1.5);
    let rate = StepPath::scalar(grid.clone(), vec![r; grid.len()]).unwrap();
    let mut g = rng.gen_range(0.2..1.2);
    let gamma: Vec<f64> = (0..grid.len())
        .map(|_| {
            let v = g;
            g += rng.gen_range(0.0..0.08);
            v
        })
        .collect();
    let gamma = MonotonePath::scalar(grid.clone(), gamma).unwrap();
    let tau_index = rng.gen_range(1..grid.len());
    let tau = grid.t(tau_index);

    let (mut rate_int, mut hazard) = (0.0_f64, 0.0_f64);
    for k in 0..tau_index {
        let dt = grid.t(k + 1) - grid.t(k);
        rate_int += r * dt;
        hazard += gamma.value(k) * dt;
    }
    let survival = (-hazard).exp();

    let mut alive = 0usize;
    for _ in 0..draws {
        let u: f64 = rng.r#gen();
        let exp_draw = -(1.0 - u).ln();
        if hazard < exp_draw {
            alive += 1;
        }
    }
    let estimate = rate_int.exp() * alive as f64 / draws as f64;
    let problem = AgentProblem::new(gamma, &rate, true).unwrap();
    let exact = problem.payoff(tau).unwrap();
    let se = rate_int.exp() * (survival * (1.0 - survival) / draws as f64).sqrt();
    (estimate - exact) / se
}

pub struct RandomTuple {
    pub cdf: Arc<dyn TimeIndexedCdf>,
    pub model: AdditiveModel,
    pub t: f64,
    pub x: f64,
    pub r: f64,
}

/// Random family / interaction / evaluation point, the sampling space for
/// the randomized acceptance suites.
pub fn random_tuple(rng: &mut ChaCha8Rng) -> RandomTuple {
    let slope = rng.gen_range(0.2..2.0);
    let drift = Drift::new(move |t: f64| slope * t).expect("linear drift");
    let cdf: Arc<dyn TimeIndexedCdf> = if rng.r#gen::<bool>() {
        Arc::new(uniform_shifted_family(rng.gen_range(0.5..2.0), drift).expect("uniform family"))
    } else {
        Arc::new(three_mass_family(rng.gen_range(0.03..0.22), drift).expect("three-mass family"))
    };
    let model = AdditiveModel::new(rng.gen_range(0.0..1.8)).expect("additive model");
    RandomTuple {
        cdf,
        model,
        t: rng.gen_range(0.0..1.5),
        x: rng.gen_range(0.0..0.8),
        r: rng.gen_range(0.3..2.2),
    }
}
