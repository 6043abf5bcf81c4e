//! Builds scenarios from validated configs and drives the solve / simulate /
//! audit / sweep pipelines.

use std::path::Path;
use std::sync::Arc;

use stopfield::{
    build_curve, cdf_from_csv, path_from_function, payoff_audit, randomized_switch, simulate,
    sunspot_game, three_mass_family, uniform_shifted_family, AdditiveModel, AuditReport,
    BranchPolicy, Drift, EquilibriumCurve, MonotonePath, PopulationConfig, PopulationResult,
    RateFunction, Scenario, SolutionSet, SolverOptions, StepPath, TimeGrid, TimeIndexedCdf,
};

use crate::config::{FamilySpec, RateSpec, RunConfig, ScenarioKind, XPathSpec};
use crate::output::{self, CurveRows, SweepRow};
use crate::CliError;

/// A config resolved into runnable pieces.
pub enum Prepared {
    Solve {
        scenario: Scenario,
        policy: BranchPolicy,
        switch_time: Option<f64>,
    },
    Sunspot {
        x_path: MonotonePath,
        r: f64,
    },
}

fn contract(module: &'static str, op: &'static str, e: impl std::fmt::Display) -> CliError {
    CliError::Contract {
        module,
        op,
        message: e.to_string(),
    }
}

fn build_x_path(spec: &XPathSpec, grid: &TimeGrid) -> Result<MonotonePath, CliError> {
    match spec {
        XPathSpec::Zero => path_from_function(|_| 0.0, grid),
        XPathSpec::Linear { slope, offset } => {
            let (s, o) = (*slope, *offset);
            path_from_function(move |t| o + s * t, grid)
        }
        XPathSpec::QuadraticCapped { cap } => {
            let cap = *cap;
            path_from_function(move |t| (t * t).min(cap), grid)
        }
        XPathSpec::Table { file } => {
            let pairs = read_pairs(file, &["t", "x"])?;
            return step_lookup_path(grid, &pairs)
                .map_err(|e| contract("model", "path_from_function", e));
        }
    }
    .map_err(|e| contract("model", "path_from_function", e))
}

/// Samples a sorted `(t, value)` table onto the grid with the cadlag
/// convention and validates monotonicity.
fn step_lookup_path(
    grid: &TimeGrid,
    pairs: &[(f64, f64)],
) -> Result<MonotonePath, stopfield::ModelError> {
    let values = grid
        .times()
        .iter()
        .map(|&t| {
            let idx = pairs.partition_point(|&(s, _)| s <= t);
            if idx == 0 {
                pairs[0].1
            } else {
                pairs[idx - 1].1
            }
        })
        .collect();
    MonotonePath::scalar(grid.clone(), values)
}

fn read_pairs(path: &Path, expected_header: &[&str]) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    {
        let headers = reader.headers().map_err(|e| CliError::Io(e.to_string()))?;
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != expected_header {
            return Err(CliError::Io(format!(
                "{}: expected header {}, got {}",
                path.display(),
                expected_header.join(","),
                got.join(",")
            )));
        }
    }
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Io(e.to_string()))?;
        let parse = |i: usize| {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Io(format!("{}: bad numeric row", path.display())))
        };
        pairs.push((parse(0)?, parse(1)?));
    }
    if pairs.is_empty() {
        return Err(CliError::Io(format!("{}: no data rows", path.display())));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(pairs)
}

fn build_family(spec: &FamilySpec, r: f64) -> Result<Arc<dyn TimeIndexedCdf>, CliError> {
    let linear = Drift::new(|t| t).map_err(|e| contract("distributions", "drift", e))?;
    Ok(match spec {
        FamilySpec::Uniform => Arc::new(
            uniform_shifted_family(r, linear)
                .map_err(|e| contract("distributions", "uniform_shifted_family", e))?,
        ),
        FamilySpec::ThreeMass => Arc::new(
            three_mass_family(0.1, linear)
                .map_err(|e| contract("distributions", "three_mass_family", e))?,
        ),
        FamilySpec::Table { file } => Arc::new(
            cdf_from_csv(file).map_err(|e| contract("distributions", "cdf_from_table", e))?,
        ),
    })
}

fn build_rate(spec: &RateSpec, r: f64, grid: &TimeGrid) -> Result<RateFunction, CliError> {
    match spec {
        RateSpec::Constant => RateFunction::constant(r).map_err(|e| contract("model", "rate", e)),
        RateSpec::Table { file } => {
            let pairs = read_pairs(file, &["t", "r"])?;
            let values: Vec<f64> = grid
                .times()
                .iter()
                .map(|&t| {
                    let idx = pairs.partition_point(|&(s, _)| s <= t);
                    if idx == 0 {
                        pairs[0].1
                    } else {
                        pairs[idx - 1].1
                    }
                })
                .collect();
            let path =
                StepPath::scalar(grid.clone(), values).map_err(|e| contract("model", "rate", e))?;
            RateFunction::time_table(path).map_err(|e| contract("model", "rate", e))
        }
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let grid =
        TimeGrid::uniform(cfg.horizon, cfg.steps).map_err(|e| contract("model", "grid", e))?;
    match cfg.kind {
        ScenarioKind::Sunspot => {
            let x_path = build_x_path(&cfg.x_path, &grid)?;
            Ok(Prepared::Sunspot { x_path, r: cfg.r })
        }
        ScenarioKind::UniformToy => Ok(Prepared::Solve {
            scenario: stopfield::uniform_toy(cfg.r, cfg.c, cfg.horizon, cfg.steps)
                .map_err(|e| contract("model", "uniform_toy", e))?,
            policy: cfg.policy.clone(),
            switch_time: None,
        }),
        ScenarioKind::ThreeMass => Ok(Prepared::Solve {
            scenario: stopfield::three_mass_scenario(cfg.eps, cfg.c, cfg.r, cfg.horizon, cfg.steps)
                .map_err(|e| contract("model", "three_mass_scenario", e))?,
            policy: cfg.policy.clone(),
            switch_time: None,
        }),
        ScenarioKind::SunspotHorizon => Ok(Prepared::Solve {
            scenario: stopfield::sunspot_horizon(
                cfg.c,
                cfg.r,
                cfg.t_jump.expect("validated"),
                cfg.horizon,
                cfg.steps,
            )
            .map_err(|e| contract("model", "sunspot_horizon", e))?,
            policy: cfg.policy.clone(),
            switch_time: None,
        }),
        ScenarioKind::CommonNoiseUniform => {
            let x_path = build_x_path(&cfg.x_path, &grid)?;
            // with common noise the private signal keeps its time-0 law;
            // the drift belongs to the pure-idiosyncratic toy scenarios
            let cdf: Arc<dyn TimeIndexedCdf> = Arc::new(
                uniform_shifted_family(cfg.r, Drift::none())
                    .map_err(|e| contract("distributions", "uniform_shifted_family", e))?,
            );
            let model = AdditiveModel::new(cfg.c)
                .map_err(|e| contract("model", "additive_model", e))?
                .with_strict_time(true);
            let rate = build_rate(&cfg.rate, cfg.r, &grid)?;
            let scenario = Scenario::new(cdf, Arc::new(model), rate, x_path, cfg.r_plus_integrable)
                .map_err(|e| contract("model", "scenario", e))?;
            Ok(Prepared::Solve {
                scenario,
                policy: cfg.policy.clone(),
                switch_time: None,
            })
        }
        ScenarioKind::RandomizedSwitch => Ok(Prepared::Solve {
            scenario: stopfield::three_mass_scenario(cfg.eps, cfg.c, cfg.r, cfg.horizon, cfg.steps)
                .map_err(|e| contract("model", "three_mass_scenario", e))?,
            policy: cfg.policy.clone(),
            switch_time: Some(cfg.switch_time.expect("validated")),
        }),
        ScenarioKind::Custom => {
            let x_path = build_x_path(&cfg.x_path, &grid)?;
            let cdf = build_family(&cfg.family, cfg.r)?;
            let model =
                AdditiveModel::new(cfg.c).map_err(|e| contract("model", "additive_model", e))?;
            let rate = build_rate(&cfg.rate, cfg.r, &grid)?;
            let scenario = Scenario::new(cdf, Arc::new(model), rate, x_path, cfg.r_plus_integrable)
                .map_err(|e| contract("model", "scenario", e))?;
            Ok(Prepared::Solve {
                scenario,
                policy: cfg.policy.clone(),
                switch_time: None,
            })
        }
    }
}

/// Curve stage: solution sets and the selected branch at every grid point.
pub struct SolvedCurve {
    pub rows: CurveRows,
    pub curve: Option<EquilibriumCurve>,
    pub rho_path: MonotonePath,
}

pub fn solve_prepared(cfg: &RunConfig, prepared: &Prepared) -> Result<SolvedCurve, CliError> {
    let opts = SolverOptions::default().with_resolution(cfg.u_resolution);
    match prepared {
        Prepared::Solve {
            scenario,
            policy,
            switch_time,
        } => {
            let mut curve = build_curve(
                scenario.cdf.as_ref(),
                scenario.model.as_ref(),
                &scenario.rate,
                &scenario.x_path,
                policy.clone(),
                &opts,
            )
            .map_err(|e| contract("equilibrium", "build_curve", e))?;
            if let Some(sigma) = switch_time {
                let min_curve = build_curve(
                    scenario.cdf.as_ref(),
                    scenario.model.as_ref(),
                    &scenario.rate,
                    &scenario.x_path,
                    BranchPolicy::Minimal,
                    &opts,
                )
                .map_err(|e| contract("equilibrium", "build_curve", e))?;
                let max_curve = build_curve(
                    scenario.cdf.as_ref(),
                    scenario.model.as_ref(),
                    &scenario.rate,
                    &scenario.x_path,
                    BranchPolicy::Maximal,
                    &opts,
                )
                .map_err(|e| contract("equilibrium", "build_curve", e))?;
                let switched = randomized_switch(&min_curve, &max_curve, *sigma)
                    .map_err(|e| contract("equilibrium", "randomized_switch", e))?;
                curve = max_curve
                    .with_selected(scenario.cdf.as_ref(), scenario.model.as_ref(), &switched)
                    .map_err(|e| contract("equilibrium", "with_selected", e))?;
            }
            let grid = scenario.grid();
            let rows = CurveRows {
                scenario: cfg.kind.name().into(),
                policy: curve.policy_tag().into(),
                t: grid.times().to_vec(),
                x: (0..grid.len()).map(|k| scenario.x_path.value(k)).collect(),
                r: curve.rates().to_vec(),
                solutions: curve.solutions().to_vec(),
                selected: curve.selected().to_vec(),
                residual: curve.residuals().to_vec(),
            };
            let rho_path = curve.selected_path();
            Ok(SolvedCurve {
                rows,
                curve: Some(curve),
                rho_path,
            })
        }
        Prepared::Sunspot { x_path, r } => {
            let game = sunspot_game(cfg.n_agents, x_path, *r)
                .map_err(|e| contract("population", "sunspot_game", e))?;
            let grid = x_path.grid();
            let solutions: Vec<SolutionSet> = (0..grid.len())
                .map(|k| SolutionSet {
                    isolated_roots: vec![game.rho.value(k)],
                    flat_intervals: Vec::new(),
                })
                .collect();
            let rows = CurveRows {
                scenario: cfg.kind.name().into(),
                policy: "closed-form".into(),
                t: grid.times().to_vec(),
                x: (0..grid.len()).map(|k| x_path.value(k)).collect(),
                r: vec![*r; grid.len()],
                solutions,
                selected: game.rho.values().to_vec(),
                residual: vec![0.0; grid.len()],
            };
            Ok(SolvedCurve {
                rows,
                curve: None,
                rho_path: game.rho.clone(),
            })
        }
    }
}

pub struct RunArtifacts {
    pub solved: SolvedCurve,
    pub population: Option<PopulationResult>,
    pub audit: Option<AuditReport>,
}

pub fn run_solve(cfg: &RunConfig) -> Result<RunArtifacts, CliError> {
    let prepared = prepare(cfg)?;
    let solved = solve_prepared(cfg, &prepared)?;
    Ok(RunArtifacts {
        solved,
        population: None,
        audit: None,
    })
}

pub fn run_simulate(cfg: &RunConfig) -> Result<RunArtifacts, CliError> {
    let prepared = prepare(cfg)?;
    let solved = solve_prepared(cfg, &prepared)?;
    let pop_cfg = PopulationConfig {
        n_agents: cfg.n_agents,
        master_seed: cfg.master_seed,
    };
    let (population, audit) = match &prepared {
        Prepared::Solve { scenario, .. } => {
            let curve = solved
                .curve
                .as_ref()
                .expect("solve scenarios carry a curve");
            let result = simulate(scenario, &pop_cfg, curve)
                .map_err(|e| contract("population", "simulate", e))?;
            let sample = cfg.n_agents.min(100);
            let audit = payoff_audit(scenario, &pop_cfg, curve, sample)
                .map_err(|e| contract("population", "payoff_audit", e))?;
            (result, audit)
        }
        Prepared::Sunspot { x_path, r } => {
            let game = sunspot_game(cfg.n_agents, x_path, *r)
                .map_err(|e| contract("population", "sunspot_game", e))?;
            let worst = game.result.payoff_gaps.iter().enumerate().fold(
                (0usize, 0.0f64),
                |acc, (i, &g)| {
                    if g > acc.1 {
                        (i, g)
                    } else {
                        acc
                    }
                },
            );
            let audit = AuditReport {
                worst_gap: worst.1,
                worst_agent: worst.0,
                sampled: cfg.n_agents,
            };
            (game.result, audit)
        }
    };
    Ok(RunArtifacts {
        solved,
        population: Some(population),
        audit: Some(audit),
    })
}

pub fn run_audit(cfg: &RunConfig, sample: usize) -> Result<AuditReport, CliError> {
    let prepared = prepare(cfg)?;
    let solved = solve_prepared(cfg, &prepared)?;
    let pop_cfg = PopulationConfig {
        n_agents: cfg.n_agents,
        master_seed: cfg.master_seed,
    };
    match &prepared {
        Prepared::Solve { scenario, .. } => payoff_audit(
            scenario,
            &pop_cfg,
            solved.curve.as_ref().expect("curve"),
            sample,
        )
        .map_err(|e| contract("population", "payoff_audit", e)),
        Prepared::Sunspot { x_path, r } => {
            let game = sunspot_game(cfg.n_agents, x_path, *r)
                .map_err(|e| contract("population", "sunspot_game", e))?;
            let stride = (cfg.n_agents / sample.max(1)).max(1);
            let mut report = AuditReport {
                worst_gap: 0.0,
                worst_agent: 0,
                sampled: 0,
            };
            for i in (0..cfg.n_agents).step_by(stride).take(sample) {
                report.sampled += 1;
                if game.result.payoff_gaps[i] > report.worst_gap {
                    report.worst_gap = game.result.payoff_gaps[i];
                    report.worst_agent = i;
                }
            }
            Ok(report)
        }
    }
}

/// Runs the scenario once per parameter value and collects the branch
/// envelope per grid time.
pub fn run_sweep(
    cfg: &RunConfig,
    parameter: &str,
    values: &[f64],
) -> Result<Vec<SweepRow>, CliError> {
    if !matches!(parameter, "c" | "eps" | "r") {
        return Err(CliError::Config(vec![format!(
            "sweep parameter must be one of c, eps, r; got `{parameter}`"
        )]));
    }
    if values.is_empty() {
        return Err(CliError::Config(vec![
            "sweep values list must not be empty".into(),
        ]));
    }
    if cfg.kind == ScenarioKind::Sunspot {
        return Err(CliError::Config(vec![
            "sweep is not supported for the sunspot scenario".into(),
        ]));
    }
    let mut rows = Vec::new();
    for &value in values {
        let mut swept = cfg.clone();
        match parameter {
            "c" => swept.c = value,
            "eps" => swept.eps = value,
            _ => swept.r = value,
        }
        let prepared = prepare(&swept)?;
        let solved = solve_prepared(&swept, &prepared)?;
        for (k, s) in solved.rows.solutions.iter().enumerate() {
            rows.push(SweepRow {
                value,
                t: solved.rows.t[k],
                rho_max: s.maximal(),
                rho_min: s.minimal(),
                n_solutions: s.isolated_roots.len() + s.flat_intervals.len(),
            });
        }
    }
    Ok(rows)
}

/// Writes the artifact files selected by the output format and returns the
/// paths written.
pub fn write_artifacts(
    cfg: &RunConfig,
    artifacts: &RunArtifacts,
) -> Result<Vec<std::path::PathBuf>, CliError> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    let mut written = Vec::new();
    let rows = &artifacts.solved.rows;
    if cfg.format.csv() {
        let path = cfg.out_dir.join("curve.csv");
        output::write_curve_csv(&path, rows)?;
        written.push(path);
        if let Some(pop) = &artifacts.population {
            let path = cfg.out_dir.join("results.csv");
            output::write_results_csv(&path, &rows.t, &rows.selected, &pop.empirical_path)?;
            written.push(path);
            if cfg.agents_csv {
                let path = cfg.out_dir.join("agents.csv");
                output::write_agents_csv(&path, pop)?;
                written.push(path);
            }
        }
    }
    if cfg.format.json() {
        let path = cfg.out_dir.join("solutions.json");
        output::write_solutions_json(&path, rows)?;
        written.push(path);
        let path = cfg.out_dir.join("plot.json");
        output::write_plot_json(
            &path,
            rows,
            artifacts
                .population
                .as_ref()
                .map(|p| p.empirical_path.as_slice()),
        )?;
        written.push(path);
        if let Some(audit) = &artifacts.audit {
            let path = cfg.out_dir.join("audit.json");
            output::write_audit_json(&path, audit)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Re-ingests a selected branch from `solutions.json` as an explicit
/// candidate path and reruns the population against it, returning the
/// fixed-point residual. Round-trips the simulate stage exactly.
pub fn residual_from_solutions_file(
    cfg: &RunConfig,
    solutions_path: &Path,
) -> Result<f64, CliError> {
    let text = std::fs::read_to_string(solutions_path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", solutions_path.display())))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Io(e.to_string()))?;
    let selected: Vec<f64> = doc["points"]
        .as_array()
        .ok_or_else(|| CliError::Io("solutions.json has no points array".into()))?
        .iter()
        .map(|p| p["selected"].as_f64().unwrap_or(f64::NAN))
        .collect();
    let prepared = prepare(cfg)?;
    let Prepared::Solve { scenario, .. } = &prepared else {
        return Err(CliError::Config(vec![
            "round-trip residual requires a solve-based scenario".into(),
        ]));
    };
    let grid = scenario.grid().clone();
    let candidate = MonotonePath::scalar(grid, selected)
        .map_err(|e| contract("population", "fixed_point_residual", e))?;
    let pop_cfg = PopulationConfig {
        n_agents: cfg.n_agents,
        master_seed: cfg.master_seed,
    };
    stopfield::fixed_point_residual(scenario, &pop_cfg, &candidate)
        .map_err(|e| contract("population", "fixed_point_residual", e))
}
