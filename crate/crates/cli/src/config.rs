//! Scenario configuration: a TOML file of nested key-value pairs, plus
//! command-line overrides. Validation collects every offending field rather
//! than stopping at the first.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use stopfield::BranchPolicy;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Option<String>,
    pub r: Option<f64>,
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub u_resolution: Option<usize>,
    pub n_agents: Option<usize>,
    pub master_seed: Option<u64>,
    pub policy: Option<String>,
    pub switch_time: Option<f64>,
    pub t_jump: Option<f64>,
    pub r_plus_integrable: Option<bool>,
    #[serde(default)]
    pub x_path: Option<RawXPath>,
    #[serde(default)]
    pub family: Option<RawFamily>,
    #[serde(default)]
    pub rate: Option<RawRate>,
    #[serde(default)]
    pub output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawXPath {
    pub kind: Option<String>,
    pub slope: Option<f64>,
    pub offset: Option<f64>,
    pub cap: Option<f64>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFamily {
    pub kind: Option<String>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRate {
    pub kind: Option<String>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub dir: Option<PathBuf>,
    pub format: Option<String>,
    pub agents_csv: Option<bool>,
}

/// Command-line overrides applied on top of the file before validation.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub agents: Option<usize>,
    pub dt: Option<f64>,
    pub u_res: Option<usize>,
    pub policy: Option<String>,
    pub format: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    UniformToy,
    ThreeMass,
    Sunspot,
    SunspotHorizon,
    CommonNoiseUniform,
    RandomizedSwitch,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::UniformToy => "uniform-toy",
            ScenarioKind::ThreeMass => "three-mass",
            ScenarioKind::Sunspot => "sunspot",
            ScenarioKind::SunspotHorizon => "sunspot-horizon",
            ScenarioKind::CommonNoiseUniform => "common-noise-uniform",
            ScenarioKind::RandomizedSwitch => "randomized-switch",
            ScenarioKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug)]
pub enum XPathSpec {
    Zero,
    Linear { slope: f64, offset: f64 },
    QuadraticCapped { cap: f64 },
    Table { file: PathBuf },
}

#[derive(Clone, Debug)]
pub enum FamilySpec {
    Uniform,
    ThreeMass,
    Table { file: PathBuf },
}

#[derive(Clone, Debug)]
pub enum RateSpec {
    Constant,
    Table { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

/// Fully validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub kind: ScenarioKind,
    pub r: f64,
    pub c: f64,
    pub eps: f64,
    pub horizon: f64,
    pub dt: f64,
    pub steps: usize,
    pub u_resolution: usize,
    pub n_agents: usize,
    pub master_seed: u64,
    pub policy: BranchPolicy,
    pub switch_time: Option<f64>,
    pub t_jump: Option<f64>,
    pub r_plus_integrable: bool,
    pub x_path: XPathSpec,
    pub family: FamilySpec,
    pub rate: RateSpec,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub agents_csv: bool,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(vec![format!("parse error: {e}")]))?;
    validate(raw, overrides, path.parent().unwrap_or(Path::new(".")))
}

/// Checks every field and returns either the validated config or the full
/// list of problems.
pub fn validate(
    raw: RawConfig,
    overrides: &Overrides,
    base_dir: &Path,
) -> Result<RunConfig, CliError> {
    let mut errors: Vec<String> = Vec::new();
    fn missing(field: &str) -> String {
        format!("missing required field `{field}`")
    }

    let kind = match raw.scenario.as_deref() {
        None => {
            errors.push(missing("scenario"));
            None
        }
        Some("uniform-toy") => Some(ScenarioKind::UniformToy),
        Some("three-mass") => Some(ScenarioKind::ThreeMass),
        Some("sunspot") => Some(ScenarioKind::Sunspot),
        Some("sunspot-horizon") => Some(ScenarioKind::SunspotHorizon),
        Some("common-noise-uniform") => Some(ScenarioKind::CommonNoiseUniform),
        Some("randomized-switch") => Some(ScenarioKind::RandomizedSwitch),
        Some("custom") => Some(ScenarioKind::Custom),
        Some(other) => {
            errors.push(format!("unknown scenario `{other}`"));
            None
        }
    };

    let r = raw.r.unwrap_or(1.0);
    if !r.is_finite() {
        errors.push(format!("`r` must be finite, got {r}"));
    }
    let c = raw.c.unwrap_or(0.5);
    if !(c >= 0.0) {
        errors.push(format!("`c` must be nonnegative, got {c}"));
    }
    let eps = raw.eps.unwrap_or(0.1);
    if !(eps > 0.0 && eps < 0.25) {
        errors.push(format!("`eps` must lie in (0, 1/4), got {eps}"));
    }

    let horizon = match raw.horizon {
        Some(h) if h > 0.0 && h.is_finite() => Some(h),
        Some(h) => {
            errors.push(format!("`horizon` must be positive, got {h}"));
            None
        }
        None => {
            errors.push(missing("horizon"));
            None
        }
    };

    let dt = overrides.dt.or(raw.dt).unwrap_or(0.01);
    let mut steps = 0usize;
    if !(dt > 0.0) {
        errors.push(format!("`dt` must be positive, got {dt}"));
    } else if let Some(h) = horizon {
        if h < dt {
            errors.push(format!("`horizon` ({h}) must be at least `dt` ({dt})"));
        } else {
            let ratio = h / dt;
            steps = ratio.round() as usize;
            if steps == 0 || (ratio - steps as f64).abs() > 1e-9 * ratio.max(1.0) {
                errors.push(format!(
                    "`dt` ({dt}) must divide `horizon` ({h}) into whole steps"
                ));
            }
        }
    }

    let u_resolution = overrides.u_res.or(raw.u_resolution).unwrap_or(4096);
    if u_resolution < 64 {
        errors.push(format!(
            "`u_resolution` must be at least 64, got {u_resolution}"
        ));
    }
    let n_agents = overrides.agents.or(raw.n_agents).unwrap_or(10_000);
    if n_agents == 0 {
        errors.push("`n_agents` must be at least 1".into());
    }
    let master_seed = overrides.seed.or(raw.master_seed).unwrap_or(42);

    let policy_text = overrides
        .policy
        .clone()
        .or(raw.policy)
        .unwrap_or_else(|| "maximal".into());
    let policy = match parse_policy(&policy_text) {
        Some(p) => p,
        None => {
            errors.push(format!(
                "`policy` must be maximal, minimal or index:<k>, got `{policy_text}`"
            ));
            BranchPolicy::Maximal
        }
    };

    if kind == Some(ScenarioKind::RandomizedSwitch) && raw.switch_time.is_none() {
        errors.push(missing("switch_time"));
    }
    if kind == Some(ScenarioKind::SunspotHorizon) && raw.t_jump.is_none() {
        errors.push(missing("t_jump"));
    }
    if let (Some(tj), Some(h)) = (raw.t_jump, horizon) {
        if !(tj > 0.0 && tj <= h) {
            errors.push(format!("`t_jump` ({tj}) must lie in (0, horizon]"));
        }
    }

    let x_path = match validate_x_path(raw.x_path.as_ref(), kind, base_dir) {
        Ok(spec) => spec,
        Err(msgs) => {
            errors.extend(msgs);
            XPathSpec::Zero
        }
    };
    let family = match validate_family(raw.family.as_ref(), kind, base_dir) {
        Ok(spec) => spec,
        Err(msgs) => {
            errors.extend(msgs);
            FamilySpec::Uniform
        }
    };
    let rate = match raw.rate.as_ref() {
        None => RateSpec::Constant,
        Some(rate_raw) => match rate_raw.kind.as_deref() {
            None | Some("constant") => RateSpec::Constant,
            Some("table") => match &rate_raw.file {
                Some(f) => RateSpec::Table {
                    file: base_dir.join(f),
                },
                None => {
                    errors.push("`rate.file` is required for rate kind `table`".into());
                    RateSpec::Constant
                }
            },
            Some(other) => {
                errors.push(format!("unknown rate kind `{other}`"));
                RateSpec::Constant
            }
        },
    };

    let out_raw = raw.output.as_ref();
    let out_dir = overrides
        .out
        .clone()
        .or_else(|| out_raw.and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let format_text = overrides
        .format
        .clone()
        .or_else(|| out_raw.and_then(|o| o.format.clone()))
        .unwrap_or_else(|| "both".into());
    let format = match format_text.as_str() {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        "both" => OutputFormat::Both,
        other => {
            errors.push(format!("`format` must be csv, json or both, got `{other}`"));
            OutputFormat::Both
        }
    };
    let agents_csv = out_raw.and_then(|o| o.agents_csv).unwrap_or(false);

    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    Ok(RunConfig {
        kind: kind.unwrap(),
        r,
        c,
        eps,
        horizon: horizon.unwrap(),
        dt,
        steps,
        u_resolution,
        n_agents,
        master_seed,
        policy,
        switch_time: raw.switch_time,
        t_jump: raw.t_jump,
        r_plus_integrable: raw.r_plus_integrable.unwrap_or(false),
        x_path,
        family,
        rate,
        out_dir,
        format,
        agents_csv,
    })
}

fn parse_policy(text: &str) -> Option<BranchPolicy> {
    match text {
        "maximal" => Some(BranchPolicy::Maximal),
        "minimal" => Some(BranchPolicy::Minimal),
        other => other
            .strip_prefix("index:")
            .and_then(|k| k.parse::<usize>().ok())
            .map(BranchPolicy::Index),
    }
}

fn validate_x_path(
    raw: Option<&RawXPath>,
    kind: Option<ScenarioKind>,
    base_dir: &Path,
) -> Result<XPathSpec, Vec<String>> {
    let default = match kind {
        Some(ScenarioKind::Sunspot) => XPathSpec::Linear {
            slope: 1.0,
            offset: 0.0,
        },
        Some(ScenarioKind::CommonNoiseUniform) => XPathSpec::QuadraticCapped { cap: 2.0 },
        _ => XPathSpec::Zero,
    };
    let Some(raw) = raw else {
        return Ok(default);
    };
    match raw.kind.as_deref() {
        None => Ok(default),
        Some("zero") => Ok(XPathSpec::Zero),
        Some("linear") => {
            let slope = raw.slope.unwrap_or(1.0);
            let offset = raw.offset.unwrap_or(0.0);
            if slope < 0.0 {
                return Err(vec![format!(
                    "`x_path.slope` must be nonnegative, got {slope}"
                )]);
            }
            Ok(XPathSpec::Linear { slope, offset })
        }
        Some("quadratic-capped") => Ok(XPathSpec::QuadraticCapped {
            cap: raw.cap.unwrap_or(2.0),
        }),
        Some("table") => match &raw.file {
            Some(f) => Ok(XPathSpec::Table {
                file: base_dir.join(f),
            }),
            None => Err(vec![
                "`x_path.file` is required for x_path kind `table`".into()
            ]),
        },
        Some(other) => Err(vec![format!("unknown x_path kind `{other}`")]),
    }
}

fn validate_family(
    raw: Option<&RawFamily>,
    kind: Option<ScenarioKind>,
    base_dir: &Path,
) -> Result<FamilySpec, Vec<String>> {
    let Some(raw) = raw else {
        return match kind {
            Some(ScenarioKind::Custom) => Err(vec![
                "`family` section is required for the custom scenario".into(),
            ]),
            _ => Ok(FamilySpec::Uniform),
        };
    };
    match raw.kind.as_deref() {
        None | Some("uniform") => Ok(FamilySpec::Uniform),
        Some("three-mass") => Ok(FamilySpec::ThreeMass),
        Some("table") => match &raw.file {
            Some(f) => Ok(FamilySpec::Table {
                file: base_dir.join(f),
            }),
            None => Err(vec![
                "`family.file` is required for family kind `table`".into()
            ]),
        },
        Some(other) => Err(vec![format!("unknown family kind `{other}`")]),
    }
}
