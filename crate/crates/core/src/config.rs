//! Config ingestion: one structured text format for robots and scenarios,
//! SI units internally, human units accepted with explicit suffixes
//! ("34 mm", "120 deg", "43:31"). Unknown keys are rejected.

use crate::gait::GaitType;
use crate::robot::RobotConfig;
use crate::sim::ShapeMode;
use crate::terrain::TerrainProfile;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Validation(#[from] crate::robot::ValidationError),
    #[error("invalid scenario: {}", violations.join("; "))]
    Scenario { violations: Vec<String> },
    #[error("unknown unit suffix '{0}'")]
    UnknownUnit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Commanded locomotion for a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioMode {
    Wheeled { v: f64 },
    Legged { gait: GaitKind, period_tc: f64 },
    Synchronized { speed: f64 },
    ReversedLegged { speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaitKind {
    Walk,
    Trot,
    Tripod,
}

impl GaitKind {
    pub fn to_gait_type(self) -> GaitType {
        match self {
            GaitKind::Walk => GaitType::Walk,
            GaitKind::Trot => GaitType::Trot,
            GaitKind::Tripod => GaitType::Tripod,
        }
    }
}

impl ScenarioMode {
    pub fn shape_mode(&self) -> ShapeMode {
        match self {
            ScenarioMode::Wheeled { .. } => ShapeMode::Wheeled,
            ScenarioMode::ReversedLegged { .. } => ShapeMode::ReversedLegged,
            _ => ShapeMode::Legged,
        }
    }
}

/// Robot reference: a named preset or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RobotRef {
    Preset(String),
    Inline(Box<RobotConfig>),
}

impl RobotRef {
    pub fn resolve(&self) -> Result<RobotConfig, ConfigError> {
        let cfg = match self {
            RobotRef::Preset(name) => RobotConfig::preset(name).ok_or_else(|| ConfigError::Scenario {
                violations: vec![format!("unknown robot preset '{name}'")],
            })?,
            RobotRef::Inline(cfg) => (**cfg).clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub robot: RobotRef,
    pub terrain: TerrainProfile,
    pub mode: ScenarioMode,
    /// Simulated duration (s).
    pub duration: f64,
    /// Time step (s).
    pub dt: f64,
    pub seed: u64,
    /// Output directory override; the CLI flag wins when both are given.
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Starting body x (m).
    #[serde(default)]
    pub start_x: Option<f64>,
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut violations = Vec::new();
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            violations.push(format!("dt {} outside (0, 0.01]", self.dt));
        }
        if !(self.duration > 0.0) {
            violations.push("duration must be positive".into());
        }
        if let Err(e) = self.terrain.validate() {
            violations.push(e.to_string());
        }
        match self.robot.resolve() {
            Err(ConfigError::Validation(e)) => violations.extend(e.violations),
            Err(other) => violations.push(other.to_string()),
            Ok(robot) => {
                if let ScenarioMode::Legged { gait, .. } = self.mode {
                    if crate::gait::phase_table(gait.to_gait_type(), robot.n_legs).is_err() {
                        violations
                            .push(format!("gait {gait:?} undefined for {} legs", robot.n_legs));
                    }
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Scenario { violations })
        }
    }
}

/// Either kind of config file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedConfig {
    Robot(RobotConfig),
    Scenario(Box<ScenarioFile>),
}

/// Parse a config file, normalizing unit-suffixed strings to SI numbers
/// first. Scenario files are recognized by their `duration` key.
pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let mut value: toml::Value = toml::from_str(text).map_err(|e| located_toml_error(text, e))?;
    normalize_units(&mut value)?;
    let table = value.as_table().ok_or_else(|| ConfigError::Scenario {
        violations: vec!["config root must be a table".into()],
    })?;
    if table.contains_key("duration") {
        let scenario: ScenarioFile =
            value.clone().try_into().map_err(from_toml_error)?;
        scenario.validate()?;
        Ok(LoadedConfig::Scenario(Box::new(scenario)))
    } else {
        let robot: RobotConfig = value.clone().try_into().map_err(from_toml_error)?;
        robot.validate()?;
        Ok(LoadedConfig::Robot(robot))
    }
}

pub fn load_config(path: &std::path::Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn located_toml_error(text: &str, e: toml::de::Error) -> ConfigError {
    let (line, column) = e
        .span()
        .map(|s| {
            let upto = &text[..s.start.min(text.len())];
            let line = upto.matches('\n').count() + 1;
            let column = upto.chars().rev().take_while(|c| *c != '\n').count() + 1;
            (line, column)
        })
        .unwrap_or((0, 0));
    ConfigError::Parse { line, column, message: e.message().to_string() }
}

fn from_toml_error(e: toml::de::Error) -> ConfigError {
    ConfigError::Parse { line: 0, column: 0, message: e.message().to_string() }
}

/// Convert "value unit" strings into SI floats, recursively.
fn normalize_units(value: &mut toml::Value) -> Result<(), ConfigError> {
    match value {
        toml::Value::Table(t) => {
            for (_, v) in t.iter_mut() {
                normalize_units(v)?;
            }
        }
        toml::Value::Array(a) => {
            for v in a.iter_mut() {
                normalize_units(v)?;
            }
        }
        toml::Value::String(s) => {
            if let Some(num) = parse_quantity(s)? {
                *value = toml::Value::Float(num);
            }
        }
        _ => {}
    }
    Ok(())
}

/// "34 mm" -> 0.034; "43:31" -> ratio; plain words stay strings.
fn parse_quantity(s: &str) -> Result<Option<f64>, ConfigError> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once(':') {
        if let (Ok(n), Ok(d)) = (num.trim().parse::<f64>(), den.trim().parse::<f64>()) {
            if d != 0.0 {
                return Ok(Some(n / d));
            }
        }
        return Ok(None);
    }
    let split = s.find(|c: char| c.is_ascii_alphabetic());
    let Some(at) = split else { return Ok(None) };
    let (num, unit) = s.split_at(at);
    let Ok(num) = num.trim().parse::<f64>() else {
        return Ok(None);
    };
    let scale = match unit.trim() {
        "m" => 1.0,
        "cm" => 0.01,
        "mm" => 0.001,
        "km" => 1000.0,
        "kg" => 1.0,
        "g" => 0.001,
        "s" => 1.0,
        "ms" => 0.001,
        "rad" => 1.0,
        "deg" => std::f64::consts::PI / 180.0,
        "N" | "n" => 1.0,
        other => return Err(ConfigError::UnknownUnit(other.to_string())),
    };
    Ok(Some(num * scale))
}
