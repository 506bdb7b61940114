//! Run configuration: a flat `key = value` file with optional `[section]`
//! headers, overridable from the command line.
//!
//! ```text
//! mode = convergence
//! case = table2
//! levels = 5
//!
//! [physics]
//! nu = 0.49999
//! storage = 1.0
//!
//! [time]
//! dt = 0.125
//! T = 0.5
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::forms::Formulation;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value` or `[section]`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownKey { line: usize, key: String, suggestion: Option<String> },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("`{key}`: cannot read `{value}` as {expected}")]
    Type { key: String, value: String, expected: &'static str },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Convergence,
    Scenario,
    SingleSolve,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "convergence" => Ok(Mode::Convergence),
            "scenario" => Ok(Mode::Scenario),
            "single-solve" => Ok(Mode::SingleSolve),
            _ => Err("convergence, scenario or single-solve".into()),
        }
    }
}

/// Named runs shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// Standard formulation, nearly incompressible.
    Table1,
    /// Total-pressure formulation, nearly incompressible.
    Table2,
    /// Total-pressure formulation with `ν = 0.4`.
    Table3Nu04,
    /// Total-pressure formulation without storage.
    Table4C0,
    /// Discretization errors of the network pressures.
    Table5Superconv,
    Brain,
}

impl Case {
    pub const ALL: [Case; 6] =
        [Case::Table1, Case::Table2, Case::Table3Nu04, Case::Table4C0, Case::Table5Superconv, Case::Brain];

    pub fn name(self) -> &'static str {
        match self {
            Case::Table1 => "table1",
            Case::Table2 => "table2",
            Case::Table3Nu04 => "table3-nu04",
            Case::Table4C0 => "table4-c0",
            Case::Table5Superconv => "table5-superconv",
            Case::Brain => "brain",
        }
    }

    pub fn default_formulation(self) -> FormulationChoice {
        match self {
            Case::Table1 => FormulationChoice::One(Formulation::Standard),
            Case::Brain => FormulationChoice::Both,
            _ => FormulationChoice::One(Formulation::TotalPressure),
        }
    }

    pub fn default_nu(self) -> f64 {
        match self {
            Case::Table3Nu04 => 0.4,
            Case::Brain => 0.4999,
            _ => 0.49999,
        }
    }

    pub fn default_storage(self) -> f64 {
        if self == Case::Table4C0 {
            0.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.strip_prefix("example1-").unwrap_or(s);
        Case::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Case::ALL.iter().map(|c| c.name()).collect();
            names.join(", ")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulationChoice {
    One(Formulation),
    Both,
}

impl FormulationChoice {
    pub fn list(self) -> Vec<Formulation> {
        match self {
            FormulationChoice::One(f) => vec![f],
            FormulationChoice::Both => vec![Formulation::TotalPressure, Formulation::Standard],
        }
    }
}

impl FromStr for FormulationChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "both" {
            Ok(FormulationChoice::Both)
        } else {
            s.parse().map(FormulationChoice::One).map_err(|_| "total-pressure, standard or both".to_string())
        }
    }
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub case: Case,
    pub formulation: FormulationChoice,
    pub levels: usize,
    pub nu: f64,
    pub storage: f64,
    /// Replaces the λ derived from `nu` when set.
    pub lambda: Option<f64>,
    pub dt: f64,
    pub t_final: f64,
    pub theta: f64,
    pub out: PathBuf,
    pub emit_matrices: bool,
    pub emit_energy_trace: bool,
}

pub const DEFAULT_LEVELS: usize = 5;

/// Every accepted key, qualified by section.
pub const KEYS: [&str; 14] = [
    "mode",
    "case",
    "formulation",
    "levels",
    "out",
    "physics.nu",
    "physics.storage",
    "physics.lambda",
    "time.dt",
    "time.T",
    "time.theta",
    "output.emit_matrices",
    "output.emit_energy_trace",
    "output.dir",
];

/// Raw `key -> value` pairs before defaults are applied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub entries: Vec<(String, String)>,
}

impl RawConfig {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Sets or replaces a qualified key.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }
}

fn suggest(key: &str) -> Option<String> {
    let bare = |k: &str| k.rsplit('.').next().unwrap_or(k).to_string();
    KEYS.iter()
        .map(|k| (strsim::levenshtein(&bare(key), &bare(k)).min(strsim::levenshtein(key, k)), *k))
        .filter(|(d, _)| *d <= 2)
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| bare(k))
}

/// Parses the text form; keys are validated but values are not.
pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    let mut section = String::new();
    let mut raw = RawConfig::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line: line_no, text: content.to_string() });
        };
        let (k, v) = (k.trim(), v.trim().trim_matches('"'));
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line: line_no, suggestion: suggest(&key), key });
        }
        if raw.get(&key).is_some() {
            return Err(ConfigError::Duplicate { line: line_no, key });
        }
        raw.entries.push((key, v.to_string()));
    }
    Ok(raw)
}

fn typed<T: FromStr>(raw: &RawConfig, key: &str, expected: &'static str) -> Result<Option<T>, ConfigError> {
    raw.get(key)
        .map(|v| v.parse::<T>().map_err(|_| ConfigError::Type { key: key.into(), value: v.into(), expected }))
        .transpose()
}

fn named<T: FromStr<Err = String>>(raw: &RawConfig, key: &str) -> Result<Option<T>, ConfigError> {
    raw.get(key)
        .map(|v| {
            v.parse::<T>().map_err(|reason| ConfigError::Invalid {
                key: key.into(),
                reason: format!("`{v}` is not one of {reason}"),
            })
        })
        .transpose()
}

fn flag(raw: &RawConfig, key: &str) -> Result<bool, ConfigError> {
    Ok(typed::<bool>(raw, key, "true or false")?.unwrap_or(false))
}

/// Applies defaults and validates.
pub fn resolve(raw: &RawConfig) -> Result<RunConfig, ConfigError> {
    let case: Case = named(raw, "case")?.ok_or_else(|| ConfigError::Missing("case".into()))?;
    let mode = named(raw, "mode")?.unwrap_or(if case == Case::Brain { Mode::Scenario } else { Mode::Convergence });
    if (mode == Mode::Scenario) != (case == Case::Brain) {
        return Err(ConfigError::Invalid {
            key: "mode".into(),
            reason: format!("mode {mode:?} does not apply to case {case}"),
        });
    }
    let levels = typed::<usize>(raw, "levels", "a positive integer")?.unwrap_or(DEFAULT_LEVELS);
    if mode == Mode::Convergence && levels < 2 {
        return Err(ConfigError::Invalid {
            key: "levels".into(),
            reason: format!("{levels} given, rates need at least 2"),
        });
    }
    if levels == 0 || levels > 8 {
        return Err(ConfigError::Invalid { key: "levels".into(), reason: format!("{levels} is outside 1..=8") });
    }
    let nu = typed::<f64>(raw, "physics.nu", "a number")?.unwrap_or(case.default_nu());
    if !(nu > 0.0 && nu < 0.5) {
        return Err(ConfigError::Invalid { key: "nu".into(), reason: format!("{nu} is outside (0, 0.5)") });
    }
    let storage = typed::<f64>(raw, "physics.storage", "a number")?.unwrap_or(case.default_storage());
    if !(storage >= 0.0 && storage.is_finite()) {
        return Err(ConfigError::Invalid { key: "storage".into(), reason: format!("{storage} must be >= 0") });
    }
    let lambda = typed::<f64>(raw, "physics.lambda", "a number")?;
    if let Some(l) = lambda {
        if !(l > 0.0 && l.is_finite()) {
            return Err(ConfigError::Invalid { key: "lambda".into(), reason: format!("{l} must be > 0") });
        }
    }
    let (dt_default, t_default) = if case == Case::Brain { (0.0125, 3.0) } else { (0.125, 0.5) };
    let dt = typed::<f64>(raw, "time.dt", "a number")?.unwrap_or(dt_default);
    let t_final = typed::<f64>(raw, "time.T", "a number")?.unwrap_or(t_default);
    let theta = typed::<f64>(raw, "time.theta", "a number")?.unwrap_or(0.5);
    if !(dt > 0.0 && t_final > 0.0) {
        return Err(ConfigError::Invalid { key: "dt".into(), reason: "dt and T must be positive".into() });
    }
    if !(0.5..=1.0).contains(&theta) {
        return Err(ConfigError::Invalid { key: "theta".into(), reason: format!("{theta} is outside [0.5, 1]") });
    }
    if raw.get("out").is_some() && raw.get("output.dir").is_some() {
        return Err(ConfigError::Invalid { key: "out".into(), reason: "give either out or [output] dir".into() });
    }
    let out =
        raw.get("out").or(raw.get("output.dir")).map_or_else(|| PathBuf::from(format!("out/{case}")), PathBuf::from);
    Ok(RunConfig {
        mode,
        case,
        formulation: named(raw, "formulation")?.unwrap_or(case.default_formulation()),
        levels,
        nu,
        storage,
        lambda,
        dt,
        t_final,
        theta,
        out,
        emit_matrices: flag(raw, "output.emit_matrices")?,
        emit_energy_trace: flag(raw, "output.emit_energy_trace")?,
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    resolve(&parse_raw(text)?)
}

pub fn read_raw(path: &std::path::Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_raw(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_convergence_config_gets_defaults() {
        let c = parse_config("mode = convergence\ncase = example1-table2\nlevels = 5\n").unwrap();
        assert_eq!(c.case, Case::Table2);
        assert_eq!(c.nu, 0.49999);
        assert_eq!(c.dt, 0.125);
        assert_eq!(c.t_final, 0.5);
        assert_eq!(c.storage, 1.0);
        assert_eq!(c.formulation, FormulationChoice::One(Formulation::TotalPressure));
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let err = parse_config("case = table2\n[physics]\nlamda = 3\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey { line: 3, key: "physics.lamda".into(), suggestion: Some("lambda".into()) }
        );
        assert!(err.to_string().contains("did you mean `lambda`"));
        let err = parse_config("case = table2\nfrobnicate = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { suggestion: None, .. }));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(parse_config("case = table2\nlevels = 1\n"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(parse_config("case = table2\nlevels = many\n"), Err(ConfigError::Type { .. })));
        assert!(matches!(parse_config("levels = 3\n"), Err(ConfigError::Missing(_))));
        assert!(matches!(parse_config("case = table9\n"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(parse_config("case = table2\n[physics]\nnu = 0.5\n"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(parse_config("case = table2\nmode = scenario\n"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(parse_config("case table2\n"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(parse_config("case = table2\ncase = table1\n"), Err(ConfigError::Duplicate { .. })));
    }

    #[test]
    fn case_defaults() {
        let c = parse_config("case = brain").unwrap();
        assert_eq!((c.mode, c.dt, c.t_final, c.formulation), (Mode::Scenario, 0.0125, 3.0, FormulationChoice::Both));
        assert_eq!(parse_config("case = table4-c0").unwrap().storage, 0.0);
        assert_eq!(parse_config("case = table3-nu04").unwrap().nu, 0.4);
        let c = parse_config("case = table1 # comment\n[output]\nemit_matrices = true\ndir = x\n").unwrap();
        assert!(c.emit_matrices && !c.emit_energy_trace);
        assert_eq!(c.out, PathBuf::from("x"));
        assert_eq!(c.formulation, FormulationChoice::One(Formulation::Standard));
    }
}
