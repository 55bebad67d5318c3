//! Experiment configuration: a TOML document with `model`, `run` and `output` blocks.

use kinetic_interface::model::{Dispersion, InterfaceLaw, ModelParams, Profile};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// The configuration shipped with the tool.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    /// A key that is not part of the schema, or a required key that is absent.
    #[error("unknown or missing key `{key}` (line {line})")]
    UnknownKey { key: String, line: usize },
    #[error("value of `{key}` out of range (line {line}): {message}")]
    Range { key: String, line: usize, message: String },
}

/// Model coefficients by named family plus scalars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub gamma: f64,
    pub t_o: f64,
    pub kappa: f64,
    pub interface: InterfaceLaw,
    pub dispersion: Dispersion,
    pub r1: Profile,
    pub r2: Profile,
}

impl ModelSpec {
    pub fn to_params(&self) -> ModelParams {
        ModelParams::from_families(
            self.gamma,
            self.t_o,
            self.kappa,
            self.interface.clone(),
            self.dispersion.clone(),
            self.r1.clone(),
            self.r2.clone(),
        )
    }
}

/// Uniform time grid `0, end/steps, …, end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.end * i as f64 / self.steps as f64).collect()
    }
}

/// Symmetric space grid on `[−half_width, half_width]` containing the interface node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceGrid {
    pub half_width: f64,
    pub spacing: f64,
}

/// Seeds, sample counts and grids shared by the subcommands; flags override each field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub seed: u64,
    pub samples: usize,
    pub lambda: f64,
    pub lambda_grid: Vec<f64>,
    pub t: f64,
    pub y: f64,
    pub k: f64,
    pub blocks: usize,
    pub reference_lambda: f64,
    pub reference_samples: usize,
    pub kill_tolerance: f64,
    pub t_grid: TimeGrid,
    pub x_grid: SpaceGrid,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            samples: 10_000,
            lambda: 1e4,
            lambda_grid: vec![1e2, 1e3, 1e4],
            t: 1.0,
            y: 1.0,
            k: 0.2,
            blocks: 20,
            reference_lambda: 1e6,
            reference_samples: 20_000,
            kill_tolerance: 1e-3,
            t_grid: TimeGrid { end: 0.5, steps: 20 },
            x_grid: SpaceGrid { half_width: 6.0, spacing: 0.125 },
        }
    }
}

/// Output locations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// JSONL experiment log; relative paths resolve against the directory of `--out`.
    pub log: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

/// Lowercase hex SHA-256 of the exact configuration bytes.
pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// First line assigning `key`, or the line of its table header; 0 if absent.
fn line_of_key(text: &str, key: &str) -> usize {
    let leaf = key.rsplit('.').next().unwrap_or(key);
    for (i, line) in text.lines().enumerate() {
        let l = line.trim_start();
        if let Some(rest) = l.strip_prefix(leaf) {
            if rest.trim_start().starts_with('=') {
                return i + 1;
            }
        }
        if l.starts_with('[') && l.trim_matches(|c| c == '[' || c == ']' || c == ' ').ends_with(leaf) {
            return i + 1;
        }
    }
    0
}

/// Line of `key = …` from `line` up to the next table header.
fn key_in_table(text: &str, line: usize, key: &str) -> Option<usize> {
    let start = line.checked_sub(1)?;
    for (i, l) in text.lines().enumerate().skip(start) {
        let l = l.trim_start();
        if i > start && l.starts_with('[') {
            return None;
        }
        if l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('=')) {
            return Some(i + 1);
        }
    }
    None
}

/// Name between the first pair of backticks of a deserializer message.
fn quoted_name(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

/// Parses and range-checks a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of_offset(text, s.start));
        let message = e.message().to_string();
        let key_error = message.starts_with("unknown field") || message.starts_with("missing field");
        match quoted_name(&message) {
            Some(key) if key_error => {
                // Tagged tables report the span of their header; point at the key in the body.
                let line = key_in_table(text, line, &key).unwrap_or(line);
                ConfigError::UnknownKey { key, line }
            }
            _ => ConfigError::Syntax { line, message },
        }
    })?;
    check_ranges(&cfg, text)?;
    Ok(cfg)
}

fn check_ranges(cfg: &ExperimentConfig, text: &str) -> Result<(), ConfigError> {
    let fail = |key: &str, message: &str| {
        Err(ConfigError::Range { key: key.to_string(), line: line_of_key(text, key), message: message.to_string() })
    };
    let m = &cfg.model;
    if !(m.gamma > 0.0 && m.gamma.is_finite()) {
        return fail("model.gamma", "must be positive and finite");
    }
    if !m.t_o.is_finite() {
        return fail("model.t_o", "must be finite");
    }
    if !(m.kappa > 0.0 && m.kappa.is_finite()) {
        return fail("model.kappa", "must be positive and finite");
    }
    match m.interface {
        InterfaceLaw::Constant { p_plus, p_minus, p_zero } => {
            if [p_plus, p_minus, p_zero].iter().any(|p| !(0.0..=1.0).contains(p)) {
                return fail("model.interface", "probabilities must lie in [0, 1]");
            }
        }
        InterfaceLaw::LogAbsorbing { transmit_share, p_c } => {
            if !(0.0..=1.0).contains(&transmit_share) {
                return fail("transmit_share", "must lie in [0, 1]");
            }
            if !(0.0..=1.0).contains(&p_c) {
                return fail("p_c", "must lie in [0, 1]");
            }
        }
    }
    let Dispersion::AbsSin { amplitude } = m.dispersion;
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return fail("amplitude", "must be positive and finite");
    }
    for (key, p) in [("model.r1", &m.r1), ("model.r2", &m.r2)] {
        if let Profile::SinPow { exponent } = p {
            if !(*exponent >= 0.0 && exponent.is_finite()) {
                return fail(key, "exponent must be nonnegative and finite");
            }
        }
    }
    let r = &cfg.run;
    let positive = |v: f64| v > 0.0 && v.is_finite();
    if r.samples == 0 {
        return fail("samples", "must be at least 1");
    }
    if !positive(r.lambda) {
        return fail("lambda", "must be positive and finite");
    }
    if r.lambda_grid.is_empty() || !r.lambda_grid.iter().all(|&l| positive(l)) {
        return fail("lambda_grid", "must be a nonempty list of positive values");
    }
    if !positive(r.t) {
        return fail("t", "must be positive and finite");
    }
    if !(r.y.is_finite() && r.y != 0.0) {
        return fail("y", "must be finite and nonzero");
    }
    if !(-0.5..0.5).contains(&r.k) {
        return fail("k", "must lie in [-1/2, 1/2)");
    }
    if r.blocks == 0 {
        return fail("blocks", "must be at least 1");
    }
    if !positive(r.reference_lambda) {
        return fail("reference_lambda", "must be positive and finite");
    }
    if r.reference_samples == 0 {
        return fail("reference_samples", "must be at least 1");
    }
    if !(positive(r.kill_tolerance) && r.kill_tolerance < 1.0) {
        return fail("kill_tolerance", "must lie in (0, 1)");
    }
    if !(positive(r.t_grid.end) && r.t_grid.steps > 0) {
        return fail("t_grid", "needs a positive end and at least one step");
    }
    if !grid_ok(r.x_grid) {
        return fail("x_grid", "spacing must be positive and divide half_width");
    }
    Ok(())
}

/// Whether the grid is nondegenerate and `half_width/spacing` is an integer.
pub fn grid_ok(g: SpaceGrid) -> bool {
    if !(g.spacing > 0.0 && g.half_width > g.spacing && g.half_width.is_finite()) {
        return false;
    }
    let n = g.half_width / g.spacing;
    (n - n.round()).abs() < 1e-9 * n.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_parses() {
        let cfg = parse_config(DEFAULT_CONFIG).unwrap();
        assert_eq!(cfg.model.to_params(), ModelParams::default_model());
    }

    #[test]
    fn empty_model_block_names_a_required_key() {
        match parse_config("[model]\n") {
            Err(ConfigError::UnknownKey { key, .. }) => assert_eq!(key, "gamma"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_key_is_a_syntax_error_on_its_line() {
        let text = DEFAULT_CONFIG.replacen("gamma = 1.0", "gamma = 1.0\ngamma = 2.0", 1);
        let line = text.lines().position(|l| l == "gamma = 2.0").unwrap() + 1;
        match parse_config(&text) {
            Err(ConfigError::Syntax { line: got, .. }) => assert_eq!(got, line),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_reported_with_its_line() {
        let text = DEFAULT_CONFIG.replacen("gamma = 1.0", "gamma = 1.0\nbogus = 3", 1);
        let line = text.lines().position(|l| l == "bogus = 3").unwrap() + 1;
        assert_eq!(parse_config(&text), Err(ConfigError::UnknownKey { key: "bogus".into(), line }));
    }

    #[test]
    fn unknown_key_inside_a_family_table_is_located() {
        let text = DEFAULT_CONFIG.replacen("p_c = 1.0", "p_c = 1.0\nfoo = 2", 1);
        let line = text.lines().position(|l| l == "foo = 2").unwrap() + 1;
        assert_eq!(parse_config(&text), Err(ConfigError::UnknownKey { key: "foo".into(), line }));
    }

    #[test]
    fn negative_rate_is_a_range_error() {
        let text = DEFAULT_CONFIG.replacen("gamma = 1.0", "gamma = -1.0", 1);
        assert!(matches!(parse_config(&text), Err(ConfigError::Range { key, .. }) if key == "model.gamma"));
    }

    #[test]
    fn hash_is_sensitive_to_every_byte() {
        assert_ne!(config_hash(DEFAULT_CONFIG), config_hash(&format!("{DEFAULT_CONFIG} ")));
        assert_eq!(config_hash("").len(), 64);
    }
}
