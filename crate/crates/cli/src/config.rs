//! Experiment configuration: JSON schema, defaults and validation.

use std::path::{Path, PathBuf};

use aniso_hardy::dilation::DilationDescriptor;
use aniso_hardy::frames::{FrameDescriptor, ProfileDescriptor};
use aniso_hardy::weights::WeightDescriptor;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Suites the runner knows, in execution order.
pub const SUITES: [&str; 7] = ["geometry", "weights", "frames", "area", "decompose", "journe", "operators"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Factor dilations of the product experiments.
    #[serde(default = "default_dilations")]
    pub dilations: [DilationDescriptor; 2],
    /// Dilations whose geometry and cube trees the geometry suite checks.
    #[serde(default = "default_geometry_dilations")]
    pub geometry_dilations: Vec<DilationDescriptor>,
    #[serde(default)]
    pub grid: GridConfig,
    /// Weights of the area suite; the decomposition uses the first.
    #[serde(default = "default_weights")]
    pub weights: Vec<WeightDescriptor>,
    #[serde(default = "default_frame")]
    pub frame: FrameDescriptor,
    #[serde(default)]
    pub triplet: TripletConfig,
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Seeded inputs per randomized sweep (5 for the decomposition, 20 for
    /// the area suite when unset).
    #[serde(default)]
    pub inputs: Option<usize>,
}

/// Product grid of the decomposition and operator suites: one axis per
/// factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_widths: [f64; 2],
    pub samples: [usize; 2],
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_widths: [8.0, 8.0], samples: [256, 256] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentChoice {
    Auto(String),
    Fixed([u32; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletConfig {
    pub p: f64,
    pub q: f64,
    pub s: MomentChoice,
    /// Critical index of the decomposition weight.
    #[serde(default = "one")]
    pub q_w: f64,
}

impl Default for TripletConfig {
    fn default() -> Self {
        Self { p: 1.0, q: 2.0, s: MomentChoice::Auto("auto".into()), q_w: 1.0 }
    }
}

impl TripletConfig {
    pub fn moments(&self) -> Option<[u32; 2]> {
        match &self.s {
            MomentChoice::Auto(_) => None,
            MomentChoice::Fixed(s) => Some(*s),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn dil(rows: Vec<Vec<f64>>) -> DilationDescriptor {
    DilationDescriptor { matrix: rows, epsilon_bracket: aniso_hardy::dilation::DEFAULT_EPSILON }
}
fn default_dilations() -> [DilationDescriptor; 2] {
    [dil(vec![vec![2.0]]), dil(vec![vec![2.0]])]
}
fn default_geometry_dilations() -> Vec<DilationDescriptor> {
    vec![dil(vec![vec![2.0]]), dil(vec![vec![2.0, 0.0], vec![0.0, 4.0]]), dil(vec![vec![2.0, 1.0], vec![0.0, 2.0]])]
}
fn default_weights() -> Vec<WeightDescriptor> {
    vec![WeightDescriptor::Constant, WeightDescriptor::ProductPower { alphas: [0.5, 0.5] }]
}
fn default_frame() -> FrameDescriptor {
    FrameDescriptor { s: 1, profile: ProfileDescriptor { kind: "bump".into(), inner: 1.0, outer: 2.0 }, levels: None }
}
fn default_suites() -> Vec<String> {
    SUITES.iter().map(|s| s.to_string()).collect()
}
fn default_seed() -> u64 {
    20240601
}
fn default_output() -> PathBuf {
    PathBuf::from("reports")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

fn invalid(pointer: &str, message: impl Into<String>) -> CliError {
    CliError::ConfigInvalid { pointer: pointer.into(), message: message.into() }
}

/// serde_path_to_error paths (`a.b[2]`) as JSON pointers (`/a/b/2`).
fn pointer_from_path(path: &str) -> String {
    if path == "." || path.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    for seg in path.split('.') {
        let mut rest = seg;
        if let Some(i) = rest.find('[') {
            if i > 0 {
                out.push('/');
                out.push_str(&rest[..i].replace('~', "~0").replace('/', "~1"));
            }
            rest = &rest[i..];
            while let Some(end) = rest.find(']') {
                out.push('/');
                out.push_str(&rest[1..end]);
                rest = &rest[end + 1..];
            }
        } else {
            out.push('/');
            out.push_str(&rest.replace('~', "~0").replace('/', "~1"));
        }
    }
    out
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = pointer_from_path(&e.path().to_string());
            invalid(&pointer, e.inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid("", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Semantic checks beyond the schema.
    pub fn validate(&self) -> Result<(), CliError> {
        for (i, s) in self.suites.iter().enumerate() {
            if !SUITES.contains(&s.as_str()) {
                return Err(invalid(&format!("/suites/{i}"), format!("unknown suite {s:?}; expected one of {SUITES:?}")));
            }
            if self.suites[..i].contains(s) {
                return Err(invalid(&format!("/suites/{i}"), format!("suite {s:?} listed twice")));
            }
        }
        for (i, d) in self.dilations.iter().enumerate() {
            if d.matrix.len() != 1 {
                return Err(invalid(&format!("/dilations/{i}/matrix"), "product factors must be one-dimensional"));
            }
            d.build().map_err(|e| invalid(&format!("/dilations/{i}"), e.to_string()))?;
        }
        for (i, d) in self.geometry_dilations.iter().enumerate() {
            d.build().map_err(|e| invalid(&format!("/geometry_dilations/{i}"), e.to_string()))?;
        }
        for i in 0..2 {
            if !(self.grid.half_widths[i] > 0.0 && self.grid.half_widths[i].is_finite()) {
                return Err(invalid(&format!("/grid/half_widths/{i}"), "half width must be positive"));
            }
            let n = self.grid.samples[i];
            if n < 16 || !n.is_power_of_two() {
                return Err(invalid(&format!("/grid/samples/{i}"), "sample count must be a power of two, at least 16"));
            }
        }
        for (i, w) in self.weights.iter().enumerate() {
            match w {
                WeightDescriptor::Table { .. } => {
                    return Err(invalid(&format!("/weights/{i}"), "table weights are not supported by the suites"));
                }
                WeightDescriptor::Power { .. } => {
                    return Err(invalid(&format!("/weights/{i}"), "suites run on product grids; use productpower"));
                }
                WeightDescriptor::ProductPower { alphas } if alphas.iter().any(|a| !a.is_finite()) => {
                    return Err(invalid(&format!("/weights/{i}/alphas"), "exponents must be finite"));
                }
                _ => {}
            }
        }
        self.frame.profile.build().map_err(|e| invalid("/frame/profile", e.to_string()))?;
        let t = &self.triplet;
        if !(t.p > 0.0 && t.p <= 1.0) {
            return Err(invalid("/triplet/p", "p must lie in (0, 1]"));
        }
        if !(t.q > 1.0 && t.q.is_finite()) {
            return Err(invalid("/triplet/q", "q must lie in (1, ∞)"));
        }
        if let MomentChoice::Auto(s) = &t.s {
            if s != "auto" {
                return Err(invalid("/triplet/s", format!("expected \"auto\" or two integers, got {s:?}")));
            }
        }
        if !(t.q_w >= 1.0) {
            return Err(invalid("/triplet/q_w", "critical index is at least 1"));
        }
        if self.inputs == Some(0) {
            return Err(invalid("/inputs", "at least one input"));
        }
        Ok(())
    }

    /// Suite seed derived from the run seed and the suite name.
    pub fn suite_seed(&self, suite: &str) -> u64 {
        let h = suite.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        self.seed ^ h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.suites.len(), 7);
    }

    #[test]
    fn unknown_suite_points_at_the_entry() {
        let e = ExperimentConfig::from_json(r#"{"suites": ["geometry", "bogus"]}"#).unwrap_err();
        match e {
            CliError::ConfigInvalid { pointer, .. } => assert_eq!(pointer, "/suites/1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_errors_carry_a_pointer() {
        let e = ExperimentConfig::from_json(r#"{"grid": {"half_widths": [8.0, 8.0], "samples": [256, "x"]}}"#).unwrap_err();
        match e {
            CliError::ConfigInvalid { pointer, .. } => assert_eq!(pointer, "/grid/samples/1"),
            other => panic!("{other:?}"),
        }
        let e = ExperimentConfig::from_json(r#"{"triplet": {"p": 2.0, "q": 2.0, "s": "auto"}}"#).unwrap_err();
        assert!(matches!(e, CliError::ConfigInvalid { ref pointer, .. } if pointer == "/triplet/p"));
    }

    #[test]
    fn path_conversion() {
        assert_eq!(pointer_from_path("a.b[2].c"), "/a/b/2/c");
        assert_eq!(pointer_from_path("suites[0]"), "/suites/0");
        assert_eq!(pointer_from_path("."), "");
    }
}
