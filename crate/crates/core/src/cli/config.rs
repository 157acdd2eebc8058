//! Experiment configuration: a TOML document with fixed sections.
//!
//! ```toml
//! [system]
//! dimension = 2
//! particles = [64, 128]   # or a single integer
//! beta = 5.0
//! pressure = [0.5, 2.0]   # or a single number
//!
//! [[shapes]]
//! family = "ball"
//!
//! [[shapes]]
//! family = "regular_polygon"
//! sides = 6
//! label = "hexagon"
//! ```
//!
//! Optional sections: `[schedule]`, `[init]`, `[run]`, `[output]`,
//! `[search]`, `[oracle]`. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{make_shape, Dimension, GridLayout, Shape, ShapeFamily};
use crate::interaction::Interaction;
use crate::sampler::{EnsembleParams, InitOptions, RunSchedule};
use crate::search::{NamedShape, SearchConfig, DEFAULT_VERDICT_Z};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    AtLine { line: usize, message: String },
    #[error("{0}")]
    General(String),
}

fn one_or_many<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub dimension: Dimension,
    #[serde(deserialize_with = "one_or_many")]
    pub particles: Vec<usize>,
    pub beta: f64,
    #[serde(deserialize_with = "one_or_many")]
    pub pressure: Vec<f64>,
    #[serde(default)]
    pub interaction: Interaction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_cap: Option<f64>,
}

/// A container shape. `family` is one of `ball` (aliases `disk`,
/// `sphere`), `hexagon`, `regular_polygon` (needs `sides`),
/// `cuboctahedron`, `convex_polygon` (needs `vertices`), `radial_grid`
/// (needs `layout` and `values`) or `record` (needs `path`, a JSON shape
/// record relative to the config file).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<GridLayout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl ShapeEntry {
    pub fn named(family: &str) -> Self {
        ShapeEntry { label: None, family: family.into(), sides: None, vertices: None, layout: None, values: None, path: None }
    }

    pub fn display_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match (self.family.as_str(), self.sides) {
            ("regular_polygon", Some(6)) => "hexagon".into(),
            ("regular_polygon", Some(n)) => format!("regular_polygon_{n}"),
            (f, _) => f.into(),
        }
    }

    fn family(&self) -> Result<Option<ShapeFamily>, String> {
        let need = |what: &str| format!("shape family `{}` requires `{what}`", self.family);
        Ok(Some(match self.family.as_str() {
            "ball" | "disk" | "sphere" => ShapeFamily::Ball,
            "hexagon" => ShapeFamily::RegularPolygon { sides: 6 },
            "regular_polygon" => ShapeFamily::RegularPolygon { sides: self.sides.ok_or_else(|| need("sides"))? },
            "cuboctahedron" => ShapeFamily::Cuboctahedron,
            "convex_polygon" => {
                ShapeFamily::ConvexPolygon { vertices: self.vertices.clone().ok_or_else(|| need("vertices"))? }
            }
            "radial_grid" => ShapeFamily::RadialGrid {
                layout: self.layout.ok_or_else(|| need("layout"))?,
                values: self.values.clone().ok_or_else(|| need("values"))?,
            },
            "record" => {
                if self.path.is_none() {
                    return Err(need("path"));
                }
                return Ok(None);
            }
            other => return Err(format!("unknown shape family `{other}`")),
        }))
    }

    /// Builds the canonical, volume-normalized shape.
    pub fn build(&self, dim: Dimension, base_dir: &Path) -> Result<Shape, String> {
        match self.family()? {
            Some(f) => make_shape(&f, dim).map_err(|e| e.to_string()),
            None => {
                let path = base_dir.join(self.path.as_ref().expect("checked"));
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| format!("cannot read shape record {}: {e}", path.display()))?;
                let shape: Shape = serde_json::from_str(&text)
                    .map_err(|e| format!("bad shape record {}: {e}", path.display()))?;
                if shape.dimension() != dim {
                    return Err(format!("shape record {} is {}-dimensional", path.display(), shape.dimension()));
                }
                Ok(shape)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub replicas: usize,
    /// Drawn from entropy when absent, then recorded in every output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Verdict confidence multiplier.
    pub z: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { replicas: 4, seed: None, z: DEFAULT_VERDICT_Z }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
    pub snapshots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: None, csv: true, json: true, svg: true, snapshots: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub spacing: Vec<f64>,
    pub grid_points: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection { spacing: vec![1.0], grid_points: 2001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    #[serde(default)]
    pub shapes: Vec<ShapeEntry>,
    #[serde(default)]
    pub schedule: RunSchedule,
    #[serde(default)]
    pub init: InitOptions,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub oracle: OracleSection,
}

/// First line (1-based) containing `needle`, searching from `from`.
fn locate(text: &str, needle: &str, from: usize) -> Option<usize> {
    text.lines().enumerate().skip(from).find(|(_, l)| l.contains(needle)).map(|(i, _)| i + 1)
}

/// Line of the `index`-th `[[shapes]]` entry, or of the `shapes` key.
fn shape_line(text: &str, index: usize) -> usize {
    let mut seen = 0;
    for (i, l) in text.lines().enumerate() {
        if l.trim_start().starts_with("[[shapes]]") {
            if seen == index {
                return locate(text, "family", i).unwrap_or(i + 1);
            }
            seen += 1;
        }
    }
    locate(text, "shapes", 0).unwrap_or(1)
}

fn at(text: &str, key: &str, message: String) -> ConfigError {
    let needle = format!("{key} ");
    match locate(text, &needle, 0).or_else(|| locate(text, key, 0)) {
        Some(line) => ConfigError::AtLine { line, message },
        None => ConfigError::General(message),
    }
}

impl ExperimentConfig {
    /// Minimal configuration with every other field at its default.
    pub fn minimal(dimension: Dimension, particles: usize, beta: f64, pressure: f64, shapes: Vec<ShapeEntry>) -> Self {
        ExperimentConfig {
            system: SystemSection {
                dimension,
                particles: vec![particles],
                beta,
                pressure: vec![pressure],
                interaction: Interaction::SoftCore,
                volume_cap: None,
            },
            shapes,
            schedule: RunSchedule::default(),
            init: InitOptions::default(),
            run: RunSection::default(),
            output: OutputSection::default(),
            search: SearchConfig::default(),
            oracle: OracleSection::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn ensemble(&self, particles: usize, pressure: f64) -> EnsembleParams {
        EnsembleParams {
            dimension: self.system.dimension,
            particles,
            beta: self.system.beta,
            pressure,
            interaction: self.system.interaction,
            volume_cap: self.system.volume_cap,
        }
    }

    pub fn build_shapes(&self, base_dir: &Path) -> Result<Vec<NamedShape>, ConfigError> {
        self.shapes
            .iter()
            .map(|e| {
                e.build(self.system.dimension, base_dir)
                    .map(|s| NamedShape::new(e.display_label(), s))
                    .map_err(ConfigError::General)
            })
            .collect()
    }

    /// Fills a missing seed from entropy; returns the seed in use. Drawn
    /// seeds stay below 2^53 so they survive TOML and JSON readers.
    pub fn resolve_seed(&mut self) -> u64 {
        *self.run.seed.get_or_insert_with(|| rand::random::<u64>() >> 11)
    }

    /// Checks value ranges and shape validity against the source `text`
    /// (for line numbers) and `base_dir` (for shape records).
    pub fn validate(&self, text: &str, base_dir: &Path) -> Result<(), ConfigError> {
        let s = &self.system;
        if s.particles.is_empty() || s.particles.contains(&0) {
            return Err(at(text, "particles", "particle counts must be at least 1".into()));
        }
        if !(s.beta > 0.0) || !s.beta.is_finite() {
            return Err(at(text, "beta", format!("beta must be positive, got {}", s.beta)));
        }
        if s.pressure.is_empty() || s.pressure.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(at(text, "pressure", "pressures must be finite and non-negative".into()));
        }
        if s.pressure.contains(&0.0) && s.volume_cap.is_none() {
            return Err(at(text, "pressure", "pressure 0 requires `volume_cap` in [system]".into()));
        }
        if let Some(cap) = s.volume_cap {
            if !(cap > 0.0) || !cap.is_finite() {
                return Err(at(text, "volume_cap", format!("volume cap must be positive, got {cap}")));
            }
        }
        if let Err(e) = self.schedule.validate() {
            return Err(at(text, "[schedule]", e.to_string()));
        }
        if self.run.replicas == 0 {
            return Err(at(text, "replicas", "at least one replica is required".into()));
        }
        if !(self.run.z > 0.0) {
            return Err(at(text, "z ", format!("z must be positive, got {}", self.run.z)));
        }
        if self.search.order > self.search.max_order {
            return Err(at(
                text,
                "order",
                format!("search order {} exceeds max_order {}", self.search.order, self.search.max_order),
            ));
        }
        if self.oracle.spacing.iter().any(|a| !(*a >= 1.0)) {
            return Err(at(text, "spacing", "lattice spacings must be at least 1 (the hard core)".into()));
        }
        let mut labels: Vec<String> = Vec::new();
        for (i, e) in self.shapes.iter().enumerate() {
            let line = shape_line(text, i);
            e.build(s.dimension, base_dir).map_err(|message| ConfigError::AtLine { line, message })?;
            let label = e.display_label();
            if labels.contains(&label) {
                return Err(ConfigError::AtLine { line, message: format!("duplicate shape label `{label}`") });
            }
            labels.push(label);
        }
        Ok(())
    }
}

/// Parses and validates a configuration; relative shape-record paths are
/// resolved against `base_dir`.
pub fn parse_config_in(text: &str, base_dir: &Path) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1).unwrap_or(0);
        ConfigError::AtLine { line, message: e.message().to_string() }
    })?;
    config.validate(text, base_dir)?;
    Ok(config)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_in(text, Path::new("."))
}
