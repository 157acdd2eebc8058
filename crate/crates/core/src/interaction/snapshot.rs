//! Plain-text configuration snapshots.
//!
//! ```text
//! # any number of comment lines
//! snapshot 1
//! dimension 2
//! particles 2
//! volume 64
//! shape {"family":"ball",...}
//! 0.25 -1.5
//! 1.75 0.5
//! ```
//!
//! Numbers use the shortest decimal form that parses back to the same
//! double, so a snapshot round-trips exactly.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{Dimension, Point, ScaledContainer, Shape};

use super::{ConfigurationError, Interaction, ParticleConfiguration};

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Configuration(#[from] ConfigurationError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dimension: Dimension,
    pub volume: f64,
    pub shape: Shape,
    pub positions: Vec<Point>,
}

impl Snapshot {
    pub fn of(config: &ParticleConfiguration) -> Self {
        Snapshot {
            dimension: config.dimension(),
            volume: config.container().volume(),
            shape: (**config.container().shape()).clone(),
            positions: config.positions().to_vec(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let shape = serde_json::to_string(&self.shape).expect("shape serializes");
        let _ = writeln!(s, "snapshot {FORMAT_VERSION}");
        let _ = writeln!(s, "dimension {}", self.dimension);
        let _ = writeln!(s, "particles {}", self.positions.len());
        let _ = writeln!(s, "volume {}", self.volume);
        let _ = writeln!(s, "shape {shape}");
        for p in &self.positions {
            match self.dimension {
                Dimension::Two => writeln!(s, "{} {}", p[0], p[1]),
                Dimension::Three => writeln!(s, "{} {} {}", p[0], p[1], p[2]),
            }
            .expect("write to string");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, SnapshotError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut header = |key: &str| -> Result<(usize, String), SnapshotError> {
            let (line, text) = lines.next().ok_or(SnapshotError::Parse {
                line: 0,
                message: format!("missing `{key}` line"),
            })?;
            let rest = text.strip_prefix(key).and_then(|r| r.strip_prefix(' ')).ok_or_else(|| {
                SnapshotError::Parse { line, message: format!("expected `{key} ...`") }
            })?;
            Ok((line, rest.trim().to_string()))
        };
        let bad = |line: usize, message: String| SnapshotError::Parse { line, message };

        let (line, v) = header("snapshot")?;
        if v != FORMAT_VERSION.to_string() {
            return Err(bad(line, format!("unsupported snapshot version {v}")));
        }
        let (line, v) = header("dimension")?;
        let dimension = v
            .parse::<usize>()
            .ok()
            .and_then(|d| Dimension::new(d).ok())
            .ok_or_else(|| bad(line, format!("bad dimension `{v}`")))?;
        let (line, v) = header("particles")?;
        let n: usize = v.parse().map_err(|_| bad(line, format!("bad particle count `{v}`")))?;
        let (line, v) = header("volume")?;
        let volume: f64 = v.parse().map_err(|_| bad(line, format!("bad volume `{v}`")))?;
        let (line, v) = header("shape")?;
        let shape: Shape = serde_json::from_str(&v).map_err(|e| bad(line, format!("bad shape record: {e}")))?;
        drop(header);

        let mut positions = Vec::with_capacity(n);
        for (line, text) in lines {
            let coords: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse).collect();
            let coords = coords.map_err(|_| bad(line, "bad coordinate".into()))?;
            if coords.len() != dimension.get() {
                return Err(bad(line, format!("expected {} coordinates, got {}", dimension.get(), coords.len())));
            }
            positions.push([coords[0], coords[1], coords.get(2).copied().unwrap_or(0.0)]);
        }
        if positions.len() != n {
            return Err(bad(0, format!("expected {n} position rows, got {}", positions.len())));
        }
        Ok(Snapshot { dimension, volume, shape, positions })
    }

    /// Rebuilds a validated configuration.
    pub fn into_configuration(self, interaction: Interaction) -> Result<ParticleConfiguration, SnapshotError> {
        let container = ScaledContainer::new(Arc::new(self.shape), self.volume)
            .map_err(ConfigurationError::from)?;
        Ok(ParticleConfiguration::new(container, self.positions, interaction)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ShapeFamily;

    #[test]
    fn text_round_trip_is_exact() {
        let hex = Arc::new(Shape::build(&ShapeFamily::RegularPolygon { sides: 6 }, Dimension::Two).unwrap());
        let c = ScaledContainer::new(hex, 37.123456789).unwrap();
        let pos = vec![[0.1 + 0.2, -1.0 / 3.0, 0.0], [1.7, 1e-17, 0.0]];
        let cfg = ParticleConfiguration::new(c, pos, Interaction::SoftCore).unwrap();
        let snap = Snapshot::of(&cfg);
        let text = format!("# header\n{}", snap.to_text());
        let back = Snapshot::parse(&text).unwrap();
        assert_eq!(back, snap);
        let cfg2 = back.into_configuration(Interaction::SoftCore).unwrap();
        assert_eq!(cfg2.positions(), cfg.positions());
    }

    #[test]
    fn malformed_rows_are_line_anchored() {
        let text = "snapshot 1\ndimension 2\nparticles 1\nvolume 10\nshape {\"family\":\"ball\",\"dimension\":2,\"center\":[0,0,0],\"radius\":1.8}\n1 2 3\n";
        match Snapshot::parse(text) {
            Err(SnapshotError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }
}
