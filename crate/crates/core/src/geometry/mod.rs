//! Star-shaped container geometry.
//!
//! A [`Shape`] is a bounded region described relative to a reference point,
//! normalized to a fixed volume and brought into a canonical pose (centroid at
//! the origin, orientation fixed by a deterministic rule). A
//! [`ScaledContainer`] is a similarity copy of a shape with a chosen volume;
//! particles live inside containers.

mod body;
mod canonical;
mod container;
mod motion;
mod quadrature;
mod radial;
mod shape;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use container::ScaledContainer;
pub use motion::RigidMotion;
pub use quadrature::gauss_legendre;
pub use radial::{GridLayout, RadialGrid};
pub use shape::{Shape, ShapeFamily, ShapeRecord};

/// Volume every shape is normalized to.
pub const TARGET_VOLUME: f64 = 10.0;

/// Lower bound on the radial function of a normalized shape.
pub const MIN_RADIUS: f64 = 1.0;

/// Default node count for two-dimensional radial grids.
pub const DEFAULT_CIRCLE_NODES: usize = 256;
/// Default polar x azimuthal node counts for three-dimensional radial grids.
pub const DEFAULT_SPHERE_NODES: (usize, usize) = (32, 64);

/// Points are stored with three components; the third is zero in two
/// dimensions.
pub type Point = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unsupported dimension {0}, expected 2 or 3")]
    UnsupportedDimension(usize),
    #[error("shape family `{family}` is not defined in {dim} dimensions")]
    DimensionMismatch { family: &'static str, dim: usize },
    #[error("a regular polygon needs at least 3 sides, got {0}")]
    TooFewSides(usize),
    #[error("radial value {value} at node {index} is below the minimum radius 1")]
    RadiusBelowMinimum { index: usize, value: f64 },
    #[error("radial value at node {index} is not a positive finite number")]
    NonFiniteRadius { index: usize },
    #[error("scaling to volume {target} leaves a minimum radius of {min_radius} < 1")]
    ScalingViolatesMinimum { target: f64, min_radius: f64 },
    #[error("shape is degenerate (zero volume)")]
    Degenerate,
    #[error("direction vector has zero length")]
    ZeroDirection,
    #[error("malformed shape: {0}")]
    Malformed(String),
    #[error("invalid container volume {0}")]
    InvalidVolume(f64),
    #[error("radial grid expects {expected} values, got {got}")]
    GridSize { expected: usize, got: usize },
}

/// Spatial dimension of the model, two or three.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn new(d: usize) -> Result<Self, GeometryError> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(GeometryError::UnsupportedDimension(other)),
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.get() as f64
    }
}

impl TryFrom<u8> for Dimension {
    type Error = GeometryError;
    fn try_from(d: u8) -> Result<Self, Self::Error> {
        Dimension::new(d as usize)
    }
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        d.get() as u8
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// A unit vector in the direction sphere of the container's ambient space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction(Point);

impl Direction {
    /// Normalizes `v`. In two dimensions the third component is dropped.
    pub fn new(v: Point, dim: Dimension) -> Result<Self, GeometryError> {
        let v = match dim {
            Dimension::Two => [v[0], v[1], 0.0],
            Dimension::Three => v,
        };
        let n = norm(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(Direction([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn from_angle(theta: f64) -> Self {
        Direction([theta.cos(), theta.sin(), 0.0])
    }

    /// Polar angle from the +z axis, azimuth from +x.
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        let s = polar.sin();
        Direction([s * azimuth.cos(), s * azimuth.sin(), polar.cos()])
    }

    #[inline]
    pub fn as_array(&self) -> &Point {
        &self.0
    }

    /// Angle in `[0, 2π)` of the in-plane component.
    pub fn angle(&self) -> f64 {
        let a = self.0[1].atan2(self.0[0]);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}

/// Fixed probe directions used to compare shapes and break orientation ties.
pub fn probe_directions(dim: Dimension) -> Vec<Direction> {
    match dim {
        Dimension::Two => (0..96)
            .map(|k| Direction::from_angle(std::f64::consts::TAU * (k as f64 + 0.371) / 96.0))
            .collect(),
        Dimension::Three => {
            // Fibonacci sphere.
            let n = 200;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    Direction([r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
    }
}

#[inline]
pub(crate) fn norm(v: &Point) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Builds a canonical, volume-normalized shape from a family descriptor.
pub fn make_shape(family: &ShapeFamily, dim: Dimension) -> Result<Shape, GeometryError> {
    Shape::build(family, dim)
}

/// Enclosed d-volume of `shape`.
pub fn volume(shape: &Shape) -> f64 {
    shape.volume()
}

/// Scales `shape` about the origin so its volume equals `target`.
pub fn normalize_to_volume(shape: &Shape, target: f64) -> Result<Shape, GeometryError> {
    shape.normalized_to_volume(target)
}

/// Removes translation and rotation: centroid to the origin, orientation fixed
/// by the canonical rule.
pub fn canonicalize(shape: &Shape) -> Result<Shape, GeometryError> {
    shape.canonicalized()
}

pub fn contains(container: &ScaledContainer, point: &Point) -> bool {
    container.contains(point)
}

pub fn sample_uniform_point<R: rand::Rng + ?Sized>(container: &ScaledContainer, rng: &mut R) -> Point {
    container.sample_uniform_point(rng)
}
