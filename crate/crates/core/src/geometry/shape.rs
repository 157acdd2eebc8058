use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::body::{ConvexPolygon, ConvexPolyhedron};
use super::radial::{GridLayout, RadialGrid};
use super::{canonical, probe_directions, Dimension, Direction, GeometryError, Point, RigidMotion};
use super::{MIN_RADIUS, TARGET_VOLUME};

/// Descriptor of a shape family, before normalization and canonicalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ShapeFamily {
    /// Disk in two dimensions, sphere in three.
    Ball,
    RegularPolygon { sides: usize },
    Cuboctahedron,
    ConvexPolygon { vertices: Vec<[f64; 2]> },
    RadialGrid { layout: GridLayout, values: Vec<f64> },
}

impl ShapeFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeFamily::Ball => "ball",
            ShapeFamily::RegularPolygon { .. } => "regular_polygon",
            ShapeFamily::Cuboctahedron => "cuboctahedron",
            ShapeFamily::ConvexPolygon { .. } => "convex_polygon",
            ShapeFamily::RadialGrid { .. } => "radial_grid",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Body {
    Ball { center: Vector3<f64>, radius: f64 },
    Polygon(ConvexPolygon),
    Polyhedron(ConvexPolyhedron),
    Radial(RadialGrid),
}

/// A bounded star-shaped region, usually canonical with volume 10.
///
/// Immutable; share behind `Arc` between containers and threads.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "ShapeRecord", try_from = "ShapeRecord")]
pub struct Shape {
    dim: Dimension,
    pub(crate) body: Body,
}

impl Shape {
    pub(crate) fn from_body(dim: Dimension, body: Body) -> Self {
        Shape { dim, body }
    }

    pub(crate) fn build(family: &ShapeFamily, dim: Dimension) -> Result<Self, GeometryError> {
        let mismatch = || GeometryError::DimensionMismatch { family: family.name(), dim: dim.get() };
        let raw = match family {
            ShapeFamily::Ball => Shape::from_body(dim, Body::Ball { center: Vector3::zeros(), radius: 1.0 }),
            ShapeFamily::RegularPolygon { sides } => {
                if dim != Dimension::Two {
                    return Err(mismatch());
                }
                if *sides < 3 {
                    return Err(GeometryError::TooFewSides(*sides));
                }
                Shape::from_body(dim, Body::Polygon(ConvexPolygon::regular(*sides, 1.0)))
            }
            ShapeFamily::Cuboctahedron => {
                if dim != Dimension::Three {
                    return Err(mismatch());
                }
                Shape::from_body(dim, Body::Polyhedron(ConvexPolyhedron::cuboctahedron()))
            }
            ShapeFamily::ConvexPolygon { vertices } => {
                if dim != Dimension::Two {
                    return Err(mismatch());
                }
                Shape::from_body(dim, Body::Polygon(ConvexPolygon::new(vertices.clone())?))
            }
            ShapeFamily::RadialGrid { layout, values } => {
                if layout.dimension() != dim {
                    return Err(mismatch());
                }
                let grid = RadialGrid::new(*layout, values.clone())?;
                if let Some((index, &value)) =
                    values.iter().enumerate().find(|(_, v)| **v < MIN_RADIUS)
                {
                    return Err(GeometryError::RadiusBelowMinimum { index, value });
                }
                Shape::from_body(dim, Body::Radial(grid))
            }
        };
        raw.canonicalized()?.normalized_to_volume(TARGET_VOLUME)
    }

    /// Canonical, normalized shape from an already-built radial grid.
    pub fn from_radial_grid(grid: RadialGrid) -> Result<Self, GeometryError> {
        let dim = grid.dimension();
        Shape::from_body(dim, Body::Radial(grid))
            .canonicalized()?
            .normalized_to_volume(TARGET_VOLUME)
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn family_name(&self) -> &'static str {
        match &self.body {
            Body::Ball { .. } => "ball",
            Body::Polygon(_) => "polygon",
            Body::Polyhedron(_) => "polyhedron",
            Body::Radial(_) => "radial_grid",
        }
    }

    pub fn radial_grid(&self) -> Option<&RadialGrid> {
        match &self.body {
            Body::Radial(g) => Some(g),
            _ => None,
        }
    }

    /// Vertex list of polygon and polyhedron shapes.
    pub fn vertices(&self) -> Option<Vec<Point>> {
        let to_points = |v: &[Vector3<f64>]| v.iter().map(|p| [p.x, p.y, p.z]).collect();
        match &self.body {
            Body::Polygon(p) => Some(to_points(p.vertices())),
            Body::Polyhedron(p) => Some(to_points(p.vertices())),
            _ => None,
        }
    }

    pub fn volume(&self) -> f64 {
        match (&self.body, self.dim) {
            (Body::Ball { radius, .. }, Dimension::Two) => std::f64::consts::PI * radius * radius,
            (Body::Ball { radius, .. }, Dimension::Three) => {
                4.0 / 3.0 * std::f64::consts::PI * radius.powi(3)
            }
            (Body::Polygon(p), _) => p.area(),
            (Body::Polyhedron(p), _) => p.volume(),
            (Body::Radial(g), _) => g.volume(),
        }
    }

    /// Centroid in world coordinates.
    pub fn centroid(&self) -> Point {
        let c = match &self.body {
            Body::Ball { center, .. } => *center,
            Body::Polygon(p) => p.centroid(),
            Body::Polyhedron(p) => p.centroid(),
            Body::Radial(g) => g.frame.transpose() * g.local_centroid() + g.pole,
        };
        [c.x, c.y, c.z]
    }

    /// Distance from the world origin to the boundary along `dir`. Requires
    /// the origin to lie inside the shape.
    pub fn radius(&self, dir: &Direction) -> f64 {
        let a = dir.as_array();
        let u = Vector3::new(a[0], a[1], a[2]);
        match &self.body {
            Body::Ball { center, radius } => {
                let b = u.dot(center);
                b + (b * b - center.norm_squared() + radius * radius).sqrt()
            }
            Body::Polygon(p) => p.radius(&u),
            Body::Polyhedron(p) => p.radius(&u),
            Body::Radial(g) if g.pole.norm() == 0.0 => g.interpolate(&(g.frame * u)),
            Body::Radial(g) => {
                // Bisection on the first exit; exact when star-shaped about
                // the origin.
                let mut lo = 0.0;
                let mut hi = g.max_extent() * 2.0 + 1.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let x = [u.x * mid, u.y * mid, u.z * mid];
                    if g.contains_scaled(&x, 1.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 * hi {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Smallest radial value that the `ρ >= 1` floor applies to: the inradius
    /// about the origin for exact bodies, the smallest grid value for radial
    /// grids.
    pub fn min_radius(&self) -> f64 {
        match &self.body {
            Body::Ball { center, radius } => radius - center.norm(),
            Body::Polygon(p) => p.min_radius(),
            Body::Polyhedron(p) => p.min_radius(),
            Body::Radial(g) => g.min_value(),
        }
    }

    /// Upper bound on the distance of any point of the shape from the origin.
    pub fn max_extent(&self) -> f64 {
        match &self.body {
            Body::Ball { center, radius } => radius + center.norm(),
            Body::Polygon(p) => p.max_extent(),
            Body::Polyhedron(p) => p.max_extent(),
            Body::Radial(g) => g.max_extent(),
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.contains_scaled(x, 1.0)
    }

    /// Membership in the copy of this shape scaled by `scale` about the origin.
    #[inline]
    pub fn contains_scaled(&self, x: &Point, scale: f64) -> bool {
        match &self.body {
            Body::Ball { center, radius } => {
                let dx = x[0] - scale * center.x;
                let dy = x[1] - scale * center.y;
                let dz = x[2] - scale * center.z;
                dx * dx + dy * dy + dz * dz <= scale * scale * radius * radius
            }
            Body::Polygon(p) => p.contains_scaled(x, scale),
            Body::Polyhedron(p) => p.contains_scaled(x, scale),
            Body::Radial(g) => g.contains_scaled(x, scale),
        }
    }

    /// Image under a rigid motion. Two-dimensional shapes only accept motions
    /// in the plane.
    pub fn transformed(&self, m: &RigidMotion) -> Shape {
        let body = match &self.body {
            Body::Ball { center, radius } => Body::Ball { center: m.apply(center), radius: *radius },
            Body::Polygon(p) => Body::Polygon(p.transformed(m)),
            Body::Polyhedron(p) => Body::Polyhedron(p.transformed(m)),
            Body::Radial(g) => {
                let frame = g.frame * m.rotation.transpose();
                let pole = m.apply(&g.pole);
                Body::Radial(g.clone().with_pose(pole, frame))
            }
        };
        Shape::from_body(self.dim, body)
    }

    /// Linear scaling about the origin.
    pub fn scaled(&self, s: f64) -> Shape {
        let body = match &self.body {
            Body::Ball { center, radius } => Body::Ball { center: center * s, radius: radius * s },
            Body::Polygon(p) => Body::Polygon(p.map(|v| v * s)),
            Body::Polyhedron(p) => Body::Polyhedron(p.map(|v| v * s)),
            Body::Radial(g) => Body::Radial(g.scaled(s)),
        };
        Shape::from_body(self.dim, body)
    }

    pub fn normalized_to_volume(&self, target: f64) -> Result<Shape, GeometryError> {
        let vol = self.volume();
        if !(vol > 0.0) || !vol.is_finite() {
            return Err(GeometryError::Degenerate);
        }
        if !(target > 0.0) || !target.is_finite() {
            return Err(GeometryError::InvalidVolume(target));
        }
        let out = if (vol - target).abs() <= 1e-14 * target {
            self.clone()
        } else {
            self.scaled((target / vol).powf(1.0 / self.dim.as_f64()))
        };
        let min_radius = out.min_radius();
        if min_radius < MIN_RADIUS - 1e-12 {
            return Err(GeometryError::ScalingViolatesMinimum { target, min_radius });
        }
        Ok(out)
    }

    pub fn canonicalized(&self) -> Result<Shape, GeometryError> {
        canonical::canonicalize(self)
    }

    /// Radial values along the fixed probe directions.
    pub fn signature(&self) -> Vec<f64> {
        probe_directions(self.dim).iter().map(|d| self.radius(d)).collect()
    }

    /// Largest difference of the radial functions over the probe directions.
    pub fn radial_distance(&self, other: &Shape) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.signature()
            .iter()
            .zip(other.signature())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Boundary points at `n` equally spaced angles (two dimensions).
    pub fn outline(&self, n: usize) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let d = Direction::from_angle(std::f64::consts::TAU * k as f64 / n as f64);
                let r = self.radius(&d);
                let a = d.as_array();
                [a[0] * r, a[1] * r, 0.0]
            })
            .collect()
    }
}

/// Exact equality of the stored representation.
impl PartialEq for Shape {
    fn eq(&self, other: &Self) -> bool {
        ShapeRecord::from(self) == ShapeRecord::from(other)
    }
}

/// Self-describing serialized form of a [`Shape`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ShapeRecord {
    Ball { dimension: Dimension, center: Point, radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Polyhedron { vertices: Vec<Point>, faces: Vec<Vec<usize>> },
    RadialGrid { layout: GridLayout, pole: Point, frame: [[f64; 3]; 3], values: Vec<f64> },
}

impl From<Shape> for ShapeRecord {
    fn from(s: Shape) -> Self {
        ShapeRecord::from(&s)
    }
}

impl From<&Shape> for ShapeRecord {
    fn from(s: &Shape) -> Self {
        match &s.body {
            Body::Ball { center, radius } => ShapeRecord::Ball {
                dimension: s.dim,
                center: [center.x, center.y, center.z],
                radius: *radius,
            },
            Body::Polygon(p) => {
                ShapeRecord::Polygon { vertices: p.vertices().iter().map(|v| [v.x, v.y]).collect() }
            }
            Body::Polyhedron(p) => ShapeRecord::Polyhedron {
                vertices: p.vertices().iter().map(|v| [v.x, v.y, v.z]).collect(),
                faces: p.faces().to_vec(),
            },
            Body::Radial(g) => {
                let f = g.frame;
                ShapeRecord::RadialGrid {
                    layout: g.layout(),
                    pole: [g.pole.x, g.pole.y, g.pole.z],
                    frame: [
                        [f[(0, 0)], f[(0, 1)], f[(0, 2)]],
                        [f[(1, 0)], f[(1, 1)], f[(1, 2)]],
                        [f[(2, 0)], f[(2, 1)], f[(2, 2)]],
                    ],
                    values: g.values().to_vec(),
                }
            }
        }
    }
}

impl TryFrom<ShapeRecord> for Shape {
    type Error = GeometryError;
    fn try_from(r: ShapeRecord) -> Result<Self, Self::Error> {
        Ok(match r {
            ShapeRecord::Ball { dimension, center, radius } => {
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(GeometryError::Degenerate);
                }
                let center = Vector3::new(center[0], center[1], center[2]);
                Shape::from_body(dimension, Body::Ball { center, radius })
            }
            ShapeRecord::Polygon { vertices } => {
                Shape::from_body(Dimension::Two, Body::Polygon(ConvexPolygon::new(vertices)?))
            }
            ShapeRecord::Polyhedron { vertices, faces } => {
                let v = vertices.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect();
                Shape::from_body(Dimension::Three, Body::Polyhedron(ConvexPolyhedron::new(v, faces)?))
            }
            ShapeRecord::RadialGrid { layout, pole, frame, values } => {
                let f = Matrix3::from_fn(|i, j| frame[i][j]);
                let grid = RadialGrid::new(layout, values)?
                    .with_pose(Vector3::new(pole[0], pole[1], pole[2]), f);
                Shape::from_body(layout.dimension(), Body::Radial(grid))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_radii_match_closed_forms() {
        let disk = Shape::build(&ShapeFamily::Ball, Dimension::Two).unwrap();
        assert!((disk.radius(&Direction::from_angle(0.3)) - (10.0 / PI).sqrt()).abs() < 1e-12);
        assert!((disk.volume() - 10.0).abs() < 1e-12);
        let sphere = Shape::build(&ShapeFamily::Ball, Dimension::Three).unwrap();
        let r = (30.0 / (4.0 * PI)).cbrt();
        assert!((sphere.radius(&Direction::from_spherical(1.0, 2.0)) - r).abs() < 1e-12);
    }

    #[test]
    fn hexagon_circumradius() {
        let hex = Shape::build(&ShapeFamily::RegularPolygon { sides: 6 }, Dimension::Two).unwrap();
        let r = (20.0 / (3.0 * 3f64.sqrt())).sqrt();
        assert!((hex.max_extent() - r).abs() < 1e-12);
        assert!((hex.volume() - 10.0).abs() < 1e-9);
        // Canonical orientation puts a vertex on +x.
        assert!((hex.radius(&Direction::from_angle(0.0)) - r).abs() < 1e-12);
    }

    #[test]
    fn family_dimension_mismatch() {
        let e = Shape::build(&ShapeFamily::Cuboctahedron, Dimension::Two).unwrap_err();
        assert!(matches!(e, GeometryError::DimensionMismatch { .. }));
        let e = Shape::build(&ShapeFamily::RegularPolygon { sides: 5 }, Dimension::Three).unwrap_err();
        assert!(matches!(e, GeometryError::DimensionMismatch { .. }));
        let e = Shape::build(&ShapeFamily::RegularPolygon { sides: 2 }, Dimension::Two).unwrap_err();
        assert_eq!(e, GeometryError::TooFewSides(2));
    }

    #[test]
    fn radial_grid_below_floor_is_rejected() {
        let layout = GridLayout::Circle { nodes: 16 };
        let mut values = vec![2.0; 16];
        values[5] = 0.5;
        let e = Shape::build(&ShapeFamily::RadialGrid { layout, values }, Dimension::Two).unwrap_err();
        assert_eq!(e, GeometryError::RadiusBelowMinimum { index: 5, value: 0.5 });
        let mut values = vec![2.0; 16];
        values[3] = f64::NAN;
        let e = Shape::build(&ShapeFamily::RadialGrid { layout, values }, Dimension::Two).unwrap_err();
        assert_eq!(e, GeometryError::NonFiniteRadius { index: 3 });
    }

    #[test]
    fn normalization_cases() {
        let unit = Shape::from_body(Dimension::Two, Body::Ball { center: Vector3::zeros(), radius: 1.0 });
        assert!((unit.volume() - PI).abs() < 1e-15);
        let n1 = unit.normalized_to_volume(10.0).unwrap();
        let n4 = unit.scaled(4.0).normalized_to_volume(10.0).unwrap();
        assert!((n1.min_radius() - (10.0 / PI).sqrt()).abs() < 1e-14);
        assert!(n1.radial_distance(&n4) < 1e-14);
        let again = n1.normalized_to_volume(10.0).unwrap();
        assert_eq!(again.min_radius(), n1.min_radius());
        let unit3 = Shape::from_body(Dimension::Three, Body::Ball { center: Vector3::zeros(), radius: 1.0 });
        assert!((unit3.volume() - 4.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shrinking_below_floor_is_an_error() {
        // A long thin rectangle of area 40: normalizing to area 10 halves the
        // inradius of 1.
        let rect = ShapeFamily::ConvexPolygon { vertices: vec![[-10.0, -1.0], [10.0, -1.0], [10.0, 1.0], [-10.0, 1.0]] };
        let e = Shape::build(&rect, Dimension::Two).unwrap_err();
        assert!(matches!(e, GeometryError::ScalingViolatesMinimum { .. }));
    }

    #[test]
    fn record_round_trip_preserves_shape() {
        let layout = GridLayout::Circle { nodes: 64 };
        let values: Vec<f64> =
            (0..64).map(|i| 1.5 + 0.2 * (3.0 * i as f64 * std::f64::consts::TAU / 64.0).cos()).collect();
        for shape in [
            Shape::build(&ShapeFamily::RegularPolygon { sides: 6 }, Dimension::Two).unwrap(),
            Shape::build(&ShapeFamily::Cuboctahedron, Dimension::Three).unwrap(),
            Shape::build(&ShapeFamily::Ball, Dimension::Three).unwrap(),
            Shape::build(&ShapeFamily::RadialGrid { layout, values }, Dimension::Two).unwrap(),
        ] {
            let text = serde_json::to_string(&shape).unwrap();
            assert!(text.contains("\"family\""));
            let back: Shape = serde_json::from_str(&text).unwrap();
            assert_eq!(back, shape);
            assert!(back.radial_distance(&shape) < 1e-14);
            assert!((back.volume() - shape.volume()).abs() < 1e-12);
        }
    }
}
