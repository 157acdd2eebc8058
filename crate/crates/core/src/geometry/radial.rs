//! Tabulated radial functions on a quadrature grid of directions.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{gauss_legendre, Dimension, GeometryError};

/// Node layout of a radial grid.
///
/// Two dimensions: `nodes` equally spaced angles starting at 0, periodic
/// linear interpolation. Three dimensions: Gauss–Legendre nodes in the cosine
/// of the polar angle times equally spaced azimuths, bilinear interpolation in
/// (polar, azimuth) with pole values equal to the mean of the nearest ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridLayout {
    Circle { nodes: usize },
    Sphere { polar: usize, azimuthal: usize },
}

impl GridLayout {
    pub fn dimension(&self) -> Dimension {
        match self {
            GridLayout::Circle { .. } => Dimension::Two,
            GridLayout::Sphere { .. } => Dimension::Three,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            GridLayout::Circle { nodes } => nodes,
            GridLayout::Sphere { polar, azimuthal } => polar * azimuthal,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn default_for(dim: Dimension) -> Self {
        match dim {
            Dimension::Two => GridLayout::Circle { nodes: super::DEFAULT_CIRCLE_NODES },
            Dimension::Three => {
                let (polar, azimuthal) = super::DEFAULT_SPHERE_NODES;
                GridLayout::Sphere { polar, azimuthal }
            }
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let ok = match *self {
            GridLayout::Circle { nodes } => nodes >= 8,
            GridLayout::Sphere { polar, azimuthal } => polar >= 4 && azimuthal >= 8,
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::Malformed(format!("radial grid {self:?} is too coarse")))
        }
    }
}

/// Directions and weights of a grid layout, shared between clones.
#[derive(Debug)]
pub(crate) struct GridQuadrature {
    pub directions: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
    /// Polar angles of the rings, ascending (three dimensions only).
    polar_angles: Vec<f64>,
}

impl GridQuadrature {
    fn new(layout: GridLayout) -> Self {
        match layout {
            GridLayout::Circle { nodes } => {
                let w = TAU / nodes as f64;
                let directions = (0..nodes)
                    .map(|i| {
                        let t = w * i as f64;
                        Vector3::new(t.cos(), t.sin(), 0.0)
                    })
                    .collect();
                GridQuadrature { directions, weights: vec![w; nodes], polar_angles: Vec::new() }
            }
            GridLayout::Sphere { polar, azimuthal } => {
                let (x, w) = gauss_legendre(polar);
                let dphi = TAU / azimuthal as f64;
                let mut directions = Vec::with_capacity(polar * azimuthal);
                let mut weights = Vec::with_capacity(polar * azimuthal);
                for (xi, wi) in x.iter().zip(&w) {
                    let s = (1.0 - xi * xi).sqrt();
                    for j in 0..azimuthal {
                        let phi = dphi * j as f64;
                        directions.push(Vector3::new(s * phi.cos(), s * phi.sin(), *xi));
                        weights.push(wi * dphi);
                    }
                }
                let polar_angles = x.iter().map(|c| c.acos()).collect();
                GridQuadrature { directions, weights, polar_angles }
            }
        }
    }
}

/// A star-shaped region given by radial values about a pole.
///
/// World point `x` maps to grid coordinates `y = F (x - p)`, where `p` is the
/// pole and `F` the frame rotation; `x` is inside iff `|y| <= ρ(y/|y|)`.
/// The frame and pole let rigid motions act exactly, without resampling.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    layout: GridLayout,
    values: Vec<f64>,
    pub(crate) pole: Vector3<f64>,
    pub(crate) frame: Matrix3<f64>,
    quad: Arc<GridQuadrature>,
}

impl RadialGrid {
    /// Grid with its pole at the origin and identity frame. Values must be
    /// positive and finite; the `ρ >= 1` floor is checked by shape
    /// construction, not here.
    pub fn new(layout: GridLayout, values: Vec<f64>) -> Result<Self, GeometryError> {
        layout.validate()?;
        if values.len() != layout.len() {
            return Err(GeometryError::GridSize { expected: layout.len(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(GeometryError::NonFiniteRadius { index });
        }
        Ok(RadialGrid {
            layout,
            values,
            pole: Vector3::zeros(),
            frame: Matrix3::identity(),
            quad: Arc::new(GridQuadrature::new(layout)),
        })
    }

    /// Samples `f` at the grid directions.
    pub fn from_fn(layout: GridLayout, f: impl Fn(&Vector3<f64>) -> f64) -> Result<Self, GeometryError> {
        layout.validate()?;
        let quad = GridQuadrature::new(layout);
        let values = quad.directions.iter().map(f).collect();
        Self::new(layout, values)
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn directions(&self) -> &[Vector3<f64>] {
        &self.quad.directions
    }

    pub fn dimension(&self) -> Dimension {
        self.layout.dimension()
    }

    pub(crate) fn with_pose(mut self, pole: Vector3<f64>, frame: Matrix3<f64>) -> Self {
        self.pole = pole;
        self.frame = frame;
        self
    }

    pub(crate) fn scaled(&self, s: f64) -> Self {
        let mut g = self.clone();
        g.values.iter_mut().for_each(|v| *v *= s);
        g.pole *= s;
        g
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn d(&self) -> f64 {
        self.dimension().as_f64()
    }

    /// Quadrature volume `Σ w ρ^d / d`.
    pub fn volume(&self) -> f64 {
        let d = self.d();
        self.quad.weights.iter().zip(&self.values).map(|(w, r)| w * r.powf(d) / d).sum()
    }

    /// Centroid in grid coordinates (relative to the pole).
    pub(crate) fn local_centroid(&self) -> Vector3<f64> {
        let d = self.d();
        let m1: Vector3<f64> = self
            .quad
            .weights
            .iter()
            .zip(&self.values)
            .zip(&self.quad.directions)
            .map(|((w, r), u)| u * (w * r.powf(d + 1.0) / (d + 1.0)))
            .sum();
        m1 / self.volume()
    }

    /// `∫ (y - c)(y - c)ᵀ` in grid coordinates about `c`.
    pub(crate) fn local_second_moment(&self, c: &Vector3<f64>) -> Matrix3<f64> {
        let d = self.d();
        let mut m = Matrix3::zeros();
        for ((w, r), u) in self.quad.weights.iter().zip(&self.values).zip(&self.quad.directions) {
            m += u * u.transpose() * (w * r.powf(d + 2.0) / (d + 2.0));
        }
        m - c * c.transpose() * self.volume()
    }

    /// `∫ (e·(y - c))³` in grid coordinates.
    pub(crate) fn local_third_moment(&self, e: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
        let d = self.d();
        let b = e.dot(c);
        self.quad
            .weights
            .iter()
            .zip(&self.values)
            .zip(&self.quad.directions)
            .map(|((w, r), u)| {
                let a = e.dot(u);
                w * (a.powi(3) * r.powf(d + 3.0) / (d + 3.0)
                    - 3.0 * a * a * b * r.powf(d + 2.0) / (d + 2.0)
                    + 3.0 * a * b * b * r.powf(d + 1.0) / (d + 1.0)
                    - b.powi(3) * r.powf(d) / d)
            })
            .sum()
    }

    /// Interpolated radial value along unit grid-frame direction `u`.
    pub fn interpolate(&self, u: &Vector3<f64>) -> f64 {
        match self.layout {
            GridLayout::Circle { nodes } => {
                let mut t = u.y.atan2(u.x);
                if t < 0.0 {
                    t += TAU;
                }
                let s = t / TAU * nodes as f64;
                let i = (s.floor() as usize).min(nodes - 1);
                let f = s - i as f64;
                let j = (i + 1) % nodes;
                self.values[i] * (1.0 - f) + self.values[j] * f
            }
            GridLayout::Sphere { polar, azimuthal } => {
                let theta = u.z.clamp(-1.0, 1.0).acos();
                let mut phi = u.y.atan2(u.x);
                if phi < 0.0 {
                    phi += TAU;
                }
                let s = phi / TAU * azimuthal as f64;
                let j0 = (s.floor() as usize).min(azimuthal - 1);
                let fj = s - j0 as f64;
                let j1 = (j0 + 1) % azimuthal;
                let ring = |i: usize| {
                    let row = &self.values[i * azimuthal..(i + 1) * azimuthal];
                    row[j0] * (1.0 - fj) + row[j1] * fj
                };
                let pole_value = |i: usize| {
                    let row = &self.values[i * azimuthal..(i + 1) * azimuthal];
                    row.iter().sum::<f64>() / azimuthal as f64
                };
                let angles = &self.quad.polar_angles;
                if theta <= angles[0] {
                    let f = theta / angles[0];
                    pole_value(0) * (1.0 - f) + ring(0) * f
                } else if theta >= angles[polar - 1] {
                    let f = (theta - angles[polar - 1]) / (PI - angles[polar - 1]);
                    ring(polar - 1) * (1.0 - f) + pole_value(polar - 1) * f
                } else {
                    let i = angles.partition_point(|a| *a <= theta) - 1;
                    let f = (theta - angles[i]) / (angles[i + 1] - angles[i]);
                    ring(i) * (1.0 - f) + ring(i + 1) * f
                }
            }
        }
    }

    /// World point to grid coordinates, for a container scaled by `scale`.
    #[inline]
    fn to_local(&self, x: &[f64; 3], scale: f64) -> Vector3<f64> {
        let w = Vector3::new(x[0] / scale, x[1] / scale, x[2] / scale) - self.pole;
        self.frame * w
    }

    #[inline]
    pub(crate) fn contains_scaled(&self, x: &[f64; 3], scale: f64) -> bool {
        let y = self.to_local(x, scale);
        let r = y.norm();
        r == 0.0 || r <= self.interpolate(&(y / r))
    }

    /// Bound on the distance from the world origin to the boundary.
    pub(crate) fn max_extent(&self) -> f64 {
        self.pole.norm() + self.max_value()
    }
}
