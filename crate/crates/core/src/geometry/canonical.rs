//! Canonical pose modulo rotations and translations.
//!
//! Centroid goes to the origin. Orientation:
//! * two dimensions: the boundary point farthest from the centroid goes onto
//!   the positive first axis;
//! * three dimensions: principal axes of the inertia tensor in decreasing
//!   eigenvalue order, axis signs chosen so the first nonzero third moment is
//!   positive.
//!
//! Exact bodies whose rule leaves a choice (symmetric vertex sets, degenerate
//! inertia, vanishing third moments) resolve it by taking the candidate whose
//! radial signature is lexicographically smallest, which does not depend on
//! the input pose. Radial grids apply the rule in their own grid frame and
//! therefore never see the pose at all.

use nalgebra::{Matrix3, Rotation3, SymmetricEigen, Vector3};

use super::body::{ConvexPolygon, ConvexPolyhedron};
use super::radial::RadialGrid;
use super::shape::{Body, Shape};
use super::{Dimension, GeometryError};

const TIE: f64 = 1e-9;

pub(crate) fn canonicalize(shape: &Shape) -> Result<Shape, GeometryError> {
    let dim = shape.dimension();
    if !(shape.volume() > 0.0) {
        return Err(GeometryError::Degenerate);
    }
    let body = match &shape.body {
        Body::Ball { radius, .. } => Body::Ball { center: Vector3::zeros(), radius: *radius },
        Body::Polygon(p) => {
            let c = p.centroid();
            Body::Polygon(orient_polygon(&p.map(|v| v - c)))
        }
        Body::Polyhedron(p) => {
            let c = p.centroid();
            Body::Polyhedron(orient_polyhedron(&p.map(|v| v - c)))
        }
        Body::Radial(g) => Body::Radial(orient_grid(g)),
    };
    Ok(Shape::from_body(dim, body))
}

fn lex_less(a: &[f64], b: &[f64], tol: f64) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tol {
            return x < y;
        }
    }
    false
}

/// Picks the candidate with the smallest signature.
fn select<T>(candidates: Vec<T>, to_shape: impl Fn(&T) -> Shape) -> T {
    let mut best: Option<(T, Vec<f64>)> = None;
    for c in candidates {
        let s = to_shape(&c);
        let tol = TIE * s.max_extent();
        let sig = s.signature();
        match &best {
            Some((_, b)) if !lex_less(&sig, b, tol) => {}
            _ => best = Some((c, sig)),
        }
    }
    best.expect("at least one candidate").0
}

fn farthest<'a>(points: &'a [Vector3<f64>]) -> impl Iterator<Item = &'a Vector3<f64>> + 'a {
    let r = points.iter().map(|v| v.norm()).fold(0.0, f64::max);
    points.iter().filter(move |v| v.norm() >= r * (1.0 - TIE))
}

fn z_rotation(angle: f64) -> Matrix3<f64> {
    *Rotation3::from_axis_angle(&Vector3::z_axis(), angle).matrix()
}

fn orient_polygon(p: &ConvexPolygon) -> ConvexPolygon {
    let candidates: Vec<ConvexPolygon> = farthest(p.vertices())
        .map(|a| {
            let r = z_rotation(-a.y.atan2(a.x));
            p.map(|v| {
                let mut w = r * v;
                w.z = 0.0;
                w
            })
        })
        .collect();
    select(candidates, |c| Shape::from_body(Dimension::Two, Body::Polygon(c.clone())))
}

/// Eigenpairs sorted by decreasing eigenvalue, and whether any two are equal
/// within tolerance.
fn principal_axes(inertia: &Matrix3<f64>) -> ([Vector3<f64>; 3], bool) {
    let eig = SymmetricEigen::new(*inertia);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let scale = vals[0].abs().max(1e-300);
    let degenerate = (vals[0] - vals[1]) < 1e-7 * scale || (vals[1] - vals[2]) < 1e-7 * scale;
    let axes = [
        eig.eigenvectors.column(idx[0]).into_owned(),
        eig.eigenvectors.column(idx[1]).into_owned(),
        eig.eigenvectors.column(idx[2]).into_owned(),
    ];
    (axes, degenerate)
}

fn inertia_from_second_moment(m: &Matrix3<f64>) -> Matrix3<f64> {
    Matrix3::identity() * m.trace() - m
}

fn frame_from_rows(a: Vector3<f64>, b: Vector3<f64>) -> Matrix3<f64> {
    let c = a.cross(&b);
    Matrix3::from_rows(&[a.transpose(), b.transpose(), c.transpose()])
}

/// The four proper sign choices of a principal frame, filtered so that the
/// first axis with a nonzero third moment points along its positive part.
fn signed_frames(
    axes: &[Vector3<f64>; 3],
    third_moment: impl Fn(&Vector3<f64>) -> f64,
    tol: f64,
) -> Vec<Matrix3<f64>> {
    let mut frames: Vec<Matrix3<f64>> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .map(|&(s1, s2)| frame_from_rows(axes[0] * s1, axes[1] * s2))
        .collect();
    for k in 0..3 {
        let positive: Vec<Matrix3<f64>> = frames
            .iter()
            .filter(|f| third_moment(&f.row(k).transpose()) > tol)
            .copied()
            .collect();
        let any_nonzero = frames.iter().any(|f| third_moment(&f.row(k).transpose()).abs() > tol);
        if any_nonzero && !positive.is_empty() {
            frames = positive;
        }
    }
    frames
}

fn orient_polyhedron(p: &ConvexPolyhedron) -> ConvexPolyhedron {
    let inertia = inertia_from_second_moment(&p.second_moment());
    let (axes, degenerate) = principal_axes(&inertia);
    let frames = if degenerate {
        let far: Vec<Vector3<f64>> = farthest(p.vertices()).copied().collect();
        let mut frames = Vec::new();
        for a in &far {
            let e1 = a.normalize();
            for b in &far {
                let perp = b - e1 * b.dot(&e1);
                if perp.norm() > 1e-6 * b.norm() {
                    frames.push(frame_from_rows(e1, perp.normalize()));
                }
            }
        }
        frames
    } else {
        let scale = p.max_extent();
        let tol = TIE * p.volume() * scale.powi(3);
        signed_frames(&axes, |e| p.third_moment(e), tol)
    };
    let candidates: Vec<ConvexPolyhedron> = frames.iter().map(|q| p.map(|v| q * v)).collect();
    select(candidates, |c| Shape::from_body(Dimension::Three, Body::Polyhedron(c.clone())))
}

/// Canonical pose of a radial grid, computed in grid coordinates only.
fn orient_grid(g: &RadialGrid) -> RadialGrid {
    let c = g.local_centroid();
    let q = match g.dimension() {
        Dimension::Two => {
            let (mut best, mut best_r) = (Vector3::x(), -1.0);
            for (r, u) in g.values().iter().zip(g.directions()) {
                let b = u * *r - c;
                let n = b.norm();
                if n > best_r * (1.0 + 1e-12) {
                    best = b;
                    best_r = n;
                }
            }
            z_rotation(-best.y.atan2(best.x))
        }
        Dimension::Three => {
            let inertia = inertia_from_second_moment(&g.local_second_moment(&c));
            let (axes, _) = principal_axes(&inertia);
            let scale = g.max_value() + c.norm();
            let tol = TIE * g.volume() * scale.powi(3);
            signed_frames(&axes, |e| g.local_third_moment(e, &c), tol)[0]
        }
    };
    // Canonical coordinates x = Q (y - c), so y = Qᵀ (x + Q c).
    g.clone().with_pose(-(q * c), q.transpose())
}
