//! Exact convex bodies: balls, polygons and polyhedra.

use nalgebra::{Matrix3, Vector3};

use super::{GeometryError, RigidMotion};

/// Convex polygon in the z = 0 plane, vertices counter-clockwise.
#[derive(Clone, Debug)]
pub(crate) struct ConvexPolygon {
    vertices: Vec<Vector3<f64>>,
    normals: Vec<Vector3<f64>>,
    offsets: Vec<f64>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::Malformed(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(GeometryError::Malformed("non-finite polygon vertex".into()));
        }
        let mut v: Vec<Vector3<f64>> =
            vertices.iter().map(|p| Vector3::new(p[0], p[1], 0.0)).collect();
        if signed_area(&v) < 0.0 {
            v.reverse();
        }
        Self::from_ccw(v)
    }

    fn from_ccw(vertices: Vec<Vector3<f64>>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let e = b - a;
            let len = e.norm();
            if len <= 1e-12 * scale {
                return Err(GeometryError::Malformed("repeated polygon vertex".into()));
            }
            let nrm = Vector3::new(e.y / len, -e.x / len, 0.0);
            normals.push(nrm);
            offsets.push(nrm.dot(&a));
        }
        for i in 0..n {
            let e0 = vertices[(i + 1) % n] - vertices[i];
            let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            if e0.x * e1.y - e0.y * e1.x < -1e-12 * scale * scale {
                return Err(GeometryError::Malformed("polygon is not convex".into()));
            }
        }
        if signed_area(&vertices) <= 0.0 {
            return Err(GeometryError::Degenerate);
        }
        Ok(ConvexPolygon { vertices, normals, offsets })
    }

    pub fn regular(sides: usize, circumradius: f64) -> Self {
        let v = (0..sides)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / sides as f64;
                Vector3::new(circumradius * t.cos(), circumradius * t.sin(), 0.0)
            })
            .collect();
        Self::from_ccw(v).expect("regular polygon is convex")
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let n = self.vertices.len();
        let mut c = Vector3::zeros();
        let mut a2 = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let cr = p.x * q.y - q.x * p.y;
            a2 += cr;
            c += (p + q) * cr;
        }
        c / (3.0 * a2)
    }

    pub fn radius(&self, u: &Vector3<f64>) -> f64 {
        ray_exit(&self.normals, &self.offsets, u)
    }

    #[inline]
    pub fn contains_scaled(&self, x: &[f64; 3], scale: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(n, h)| n.x * x[0] + n.y * x[1] <= h * scale)
    }

    pub fn min_radius(&self) -> f64 {
        self.offsets.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_extent(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&Vector3<f64>) -> Vector3<f64>) -> Self {
        let v = self.vertices.iter().map(f).collect();
        Self::from_ccw(v).expect("similarity preserves convexity")
    }

    pub fn transformed(&self, m: &RigidMotion) -> Self {
        self.map(|v| {
            let mut w = m.apply(v);
            w.z = 0.0;
            w
        })
    }
}

fn signed_area(v: &[Vector3<f64>]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let p = v[i];
            let q = v[(i + 1) % n];
            p.x * q.y - q.x * p.y
        })
        .sum::<f64>()
        / 2.0
}

/// Convex polyhedron with outward counter-clockwise faces.
#[derive(Clone, Debug)]
pub(crate) struct ConvexPolyhedron {
    vertices: Vec<Vector3<f64>>,
    faces: Vec<Vec<usize>>,
    normals: Vec<Vector3<f64>>,
    offsets: Vec<f64>,
}

impl ConvexPolyhedron {
    pub fn new(vertices: Vec<Vector3<f64>>, faces: Vec<Vec<usize>>) -> Result<Self, GeometryError> {
        if vertices.len() < 4 || faces.len() < 4 {
            return Err(GeometryError::Malformed("polyhedron needs at least 4 faces".into()));
        }
        if faces.iter().any(|f| f.len() < 3 || f.iter().any(|&i| i >= vertices.len())) {
            return Err(GeometryError::Malformed("bad face index list".into()));
        }
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::Malformed("non-finite polyhedron vertex".into()));
        }
        let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let mut normals = Vec::with_capacity(faces.len());
        let mut offsets = Vec::with_capacity(faces.len());
        for f in &faces {
            // Newell's method.
            let mut n = Vector3::zeros();
            for k in 0..f.len() {
                let a = vertices[f[k]];
                let b = vertices[f[(k + 1) % f.len()]];
                n += Vector3::new(
                    (a.y - b.y) * (a.z + b.z),
                    (a.z - b.z) * (a.x + b.x),
                    (a.x - b.x) * (a.y + b.y),
                );
            }
            let len = n.norm();
            if len <= 1e-12 * scale * scale {
                return Err(GeometryError::Malformed("degenerate face".into()));
            }
            let n = n / len;
            normals.push(n);
            offsets.push(n.dot(&vertices[f[0]]));
        }
        for (n, h) in normals.iter().zip(&offsets) {
            if vertices.iter().any(|v| n.dot(v) > h + 1e-9 * scale) {
                return Err(GeometryError::Malformed("polyhedron is not convex".into()));
            }
        }
        let poly = ConvexPolyhedron { vertices, faces, normals, offsets };
        if poly.volume() <= 0.0 {
            return Err(GeometryError::Degenerate);
        }
        Ok(poly)
    }

    /// Vertices at the permutations of (±1, ±1, 0): edge √2, circumradius √2.
    pub fn cuboctahedron() -> Self {
        let mut vertices = Vec::with_capacity(12);
        for &(a, b) in &[(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            vertices.push(Vector3::new(a, b, 0.0));
            vertices.push(Vector3::new(a, 0.0, b));
            vertices.push(Vector3::new(0.0, a, b));
        }
        let find = |p: [f64; 3]| {
            vertices
                .iter()
                .position(|v| (v - Vector3::new(p[0], p[1], p[2])).norm() < 1e-12)
                .expect("vertex present")
        };
        let mut faces = Vec::with_capacity(14);
        // Square faces normal to the coordinate axes.
        for axis in 0..3 {
            for &s in &[1.0, -1.0] {
                let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
                let corner = |cu: f64, cw: f64| {
                    let mut p = [0.0; 3];
                    p[axis] = s;
                    if cu != 0.0 {
                        p[u] = cu;
                    }
                    if cw != 0.0 {
                        p[w] = cw;
                    }
                    p
                };
                let ring = [corner(1.0, 0.0), corner(0.0, 1.0), corner(-1.0, 0.0), corner(0.0, -1.0)];
                faces.push(ring.iter().map(|&p| find(p)).collect());
            }
        }
        // Triangular faces normal to the body diagonals.
        for &sx in &[1.0, -1.0] {
            for &sy in &[1.0, -1.0] {
                for &sz in &[1.0, -1.0] {
                    faces.push(vec![
                        find([sx, sy, 0.0]),
                        find([0.0, sy, sz]),
                        find([sx, 0.0, sz]),
                    ]);
                }
            }
        }
        let mut poly = ConvexPolyhedron::new_unchecked_orientation(vertices, faces);
        poly.orient_faces_outward();
        poly
    }

    fn new_unchecked_orientation(vertices: Vec<Vector3<f64>>, faces: Vec<Vec<usize>>) -> Self {
        ConvexPolyhedron { vertices, faces, normals: Vec::new(), offsets: Vec::new() }
    }

    /// Reverses any face whose winding points inward (w.r.t. the vertex mean),
    /// then recomputes planes.
    fn orient_faces_outward(&mut self) {
        let mean = self.vertices.iter().sum::<Vector3<f64>>() / self.vertices.len() as f64;
        for f in &mut self.faces {
            let a = self.vertices[f[0]];
            let b = self.vertices[f[1]];
            let c = self.vertices[f[2]];
            let n = (b - a).cross(&(c - a));
            if n.dot(&(a - mean)) < 0.0 {
                f.reverse();
            }
        }
        let rebuilt = ConvexPolyhedron::new(self.vertices.clone(), self.faces.clone())
            .expect("oriented polyhedron is valid");
        *self = rebuilt;
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    /// Signed tetrahedra (origin, fan triangle) covering the body.
    fn tetrahedra(&self) -> impl Iterator<Item = (f64, [Vector3<f64>; 3])> + '_ {
        self.faces.iter().flat_map(move |f| {
            (1..f.len() - 1).map(move |k| {
                let a = self.vertices[f[0]];
                let b = self.vertices[f[k]];
                let c = self.vertices[f[k + 1]];
                (a.dot(&b.cross(&c)) / 6.0, [a, b, c])
            })
        })
    }

    pub fn volume(&self) -> f64 {
        self.tetrahedra().map(|(v, _)| v).sum()
    }

    pub fn centroid(&self) -> Vector3<f64> {
        let mut m = Vector3::zeros();
        let mut vol = 0.0;
        for (v, [a, b, c]) in self.tetrahedra() {
            vol += v;
            m += (a + b + c) * (v / 4.0);
        }
        m / vol
    }

    /// `∫ x xᵀ dV` about the origin.
    pub fn second_moment(&self) -> Matrix3<f64> {
        let mut m = Matrix3::zeros();
        for (v, [a, b, c]) in self.tetrahedra() {
            let s = a + b + c;
            m += (a * a.transpose() + b * b.transpose() + c * c.transpose() + s * s.transpose())
                * (v / 20.0);
        }
        m
    }

    /// `∫ (e·x)³ dV` about the origin.
    pub fn third_moment(&self, e: &Vector3<f64>) -> f64 {
        self.tetrahedra()
            .map(|(v, [a, b, c])| {
                let (x, y, z) = (e.dot(&a), e.dot(&b), e.dot(&c));
                // Complete homogeneous symmetric polynomial of degree 3.
                let h3 = x * x * x
                    + y * y * y
                    + z * z * z
                    + x * x * (y + z)
                    + y * y * (x + z)
                    + z * z * (x + y)
                    + x * y * z;
                v / 20.0 * h3
            })
            .sum()
    }

    pub fn radius(&self, u: &Vector3<f64>) -> f64 {
        ray_exit(&self.normals, &self.offsets, u)
    }

    #[inline]
    pub fn contains_scaled(&self, x: &[f64; 3], scale: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(n, h)| n.x * x[0] + n.y * x[1] + n.z * x[2] <= h * scale)
    }

    pub fn min_radius(&self) -> f64 {
        self.offsets.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_extent(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&Vector3<f64>) -> Vector3<f64>) -> Self {
        let v = self.vertices.iter().map(f).collect();
        ConvexPolyhedron::new(v, self.faces.clone()).expect("similarity preserves convexity")
    }

    pub fn transformed(&self, m: &RigidMotion) -> Self {
        self.map(|v| m.apply(v))
    }
}

/// Distance from the origin to the boundary of `{x : n·x <= h}` along `u`.
fn ray_exit(normals: &[Vector3<f64>], offsets: &[f64], u: &Vector3<f64>) -> f64 {
    normals
        .iter()
        .zip(offsets)
        .filter_map(|(n, h)| {
            let c = n.dot(u);
            (c > 0.0).then(|| h / c)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cuboctahedron_closed_forms() {
        let c = ConvexPolyhedron::cuboctahedron();
        assert_eq!(c.faces().len(), 14);
        // (5/3)·√2·a³ with edge a = √2.
        assert!((c.volume() - 20.0 / 3.0).abs() < 1e-13);
        assert!(c.centroid().norm() < 1e-14);
        assert!((c.min_radius() - 1.0).abs() < 1e-14);
        assert!((c.max_extent() - 2f64.sqrt()).abs() < 1e-14);
        // Cubic symmetry: isotropic second moment.
        let m = c.second_moment();
        assert!((m[(0, 0)] - m[(1, 1)]).abs() < 1e-12 && (m[(0, 1)]).abs() < 1e-12);
    }

    #[test]
    fn polygon_rejects_non_convex() {
        let arrow = vec![[0.0, 0.0], [2.0, 1.0], [0.0, 2.0], [0.5, 1.0]];
        assert!(ConvexPolygon::new(arrow).is_err());
    }

    #[test]
    fn polygon_accepts_clockwise_input() {
        let cw = vec![[-1.0, -1.0], [-1.0, 1.0], [1.0, 1.0], [1.0, -1.0]];
        let p = ConvexPolygon::new(cw).unwrap();
        assert!((p.area() - 4.0).abs() < 1e-14);
        assert!((p.radius(&Vector3::new(1.0, 0.0, 0.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tetrahedron_moments_match_monte_carlo_free_formula() {
        // Right-angle corner tetrahedron: volume 1/6, ∫x³ = 1/120.
        let v = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
        ];
        let faces = vec![vec![0, 2, 1], vec![0, 1, 3], vec![0, 3, 2], vec![1, 2, 3]];
        let t = ConvexPolyhedron::new(v, faces).unwrap();
        assert!((t.volume() - 1.0 / 6.0).abs() < 1e-15);
        assert!((t.third_moment(&Vector3::x()) - 1.0 / 120.0).abs() < 1e-15);
        // ∫x² = 1/60, ∫xy = 1/120.
        let m = t.second_moment();
        assert!((m[(0, 0)] - 1.0 / 60.0).abs() < 1e-15);
        assert!((m[(0, 1)] - 1.0 / 120.0).abs() < 1e-15);
    }
}
