use std::sync::Arc;

use rand::Rng;

use super::{Dimension, GeometryError, Point, Shape};

/// A shape scaled about the origin to enclose volume `V`.
#[derive(Clone, Debug)]
pub struct ScaledContainer {
    shape: Arc<Shape>,
    volume: f64,
    scale: f64,
}

impl ScaledContainer {
    /// The shape's reference origin must be inside it (true for canonical
    /// shapes).
    pub fn new(shape: Arc<Shape>, volume: f64) -> Result<Self, GeometryError> {
        if !(volume > 0.0) || !volume.is_finite() {
            return Err(GeometryError::InvalidVolume(volume));
        }
        if !shape.contains(&[0.0; 3]) {
            return Err(GeometryError::Malformed("origin is outside the shape".into()));
        }
        let scale = (volume / shape.volume()).powf(1.0 / shape.dimension().as_f64());
        Ok(ScaledContainer { shape, volume, scale })
    }

    /// Same shape at another volume.
    pub fn with_volume(&self, volume: f64) -> Result<Self, GeometryError> {
        ScaledContainer::new(Arc::clone(&self.shape), volume)
    }

    pub fn shape(&self) -> &Arc<Shape> {
        &self.shape
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Linear scale factor `λ = (V / vol(S))^(1/d)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dimension(&self) -> Dimension {
        self.shape.dimension()
    }

    #[inline]
    pub fn contains(&self, point: &Point) -> bool {
        self.shape.contains_scaled(point, self.scale)
    }

    /// Radius of a ball about the origin enclosing the container.
    pub fn bounding_radius(&self) -> f64 {
        self.scale * self.shape.max_extent()
    }

    /// Uniform point by rejection from the bounding cube.
    pub fn sample_uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let r = self.bounding_radius();
        let three = self.dimension() == Dimension::Three;
        loop {
            let p = [
                rng.gen_range(-r..=r),
                rng.gen_range(-r..=r),
                if three { rng.gen_range(-r..=r) } else { 0.0 },
            ];
            if self.contains(&p) {
                return p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ShapeFamily;
    use rand::SeedableRng;

    fn disk() -> Arc<Shape> {
        Arc::new(Shape::build(&ShapeFamily::Ball, Dimension::Two).unwrap())
    }

    #[test]
    fn containment_basics() {
        let c = ScaledContainer::new(disk(), 10.0).unwrap();
        assert!(c.contains(&[0.0; 3]));
        assert!(!c.contains(&[2.0, 0.0, 0.0]));
        assert!(c.contains(&[1.78, 0.0, 0.0]));
        assert!(ScaledContainer::new(disk(), 0.0).is_err());
        assert!(ScaledContainer::new(disk(), f64::NAN).is_err());
    }

    #[test]
    fn uniform_samples_in_disk() {
        let c = ScaledContainer::new(disk(), 10.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let r_half = c.bounding_radius() / 2.0;
        let (mut sx, mut sy, mut inner) = (0.0, 0.0, 0usize);
        for _ in 0..n {
            let p = c.sample_uniform_point(&mut rng);
            assert!(c.contains(&p));
            sx += p[0];
            sy += p[1];
            if p[0].hypot(p[1]) <= r_half {
                inner += 1;
            }
        }
        let r = c.bounding_radius();
        // Var(x) = R²/4 for a uniform disk.
        let se = (r * r / 4.0 / n as f64).sqrt();
        assert!((sx / n as f64).abs() < 4.0 * se);
        assert!((sy / n as f64).abs() < 4.0 * se);
        let f = inner as f64 / n as f64;
        let se_f = (0.25 * 0.75 / n as f64).sqrt();
        assert!((f - 0.25).abs() < 4.0 * se_f, "inner fraction {f}");
    }
}
