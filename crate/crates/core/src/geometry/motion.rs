use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use rand::Rng;

use super::{Dimension, Point};

/// An orientation-preserving Euclidean motion `x -> R x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidMotion {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidMotion {
    pub fn identity() -> Self {
        RigidMotion { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    /// Rotation about the z axis by `angle`, then translation by `(tx, ty)`.
    pub fn planar(angle: f64, tx: f64, ty: f64) -> Self {
        let rotation = *Rotation3::from_axis_angle(&Vector3::z_axis(), angle).matrix();
        RigidMotion { rotation, translation: Vector3::new(tx, ty, 0.0) }
    }

    pub fn spatial(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        RigidMotion { rotation, translation }
    }

    /// Uniformly random rotation and a translation with components in
    /// `[-max_shift, max_shift]`.
    pub fn random<R: Rng + ?Sized>(dim: Dimension, max_shift: f64, rng: &mut R) -> Self {
        let mut shift = || rng.gen_range(-max_shift..=max_shift);
        match dim {
            Dimension::Two => {
                let tx = shift();
                let ty = shift();
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                RigidMotion::planar(angle, tx, ty)
            }
            Dimension::Three => {
                let t = Vector3::new(shift(), shift(), shift());
                // Uniform unit quaternion (Shoemake).
                let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
                let tau = std::f64::consts::TAU;
                let q = nalgebra::Quaternion::new(
                    u1.sqrt() * (tau * u3).cos(),
                    (1.0 - u1).sqrt() * (tau * u2).sin(),
                    (1.0 - u1).sqrt() * (tau * u2).cos(),
                    u1.sqrt() * (tau * u3).sin(),
                );
                let rot = UnitQuaternion::from_quaternion(q).to_rotation_matrix();
                RigidMotion { rotation: *rot.matrix(), translation: t }
            }
        }
    }

    #[inline]
    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn apply_point(&self, p: &Point) -> Point {
        let v = self.apply(&Vector3::new(p[0], p[1], p[2]));
        [v.x, v.y, v.z]
    }
}
