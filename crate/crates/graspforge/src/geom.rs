//! Rigid-body math for grasp poses: unit quaternions, SE(3) transforms,
//! the translation + rotation grasp distance, and calibration chains.

use nalgebra::{Matrix4, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

/// Unit quaternion, scalar-first (w, x, y, z).
///
/// `q` and `-q` encode the same rotation; [`UnitQuat::rotation_eq`] treats
/// them as equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitQuat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuat {
    pub const IDENTITY: UnitQuat = UnitQuat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Builds a unit quaternion from components, normalizing them.
    ///
    /// Returns `None` if the norm is zero or not finite.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Option<UnitQuat> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return None;
        }
        Some(UnitQuat {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> UnitQuat {
        let q = UnitQuaternion::from_scaled_axis(axis.normalize() * angle);
        Self::from_na(&q)
    }

    pub(crate) fn from_na(q: &UnitQuaternion<f64>) -> UnitQuat {
        UnitQuat {
            w: q.w,
            x: q.i,
            y: q.j,
            z: q.k,
        }
    }

    pub(crate) fn to_na(self) -> UnitQuaternion<f64> {
        UnitQuaternion::new_unchecked(Quaternion::new(self.w, self.x, self.y, self.z))
    }

    /// Builds the quaternion for a rotation matrix given by column axes.
    /// The columns must form a right-handed orthonormal basis.
    pub fn from_basis(x: Vector3<f64>, y: Vector3<f64>, z: Vector3<f64>) -> UnitQuat {
        let rot = nalgebra::Rotation3::from_matrix_unchecked(nalgebra::Matrix3::from_columns(&[
            x, y, z,
        ]));
        Self::from_na(&UnitQuaternion::from_rotation_matrix(&rot))
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &UnitQuat) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn conjugate(&self) -> UnitQuat {
        UnitQuat {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.to_na() * v
    }

    /// Hamilton product, renormalized to absorb rounding drift.
    pub fn mul(&self, other: &UnitQuat) -> UnitQuat {
        let q = self.to_na() * other.to_na();
        let mut out = Self::from_na(&q);
        let n = out.norm();
        out.w /= n;
        out.x /= n;
        out.y /= n;
        out.z /= n;
        out
    }

    /// Rotation equality: min(|q1 - q2|, |q1 + q2|) < tol.
    pub fn rotation_eq(&self, other: &UnitQuat, tol: f64) -> bool {
        let d = [
            self.w - other.w,
            self.x - other.x,
            self.y - other.y,
            self.z - other.z,
        ];
        let s = [
            self.w + other.w,
            self.x + other.x,
            self.y + other.y,
            self.z + other.z,
        ];
        let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sn = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        dn.min(sn) < tol
    }

    /// Geodesic rotation distance on the quotient: arccos(clamp(|q1.q2|, 0, 1)).
    pub fn angular_distance(&self, other: &UnitQuat) -> f64 {
        self.dot(other).abs().clamp(0.0, 1.0).acos()
    }
}

/// Rigid transform of the gripper in some frame: rotation + translation (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspPose {
    pub rotation: UnitQuat,
    pub translation: Vector3<f64>,
}

impl GraspPose {
    pub const IDENTITY: GraspPose = GraspPose {
        rotation: UnitQuat::IDENTITY,
        translation: Vector3::new(0.0, 0.0, 0.0),
    };

    pub fn new(rotation: UnitQuat, translation: Vector3<f64>) -> GraspPose {
        GraspPose {
            rotation,
            translation,
        }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> GraspPose {
        GraspPose {
            rotation: UnitQuat::IDENTITY,
            translation: Vector3::new(x, y, z),
        }
    }

    pub fn inverse(&self) -> GraspPose {
        let rot_inv = self.rotation.conjugate();
        GraspPose {
            rotation: rot_inv,
            translation: -rot_inv.rotate(&self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.rotate(p) + self.translation
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.rotate(v)
    }

    /// Local x axis (finger closing direction for gripper poses).
    pub fn x_axis(&self) -> Vector3<f64> {
        self.rotation.rotate(&Vector3::x())
    }

    /// Local y axis.
    pub fn y_axis(&self) -> Vector3<f64> {
        self.rotation.rotate(&Vector3::y())
    }

    /// Local z axis (approach direction for gripper poses).
    pub fn z_axis(&self) -> Vector3<f64> {
        self.rotation.rotate(&Vector3::z())
    }

    /// Homogeneous 4x4 matrix form.
    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = self.rotation.to_na().to_rotation_matrix().to_homogeneous();
        m[(0, 3)] = self.translation.x;
        m[(1, 3)] = self.translation.y;
        m[(2, 3)] = self.translation.z;
        m
    }

    /// Serializes as 7 little-endian f64: (qw, qx, qy, qz, tx, ty, tz), meters.
    pub fn to_le_bytes(&self) -> [u8; 56] {
        let vals = [
            self.rotation.w,
            self.rotation.x,
            self.rotation.y,
            self.rotation.z,
            self.translation.x,
            self.translation.y,
            self.translation.z,
        ];
        let mut out = [0u8; 56];
        for (i, v) in vals.iter().enumerate() {
            out[i * 8..i * 8 + 8].copy_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(bytes: &[u8; 56]) -> GraspPose {
        let mut v = [0.0f64; 7];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = f64::from_le_bytes(bytes[i * 8..i * 8 + 8].try_into().unwrap());
        }
        GraspPose {
            rotation: UnitQuat {
                w: v[0],
                x: v[1],
                y: v[2],
                z: v[3],
            },
            translation: Vector3::new(v[4], v[5], v[6]),
        }
    }
}

/// Composes two rigid transforms: `a . b` (apply `b`, then `a`).
pub fn compose(a: &GraspPose, b: &GraspPose) -> GraspPose {
    GraspPose {
        rotation: a.rotation.mul(&b.rotation),
        translation: a.rotation.rotate(&b.translation) + a.translation,
    }
}

/// Grasp distance: ||t1 - t2|| + arccos(clamp(|q1.q2|, 0, 1)).
///
/// Translations in meters, rotation term in radians, added unweighted.
pub fn se3_distance(g1: &GraspPose, g2: &GraspPose) -> f64 {
    se3_distance_weighted(g1, g2, 1.0)
}

/// Same metric with a tunable rotation weight; weight 1.0 is the unweighted sum.
pub fn se3_distance_weighted(g1: &GraspPose, g2: &GraspPose, rotation_weight: f64) -> f64 {
    (g1.translation - g2.translation).norm()
        + rotation_weight * g1.rotation.angular_distance(&g2.rotation)
}

/// Calibration chain from the world frame down to the object frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformChain {
    pub world_from_robot: GraspPose,
    pub robot_from_flange: GraspPose,
    pub flange_from_camera: GraspPose,
    pub camera_from_object: GraspPose,
}

impl TransformChain {
    pub const IDENTITY: TransformChain = TransformChain {
        world_from_robot: GraspPose::IDENTITY,
        robot_from_flange: GraspPose::IDENTITY,
        flange_from_camera: GraspPose::IDENTITY,
        camera_from_object: GraspPose::IDENTITY,
    };

    pub fn links(&self) -> [&GraspPose; 4] {
        [
            &self.world_from_robot,
            &self.robot_from_flange,
            &self.flange_from_camera,
            &self.camera_from_object,
        ]
    }
}

/// Maps an object-frame grasp to the world frame through the calibration chain.
pub fn world_grasp(chain: &TransformChain, object_grasp: &GraspPose) -> GraspPose {
    let mut acc = *chain.links()[0];
    for link in &chain.links()[1..] {
        acc = compose(&acc, link);
    }
    compose(&acc, object_grasp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    pub(crate) fn random_quat(rng: &mut impl Rng) -> UnitQuat {
        loop {
            let q = UnitQuat::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if let Some(q) = q {
                return q;
            }
        }
    }

    pub(crate) fn random_pose(rng: &mut impl Rng) -> GraspPose {
        GraspPose {
            rotation: random_quat(rng),
            translation: Vector3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ),
        }
    }

    #[test]
    fn compose_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_pose(&mut rng);
        let q = compose(&GraspPose::IDENTITY, &p);
        assert!(q.rotation.rotation_eq(&p.rotation, 1e-12));
        assert_relative_eq!(q.translation, p.translation, epsilon = 1e-12);
    }

    #[test]
    fn compose_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = random_pose(&mut rng);
            let id = compose(&p, &p.inverse());
            assert!(id.rotation.rotation_eq(&UnitQuat::IDENTITY, 1e-9));
            assert!(id.translation.norm() < 1e-9);
        }
    }

    #[test]
    fn compose_pure_translations_add() {
        let a = GraspPose::from_translation(1.0, 0.0, 0.0);
        let b = GraspPose::from_translation(0.0, 2.0, 0.0);
        let c = compose(&a, &b);
        assert_relative_eq!(c.translation, Vector3::new(1.0, 2.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn compose_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (a, b, c) = (
                random_pose(&mut rng),
                random_pose(&mut rng),
                random_pose(&mut rng),
            );
            let left = compose(&compose(&a, &b), &c);
            let right = compose(&a, &compose(&b, &c));
            assert!(left.rotation.rotation_eq(&right.rotation, 1e-9));
            assert!((left.translation - right.translation).norm() < 1e-9);
        }
    }

    #[test]
    fn distance_identity_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_pose(&mut rng);
        assert_eq!(se3_distance(&g, &g), 0.0);
    }

    #[test]
    fn distance_pure_translation() {
        let g1 = GraspPose::from_translation(0.0, 0.0, 0.0);
        let g2 = GraspPose::from_translation(3.0, 4.0, 0.0);
        assert_relative_eq!(se3_distance(&g1, &g2), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_half_turn_about_z() {
        let g1 = GraspPose::IDENTITY;
        let g2 = GraspPose::new(
            UnitQuat::from_axis_angle(Vector3::z(), PI),
            Vector3::zeros(),
        );
        assert_relative_eq!(se3_distance(&g1, &g2), FRAC_PI_2, epsilon = 1e-9);
    }

    #[test]
    fn distance_symmetric_and_sign_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let (a, b) = (random_pose(&mut rng), random_pose(&mut rng));
            assert_eq!(se3_distance(&a, &b), se3_distance(&b, &a));
            let mut neg = b;
            neg.rotation = UnitQuat {
                w: -b.rotation.w,
                x: -b.rotation.x,
                y: -b.rotation.y,
                z: -b.rotation.z,
            };
            assert_relative_eq!(
                se3_distance(&a, &b),
                se3_distance(&a, &neg),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn world_grasp_identity_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = random_pose(&mut rng);
        let w = world_grasp(&TransformChain::IDENTITY, &g);
        assert!(w.rotation.rotation_eq(&g.rotation, 1e-12));
        assert_relative_eq!(w.translation, g.translation, epsilon = 1e-12);
    }

    #[test]
    fn world_grasp_single_link() {
        let mut chain = TransformChain::IDENTITY;
        chain.world_from_robot = GraspPose::from_translation(0.0, 0.0, 1.0);
        let w = world_grasp(&chain, &GraspPose::IDENTITY);
        assert_relative_eq!(w.translation, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn world_grasp_matches_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let chain = TransformChain {
                world_from_robot: random_pose(&mut rng),
                robot_from_flange: random_pose(&mut rng),
                flange_from_camera: random_pose(&mut rng),
                camera_from_object: random_pose(&mut rng),
            };
            let g = random_pose(&mut rng);
            let w = world_grasp(&chain, &g);

            // Independent route: homogeneous 4x4 matrix products.
            let m = chain.world_from_robot.to_matrix()
                * chain.robot_from_flange.to_matrix()
                * chain.flange_from_camera.to_matrix()
                * chain.camera_from_object.to_matrix()
                * g.to_matrix();
            let t = Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]);
            let rot = nalgebra::Rotation3::from_matrix_unchecked(m.fixed_view::<3, 3>(0, 0).into());
            let q = UnitQuat::from_na(&UnitQuaternion::from_rotation_matrix(&rot));
            assert!((w.translation - t).norm() < 1e-9);
            assert!(w.rotation.rotation_eq(&q, 1e-9));
        }
    }

    #[test]
    fn pose_byte_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let p = random_pose(&mut rng);
            let q = GraspPose::from_le_bytes(&p.to_le_bytes());
            assert_eq!(p, q);
        }
    }

    #[test]
    fn le_byte_layout_is_scalar_first() {
        let p = GraspPose::from_translation(1.0, 2.0, 3.0);
        let bytes = p.to_le_bytes();
        assert_eq!(f64::from_le_bytes(bytes[0..8].try_into().unwrap()), 1.0); // qw
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 1.0); // tx
        assert_eq!(f64::from_le_bytes(bytes[48..56].try_into().unwrap()), 3.0); // tz
    }
}
