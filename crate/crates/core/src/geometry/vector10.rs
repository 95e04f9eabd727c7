use nalgebra::{Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{CameraIntrinsics, PoseSE3};

/// 10-D camera encoding: normalized translation (3), unit quaternion wxyz (4),
/// horizontal and vertical field of view (radians) and fx/fy aspect.
///
/// The quaternion is sign-canonicalized to `w >= 0` so encoding is
/// deterministic under the double cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraVector10 {
    pub t_norm: [f64; 3],
    pub q: [f64; 4],
    pub fov_h: f64,
    pub fov_v: f64,
    pub aspect: f64,
}

impl CameraVector10 {
    pub fn as_array(&self) -> [f64; 10] {
        [
            self.t_norm[0],
            self.t_norm[1],
            self.t_norm[2],
            self.q[0],
            self.q[1],
            self.q[2],
            self.q[3],
            self.fov_h,
            self.fov_v,
            self.aspect,
        ]
    }

    pub fn from_array(v: [f64; 10]) -> Self {
        Self {
            t_norm: [v[0], v[1], v[2]],
            q: [v[3], v[4], v[5], v[6]],
            fov_h: v[7],
            fov_v: v[8],
            aspect: v[9],
        }
    }
}

/// Encode an extrinsic (translation already normalized) and intrinsics into
/// the 10-D camera vector: `(t_norm, quat, fov_h, fov_v, aspect)`.
pub fn encode_camera_vector(extrinsic: &PoseSE3, intrinsics: &CameraIntrinsics) -> CameraVector10 {
    let rot = Rotation3::from_matrix_unchecked(*extrinsic.rotation());
    let uq = UnitQuaternion::from_rotation_matrix(&rot);
    let mut q = [uq.w, uq.i, uq.j, uq.k];
    if q[0] < 0.0 {
        for c in &mut q {
            *c = -*c;
        }
    }
    let t = extrinsic.translation();
    CameraVector10 {
        t_norm: [t.x, t.y, t.z],
        q,
        fov_h: 2.0 * (intrinsics.width as f64 / (2.0 * intrinsics.fx)).atan(),
        fov_v: 2.0 * (intrinsics.height as f64 / (2.0 * intrinsics.fy)).atan(),
        aspect: intrinsics.fx / intrinsics.fy,
    }
}

/// Inverse of [`encode_camera_vector`] up to quaternion sign.
///
/// The encoding keeps no principal point, so the decoded intrinsics are
/// centered at `(width/2, height/2)`.
pub fn decode_camera_vector(
    v: &CameraVector10,
    width: usize,
    height: usize,
) -> Result<(PoseSE3, CameraIntrinsics)> {
    let norm = (v.q.iter().map(|c| c * c).sum::<f64>()).sqrt();
    if norm < 1e-6 {
        return Err(CoreError::InvalidQuaternion { norm });
    }
    let q = Quaternion::new(v.q[0], v.q[1], v.q[2], v.q[3]);
    let uq = UnitQuaternion::from_quaternion(q);
    let pose = PoseSE3::new(
        uq.to_rotation_matrix().into_inner(),
        Vector3::new(v.t_norm[0], v.t_norm[1], v.t_norm[2]),
    );
    let fx = width as f64 / (2.0 * (v.fov_h / 2.0).tan());
    let fy = height as f64 / (2.0 * (v.fov_v / 2.0).tan());
    let intrinsics = CameraIntrinsics::centered(fx, fy, width, height);
    Ok((pose, intrinsics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_pose(rng: &mut impl Rng) -> PoseSE3 {
        let axis = Vector3::new(
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
        );
        let rot = Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(axis),
            rng.gen::<f64>() * 3.0,
        );
        PoseSE3::new(
            rot.into_inner(),
            Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen()),
        )
    }

    #[test]
    fn identity_encodes_unit_quaternion() {
        let intr = CameraIntrinsics::centered(100.0, 100.0, 56, 28);
        let v = encode_camera_vector(&PoseSE3::identity(), &intr);
        assert_eq!(v.q, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(v.t_norm, [0.0; 3]);
    }

    #[test]
    fn fov_closed_form() {
        // fx = 259, width = 518 -> fov_h = 2 atan(1) = pi/2.
        let intr = CameraIntrinsics::centered(259.0, 259.0, 518, 280);
        let v = encode_camera_vector(&PoseSE3::identity(), &intr);
        assert!((v.fov_h - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn encode_decode_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let pose = random_pose(&mut rng);
            let fx = 50.0 + rng.gen::<f64>() * 200.0;
            let fy = 50.0 + rng.gen::<f64>() * 200.0;
            let intr = CameraIntrinsics::centered(fx, fy, 56, 28);
            let v = encode_camera_vector(&pose, &intr);
            let (pose2, intr2) = decode_camera_vector(&v, 56, 28).unwrap();
            assert!((pose.as_matrix() - pose2.as_matrix()).norm() < 1e-9);
            assert!((intr.fx - intr2.fx).abs() < 1e-6);
            assert!((intr.fy - intr2.fy).abs() < 1e-6);
        }
    }

    #[test]
    fn negated_quaternion_decodes_to_same_pose() {
        let v = CameraVector10 {
            t_norm: [0.0; 3],
            q: [-1.0, 0.0, 0.0, 0.0],
            fov_h: 1.0,
            fov_v: 1.0,
            aspect: 1.0,
        };
        let (pose, _) = decode_camera_vector(&v, 56, 28).unwrap();
        assert!((pose.as_matrix() - PoseSE3::identity().as_matrix()).norm() < 1e-12);
    }

    #[test]
    fn zero_quaternion_rejected() {
        let v = CameraVector10 {
            t_norm: [0.0; 3],
            q: [0.0; 4],
            fov_h: 1.0,
            fov_v: 1.0,
            aspect: 1.0,
        };
        assert!(matches!(
            decode_camera_vector(&v, 56, 28),
            Err(CoreError::InvalidQuaternion { .. })
        ));
    }

    #[test]
    fn canonical_sign_w_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let intr = CameraIntrinsics::centered(100.0, 100.0, 56, 28);
        for _ in 0..50 {
            let v = encode_camera_vector(&random_pose(&mut rng), &intr);
            assert!(v.q[0] >= 0.0);
            let norm: f64 = v.q.iter().map(|c| c * c).sum::<f64>();
            assert!((norm - 1.0).abs() < 1e-9);
        }
    }
}
