use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Rigid transform in SE(3): orthonormal rotation plus translation.
///
/// Construction repairs small orthonormality drift by projecting onto the
/// nearest rotation (polar decomposition via SVD), so a `PoseSE3` always
/// satisfies `R^T R = I` and `det R = +1` to within 1e-9.
///
/// Serializes as `{"R": [9 row-major floats], "t": [3 floats]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSE3 {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

/// Orthonormality drift beyond which the rotation is re-projected.
const ORTHO_TOL: f64 = 1e-9;

impl PoseSE3 {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Build from rotation and translation, repairing rotation drift.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        let drift = (rotation.transpose() * rotation - Matrix3::identity()).norm();
        let rotation = if drift > ORTHO_TOL {
            nearest_rotation(&rotation)
        } else {
            rotation
        };
        Self {
            rotation,
            translation,
        }
    }

    /// Build from a 4x4 homogeneous matrix (bottom row ignored).
    pub fn from_matrix(m: &Matrix4<f64>) -> Self {
        Self::new(
            m.fixed_view::<3, 3>(0, 0).into_owned(),
            m.fixed_view::<3, 1>(0, 3).into_owned(),
        )
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// 4x4 homogeneous matrix with exact (0,0,0,1) bottom row.
    pub fn as_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Replace the translation, keeping the rotation.
    pub fn with_translation(&self, t: Vector3<f64>) -> Self {
        Self {
            rotation: self.rotation,
            translation: t,
        }
    }

    /// Geodesic rotation distance to another pose, in radians.
    pub fn rotation_angle_to(&self, other: &Self) -> f64 {
        let r = self.rotation.transpose() * other.rotation;
        let c = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }
}

/// Composition `a * b` as 4x4 homogeneous transforms.
pub fn compose_pose(a: &PoseSE3, b: &PoseSE3) -> PoseSE3 {
    PoseSE3::new(
        a.rotation * b.rotation,
        a.rotation * b.translation + a.translation,
    )
}

#[derive(Serialize, Deserialize)]
struct PoseJson {
    #[serde(rename = "R")]
    r: Vec<f64>,
    t: Vec<f64>,
}

impl Serialize for PoseSE3 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut r = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                r.push(self.rotation[(i, j)]);
            }
        }
        let t = vec![self.translation.x, self.translation.y, self.translation.z];
        PoseJson { r, t }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PoseSE3 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = PoseJson::deserialize(deserializer)?;
        if raw.r.len() != 9 || raw.t.len() != 3 {
            return Err(D::Error::custom(format!(
                "pose expects 9 rotation and 3 translation floats, got {} and {}",
                raw.r.len(),
                raw.t.len()
            )));
        }
        let rotation = Matrix3::from_row_slice(&raw.r);
        let translation = Vector3::new(raw.t[0], raw.t[1], raw.t[2]);
        Ok(PoseSE3::new(rotation, translation))
    }
}

/// Nearest rotation matrix in Frobenius norm (polar factor, det +1).
fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        // Flip the singular direction with the smallest singular value.
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * vt;
    }
    r
}
