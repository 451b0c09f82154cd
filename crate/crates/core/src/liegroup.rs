//! Closed-form SO(3) and SE(3) kernels on rotation vectors.
//!
//! Rotations are parametrized by total rotation vectors `psi`, the rotation
//! being `exp_so3(psi)` (Rodrigues' formula). Euclidean transformations are
//! stored as an orientation block plus a translation and act on homogeneous
//! coordinates as
//!
//! ```text
//! H = | A  r |
//!     | 0  1 |
//! ```
//!
//! Twists are ordered `(d, psi)`: linear part first, angular part second.
//!
//! All maps switch to their first-order expansion below [`SMALL_ANGLE`].
//! Nothing here re-orthonormalizes its input; interpolated orientation fields
//! that are not exactly orthogonal are passed through the same formulas.

use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::error::{Result, RodError};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Angle below which all maps use their first-order branch.
pub const SMALL_ANGLE: f64 = 1e-6;

/// Distance to a singular angle (pi for the logarithm, 2*pi*k for the inverse
/// tangent map) treated as singular.
pub const TOL_PI: f64 = 1e-9;

/// Largest admissible skewness defect accepted by [`vee`].
pub const SKEW_TOL: f64 = 1e-8;

/// Skew-symmetric matrix with `hat(v) * r == v.cross(r)`.
#[inline]
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]. Rejects matrices whose symmetric part exceeds [`SKEW_TOL`].
pub fn vee(b: &Mat3) -> Result<Vec3> {
    let defect = (b + b.transpose()).abs().max();
    if defect > SKEW_TOL {
        return Err(RodError::NotSkew { defect });
    }
    Ok(vee_unchecked(b))
}

/// Axial vector of the skew part of `b`, without validation.
#[inline]
pub fn vee_unchecked(b: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (b[(2, 1)] - b[(1, 2)]),
        0.5 * (b[(0, 2)] - b[(2, 0)]),
        0.5 * (b[(1, 0)] - b[(0, 1)]),
    )
}

/// Skew-symmetric part `(a - a^T) / 2`.
#[inline]
pub fn skw(a: &Mat3) -> Mat3 {
    0.5 * (a - a.transpose())
}

/// Orthogonality and orientation check used by tests and validators.
pub fn is_rotation(a: &Mat3, tol: f64) -> bool {
    let defect = (a.transpose() * a - Mat3::identity()).abs().max();
    defect <= tol && (a.determinant() - 1.0).abs() <= tol
}

/// SO(3) exponential (Rodrigues' formula).
pub fn exp_so3(psi: &Vec3) -> Mat3 {
    let angle = psi.norm();
    let psi_hat = hat(psi);
    if angle < SMALL_ANGLE {
        return Mat3::identity() + psi_hat;
    }
    let half = 0.5 * angle;
    let s = half.sin() / half;
    // 1 - cos(angle) = 2 sin^2(angle/2)
    Mat3::identity() + (angle.sin() / angle) * psi_hat + (0.5 * s * s) * psi_hat * psi_hat
}

/// Rotation angle `arccos((tr A - 1) / 2)` with the argument clamped to [-1, 1].
#[inline]
pub fn rotation_angle(a: &Mat3) -> f64 {
    (0.5 * (a.trace() - 1.0)).clamp(-1.0, 1.0).acos()
}

/// SO(3) logarithm. Fails with [`RodError::AngleAtPi`] at half turns.
///
/// The returned angle is `atan2(sin, cos)`, which keeps full precision for
/// small angles where the arccos form loses digits.
pub fn log_so3(a: &Mat3) -> Result<Vec3> {
    let guard = rotation_angle(a);
    if guard >= std::f64::consts::PI - TOL_PI {
        return Err(RodError::AngleAtPi { angle: guard });
    }
    let axial = Vec3::new(
        a[(2, 1)] - a[(1, 2)],
        a[(0, 2)] - a[(2, 0)],
        a[(1, 0)] - a[(0, 1)],
    );
    let sin = 0.5 * axial.norm();
    let angle = sin.atan2(0.5 * (a.trace() - 1.0));
    if angle < SMALL_ANGLE {
        return Ok(0.5 * axial);
    }
    Ok(angle / (2.0 * sin) * axial)
}

/// SO(3) tangent map `T(psi)` relating rotation-vector rates to body-fixed
/// angular velocities, `omega_K = T(psi) * psi_dot`.
pub fn tangent_so3(psi: &Vec3) -> Mat3 {
    let angle = psi.norm();
    let psi_hat = hat(psi);
    if angle < SMALL_ANGLE {
        return Mat3::identity() - 0.5 * psi_hat;
    }
    let half = 0.5 * angle;
    let s = half.sin() / half;
    let a2 = angle * angle;
    let c1 = 0.5 * s * s; // (1 - cos) / angle^2
    let c2 = (angle - angle.sin()) / (a2 * angle);
    Mat3::identity() - c1 * psi_hat + c2 * psi_hat * psi_hat
}

/// Inverse SO(3) tangent map. Singular for `|psi| = 2*pi*k`, `k >= 1`.
pub fn tangent_so3_inv(psi: &Vec3) -> Result<Mat3> {
    let angle = psi.norm();
    let psi_hat = hat(psi);
    if angle < SMALL_ANGLE {
        return Ok(Mat3::identity() + 0.5 * psi_hat);
    }
    let winding = (angle / (2.0 * std::f64::consts::PI)).round();
    if winding >= 1.0 && (angle - 2.0 * std::f64::consts::PI * winding).abs() < TOL_PI {
        return Err(RodError::TangentSingular { norm: angle });
    }
    let half = 0.5 * angle;
    let coeff = (1.0 - half * half.cos() / half.sin()) / (angle * angle);
    Ok(Mat3::identity() + 0.5 * psi_hat + coeff * psi_hat * psi_hat)
}

/// Complement representative `(1 - 2*pi/|psi|) psi` of rotation vectors
/// longer than pi; shorter vectors pass through unchanged.
pub fn complement_rotation(psi: &Vec3) -> Vec3 {
    let angle = psi.norm();
    if angle <= std::f64::consts::PI {
        *psi
    } else {
        (1.0 - 2.0 * std::f64::consts::PI / angle) * psi
    }
}

/// Paired linear/angular generator `(d, psi)` of a Euclidean transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub linear: Vec3,
    pub angular: Vec3,
}

impl Twist {
    pub fn new(linear: Vec3, angular: Vec3) -> Self {
        Self { linear, angular }
    }

    pub fn zero() -> Self {
        Self::new(Vec3::zeros(), Vec3::zeros())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.linear, s * self.angular)
    }

    pub fn norm_squared(&self) -> f64 {
        self.linear.norm_squared() + self.angular.norm_squared()
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.linear.x,
            self.linear.y,
            self.linear.z,
            self.angular.x,
            self.angular.y,
            self.angular.z,
        ]
    }
}

/// Euclidean transformation: orientation `A_IK` and position `r_OP`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl FrameTransform {
    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Mat3::identity(), Vec3::zeros())
    }

    /// Frame with orientation `exp_so3(psi)` located at `r`.
    pub fn from_coordinates(r: &Vec3, psi: &Vec3) -> Self {
        Self::new(exp_so3(psi), *r)
    }

    /// Group product `self * other`.
    pub fn compose(&self, other: &FrameTransform) -> FrameTransform {
        FrameTransform::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> FrameTransform {
        inverse_transform(self)
    }

    /// Maps a point given in frame coordinates to the outer frame.
    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut h = Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        h
    }
}

/// Closed-form inverse `(A^T, -A^T r)`.
pub fn inverse_transform(h: &FrameTransform) -> FrameTransform {
    let rt = h.rotation.transpose();
    FrameTransform::new(rt, -(rt * h.translation))
}

/// SE(3) exponential: rotation `exp_so3(psi)`, translation `T(psi)^T d`.
pub fn exp_se3(theta: &Twist) -> FrameTransform {
    FrameTransform::new(
        exp_so3(&theta.angular),
        tangent_so3(&theta.angular).transpose() * theta.linear,
    )
}

/// SE(3) logarithm: `psi = log_so3(A)`, `d = T^{-T}(psi) r`.
pub fn log_se3(h: &FrameTransform) -> Result<Twist> {
    let psi = log_so3(&h.rotation)?;
    let t_inv = tangent_so3_inv(&psi)?;
    Ok(Twist::new(t_inv.transpose() * h.translation, psi))
}
