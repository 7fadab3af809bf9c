//! Rigid transforms, pose errors and path resampling.
//!
//! Rotations are stored as orthonormal matrices. Orientation errors are
//! axis-angle vectors taken in the world (left) frame, so for two poses `a`
//! and `b` the rotational error is `log(R_a R_bᵀ)`.

use alloc::vec::Vec;
use core::ops::Mul;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3, Vector6};

use crate::math;

pub type Vec3 = Vector3<f64>;
pub type Vec6 = Vector6<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Rot3 = Rotation3<f64>;

/// Default rotation weight of [`se3_distance`] in m²/rad² (5 cm per radian).
pub const DEFAULT_ROTATION_WEIGHT: f64 = 0.0025;

/// A rigid transform: `p ↦ R·p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub rotation: Rot3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(position: Vec3, rotation: Rot3) -> Self {
        Self { position, rotation }
    }

    pub fn identity() -> Self {
        Self {
            position: Vec3::zeros(),
            rotation: Rot3::identity(),
        }
    }

    pub fn from_translation(position: Vec3) -> Self {
        Self {
            position,
            rotation: Rot3::identity(),
        }
    }

    pub fn from_rotation(rotation: Rot3) -> Self {
        Self {
            position: Vec3::zeros(),
            rotation,
        }
    }

    /// Builds a pose from a (not necessarily normalized) quaternion `[w, x, y, z]`.
    pub fn from_quaternion(position: Vec3, wxyz: [f64; 4]) -> Self {
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
            wxyz[0], wxyz[1], wxyz[2], wxyz[3],
        ));
        Self {
            position,
            rotation: q.to_rotation_matrix(),
        }
    }

    /// Unit quaternion `[w, x, y, z]` with `w ≥ 0`.
    pub fn quaternion(&self) -> [f64; 4] {
        let q = UnitQuaternion::from_rotation_matrix(&self.rotation);
        let s = if q.w < 0.0 { -1.0 } else { 1.0 };
        [s * q.w, s * q.i, s * q.j, s * q.k]
    }

    pub fn inverse(&self) -> Self {
        let rotation = self.rotation.inverse();
        Self {
            position: -(rotation * self.position),
            rotation,
        }
    }

    /// `self · other`, re-orthonormalizing the product rotation.
    pub fn compose(&self, other: &Pose) -> Self {
        let mut rotation = self.rotation * other.rotation;
        rotation.renormalize();
        Self {
            position: self.rotation * other.position + self.position,
            rotation,
        }
    }

    #[inline]
    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.position
    }

    #[inline]
    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Applies a world-frame twist-like increment: translate by `dp`, rotate by `exp(dr)` on the left.
    pub fn perturbed(&self, dp: &Vec3, dr: &Vec3) -> Self {
        let rotation = if *dr == Vec3::zeros() {
            self.rotation
        } else {
            let mut r = so3_exp(dr) * self.rotation;
            r.renormalize();
            r
        };
        Self {
            position: self.position + dp,
            rotation,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.rotation.matrix().iter().all(|v| v.is_finite())
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl<'a> Mul<&'a Pose> for &'a Pose {
    type Output = Pose;
    fn mul(self, rhs: &Pose) -> Pose {
        self.compose(rhs)
    }
}

/// Linear and angular velocity, both in the world frame.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Twist {
    pub linear: Vec3,
    pub angular: Vec3,
}

impl Twist {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vec6) -> Self {
        Self {
            linear: v.fixed_rows::<3>(0).into_owned(),
            angular: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vec6 {
        stack(&self.linear, &self.angular)
    }

    /// Squared norm of the stacked 6-vector (mixes m/s and rad/s).
    pub fn norm_squared(&self) -> f64 {
        self.linear.norm_squared() + self.angular.norm_squared()
    }

    pub fn is_finite(&self) -> bool {
        self.linear
            .iter()
            .chain(self.angular.iter())
            .all(|v| v.is_finite())
    }
}

#[inline]
pub fn stack(top: &Vec3, bottom: &Vec3) -> Vec6 {
    Vec6::new(top.x, top.y, top.z, bottom.x, bottom.y, bottom.z)
}

#[inline]
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation of angle `|v|` about `v / |v|`.
pub fn so3_exp(v: &Vec3) -> Rot3 {
    let theta2 = v.norm_squared();
    if theta2 < 1e-24 {
        let mut r = Rot3::from_matrix_unchecked(Mat3::identity() + skew(v));
        r.renormalize();
        return r;
    }
    let theta = math::sqrt(theta2);
    let k = skew(v);
    let a = math::sin(theta) / theta;
    let b = (1.0 - math::cos(theta)) / theta2;
    Rot3::from_matrix_unchecked(Mat3::identity() + k * a + k * k * b)
}

/// Axis-angle vector of `r`, with magnitude in `[0, π]`.
pub fn so3_log(r: &Rot3) -> Vec3 {
    let q = UnitQuaternion::from_rotation_matrix(r);
    let (w, v) = if q.w < 0.0 {
        (-q.w, -q.imag())
    } else {
        (q.w, q.imag())
    };
    let sin_half = v.norm();
    if sin_half < 1e-12 {
        // small-angle: 2·atan2(s, w)/s → 2/w
        return v * (2.0 / w);
    }
    let angle = 2.0 * math::atan2(sin_half, w);
    v * (angle / sin_half)
}

/// Geodesic angle between two rotations.
pub fn rotation_angle(a: &Rot3, b: &Rot3) -> f64 {
    so3_log(&(a * b.inverse())).norm()
}

/// Left Jacobian of the exponential map: `exp(v + dv) ≈ exp(J_l(v)·dv)·exp(v)`.
pub fn left_jacobian(v: &Vec3) -> Mat3 {
    let theta2 = v.norm_squared();
    let k = skew(v);
    if theta2 < 1e-12 {
        return Mat3::identity() + k * 0.5 + k * k * (1.0 / 6.0);
    }
    let theta = math::sqrt(theta2);
    let a = (1.0 - math::cos(theta)) / theta2;
    let b = (theta - math::sin(theta)) / (theta2 * theta);
    Mat3::identity() + k * a + k * k * b
}

/// Inverse of [`left_jacobian`]; maps a world angular velocity to `d/dt` of the
/// rotation vector of `exp(v)`.
pub fn left_jacobian_inverse(v: &Vec3) -> Mat3 {
    let theta2 = v.norm_squared();
    let k = skew(v);
    if theta2 < 1e-12 {
        return Mat3::identity() - k * 0.5 + k * k * (1.0 / 12.0);
    }
    let theta = math::sqrt(theta2);
    let half = 0.5 * theta;
    let c = (1.0 - half / math::tan(half)) / theta2;
    Mat3::identity() - k * 0.5 + k * k * c
}

/// Geodesic interpolation `exp(s·log(b·aᵀ))·a`.
pub fn slerp(a: &Rot3, b: &Rot3, s: f64) -> Rot3 {
    let delta = so3_log(&(b * a.inverse()));
    let mut r = so3_exp(&(delta * s)) * a;
    r.renormalize();
    r
}

#[inline]
pub fn transform_point(pose: &Pose, p: &Vec3) -> Vec3 {
    pose.transform_point(p)
}

/// `[p_a − p_b, log(R_a R_bᵀ)]`.
pub fn pose_error(a: &Pose, b: &Pose) -> Vec6 {
    let dp = a.position - b.position;
    let dr = so3_log(&(a.rotation * b.rotation.inverse()));
    stack(&dp, &dr)
}

/// `‖p_a − p_b‖² + λ_R·θ²` with `θ` the geodesic angle between the rotations.
pub fn se3_distance(a: &Pose, b: &Pose, rotation_weight: f64) -> f64 {
    let e = pose_error(a, b);
    let lin = e.fixed_rows::<3>(0).norm_squared();
    let rot = e.fixed_rows::<3>(3).norm_squared();
    lin + rotation_weight * rot
}

/// Total length of the polyline through `points`.
pub fn arc_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Resamples a polyline to `count` points equally spaced in arc length.
///
/// Endpoints are copied exactly. A single input point (or a polyline of zero
/// length) yields `count` copies of the first point.
pub fn resample_positions(points: &[Vec3], count: usize) -> Vec<Vec3> {
    assert!(
        !points.is_empty(),
        "resample_positions needs at least one point"
    );
    assert!(count >= 2, "resample_positions needs count >= 2");
    let first = points[0];
    let last = points[points.len() - 1];
    let total = arc_length(points);
    if points.len() == 1 || total == 0.0 {
        return alloc::vec![first; count];
    }

    let mut out = Vec::with_capacity(count);
    out.push(first);
    let mut seg = 0usize;
    let mut seg_start = 0.0;
    let mut seg_len = (points[1] - points[0]).norm();
    for k in 1..count - 1 {
        let target = total * (k as f64) / ((count - 1) as f64);
        while seg + 2 < points.len() && seg_start + seg_len < target {
            seg_start += seg_len;
            seg += 1;
            seg_len = (points[seg + 1] - points[seg]).norm();
        }
        let p = if seg_len > 0.0 {
            let s = ((target - seg_start) / seg_len).clamp(0.0, 1.0);
            points[seg] + (points[seg + 1] - points[seg]) * s
        } else {
            points[seg]
        };
        out.push(p);
    }
    out.push(last);
    out
}
