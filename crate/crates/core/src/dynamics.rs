//! Task-space impedance dynamics with a constant effective inertia.
//!
//! The controller wrench is `K·e − D·ẋ` with `e = pose_error(ξ, x)`, and the
//! task frame accelerates as `ẍ = Λ⁻¹(f + f_ext)`. The external wrench is held
//! constant over a control step. Each step is integrated with classical RK4 at
//! the substep `dt`; orientation is advanced in a local rotation-vector chart
//! around the substep's starting attitude.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gripper::GripperModel;
use crate::math;
use crate::scene::Scene;
use crate::se3::{
    left_jacobian_inverse, pose_error, so3_exp, so3_log, stack, Pose, Twist, Vec3, Vec6,
};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ImpedanceParams {
    /// Diagonal stiffness: N/m for the first three entries, N·m/rad for the rest.
    pub stiffness: [f64; 6],
    /// Diagonal damping; `None` means critical damping `2·sqrt(K·Λ)`.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub damping: Option<[f64; 6]>,
    /// Diagonal effective inertia: kg, then kg·m².
    pub inertia: [f64; 6],
    /// Stiffness of virtual penetrations, N/m.
    pub penetration_stiffness: f64,
    /// Integration substep in seconds.
    pub dt: f64,
    /// Duration of one control step in seconds.
    pub step_duration: f64,
}

impl Default for ImpedanceParams {
    fn default() -> Self {
        Self {
            stiffness: [500.0, 500.0, 500.0, 20.0, 20.0, 20.0],
            damping: None,
            inertia: [1.5, 1.5, 1.5, 0.05, 0.05, 0.05],
            penetration_stiffness: 200.0,
            dt: 0.002,
            step_duration: 0.5,
        }
    }
}

impl ImpedanceParams {
    pub fn stiffness(&self) -> Vec6 {
        Vec6::from_row_slice(&self.stiffness)
    }

    pub fn inertia(&self) -> Vec6 {
        Vec6::from_row_slice(&self.inertia)
    }

    pub fn damping(&self) -> Vec6 {
        match self.damping {
            Some(d) => Vec6::from_row_slice(&d),
            None => Vec6::from_fn(|i, _| 2.0 * math::sqrt(self.stiffness[i] * self.inertia[i])),
        }
    }

    /// Number of substeps per control step.
    pub fn substeps(&self) -> usize {
        (math::round(self.step_duration / self.dt) as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.stiffness.iter().all(|&k| k >= 0.0 && k.is_finite()) {
            return Err(Error::invalid("stiffness", "must be non-negative"));
        }
        if !self.inertia.iter().all(|&m| m > 0.0 && m.is_finite()) {
            return Err(Error::invalid("inertia", "must be positive"));
        }
        if let Some(d) = self.damping {
            if !d.iter().all(|&v| v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid("damping", "must be non-negative"));
            }
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(self.step_duration >= self.dt) {
            return Err(Error::invalid("step_duration", "must be at least dt"));
        }
        if !(self.penetration_stiffness >= 0.0) {
            return Err(Error::invalid(
                "penetration_stiffness",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TaskState {
    pub pose: Pose,
    pub twist: Twist,
}

impl TaskState {
    pub fn at_rest(pose: Pose) -> Self {
        Self {
            pose,
            twist: Twist::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pose.is_finite() && self.twist.is_finite()
    }
}

/// World-frame force and torque about the task frame origin.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Wrench {
    pub force: Vec3,
    pub torque: Vec3,
}

impl Wrench {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vec6) -> Self {
        let t = Twist::from_vector(v);
        Self {
            force: t.linear,
            torque: t.angular,
        }
    }

    pub fn to_vector(&self) -> Vec6 {
        stack(&self.force, &self.torque)
    }

    pub fn is_finite(&self) -> bool {
        self.force
            .iter()
            .chain(self.torque.iter())
            .all(|v| v.is_finite())
    }
}

/// Spring-damper wrench pulling `state` toward the equilibrium `xi`.
pub fn impedance_wrench(xi: &Pose, state: &TaskState, params: &ImpedanceParams) -> Wrench {
    let e = pose_error(xi, &state.pose);
    let f = params.stiffness().component_mul(&e)
        - params.damping().component_mul(&state.twist.to_vector());
    Wrench::from_vector(&f)
}

/// Reaction wrench from gripper surface points penetrating the scene.
///
/// Each penetrating point contributes `k·φ·n` (task frame, so along `−n`); the
/// force and moment sums are averaged over the penetrating points and rotated
/// into the world. No penetration gives the zero wrench.
pub fn estimate_external_wrench(
    scene: &Scene,
    gripper: &GripperModel,
    pose: &Pose,
    penetration_stiffness: f64,
) -> Wrench {
    let mut force = Vec3::zeros();
    let mut moment = Vec3::zeros();
    let mut count = 0usize;
    for sp in gripper.surface_points() {
        let phi = scene.phi_env(&pose.transform_point(&sp.position));
        if phi < 0.0 {
            let f = sp.normal * (penetration_stiffness * phi);
            force += f;
            moment += sp.position.cross(&f);
            count += 1;
        }
    }
    if count == 0 {
        return Wrench::zero();
    }
    let inv = 1.0 / count as f64;
    Wrench {
        force: pose.rotation * force * inv,
        torque: pose.rotation * moment * inv,
    }
}

/// Pre-resolved diagonal gains for the inner integration loop.
#[derive(Clone, Copy)]
struct Gains {
    k: Vec6,
    d: Vec6,
    inv_m: Vec6,
}

impl Gains {
    fn new(params: &ImpedanceParams) -> Self {
        Self {
            k: params.stiffness(),
            d: params.damping(),
            inv_m: params.inertia().map(|m| 1.0 / m),
        }
    }
}

// Local chart state: displacement, rotation vector, linear and angular velocity.
#[derive(Clone, Copy)]
struct Local {
    dp: Vec3,
    dr: Vec3,
    v: Vec3,
    w: Vec3,
}

impl Local {
    fn axpy(&self, s: f64, d: &Local) -> Local {
        Local {
            dp: self.dp + d.dp * s,
            dr: self.dr + d.dr * s,
            v: self.v + d.v * s,
            w: self.w + d.w * s,
        }
    }
}

fn derivative(base: &Pose, y: &Local, xi: &Pose, f_ext: &Wrench, g: &Gains) -> Local {
    let p = base.position + y.dp;
    let r = if y.dr == Vec3::zeros() {
        base.rotation
    } else {
        so3_exp(&y.dr) * base.rotation
    };
    let e_lin = xi.position - p;
    let e_rot = so3_log(&(xi.rotation * r.inverse()));
    let mut a = Vec3::zeros();
    let mut alpha = Vec3::zeros();
    for i in 0..3 {
        a[i] = (g.k[i] * e_lin[i] - g.d[i] * y.v[i] + f_ext.force[i]) * g.inv_m[i];
        alpha[i] = (g.k[i + 3] * e_rot[i] - g.d[i + 3] * y.w[i] + f_ext.torque[i]) * g.inv_m[i + 3];
    }
    let dr = if y.dr == Vec3::zeros() {
        y.w
    } else {
        left_jacobian_inverse(&y.dr) * y.w
    };
    Local {
        dp: y.v,
        dr,
        v: a,
        w: alpha,
    }
}

fn rk4_substep(state: &TaskState, xi: &Pose, f_ext: &Wrench, g: &Gains, dt: f64) -> TaskState {
    let base = state.pose;
    let y0 = Local {
        dp: Vec3::zeros(),
        dr: Vec3::zeros(),
        v: state.twist.linear,
        w: state.twist.angular,
    };
    let k1 = derivative(&base, &y0, xi, f_ext, g);
    let k2 = derivative(&base, &y0.axpy(0.5 * dt, &k1), xi, f_ext, g);
    let k3 = derivative(&base, &y0.axpy(0.5 * dt, &k2), xi, f_ext, g);
    let k4 = derivative(&base, &y0.axpy(dt, &k3), xi, f_ext, g);
    let y = y0
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4);
    let mut rotation = so3_exp(&y.dr) * base.rotation;
    rotation.renormalize();
    TaskState {
        pose: Pose::new(base.position + y.dp, rotation),
        twist: Twist {
            linear: y.v,
            angular: y.w,
        },
    }
}

/// Total mechanical energy `½ẋᵀΛẋ + ½eᵀKe` relative to the equilibrium `xi`.
pub fn energy(state: &TaskState, xi: &Pose, params: &ImpedanceParams) -> f64 {
    let e = pose_error(xi, &state.pose);
    let v = state.twist.to_vector();
    let k = params.stiffness();
    let m = params.inertia();
    0.5 * (0..6)
        .map(|i| m[i] * v[i] * v[i] + k[i] * e[i] * e[i])
        .sum::<f64>()
}

/// Advances one control step, calling `observe` after every substep.
pub fn rollout_step_observed(
    state: &TaskState,
    xi: &Pose,
    f_ext: &Wrench,
    params: &ImpedanceParams,
    mut observe: impl FnMut(usize, &TaskState),
) -> Result<TaskState> {
    let gains = Gains::new(params);
    let n = params.substeps();
    let dt = params.step_duration / n as f64;
    let mut s = *state;
    for i in 0..n {
        s = rk4_substep(&s, xi, f_ext, &gains, dt);
        if !s.is_finite() {
            return Err(Error::DynamicsDiverged);
        }
        observe(i, &s);
    }
    Ok(s)
}

/// Advances one control step under equilibrium `xi` and constant `f_ext`.
pub fn rollout_step(
    state: &TaskState,
    xi: &Pose,
    f_ext: &Wrench,
    params: &ImpedanceParams,
) -> Result<TaskState> {
    rollout_step_observed(state, xi, f_ext, params, |_, _| {})
}

/// Chains [`rollout_step`] over a control sequence; returns the state after each step.
pub fn rollout_sequence(
    initial: &TaskState,
    controls: &[Pose],
    f_ext: &[Wrench],
    params: &ImpedanceParams,
) -> Result<Vec<TaskState>> {
    if controls.len() != f_ext.len() {
        return Err(Error::LengthMismatch {
            expected: controls.len(),
            got: f_ext.len(),
        });
    }
    let mut out = Vec::with_capacity(controls.len());
    let mut s = *initial;
    for (xi, w) in controls.iter().zip(f_ext) {
        s = rollout_step(&s, xi, w, params)?;
        out.push(s);
    }
    Ok(out)
}
