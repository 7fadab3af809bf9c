//! Collision-aware refinement of a fingertip path into full gripper poses.
//!
//! Decision variables are the positions and orientations of waypoints
//! `1..T-1`; waypoint `T` is the grasp pose and never moves. Orientations are
//! rotation vectors about a slerp initialization. Positions are projected back
//! into a ball around the positional path after every step.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gripper::GripperModel;
use crate::scene::Scene;
use crate::se3::{
    left_jacobian, se3_distance, slerp, so3_exp, so3_log, Pose, Rot3, Vec3, DEFAULT_ROTATION_WEIGHT,
};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RefineParams {
    /// Collision margin ε in meters.
    pub margin: f64,
    /// Tube radius δ_p in meters.
    pub tube_radius: f64,
    /// Rotation weight of the smoothing metric, m²/rad².
    pub rotation_weight: f64,
    pub max_outer_iters: usize,
    pub step_size_init: f64,
    pub convergence_tol: f64,
    /// Central-difference step for distance gradients.
    pub gradient_step: f64,
    /// Length scale converting rotation steps to meters.
    pub rotation_scale: f64,
}

impl Default for RefineParams {
    fn default() -> Self {
        Self {
            margin: 0.01,
            tube_radius: 0.02,
            rotation_weight: DEFAULT_ROTATION_WEIGHT,
            max_outer_iters: 200,
            step_size_init: 0.05,
            convergence_tol: 1e-9,
            gradient_step: 0.002,
            rotation_scale: 0.05,
        }
    }
}

impl RefineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0) {
            return Err(Error::invalid("margin", "must be positive"));
        }
        if !(self.tube_radius >= 0.0) {
            return Err(Error::invalid("tube_radius", "must be non-negative"));
        }
        if !(self.rotation_weight >= 0.0) {
            return Err(Error::invalid("rotation_weight", "must be non-negative"));
        }
        if !(self.step_size_init > 0.0 && self.gradient_step > 0.0 && self.rotation_scale > 0.0) {
            return Err(Error::invalid("refine steps", "must be positive"));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::invalid("convergence_tol", "must be non-negative"));
        }
        Ok(())
    }
}

/// Sequence of `T` world-frame task-frame poses ending at the grasp pose.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricPath {
    pub waypoints: Vec<Pose>,
}

impl GeometricPath {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn last(&self) -> Option<&Pose> {
        self.waypoints.last()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub path: GeometricPath,
    /// Objective of the initial guess followed by every accepted iterate.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

impl Refinement {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }
}

/// Piecewise CHOMP penalty: linear inside, quadratic within the margin, zero beyond.
#[inline]
pub fn chomp_cost(phi: f64, margin: f64) -> f64 {
    if phi < 0.0 {
        -phi + 0.5 * margin
    } else if phi < margin {
        let d = phi - margin;
        d * d / (2.0 * margin)
    } else {
        0.0
    }
}

/// Derivative of [`chomp_cost`] with respect to `phi`.
#[inline]
pub fn chomp_cost_derivative(phi: f64, margin: f64) -> f64 {
    if phi < 0.0 {
        -1.0
    } else if phi < margin {
        (phi - margin) / margin
    } else {
        0.0
    }
}

/// Sum of CHOMP penalties of every volume point against every object.
pub fn collision_cost(scene: &Scene, gripper: &GripperModel, pose: &Pose, margin: f64) -> f64 {
    let mut total = 0.0;
    for p in gripper.volume_points() {
        let q = pose.transform_point(p);
        for i in 0..scene.len() {
            total += chomp_cost(scene.phi_object(i, &q), margin);
        }
    }
    total
}

/// Collision cost with gradients w.r.t. translation and a left rotation perturbation.
pub fn collision_cost_gradient(
    scene: &Scene,
    gripper: &GripperModel,
    pose: &Pose,
    margin: f64,
    h: f64,
) -> (f64, Vec3, Vec3) {
    let mut total = 0.0;
    let mut g_pos = Vec3::zeros();
    let mut g_rot = Vec3::zeros();
    for p in gripper.volume_points() {
        let a = pose.rotation * p;
        let q = a + pose.position;
        for i in 0..scene.len() {
            let phi = scene.phi_object(i, &q);
            total += chomp_cost(phi, margin);
            let dc = chomp_cost_derivative(phi, margin);
            if dc != 0.0 {
                let g = scene.phi_object_gradient(i, &q, h) * dc;
                g_pos += g;
                g_rot += a.cross(&g);
            }
        }
    }
    (total, g_pos, g_rot)
}

struct Problem<'a> {
    scene: &'a Scene,
    gripper: &'a GripperModel,
    params: &'a RefineParams,
    start: Pose,
    goal: Pose,
    anchors: Vec<Vec3>,
    base_rotations: Vec<Rot3>,
}

#[derive(Clone)]
struct Iterate {
    positions: Vec<Vec3>,
    rotvecs: Vec<Vec3>,
}

impl Problem<'_> {
    fn free(&self) -> usize {
        self.anchors.len()
    }

    fn poses(&self, x: &Iterate) -> Vec<Pose> {
        let mut out: Vec<Pose> = (0..self.free())
            .map(|t| {
                Pose::new(
                    x.positions[t],
                    so3_exp(&x.rotvecs[t]) * self.base_rotations[t],
                )
            })
            .collect();
        out.push(self.goal);
        out
    }

    fn smoothing(&self, poses: &[Pose]) -> f64 {
        let lambda = self.params.rotation_weight;
        let mut s = se3_distance(&self.start, &poses[0], lambda);
        for w in poses.windows(2) {
            s += se3_distance(&w[0], &w[1], lambda);
        }
        s
    }

    fn objective(&self, x: &Iterate) -> f64 {
        let poses = self.poses(x);
        let eps = self.params.margin;
        let collision: f64 = poses
            .iter()
            .map(|p| collision_cost(self.scene, self.gripper, p, eps))
            .sum();
        collision + self.smoothing(&poses)
    }

    fn gradient(&self, x: &Iterate) -> (Vec<Vec3>, Vec<Vec3>) {
        let poses = self.poses(x);
        let lambda = self.params.rotation_weight;
        let n = self.free();
        let mut gp = alloc::vec![Vec3::zeros(); n];
        let mut gr = alloc::vec![Vec3::zeros(); n];
        for t in 0..n {
            let (_, cp, cr) = collision_cost_gradient(
                self.scene,
                self.gripper,
                &poses[t],
                self.params.margin,
                self.params.gradient_step,
            );
            let prev = if t == 0 { &self.start } else { &poses[t - 1] };
            let next = &poses[t + 1];
            let cur = &poses[t];
            let sp = (cur.position - prev.position) * 2.0 + (cur.position - next.position) * 2.0;
            let sr = (so3_log(&(cur.rotation * next.rotation.inverse()))
                - so3_log(&(prev.rotation * cur.rotation.inverse())))
                * (2.0 * lambda);
            gp[t] = cp + sp;
            gr[t] = left_jacobian(&x.rotvecs[t]).transpose() * (cr + sr);
        }
        (gp, gr)
    }

    fn project(&self, x: &mut Iterate) {
        let r = self.params.tube_radius;
        for (p, a) in x.positions.iter_mut().zip(&self.anchors) {
            let d = *p - a;
            let n = d.norm();
            if n > r {
                *p = if r == 0.0 { *a } else { a + d * (r / n) };
            }
        }
    }
}

/// Refines a positional path into a collision-aware geometric path.
///
/// `positions` holds the `T` fingertip positions from grid search. The chain
/// is anchored at `start` for smoothing and ends exactly at `goal`. Uses
/// projected gradient descent with Armijo backtracking.
pub fn refine_path(
    scene: &Scene,
    gripper: &GripperModel,
    positions: &[Vec3],
    start: &Pose,
    goal: &Pose,
    params: &RefineParams,
) -> Result<Refinement> {
    params.validate()?;
    let t_len = positions.len();
    if t_len < 1 {
        return Err(Error::LengthMismatch {
            expected: 1,
            got: 0,
        });
    }
    let free = t_len - 1;
    let base_rotations = (1..=free)
        .map(|t| slerp(&start.rotation, &goal.rotation, t as f64 / t_len as f64))
        .collect();
    let problem = Problem {
        scene,
        gripper,
        params,
        start: *start,
        goal: *goal,
        anchors: positions[..free].to_vec(),
        base_rotations,
    };
    let mut x = Iterate {
        positions: problem.anchors.clone(),
        rotvecs: alloc::vec![Vec3::zeros(); free],
    };
    let mut f = problem.objective(&x);
    if !f.is_finite() {
        return Err(Error::RefinementDiverged);
    }
    let mut trace = alloc::vec![f];
    let mut iterations = 0;
    let mut alpha = params.step_size_init;
    let l2 = params.rotation_scale * params.rotation_scale;

    while iterations < params.max_outer_iters && free > 0 {
        let (gp, gr) = problem.gradient(&x);
        let mut accepted = None;
        for _ in 0..40 {
            let mut cand = x.clone();
            for t in 0..free {
                cand.positions[t] -= gp[t] * alpha;
                cand.rotvecs[t] -= gr[t] * (alpha / l2);
            }
            problem.project(&mut cand);
            // sufficient decrease measured in the preconditioned metric
            let moved: f64 = (0..free)
                .map(|t| {
                    (cand.positions[t] - x.positions[t]).norm_squared()
                        + l2 * (cand.rotvecs[t] - x.rotvecs[t]).norm_squared()
                })
                .sum();
            if moved == 0.0 {
                break;
            }
            let fc = problem.objective(&cand);
            if !fc.is_finite() {
                return Err(Error::RefinementDiverged);
            }
            if fc <= f - 1e-4 * moved / alpha {
                accepted = Some((cand, fc));
                break;
            }
            alpha *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            break;
        };
        iterations += 1;
        let decrease = f - fc;
        x = cand;
        f = fc;
        trace.push(f);
        alpha = (alpha * 2.0).min(params.step_size_init * 16.0);
        if decrease < params.convergence_tol {
            break;
        }
    }

    Ok(Refinement {
        path: GeometricPath {
            waypoints: problem.poses(&x),
        },
        objective_trace: trace,
        iterations,
    })
}
