//! Shooting-based synthesis of impedance equilibria that track a geometric path.
//!
//! Equilibria are 6-vector perturbations around `ξ_t = X̃_{t+1}`. The predicted
//! rollout is compared against the path in the SE(3) metric; terminal speed and
//! excess speed enter as squared penalties. Derivatives come from central
//! differences of full rollouts, and steps are damped Gauss-Newton directions
//! with backtracking.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{estimate_external_wrench, rollout_step, ImpedanceParams, TaskState, Wrench};
use crate::error::{Error, Result};
use crate::gripper::GripperModel;
use crate::math;
use crate::refine::GeometricPath;
use crate::scene::Scene;
use crate::se3::{pose_error, se3_distance, Pose, Vec3, DEFAULT_ROTATION_WEIGHT};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ControlGenParams {
    /// Bound δ_v on the squared stacked twist norm.
    pub speed_bound: f64,
    pub boundary_weight: f64,
    pub velocity_penalty_weight: f64,
    pub fd_step: f64,
    pub max_iters: usize,
    /// Relative objective decrease below which iteration stops.
    pub tol: f64,
    pub rotation_weight: f64,
}

impl Default for ControlGenParams {
    fn default() -> Self {
        Self {
            speed_bound: 0.04,
            boundary_weight: 1.0,
            velocity_penalty_weight: 100.0,
            fd_step: 1e-6,
            max_iters: 20,
            tol: 1e-6,
            rotation_weight: DEFAULT_ROTATION_WEIGHT,
        }
    }
}

impl ControlGenParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed_bound > 0.0) {
            return Err(Error::invalid("speed_bound", "must be positive"));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::invalid("fd_step", "must be positive"));
        }
        if !(self.boundary_weight >= 0.0 && self.velocity_penalty_weight >= 0.0) {
            return Err(Error::invalid("penalty weights", "must be non-negative"));
        }
        if !(self.rotation_weight >= 0.0 && self.tol >= 0.0) {
            return Err(Error::invalid(
                "synthesis tolerances",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlSequence {
    pub equilibria: Vec<Pose>,
    pub impedance: ImpedanceParams,
}

impl ControlSequence {
    pub fn len(&self) -> usize {
        self.equilibria.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equilibria.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    pub controls: ControlSequence,
    /// Predicted states after each control step.
    pub predicted: Vec<TaskState>,
    /// External wrench assumed during each control step.
    pub f_ext: Vec<Wrench>,
    /// Warm-start objective followed by every accepted iterate.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

impl Synthesis {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::NAN)
    }
}

struct Shooting<'a> {
    path: &'a [Pose],
    warm: Vec<Pose>,
    f_ext: Vec<Wrench>,
    x0: TaskState,
    impedance: &'a ImpedanceParams,
    params: &'a ControlGenParams,
}

impl Shooting<'_> {
    fn steps(&self) -> usize {
        self.path.len()
    }

    fn rows(&self) -> usize {
        7 * self.steps() + 6
    }

    fn equilibrium(&self, t: usize, delta: &DVector<f64>) -> Pose {
        let d = delta.fixed_rows::<6>(6 * t);
        self.warm[t].perturbed(&Vec3::new(d[0], d[1], d[2]), &Vec3::new(d[3], d[4], d[5]))
    }

    /// Rolls steps `from..T` starting at `states[from]`, overwriting later entries.
    fn roll_from(&self, from: usize, delta: &DVector<f64>, states: &mut [TaskState]) -> Result<()> {
        for t in from..self.steps() {
            states[t + 1] = rollout_step(
                &states[t],
                &self.equilibrium(t, delta),
                &self.f_ext[t],
                self.impedance,
            )?;
        }
        Ok(())
    }

    fn residual(&self, states: &[TaskState]) -> DVector<f64> {
        let n = self.steps();
        let mut r = DVector::zeros(self.rows());
        let sl = math::sqrt(self.params.rotation_weight);
        let sb = math::sqrt(self.params.boundary_weight);
        let sv = math::sqrt(self.params.velocity_penalty_weight);
        for t in 0..n {
            let e = pose_error(&self.path[t], &states[t + 1].pose);
            for k in 0..3 {
                r[6 * t + k] = e[k];
                r[6 * t + 3 + k] = sl * e[3 + k];
            }
            let excess = states[t + 1].twist.norm_squared() - self.params.speed_bound;
            r[6 * n + 6 + t] = sv * excess.max(0.0);
        }
        let v = states[n].twist.to_vector();
        for k in 0..6 {
            r[6 * n + k] = sb * v[k];
        }
        r
    }

    fn initial_states(&self) -> Vec<TaskState> {
        alloc::vec![self.x0; self.steps() + 1]
    }

    fn evaluate(&self, delta: &DVector<f64>) -> Option<(Vec<TaskState>, DVector<f64>, f64)> {
        let mut states = self.initial_states();
        self.roll_from(0, delta, &mut states).ok()?;
        let r = self.residual(&states);
        let f = r.norm_squared();
        f.is_finite().then_some((states, r, f))
    }

    fn jacobian(&self, delta: &DVector<f64>, states: &[TaskState]) -> DMatrix<f64> {
        let n = self.steps();
        let h = self.params.fd_step;
        let mut jac = DMatrix::zeros(self.rows(), 6 * n);
        let mut probe = delta.clone();
        let mut plus = states.to_vec();
        let mut minus = states.to_vec();
        for t in 0..n {
            for k in 0..6 {
                let j = 6 * t + k;
                probe[j] = delta[j] + h;
                let ok_p = self.roll_from(t, &probe, &mut plus).is_ok();
                probe[j] = delta[j] - h;
                let ok_m = self.roll_from(t, &probe, &mut minus).is_ok();
                probe[j] = delta[j];
                // a diverged probe leaves the column at zero, freezing the variable
                if ok_p && ok_m {
                    let col = (self.residual(&plus) - self.residual(&minus)) / (2.0 * h);
                    if col.iter().all(|v| v.is_finite()) {
                        jac.set_column(j, &col);
                    }
                }
            }
        }
        jac
    }
}

/// Finds equilibria whose predicted rollout from `x0` tracks `path`.
///
/// The wrench for step `t` is estimated at the planned pose the step starts
/// from (`x0` for the first step). Returns the best iterate found.
pub fn synthesize_controls(
    scene: &Scene,
    gripper: &GripperModel,
    path: &GeometricPath,
    x0: &TaskState,
    impedance: &ImpedanceParams,
    params: &ControlGenParams,
) -> Result<Synthesis> {
    params.validate()?;
    impedance.validate()?;
    if path.is_empty() {
        return Err(Error::LengthMismatch {
            expected: 1,
            got: 0,
        });
    }
    if x0.twist.norm_squared() != 0.0 {
        return Err(Error::invalid("initial twist", "must be zero"));
    }
    let n = path.len();
    let f_ext = (0..n)
        .map(|t| {
            let from = if t == 0 {
                &x0.pose
            } else {
                &path.waypoints[t - 1]
            };
            estimate_external_wrench(scene, gripper, from, impedance.penetration_stiffness)
        })
        .collect();
    let problem = Shooting {
        path: &path.waypoints,
        warm: path.waypoints.clone(),
        f_ext,
        x0: *x0,
        impedance,
        params,
    };

    let mut delta = DVector::zeros(6 * n);
    let (mut states, mut r, mut f) = problem.evaluate(&delta).ok_or(Error::SynthesisFailed)?;
    let mut trace = alloc::vec![f];
    let mut iterations = 0;
    let mut mu = 1e-9;

    while iterations < params.max_iters && f > 1e-20 {
        let jac = problem.jacobian(&delta, &states);
        let jt = jac.transpose();
        let g = &jt * &r;
        if g.norm() == 0.0 {
            break;
        }
        let jtj = &jt * &jac;
        let mut accepted = None;
        'damping: for _ in 0..12 {
            let mut a = jtj.clone();
            let scale = jtj.diagonal().max().max(1e-12);
            for i in 0..a.nrows() {
                a[(i, i)] += mu * scale;
            }
            let Some(chol) = a.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let mut alpha = 1.0;
            for _ in 0..6 {
                let cand = &delta + &step * alpha;
                if let Some((s, rc, fc)) = problem.evaluate(&cand) {
                    if fc < f {
                        accepted = Some((cand, s, rc, fc));
                        break 'damping;
                    }
                }
                alpha *= 0.5;
            }
            mu *= 10.0;
        }
        let Some((cand, s, rc, fc)) = accepted else {
            break;
        };
        iterations += 1;
        mu = (mu * 0.1).max(1e-12);
        let decrease = f - fc;
        delta = cand;
        states = s;
        r = rc;
        f = fc;
        trace.push(f);
        if decrease <= params.tol * trace[trace.len() - 2] {
            break;
        }
    }

    if !f.is_finite() {
        return Err(Error::SynthesisFailed);
    }
    let equilibria = (0..n).map(|t| problem.equilibrium(t, &delta)).collect();
    Ok(Synthesis {
        controls: ControlSequence {
            equilibria,
            impedance: *impedance,
        },
        predicted: states[1..].to_vec(),
        f_ext: problem.f_ext,
        objective_trace: trace,
        iterations,
    })
}

/// Sum of SE(3) distances between a path and predicted states.
pub fn tracking_cost(path: &GeometricPath, predicted: &[TaskState], rotation_weight: f64) -> f64 {
    path.waypoints
        .iter()
        .zip(predicted)
        .map(|(w, s)| se3_distance(w, &s.pose, rotation_weight))
        .sum()
}
