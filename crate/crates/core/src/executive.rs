//! The repetition loop: observe, sample a pre-grasp, plan, execute, retry.
//!
//! Execution runs in a quasi-static simulator: the true scene never moves, and
//! the contact wrench is re-estimated from the simulated pose at the start of
//! every control step. The planner only sees a noisy observation of the scene.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitBall, UnitSphere};

use crate::dynamics::{
    estimate_external_wrench, rollout_step_observed, ImpedanceParams, TaskState, Wrench,
};
use crate::error::{Error, Result};
use crate::gripper::GripperModel;
use crate::refine::{collision_cost, refine_path, GeometricPath, RefineParams, Refinement};
use crate::scene::Scene;
use crate::se3::{pose_error, se3_distance, so3_exp, Pose, Twist, Vec3, DEFAULT_ROTATION_WEIGHT};
use crate::search::{find_positional_path, AStarParams, PositionalPath};
use crate::synthesis::{synthesize_controls, ControlGenParams, ControlSequence, Synthesis};

/// Perception noise applied to every non-fixed object per repetition.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NoiseConfig {
    /// Per-axis position standard deviation, m.
    pub position_sigma: f64,
    /// Per-axis rotation-vector standard deviation, rad.
    pub rotation_sigma: f64,
    /// Relative standard deviation of the planner's penetration stiffness.
    pub stiffness_sigma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            position_sigma: 0.005,
            rotation_sigma: 0.02,
            stiffness_sigma: 0.10,
        }
    }
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            position_sigma: 0.0,
            rotation_sigma: 0.0,
            stiffness_sigma: 0.0,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            position_sigma: self.position_sigma * s,
            rotation_sigma: self.rotation_sigma * s,
            stiffness_sigma: self.stiffness_sigma * s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ExecutiveConfig {
    pub max_repetitions: usize,
    pub sample_radius: f64,
    pub sample_standoff: f64,
    /// Direction away from the support surface used for the standoff.
    pub up_axis: [f64; 3],
    pub max_sample_rotation: f64,
    pub max_sample_attempts: usize,
    /// Early-termination threshold in the SE(3) distance metric.
    pub deviation_threshold: f64,
    pub success_tol_pos: f64,
    pub success_tol_rot: f64,
    pub rotation_weight: f64,
    pub noise: NoiseConfig,
    pub seed: u64,
}

impl Default for ExecutiveConfig {
    fn default() -> Self {
        Self {
            max_repetitions: 10,
            sample_radius: 0.03,
            sample_standoff: 0.10,
            up_axis: [0.0, 0.0, 1.0],
            max_sample_rotation: 0.1,
            max_sample_attempts: 100,
            deviation_threshold: 0.0025,
            success_tol_pos: 0.01,
            success_tol_rot: 0.15,
            rotation_weight: DEFAULT_ROTATION_WEIGHT,
            noise: NoiseConfig::default(),
            seed: 0,
        }
    }
}

impl ExecutiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_repetitions < 1 {
            return Err(Error::invalid("max_repetitions", "must be at least 1"));
        }
        if !(self.success_tol_pos > 0.0
            && self.success_tol_rot > 0.0
            && self.deviation_threshold > 0.0)
        {
            return Err(Error::invalid("executive tolerances", "must be positive"));
        }
        if !(self.sample_radius >= 0.0
            && self.sample_standoff >= 0.0
            && self.max_sample_rotation >= 0.0)
        {
            return Err(Error::invalid("pre-grasp sampling", "must be non-negative"));
        }
        let up = Vec3::from(self.up_axis);
        if !(up.norm() > 0.0) {
            return Err(Error::invalid("up_axis", "must be non-zero"));
        }
        let n = &self.noise;
        if !(n.position_sigma >= 0.0 && n.rotation_sigma >= 0.0 && n.stiffness_sigma >= 0.0) {
            return Err(Error::invalid("noise", "must be non-negative"));
        }
        Ok(())
    }
}

/// Parameters of every planning stage.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PlannerConfig {
    pub search: AStarParams,
    pub refine: RefineParams,
    pub synthesis: ControlGenParams,
    pub impedance: ImpedanceParams,
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        self.refine.validate()?;
        self.synthesis.validate()?;
        self.impedance.validate()
    }
}

/// Monotonic time source in seconds; only used for reporting.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct StageTimings {
    pub search: f64,
    pub refine: f64,
    pub synthesis: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.search + self.refine + self.synthesis
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub start: Pose,
    pub positional: PositionalPath,
    pub refinement: Refinement,
    pub synthesis: Synthesis,
    pub timings: StageTimings,
}

impl Plan {
    pub fn path(&self) -> &GeometricPath {
        &self.refinement.path
    }

    pub fn controls(&self) -> &ControlSequence {
        &self.synthesis.controls
    }
}

/// Search, refinement and synthesis from a resting start pose to the scene's grasp pose.
pub fn plan(
    scene: &Scene,
    gripper: &GripperModel,
    start: &Pose,
    config: &PlannerConfig,
    clock: &dyn Clock,
) -> Result<Plan> {
    config.validate()?;
    let goal = scene.grasp_pose_world();
    let t0 = clock.now();
    let positional = find_positional_path(scene, &start.position, &goal.position, &config.search)?;
    let t1 = clock.now();
    let refinement = refine_path(
        scene,
        gripper,
        &positional.points,
        start,
        &goal,
        &config.refine,
    )?;
    let t2 = clock.now();
    let synthesis = synthesize_controls(
        scene,
        gripper,
        &refinement.path,
        &TaskState::at_rest(*start),
        &config.impedance,
        &config.synthesis,
    )?;
    let t3 = clock.now();
    Ok(Plan {
        start: *start,
        positional,
        refinement,
        synthesis,
        timings: StageTimings {
            search: t1 - t0,
            refine: t2 - t1,
            synthesis: t3 - t2,
        },
    })
}

/// Rejection-samples a collision-free pre-grasp pose above the grasp.
pub fn sample_pregrasp<R: Rng + ?Sized>(
    scene: &Scene,
    gripper: &GripperModel,
    grasp: &Pose,
    config: &ExecutiveConfig,
    margin: f64,
    rng: &mut R,
) -> Result<Pose> {
    let up = Vec3::from(config.up_axis).normalize();
    let center = grasp.position + up * config.sample_standoff;
    for _ in 0..config.max_sample_attempts {
        let ball: [f64; 3] = UnitBall.sample(rng);
        let axis: [f64; 3] = UnitSphere.sample(rng);
        let angle = rng.random_range(0.0..=config.max_sample_rotation);
        let pose = Pose::new(
            center + Vec3::from(ball) * config.sample_radius,
            so3_exp(&(Vec3::from(axis) * angle)) * grasp.rotation,
        );
        if collision_cost(scene, gripper, &pose, margin) == 0.0 {
            return Ok(pose);
        }
    }
    Err(Error::NoPregrasp {
        attempts: config.max_sample_attempts,
    })
}

fn gaussian3<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Vec3 {
    let mut v = Vec3::zeros();
    for a in 0..3 {
        let n: f64 = StandardNormal.sample(rng);
        v[a] = n * sigma;
    }
    v
}

/// Noisy observation of `scene`: fixed objects are reported exactly.
pub fn perceive<R: Rng + ?Sized>(scene: &Scene, noise: &NoiseConfig, rng: &mut R) -> Scene {
    let mut seen = scene.clone();
    for i in 0..scene.len() {
        let obj = &scene.objects()[i];
        if obj.fixed {
            continue;
        }
        let dp = gaussian3(rng, noise.position_sigma);
        let dr = gaussian3(rng, noise.rotation_sigma);
        // index is in range by construction
        let _ = seen.set_object_pose(i, obj.pose.perturbed(&dp, &dr));
    }
    seen
}

/// Planner's belief of the impedance model with a perturbed penetration stiffness.
pub fn perceive_impedance<R: Rng + ?Sized>(
    impedance: &ImpedanceParams,
    noise: &NoiseConfig,
    rng: &mut R,
) -> ImpedanceParams {
    let n: f64 = StandardNormal.sample(rng);
    ImpedanceParams {
        penetration_stiffness: impedance.penetration_stiffness
            * (1.0 + noise.stiffness_sigma * n).max(0.0),
        ..*impedance
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Outcome {
    GraspSuccess,
    GraspFailed,
    Deviated,
    Diverged,
}

/// One simulated sample: the end of a control step, or a substep in dense mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExecutionRecord {
    pub step: usize,
    pub commanded: Pose,
    pub pose: Pose,
    pub twist: Twist,
    pub f_ext: Wrench,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub records: Vec<ExecutionRecord>,
    pub outcome: Outcome,
    /// Control step at which execution ended (1-based count of completed steps).
    pub steps_completed: usize,
    pub final_state: TaskState,
}

/// Whether `pose` matches `grasp` within the per-axis tolerances.
pub fn grasp_reached(pose: &Pose, grasp: &Pose, config: &ExecutiveConfig) -> bool {
    let e = pose_error(pose, grasp);
    (0..3).all(|i| e[i].abs() <= config.success_tol_pos && e[i + 3].abs() <= config.success_tol_rot)
}

/// Runs `controls` on the true scene from `x0` and classifies the result.
pub fn execute_in_sim(
    true_scene: &Scene,
    gripper: &GripperModel,
    controls: &ControlSequence,
    planned: &GeometricPath,
    x0: &TaskState,
    config: &ExecutiveConfig,
    dense: bool,
) -> Result<Execution> {
    if controls.len() != planned.len() {
        return Err(Error::LengthMismatch {
            expected: planned.len(),
            got: controls.len(),
        });
    }
    let impedance = &controls.impedance;
    let lambda = config.rotation_weight;
    let mut records = Vec::new();
    let mut state = *x0;
    for (t, (xi, target)) in controls
        .equilibria
        .iter()
        .zip(&planned.waypoints)
        .enumerate()
    {
        let f_ext = estimate_external_wrench(
            true_scene,
            gripper,
            &state.pose,
            impedance.penetration_stiffness,
        );
        let observed = rollout_step_observed(&state, xi, &f_ext, impedance, |_, s| {
            if dense {
                records.push(ExecutionRecord {
                    step: t + 1,
                    commanded: *xi,
                    pose: s.pose,
                    twist: s.twist,
                    f_ext,
                    deviation: se3_distance(&s.pose, target, lambda),
                });
            }
        });
        state = match observed {
            Ok(s) => s,
            Err(_) => {
                return Ok(Execution {
                    records,
                    outcome: Outcome::Diverged,
                    steps_completed: t,
                    final_state: state,
                })
            }
        };
        let deviation = se3_distance(&state.pose, target, lambda);
        if !dense {
            records.push(ExecutionRecord {
                step: t + 1,
                commanded: *xi,
                pose: state.pose,
                twist: state.twist,
                f_ext,
                deviation,
            });
        }
        if deviation > config.deviation_threshold {
            return Ok(Execution {
                records,
                outcome: Outcome::Deviated,
                steps_completed: t + 1,
                final_state: state,
            });
        }
    }
    let outcome = if grasp_reached(&state.pose, &true_scene.grasp_pose_world(), config) {
        Outcome::GraspSuccess
    } else {
        Outcome::GraspFailed
    };
    Ok(Execution {
        records,
        outcome,
        steps_completed: controls.len(),
        final_state: state,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Executed(Outcome),
    /// A planning stage failed; carries the error message.
    PlanningFailed(String),
}

impl Termination {
    pub fn is_success(&self) -> bool {
        *self == Termination::Executed(Outcome::GraspSuccess)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::Executed(Outcome::GraspSuccess) => "grasp_success",
            Termination::Executed(Outcome::GraspFailed) => "grasp_failed",
            Termination::Executed(Outcome::Deviated) => "deviated",
            Termination::Executed(Outcome::Diverged) => "diverged",
            Termination::PlanningFailed(_) => "planning_failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Repetition {
    pub index: usize,
    pub start: Option<Pose>,
    pub delta_g: Option<f64>,
    pub timings: StageTimings,
    pub termination: Termination,
    pub execution: Option<Execution>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub seed: u64,
    pub success: bool,
    pub repetitions: Vec<Repetition>,
}

impl TrialReport {
    pub fn repetitions_used(&self) -> usize {
        self.repetitions.len()
    }
}

fn attempt(
    true_scene: &Scene,
    gripper: &GripperModel,
    planner: &PlannerConfig,
    config: &ExecutiveConfig,
    rng: &mut ChaCha8Rng,
    clock: &dyn Clock,
    index: usize,
) -> Repetition {
    let seen = perceive(true_scene, &config.noise, rng);
    let planner_seen = PlannerConfig {
        impedance: perceive_impedance(&planner.impedance, &config.noise, rng),
        ..*planner
    };
    let mut rep = Repetition {
        index,
        start: None,
        delta_g: None,
        timings: StageTimings::default(),
        termination: Termination::PlanningFailed(String::new()),
        execution: None,
    };
    let start = match sample_pregrasp(
        &seen,
        gripper,
        &seen.grasp_pose_world(),
        config,
        planner.refine.margin,
        rng,
    ) {
        Ok(s) => s,
        Err(e) => {
            rep.termination = Termination::PlanningFailed(e.to_string());
            return rep;
        }
    };
    rep.start = Some(start);
    let p = match plan(&seen, gripper, &start, &planner_seen, clock) {
        Ok(p) => p,
        Err(e) => {
            rep.termination = Termination::PlanningFailed(e.to_string());
            return rep;
        }
    };
    rep.delta_g = Some(p.positional.delta_g);
    rep.timings = p.timings;
    // the robot runs its own impedance law, not the planner's belief of contact stiffness
    let controls = ControlSequence {
        equilibria: p.controls().equilibria.clone(),
        impedance: planner.impedance,
    };
    match execute_in_sim(
        true_scene,
        gripper,
        &controls,
        p.path(),
        &TaskState::at_rest(start),
        config,
        false,
    ) {
        Ok(ex) => {
            rep.termination = Termination::Executed(ex.outcome);
            rep.execution = Some(ex);
        }
        Err(e) => rep.termination = Termination::PlanningFailed(e.to_string()),
    }
    rep
}

/// Observe, sample, plan and execute until success or `max_repetitions`.
pub fn run_repetitions(
    true_scene: &Scene,
    gripper: &GripperModel,
    planner: &PlannerConfig,
    config: &ExecutiveConfig,
    clock: &dyn Clock,
) -> Result<TrialReport> {
    config.validate()?;
    planner.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut repetitions = Vec::new();
    for k in 0..config.max_repetitions {
        let rep = attempt(true_scene, gripper, planner, config, &mut rng, clock, k + 1);
        let done = rep.termination.is_success();
        repetitions.push(rep);
        if done {
            break;
        }
    }
    Ok(TrialReport {
        seed: config.seed,
        success: repetitions
            .last()
            .is_some_and(|r| r.termination.is_success()),
        repetitions,
    })
}
