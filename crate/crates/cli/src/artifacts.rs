//! JSON artifacts written by `plan` and read back by `simulate`.

use contact_grasp_core::dynamics::ImpedanceParams;
use contact_grasp_core::executive::{Plan, StageTimings};
use contact_grasp_core::refine::GeometricPath;
use contact_grasp_core::synthesis::ControlSequence;
use contact_grasp_core::Pose;
use serde::{Deserialize, Serialize};

use crate::scene_file::{PoseDto, SceneFileError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    pub positional: Vec<[f64; 3]>,
    pub delta_g: f64,
    pub relaxations: usize,
    pub voxels_expanded: usize,
    pub phi_squared: Vec<f64>,
    pub waypoints: Vec<PoseDto>,
    pub refine_objective: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsFile {
    pub start: PoseDto,
    pub equilibria: Vec<PoseDto>,
    /// Geometric path the controls were synthesized for.
    pub planned: Vec<PoseDto>,
    pub impedance: ImpedanceParams,
    pub synthesis_objective: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingsFile {
    pub search: f64,
    pub refine: f64,
    pub synthesis: f64,
    pub total: f64,
}

impl From<&StageTimings> for TimingsFile {
    fn from(t: &StageTimings) -> Self {
        Self {
            search: t.search,
            refine: t.refine,
            synthesis: t.synthesis,
            total: t.total(),
        }
    }
}

fn poses(ps: &[Pose]) -> Vec<PoseDto> {
    ps.iter().map(PoseDto::from).collect()
}

fn to_poses(ps: &[PoseDto]) -> Result<Vec<Pose>, SceneFileError> {
    ps.iter().map(PoseDto::to_pose).collect()
}

impl PathFile {
    pub fn new(plan: &Plan) -> Self {
        let pp = &plan.positional;
        Self {
            positional: pp.points.iter().map(|p| (*p).into()).collect(),
            delta_g: pp.delta_g,
            relaxations: pp.relaxations,
            voxels_expanded: pp.voxel_path.expanded,
            phi_squared: pp.phi_squared.clone(),
            waypoints: poses(&plan.path().waypoints),
            refine_objective: plan.refinement.objective_trace.clone(),
        }
    }
}

impl ControlsFile {
    pub fn new(plan: &Plan) -> Self {
        Self {
            start: PoseDto::from(&plan.start),
            equilibria: poses(&plan.controls().equilibria),
            planned: poses(&plan.path().waypoints),
            impedance: plan.controls().impedance,
            synthesis_objective: plan.synthesis.objective_trace.clone(),
        }
    }

    pub fn controls(&self) -> Result<(Pose, ControlSequence, GeometricPath), SceneFileError> {
        let controls = ControlSequence {
            equilibria: to_poses(&self.equilibria)?,
            impedance: self.impedance,
        };
        let planned = GeometricPath {
            waypoints: to_poses(&self.planned)?,
        };
        Ok((self.start.to_pose()?, controls, planned))
    }
}
