//! Trial reports and the aggregate table.
//!
//! Reports hold only seed-determined content so that repeated runs are
//! byte-identical; wall-clock timings are written to a separate file.

use contact_grasp_core::executive::{Termination, TrialReport};
use contact_grasp_core::se3::pose_error;
use contact_grasp_core::Pose;
use serde::{Deserialize, Serialize};

use crate::scene_file::PoseDto;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepetitionDto {
    pub index: usize,
    pub termination: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<PoseDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_g: Option<f64>,
    pub steps_completed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_pose: Option<PoseDto>,
    /// Final pose error against the true grasp pose.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_error: Option<[f64; 6]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialReportDto {
    pub scene: String,
    pub seed: u64,
    pub success: bool,
    pub repetitions_used: usize,
    pub repetitions: Vec<RepetitionDto>,
}

impl TrialReportDto {
    pub fn new(scene: &str, report: &TrialReport, grasp: &Pose) -> Self {
        let repetitions = report
            .repetitions
            .iter()
            .map(|r| {
                let detail = match &r.termination {
                    Termination::PlanningFailed(msg) => Some(msg.clone()),
                    Termination::Executed(_) => None,
                };
                let fin = r.execution.as_ref().map(|e| e.final_state.pose);
                RepetitionDto {
                    index: r.index,
                    termination: r.termination.label().into(),
                    detail,
                    start: r.start.as_ref().map(PoseDto::from),
                    delta_g: r.delta_g,
                    steps_completed: r.execution.as_ref().map_or(0, |e| e.steps_completed),
                    final_pose: fin.as_ref().map(PoseDto::from),
                    final_error: fin.map(|p| pose_error(&p, grasp).into()),
                }
            })
            .collect();
        Self {
            scene: scene.into(),
            seed: report.seed,
            success: report.success,
            repetitions_used: report.repetitions_used(),
            repetitions,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionTimings {
    pub index: usize,
    pub search: f64,
    pub refine: f64,
    pub synthesis: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialTimings {
    pub seed: u64,
    pub repetitions: Vec<RepetitionTimings>,
}

impl TrialTimings {
    pub fn new(report: &TrialReport) -> Self {
        Self {
            seed: report.seed,
            repetitions: report
                .repetitions
                .iter()
                .map(|r| RepetitionTimings {
                    index: r.index,
                    search: r.timings.search,
                    refine: r.timings.refine,
                    synthesis: r.timings.synthesis,
                    total: r.timings.total(),
                })
                .collect(),
        }
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregate over trials: success count, repetitions and per-stage solve times.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub trials: usize,
    pub successes: usize,
    pub reps_mean: f64,
    pub reps_std: f64,
    pub search: f64,
    pub refine: f64,
    pub synthesis: f64,
    pub total_mean: f64,
    pub total_std: f64,
}

impl Aggregate {
    pub fn new(reports: &[TrialReportDto], timings: &[TrialTimings]) -> Self {
        let reps: Vec<f64> = reports.iter().map(|r| r.repetitions_used as f64).collect();
        let (reps_mean, reps_std) = mean_std(&reps);
        let all: Vec<&RepetitionTimings> = timings.iter().flat_map(|t| &t.repetitions).collect();
        let col = |f: fn(&RepetitionTimings) -> f64| {
            mean_std(&all.iter().map(|r| f(r)).collect::<Vec<_>>()).0
        };
        let (total_mean, total_std) = mean_std(&all.iter().map(|r| r.total).collect::<Vec<_>>());
        Self {
            trials: reports.len(),
            successes: reports.iter().filter(|r| r.success).count(),
            reps_mean,
            reps_std,
            search: col(|r| r.search),
            refine: col(|r| r.refine),
            synthesis: col(|r| r.synthesis),
            total_mean,
            total_std,
        }
    }

    pub fn table(&self, scene: &str) -> String {
        format!(
            "scene: {scene}\n{:<10} {:<14} {:>8} {:>10} {:>8} {:>16}\n{:<10} {:<14} {:>8.3} {:>10.3} {:>8.3} {:>16}\n",
            "Success",
            "Reps",
            "A* (s)",
            "Refine (s)",
            "Impd (s)",
            "Total (s)",
            format!("{}/{}", self.successes, self.trials),
            format!("{:.2} ± {:.2}", self.reps_mean, self.reps_std),
            self.search,
            self.refine,
            self.synthesis,
            format!("{:.3} ± {:.3}", self.total_mean, self.total_std),
        )
    }
}
