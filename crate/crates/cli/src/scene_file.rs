//! TOML scene files: objects, grasp, gripper and every planner parameter.

use std::fs;
use std::path::{Path, PathBuf};

use contact_grasp_core::executive::{ExecutiveConfig, PlannerConfig};
use contact_grasp_core::gripper::{build_parallel_jaw, GripperModel, GripperSpec};
use contact_grasp_core::scene::{Geometry, Scene, SceneObject};
use contact_grasp_core::sdf::{bake_grid, Primitive, PrimitiveKind, Shape};
use contact_grasp_core::{Pose, Vec3};
use serde::{Deserialize, Serialize};

use crate::sdf_file;

/// Padding around baked objects, m.
pub const BAKE_PADDING: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum SceneFileError {
    #[error("cannot read {path}: {error}")]
    Io {
        path: PathBuf,
        error: std::io::Error,
    },
    #[error("{path}: {error}")]
    Parse {
        path: PathBuf,
        error: toml::de::Error,
    },
    #[error("cannot serialize scene: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("object `{object}`: {error}")]
    Sdf {
        object: String,
        error: sdf_file::SdfFileError,
    },
    #[error(transparent)]
    Core(#[from] contact_grasp_core::Error),
}

/// Position plus unit quaternion `[w, x, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDto {
    pub position: [f64; 3],
    pub quaternion: [f64; 4],
}

impl Default for PoseDto {
    fn default() -> Self {
        Self::from(&Pose::identity())
    }
}

impl From<&Pose> for PoseDto {
    fn from(p: &Pose) -> Self {
        Self {
            position: p.position.into(),
            quaternion: p.quaternion(),
        }
    }
}

impl PoseDto {
    pub fn to_pose(&self) -> Result<Pose, SceneFileError> {
        let q = self.quaternion;
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() || !self.position.iter().all(|v| v.is_finite()) {
            return Err(SceneFileError::Invalid(format!(
                "pose {self:?} is not finite or has a zero quaternion"
            )));
        }
        Ok(Pose::from_quaternion(Vec3::from(self.position), q))
    }
}

fn is_identity(p: &PoseDto) -> bool {
    *p == PoseDto::default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeDto {
    Sphere {
        radius: f64,
        #[serde(default, skip_serializing_if = "is_identity")]
        pose: PoseDto,
    },
    Box {
        half_extents: [f64; 3],
        #[serde(default, skip_serializing_if = "is_identity")]
        pose: PoseDto,
    },
    Cylinder {
        radius: f64,
        half_height: f64,
        #[serde(default, skip_serializing_if = "is_identity")]
        pose: PoseDto,
    },
    HalfSpace {
        normal: [f64; 3],
        offset: f64,
    },
}

impl ShapeDto {
    pub fn to_primitive(&self) -> Result<Primitive, SceneFileError> {
        let (kind, pose) = match self {
            ShapeDto::Sphere { radius, pose } => (PrimitiveKind::Sphere { radius: *radius }, *pose),
            ShapeDto::Box { half_extents, pose } => (
                PrimitiveKind::Box {
                    half_extents: Vec3::from(*half_extents),
                },
                *pose,
            ),
            ShapeDto::Cylinder {
                radius,
                half_height,
                pose,
            } => (
                PrimitiveKind::Cylinder {
                    radius: *radius,
                    half_height: *half_height,
                },
                *pose,
            ),
            ShapeDto::HalfSpace { normal, offset } => (
                PrimitiveKind::HalfSpace {
                    normal: Vec3::from(*normal),
                    offset: *offset,
                },
                PoseDto::default(),
            ),
        };
        Ok(Primitive::new(kind, pose.to_pose()?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDto {
    pub name: String,
    #[serde(default)]
    pub is_target: bool,
    #[serde(default)]
    pub fixed: bool,
    #[serde(default)]
    pub pose: PoseDto,
    /// Bake the shapes into a grid with this resolution, m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bake: Option<f64>,
    /// Binary SDF grid, relative to the scene file; replaces `shapes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdf_file: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shapes: Vec<ShapeDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GripperDto {
    #[serde(default = "default_gripper_preset")]
    pub preset: String,
    pub opening: f64,
}

fn default_gripper_preset() -> String {
    "panda".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub name: String,
    pub gripper: GripperDto,
    /// Grasp pose of the task frame in the target's body frame.
    pub grasp: PoseDto,
    /// Fixed start pose for `plan`; sampled when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<PoseDto>,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub executive: ExecutiveConfig,
    pub objects: Vec<ObjectDto>,
}

/// Fully validated in-memory configuration.
#[derive(Clone, Debug)]
pub struct LoadedScene {
    pub file: SceneFile,
    pub scene: Scene,
    pub gripper: GripperModel,
    pub planner: PlannerConfig,
    pub executive: ExecutiveConfig,
    pub start: Option<Pose>,
}

pub fn gripper_preset(name: &str) -> Option<GripperSpec> {
    match name {
        "panda" => Some(GripperSpec::panda()),
        _ => None,
    }
}

impl SceneFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, SceneFileError> {
        toml::from_str(text).map_err(|error| SceneFileError::Parse {
            path: origin.to_path_buf(),
            error,
        })
    }

    pub fn to_toml(&self) -> Result<String, SceneFileError> {
        Ok(toml::to_string(self)?)
    }

    pub fn target_index(&self) -> Result<usize, SceneFileError> {
        let targets: Vec<usize> = self
            .objects
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_target)
            .map(|(i, _)| i)
            .collect();
        match targets.as_slice() {
            [i] => Ok(*i),
            [] => Err(SceneFileError::Invalid(
                "no object has is_target = true".into(),
            )),
            _ => Err(SceneFileError::Invalid(format!(
                "{} objects have is_target = true; exactly one is required",
                targets.len()
            ))),
        }
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    /// Shape union of one object; grid-file objects have none.
    pub fn object_shape(&self, index: usize) -> Result<Shape, SceneFileError> {
        let obj = &self.objects[index];
        let members = obj
            .shapes
            .iter()
            .map(ShapeDto::to_primitive)
            .collect::<Result<Vec<_>, _>>()?;
        if members.is_empty() {
            return Err(SceneFileError::Invalid(format!(
                "object `{}` has no shapes",
                obj.name
            )));
        }
        Ok(Shape::new(members))
    }

    /// Builds the scene, gripper and parameters. `base` resolves `sdf_file` paths.
    pub fn load(&self, base: &Path) -> Result<LoadedScene, SceneFileError> {
        let target = self.target_index()?;
        let mut objects = Vec::with_capacity(self.objects.len());
        for (i, obj) in self.objects.iter().enumerate() {
            let geometry = match (&obj.sdf_file, obj.bake) {
                (Some(_), _) if !obj.shapes.is_empty() => {
                    return Err(SceneFileError::Invalid(format!(
                        "object `{}` sets both sdf_file and shapes",
                        obj.name
                    )))
                }
                (Some(file), _) => {
                    let grid = sdf_file::read_grid_file(&base.join(file)).map_err(|error| {
                        SceneFileError::Sdf {
                            object: obj.name.clone(),
                            error,
                        }
                    })?;
                    Geometry::Grid(grid)
                }
                (None, Some(res)) => {
                    Geometry::Grid(bake_grid(&self.object_shape(i)?, res, BAKE_PADDING)?)
                }
                (None, None) => Geometry::Analytic(self.object_shape(i)?),
            };
            objects.push(
                SceneObject::new(obj.name.clone(), geometry, obj.pose.to_pose()?).fixed(obj.fixed),
            );
        }
        let scene = Scene::new(objects, target, self.grasp.to_pose()?)?;
        let spec = gripper_preset(&self.gripper.preset).ok_or_else(|| {
            SceneFileError::Invalid(format!("unknown gripper preset `{}`", self.gripper.preset))
        })?;
        let gripper = build_parallel_jaw(&spec, self.gripper.opening)?;
        self.planner.validate()?;
        self.executive.validate()?;
        let start = self.start.as_ref().map(PoseDto::to_pose).transpose()?;
        Ok(LoadedScene {
            file: self.clone(),
            scene,
            gripper,
            planner: self.planner,
            executive: self.executive,
            start,
        })
    }
}

/// Reads and validates a scene file from disk.
pub fn load_scene(path: &Path) -> Result<LoadedScene, SceneFileError> {
    let text = fs::read_to_string(path).map_err(|error| SceneFileError::Io {
        path: path.to_path_buf(),
        error,
    })?;
    let file = SceneFile::parse(&text, path)?;
    file.load(path.parent().unwrap_or(Path::new(".")))
}
