//! Scenes of posed rigid objects and world-frame distance queries.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sdf::{SdfGrid, Shape};
use crate::se3::{Pose, Vec3};

/// How an object's signed distance is evaluated in its body frame.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Analytic(Shape),
    Grid(SdfGrid),
}

impl Geometry {
    #[inline]
    pub fn distance(&self, p_local: &Vec3) -> f64 {
        match self {
            Geometry::Analytic(shape) => shape.distance(p_local),
            Geometry::Grid(grid) => grid.query(p_local),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneObject {
    pub name: String,
    pub geometry: Geometry,
    pub pose: Pose,
    /// Support surfaces and fixtures whose pose is known exactly (not perceived).
    pub fixed: bool,
    inverse_pose: Pose,
}

impl SceneObject {
    pub fn new(name: impl Into<String>, geometry: Geometry, pose: Pose) -> Self {
        Self {
            name: name.into(),
            geometry,
            pose,
            fixed: false,
            inverse_pose: pose.inverse(),
        }
    }

    pub fn fixed(mut self, fixed: bool) -> Self {
        self.fixed = fixed;
        self
    }

    pub fn set_pose(&mut self, pose: Pose) {
        self.pose = pose;
        self.inverse_pose = pose.inverse();
    }

    #[inline]
    pub fn distance(&self, p_world: &Vec3) -> f64 {
        self.geometry
            .distance(&self.inverse_pose.transform_point(p_world))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    objects: Vec<SceneObject>,
    target: usize,
    grasp_in_target: Pose,
}

impl Scene {
    pub fn new(objects: Vec<SceneObject>, target: usize, grasp_in_target: Pose) -> Result<Self> {
        if objects.is_empty() {
            return Err(Error::EmptyScene);
        }
        if target >= objects.len() {
            return Err(Error::ObjectIndex {
                index: target,
                count: objects.len(),
            });
        }
        if !objects.iter().all(|o| o.pose.is_finite()) || !grasp_in_target.is_finite() {
            return Err(Error::invalid("scene poses", "must be finite"));
        }
        Ok(Self {
            objects,
            target,
            grasp_in_target,
        })
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn grasp_in_target(&self) -> Pose {
        self.grasp_in_target
    }

    /// `X^g · X*`: the grasp pose of the task frame in the world.
    pub fn grasp_pose_world(&self) -> Pose {
        self.objects[self.target]
            .pose
            .compose(&self.grasp_in_target)
    }

    pub fn set_object_pose(&mut self, i: usize, pose: Pose) -> Result<()> {
        let count = self.objects.len();
        let obj = self
            .objects
            .get_mut(i)
            .ok_or(Error::ObjectIndex { index: i, count })?;
        obj.set_pose(pose);
        Ok(())
    }

    /// Signed distance to object `i`; panics on a bad index.
    #[inline]
    pub fn phi_object(&self, i: usize, p_world: &Vec3) -> f64 {
        self.objects[i].distance(p_world)
    }

    pub fn try_phi_object(&self, i: usize, p_world: &Vec3) -> Result<f64> {
        self.objects
            .get(i)
            .map(|o| o.distance(p_world))
            .ok_or(Error::ObjectIndex {
                index: i,
                count: self.objects.len(),
            })
    }

    /// Signed distance to the nearest object.
    #[inline]
    pub fn phi_env(&self, p_world: &Vec3) -> f64 {
        self.objects
            .iter()
            .map(|o| o.distance(p_world))
            .fold(f64::INFINITY, f64::min)
    }

    /// Central-difference gradient of [`Scene::phi_env`].
    pub fn phi_gradient(&self, p_world: &Vec3, h: f64) -> Vec3 {
        central_gradient(|q| self.phi_env(q), p_world, h)
    }

    /// Central-difference gradient of [`Scene::phi_object`].
    pub fn phi_object_gradient(&self, i: usize, p_world: &Vec3, h: f64) -> Vec3 {
        let obj = &self.objects[i];
        central_gradient(|q| obj.distance(q), p_world, h)
    }
}

pub(crate) fn central_gradient(f: impl Fn(&Vec3) -> f64, p: &Vec3, h: f64) -> Vec3 {
    let mut g = Vec3::zeros();
    for a in 0..3 {
        let mut hi = *p;
        let mut lo = *p;
        hi[a] += h;
        lo[a] -= h;
        g[a] = (f(&hi) - f(&lo)) / (2.0 * h);
    }
    g
}
