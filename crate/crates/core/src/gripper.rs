//! Parallel-jaw gripper geometry as sampled point sets in the task frame.
//!
//! The task frame sits at the center of the distal face of finger A. Fingers
//! extend along `+z` from the task frame, finger B is offset along `+y` by the
//! opening, and the palm sits on top of both fingers.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sdf::{Primitive, PrimitiveKind, Shape};
use crate::se3::{Pose, Vec3};

/// Parametric description of the gripper; `build` turns it into point sets.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GripperSpec {
    /// Full finger size (x, y, z) in meters.
    pub finger_size: [f64; 3],
    /// Full palm size (x, y, z) in meters; y spans the finger separation.
    pub palm_size: [f64; 3],
    pub max_opening: f64,
    pub n_surface: usize,
    pub n_volume: usize,
    pub seed: u64,
}

impl Default for GripperSpec {
    fn default() -> Self {
        Self::panda()
    }
}

impl GripperSpec {
    /// Franka-like proportions.
    pub fn panda() -> Self {
        Self {
            finger_size: [0.02, 0.02, 0.05],
            palm_size: [0.06, 0.08, 0.03],
            max_opening: 0.08,
            n_surface: 1000,
            n_volume: 50,
            seed: 7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub position: Vec3,
    /// Outward unit normal.
    pub normal: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GripperModel {
    spec: GripperSpec,
    opening: f64,
    shape: Shape,
    surface: Vec<SurfacePoint>,
    volume: Vec<Vec3>,
}

// Surface samples closer than this to another member are treated as interior seams.
const SEAM_CLEARANCE: f64 = 2e-4;

impl GripperModel {
    pub fn spec(&self) -> &GripperSpec {
        &self.spec
    }

    pub fn opening(&self) -> f64 {
        self.opening
    }

    pub fn max_opening(&self) -> f64 {
        self.spec.max_opening
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn surface_points(&self) -> &[SurfacePoint] {
        &self.surface
    }

    pub fn volume_points(&self) -> &[Vec3] {
        &self.volume
    }

    /// Same geometry with caller-supplied point sets.
    pub fn with_points(&self, surface: Vec<SurfacePoint>, volume: Vec<Vec3>) -> Self {
        Self {
            surface,
            volume,
            ..self.clone()
        }
    }

    /// Rebuilds the point sets at a new finger separation.
    pub fn set_opening(&self, opening: f64) -> Result<Self> {
        if opening == self.opening {
            return Ok(self.clone());
        }
        build_parallel_jaw(&self.spec, opening)
    }

    /// Exposed surface area of the union (sum over members minus the seams they share).
    pub fn surface_area(&self) -> f64 {
        let [fx, fy, fz] = self.spec.finger_size;
        let [px, py, pz] = self.spec.palm_size;
        let finger = 2.0 * (fx * fy + fy * fz + fx * fz);
        let palm = 2.0 * (px * py + py * pz + px * pz);
        // each finger's top face touches the palm's bottom face
        2.0 * finger + palm - 4.0 * fx.min(px) * fy
    }
}

fn box_member(size: [f64; 3], center: Vec3) -> Result<Primitive> {
    let half = Vec3::new(size[0], size[1], size[2]) * 0.5;
    Primitive::cuboid(half).map(|p| p.at(Pose::from_translation(center)))
}

fn gripper_shape(spec: &GripperSpec, opening: f64) -> Result<Shape> {
    let [_, fy, fz] = spec.finger_size;
    let [_, _, pz] = spec.palm_size;
    let finger_a = box_member(spec.finger_size, Vec3::new(0.0, 0.0, 0.5 * fz))?;
    let finger_b = box_member(spec.finger_size, Vec3::new(0.0, fy + opening, 0.5 * fz))?;
    let palm = box_member(
        spec.palm_size,
        Vec3::new(0.0, 0.5 * (fy + opening), fz + 0.5 * pz),
    )?;
    Ok(Shape::new(alloc::vec![finger_a, finger_b, palm]))
}

fn validate(spec: &GripperSpec, opening: f64) -> Result<()> {
    if spec.n_surface < 1 {
        return Err(Error::invalid("n_surface", "must be at least 1"));
    }
    if !spec
        .finger_size
        .iter()
        .chain(spec.palm_size.iter())
        .all(|&v| v > 0.0)
    {
        return Err(Error::invalid("gripper dimensions", "must be positive"));
    }
    if !(opening >= 0.0) {
        return Err(Error::invalid("opening", "must be non-negative"));
    }
    if opening > spec.max_opening {
        return Err(Error::OpeningExceedsLimit {
            opening,
            max_opening: spec.max_opening,
        });
    }
    Ok(())
}

struct BoxFace {
    member: usize,
    center: Vec3,
    normal: Vec3,
    // in-plane half extents along two axes
    u: Vec3,
    v: Vec3,
    area: f64,
}

fn box_faces(shape: &Shape) -> Vec<BoxFace> {
    let mut faces = Vec::new();
    for (m, prim) in shape.members.iter().enumerate() {
        let PrimitiveKind::Box { half_extents: h } = prim.kind else {
            continue;
        };
        let c = prim.local_pose.position;
        let rot = prim.local_pose.rotation;
        for axis in 0..3 {
            let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
            for sign in [-1.0, 1.0] {
                let mut n = Vec3::zeros();
                n[axis] = sign;
                let mut u = Vec3::zeros();
                u[a1] = h[a1];
                let mut v = Vec3::zeros();
                v[a2] = h[a2];
                faces.push(BoxFace {
                    member: m,
                    center: c + rot * (n * h[axis]),
                    normal: rot * n,
                    u: rot * u,
                    v: rot * v,
                    area: 4.0 * h[a1] * h[a2],
                });
            }
        }
    }
    faces
}

fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

/// Builds the three-box gripper and samples its surface and volume points.
///
/// Surface points are area-uniform over the exposed union surface, volume
/// points are volume-uniform over the union. Identical spec and opening give
/// bit-identical point sets.
pub fn build_parallel_jaw(spec: &GripperSpec, opening: f64) -> Result<GripperModel> {
    validate(spec, opening)?;
    let shape = gripper_shape(spec, opening)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let faces = box_faces(&shape);
    let areas: Vec<f64> = faces.iter().map(|f| f.area).collect();
    let mut surface = Vec::with_capacity(spec.n_surface);
    while surface.len() < spec.n_surface {
        let face = &faces[pick_weighted(&mut rng, &areas)];
        let s: f64 = rng.random_range(-1.0..1.0);
        let t: f64 = rng.random_range(-1.0..1.0);
        let p = face.center + face.u * s + face.v * t;
        let covered = shape
            .members
            .iter()
            .enumerate()
            .any(|(m, other)| m != face.member && other.distance(&p) <= SEAM_CLEARANCE);
        if covered {
            continue;
        }
        surface.push(SurfacePoint {
            position: p,
            normal: face.normal,
        });
    }

    let volumes: Vec<f64> = shape
        .members
        .iter()
        .map(|m| match m.kind {
            PrimitiveKind::Box { half_extents: h } => 8.0 * h.x * h.y * h.z,
            _ => 0.0,
        })
        .collect();
    let mut volume = Vec::with_capacity(spec.n_volume);
    while volume.len() < spec.n_volume {
        let m = pick_weighted(&mut rng, &volumes);
        let prim = &shape.members[m];
        let PrimitiveKind::Box { half_extents: h } = prim.kind else {
            unreachable!("gripper members are boxes");
        };
        let local = Vec3::new(
            rng.random_range(-h.x..h.x),
            rng.random_range(-h.y..h.y),
            rng.random_range(-h.z..h.z),
        );
        let p = prim.local_pose.transform_point(&local);
        // overlap regions belong to the lowest-index member only
        if shape.members[..m].iter().any(|o| o.distance(&p) < 0.0) {
            continue;
        }
        volume.push(p);
    }

    Ok(GripperModel {
        spec: *spec,
        opening,
        shape,
        surface,
        volume,
    })
}
