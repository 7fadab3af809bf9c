//! Primitive shapes, their exact signed distances, and baked voxel grids.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::se3::{Pose, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrimitiveKind {
    Sphere {
        radius: f64,
    },
    Box {
        half_extents: Vec3,
    },
    /// Axis along local z.
    Cylinder {
        radius: f64,
        half_height: f64,
    },
    /// Solid where `normal · p < offset`.
    HalfSpace {
        normal: Vec3,
        offset: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub kind: PrimitiveKind,
    pub local_pose: Pose,
}

impl Primitive {
    pub fn new(kind: PrimitiveKind, local_pose: Pose) -> Result<Self> {
        match kind {
            PrimitiveKind::Sphere { radius } if !(radius > 0.0) => {
                return Err(Error::invalid("sphere radius", "must be positive"))
            }
            PrimitiveKind::Box { half_extents } if !half_extents.iter().all(|&h| h > 0.0) => {
                return Err(Error::invalid("box half extents", "must be positive"))
            }
            PrimitiveKind::Cylinder {
                radius,
                half_height,
            } if !(radius > 0.0 && half_height > 0.0) => {
                return Err(Error::invalid("cylinder dimensions", "must be positive"))
            }
            PrimitiveKind::HalfSpace { normal, .. } if (normal.norm() - 1.0).abs() > 1e-9 => {
                return Err(Error::invalid("half-space normal", "must be unit length"))
            }
            _ => {}
        }
        Ok(Self { kind, local_pose })
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::new(PrimitiveKind::Sphere { radius }, Pose::identity())
    }

    pub fn cuboid(half_extents: Vec3) -> Result<Self> {
        Self::new(PrimitiveKind::Box { half_extents }, Pose::identity())
    }

    pub fn cylinder(radius: f64, half_height: f64) -> Result<Self> {
        Self::new(
            PrimitiveKind::Cylinder {
                radius,
                half_height,
            },
            Pose::identity(),
        )
    }

    pub fn half_space(normal: Vec3, offset: f64) -> Result<Self> {
        Self::new(
            PrimitiveKind::HalfSpace { normal, offset },
            Pose::identity(),
        )
    }

    pub fn at(mut self, pose: Pose) -> Self {
        self.local_pose = pose;
        self
    }

    /// Signed distance of a point given in the shape's frame.
    pub fn distance(&self, p: &Vec3) -> f64 {
        let q = if self.local_pose == Pose::identity() {
            *p
        } else {
            self.local_pose.inverse().transform_point(p)
        };
        primitive_distance(&self.kind, &q)
    }

    /// Axis-aligned bounds in the shape frame, `None` for unbounded primitives.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let half = match self.kind {
            PrimitiveKind::Sphere { radius } => Vec3::repeat(radius),
            PrimitiveKind::Box { half_extents } => half_extents,
            PrimitiveKind::Cylinder {
                radius,
                half_height,
            } => Vec3::new(radius, radius, half_height),
            PrimitiveKind::HalfSpace { .. } => return None,
        };
        let r = self.local_pose.rotation.matrix();
        // |R|·h bounds the rotated box (exact for boxes, conservative otherwise)
        let abs = r.abs();
        let ext = abs * half;
        let c = self.local_pose.position;
        Some((c - ext, c + ext))
    }
}

fn primitive_distance(kind: &PrimitiveKind, p: &Vec3) -> f64 {
    match *kind {
        PrimitiveKind::Sphere { radius } => p.norm() - radius,
        PrimitiveKind::Box { half_extents } => {
            let q = p.abs() - half_extents;
            let outside = q.map(|v| v.max(0.0)).norm();
            let inside = q.x.max(q.y).max(q.z).min(0.0);
            outside + inside
        }
        PrimitiveKind::Cylinder {
            radius,
            half_height,
        } => {
            let radial = math::sqrt(p.x * p.x + p.y * p.y) - radius;
            let axial = p.z.abs() - half_height;
            let outside = {
                let (r, a) = (radial.max(0.0), axial.max(0.0));
                math::sqrt(r * r + a * a)
            };
            outside + radial.max(axial).min(0.0)
        }
        PrimitiveKind::HalfSpace { normal, offset } => normal.dot(p) - offset,
    }
}

/// A union of primitives.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Shape {
    pub members: Vec<Primitive>,
}

impl Shape {
    pub fn new(members: Vec<Primitive>) -> Self {
        Self { members }
    }

    pub fn single(member: Primitive) -> Self {
        Self {
            members: alloc::vec![member],
        }
    }

    /// Minimum over members: exact outside the union, a lower bound in overlaps.
    pub fn distance(&self, p: &Vec3) -> f64 {
        self.members
            .iter()
            .map(|m| m.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for m in &self.members {
            let (a, b) = m.bounds()?;
            lo = lo.inf(&a);
            hi = hi.sup(&b);
        }
        if self.members.is_empty() {
            return None;
        }
        Some((lo, hi))
    }
}

#[inline]
pub fn analytic_sdf(shape: &Shape, p_local: &Vec3) -> f64 {
    shape.distance(p_local)
}

/// A regular grid of signed distance samples.
///
/// Node `(i, j, k)` sits at `origin + Δ·(i, j, k)`; values are stored with `i`
/// varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SdfGrid {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    values: Vec<f32>,
}

impl SdfGrid {
    pub fn new(origin: Vec3, resolution: f64, dims: [usize; 3], values: Vec<f32>) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::invalid("grid resolution", "must be positive"));
        }
        if dims.contains(&0) {
            return Err(Error::invalid("grid dims", "must be positive"));
        }
        let n = dims[0] * dims[1] * dims[2];
        if values.len() != n {
            return Err(Error::invalid(
                "grid values",
                alloc::format!("expected {n} values, got {}", values.len()),
            ));
        }
        Ok(Self {
            origin,
            resolution,
            dims,
            values,
        })
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn node_value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)] as f64
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.resolution
    }

    /// Upper corner of the sampled box.
    pub fn max_corner(&self) -> Vec3 {
        self.node_position(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1)
    }

    /// Trilinear interpolation inside the grid. Outside, the value at the
    /// clamped boundary point plus the distance to it.
    pub fn query(&self, p: &Vec3) -> f64 {
        let lo = self.origin;
        let hi = self.max_corner();
        let clamped = Vec3::new(
            p.x.clamp(lo.x, hi.x),
            p.y.clamp(lo.y, hi.y),
            p.z.clamp(lo.z, hi.z),
        );
        let inside = self.interpolate(&clamped);
        let gap = (p - clamped).norm();
        inside + gap
    }

    fn interpolate(&self, p: &Vec3) -> f64 {
        let u = (p - self.origin) / self.resolution;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let n = self.dims[a];
            if n == 1 {
                base[a] = 0;
                frac[a] = 0.0;
                continue;
            }
            let f = math::floor(u[a]).clamp(0.0, (n - 2) as f64);
            base[a] = f as usize;
            frac[a] = (u[a] - f).clamp(0.0, 1.0);
        }
        let step = |a: usize| usize::from(self.dims[a] > 1);
        let (i0, j0, k0) = (base[0], base[1], base[2]);
        let (i1, j1, k1) = (i0 + step(0), j0 + step(1), k0 + step(2));
        let (fx, fy, fz) = (frac[0], frac[1], frac[2]);
        let v = |i, j, k| self.node_value(i, j, k);
        let c00 = v(i0, j0, k0) * (1.0 - fx) + v(i1, j0, k0) * fx;
        let c10 = v(i0, j1, k0) * (1.0 - fx) + v(i1, j1, k0) * fx;
        let c01 = v(i0, j0, k1) * (1.0 - fx) + v(i1, j0, k1) * fx;
        let c11 = v(i0, j1, k1) * (1.0 - fx) + v(i1, j1, k1) * fx;
        let c0 = c00 * (1.0 - fy) + c10 * fy;
        let c1 = c01 * (1.0 - fy) + c11 * fy;
        c0 * (1.0 - fz) + c1 * fz
    }
}

/// Samples `shape` on a grid of spacing `resolution` covering its bounds plus `padding`.
///
/// The grid is centered on the bounding box; each axis gets
/// `ceil(extent / Δ) + 1` nodes.
pub fn bake_grid(shape: &Shape, resolution: f64, padding: f64) -> Result<SdfGrid> {
    if !(resolution > 0.0) {
        return Err(Error::invalid("bake resolution", "must be positive"));
    }
    if !(padding >= 0.0) {
        return Err(Error::invalid("bake padding", "must be non-negative"));
    }
    let (lo, hi) = shape.bounds().ok_or(Error::UnboundedShape)?;
    let lo = lo - Vec3::repeat(padding);
    let hi = hi + Vec3::repeat(padding);
    let center = (lo + hi) * 0.5;
    let mut dims = [1usize; 3];
    let mut origin = Vec3::zeros();
    for a in 0..3 {
        let extent = hi[a] - lo[a];
        let cells = math::ceil(extent / resolution - 1e-9).max(0.0) as usize;
        dims[a] = cells + 1;
        origin[a] = center[a] - 0.5 * cells as f64 * resolution;
    }
    let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let p = origin + Vec3::new(i as f64, j as f64, k as f64) * resolution;
                values.push(shape.distance(&p) as f32);
            }
        }
    }
    SdfGrid::new(origin, resolution, dims, values)
}
