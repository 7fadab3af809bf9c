//! Contact-seeking fingertip path search on a voxel grid.
//!
//! Voxels whose signed distance is below `-δ_g` are blocked. Moving onto a
//! voxel `p'` from `p` costs `w·φ(p')² + ‖p − p'‖²`, so paths are drawn onto
//! object surfaces while the squared step length keeps them short. When no
//! path exists, [`find_positional_path`] relaxes `δ_g` in fixed increments.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::math;
use crate::scene::Scene;
use crate::se3::{resample_positions, Vec3};

// Absorbs rounding in φ at voxel centers lying exactly on a surface.
const FREE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HeuristicMode {
    /// `h(p) = ‖p − p_goal‖²`.
    #[default]
    SquaredDistance,
    /// Plain uniform-cost search.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AStarParams {
    pub workspace: Aabb,
    pub resolution: f64,
    /// Surface-attraction weight; `None` means `1/Δ²`.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub weight: Option<f64>,
    pub delta_g_init: f64,
    pub delta_g_step: f64,
    pub delta_g_cap: f64,
    pub heuristic: HeuristicMode,
    pub waypoints: usize,
    /// Start/goal snapping radius in voxels.
    pub snap_radius: usize,
}

impl Default for AStarParams {
    fn default() -> Self {
        Self {
            workspace: Aabb::new(Vec3::repeat(-0.3), Vec3::repeat(0.3)),
            resolution: 0.01,
            weight: None,
            delta_g_init: 0.0,
            delta_g_step: 0.001,
            delta_g_cap: 0.02,
            heuristic: HeuristicMode::SquaredDistance,
            waypoints: 20,
            snap_radius: 3,
        }
    }
}

impl AStarParams {
    pub fn weight(&self) -> f64 {
        self.weight
            .unwrap_or(1.0 / (self.resolution * self.resolution))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0) {
            return Err(Error::invalid("search resolution", "must be positive"));
        }
        if !(self.weight() > 0.0) {
            return Err(Error::invalid("search weight", "must be positive"));
        }
        if !(self.delta_g_step > 0.0) {
            return Err(Error::invalid("delta_g_step", "must be positive"));
        }
        if self.waypoints < 2 {
            return Err(Error::invalid("waypoints", "must be at least 2"));
        }
        if !(0..3).all(|a| self.workspace.max[a] >= self.workspace.min[a]) {
            return Err(Error::invalid("workspace", "max must not be below min"));
        }
        Ok(())
    }
}

/// Signed distances precomputed at every voxel center of the workspace.
#[derive(Clone, Debug)]
pub struct VoxelField {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    phi: Vec<f64>,
}

impl VoxelField {
    pub fn new(scene: &Scene, workspace: &Aabb, resolution: f64) -> Self {
        let mut dims = [1usize; 3];
        for (a, d) in dims.iter_mut().enumerate() {
            let extent = workspace.max[a] - workspace.min[a];
            *d = math::floor(extent / resolution + 1e-9) as usize + 1;
        }
        let origin = workspace.min;
        let mut phi = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let p = origin + Vec3::new(i as f64, j as f64, k as f64) * resolution;
                    phi.push(scene.phi_env(&p));
                }
            }
        }
        Self {
            origin,
            resolution,
            dims,
            phi,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    #[inline]
    pub fn center(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.coords(idx);
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.resolution
    }

    #[inline]
    pub fn phi(&self, idx: usize) -> f64 {
        self.phi[idx]
    }

    #[inline]
    pub fn is_free(&self, idx: usize, delta_g: f64) -> bool {
        self.phi[idx] >= -delta_g - FREE_TOLERANCE
    }

    /// Nearest free voxel center within `radius` voxels of `p`.
    pub fn snap(&self, p: &Vec3, delta_g: f64, radius: usize) -> Option<usize> {
        let mut base = [0i64; 3];
        for (a, b) in base.iter_mut().enumerate() {
            let u = math::round((p[a] - self.origin[a]) / self.resolution);
            *b = (u as i64).clamp(0, self.dims[a] as i64 - 1);
        }
        let r = radius as i64;
        let limit = radius as f64 * self.resolution + 1e-12;
        let mut best: Option<(f64, usize)> = None;
        for dk in -r..=r {
            for dj in -r..=r {
                for di in -r..=r {
                    let c = [base[0] + di, base[1] + dj, base[2] + dk];
                    if (0..3).any(|a| c[a] < 0 || c[a] >= self.dims[a] as i64) {
                        continue;
                    }
                    let idx = self.index(c[0] as usize, c[1] as usize, c[2] as usize);
                    if !self.is_free(idx, delta_g) {
                        continue;
                    }
                    let d = (self.center(idx) - p).norm();
                    if d > limit {
                        continue;
                    }
                    if best.is_none_or(|(bd, bi)| d < bd || (d == bd && idx < bi)) {
                        best = Some((d, idx));
                    }
                }
            }
        }
        best.map(|(_, idx)| idx)
    }

    /// The 26-connected neighbors of `idx` with their squared step lengths.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let [i, j, k] = self.coords(idx);
        let h2 = self.resolution * self.resolution;
        let dims = self.dims;
        (0..27).filter_map(move |n| {
            if n == 13 {
                return None;
            }
            let d = [
                (n % 3) as i64 - 1,
                ((n / 3) % 3) as i64 - 1,
                (n / 9) as i64 - 1,
            ];
            let c = [i as i64 + d[0], j as i64 + d[1], k as i64 + d[2]];
            if (0..3).any(|a| c[a] < 0 || c[a] >= dims[a] as i64) {
                return None;
            }
            let steps = d.iter().filter(|&&v| v != 0).count() as f64;
            Some((
                self.index(c[0] as usize, c[1] as usize, c[2] as usize),
                steps * h2,
            ))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoxelPath {
    pub voxels: Vec<Vec3>,
    /// Voxel-graph indices along the path.
    pub indices: Vec<usize>,
    pub cost: f64,
    pub expanded: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, ties broken toward larger g then lower index
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Edge cost from any voxel onto `to`.
#[inline]
pub fn edge_cost(field: &VoxelField, to: usize, step_sq: f64, weight: f64) -> f64 {
    let phi = field.phi(to);
    weight * phi * phi + step_sq
}

/// A* over the voxel field with blocked set `φ < −δ_g`.
pub fn astar_on_field(
    field: &VoxelField,
    start: &Vec3,
    goal: &Vec3,
    delta_g: f64,
    params: &AStarParams,
) -> Option<VoxelPath> {
    let s = field.snap(start, delta_g, params.snap_radius)?;
    let t = field.snap(goal, delta_g, params.snap_radius)?;
    let goal_center = field.center(t);
    let weight = params.weight();
    let heuristic = |idx: usize| match params.heuristic {
        HeuristicMode::SquaredDistance => (field.center(idx) - goal_center).norm_squared(),
        HeuristicMode::Zero => 0.0,
    };

    let n = field.len();
    let mut g = alloc::vec![f64::INFINITY; n];
    let mut parent = alloc::vec![usize::MAX; n];
    let mut closed = alloc::vec![false; n];
    let mut open = BinaryHeap::new();
    g[s] = 0.0;
    open.push(Frontier {
        f: heuristic(s),
        g: 0.0,
        idx: s,
    });
    let mut expanded = 0usize;
    while let Some(Frontier { g: gc, idx, .. }) = open.pop() {
        if closed[idx] || gc > g[idx] {
            continue;
        }
        closed[idx] = true;
        expanded += 1;
        if idx == t {
            let mut indices = alloc::vec![t];
            let mut cur = t;
            while cur != s {
                cur = parent[cur];
                indices.push(cur);
            }
            indices.reverse();
            return Some(VoxelPath {
                voxels: indices.iter().map(|&i| field.center(i)).collect(),
                indices,
                cost: g[t],
                expanded,
            });
        }
        for (nb, step_sq) in field.neighbors(idx) {
            if closed[nb] || !field.is_free(nb, delta_g) {
                continue;
            }
            let cand = gc + edge_cost(field, nb, step_sq, weight);
            if cand < g[nb] {
                g[nb] = cand;
                parent[nb] = idx;
                open.push(Frontier {
                    f: cand + heuristic(nb),
                    g: cand,
                    idx: nb,
                });
            }
        }
    }
    None
}

/// Runs one A* search at a fixed penetration allowance `δ_g`.
pub fn astar_search(
    scene: &Scene,
    start: &Vec3,
    goal: &Vec3,
    delta_g: f64,
    params: &AStarParams,
) -> Option<VoxelPath> {
    let field = VoxelField::new(scene, &params.workspace, params.resolution);
    astar_on_field(&field, start, goal, delta_g, params)
}

/// Fingertip path with the search diagnostics that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionalPath {
    /// Exactly `waypoints` world-frame points.
    pub points: Vec<Vec3>,
    pub delta_g: f64,
    pub relaxations: usize,
    pub voxel_path: VoxelPath,
    /// `φ²` at each voxel on the raw path.
    pub phi_squared: Vec<f64>,
}

/// Iteratively relaxed search: `δ_g = init, init + step, …` up to the cap,
/// then resampled to the configured waypoint count.
pub fn find_positional_path(
    scene: &Scene,
    start: &Vec3,
    goal: &Vec3,
    params: &AStarParams,
) -> Result<PositionalPath> {
    params.validate()?;
    let field = VoxelField::new(scene, &params.workspace, params.resolution);
    let mut relaxations = 0usize;
    loop {
        let delta_g = params.delta_g_init + relaxations as f64 * params.delta_g_step;
        if delta_g > params.delta_g_cap + 1e-12 {
            let last = params.delta_g_init + (relaxations.max(1) - 1) as f64 * params.delta_g_step;
            return Err(Error::NoPathWithinCap { delta_g: last });
        }
        if let Some(path) = astar_on_field(&field, start, goal, delta_g, params) {
            let points = resample_positions(&path.voxels, params.waypoints);
            let phi_squared = path
                .indices
                .iter()
                .map(|&i| {
                    let v = field.phi(i);
                    v * v
                })
                .collect();
            return Ok(PositionalPath {
                points,
                delta_g,
                relaxations,
                voxel_path: path,
                phi_squared,
            });
        }
        relaxations += 1;
    }
}
