//! Collision-inclusive grasp planning for occluded targets.
//!
//! The pipeline works in four stages over a scene of rigid objects described by
//! signed distance fields:
//!
//! 1. [`search`] finds a fingertip path on a voxel grid that hugs object surfaces
//!    while bounding how far it may sink into them, relaxing that bound until a
//!    path exists.
//! 2. [`refine`] lifts the fingertip path to full gripper poses by minimizing a
//!    margin-based collision cost over sparse gripper volume points.
//! 3. [`synthesis`] finds impedance-controller equilibrium poses whose predicted
//!    compliant motion ([`dynamics`]) follows the refined path.
//! 4. [`executive`] repeats observe / plan / execute against a quasi-static
//!    simulator until the grasp pose is reached.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod executive;
pub mod gripper;
pub mod math;
pub mod refine;
pub mod scene;
pub mod sdf;
pub mod se3;
pub mod search;
pub mod synthesis;

pub use error::{Error, Result};
pub use se3::{Pose, Twist, Vec3, Vec6};
