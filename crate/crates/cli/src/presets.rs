//! Built-in scenes. The committed TOML files under `presets/` are generated
//! from these builders; a test keeps the two in sync.

use contact_grasp_core::executive::{ExecutiveConfig, PlannerConfig};
use contact_grasp_core::se3::Rot3;
use contact_grasp_core::search::Aabb;
use contact_grasp_core::{Pose, Vec3};

use crate::scene_file::{GripperDto, ObjectDto, PoseDto, SceneFile, ShapeDto};

pub const NAMES: [&str; 4] = ["book_on_table", "shelf_books", "single_object", "tray_pack"];

/// Committed preset text by name.
pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "book_on_table" => Some(include_str!("../presets/book_on_table.toml")),
        "shelf_books" => Some(include_str!("../presets/shelf_books.toml")),
        "single_object" => Some(include_str!("../presets/single_object.toml")),
        "tray_pack" => Some(include_str!("../presets/tray_pack.toml")),
        _ => None,
    }
}

pub fn build(name: &str) -> Option<SceneFile> {
    match name {
        "book_on_table" => Some(book_on_table()),
        "shelf_books" => Some(shelf_books()),
        "single_object" => Some(single_object()),
        "tray_pack" => Some(tray_pack()),
        _ => None,
    }
}

const BAKE: f64 = 0.005;

fn at(x: f64, y: f64, z: f64) -> PoseDto {
    PoseDto::from(&Pose::from_translation(Vec3::new(x, y, z)))
}

fn cuboid(hx: f64, hy: f64, hz: f64) -> ShapeDto {
    ShapeDto::Box {
        half_extents: [hx, hy, hz],
        pose: PoseDto::default(),
    }
}

fn table() -> ObjectDto {
    ObjectDto {
        name: "table".into(),
        is_target: false,
        fixed: true,
        pose: PoseDto::default(),
        bake: None,
        sdf_file: None,
        shapes: vec![ShapeDto::HalfSpace {
            normal: [0.0, 0.0, 1.0],
            offset: 0.0,
        }],
    }
}

fn block(name: &str, pose: PoseDto, half: [f64; 3], target: bool, fixed: bool) -> ObjectDto {
    ObjectDto {
        name: name.into(),
        is_target: target,
        fixed,
        pose,
        bake: (!fixed).then_some(BAKE),
        sdf_file: None,
        shapes: vec![cuboid(half[0], half[1], half[2])],
    }
}

fn planner(min: [f64; 3], max: [f64; 3]) -> PlannerConfig {
    let mut p = PlannerConfig::default();
    p.search.workspace = Aabb::new(Vec3::from(min), Vec3::from(max));
    p
}

// Fingertips down with the palm above, opening along +y.
fn top_down(position: Vec3) -> PoseDto {
    PoseDto::from(&Pose::from_translation(position))
}

/// A flat book on a table, pushed against a wall. Finger A scoops under the
/// book along the table surface.
pub fn book_on_table() -> SceneFile {
    let rotation =
        Rot3::from_matrix_unchecked(columns([0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, 0.0, 0.0]));
    SceneFile {
        name: "book_on_table".into(),
        gripper: GripperDto {
            preset: "panda".into(),
            opening: 0.034,
        },
        grasp: PoseDto::from(&Pose::new(Vec3::new(-0.07, 0.0, -0.015), rotation)),
        start: None,
        planner: planner([-0.25, -0.15, -0.05], [0.15, 0.15, 0.25]),
        executive: ExecutiveConfig::default(),
        objects: vec![
            table(),
            block("wall", at(0.11, 0.0, 0.08), [0.01, 0.15, 0.08], false, true),
            block(
                "book",
                at(0.0, 0.0, 0.015),
                [0.10, 0.075, 0.015],
                true,
                false,
            ),
        ],
    }
}

/// An upright book between two neighbours on a shelf; the right neighbour is
/// shorter, so only finger A enters a gap.
pub fn shelf_books() -> SceneFile {
    SceneFile {
        name: "shelf_books".into(),
        gripper: GripperDto {
            preset: "panda".into(),
            opening: 0.034,
        },
        grasp: top_down(Vec3::new(0.0, -0.027, 0.08)),
        start: None,
        planner: planner([-0.15, -0.15, -0.05], [0.15, 0.15, 0.40]),
        executive: ExecutiveConfig::default(),
        objects: vec![
            table(),
            block(
                "left",
                at(0.0, -0.03, 0.12),
                [0.10, 0.015, 0.12],
                false,
                false,
            ),
            block("book", at(0.0, 0.0, 0.12), [0.10, 0.015, 0.12], true, false),
            block(
                "right",
                at(0.0, 0.03, 0.08),
                [0.10, 0.015, 0.08],
                false,
                false,
            ),
        ],
    }
}

/// One box on a table with free access from above.
pub fn single_object() -> SceneFile {
    SceneFile {
        name: "single_object".into(),
        gripper: GripperDto {
            preset: "panda".into(),
            opening: 0.054,
        },
        grasp: top_down(Vec3::new(0.0, -0.037, 0.005)),
        start: None,
        planner: planner([-0.15, -0.15, -0.05], [0.15, 0.15, 0.30]),
        executive: ExecutiveConfig::default(),
        objects: vec![
            table(),
            block("box", at(0.0, 0.0, 0.05), [0.03, 0.025, 0.05], true, false),
        ],
    }
}

/// Three upright books packed in a tray; both fingers enter gaps.
pub fn tray_pack() -> SceneFile {
    SceneFile {
        name: "tray_pack".into(),
        gripper: GripperDto {
            preset: "panda".into(),
            opening: 0.034,
        },
        grasp: top_down(Vec3::new(0.0, -0.027, 0.07)),
        start: None,
        planner: planner([-0.15, -0.15, -0.05], [0.15, 0.15, 0.35]),
        executive: ExecutiveConfig::default(),
        objects: vec![
            table(),
            block(
                "tray_left",
                at(-0.12, 0.0, 0.04),
                [0.01, 0.15, 0.04],
                false,
                true,
            ),
            block(
                "tray_right",
                at(0.12, 0.0, 0.04),
                [0.01, 0.15, 0.04],
                false,
                true,
            ),
            block(
                "left",
                at(0.0, -0.03, 0.10),
                [0.10, 0.015, 0.10],
                false,
                false,
            ),
            block("book", at(0.0, 0.0, 0.10), [0.10, 0.015, 0.10], true, false),
            block(
                "right",
                at(0.0, 0.03, 0.10),
                [0.10, 0.015, 0.10],
                false,
                false,
            ),
        ],
    }
}

fn columns(x: [f64; 3], y: [f64; 3], z: [f64; 3]) -> contact_grasp_core::se3::Mat3 {
    contact_grasp_core::se3::Mat3::from_columns(&[Vec3::from(x), Vec3::from(y), Vec3::from(z)])
}
