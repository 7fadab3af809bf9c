use contact_grasp::scene_file::*;
use contact_grasp_core::executive::{ExecutiveConfig, PlannerConfig};
use std::path::Path;

const MINIMAL: &str = r#"
name = "minimal"
grasp = { position = [0.0, -0.03, 0.0], quaternion = [1.0, 0.0, 0.0, 0.0] }
gripper = { opening = 0.04 }

[[objects]]
name = "box"
is_target = true
pose = { position = [0.0, 0.0, 0.05], quaternion = [1.0, 0.0, 0.0, 0.0] }
shapes = [{ kind = "box", half_extents = [0.02, 0.02, 0.05] }]
"#;

#[test]
fn minimal_file_gets_defaults() {
    let f = SceneFile::parse(MINIMAL, Path::new("minimal.toml")).unwrap();
    let loaded = f.load(Path::new(".")).unwrap();
    assert_eq!(loaded.planner, PlannerConfig::default());
    assert_eq!(loaded.executive, ExecutiveConfig::default());
    assert_eq!(loaded.planner.search.waypoints, 20);
    assert_eq!(loaded.planner.search.weight(), 1.0 / (0.01 * 0.01));
    assert_eq!(loaded.executive.max_repetitions, 10);
    assert_eq!(loaded.scene.len(), 1);
    assert!(loaded.start.is_none());
}

#[test]
fn two_targets_rejected() {
    let mut f = SceneFile::parse(MINIMAL, Path::new("m.toml")).unwrap();
    let mut other = f.objects[0].clone();
    other.name = "other".into();
    f.objects.push(other);
    let err = f.load(Path::new(".")).unwrap_err();
    assert!(err.to_string().contains("exactly one"), "{err}");
}

#[test]
fn malformed_field_reports_location() {
    let bad = MINIMAL.replace("opening = 0.04", "opening = \"wide\"");
    let err = SceneFile::parse(&bad, Path::new("m.toml")).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("opening") && msg.contains("line"), "{msg}");
}

#[test]
fn unknown_gripper_rejected() {
    let bad = MINIMAL.replace("opening = 0.04", "opening = 0.04, preset = \"claw\"");
    let f = SceneFile::parse(&bad, Path::new("m.toml")).unwrap();
    assert!(f
        .load(Path::new("."))
        .unwrap_err()
        .to_string()
        .contains("claw"));
}

#[test]
fn round_trip_is_identity() {
    let f = SceneFile::parse(MINIMAL, Path::new("m.toml")).unwrap();
    let text = f.to_toml().unwrap();
    let back = SceneFile::parse(&text, Path::new("m.toml")).unwrap();
    assert_eq!(back, f);
    assert_eq!(back.to_toml().unwrap(), text);
}
