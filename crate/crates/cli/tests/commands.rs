use std::fs;
use std::path::Path;
use std::process::Command;

use contact_grasp::artifacts::ControlsFile;
use contact_grasp::report::TrialReportDto;
use contact_grasp::sdf_file::read_grid_file;
use contact_grasp::trace::{read_dense, TraceFile};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_contact-grasp"));
    c.env_remove(contact_grasp::cli::OUT_ENV);
    c
}

fn run(out: &Path, args: &[&str]) -> std::process::Output {
    bin().arg("--out").arg(out).args(args).output().unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    let out = bin().arg("plan").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unknown_scene_fails_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["plan", "no_such_scene"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_scene"));
}

#[test]
fn malformed_scene_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("bad.toml");
    fs::write(&scene, "name = \"bad\"\n[gripper]\nopening = \"wide\"\n").unwrap();
    let out = run(dir.path(), &["plan", scene.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn plan_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["plan", "single_object"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["path.json", "controls.json", "plan_timings.json"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let controls: ControlsFile =
        serde_json::from_str(&fs::read_to_string(dir.path().join("controls.json")).unwrap())
            .unwrap();
    assert_eq!(controls.equilibria.len(), 20);

    let ctl = dir.path().join("controls.json");
    let out = run(
        dir.path(),
        &["simulate", "single_object", ctl.to_str().unwrap()],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace: TraceFile =
        serde_json::from_str(&fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace.records.len(), 20);
    assert!(trace.is_monotone());

    let out = run(
        dir.path(),
        &[
            "simulate",
            "single_object",
            ctl.to_str().unwrap(),
            "--dense",
        ],
    );
    assert!(out.status.success());
    let dense = read_dense(fs::File::open(dir.path().join("trace.bin")).unwrap()).unwrap();
    assert_eq!(dense.len(), 20 * 250);
    assert!(dense.windows(2).all(|w| w[0].step <= w[1].step));
    let last = dense.last().unwrap();
    assert_eq!(last.pose, trace.records.last().unwrap().pose);
}

#[test]
fn out_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env(contact_grasp::cli::OUT_ENV, dir.path())
        .args(["bake-sdf", "single_object", "box"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let grid = read_grid_file(&dir.path().join("box.sdfg")).unwrap();
    assert_eq!(grid.resolution(), 0.005);
    assert!(grid.query(&contact_grasp_core::Vec3::zeros()) < -0.02);
}

#[test]
fn bake_rejects_unknown_object() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["bake-sdf", "single_object", "lamp"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn trial_reports_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(
            d.path(),
            &["trial", "single_object", "--seeds", "1", "--seed", "4"],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let ra = fs::read(a.path().join("trial_4.json")).unwrap();
    let rb = fs::read(b.path().join("trial_4.json")).unwrap();
    assert_eq!(ra, rb);
    let report: TrialReportDto = serde_json::from_slice(&ra).unwrap();
    assert_eq!(report.seed, 4);
    assert!(report.repetitions_used >= 1);
    let summary = fs::read_to_string(a.path().join("summary.txt")).unwrap();
    assert!(summary.contains("Success") && summary.contains("Total"));
    assert!(a.path().join("timings.json").is_file());
}

#[test]
fn scene_file_with_baked_sdf() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["bake-sdf", "single_object", "box"]);
    assert!(out.status.success());
    let mut scene = contact_grasp::presets::build("single_object").unwrap();
    let i = scene.object_index("box").unwrap();
    scene.objects[i].sdf_file = Some("box.sdfg".into());
    scene.objects[i].shapes.clear();
    scene.objects[i].bake = None;
    let path = dir.path().join("scene.toml");
    fs::write(&path, scene.to_toml().unwrap()).unwrap();
    let loaded = contact_grasp::load_scene(&path).unwrap();
    let direct = contact_grasp::cli::resolve_scene("single_object").unwrap();
    let p = contact_grasp_core::Vec3::new(0.0, 0.0, 0.12);
    assert!((loaded.scene.phi_env(&p) - direct.scene.phi_env(&p)).abs() < 1e-6);
}
