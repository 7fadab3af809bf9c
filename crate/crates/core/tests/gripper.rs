use contact_grasp_core::error::Error;
use contact_grasp_core::gripper::*;
use contact_grasp_core::se3::Vec3;

fn check_invariants(g: &GripperModel) {
    for sp in g.surface_points() {
        assert!(g.shape().distance(&sp.position).abs() <= 1e-6);
        assert!((sp.normal.norm() - 1.0).abs() <= 1e-9);
        let out = g.shape().distance(&(sp.position + sp.normal * 1e-4));
        assert!(out > g.shape().distance(&sp.position));
    }
    for p in g.volume_points() {
        assert!(g.shape().distance(p) <= 0.0);
    }
    // task frame on finger A's distal face
    assert!(g.shape().distance(&Vec3::zeros()) <= 0.0);
    let tip = g.shape().members[0].bounds().unwrap().0.z;
    assert!(tip.abs() <= 1e-3);
}

#[test]
fn default_sizes() {
    let g = build_parallel_jaw(&GripperSpec::panda(), 0.03).unwrap();
    assert_eq!(g.surface_points().len(), 1000);
    assert_eq!(g.volume_points().len(), 50);
    check_invariants(&g);
}

#[test]
fn empty_volume_is_valid() {
    let spec = GripperSpec {
        n_volume: 0,
        ..GripperSpec::panda()
    };
    let g = build_parallel_jaw(&spec, 0.02).unwrap();
    assert!(g.volume_points().is_empty());
}

#[test]
fn deterministic_for_seed() {
    let a = build_parallel_jaw(&GripperSpec::panda(), 0.04).unwrap();
    let b = build_parallel_jaw(&GripperSpec::panda(), 0.04).unwrap();
    assert_eq!(a, b);
}

#[test]
fn opening_limit() {
    let err = build_parallel_jaw(&GripperSpec::panda(), 0.09).unwrap_err();
    assert!(matches!(err, Error::OpeningExceedsLimit { .. }));
    assert_eq!(
        format!("{err}").split(" (").next().unwrap(),
        "opening exceeds gripper limit"
    );
    let g = build_parallel_jaw(&GripperSpec::panda(), 0.03).unwrap();
    assert!(g.set_opening(-0.01).is_err());
    assert!(g.set_opening(0.2).is_err());
}

#[test]
fn set_opening_rebuilds() {
    let g = build_parallel_jaw(&GripperSpec::panda(), 0.03).unwrap();
    assert_eq!(g.set_opening(0.03).unwrap(), g);
    let book = 0.03 + 0.004;
    let h = g.set_opening(book).unwrap();
    let a = h.shape().members[0].bounds().unwrap();
    let b = h.shape().members[1].bounds().unwrap();
    assert!((b.0.y - a.1.y - book).abs() < 1e-15);
    check_invariants(&h);
}

#[test]
fn surface_coverage() {
    let g = build_parallel_jaw(&GripperSpec::panda(), 0.03).unwrap();
    let pts = g.surface_points();
    let bound = 4.0 * f64::sqrt(g.surface_area() / pts.len() as f64);
    let mut worst: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        let nn = pts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, b)| (a.position - b.position).norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nn);
    }
    assert!(worst <= bound, "max nearest-neighbour {worst} > {bound}");
}
