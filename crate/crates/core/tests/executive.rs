use contact_grasp_core::dynamics::{ImpedanceParams, TaskState};
use contact_grasp_core::error::Error;
use contact_grasp_core::executive::*;
use contact_grasp_core::gripper::{build_parallel_jaw, GripperSpec};
use contact_grasp_core::refine::GeometricPath;
use contact_grasp_core::scene::{Geometry, Scene, SceneObject};
use contact_grasp_core::sdf::{Primitive, Shape};
use contact_grasp_core::se3::{Pose, Vec3};
use contact_grasp_core::synthesis::ControlSequence;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn far_scene() -> Scene {
    let s = Shape::single(Primitive::sphere(0.01).unwrap());
    Scene::new(
        vec![SceneObject::new(
            "far",
            Geometry::Analytic(s),
            Pose::from_translation(Vec3::new(5.0, 5.0, 5.0)),
        )],
        0,
        Pose::from_translation(Vec3::repeat(-5.0)),
    )
    .unwrap()
}

#[test]
fn pregrasp_first_sample_in_free_space() {
    let g = build_parallel_jaw(&GripperSpec::panda(), 0.03).unwrap();
    let cfg = ExecutiveConfig::default();
    let grasp = Pose::identity();
    let a = sample_pregrasp(
        &far_scene(),
        &g,
        &grasp,
        &cfg,
        0.01,
        &mut ChaCha8Rng::seed_from_u64(1),
    )
    .unwrap();
    let b = sample_pregrasp(
        &far_scene(),
        &g,
        &grasp,
        &cfg,
        0.01,
        &mut ChaCha8Rng::seed_from_u64(1),
    )
    .unwrap();
    assert_eq!(a, b);
    assert!((a.position - Vec3::new(0.0, 0.0, 0.1)).norm() <= 0.03 + 1e-12);
    assert!(contact_grasp_core::se3::rotation_angle(&a.rotation, &grasp.rotation) <= 0.1 + 1e-12);
}

#[test]
fn pregrasp_gives_up() {
    let g = build_parallel_jaw(&GripperSpec::panda(), 0.03).unwrap();
    let big = Shape::single(Primitive::sphere(1.0).unwrap());
    let scene = Scene::new(
        vec![SceneObject::new(
            "big",
            Geometry::Analytic(big),
            Pose::identity(),
        )],
        0,
        Pose::identity(),
    )
    .unwrap();
    let err = sample_pregrasp(
        &scene,
        &g,
        &Pose::identity(),
        &ExecutiveConfig::default(),
        0.01,
        &mut ChaCha8Rng::seed_from_u64(0),
    )
    .unwrap_err();
    assert_eq!(err, Error::NoPregrasp { attempts: 100 });
}

#[test]
fn fixed_objects_are_not_perturbed() {
    let s = Shape::single(Primitive::sphere(0.05).unwrap());
    let scene = Scene::new(
        vec![
            SceneObject::new("a", Geometry::Analytic(s.clone()), Pose::identity()).fixed(true),
            SceneObject::new("b", Geometry::Analytic(s), Pose::identity()),
        ],
        1,
        Pose::identity(),
    )
    .unwrap();
    let seen = perceive(
        &scene,
        &NoiseConfig::default(),
        &mut ChaCha8Rng::seed_from_u64(4),
    );
    assert_eq!(seen.objects()[0].pose, Pose::identity());
    assert_ne!(seen.objects()[1].pose, Pose::identity());
    let none = perceive(
        &scene,
        &NoiseConfig::none(),
        &mut ChaCha8Rng::seed_from_u64(4),
    );
    assert_eq!(none, scene);
}

#[test]
fn teleporting_control_deviates_at_first_step() {
    let g = build_parallel_jaw(&GripperSpec::panda(), 0.03).unwrap();
    let path = GeometricPath {
        waypoints: vec![Pose::identity(); 3],
    };
    let controls = ControlSequence {
        equilibria: vec![Pose::from_translation(Vec3::new(1.0, 0.0, 0.0)); 3],
        impedance: ImpedanceParams::default(),
    };
    let ex = execute_in_sim(
        &far_scene(),
        &g,
        &controls,
        &path,
        &TaskState::at_rest(Pose::identity()),
        &ExecutiveConfig::default(),
        false,
    )
    .unwrap();
    assert_eq!(ex.outcome, Outcome::Deviated);
    assert_eq!(ex.steps_completed, 1);
    assert_eq!(ex.records.len(), 1);
}

#[test]
fn dense_records_every_substep() {
    let g = build_parallel_jaw(&GripperSpec::panda(), 0.03).unwrap();
    let x = Pose::identity();
    let path = GeometricPath {
        waypoints: vec![x; 2],
    };
    let controls = ControlSequence {
        equilibria: vec![x; 2],
        impedance: ImpedanceParams::default(),
    };
    let cfg = ExecutiveConfig::default();
    let ex = execute_in_sim(
        &far_scene(),
        &g,
        &controls,
        &path,
        &TaskState::at_rest(x),
        &cfg,
        true,
    )
    .unwrap();
    assert_eq!(ex.records.len(), 2 * ImpedanceParams::default().substeps());
    assert_eq!(ex.outcome, Outcome::GraspSuccess);
    assert!(execute_in_sim(
        &far_scene(),
        &g,
        &ControlSequence {
            equilibria: vec![x],
            impedance: ImpedanceParams::default()
        },
        &path,
        &TaskState::at_rest(x),
        &cfg,
        false
    )
    .is_err());
}

#[test]
fn zero_repetitions_rejected() {
    let g = build_parallel_jaw(&GripperSpec::panda(), 0.03).unwrap();
    let cfg = ExecutiveConfig {
        max_repetitions: 0,
        ..ExecutiveConfig::default()
    };
    assert!(run_repetitions(
        &far_scene(),
        &g,
        &PlannerConfig::default(),
        &cfg,
        &NullClock
    )
    .is_err());
}
