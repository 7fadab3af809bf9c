use approx::assert_relative_eq;
use contact_grasp_core::error::Error;
use contact_grasp_core::scene::*;
use contact_grasp_core::sdf::{bake_grid, Primitive, Shape};
use contact_grasp_core::se3::{so3_exp, Pose, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere_object(r: f64, at: Vec3) -> SceneObject {
    SceneObject::new(
        "s",
        Geometry::Analytic(Shape::single(Primitive::sphere(r).unwrap())),
        Pose::from_translation(at),
    )
}

fn random_pose(rng: &mut ChaCha8Rng, spread: f64) -> Pose {
    let p = Vec3::new(
        rng.random_range(-spread..spread),
        rng.random_range(-spread..spread),
        rng.random_range(-spread..spread),
    );
    let r = Vec3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    );
    Pose::new(p, so3_exp(&r))
}

#[test]
fn empty_scene_rejected() {
    assert_eq!(
        Scene::new(Vec::new(), 0, Pose::identity()).unwrap_err(),
        Error::EmptyScene
    );
}

#[test]
fn target_index_checked() {
    let objs = vec![sphere_object(0.05, Vec3::zeros())];
    assert!(Scene::new(objs, 1, Pose::identity()).is_err());
}

#[test]
fn phi_object_cases() {
    let shape = Shape::single(Primitive::sphere(0.05).unwrap());
    let grid = bake_grid(&shape, 0.01, 0.05).unwrap();
    let scene = Scene::new(
        vec![SceneObject::new(
            "g",
            Geometry::Grid(grid.clone()),
            Pose::identity(),
        )],
        0,
        Pose::identity(),
    )
    .unwrap();
    let p = Vec3::new(0.013, -0.02, 0.031);
    assert_eq!(scene.phi_object(0, &p), grid.query(&p));

    let moved = Scene::new(
        vec![sphere_object(0.05, Vec3::new(1.0, 0.0, 0.0))],
        0,
        Pose::identity(),
    )
    .unwrap();
    assert_relative_eq!(
        moved.phi_object(0, &Vec3::new(1.0, 0.0, 0.0)),
        -0.05,
        epsilon = 1e-15
    );
    assert!(moved.try_phi_object(3, &Vec3::zeros()).is_err());
}

#[test]
fn phi_env_is_min_over_objects() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let objs = (0..3)
        .map(|i| {
            let shape = Shape::single(
                Primitive::cuboid(Vec3::new(0.05 + 0.01 * i as f64, 0.04, 0.03)).unwrap(),
            );
            SceneObject::new("b", Geometry::Analytic(shape), random_pose(&mut rng, 0.2))
        })
        .collect();
    let scene = Scene::new(objs, 0, Pose::identity()).unwrap();
    for _ in 0..100 {
        let p = random_pose(&mut rng, 0.3).position;
        let brute = (0..3)
            .map(|i| scene.phi_object(i, &p))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(scene.phi_env(&p), brute);
        for i in 0..3 {
            assert!(scene.phi_env(&p) <= scene.phi_object(i, &p));
        }
    }
}

#[test]
fn phi_env_picks_closer_sphere() {
    let scene = Scene::new(
        vec![
            sphere_object(0.05, Vec3::zeros()),
            sphere_object(0.05, Vec3::new(1.0, 0.0, 0.0)),
        ],
        0,
        Pose::identity(),
    )
    .unwrap();
    let p = Vec3::new(0.2, 0.0, 0.0);
    assert_eq!(scene.phi_env(&p), scene.phi_object(0, &p));
}

#[test]
fn frame_invariance_of_phi_object() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shape = Shape::single(Primitive::cuboid(Vec3::new(0.08, 0.05, 0.02)).unwrap());
    for _ in 0..50 {
        let x = random_pose(&mut rng, 0.5);
        let g = random_pose(&mut rng, 0.5);
        let p = random_pose(&mut rng, 0.3).position;
        let a = Scene::new(
            vec![SceneObject::new("b", Geometry::Analytic(shape.clone()), x)],
            0,
            Pose::identity(),
        )
        .unwrap();
        let b = Scene::new(
            vec![SceneObject::new(
                "b",
                Geometry::Analytic(shape.clone()),
                g.compose(&x),
            )],
            0,
            Pose::identity(),
        )
        .unwrap();
        let pa = a.phi_object(0, &p);
        let pb = b.phi_object(0, &g.transform_point(&p));
        assert!((pa - pb).abs() < 1e-9);
    }
}

#[test]
fn gradient_outside_sphere() {
    let shape = Shape::single(Primitive::sphere(0.05).unwrap());
    let grid = bake_grid(&shape, 0.01, 0.05).unwrap();
    let scene = Scene::new(
        vec![SceneObject::new(
            "g",
            Geometry::Grid(grid),
            Pose::identity(),
        )],
        0,
        Pose::identity(),
    )
    .unwrap();
    let g = scene.phi_gradient(&Vec3::new(0.08, 0.0, 0.0), 0.005);
    assert_relative_eq!(g, Vec3::x(), epsilon = 1e-2);
}

#[test]
fn gradient_at_tie_is_finite() {
    let scene = Scene::new(
        vec![
            sphere_object(0.05, Vec3::new(-0.1, 0.0, 0.0)),
            sphere_object(0.05, Vec3::new(0.1, 0.0, 0.0)),
        ],
        0,
        Pose::identity(),
    )
    .unwrap();
    let g = scene.phi_gradient(&Vec3::zeros(), 0.005);
    assert!(g.iter().all(|v| v.is_finite()));
    let expected = (scene.phi_env(&Vec3::new(0.005, 0.0, 0.0))
        - scene.phi_env(&Vec3::new(-0.005, 0.0, 0.0)))
        / 0.01;
    assert_eq!(g.x, expected);
}

#[test]
fn gradient_bounded_on_baked_fields() {
    let shape = Shape::single(Primitive::cuboid(Vec3::new(0.06, 0.04, 0.03)).unwrap());
    let grid = bake_grid(&shape, 0.01, 0.05).unwrap();
    // keep the stencil inside the grid, away from the far-field extension
    let h = 0.005;
    let (lo, hi) = (
        grid.origin().add_scalar(h),
        grid.max_corner().add_scalar(-h),
    );
    let scene = Scene::new(
        vec![SceneObject::new(
            "g",
            Geometry::Grid(grid),
            Pose::identity(),
        )],
        0,
        Pose::identity(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let p = Vec3::new(
            rng.random_range(lo.x..hi.x),
            rng.random_range(lo.y..hi.y),
            rng.random_range(lo.z..hi.z),
        );
        assert!(scene.phi_gradient(&p, h).norm() <= 1.1);
    }
}
