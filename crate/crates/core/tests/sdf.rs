use approx::assert_relative_eq;
use contact_grasp_core::error::Error;
use contact_grasp_core::sdf::*;
use contact_grasp_core::se3::{Pose, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere(r: f64) -> Shape {
    Shape::single(Primitive::sphere(r).unwrap())
}

#[test]
fn analytic_cases() {
    let s = sphere(0.05);
    assert_relative_eq!(
        analytic_sdf(&s, &Vec3::new(0.1, 0.0, 0.0)),
        0.05,
        epsilon = 1e-15
    );
    assert_relative_eq!(analytic_sdf(&s, &Vec3::zeros()), -0.05, epsilon = 1e-15);
    let b = Shape::single(Primitive::cuboid(Vec3::repeat(0.1)).unwrap());
    assert_relative_eq!(
        analytic_sdf(&b, &Vec3::new(0.2, 0.0, 0.0)),
        0.1,
        epsilon = 1e-15
    );
    // corner region: Euclidean distance to the corner
    assert_relative_eq!(
        analytic_sdf(&b, &Vec3::new(0.2, 0.2, 0.1)),
        (0.02f64).sqrt(),
        epsilon = 1e-15
    );
    let c = Shape::single(Primitive::cylinder(0.05, 0.1).unwrap());
    assert_relative_eq!(
        analytic_sdf(&c, &Vec3::new(0.0, 0.0, 0.0)),
        -0.05,
        epsilon = 1e-15
    );
    assert_relative_eq!(
        analytic_sdf(&c, &Vec3::new(0.0, 0.0, 0.15)),
        0.05,
        epsilon = 1e-15
    );
    let h = Shape::single(Primitive::half_space(Vec3::z(), 0.0).unwrap());
    assert_eq!(analytic_sdf(&h, &Vec3::new(3.0, 1.0, -0.2)), -0.2);
}

#[test]
fn union_is_min() {
    let a = Primitive::sphere(0.05).unwrap();
    let b = Primitive::sphere(0.05)
        .unwrap()
        .at(Pose::from_translation(Vec3::new(0.2, 0.0, 0.0)));
    let u = Shape::new(vec![a, b]);
    let p = Vec3::new(0.18, 0.0, 0.0);
    assert_relative_eq!(u.distance(&p), -0.03, epsilon = 1e-15);
}

#[test]
fn invalid_primitives_rejected() {
    assert!(Primitive::sphere(0.0).is_err());
    assert!(Primitive::cuboid(Vec3::new(0.1, -0.1, 0.1)).is_err());
    assert!(Primitive::cylinder(0.1, 0.0).is_err());
    assert!(Primitive::half_space(Vec3::new(0.0, 0.0, 2.0), 0.0).is_err());
}

#[test]
fn baked_sphere_center_and_corners() {
    let g = bake_grid(&sphere(0.05), 0.01, 0.05).unwrap();
    let d = g.dims();
    assert_eq!(d, [21, 21, 21]);
    assert_relative_eq!(g.node_value(10, 10, 10), -0.05, epsilon = 1e-7);
    for &(i, j, k) in &[(0, 0, 0), (d[0] - 1, d[1] - 1, d[2] - 1), (0, d[1] - 1, 0)] {
        assert!(g.node_value(i, j, k) > 0.0);
    }
}

#[test]
fn baked_sphere_accuracy_against_analytic() {
    let s = sphere(0.05);
    let g = bake_grid(&s, 0.01, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (lo, hi) = (g.origin(), g.max_corner());
    let mut worst_outer: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = Vec3::new(
            rng.random_range(lo.x..hi.x),
            rng.random_range(lo.y..hi.y),
            rng.random_range(lo.z..hi.z),
        );
        let err = (g.query(&p) - s.distance(&p)).abs();
        worst = worst.max(err);
        // the cone point at the center is not resolved by trilinear cells
        if p.norm() >= 0.02 {
            worst_outer = worst_outer.max(err);
        }
    }
    assert!(worst_outer <= 1.5e-3, "worst error {worst_outer}");
    assert!(worst <= 2.6e-3, "worst error {worst}");
}

#[test]
fn center_cell_error_matches_corner_average() {
    let s = sphere(0.05);
    let g = bake_grid(&s, 0.01, 0.05).unwrap();
    let p = Vec3::repeat(0.005);
    let corners = (0.0 + 3.0 * 0.01 + 3.0 * f64::sqrt(2.0) * 0.01 + f64::sqrt(3.0) * 0.01) / 8.0;
    let expected = corners - p.norm();
    assert_relative_eq!(g.query(&p) - s.distance(&p), expected, epsilon = 1e-7);
    assert!(expected > 1.5e-3);
}

#[test]
fn query_node_edge_and_far_field() {
    // 2×1×1 grid, nodes valued 0.01 and 0.03
    let g = SdfGrid::new(Vec3::zeros(), 0.01, [2, 1, 1], vec![0.01, 0.03]).unwrap();
    assert_eq!(g.query(&Vec3::zeros()), 0.01f32 as f64);
    assert_relative_eq!(g.query(&Vec3::new(0.005, 0.0, 0.0)), 0.02, epsilon = 1e-9);
    // 0.1 m outside beyond the first node
    let g2 = SdfGrid::new(Vec3::zeros(), 0.01, [2, 2, 2], vec![0.04; 8]).unwrap();
    assert_relative_eq!(
        g2.query(&Vec3::new(-0.1, 0.005, 0.005)),
        0.14,
        epsilon = 1e-9
    );
}

#[test]
fn lipschitz_on_baked_box() {
    let b = Shape::single(Primitive::cuboid(Vec3::new(0.1, 0.05, 0.02)).unwrap());
    let g = bake_grid(&b, 0.01, 0.03).unwrap();
    let [nx, ny, nz] = g.dims();
    let bound = 3f64.sqrt() * 0.01 + 1e-6;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx - 1 {
                assert!((g.node_value(i, j, k) - g.node_value(i + 1, j, k)).abs() <= bound);
            }
        }
    }
}

#[test]
fn half_space_cannot_bake() {
    let h = Shape::single(Primitive::half_space(Vec3::z(), 0.0).unwrap());
    assert_eq!(bake_grid(&h, 0.01, 0.0), Err(Error::UnboundedShape));
}

#[test]
fn degenerate_extent_gives_single_layer() {
    let g = SdfGrid::new(Vec3::zeros(), 0.01, [1, 1, 1], vec![0.2]).unwrap();
    assert_relative_eq!(g.query(&Vec3::new(0.0, 0.3, 0.4)), 0.7, epsilon = 1e-7);
}

proptest::proptest! {
    #[test]
    fn query_is_continuous(x in -0.2f64..0.2, y in -0.2f64..0.2, z in -0.2f64..0.2,
                           ux in -1.0f64..1.0, uy in -1.0f64..1.0, uz in -1.0f64..1.0) {
        let b = Shape::single(Primitive::cuboid(Vec3::new(0.05, 0.03, 0.02)).unwrap());
        let g = bake_grid(&b, 0.01, 0.02).unwrap();
        let p = Vec3::new(x, y, z);
        let u = Vec3::new(ux, uy, uz);
        let u = if u.norm() > 1e-6 { u.normalize() } else { Vec3::x() };
        let d = (g.query(&p) - g.query(&(p + u * 1e-6))).abs();
        proptest::prop_assert!(d <= 1e-5);
    }
}
