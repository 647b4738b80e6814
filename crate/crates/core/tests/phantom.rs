use std::f64::consts::PI;

use paetex::phantom::support_mask;
use paetex::{
    add_gaussian_texture, make_displacement, make_phantom, relative_l2, warp_image, DeformationSpec, Grid, Image,
    PhantomKind, PhantomSpec, SensorGeometry,
};
use proptest::prelude::*;

fn setup(n: usize) -> (Grid, SensorGeometry) {
    (Grid::centered(n, n, 1.0).unwrap(), SensorGeometry::new([0.0, 0.0], 0.45 * n as f64, 64).unwrap())
}

fn disc(center: [f64; 2], radius: f64) -> PhantomSpec {
    PhantomSpec::new(PhantomKind::Disc { center, radius })
}

#[test]
fn disc_pixel_count_matches_centre_test() {
    let (grid, geom) = setup(64);
    let f = make_phantom(&disc([0.3, -0.2], 10.0), &grid, &geom).unwrap();
    let count = f.values.iter().filter(|v| **v == 1.0).count();
    assert_eq!(f.values.iter().filter(|v| **v != 0.0 && **v != 1.0).count(), 0);
    let oracle = (0..64)
        .flat_map(|j| (0..64).map(move |i| (i, j)))
        .filter(|&(i, j)| {
            let p = grid.position(i, j);
            (p[0] - 0.3).hypot(p[1] + 0.2) <= 10.0
        })
        .count();
    assert!((count as f64 - oracle as f64).abs() <= 0.03 * oracle as f64);
    assert!((count as f64 - PI * 100.0).abs() <= 0.03 * PI * 100.0);
}

#[test]
fn zero_radius_gives_zero_image() {
    let (grid, geom) = setup(32);
    let f = make_phantom(&disc([0.0, 0.0], 0.0), &grid, &geom).unwrap();
    assert!(f.values.iter().all(|v| *v == 0.0));
}

#[test]
fn depth_zero_tree_is_one_trunk() {
    let (grid, geom) = setup(128);
    let spec = PhantomSpec::new(PhantomKind::BranchingTree {
        base: [0.0, -20.0],
        heading: 0.3,
        length: 40.0,
        width: 6.0,
        depth: 0,
        spread: 0.5,
        ratio: 0.7,
        jitter: 0.0,
        seed: 0,
    });
    let f = make_phantom(&spec, &grid, &geom).unwrap();
    let area = f.values.iter().filter(|v| **v != 0.0).count() as f64;
    // boundary pixels of a 40 x 6 rectangle may fall either way
    assert!((area - 240.0).abs() <= 2.0 * (40.0 + 6.0), "area {area}");
}

#[test]
fn tree_is_deterministic_and_inside_margin() {
    let (grid, geom) = setup(256);
    let spec = PhantomSpec::new(PhantomKind::BranchingTree {
        base: [0.0, -50.0],
        heading: PI / 2.0,
        length: 35.0,
        width: 8.0,
        depth: 3,
        spread: 0.5,
        ratio: 0.7,
        jitter: 0.2,
        seed: 9,
    });
    let a = make_phantom(&spec, &grid, &geom).unwrap();
    let b = make_phantom(&spec, &grid, &geom).unwrap();
    assert_eq!(a, b);
    let mask = support_mask(&a);
    for (k, m) in mask.iter().enumerate() {
        if *m {
            let p = grid.position(k % 256, k / 256);
            assert!(p[0].hypot(p[1]) <= 0.9 * geom.radius);
        }
    }
}

#[test]
fn support_outside_margin_is_rejected() {
    let (grid, geom) = setup(64);
    assert!(make_phantom(&disc([0.0, 0.0], 27.0), &grid, &geom).is_err());
}

#[test]
fn displacement_examples() {
    let grid: Grid = Grid::centered(40, 40, 1.0).unwrap();
    let t = make_displacement(&DeformationSpec::RigidTranslation { shift: [1.5, -0.5] }, &grid).unwrap();
    assert!(t.ux.iter().all(|v| *v == 1.5) && t.uy.iter().all(|v| *v == -0.5));

    let theta = 0.1;
    let c = [2.0, -3.0];
    let r = make_displacement(&DeformationSpec::RigidRotation { angle: theta, pivot: c }, &grid).unwrap();
    for k in 0..grid.len() {
        let p = grid.position(k % 40, k / 40);
        let want = 2.0 * (theta / 2.0).sin() * (p[0] - c[0]).hypot(p[1] - c[1]);
        assert!((r.magnitude(k) - want).abs() < 1e-12);
    }

    let bump = DeformationSpec::NonrigidBump { center: [0.0, 0.0], sigma: 8.0, amplitude: 2.0, direction: [3.0, 4.0] };
    let grid: Grid = Grid::centered(81, 81, 1.0).unwrap();
    let b = make_displacement(&bump, &grid).unwrap();
    let k0 = grid.index(40, 40);
    assert_eq!(grid.position(40, 40), [0.0, 0.0]);
    assert!((b.ux[k0] - 1.2).abs() < 1e-15 && (b.uy[k0] - 1.6).abs() < 1e-15);
    assert!(b.magnitude(grid.index(40 + 32, 40)) < 0.01 * 2.0);

    let big = DeformationSpec::RigidTranslation { shift: [4.0, 3.5] };
    assert!(make_displacement(&big, &grid).is_err());
}

#[test]
fn warp_examples() {
    let grid: Grid = Grid::centered(32, 32, 1.0).unwrap();
    let f = Image::from_fn(grid, |x| (0.3 * x[0]).sin() + 0.1 * x[1] * x[1]);
    let zero = make_displacement(&DeformationSpec::RigidTranslation { shift: [0.0, 0.0] }, &grid).unwrap();
    assert_eq!(warp_image(&f, &zero).unwrap(), f);

    let shift = make_displacement(&DeformationSpec::RigidTranslation { shift: [2.0, 0.0] }, &grid).unwrap();
    let g = warp_image(&f, &shift).unwrap();
    for j in 0..32 {
        for i in 0..30 {
            assert_eq!(g.get(i, j), f.get(i + 2, j));
        }
    }

    let ramp = Image::from_fn(grid, |x| 2.0 * x[0] - x[1]);
    let half = make_displacement(&DeformationSpec::RigidTranslation { shift: [0.5, 0.0] }, &grid).unwrap();
    let h = warp_image(&ramp, &half).unwrap();
    for j in 0..32 {
        for i in 0..31 {
            let p = grid.position(i, j);
            assert!((h.get(i, j) - (2.0 * (p[0] + 0.5) - p[1])).abs() < 1e-12);
        }
    }
}

#[test]
fn half_translations_compose() {
    let grid: Grid = Grid::centered(96, 96, 1.0).unwrap();
    let f = Image::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * 64.0)).exp());
    let full = make_displacement(&DeformationSpec::RigidTranslation { shift: [1.3, -0.7] }, &grid).unwrap();
    let half = make_displacement(&DeformationSpec::RigidTranslation { shift: [0.65, -0.35] }, &grid).unwrap();
    let twice = warp_image(&warp_image(&f, &half).unwrap(), &half).unwrap();
    let once = warp_image(&f, &full).unwrap();
    assert!(relative_l2(&twice.values, &once.values, None) <= 0.02);
}

#[test]
fn gaussian_texture_statistics() {
    let grid: Grid = Grid::centered(256, 256, 1.0).unwrap();
    let f = Image::from_fn(grid, |x| x[0].cos());
    assert_eq!(add_gaussian_texture(&f, 0.0, 1).unwrap(), f);
    let a = add_gaussian_texture(&f, 0.3, 42).unwrap();
    assert_eq!(a, add_gaussian_texture(&f, 0.3, 42).unwrap());
    assert_ne!(a, add_gaussian_texture(&f, 0.3, 43).unwrap());
    let d: Vec<f64> = a.values.iter().zip(&f.values).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
    assert!((var - 0.09).abs() <= 0.05 * 0.09, "variance {var}");
    assert!(add_gaussian_texture(&f, -1.0, 0).is_err());
}

#[test]
fn spec_serde_round_trip() {
    let spec = PhantomSpec::new(PhantomKind::Annulus { center: [1.0, 2.0], inner: 3.0, outer: 5.0 });
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<PhantomSpec>(&text).unwrap(), spec);
    let d: DeformationSpec = serde_json::from_str(r#"{"kind":"rigid_rotation","angle":0.01,"pivot":[0,0]}"#).unwrap();
    assert_eq!(d, DeformationSpec::RigidRotation { angle: 0.01, pivot: [0.0, 0.0] });
    assert!(serde_json::from_str::<DeformationSpec>(r#"{"kind":"rigid_translation","shift":[0,0],"x":1}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn displacements_respect_the_limit(angle in -0.2..0.2f64, px in -10.0..10.0f64, amp in -5.0..5.0f64, sigma in 1.0..30.0f64) {
        let grid: Grid = Grid::centered(48, 48, 1.0).unwrap();
        for spec in [
            DeformationSpec::RigidRotation { angle, pivot: [px, 0.0] },
            DeformationSpec::NonrigidBump { center: [px, 1.0], sigma, amplitude: amp, direction: [1.0, -2.0] },
        ] {
            if let Ok(u) = make_displacement(&spec, &grid) {
                prop_assert!(u.max_magnitude() <= 5.0);
            }
        }
    }

    #[test]
    fn zero_field_warp_is_identity(seed in 0u64..500) {
        let grid: Grid = Grid::centered(12, 9, 1.0).unwrap();
        let f = add_gaussian_texture(&Image::zeros(grid), 1.0, seed).unwrap();
        let zero = make_displacement(&DeformationSpec::RigidTranslation { shift: [0.0, 0.0] }, &grid).unwrap();
        prop_assert_eq!(warp_image(&f, &zero).unwrap(), f);
    }
}
