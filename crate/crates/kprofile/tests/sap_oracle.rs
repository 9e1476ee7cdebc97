//! Brute-force oracle checks for the minimax optimizer on small instances
//! where the projection parameter space can be swept densely.

mod common;

use common::{reference_search, sweep_angle_2d, sweep_sphere_3d, uniform_cloud};
use kprofile::{build_secants, sap_optimize, DataMatrix, SapConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ORACLE_TOL: f64 = 2e-2;

#[test]
fn planar_clouds_match_angle_sweep() {
    for seed in 0..6u64 {
        let n_points = 12 + (seed as usize * 7) % 39;
        let data = uniform_cloud(n_points, 2, 100 + seed);
        let s = build_secants(&data, None, None).unwrap();
        let oracle = sweep_angle_2d(&s, 100_000);
        let res = sap_optimize(&s, 1, &SapConfig::default()).unwrap();
        assert!(
            (res.kappa - oracle).abs() <= ORACLE_TOL,
            "seed {seed}: sap {} vs sweep {oracle}",
            res.kappa
        );
        assert!(res.kappa <= oracle + 3e-3, "sap beat the oracle: seed {seed}");
    }
}

#[test]
fn three_direction_cloud_matches_angle_sweep() {
    let dirs = [[1.0, 0.0], [0.30901699437494745, 0.9510565162951535], [-0.6, 0.8]];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut rows = Vec::with_capacity(200);
    for i in 0..200 {
        let d = dirs[i % 3];
        let t: f64 = rng.gen_range(0.1..2.0);
        rows.push(vec![t * d[0], t * d[1]]);
    }
    let data = DataMatrix::from_rows(&rows, "three directions").unwrap();
    let s = build_secants(&data, None, None).unwrap();
    let oracle = sweep_angle_2d(&s, 100_000);
    let res = sap_optimize(&s, 1, &SapConfig::default()).unwrap();
    assert!(
        (res.kappa - oracle).abs() <= ORACLE_TOL,
        "sap {} vs sweep {oracle}",
        res.kappa
    );
}

#[test]
fn spatial_clouds_match_sphere_sweep_m1() {
    for seed in 0..2u64 {
        let data = uniform_cloud(15 + 10 * seed as usize, 3, 200 + seed);
        let s = build_secants(&data, None, None).unwrap();
        let oracle = sweep_sphere_3d(&s, false);
        let kappa = reference_search(&s, 1);
        assert!(
            (kappa - oracle).abs() <= ORACLE_TOL,
            "seed {seed}: sap {kappa} vs sweep {oracle}"
        );
    }
}

#[test]
fn spatial_clouds_match_sphere_sweep_m2() {
    for seed in 0..2u64 {
        let data = uniform_cloud(15 + 10 * seed as usize, 3, 300 + seed);
        let s = build_secants(&data, None, None).unwrap();
        let oracle = sweep_sphere_3d(&s, true);
        let kappa = reference_search(&s, 2);
        assert!(
            (kappa - oracle).abs() <= ORACLE_TOL,
            "seed {seed}: sap {kappa} vs sweep {oracle}"
        );
    }
}
