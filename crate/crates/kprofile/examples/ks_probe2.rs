use kprofile::sap::SapInit;
use kprofile::{
    build_secants, geodesic_distance, kappa_profile_results, ks_simulate, pca_basis, sap_optimize,
    KsConfig, SapConfig,
};

fn main() {
    let config = KsConfig {
        sample_stride: 50,
        n_samples: 2000,
        ..KsConfig::new(19.0)
    };
    let traj = ks_simulate(&config).unwrap();
    let data = traj.to_data_matrix("ks_a19").unwrap();
    let secants = build_secants(&data, Some(500_000), Some(0)).unwrap();

    let (_, spec) = pca_basis(&data, 24).unwrap();
    println!("singular values:");
    for (i, s) in spec.values.iter().enumerate() {
        println!("  s{:2} {:.6e}", i + 1, s);
    }

    println!("chained profile (default config):");
    let results = kappa_profile_results(&secants, 1..=20, &SapConfig::default()).unwrap();
    let mut lo_mean = 0.0;
    let mut hi_mean = 0.0;
    for r in &results {
        let m = r.basis.subspace_dim();
        let (p, _) = pca_basis(&data, m).unwrap();
        let d = geodesic_distance(&p, &r.basis).unwrap();
        println!("  m {:2}  kappa {:.4}  iters {:5}  dist {:.4}", m, r.kappa, r.iterations, d);
        if (1..=6).contains(&m) {
            lo_mean += d / 6.0;
        }
        if (10..=20).contains(&m) {
            hi_mean += d / 11.0;
        }
    }
    println!("mean dist m1..6 {lo_mean:.4}   m10..20 {hi_mean:.4}");

    println!("m=2 multistart (slow config):");
    let slow = SapConfig {
        step_decay: 0.9995,
        max_iters: 20_000,
        tol: 1e-6,
        patience: 1000,
        ..SapConfig::default()
    };
    let (p2, _) = pca_basis(&data, 2).unwrap();
    for seed in 0..6u64 {
        let cfg = SapConfig { init: SapInit::Random(seed), ..slow.clone() };
        let r = sap_optimize(&secants, 2, &cfg).unwrap();
        let d = geodesic_distance(&p2, &r.basis).unwrap();
        println!("  seed {seed}  kappa {:.4}  iters {:5}  dist {:.4}", r.kappa, r.iterations, d);
    }
    let cfg = SapConfig { init: SapInit::Pca, ..slow.clone() };
    let r = sap_optimize(&secants, 2, &cfg).unwrap();
    let d = geodesic_distance(&p2, &r.basis).unwrap();
    println!("  pca-init slow  kappa {:.4}  iters {:5}  dist {:.4}", r.kappa, r.iterations, d);
}
