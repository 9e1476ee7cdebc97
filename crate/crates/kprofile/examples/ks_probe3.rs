use kprofile::{build_secants, kappa_profile_results, ks_simulate, KsConfig, SapConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args[1].parse().unwrap();
    let stride: usize = args[2].parse().unwrap();
    let max_m: usize = args[3].parse().unwrap();
    let config = KsConfig {
        sample_stride: stride,
        n_samples: 2000,
        ..KsConfig::new(alpha)
    };
    let traj = ks_simulate(&config).unwrap();
    let data = traj.to_data_matrix("ks").unwrap();
    let secants = build_secants(&data, Some(500_000), Some(0)).unwrap();
    eprintln!("secants: {}", secants.count());
    let t0 = Instant::now();
    let results = kappa_profile_results(&secants, 1..=max_m, &SapConfig::default()).unwrap();
    for r in &results {
        println!(
            "m {:2}  kappa {:.4}  iters {:5}  conv {}",
            r.basis.subspace_dim(),
            r.kappa,
            r.iterations,
            r.converged
        );
    }
    let good = results.iter().find(|r| r.kappa >= 0.2).map(|r| r.basis.subspace_dim());
    println!("good dimension: {good:?}   elapsed {:?}", t0.elapsed());
}
