//! Shared helpers for integration tests: cloud generators, brute-force
//! sweep oracles, and random orthogonal transforms.
#![allow(dead_code)]

use kprofile::{sap_optimize, DataMatrix, SapConfig, SapInit, SecantSet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

/// Multi-start optimizer run for oracle comparisons on small instances:
/// best kappa over a PCA start and four seeded random starts, each with a
/// slow-decay schedule run to convergence.
pub fn reference_search(s: &SecantSet, m: usize) -> f64 {
    let cfg = SapConfig {
        step_decay: 0.9995,
        max_iters: 20_000,
        patience: 1000,
        tol: 1e-6,
        ..SapConfig::default()
    };
    let mut best = sap_optimize(s, m, &cfg).unwrap().kappa;
    for r in 0..4u64 {
        let rand_cfg = SapConfig {
            init: SapInit::Random(r),
            ..cfg.clone()
        };
        best = best.max(sap_optimize(s, m, &rand_cfg).unwrap().kappa);
    }
    best
}

pub fn uniform_cloud(n_points: usize, dim: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..n_points * dim)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    DataMatrix::new(data, n_points, dim, format!("cloud-{seed}")).unwrap()
}

/// Random orthogonal n x n matrix (orthonormalized uniform entries),
/// row-major.
pub fn random_orthogonal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols = vec![0.0f64; n * n];
    for j in 0..n {
        loop {
            for c in 0..n {
                cols[j * n + c] = rng.gen_range(-1.0..1.0);
            }
            for k in 0..j {
                let mut r = 0.0;
                for c in 0..n {
                    r += cols[k * n + c] * cols[j * n + c];
                }
                for c in 0..n {
                    cols[j * n + c] -= r * cols[k * n + c];
                }
            }
            let nrm: f64 = (0..n).map(|c| cols[j * n + c].powi(2)).sum::<f64>().sqrt();
            if nrm > 1e-6 {
                for c in 0..n {
                    cols[j * n + c] /= nrm;
                }
                break;
            }
        }
    }
    // Stored column-by-column above; emit row-major Q with q_ij = cols[j][i].
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = cols[j * n + i];
        }
    }
    q
}

/// Applies a row-major n x n matrix to every point of a cloud.
pub fn transform_cloud(data: &DataMatrix, q: &[f64]) -> DataMatrix {
    let n = data.dim();
    let mut out = Vec::with_capacity(data.n_points() * n);
    for p in 0..data.n_points() {
        let row = data.row(p);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += q[i * n + j] * row[j];
            }
            out.push(acc);
        }
    }
    DataMatrix::new(out, data.n_points(), n, data.label()).unwrap()
}

fn collect_rows(secants: &SecantSet) -> Vec<Vec<f64>> {
    (0..secants.count()).map(|i| secants.row(i).to_vec()).collect()
}

/// Brute-force max-min projected norm for n=2, m=1: sweeps the projection
/// line angle over `steps` grid points in [0, pi).
pub fn sweep_angle_2d(secants: &SecantSet, steps: usize) -> f64 {
    assert_eq!(secants.dim(), 2);
    let rows = collect_rows(secants);
    let mut best = 0.0f64;
    for k in 0..steps {
        let theta = PI * k as f64 / steps as f64;
        let (s, c) = theta.sin_cos();
        let mut worst = f64::INFINITY;
        for r in &rows {
            let v = (c * r[0] + s * r[1]).abs();
            if v < worst {
                worst = v;
                if worst <= best {
                    break;
                }
            }
        }
        if worst > best {
            best = worst;
        }
    }
    best
}

/// Brute-force max-min for n=3 via a two-stage sphere sweep.
///
/// `complement = false` scores a direction v as min |v.s| (m=1 basis v);
/// `complement = true` scores v as min sqrt(1 - (v.s)^2), i.e. v is the
/// normal of an m=2 subspace. The coarse pass covers the hemisphere with
/// ~8e5 points; the top cells are refined to an effective per-angle
/// resolution beyond 1e5 uniform grid points.
pub fn sweep_sphere_3d(secants: &SecantSet, complement: bool) -> f64 {
    assert_eq!(secants.dim(), 3);
    let rows = collect_rows(secants);
    let score = |v: [f64; 3], floor: f64| -> f64 {
        let mut worst = f64::INFINITY;
        for r in &rows {
            let d = v[0] * r[0] + v[1] * r[1] + v[2] * r[2];
            let val = if complement {
                (1.0 - d * d).max(0.0).sqrt()
            } else {
                d.abs()
            };
            if val < worst {
                worst = val;
                if worst <= floor {
                    break;
                }
            }
        }
        worst
    };
    let dir = |phi: f64, psi: f64| -> [f64; 3] {
        let (sp, cp) = phi.sin_cos();
        let (ss, cs) = psi.sin_cos();
        [ss * cp, ss * sp, cs]
    };

    let n_phi = 1256;
    let n_psi = 628;
    let phi_gap = 2.0 * PI / n_phi as f64;
    let psi_gap = FRAC_PI_2 / n_psi as f64;
    let mut best = 0.0f64;
    let mut top: Vec<(f64, f64, f64)> = Vec::new();
    for ip in 0..=n_psi {
        let psi = ip as f64 * psi_gap;
        for jf in 0..n_phi {
            let phi = jf as f64 * phi_gap;
            let floor = top.last().map_or(0.0, |t| t.0);
            let val = score(dir(phi, psi), floor);
            if val > floor || top.len() < 5 {
                top.push((val, phi, psi));
                top.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
                top.truncate(5);
                top.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            }
            if val > best {
                best = val;
            }
        }
    }
    // Refinement: 401x401 local grids, spacing ~phi_gap/80 (< 2*pi/1e5).
    for &(_, phi0, psi0) in &top.clone() {
        let half = 2.5;
        let steps = 400;
        for a in 0..=steps {
            let psi = psi0 + (a as f64 / steps as f64 - 0.5) * 2.0 * half * psi_gap;
            for b in 0..=steps {
                let phi = phi0 + (b as f64 / steps as f64 - 0.5) * 2.0 * half * phi_gap;
                let val = score(dir(phi, psi), best);
                if val > best {
                    best = val;
                }
            }
        }
    }
    best
}
