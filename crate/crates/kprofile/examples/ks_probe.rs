use kprofile::{KsConfig, KsSolver};

fn main() {
    // Shape-space recurrence structure of the alpha=19 orbit after t=1000.
    let config = KsConfig::new(19.0);
    let mut solver = KsSolver::new(&config).unwrap();
    solver.step_n(1_000_000).unwrap();
    let center = |u: &[f64]| -> Vec<f64> {
        let m = u.iter().sum::<f64>() / u.len() as f64;
        u.iter().map(|v| v - m).collect()
    };
    let reference = center(&solver.state());
    let mut min_after_escape = f64::INFINITY;
    let mut min_t = 0.0;
    let mut escaped = false;
    for step in 1..=40_000usize {
        solver.step_n(1).unwrap();
        if step % 10 == 0 {
            let u = center(&solver.state());
            let d: f64 = u
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d > 5.0 {
                escaped = true;
            }
            if escaped && d < min_after_escape {
                min_after_escape = d;
                min_t = step as f64 * 1e-3;
            }
        }
    }
    println!("recurrence: min dist {min_after_escape:.4} at t +{min_t:.3} (escaped {escaped})");

    // Does the orbit survive to t=6000?
    let mut prev: Option<Vec<f64>> = None;
    for block in 0..10 {
        solver.step_n(500_000).unwrap();
        let u = center(&solver.state());
        if let Some(p) = &prev {
            let d: f64 = u.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            println!("t {:6.0}  delta vs prev checkpoint {d:9.3e}", 1040.0 + (block as f64 + 1.0) * 500.0);
        }
        prev = Some(u);
    }
}
