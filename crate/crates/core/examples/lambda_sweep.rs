//! Accuracy, membership softness and the largest single-step objective
//! increase across a grid of lambda values. Large lambda relative to the
//! distance scale can make the update climb and collapse clusters.

use fkmwc::dataset::gaussian_blobs;
use fkmwc::distance::squared_euclidean_matrix;
use fkmwc::metrics::accuracy;
use fkmwc::solver::{fit, hard_labels, SolverConfig};

fn main() -> fkmwc::Result<()> {
    let (x, truth) = gaussian_blobs(50, 3, 2, 8.0, 1.5, 2)?;
    let d = squared_euclidean_matrix(&x);
    println!("{:>8} {:>6} {:>8} {:>10} {:>12}", "lambda", "acc", "iters", "mean max", "max climb");
    for lambda in [0.1, 1.0, 5.0, 10.0, 50.0, 200.0, 1000.0] {
        let state = fit(&d, 3, &SolverConfig::with_lambda(lambda))?;
        let acc = accuracy(&truth, &hard_labels(&state.y))?;
        // average of each row's largest membership: 1 is crisp, 1/K is uniform
        let y = state.y.values();
        let crisp = y.rows().into_iter().map(|r| r.fold(0.0f64, |m, v| m.max(*v))).sum::<f64>() / y.nrows() as f64;
        let mut prev = state.initial_objective;
        let mut climb = 0.0f64;
        for &v in &state.objective_trace {
            climb = climb.max(v - prev);
            prev = v;
        }
        println!("{lambda:>8} {acc:>6.3} {:>8} {crisp:>10.4} {climb:>12.3e}", state.iterations);
    }
    Ok(())
}
