//! Fit the centroid-free solver on blobs and print the objective trace,
//! soft memberships of a few samples and the external scores.

use fkmwc::dataset::gaussian_blobs;
use fkmwc::distance::squared_euclidean_matrix;
use fkmwc::metrics::score_all;
use fkmwc::solver::{fit, hard_labels, SolverConfig};

fn main() -> fkmwc::Result<()> {
    let (x, truth) = gaussian_blobs(50, 3, 2, 20.0, 1.0, 0)?;
    let d = squared_euclidean_matrix(&x);
    let state = fit(&d, 3, &SolverConfig::with_lambda(5.0))?;

    println!("initial objective {:.6}", state.initial_objective);
    for (t, obj) in state.trace_pairs().iter().step_by(5) {
        println!("iter {t:>4}  objective {obj:.6}");
    }
    println!("converged {} after {} iterations", state.converged, state.iterations);
    for i in [0, 50, 100] {
        println!("sample {i:>3} memberships {:.4}", state.y.values().row(i));
    }
    let scores = score_all(&truth, &hard_labels(&state.y))?;
    println!("{scores:?}");
    Ok(())
}
