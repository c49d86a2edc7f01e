//! With squared Euclidean distances and no regularization, the solver's
//! objective is a pairwise form of the fuzzy within-cluster scatter. This
//! prints the three quantities for random memberships; the pairwise sum
//! counts every unordered pair twice.

use fkmwc::baselines::{centerless_objective_exact, optimal_centroids, rsfkm_objective};
use fkmwc::dataset::gaussian_blobs;
use fkmwc::distance::squared_euclidean_matrix;
use fkmwc::solver::{init_membership, objective};

fn main() -> fkmwc::Result<()> {
    let (x, _) = gaussian_blobs(10, 3, 2, 5.0, 1.0, 1)?;
    for seed in 0..5 {
        let y = init_membership(x.n_samples(), 3, seed)?;
        let scatter = rsfkm_objective(&x, &y, &optimal_centroids(&x, &y)?, 0.0)?;
        let trace = centerless_objective_exact(&x, &y)?;
        let pairwise = objective(&squared_euclidean_matrix(&x), y.values(), 0.0)?;
        println!(
            "seed {seed}: scatter {scatter:.9}  trace {trace:.9}  pairwise {pairwise:.9}  pairwise/trace {:.12}",
            pairwise / trace
        );
    }
    Ok(())
}
