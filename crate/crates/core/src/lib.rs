//! Fuzzy k-means clustering without cluster centroids.
//!
//! Memberships are optimized directly from an `N x N` distance matrix, so
//! any construction of that matrix (squared Euclidean, mutual k-NN,
//! Butterworth-filtered similarities, RBF kernel distances, or a matrix
//! loaded from disk) plugs into the same solver.
//!
//! ```
//! use fkmwc::{dataset, distance, metrics, solver};
//!
//! let (x, truth) = dataset::gaussian_blobs(30, 3, 2, 20.0, 1.0, 7).unwrap();
//! let d = distance::squared_euclidean_matrix(&x);
//! let state = solver::fit(&d, 3, &solver::SolverConfig::with_lambda(5.0)).unwrap();
//! let pred = solver::hard_labels(&state.y);
//! assert!(metrics::accuracy(&truth, &pred).unwrap() > 0.99);
//! ```

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod metrics;
pub mod report;
pub mod solver;

pub use dataset::{DataMatrix, LabelVector};
pub use distance::{DistanceKind, DistanceMatrix};
pub use error::{Error, Result};
pub use solver::{MembershipMatrix, SolverConfig, SolverState};
