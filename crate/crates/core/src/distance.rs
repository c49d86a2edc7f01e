//! Distance-matrix backends.
//!
//! Every constructor returns an `N x N` matrix with nonnegative finite
//! entries and an exactly zero diagonal. Rows are filled in parallel, but
//! each entry is produced by a fixed sequential reduction, so the output
//! does not depend on the number of worker threads.

use std::fmt;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::dataset::{self, DataMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    EuclideanSq,
    Knn,
    Butterworth,
    Kernel,
    /// Loaded from a file; construction parameters unknown.
    Precomputed,
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceKind::EuclideanSq => "euclidean_sq",
            DistanceKind::Knn => "knn",
            DistanceKind::Butterworth => "butterworth",
            DistanceKind::Kernel => "kernel",
            DistanceKind::Precomputed => "precomputed",
        })
    }
}

/// Construction parameters recorded alongside a [`DistanceMatrix`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DistanceParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_neighbors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_fill: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Array2<f64>,
    kind: DistanceKind,
    params: DistanceParams,
}

impl DistanceMatrix {
    /// Wraps an externally supplied matrix after validating it.
    pub fn precomputed(values: Array2<f64>) -> Result<Self> {
        validate_values(values.view())?;
        Ok(DistanceMatrix {
            values,
            kind: DistanceKind::Precomputed,
            params: DistanceParams::default(),
        })
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn params(&self) -> DistanceParams {
        self.params
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Returns `c * D`, keeping kind and parameters.
    pub fn scaled(&self, c: f64) -> DistanceMatrix {
        DistanceMatrix {
            values: &self.values * c,
            kind: self.kind,
            params: self.params,
        }
    }
}

/// Nonnegative symmetric similarity weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    values: Array2<f64>,
}

impl AdjacencyMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, m) = values.dim();
        if n != m || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "adjacency matrix must be square and nonempty, got {n}x{m}"
            )));
        }
        for ((i, j), &v) in values.indexed_iter() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(
                    "adjacency",
                    format!("entry ({i}, {j}) = {v} is not a nonnegative finite real"),
                ));
            }
            if v != values[[j, i]] {
                return Err(Error::param(
                    "adjacency",
                    format!("entry ({i}, {j}) differs from ({j}, {i})"),
                ));
            }
        }
        Ok(AdjacencyMatrix { values })
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }
}

fn sq_dist(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn pairwise_sq(x: &DataMatrix) -> Array2<f64> {
    let n = x.n_samples();
    let mut out = Array2::zeros((n, n));
    Zip::indexed(out.rows_mut()).par_for_each(|i, mut row| {
        let xi = x.row(i);
        for (j, v) in row.iter_mut().enumerate() {
            if j != i {
                *v = sq_dist(xi, x.row(j));
            }
        }
    });
    out
}

/// `d_ij = ||x_i - x_j||^2`, summed coordinate by coordinate.
pub fn squared_euclidean_matrix(x: &DataMatrix) -> DistanceMatrix {
    DistanceMatrix {
        values: pairwise_sq(x),
        kind: DistanceKind::EuclideanSq,
        params: DistanceParams::default(),
    }
}

/// The `k` nearest neighbours of every sample, self excluded, ties broken
/// towards the smaller index.
pub fn knn_sets(sq: ArrayView2<'_, f64>, k: usize) -> Vec<Vec<usize>> {
    let n = sq.nrows();
    (0..n)
        .map(|i| {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| sq[[i, a]].total_cmp(&sq[[i, b]]).then(a.cmp(&b)));
            order.truncate(k);
            order
        })
        .collect()
}

/// Squared distances kept only between mutual k-nearest neighbours; every
/// other off-diagonal pair is filled with the largest squared distance in
/// the data.
pub fn knn_distance_matrix(x: &DataMatrix, k_neighbors: usize) -> Result<DistanceMatrix> {
    let n = x.n_samples();
    if k_neighbors == 0 || k_neighbors >= n {
        return Err(Error::param(
            "k_neighbors",
            format!("must lie in 1..={} for {n} samples, got {k_neighbors}", n.saturating_sub(1)),
        ));
    }
    let sq = pairwise_sq(x);
    let sigma = sq.iter().copied().fold(0.0_f64, f64::max);

    let mut member = Array2::from_elem((n, n), false);
    for (i, nbrs) in knn_sets(sq.view(), k_neighbors).iter().enumerate() {
        for &j in nbrs {
            member[[i, j]] = true;
        }
    }
    let mut values = Array2::zeros((n, n));
    Zip::indexed(values.rows_mut()).par_for_each(|i, mut row| {
        for (j, v) in row.iter_mut().enumerate() {
            if j != i {
                *v = if member[[i, j]] && member[[j, i]] {
                    sq[[i, j]]
                } else {
                    sigma
                };
            }
        }
    });
    Ok(DistanceMatrix {
        values,
        kind: DistanceKind::Knn,
        params: DistanceParams {
            k_neighbors: Some(k_neighbors),
            sigma_fill: Some(sigma),
            ..Default::default()
        },
    })
}

/// Mean of the nonzero off-diagonal similarities.
pub fn default_omega(s: &AdjacencyMatrix) -> Result<f64> {
    let (sum, count) = s
        .values
        .indexed_iter()
        .filter(|((i, j), v)| i != j && **v > 0.0)
        .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
    if count == 0 {
        return Err(Error::param("omega", "adjacency has no nonzero off-diagonal entry"));
    }
    Ok(sum / count as f64)
}

/// Fourth-order Butterworth response of the similarities:
/// `d_ij = sqrt(1 / (1 + (s_ij / omega)^4))`.
pub fn butterworth_distance_matrix(s: &AdjacencyMatrix, omega: f64) -> Result<DistanceMatrix> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::param("omega", format!("must be positive, got {omega}")));
    }
    let n = s.values.nrows();
    let mut values = Array2::zeros((n, n));
    Zip::indexed(values.rows_mut()).par_for_each(|i, mut row| {
        for (j, v) in row.iter_mut().enumerate() {
            if j != i {
                let ratio = s.values[[i, j]] / omega;
                *v = (1.0 / (1.0 + ratio.powi(4))).sqrt();
            }
        }
    });
    Ok(DistanceMatrix {
        values,
        kind: DistanceKind::Butterworth,
        params: DistanceParams {
            omega: Some(omega),
            ..Default::default()
        },
    })
}

/// Median of the pairwise Euclidean distances, or 1 when that median is
/// zero or there are no pairs.
pub fn median_heuristic_width(x: &DataMatrix) -> f64 {
    let n = x.n_samples();
    let mut dists: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| sq_dist(x.row(i), x.row(j)).sqrt())
        .collect();
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(f64::total_cmp);
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

fn check_width(width: f64) -> Result<()> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::param("kernel_width", format!("must be positive, got {width}")));
    }
    Ok(())
}

/// Gaussian RBF similarities `exp(-||x_i - x_j||^2 / (2 width^2))` with a
/// zero diagonal, for feeding [`butterworth_distance_matrix`] from raw data.
pub fn rbf_affinity(x: &DataMatrix, width: f64) -> Result<AdjacencyMatrix> {
    check_width(width)?;
    let denom = 2.0 * width * width;
    let mut values = pairwise_sq(x).mapv(|v| (-v / denom).exp());
    values.diag_mut().fill(0.0);
    Ok(AdjacencyMatrix { values })
}

/// Feature-space squared distance under the RBF kernel:
/// `K(i,i) + K(j,j) - 2 K(i,j) = 2 - 2 exp(-||x_i - x_j||^2 / (2 width^2))`.
pub fn kernel_distance_matrix(x: &DataMatrix, kernel_width: f64) -> Result<DistanceMatrix> {
    check_width(kernel_width)?;
    let denom = 2.0 * kernel_width * kernel_width;
    let mut values = pairwise_sq(x);
    Zip::indexed(values.rows_mut()).par_for_each(|i, mut row| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { 0.0 } else { 2.0 - 2.0 * (-*v / denom).exp() };
        }
    });
    Ok(DistanceMatrix {
        values,
        kind: DistanceKind::Kernel,
        params: DistanceParams {
            kernel_width: Some(kernel_width),
            ..Default::default()
        },
    })
}

/// Outcome of a successful [`validate_distance_matrix`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSummary {
    pub n: usize,
    pub symmetric: bool,
    pub max_asymmetry: f64,
    pub min_off_diagonal: f64,
    pub max_entry: f64,
}

impl fmt::Display for DistanceSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{n}x{n} distance matrix ok: symmetric={sym} (max |d_ij - d_ji| = {asym:e}), \
             min off-diagonal {min}, max {max}",
            n = self.n,
            sym = self.symmetric,
            asym = self.max_asymmetry,
            min = self.min_off_diagonal,
            max = self.max_entry,
        )
    }
}

fn validate_values(values: ArrayView2<'_, f64>) -> Result<DistanceSummary> {
    let (n, m) = values.dim();
    if n != m {
        return Err(Error::DimensionMismatch(format!(
            "distance matrix must be square, got {n}x{m}"
        )));
    }
    if n == 0 {
        return Err(Error::Empty("distance matrix has no rows".into()));
    }
    let mut max_asymmetry = 0.0_f64;
    let mut min_off = f64::INFINITY;
    let mut max_entry = 0.0_f64;
    for ((i, j), &v) in values.indexed_iter() {
        let reason = if !v.is_finite() {
            Some("not finite")
        } else if v < 0.0 {
            Some("negative")
        } else if i == j && v != 0.0 {
            Some("nonzero diagonal")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidDistance {
                row: i,
                col: j,
                value: v,
                reason,
            });
        }
        if i != j {
            min_off = min_off.min(v);
        }
        max_entry = max_entry.max(v);
        max_asymmetry = max_asymmetry.max((v - values[[j, i]]).abs());
    }
    Ok(DistanceSummary {
        n,
        symmetric: max_asymmetry == 0.0,
        max_asymmetry,
        min_off_diagonal: if n > 1 { min_off } else { 0.0 },
        max_entry,
    })
}

/// Checks nonnegativity, finiteness and a zero diagonal, reporting the first
/// offending entry in row-major order. Asymmetry is measured, not rejected.
pub fn validate_distance_matrix(d: &DistanceMatrix) -> Result<DistanceSummary> {
    validate_values(d.values())
}

pub fn load_distance_csv(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    let m = dataset::load_matrix_csv(path, false)?;
    DistanceMatrix::precomputed(m.into_inner())
}

pub fn write_distance_csv(d: &DistanceMatrix, path: impl AsRef<Path>) -> Result<()> {
    dataset::write_values_csv(d.values(), path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn data(rows: &[Vec<f64>]) -> DataMatrix {
        DataMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn three_four_five() {
        let d = squared_euclidean_matrix(&data(&[vec![0.0, 0.0], vec![3.0, 4.0]]));
        assert_eq!(d.values(), array![[0.0, 25.0], [25.0, 0.0]]);
        assert_eq!(d.kind(), DistanceKind::EuclideanSq);
    }

    #[test]
    fn knn_two_points_is_plain_distance() {
        let d = knn_distance_matrix(&data(&[vec![0.0], vec![2.0]]), 1).unwrap();
        assert_eq!(d.values(), array![[0.0, 4.0], [4.0, 0.0]]);
    }

    #[test]
    fn knn_collinear_hand_enumeration() {
        // 1-NN sets: 0 -> {1}, 1 -> {0}, 10 -> {1}; only (0, 1) is mutual.
        let d = knn_distance_matrix(&data(&[vec![0.0], vec![1.0], vec![10.0]]), 1).unwrap();
        assert_eq!(
            d.values(),
            array![[0.0, 1.0, 100.0], [1.0, 0.0, 100.0], [100.0, 100.0, 0.0]]
        );
        assert_eq!(d.params().sigma_fill, Some(100.0));
    }

    #[test]
    fn knn_ties_prefer_smaller_index() {
        // Point 1 is equidistant from 0 and 2; with k = 1 it picks 0.
        let sq = array![[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]];
        let sets = knn_sets(sq.view(), 1);
        assert_eq!(sets, vec![vec![1], vec![0], vec![1]]);
    }

    #[test]
    fn knn_rejects_bad_k() {
        let x = data(&[vec![0.0], vec![1.0], vec![2.0]]);
        assert!(matches!(
            knn_distance_matrix(&x, 0),
            Err(Error::InvalidParameter { name: "k_neighbors", .. })
        ));
        assert!(knn_distance_matrix(&x, 3).is_err());
        assert!(knn_distance_matrix(&x, 2).is_ok());
    }

    #[test]
    fn butterworth_reference_values() {
        let omega = 0.25;
        let s = AdjacencyMatrix::new(array![
            [0.0, omega, 0.0],
            [omega, 0.0, 3.0 * omega],
            [0.0, 3.0 * omega, 0.0]
        ])
        .unwrap();
        let d = butterworth_distance_matrix(&s, omega).unwrap();
        assert!((d.values()[[0, 1]] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(d.values()[[0, 2]], 1.0);
        assert!((d.values()[[1, 2]] - (1.0f64 / 82.0).sqrt()).abs() < 1e-15);
        assert!((d.values()[[1, 2]] - 0.110432).abs() < 1e-6);
        assert!(d.values().diag().iter().all(|v| *v == 0.0));
        assert!(butterworth_distance_matrix(&s, 0.0).is_err());
        assert!(butterworth_distance_matrix(&s, -1.0).is_err());
    }

    #[test]
    fn default_omega_is_mean_of_nonzero() {
        let s = AdjacencyMatrix::new(array![[0.0, 2.0, 0.0], [2.0, 0.0, 4.0], [0.0, 4.0, 0.0]])
            .unwrap();
        assert_eq!(default_omega(&s).unwrap(), 3.0);
        let zero = AdjacencyMatrix::new(Array2::zeros((2, 2))).unwrap();
        assert!(default_omega(&zero).is_err());
    }

    #[test]
    fn kernel_reference_values() {
        let sigma = 1.5;
        // ||x_0 - x_1||^2 = 2 sigma^2 = 4.5
        let x = data(&[vec![0.0, 0.0], vec![4.5f64.sqrt(), 0.0], vec![0.0, 0.0]]);
        let d = kernel_distance_matrix(&x, sigma).unwrap();
        assert!((d.values()[[0, 1]] - (2.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-15);
        assert!((d.values()[[0, 1]] - 1.2642411).abs() < 1e-7);
        assert_eq!(d.values()[[0, 2]], 0.0);
        assert!(kernel_distance_matrix(&x, 0.0).is_err());
    }

    #[test]
    fn kernel_distance_increases_towards_two() {
        let gaps = [0.0, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0];
        let x = data(&gaps.iter().map(|g| vec![*g]).collect::<Vec<_>>());
        let d = kernel_distance_matrix(&x, 1.0).unwrap();
        let row: Vec<f64> = d.values().row(0).to_vec();
        for w in row.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(row.iter().all(|v| *v < 2.0));
        assert!(2.0 - row[row.len() - 1] < 1e-12);
    }

    #[test]
    fn median_heuristic() {
        let x = data(&[vec![0.0], vec![1.0], vec![3.0]]);
        // pairwise: 1, 3, 2 -> median 2
        assert_eq!(median_heuristic_width(&x), 2.0);
        let dup = data(&[vec![1.0], vec![1.0]]);
        assert_eq!(median_heuristic_width(&dup), 1.0);
    }

    #[test]
    fn validation_reports_first_violation() {
        let d = squared_euclidean_matrix(&data(&[vec![0.0], vec![1.0]]));
        assert!(validate_distance_matrix(&d).unwrap().symmetric);

        let bad = array![[0.0, 1.0], [1.0, 0.5]];
        match DistanceMatrix::precomputed(bad) {
            Err(Error::InvalidDistance { row: 1, col: 1, reason, .. }) => {
                assert_eq!(reason, "nonzero diagonal")
            }
            other => panic!("unexpected {other:?}"),
        }
        let nan = array![[0.0, f64::NAN], [1.0, 0.0]];
        assert!(matches!(
            DistanceMatrix::precomputed(nan),
            Err(Error::InvalidDistance { row: 0, col: 1, reason: "not finite", .. })
        ));
        let neg = array![[0.0, -1.0], [1.0, 0.0]];
        assert!(matches!(
            DistanceMatrix::precomputed(neg),
            Err(Error::InvalidDistance { reason: "negative", .. })
        ));
    }

    #[test]
    fn asymmetry_is_reported_not_rejected() {
        let d = DistanceMatrix::precomputed(array![[0.0, 1.0], [3.0, 0.0]]).unwrap();
        let s = validate_distance_matrix(&d).unwrap();
        assert!(!s.symmetric);
        assert_eq!(s.max_asymmetry, 2.0);
    }

    #[test]
    fn rbf_affinity_feeds_butterworth() {
        let x = data(&[vec![0.0], vec![1.0], vec![5.0]]);
        let s = rbf_affinity(&x, 1.0).unwrap();
        assert_eq!(s.values()[[0, 0]], 0.0);
        assert!((s.values()[[0, 1]] - (-0.5f64).exp()).abs() < 1e-15);
        let d = butterworth_distance_matrix(&s, default_omega(&s).unwrap()).unwrap();
        // closer pair has higher similarity and therefore smaller distance
        assert!(d.values()[[0, 1]] < d.values()[[0, 2]]);
    }
}
