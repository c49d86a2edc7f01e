//! Centroid-based reference algorithms: Lloyd's k-means with k-means++
//! seeding, standard fuzzy c-means, the squared-Euclidean RSFKM objective,
//! and the closed-form optimal centroids that let the centroid-free
//! objective be checked against its centroid-based counterparts.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DataMatrix, LabelVector};
use crate::error::{Error, Result};
use crate::solver::MembershipMatrix;

/// `K x d` cluster representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidMatrix {
    values: Array2<f64>,
}

impl CentroidMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Empty(format!("centroid matrix is {:?}", values.dim())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("centroids", "non-finite entry"));
        }
        Ok(CentroidMatrix { values })
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn k(&self) -> usize {
        self.values.nrows()
    }

    pub fn row(&self, l: usize) -> ArrayView1<'_, f64> {
        self.values.row(l)
    }
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::param("k", format!("need 1 <= k <= {n}, got {k}")));
    }
    Ok(())
}

fn check_membership(x: &DataMatrix, y: &MembershipMatrix) -> Result<()> {
    if x.n_samples() != y.n_samples() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples but {} membership rows",
            x.n_samples(),
            y.n_samples()
        )));
    }
    Ok(())
}

/// k-means++ seeding: first centroid uniform, every further one drawn with
/// probability proportional to the squared distance to the nearest chosen
/// centroid (uniform again once all those distances vanish).
pub fn kmeans_pp_init(x: &DataMatrix, k: usize, seed: u64) -> Result<CentroidMatrix> {
    let n = x.n_samples();
    check_k(k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(chosen[0]))).collect();

    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            WeightedIndex::new(&nearest)
                .expect("nonnegative weights with positive total")
                .sample(&mut rng)
        } else {
            rng.random_range(0..n)
        };
        chosen.push(pick);
        for (i, best) in nearest.iter_mut().enumerate() {
            *best = best.min(sq_dist(x.row(i), x.row(pick)));
        }
    }
    CentroidMatrix::new(x.values().select(Axis(0), &chosen))
}

fn assign(x: &DataMatrix, centroids: ArrayView2<'_, f64>) -> (Vec<usize>, Vec<f64>) {
    (0..x.n_samples())
        .map(|i| {
            centroids
                .rows()
                .into_iter()
                .enumerate()
                .map(|(l, c)| (l, sq_dist(x.row(i), c)))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        })
        .unzip()
}

/// Per-cluster means of a hard partition; `None` for empty clusters.
pub fn cluster_means(x: &DataMatrix, labels: &[usize], k: usize) -> Vec<Option<Array1<f64>>> {
    let mut sums = Array2::<f64>::zeros((k, x.n_features()));
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        let mut s = sums.row_mut(l);
        s += &x.row(i);
        counts[l] += 1;
    }
    sums.rows()
        .into_iter()
        .zip(counts)
        .map(|(s, c)| (c > 0).then(|| &s / c as f64))
        .collect()
}

/// Sum of squared distances of every sample to the mean of its cluster.
pub fn kmeans_objective(x: &DataMatrix, labels: &[usize], k: usize) -> Result<f64> {
    if labels.len() != x.n_samples() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} samples",
            labels.len(),
            x.n_samples()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::param("labels", format!("label {bad} exceeds k = {k}")));
    }
    let means = cluster_means(x, labels, k);
    Ok(labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(x.row(i), means[l].as_ref().expect("nonempty").view()))
        .sum())
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub labels: LabelVector,
    pub centroids: CentroidMatrix,
    pub objective: f64,
    /// Objective after each assignment step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Lloyd iterations from k-means++ seeds until assignments stop changing.
/// An empty cluster is re-seeded with the sample farthest from its current
/// centroid.
pub fn kmeans_fit(x: &DataMatrix, k: usize, seed: u64, max_iter: usize) -> Result<KMeansFit> {
    check_k(k, x.n_samples())?;
    if max_iter == 0 {
        return Err(Error::param("max_iter", "must be at least 1"));
    }
    let mut centroids = kmeans_pp_init(x, k, seed)?.values;
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let (new_labels, dists) = assign(x, centroids.view());
        trace.push(dists.iter().sum());
        if new_labels == labels {
            converged = true;
            break;
        }
        labels = new_labels;

        let means = cluster_means(x, &labels, k);
        let mut taken = vec![false; x.n_samples()];
        for (l, mean) in means.into_iter().enumerate() {
            match mean {
                Some(m) => centroids.row_mut(l).assign(&m),
                None => {
                    let far = dists
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !taken[*i])
                        .fold((0, f64::NEG_INFINITY), |b, (i, &d)| if d > b.1 { (i, d) } else { b })
                        .0;
                    taken[far] = true;
                    centroids.row_mut(l).assign(&x.row(far));
                }
            }
        }
    }

    let (final_labels, dists) = assign(x, centroids.view());
    let objective = dists.iter().sum();
    Ok(KMeansFit {
        labels: LabelVector::from_ids(final_labels),
        centroids: CentroidMatrix::new(centroids)?,
        objective,
        objective_trace: trace,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcmConfig {
    /// Fuzzifier `r > 1`.
    pub fuzzifier: f64,
    /// Stop once the largest membership change drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FcmConfig {
    fn default() -> Self {
        FcmConfig {
            fuzzifier: 2.0,
            tol: 1e-5,
            max_iter: 300,
            seed: 0,
        }
    }
}

impl FcmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fuzzifier.is_finite() && self.fuzzifier > 1.0) {
            return Err(Error::param("fuzzifier", format!("must exceed 1, got {}", self.fuzzifier)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FcmFit {
    pub membership: MembershipMatrix,
    pub centroids: CentroidMatrix,
    pub iterations: usize,
    pub converged: bool,
}

/// Membership update of standard FCM:
/// `y_il = d_il^(-1/(r-1)) / sum_j d_ij^(-1/(r-1))` on squared distances.
/// A sample sitting exactly on a centroid gets a one-hot row.
pub fn fcm_memberships(x: &DataMatrix, centroids: ArrayView2<'_, f64>, fuzzifier: f64) -> Array2<f64> {
    let k = centroids.nrows();
    let exponent = -1.0 / (fuzzifier - 1.0);
    let mut y = Array2::zeros((x.n_samples(), k));
    for (i, mut row) in y.rows_mut().into_iter().enumerate() {
        let d: Vec<f64> = centroids.rows().into_iter().map(|c| sq_dist(x.row(i), c)).collect();
        if let Some(hit) = d.iter().position(|v| *v == 0.0) {
            row[hit] = 1.0;
            continue;
        }
        // Scale by the smallest distance so the powers stay representable.
        let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
        for (v, dl) in row.iter_mut().zip(&d) {
            *v = (dl / dmin).powf(exponent);
        }
        let sum = row.sum();
        row /= sum;
    }
    y
}

/// Centroid update of standard FCM: means weighted by `y_il^r`.
pub fn fcm_centroids(x: &DataMatrix, y: ArrayView2<'_, f64>, fuzzifier: f64) -> Array2<f64> {
    let w = y.mapv(|v| v.powf(fuzzifier));
    let mass = w.sum_axis(Axis(0));
    let mut u = w.t().dot(&x.values());
    for (mut row, m) in u.rows_mut().into_iter().zip(mass.iter()) {
        row /= *m;
    }
    u
}

/// Alternates membership and centroid updates from k-means++ seeds until
/// `max |y_t - y_{t-1}| < tol`.
pub fn fcm_fit(x: &DataMatrix, k: usize, cfg: &FcmConfig) -> Result<FcmFit> {
    cfg.validate()?;
    check_k(k, x.n_samples())?;
    let mut centroids = kmeans_pp_init(x, k, cfg.seed)?.values;
    let mut y = fcm_memberships(x, centroids.view(), cfg.fuzzifier);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        centroids = fcm_centroids(x, y.view(), cfg.fuzzifier);
        let next = fcm_memberships(x, centroids.view(), cfg.fuzzifier);
        let change = (&next - &y).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        y = next;
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(FcmFit {
        membership: MembershipMatrix::new(y)?,
        centroids: CentroidMatrix::new(centroids)?,
        iterations,
        converged,
    })
}

/// Minimizers of `sum_i sum_j y_ij ||x_i - u_j||^2` over `U`:
/// `u_j = sum_i y_ij x_i / sum_i y_ij`.
pub fn optimal_centroids(x: &DataMatrix, y: &MembershipMatrix) -> Result<CentroidMatrix> {
    check_membership(x, y)?;
    let mass = y.column_mass();
    if let Some(j) = mass.iter().position(|m| m.is_nan() || *m <= 0.0) {
        return Err(Error::ZeroColumnMass(j));
    }
    let mut u = y.values().t().dot(&x.values());
    for (mut row, m) in u.rows_mut().into_iter().zip(mass.iter()) {
        row /= *m;
    }
    CentroidMatrix::new(u)
}

/// `sum_i sum_l y_il ||x_i - u_l||^2 + lambda ||Y||_F^2`.
pub fn rsfkm_objective(
    x: &DataMatrix,
    y: &MembershipMatrix,
    u: &CentroidMatrix,
    lambda: f64,
) -> Result<f64> {
    check_membership(x, y)?;
    if u.k() != y.n_clusters() || u.values().ncols() != x.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "centroids {:?} vs {} clusters and {} features",
            u.values().dim(),
            y.n_clusters(),
            x.n_features()
        )));
    }
    let yv = y.values();
    let mut total = 0.0;
    for i in 0..x.n_samples() {
        for l in 0..u.k() {
            total += yv[[i, l]] * sq_dist(x.row(i), u.row(l));
        }
    }
    Ok(total + lambda * yv.iter().map(|v| v * v).sum::<f64>())
}

/// `tr(X^T (I - Y P^-1 Y^T) X)`, evaluated from `X` and `Y` alone.
pub fn centerless_objective_exact(x: &DataMatrix, y: &MembershipMatrix) -> Result<f64> {
    check_membership(x, y)?;
    let mass = y.column_mass();
    if let Some(j) = mass.iter().position(|m| m.is_nan() || *m <= 0.0) {
        return Err(Error::ZeroColumnMass(j));
    }
    // tr(X^T X) - sum_j ||y_j^T X||^2 / p_j
    let xv = x.values();
    let total: f64 = xv.iter().map(|v| v * v).sum();
    let yx = y.values().t().dot(&xv);
    let explained: f64 = yx
        .rows()
        .into_iter()
        .zip(mass.iter())
        .map(|(r, p)| r.dot(&r) / p)
        .sum();
    Ok(total - explained)
}
