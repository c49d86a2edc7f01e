//! Centroid-free fuzzy k-means.
//!
//! Minimizes `J(Y) = tr(Y^T D Y P^-1) + lambda ||Y||_F^2` over row-stochastic
//! nonnegative memberships `Y`, where `P = diag(sum_i y_ij)`. The minimizer
//! is a multiplicative update: with `a_j = (Y^T D Y)_jj` and
//! `G = (D + D^T) Y P^-1 + 2 lambda Y`, every entry is rescaled by
//! `sqrt(a_j p_jj^-2 / g_ij)` and each row is renormalized to sum to one.
//!
//! Multiplicative updates cannot revive an exact zero, so memberships are
//! initialized strictly positive and floored at [`SolverConfig::floor`]
//! before each renormalization.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Open01;

use crate::dataset::LabelVector;
use crate::distance::{validate_distance_matrix, DistanceMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 10.0;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 2000;
pub const DEFAULT_FLOOR: f64 = 1e-15;

/// Lower bound substituted for `g_ij` before dividing by it.
const GRADIENT_GUARD: f64 = 1e-300;

/// Tolerance on row sums accepted by [`MembershipMatrix::new`].
const ROW_SUM_TOL: f64 = 1e-12;

/// An `N x K` row-stochastic matrix of nonnegative memberships.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    values: Array2<f64>,
}

impl MembershipMatrix {
    /// Accepts `values` if every entry is finite and nonnegative and every
    /// row sums to one within `1e-12`.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, k) = values.dim();
        if n == 0 || k == 0 {
            return Err(Error::Empty(format!("membership matrix is {n}x{k}")));
        }
        for (i, row) in values.rows().into_iter().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::param(
                    "membership",
                    format!("entry ({i}, {j}) = {} is not a nonnegative real", row[j]),
                ));
            }
            let sum = row.sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::param("membership", format!("row {i} sums to {sum}")));
            }
        }
        Ok(MembershipMatrix { values })
    }

    /// Divides each row by its sum. Rows must have a positive sum.
    pub fn from_unnormalized(mut values: Array2<f64>) -> Result<Self> {
        for (i, mut row) in values.rows_mut().into_iter().enumerate() {
            let sum = row.sum();
            if !(sum.is_finite() && sum > 0.0) {
                return Err(Error::param("membership", format!("row {i} sums to {sum}")));
            }
            row /= sum;
        }
        Self::new(values)
    }

    /// Indicator matrix of a hard partition with `k` columns.
    pub fn one_hot(labels: &[usize], k: usize) -> Result<Self> {
        let mut values = Array2::zeros((labels.len(), k));
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::param("labels", format!("label {l} at {i} exceeds k = {k}")));
            }
            values[[i, l]] = 1.0;
        }
        Self::new(values)
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_clusters(&self) -> usize {
        self.values.ncols()
    }

    /// `p_jj = sum_i y_ij`.
    pub fn column_mass(&self) -> Array1<f64> {
        self.values.sum_axis(Axis(0))
    }

    /// Largest `|sum_j y_ij - 1|` over rows.
    pub fn max_row_sum_deviation(&self) -> f64 {
        self.values
            .rows()
            .into_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Reorders columns so that new column `c` is old column `perm[c]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let k = self.n_clusters();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::param("perm", format!("not a permutation of 0..{k}")));
        }
        Ok(MembershipMatrix {
            values: self.values.select(Axis(1), perm),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Weight of the `||Y||_F^2` regularizer.
    pub lambda: f64,
    /// Stop once `|obj_t - obj_{t-1}| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Minimum membership entry enforced before each renormalization.
    pub floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: DEFAULT_LAMBDA,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            floor: DEFAULT_FLOOR,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        SolverConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::param("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::param("tol", format!("must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        if !(self.floor.is_finite() && self.floor > 0.0 && self.floor < 1.0) {
            return Err(Error::param("floor", format!("must lie in (0, 1), got {}", self.floor)));
        }
        Ok(())
    }
}

/// Live state of a fit. `p_diag`, `a` and `g` are the quantities computed
/// from the memberships that were current at the start of the most recent
/// iteration; before the first iteration they describe the initial `y`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub y: MembershipMatrix,
    pub p_diag: Array1<f64>,
    pub a: Array1<f64>,
    pub g: Array2<f64>,
    /// Objective at the initial memberships; not part of `objective_trace`.
    pub initial_objective: f64,
    /// Objective after each completed iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    symmetric: bool,
}

impl SolverState {
    pub fn new(d: &DistanceMatrix, y: MembershipMatrix, lambda: f64) -> Result<Self> {
        check_dims(d, y.values())?;
        let terms = Terms::compute(d, y.values(), lambda, is_symmetric(d.values()))?;
        let initial_objective = terms.objective(y.values(), lambda);
        Ok(SolverState {
            p_diag: terms.p,
            a: terms.a,
            g: terms.g,
            y,
            initial_objective,
            objective_trace: Vec::new(),
            iterations: 0,
            converged: false,
            symmetric: is_symmetric(d.values()),
        })
    }

    pub fn objective(&self) -> f64 {
        self.objective_trace
            .last()
            .copied()
            .unwrap_or(self.initial_objective)
    }

    /// `(iteration, objective)` pairs, iterations counted from 1.
    pub fn trace_pairs(&self) -> Vec<(usize, f64)> {
        self.objective_trace
            .iter()
            .enumerate()
            .map(|(t, v)| (t + 1, *v))
            .collect()
    }
}

fn is_symmetric(d: ArrayView2<'_, f64>) -> bool {
    let n = d.nrows();
    (0..n).all(|i| ((i + 1)..n).all(|j| d[[i, j]] == d[[j, i]]))
}

/// `D Y`, one output row per task. Each entry is summed over `j` in index
/// order, so the result does not depend on the thread count.
fn d_times_y(d: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Array2<f64> {
    let k = y.ncols();
    let y = y.as_standard_layout();
    let ys = y.as_slice().expect("standard layout");
    let mut out = Array2::<f64>::zeros((d.nrows(), k));
    Zip::from(out.rows_mut()).and(d.rows()).par_for_each(|mut out_row, d_row| {
        let acc = out_row.as_slice_mut().expect("fresh row-major array");
        for (&dij, yj) in d_row.iter().zip(ys.chunks_exact(k)) {
            for (o, &v) in acc.iter_mut().zip(yj) {
                *o += dij * v;
            }
        }
    });
    out
}

fn check_dims(d: &DistanceMatrix, y: ArrayView2<'_, f64>) -> Result<()> {
    if d.n() != y.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "distance matrix is {n}x{n} but memberships have {} rows",
            y.nrows(),
            n = d.n()
        )));
    }
    Ok(())
}

/// Per-iteration quantities: column masses, `a_j = (Y^T D Y)_jj` and the
/// positive gradient part `G`.
struct Terms {
    p: Array1<f64>,
    a: Array1<f64>,
    g: Array2<f64>,
}

impl Terms {
    fn compute(d: &DistanceMatrix, y: ArrayView2<'_, f64>, lambda: f64, symmetric: bool) -> Result<Self> {
        let p = y.sum_axis(Axis(0));
        if let Some(j) = p.iter().position(|v| v.is_nan() || *v <= 0.0) {
            return Err(Error::ZeroColumnMass(j));
        }
        let dy = d_times_y(d.values(), y);
        let a = (&y * &dy).sum_axis(Axis(0));
        // (D + D^T) Y
        let mut g = if symmetric {
            &dy * 2.0
        } else {
            &dy + &d.values().t().dot(&y)
        };
        g /= &p;
        g.scaled_add(2.0 * lambda, &y);
        Ok(Terms { p, a, g })
    }

    fn objective(&self, y: ArrayView2<'_, f64>, lambda: f64) -> f64 {
        let trace: f64 = self.a.iter().zip(&self.p).map(|(a, p)| a / p).sum();
        trace + lambda * y.iter().map(|v| v * v).sum::<f64>()
    }
}

/// `tr(Y^T D Y P^-1) + lambda ||Y||_F^2` for any `N x K` matrix `y` with
/// positive column sums (row-stochasticity is not required).
pub fn objective(d: &DistanceMatrix, y: ArrayView2<'_, f64>, lambda: f64) -> Result<f64> {
    check_dims(d, y)?;
    let p = y.sum_axis(Axis(0));
    if let Some(j) = p.iter().position(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::ZeroColumnMass(j));
    }
    let dy = d_times_y(d.values(), y);
    let a = (&y * &dy).sum_axis(Axis(0));
    let trace: f64 = a.iter().zip(&p).map(|(a, p)| a / p).sum();
    Ok(trace + lambda * y.iter().map(|v| v * v).sum::<f64>())
}

/// `dJ/dy_ij = g_ij - a_j p_jj^-2`.
pub fn analytic_gradient(d: &DistanceMatrix, y: ArrayView2<'_, f64>, lambda: f64) -> Result<Array2<f64>> {
    check_dims(d, y)?;
    let terms = Terms::compute(d, y, lambda, is_symmetric(d.values()))?;
    let correction = &terms.a / &terms.p.mapv(|p| p * p);
    Ok(terms.g - &correction)
}

/// Uniform(0, 1) rows normalized to sum to one, floored at
/// [`DEFAULT_FLOOR`]. `k = 1` yields a column of ones.
pub fn init_membership(n: usize, k: usize, seed: u64) -> Result<MembershipMatrix> {
    if k == 0 || n == 0 {
        return Err(Error::param("k", format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if k > n {
        return Err(Error::param("k", format!("k = {k} exceeds n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array2::from_shape_simple_fn((n, k), || rng.sample::<f64, _>(Open01));
    floor_and_normalize(&mut values, DEFAULT_FLOOR);
    MembershipMatrix::new(values)
}

fn floor_and_normalize(values: &mut Array2<f64>, floor: f64) {
    for mut row in values.rows_mut() {
        row.mapv_inplace(|v| v.max(floor));
        let sum = row.sum();
        row /= sum;
    }
}

/// One multiplicative update followed by flooring, row renormalization and
/// a fresh objective evaluation.
pub fn iterate_once(d: &DistanceMatrix, state: SolverState, cfg: &SolverConfig) -> Result<SolverState> {
    let iteration = state.iterations + 1;
    let y = state.y.values();
    let k = y.ncols();
    check_dims(d, y)?;

    let terms = Terms::compute(d, y, cfg.lambda, state.symmetric)?;
    if let Some((j, &mass)) = terms
        .p
        .iter()
        .enumerate()
        .find(|(_, m)| **m < k as f64 * cfg.floor)
    {
        return Err(Error::EmptyCluster {
            cluster: j,
            iteration,
            mass,
        });
    }

    let target = &terms.a / &terms.p.mapv(|p| p * p);
    let mut next = y.to_owned();
    for ((i, j), v) in next.indexed_iter_mut() {
        let g = terms.g[[i, j]].max(GRADIENT_GUARD);
        *v *= (target[j] / g).sqrt();
        if !v.is_finite() {
            return Err(Error::NonFiniteIterate {
                what: "membership",
                iteration,
                row: i,
                col: j,
            });
        }
    }
    floor_and_normalize(&mut next, cfg.floor);

    let obj = objective(d, next.view(), cfg.lambda)?;
    if !obj.is_finite() {
        return Err(Error::NonFiniteIterate {
            what: "objective",
            iteration,
            row: 0,
            col: 0,
        });
    }

    let prev = state.objective();
    let mut trace = state.objective_trace;
    trace.push(obj);
    Ok(SolverState {
        y: MembershipMatrix { values: next },
        p_diag: terms.p,
        a: terms.a,
        g: terms.g,
        initial_objective: state.initial_objective,
        objective_trace: trace,
        iterations: iteration,
        converged: (obj - prev).abs() <= cfg.tol,
        symmetric: state.symmetric,
    })
}

/// Runs the solver from random memberships seeded by `cfg.seed`.
pub fn fit(d: &DistanceMatrix, k: usize, cfg: &SolverConfig) -> Result<SolverState> {
    validate_distance_matrix(d)?;
    let y0 = init_membership(d.n(), k, cfg.seed)?;
    fit_from(d, y0, cfg)
}

/// Runs the solver from the given memberships.
pub fn fit_from(d: &DistanceMatrix, y0: MembershipMatrix, cfg: &SolverConfig) -> Result<SolverState> {
    fit_observed(d, y0, cfg, |_| {})
}

/// Like [`fit_from`], calling `observe` after every iteration.
pub fn fit_observed(
    d: &DistanceMatrix,
    y0: MembershipMatrix,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&SolverState),
) -> Result<SolverState> {
    cfg.validate()?;
    let mut state = SolverState::new(d, y0, cfg.lambda)?;
    while state.iterations < cfg.max_iter {
        state = iterate_once(d, state, cfg)?;
        observe(&state);
        if state.converged {
            break;
        }
    }
    Ok(state)
}

/// Row-wise argmax, ties resolved to the smallest column.
pub fn hard_labels(y: &MembershipMatrix) -> LabelVector {
    let labels = y
        .values
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &v)| if v > best.1 { (j, v) } else { best })
                .0
        })
        .collect();
    LabelVector::from_ids(labels)
}
