//! External clustering-quality metrics: accuracy under the best one-to-one
//! label mapping, normalized mutual information, and two purity variants.
//!
//! All functions accept arbitrary label ids; they are indexed internally
//! through a [`ContingencyTable`].

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::dataset::LabelVector;
use crate::error::{Error, Result};

/// Joint counts of truth classes (rows) against predicted clusters (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Array2<u64>,
    pub truth_ids: Vec<usize>,
    pub pred_ids: Vec<usize>,
    pub n: u64,
}

fn distinct(ids: &[usize]) -> Vec<usize> {
    let mut v = ids.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

impl ContingencyTable {
    pub fn new(truth: &LabelVector, pred: &LabelVector) -> Result<Self> {
        let (t, p) = (truth.as_slice(), pred.as_slice());
        if t.len() != p.len() {
            return Err(Error::DimensionMismatch(format!(
                "truth has {} labels, prediction has {}",
                t.len(),
                p.len()
            )));
        }
        let truth_ids = distinct(t);
        let pred_ids = distinct(p);
        let mut counts = Array2::zeros((truth_ids.len(), pred_ids.len()));
        for (a, b) in t.iter().zip(p) {
            let r = truth_ids.binary_search(a).expect("collected above");
            let c = pred_ids.binary_search(b).expect("collected above");
            counts[[r, c]] += 1;
        }
        Ok(ContingencyTable {
            counts,
            truth_ids,
            pred_ids,
            n: t.len() as u64,
        })
    }

    fn row_sums(&self) -> Vec<u64> {
        self.counts.rows().into_iter().map(|r| r.sum()).collect()
    }

    fn col_sums(&self) -> Vec<u64> {
        self.counts.columns().into_iter().map(|c| c.sum()).collect()
    }
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with row/column potentials). Returns `col_of_row`.
fn min_cost_assignment(cost: &Array2<i64>) -> Vec<usize> {
    let n = cost.nrows();
    // 1-based internals; index 0 is the virtual root column.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0; n];
    for j in 1..=n {
        if row_of_col[j] > 0 {
            col_of_row[row_of_col[j] - 1] = j - 1;
        }
    }
    col_of_row
}

/// Best one-to-one mapping from predicted ids to truth ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    /// Predicted id to truth id; `None` when the cluster is left unmatched
    /// (more predicted clusters than truth classes).
    pub map: BTreeMap<usize, Option<usize>>,
    pub matches: u64,
}

/// Maximizes the number of samples whose mapped prediction equals the
/// truth, by optimal assignment on the zero-padded contingency table.
pub fn align_labels(truth: &LabelVector, pred: &LabelVector) -> Result<LabelMapping> {
    let table = ContingencyTable::new(truth, pred)?;
    let (rows, cols) = table.counts.dim();
    let size = rows.max(cols);
    let max = table.counts.iter().copied().max().unwrap_or(0) as i64;
    // cost[p][t] over predicted rows, truth columns
    let mut cost = Array2::from_elem((size, size), max);
    for ((t, p), &c) in table.counts.indexed_iter() {
        cost[[p, t]] = max - c as i64;
    }
    let assignment = min_cost_assignment(&cost);

    let mut map = BTreeMap::new();
    let mut matches = 0;
    for (p, &pid) in table.pred_ids.iter().enumerate() {
        let t = assignment[p];
        if t < rows {
            matches += table.counts[[t, p]];
            map.insert(pid, Some(table.truth_ids[t]));
        } else {
            map.insert(pid, None);
        }
    }
    Ok(LabelMapping { map, matches })
}

/// Fraction of samples whose aligned predicted label equals the truth.
pub fn accuracy(truth: &LabelVector, pred: &LabelVector) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::Empty("accuracy needs at least one sample".into()));
    }
    let mapping = align_labels(truth, pred)?;
    Ok(mapping.matches as f64 / truth.len() as f64)
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `MI(P, Q) / sqrt(H(P) H(Q))` with natural logarithms. Two single-class
/// partitions score 1; if exactly one side is trivial the score is 0.
pub fn nmi(truth: &LabelVector, pred: &LabelVector) -> Result<f64> {
    let table = ContingencyTable::new(truth, pred)?;
    if table.n == 0 {
        return Err(Error::Empty("nmi needs at least one sample".into()));
    }
    let n = table.n as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let (hp, hq) = (entropy(&rows, n), entropy(&cols, n));
    if rows.len() == 1 && cols.len() == 1 {
        return Ok(1.0);
    }
    if hp == 0.0 || hq == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for ((r, c), &nij) in table.counts.indexed_iter() {
        if nij > 0 {
            let nij = nij as f64;
            mi += nij / n * (n * nij / (rows[r] as f64 * cols[c] as f64)).ln();
        }
    }
    Ok((mi / (hp * hq).sqrt()).clamp(0.0, 1.0))
}

/// Classical purity: each predicted cluster votes for its majority class.
pub fn purity_majority(truth: &LabelVector, pred: &LabelVector) -> Result<f64> {
    let table = ContingencyTable::new(truth, pred)?;
    if table.n == 0 {
        return Err(Error::Empty("purity needs at least one sample".into()));
    }
    let hits: u64 = table
        .counts
        .columns()
        .into_iter()
        .map(|c| c.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / table.n as f64)
}

fn pairs(c: u64) -> u64 {
    c * c.saturating_sub(1) / 2
}

/// Pair-counting purity `n1 / (n1 + n2)`: over all unordered sample pairs,
/// `n1` counts pairs on which the prediction agrees with the truth (together
/// in both or apart in both) and `n2` counts disagreements.
pub fn purity_pairs(truth: &LabelVector, pred: &LabelVector) -> Result<f64> {
    let table = ContingencyTable::new(truth, pred)?;
    if table.n < 2 {
        return Err(Error::param("labels", "pair purity needs at least two samples"));
    }
    let both: u64 = table.counts.iter().map(|&c| pairs(c)).sum();
    let same_truth: u64 = table.row_sums().into_iter().map(pairs).sum();
    let same_pred: u64 = table.col_sums().into_iter().map(pairs).sum();
    let total = pairs(table.n);
    // pairs together in both plus pairs apart in both
    let agree = total + 2 * both - same_truth - same_pred;
    Ok(agree as f64 / total as f64)
}

/// All four scores for one prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub acc: f64,
    pub nmi: f64,
    pub purity_majority: f64,
    pub purity_pairs: f64,
}

pub fn score_all(truth: &LabelVector, pred: &LabelVector) -> Result<Scores> {
    Ok(Scores {
        acc: accuracy(truth, pred)?,
        nmi: nmi(truth, pred)?,
        purity_majority: purity_majority(truth, pred)?,
        purity_pairs: purity_pairs(truth, pred)?,
    })
}
