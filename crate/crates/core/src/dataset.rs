//! Sample matrices, ground-truth labels, CSV ingestion and a seeded
//! Gaussian-blob generator.
//!
//! CSV is the only ingestion format: one sample per row, comma separated,
//! `.` as decimal mark, optional single header line. No scaling is applied
//! on load; [`DataMatrix::standardized`] is available for callers that want
//! it explicitly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// An `N x d` matrix of finite samples, `N >= 1`, `d >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        if n == 0 || d == 0 {
            return Err(Error::Empty(format!("data matrix is {n}x{d}")));
        }
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::param(
                "values",
                format!("non-finite entry {v} at ({i}, {j})"),
            ));
        }
        Ok(DataMatrix { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} fields, expected {d}",
                r.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((n, d), flat)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Self::new(values)
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    /// Zero-mean, unit-variance columns. Constant columns are only centered.
    pub fn standardized(&self) -> DataMatrix {
        let n = self.n_samples() as f64;
        let mut out = self.values.clone();
        for mut col in out.axis_iter_mut(Axis(1)) {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            col.mapv_inplace(|v| if sd > 0.0 { (v - mean) / sd } else { v - mean });
        }
        DataMatrix { values: out }
    }
}

/// Cluster ids, one per sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    n_classes: usize,
}

impl LabelVector {
    /// Relabels arbitrary ids to `0..n_classes` in order of first appearance.
    pub fn canonicalize<T: Eq + std::hash::Hash + Copy>(raw: &[T]) -> Self {
        let mut seen: HashMap<T, usize> = HashMap::new();
        let labels = raw
            .iter()
            .map(|id| {
                let next = seen.len();
                *seen.entry(*id).or_insert(next)
            })
            .collect();
        LabelVector {
            labels,
            n_classes: seen.len(),
        }
    }

    /// Keeps ids as given; `n_classes` counts the distinct ids present.
    pub fn from_ids(labels: Vec<usize>) -> Self {
        let mut distinct = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        LabelVector {
            n_classes: distinct.len(),
            labels,
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }
}

/// Reads a numeric CSV file into a [`DataMatrix`], one row per sample.
pub fn load_matrix_csv(path: impl AsRef<Path>, has_header: bool) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut flat = Vec::new();
    let mut width = None;
    let mut n_rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                line,
                expected,
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                column: col + 1,
                value: field.to_string(),
                what: "a real number",
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    path: path.to_path_buf(),
                    line,
                    column: col + 1,
                    value,
                });
            }
            flat.push(value);
        }
        n_rows += 1;
    }
    let width = width.ok_or_else(|| Error::Empty(format!("{} has no data rows", path.display())))?;
    let values = Array2::from_shape_vec((n_rows, width), flat)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    DataMatrix::new(values)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            column: 0,
            value: format!("{other:?}"),
            what: "CSV",
        },
    }
}

/// Reads one integer label per line and canonicalizes the ids.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelVector> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let body = text.trim_end();
    if body.is_empty() {
        return Err(Error::Empty(format!("{} has no labels", path.display())));
    }
    let raw = body
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let field = line.trim();
            field.parse::<i64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                column: 1,
                value: field.to_string(),
                what: "an integer label",
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabelVector::canonicalize(&raw))
}

pub fn write_labels(labels: &LabelVector, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(labels.len() * 2);
    for l in labels.as_slice() {
        writeln!(out, "{l}").expect("writing to a String");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Shortest representation that parses back to the identical `f64`.
pub(crate) fn format_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub(crate) fn matrix_to_csv(values: ArrayView2<'_, f64>) -> String {
    let mut out = String::new();
    for row in values.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_real(*v));
        }
        out.push('\n');
    }
    out
}

pub(crate) fn write_values_csv(values: ArrayView2<'_, f64>, path: &Path) -> Result<()> {
    if values.nrows() == 0 || values.ncols() == 0 {
        return Err(Error::Empty(format!(
            "refusing to write a {}x{} matrix",
            values.nrows(),
            values.ncols()
        )));
    }
    fs::write(path, matrix_to_csv(values)).map_err(|e| Error::io(path, e))
}

/// Writes `m` without a header so that `load_matrix_csv(path, false)`
/// reproduces it bit for bit.
pub fn write_matrix_csv(m: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_values_csv(m.values(), path.as_ref())
}

/// Parameters of the isotropic Gaussian blob generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub n_per_cluster: usize,
    pub k: usize,
    pub dim: usize,
    pub separation: f64,
    pub spread: f64,
    pub seed: u64,
}

/// Output of [`BlobSpec::generate`]: samples in cluster-major order.
#[derive(Debug, Clone)]
pub struct Blobs {
    pub data: DataMatrix,
    pub labels: LabelVector,
    pub centers: Array2<f64>,
}

impl BlobSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_per_cluster", self.n_per_cluster),
            ("k", self.k),
            ("dim", self.dim),
        ] {
            if v == 0 {
                return Err(Error::param(name, "must be positive"));
            }
        }
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(Error::param("separation", "must be a positive real"));
        }
        if !(self.spread.is_finite() && self.spread >= 0.0) {
            return Err(Error::param("spread", "must be a nonnegative real"));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Blobs> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let centers = self.place_centers(&mut rng);

        let n = self.n_per_cluster * self.k;
        let mut values = Array2::zeros((n, self.dim));
        let mut labels = Vec::with_capacity(n);
        for c in 0..self.k {
            for s in 0..self.n_per_cluster {
                let mut row = values.row_mut(c * self.n_per_cluster + s);
                for (v, center) in row.iter_mut().zip(centers.row(c)) {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = center + self.spread * z;
                }
                labels.push(c);
            }
        }
        Ok(Blobs {
            data: DataMatrix::new(values)?,
            labels: LabelVector::from_ids(labels),
            centers,
        })
    }

    /// Rejection sampling in a cube that grows whenever placement stalls,
    /// so every pair of centers ends up at least `separation` apart.
    fn place_centers(&self, rng: &mut ChaCha8Rng) -> Array2<f64> {
        let per_axis = (self.k as f64).powf(1.0 / self.dim as f64).ceil();
        let mut side = 2.0 * self.separation * per_axis.max(1.0);
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(self.k);
        let mut failures = 0;
        while centers.len() < self.k {
            let candidate: Vec<f64> = (0..self.dim).map(|_| rng.random::<f64>() * side).collect();
            let clear = centers.iter().all(|c| {
                let sq: f64 = c.iter().zip(&candidate).map(|(a, b)| (a - b).powi(2)).sum();
                sq.sqrt() >= self.separation
            });
            if clear {
                centers.push(candidate);
                failures = 0;
            } else {
                failures += 1;
                if failures == 1000 {
                    side *= 1.5;
                    failures = 0;
                }
            }
        }
        let flat: Vec<f64> = centers.into_iter().flatten().collect();
        Array2::from_shape_vec((self.k, self.dim), flat).expect("k x dim centers")
    }
}

/// Generates `k` isotropic Gaussian clusters of `n_per_cluster` samples each.
pub fn gaussian_blobs(
    n_per_cluster: usize,
    k: usize,
    dim: usize,
    separation: f64,
    spread: f64,
    seed: u64,
) -> Result<(DataMatrix, LabelVector)> {
    let blobs = BlobSpec {
        n_per_cluster,
        k,
        dim,
        separation,
        spread,
        seed,
    }
    .generate()?;
    Ok((blobs.data, blobs.labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write;

    fn temp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_plain_csv() {
        let f = temp_file("0,0\n3,4");
        let m = load_matrix_csv(f.path(), false).unwrap();
        assert_eq!(m.values(), array![[0.0, 0.0], [3.0, 4.0]]);
    }

    #[test]
    fn header_is_skipped() {
        let f = temp_file("a,b\r\n1,2\r\n3,4\r\n5,6\r\n");
        let m = load_matrix_csv(f.path(), true).unwrap();
        assert_eq!(m.n_samples(), 3);
        assert_eq!(m.row(2).to_vec(), vec![5.0, 6.0]);
    }

    #[test]
    fn ragged_row_names_line() {
        let f = temp_file("1,2\n3");
        match load_matrix_csv(f.path(), false) {
            Err(Error::RaggedRow { line, expected, found, .. }) => {
                assert_eq!((line, expected, found), (2, 2, 1));
            }
            other => panic!("expected ragged-row error, got {other:?}"),
        }
    }

    #[test]
    fn bad_fields_name_row_and_column() {
        let f = temp_file("1,2\n3,x\n");
        assert!(matches!(
            load_matrix_csv(f.path(), false),
            Err(Error::Parse { line: 2, column: 2, .. })
        ));
        let f = temp_file("1,NaN\n");
        assert!(matches!(
            load_matrix_csv(f.path(), false),
            Err(Error::NonFinite { line: 1, column: 2, .. })
        ));
        let f = temp_file("inf,1\n");
        assert!(matches!(
            load_matrix_csv(f.path(), false),
            Err(Error::NonFinite { line: 1, column: 1, .. })
        ));
    }

    #[test]
    fn missing_file_and_empty_file() {
        let err = load_matrix_csv("/nonexistent/data.csv", false).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 1);
        let f = temp_file("");
        assert!(matches!(load_matrix_csv(f.path(), false), Err(Error::Empty(_))));
    }

    #[test]
    fn labels_are_canonicalized() {
        let f = temp_file("5\n5\n9\n9\n");
        let l = load_labels(f.path()).unwrap();
        assert_eq!(l.as_slice(), &[0, 0, 1, 1]);
        assert_eq!(l.n_classes(), 2);

        let f = temp_file("0\n1\n2");
        let l = load_labels(f.path()).unwrap();
        assert_eq!(l.as_slice(), &[0, 1, 2]);
        assert_eq!(l.n_classes(), 3);

        let l = LabelVector::canonicalize(&[7, 3, 7, -1]);
        assert_eq!(l.as_slice(), &[0, 1, 0, 2]);
    }

    #[test]
    fn label_errors() {
        let f = temp_file("a\n1\n");
        assert!(matches!(load_labels(f.path()), Err(Error::Parse { line: 1, .. })));
        let f = temp_file("\n\n");
        assert!(matches!(load_labels(f.path()), Err(Error::Empty(_))));
    }

    #[test]
    fn write_round_trip_and_tiny_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = DataMatrix::new(array![[1e-300, -0.1], [1.0 / 3.0, 6.02214076e23]]).unwrap();
        write_matrix_csv(&m, &path).unwrap();
        let back = load_matrix_csv(&path, false).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.values()[[0, 0]], 1e-300);
    }

    #[test]
    fn zero_row_matrix_rejected() {
        assert!(matches!(
            DataMatrix::new(Array2::zeros((0, 2))),
            Err(Error::Empty(_))
        ));
        let dir = tempfile::tempdir().unwrap();
        let err = write_values_csv(Array2::<f64>::zeros((0, 2)).view(), &dir.path().join("e.csv"));
        assert!(matches!(err, Err(Error::Empty(_))));
    }

    #[test]
    fn blobs_are_deterministic() {
        let a = gaussian_blobs(50, 3, 2, 20.0, 1.0, 7).unwrap();
        let b = gaussian_blobs(50, 3, 2, 20.0, 1.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.n_samples(), 150);
        let c = gaussian_blobs(50, 3, 2, 20.0, 1.0, 8).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn blob_centers_respect_separation() {
        for (k, dim) in [(3, 2), (5, 1), (8, 3)] {
            let blobs = BlobSpec {
                n_per_cluster: 50,
                k,
                dim,
                separation: 20.0,
                spread: 1.0,
                seed: 7,
            }
            .generate()
            .unwrap();
            let c = &blobs.centers;
            for i in 0..k {
                for j in (i + 1)..k {
                    let dist = (&c.row(i) - &c.row(j)).mapv(|v| v * v).sum().sqrt();
                    assert!(dist >= 20.0, "centers {i},{j} only {dist} apart");
                }
            }
        }
    }

    #[test]
    fn zero_spread_single_point_is_its_center() {
        let blobs = BlobSpec {
            n_per_cluster: 1,
            k: 1,
            dim: 1,
            separation: 1.0,
            spread: 0.0,
            seed: 0,
        }
        .generate()
        .unwrap();
        assert_eq!(blobs.data.values()[[0, 0]], blobs.centers[[0, 0]]);
    }

    #[test]
    fn standardize_gives_unit_columns() {
        let m = DataMatrix::new(array![[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]]).unwrap();
        let s = m.standardized();
        let col0 = s.values().column(0).to_vec();
        assert!((col0.iter().sum::<f64>()).abs() < 1e-12);
        assert!((col0.iter().map(|v| v * v).sum::<f64>() / 3.0 - 1.0).abs() < 1e-12);
        assert!(s.values().column(1).iter().all(|v| *v == 0.0));
    }
}
