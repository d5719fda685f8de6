//! Tabular ingestion: CSV loading, validation, z-score normalization, and
//! train/test splitting.
//!
//! [`NormParams`] owns the per-column mean and population standard deviation
//! used both to normalize features and to compute decision values from model
//! outputs, so the statistics survive the whole pipeline.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Column roles for [`load_csv`]: exactly one target column, at most one
/// categorical label column; every other column is a feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub target: String,
    pub label: Option<String>,
}

/// A validated in-memory table: fixed-dimension feature rows, one numeric
/// target per row, and an optional categorical label per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub labels: Option<Vec<String>>,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub label_name: Option<String>,
}

impl Dataset {
    /// Build a dataset from parts, enforcing the structural invariants:
    /// equal row dimensions, matching lengths, and finite values.
    pub fn new(
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
        labels: Option<Vec<String>>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let ds = Dataset {
            rows,
            targets,
            labels,
            feature_names,
            target_name: "target".to_string(),
            label_name: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Feature dimension d.
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::EmptyDataset("no data rows".into()));
        }
        let d = self.rows[0].len();
        if d == 0 {
            return Err(Error::EmptyDataset("rows have no features".into()));
        }
        if self.feature_names.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: self.feature_names.len(),
            });
        }
        if self.targets.len() != self.rows.len() {
            return Err(Error::DimMismatch {
                expected: self.rows.len(),
                got: self.targets.len(),
            });
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.rows.len() {
                return Err(Error::DimMismatch {
                    expected: self.rows.len(),
                    got: labels.len(),
                });
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidCell {
                        row: i + 1,
                        column: self.feature_names[j].clone(),
                        msg: format!("non-finite value {v}"),
                    });
                }
            }
            if !self.targets[i].is_finite() {
                return Err(Error::InvalidCell {
                    row: i + 1,
                    column: self.target_name.clone(),
                    msg: format!("non-finite value {}", self.targets[i]),
                });
            }
        }
        Ok(())
    }

    /// Subset of rows by index, preserving the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            label_name: self.label_name.clone(),
        }
    }
}

/// Per-column mean and population standard deviation. Columns whose delta is
/// zero are flagged constant and passed through normalization unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub mean: Vec<f64>,
    pub delta: Vec<f64>,
    pub constant: Vec<bool>,
}

impl NormParams {
    /// Fit mean and population (divide-by-n) standard deviation per column.
    pub fn fit_columns(columns: &[Vec<f64>]) -> NormParams {
        let mut mean = Vec::with_capacity(columns.len());
        let mut delta = Vec::with_capacity(columns.len());
        let mut constant = Vec::with_capacity(columns.len());
        for col in columns {
            let n = col.len() as f64;
            let m = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let d = var.sqrt();
            mean.push(m);
            delta.push(d);
            constant.push(d == 0.0);
        }
        NormParams {
            mean,
            delta,
            constant,
        }
    }

    /// Fit on the feature columns of a dataset.
    pub fn fit_features(data: &Dataset) -> NormParams {
        let d = data.dim();
        let mut columns = vec![Vec::with_capacity(data.len()); d];
        for row in &data.rows {
            for (j, v) in row.iter().enumerate() {
                columns[j].push(*v);
            }
        }
        NormParams::fit_columns(&columns)
    }

    /// Fit on a single value series (e.g. the training targets).
    pub fn fit_values(values: &[f64]) -> NormParams {
        NormParams::fit_columns(std::slice::from_ref(&values.to_vec()))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Z-score one vector in place. Constant columns pass through unchanged.
    pub fn apply(&self, row: &mut [f64]) -> Result<()> {
        if row.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: row.len(),
            });
        }
        for (j, v) in row.iter_mut().enumerate() {
            if !self.constant[j] {
                *v = (*v - self.mean[j]) / self.delta[j];
            }
        }
        Ok(())
    }

    /// Inverse of [`NormParams::apply`].
    pub fn invert(&self, row: &mut [f64]) -> Result<()> {
        if row.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: row.len(),
            });
        }
        for (j, v) in row.iter_mut().enumerate() {
            if !self.constant[j] {
                *v = *v * self.delta[j] + self.mean[j];
            }
        }
        Ok(())
    }

    /// Normalize a scalar against column `k`.
    pub fn apply_scalar(&self, x: f64, k: usize) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::InvalidArgument(format!(
                "column index {k} out of range for {} columns",
                self.dim()
            )));
        }
        if self.delta[k] == 0.0 {
            return Err(Error::ConstantOutput(k));
        }
        Ok((x - self.mean[k]) / self.delta[k])
    }

    /// Inverse of [`NormParams::apply_scalar`].
    pub fn invert_scalar(&self, x: f64, k: usize) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::InvalidArgument(format!(
                "column index {k} out of range for {} columns",
                self.dim()
            )));
        }
        if self.constant[k] {
            return Ok(x);
        }
        Ok(x * self.delta[k] + self.mean[k])
    }
}

/// Load and validate a CSV file. Header row is required; `schema` names the
/// target column and optionally a label column, every other column becomes a
/// feature in file order. Row order is preserved.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => Error::Csv {
                path: path.to_path_buf(),
                msg: e.to_string(),
            },
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();

    let target_idx = headers
        .iter()
        .position(|h| h == &schema.target)
        .ok_or_else(|| Error::Config(format!("target column '{}' not in header", schema.target)))?;
    let label_idx = match &schema.label {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Config(format!("label column '{name}' not in header")))?,
        ),
        None => None,
    };
    if label_idx == Some(target_idx) {
        return Err(Error::Config(
            "target and label name the same column".into(),
        ));
    }

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|i| *i != target_idx && Some(*i) != label_idx)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::EmptyDataset("no feature columns left".into()));
    }
    let feature_names: Vec<String> = feature_cols.iter().map(|&i| headers[i].clone()).collect();

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut labels = label_idx.map(|_| Vec::new());

    for (i, record) in reader.records().enumerate() {
        let row_no = i + 1; // 1-based data row for error messages
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            msg: format!("data row {row_no}: {e}"),
        })?;
        let parse = |col: usize| -> Result<f64> {
            let cell = record.get(col).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| Error::InvalidCell {
                row: row_no,
                column: headers[col].clone(),
                msg: format!("cannot parse '{cell}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidCell {
                    row: row_no,
                    column: headers[col].clone(),
                    msg: format!("non-finite value '{cell}'"),
                });
            }
            Ok(v)
        };
        let mut row = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            row.push(parse(c)?);
        }
        rows.push(row);
        targets.push(parse(target_idx)?);
        if let (Some(ls), Some(li)) = (&mut labels, label_idx) {
            ls.push(record.get(li).unwrap_or("").trim().to_string());
        }
    }

    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} has a header but no data rows",
            path.display()
        )));
    }

    let mut ds = Dataset::new(rows, targets, labels, feature_names)?;
    ds.target_name = schema.target.clone();
    ds.label_name = schema.label.clone();
    Ok(ds)
}

/// Load feature rows from a CSV by column name: the file must contain every
/// column in `feature_names` (extra columns, e.g. targets or labels, are
/// ignored). Rows come back in `feature_names` order.
pub fn load_feature_csv(path: &Path, feature_names: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => Error::Csv {
                path: path.to_path_buf(),
                msg: e.to_string(),
            },
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    let mut cols = Vec::with_capacity(feature_names.len());
    for name in feature_names {
        let idx = headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!(
                "alternatives file is missing feature column '{name}'"
            ))
        })?;
        cols.push(idx);
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            msg: format!("data row {}: {e}", i + 1),
        })?;
        let mut row = Vec::with_capacity(cols.len());
        for (&c, name) in cols.iter().zip(feature_names.iter()) {
            let cell = record.get(c).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| Error::InvalidCell {
                row: i + 1,
                column: name.clone(),
                msg: format!("cannot parse '{cell}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidCell {
                    row: i + 1,
                    column: name.clone(),
                    msg: format!("non-finite value '{cell}'"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} has a header but no data rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// Z-score the feature columns. Non-constant features come out with sample
/// mean 0 and standard deviation 1; constant features pass through and are
/// flagged in the returned [`NormParams`].
pub fn zscore_normalize(data: &Dataset) -> Result<(Dataset, NormParams)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("cannot normalize".into()));
    }
    let params = NormParams::fit_features(data);
    let mut out = data.clone();
    for row in &mut out.rows {
        params.apply(row)?;
    }
    Ok((out, params))
}

/// Undo [`zscore_normalize`] on a dataset.
pub fn denormalize(data: &Dataset, params: &NormParams) -> Result<Dataset> {
    let mut out = data.clone();
    for row in &mut out.rows {
        params.invert(row)?;
    }
    Ok(out)
}

/// Deterministic seeded split into disjoint train/test partitions whose union
/// is the input; row order within each partition follows the input order.
pub fn split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction must be in (0,1), got {test_fraction}"
        )));
    }
    let n = data.len();
    let n_test = ((n as f64) * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::InvalidArgument(format!(
            "test_fraction {test_fraction} leaves an empty partition for {n} rows"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng_from(seed));
    let test_set: HashSet<usize> = indices[..n_test].iter().copied().collect();
    let mut train_idx = Vec::with_capacity(n - n_test);
    let mut test_idx = Vec::with_capacity(n_test);
    for i in 0..n {
        if test_set.contains(&i) {
            test_idx.push(i);
        } else {
            train_idx.push(i);
        }
    }
    Ok((data.select(&train_idx), data.select(&test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn schema(target: &str) -> CsvSchema {
        CsvSchema {
            target: target.into(),
            label: None,
        }
    }

    fn toy(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Dataset {
        let d = rows[0].len();
        let names = (0..d).map(|i| format!("x{i}")).collect();
        Dataset::new(rows, targets, None, names).unwrap()
    }

    #[test]
    fn load_csv_three_rows() {
        let f = write_csv("x1,x2,y\n1,2,3\n4,5,6\n7,8,9\n");
        let ds = load_csv(f.path(), &schema("y")).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.rows[1], vec![4.0, 5.0]);
        assert_eq!(ds.targets, vec![3.0, 6.0, 9.0]);
        assert_eq!(ds.feature_names, vec!["x1", "x2"]);
    }

    #[test]
    fn load_csv_preserves_row_order() {
        let f = write_csv("x,y\n9,1\n3,2\n5,3\n1,4\n");
        let ds = load_csv(f.path(), &schema("y")).unwrap();
        assert_eq!(
            ds.rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
            vec![9.0, 3.0, 5.0, 1.0]
        );
    }

    #[test]
    fn load_csv_bad_target_cell_names_row_and_column() {
        let f = write_csv("x,y\n1,2\n3,abc\n");
        let err = load_csv(f.path(), &schema("y")).unwrap_err();
        match err {
            Error::InvalidCell { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "y");
            }
            other => panic!("expected InvalidCell, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_empty_file_errors() {
        let f = write_csv("x,y\n");
        assert!(matches!(
            load_csv(f.path(), &schema("y")),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn load_csv_missing_file_errors() {
        let err = load_csv(Path::new("/nonexistent/file.csv"), &schema("y")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn load_csv_ragged_row_errors() {
        let f = write_csv("x,y\n1,2\n3\n");
        assert!(matches!(
            load_csv(f.path(), &schema("y")),
            Err(Error::Csv { .. })
        ));
    }

    #[test]
    fn load_csv_rejects_nan_cells() {
        let f = write_csv("x,y\nNaN,2\n");
        assert!(matches!(
            load_csv(f.path(), &schema("y")),
            Err(Error::InvalidCell { .. })
        ));
    }

    #[test]
    fn load_csv_with_label_column() {
        let f = write_csv("x,y,cls\n1,2,a\n3,4,b\n");
        let ds = load_csv(
            f.path(),
            &CsvSchema {
                target: "y".into(),
                label: Some("cls".into()),
            },
        )
        .unwrap();
        assert_eq!(ds.dim(), 1);
        assert_eq!(
            ds.labels.as_deref(),
            Some(&["a".to_string(), "b".into()][..])
        );
    }

    #[test]
    fn load_feature_csv_selects_named_columns() {
        let f = write_csv("x1,y,x0\n10,99,1\n20,99,2\n");
        let rows = load_feature_csv(f.path(), &["x0".into(), "x1".into()]).unwrap();
        assert_eq!(rows, vec![vec![1.0, 10.0], vec![2.0, 20.0]]);
        let err = load_feature_csv(f.path(), &["x0".into(), "nope".into()]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn zscore_hand_values() {
        // column [2,4,6]: mean 4, population delta sqrt(8/3) = 1.63299...
        let ds = toy(vec![vec![2.0], vec![4.0], vec![6.0]], vec![0.0; 3]);
        let (norm, params) = zscore_normalize(&ds).unwrap();
        assert!((params.mean[0] - 4.0).abs() < 1e-12);
        assert!((params.delta[0] - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let expect = 1.224744871391589;
        assert!((norm.rows[0][0] + expect).abs() < 1e-9);
        assert!(norm.rows[1][0].abs() < 1e-9);
        assert!((norm.rows[2][0] - expect).abs() < 1e-9);
    }

    #[test]
    fn zscore_constant_column_passes_through() {
        let ds = toy(vec![vec![5.0], vec![5.0], vec![5.0]], vec![0.0; 3]);
        let (norm, params) = zscore_normalize(&ds).unwrap();
        assert!(params.constant[0]);
        assert_eq!(norm.rows, ds.rows);
    }

    #[test]
    fn zscore_idempotent_on_normalized_input() {
        let ds = toy(vec![vec![-1.0], vec![0.0], vec![1.0]], vec![0.0; 3]);
        let (_, params) = zscore_normalize(&ds).unwrap();
        assert!(params.mean[0].abs() < 1e-12);
        let expected_delta = (2.0f64 / 3.0).sqrt();
        assert!((params.delta[0] - expected_delta).abs() < 1e-12);
        // A column that is already mean-0/delta-1 comes back unchanged.
        let unit = toy(
            vec![vec![-(1.5f64).sqrt()], vec![0.0], vec![(1.5f64).sqrt()]],
            vec![0.0; 3],
        );
        let (norm, p) = zscore_normalize(&unit).unwrap();
        assert!(p.mean[0].abs() < 1e-12);
        assert!((p.delta[0] - 1.0).abs() < 1e-12);
        for (a, b) in norm.rows.iter().zip(unit.rows.iter()) {
            assert!((a[0] - b[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_denormalize_round_trip() {
        let ds = toy(
            vec![vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 33.0]],
            vec![0.0; 3],
        );
        let (norm, params) = zscore_normalize(&ds).unwrap();
        let back = denormalize(&norm, &params).unwrap();
        for (a, b) in back.rows.iter().zip(ds.rows.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let ds = toy((0..10).map(|i| vec![i as f64]).collect(), vec![0.0; 10]);
        let (tr1, te1) = split(&ds, 0.2, 7).unwrap();
        let (tr2, te2) = split(&ds, 0.2, 7).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        assert_eq!(tr1.len(), 8);
        assert_eq!(te1.len(), 2);
        let mut all: Vec<f64> = tr1
            .rows
            .iter()
            .chain(te1.rows.iter())
            .map(|r| r[0])
            .collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let ds = toy((0..10).map(|i| vec![i as f64]).collect(), vec![0.0; 10]);
        assert!(split(&ds, 0.0, 1).is_err());
        assert!(split(&ds, 1.0, 1).is_err());
        assert!(split(&ds, 0.01, 1).is_err()); // rounds to an empty test side
    }

    #[test]
    fn split_half_is_disjoint_and_exhaustive() {
        let ds = toy((0..10).map(|i| vec![i as f64]).collect(), vec![0.0; 10]);
        let (tr, te) = split(&ds, 0.5, 3).unwrap();
        assert_eq!(tr.len() + te.len(), 10);
        let tr_vals: HashSet<u64> = tr.rows.iter().map(|r| r[0] as u64).collect();
        let te_vals: HashSet<u64> = te.rows.iter().map(|r| r[0] as u64).collect();
        assert!(tr_vals.is_disjoint(&te_vals));
        assert_eq!(tr_vals.len() + te_vals.len(), 10);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalize_denormalize_round_trips(
                rows in proptest::collection::vec(
                    proptest::collection::vec(-1.0e4f64..1.0e4, 3), 1..40),
            ) {
                let targets = vec![0.0; rows.len()];
                let ds = toy(rows, targets);
                let (norm, params) = zscore_normalize(&ds).unwrap();
                // Non-constant columns come out with mean 0, delta 1.
                let stats = NormParams::fit_features(&norm);
                for j in 0..norm.dim() {
                    if !params.constant[j] {
                        prop_assert!(stats.mean[j].abs() < 1e-9);
                        prop_assert!((stats.delta[j] - 1.0).abs() < 1e-9);
                    }
                }
                let back = denormalize(&norm, &params).unwrap();
                for (a, b) in back.rows.iter().zip(ds.rows.iter()) {
                    for (x, y) in a.iter().zip(b.iter()) {
                        prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
                    }
                }
            }

            #[test]
            fn split_partitions_for_all_fractions_and_seeds(
                n in 2usize..60,
                fraction in 0.05f64..0.95,
                seed in 0u64..1000,
            ) {
                let ds = toy((0..n).map(|i| vec![i as f64]).collect(), vec![0.0; n]);
                match split(&ds, fraction, seed) {
                    Err(_) => {
                        // Only legal when rounding empties one side.
                        let n_test = ((n as f64) * fraction).round() as usize;
                        prop_assert!(n_test == 0 || n_test == n);
                    }
                    Ok((tr, te)) => {
                        let mut all: Vec<u64> = tr.rows.iter().chain(te.rows.iter())
                            .map(|r| r[0] as u64).collect();
                        all.sort_unstable();
                        prop_assert_eq!(all, (0..n as u64).collect::<Vec<_>>());
                    }
                }
            }
        }
    }
}
