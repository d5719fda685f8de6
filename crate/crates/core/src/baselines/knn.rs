//! k-nearest-neighbor regression: the mean target of the k nearest training
//! rows under the chosen distance.

use super::Distance;
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// Predict the query's target as the mean over its k nearest training rows.
/// Distance ties are broken by the lower row index.
pub fn knn_regress(train: &Dataset, query: &[f64], k: usize, metric: Distance) -> Result<f64> {
    metric.validate()?;
    if k < 1 || k > train.len() {
        return Err(Error::InvalidArgument(format!(
            "k must be in [1, {}], got {k}",
            train.len()
        )));
    }
    if query.len() != train.dim() {
        return Err(Error::DimMismatch {
            expected: train.dim(),
            got: query.len(),
        });
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    let dists: Vec<f64> = train
        .rows
        .iter()
        .map(|row| metric.eval(query, row))
        .collect();
    order.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(a.cmp(&b)));
    Ok(order[..k].iter().map(|&i| train.targets[i]).sum::<f64>() / k as f64)
}
