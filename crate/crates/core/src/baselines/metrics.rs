//! Evaluation metrics behind the benchmark tables: the coefficient of
//! determination and RMSE for regression, macro precision and accuracy for
//! classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    /// Coefficient of determination: 1 - SS_res / SS_tot. At most 1; negative
    /// when the fit is worse than predicting the mean.
    pub score: f64,
    /// Root mean squared error.
    pub estimation_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    /// Macro-averaged precision; classes never predicted contribute 0.
    pub precision: f64,
    pub accuracy: f64,
}

pub fn evaluate_regression(pred: &[f64], truth: &[f64]) -> Result<RegressionMetrics> {
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_res: f64 = pred
        .iter()
        .zip(truth.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    let score = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            return Err(Error::ConstantOutput(0));
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(RegressionMetrics {
        score,
        estimation_error: (ss_res / n).sqrt(),
    })
}

pub fn evaluate_classification(pred: &[String], truth: &[String]) -> Result<ClassificationMetrics> {
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    let mut classes: Vec<&String> = truth.iter().chain(pred.iter()).collect();
    classes.sort();
    classes.dedup();

    let mut precision_sum = 0.0;
    for class in &classes {
        let predicted = pred.iter().filter(|p| p == class).count();
        if predicted == 0 {
            continue; // never predicted: contributes 0
        }
        let tp = pred
            .iter()
            .zip(truth.iter())
            .filter(|(p, t)| p == class && t == class)
            .count();
        precision_sum += tp as f64 / predicted as f64;
    }
    let correct = pred
        .iter()
        .zip(truth.iter())
        .filter(|(p, t)| p == t)
        .count();
    Ok(ClassificationMetrics {
        precision: precision_sum / classes.len() as f64,
        accuracy: correct as f64 / pred.len() as f64,
    })
}
