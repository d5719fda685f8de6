//! Gaussian and Bernoulli naive Bayes with log-space posteriors. Gaussian
//! likelihoods carry a variance floor; Bernoulli bit probabilities are
//! Laplace-smoothed after thresholding.

use crate::error::{Error, Result};
use crate::ingest::Dataset;

const VARIANCE_FLOOR: f64 = 1e-9;

fn sorted_classes(train: &Dataset) -> Result<(Vec<String>, &[String])> {
    let labels = train
        .labels
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("dataset has no label column".into()))?;
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 classes, got {}",
            classes.len()
        )));
    }
    Ok((classes, labels))
}

/// Argmax over per-class scores; ties go to the smallest class label, which
/// is the first index since classes are sorted.
fn argmax_class(scores: &[f64]) -> usize {
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    pub classes: Vec<String>,
    priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    vars: Vec<Vec<f64>>,
}

/// Fit per-class feature means/variances (population convention, floored).
pub fn gaussian_nb(train: &Dataset) -> Result<GaussianNb> {
    let (classes, labels) = sorted_classes(train)?;
    let d = train.dim();
    let n = train.len() as f64;

    let mut priors = Vec::with_capacity(classes.len());
    let mut means = Vec::with_capacity(classes.len());
    let mut vars = Vec::with_capacity(classes.len());
    for class in &classes {
        let members: Vec<usize> = (0..train.len()).filter(|&i| &labels[i] == class).collect();
        let nc = members.len() as f64;
        priors.push(nc / n);
        let mut mean = vec![0.0; d];
        for &i in &members {
            for (j, v) in train.rows[i].iter().enumerate() {
                mean[j] += v;
            }
        }
        for m in &mut mean {
            *m /= nc;
        }
        let mut var = vec![0.0; d];
        for &i in &members {
            for (j, v) in train.rows[i].iter().enumerate() {
                var[j] += (v - mean[j]) * (v - mean[j]);
            }
        }
        for v in &mut var {
            *v = (*v / nc).max(VARIANCE_FLOOR);
        }
        means.push(mean);
        vars.push(var);
    }
    Ok(GaussianNb {
        classes,
        priors,
        means,
        vars,
    })
}

impl GaussianNb {
    /// Unnormalized log posterior per class.
    pub fn log_posterior(&self, x: &[f64]) -> Vec<f64> {
        self.classes
            .iter()
            .enumerate()
            .map(|(c, _)| {
                let mut lp = self.priors[c].ln();
                for (j, &v) in x.iter().enumerate() {
                    let var = self.vars[c][j];
                    lp += -0.5 * (2.0 * std::f64::consts::PI * var).ln()
                        - (v - self.means[c][j]).powi(2) / (2.0 * var);
                }
                lp
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> &str {
        &self.classes[argmax_class(&self.log_posterior(x))]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliNb {
    pub classes: Vec<String>,
    priors: Vec<f64>,
    /// Laplace-smoothed probability of bit 1 per class and feature.
    probs: Vec<Vec<f64>>,
    threshold: f64,
}

/// Fit on features binarized at `binarize_threshold` (strictly greater means
/// bit 1), with add-one smoothing on the bit counts.
pub fn bernoulli_nb(train: &Dataset, binarize_threshold: f64) -> Result<BernoulliNb> {
    let (classes, labels) = sorted_classes(train)?;
    let d = train.dim();
    let n = train.len() as f64;

    let mut priors = Vec::with_capacity(classes.len());
    let mut probs = Vec::with_capacity(classes.len());
    for class in &classes {
        let members: Vec<usize> = (0..train.len()).filter(|&i| &labels[i] == class).collect();
        let nc = members.len() as f64;
        priors.push(nc / n);
        let mut p = vec![0.0; d];
        for &i in &members {
            for (j, v) in train.rows[i].iter().enumerate() {
                if *v > binarize_threshold {
                    p[j] += 1.0;
                }
            }
        }
        for v in &mut p {
            *v = (*v + 1.0) / (nc + 2.0);
        }
        probs.push(p);
    }
    Ok(BernoulliNb {
        classes,
        priors,
        probs,
        threshold: binarize_threshold,
    })
}

impl BernoulliNb {
    pub fn log_posterior(&self, x: &[f64]) -> Vec<f64> {
        self.classes
            .iter()
            .enumerate()
            .map(|(c, _)| {
                let mut lp = self.priors[c].ln();
                for (j, &v) in x.iter().enumerate() {
                    let p = self.probs[c][j];
                    lp += if v > self.threshold {
                        p.ln()
                    } else {
                        (1.0 - p).ln()
                    };
                }
                lp
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> &str {
        &self.classes[argmax_class(&self.log_posterior(x))]
    }
}
