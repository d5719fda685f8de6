//! Reference models and metrics for the benchmark harness: k-nearest
//! neighbors, linear/ridge regression, CART trees, naive Bayes, a linear SVM,
//! and the report shaping them into the numeric/categorical tables.

mod bench;
mod knn;
mod linear;
mod metrics;
mod naive_bayes;
mod svm;
mod tree;

pub use bench::{bench, BenchReport, BenchRow, RowOutcome};
pub use knn::knn_regress;
pub use linear::{ols_regress, ridge_regress, LinearModel};
pub use metrics::{
    evaluate_classification, evaluate_regression, ClassificationMetrics, RegressionMetrics,
};
pub use naive_bayes::{bernoulli_nb, gaussian_nb, BernoulliNb, GaussianNb};
pub use svm::{linear_svm, LinearSvm};
pub use tree::{tree_classify, tree_regress, ClassificationTree, RegressionTree};

use crate::error::{Error, Result};

/// Default Minkowski exponent when none is specified (distinct from the
/// p=1 / p=2 reductions).
pub const DEFAULT_MINKOWSKI_P: f64 = 3.0;

/// Distance metric for the neighborhood models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Euclidean,
    Manhattan,
    Minkowski(f64),
}

impl Distance {
    pub fn validate(&self) -> Result<()> {
        if let Distance::Minkowski(p) = self {
            if !p.is_finite() || *p < 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "Minkowski exponent must be >= 1, got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Distance between two equal-length vectors. Minkowski with p = 1 or
    /// p = 2 takes the Manhattan / Euclidean path so the reductions are
    /// exact, not merely close.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Distance::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Distance::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Distance::Minkowski(p) if *p == 2.0 => Distance::Euclidean.eval(a, b),
            Distance::Minkowski(p) if *p == 1.0 => Distance::Manhattan.eval(a, b),
            Distance::Minkowski(p) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs().powf(*p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }
}

impl std::str::FromStr for Distance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Distance::Euclidean),
            "manhattan" => Ok(Distance::Manhattan),
            "minkowski" => Ok(Distance::Minkowski(DEFAULT_MINKOWSKI_P)),
            other => {
                if let Some(p) = other.strip_prefix("minkowski:") {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::Config(format!("bad Minkowski exponent '{p}'")))?;
                    let d = Distance::Minkowski(p);
                    d.validate()?;
                    Ok(d)
                } else {
                    Err(Error::Config(format!(
                        "unknown distance '{other}' (expected euclidean|manhattan|minkowski[:p])"
                    )))
                }
            }
        }
    }
}

#[cfg(test)]
mod distance_tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn minkowski_reductions_are_exact(
            a in proptest::collection::vec(-100.0f64..100.0, 1..6),
            off in proptest::collection::vec(-100.0f64..100.0, 6),
        ) {
            let b: Vec<f64> = a.iter().zip(off.iter()).map(|(x, o)| x + o).collect();
            prop_assert_eq!(
                Distance::Minkowski(2.0).eval(&a, &b),
                Distance::Euclidean.eval(&a, &b)
            );
            prop_assert_eq!(
                Distance::Minkowski(1.0).eval(&a, &b),
                Distance::Manhattan.eval(&a, &b)
            );
        }
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!(
            "euclidean".parse::<Distance>().unwrap(),
            Distance::Euclidean
        );
        assert_eq!(
            "minkowski".parse::<Distance>().unwrap(),
            Distance::Minkowski(3.0)
        );
        assert_eq!(
            "minkowski:4".parse::<Distance>().unwrap(),
            Distance::Minkowski(4.0)
        );
        assert!("minkowski:0.5".parse::<Distance>().is_err());
        assert!(Distance::Minkowski(0.5).validate().is_err());
    }
}
