//! Ordinary least squares and ridge regression solved by normal equations
//! with a Cholesky factorization. The ridge penalty leaves the intercept
//! unpenalized.

use crate::error::{Error, Result};
use crate::ingest::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x.iter())
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.intercept
    }
}

/// Solve the symmetric positive-definite system `a x = b` in place via
/// Cholesky. A non-positive pivot reports rank deficiency.
fn cholesky_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = a.len();
    let scale = (0..n)
        .map(|i| a[i][i].abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            if i == j {
                if s <= scale * 1e-12 {
                    return Err(Error::Singular(format!(
                        "rank deficiency detected at pivot {i}"
                    )));
                }
                a[i][j] = s.sqrt();
            } else {
                a[i][j] = s / a[j][j];
            }
        }
    }
    // Forward substitution L y = b.
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    // Back substitution L^T x = y.
    for i in (0..n).rev() {
        for k in i + 1..n {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    Ok(b)
}

fn normal_equations(train: &Dataset, lambda: f64) -> Result<LinearModel> {
    let n = train.len();
    let d = train.dim();
    let p = d + 1; // intercept last
    if p > n {
        return Err(Error::InvalidArgument(format!(
            "{p} coefficients but only {n} rows"
        )));
    }

    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for (row, &y) in train.rows.iter().zip(train.targets.iter()) {
        let aug = |i: usize| if i < d { row[i] } else { 1.0 };
        for i in 0..p {
            for j in 0..=i {
                a[i][j] += aug(i) * aug(j);
            }
            b[i] += aug(i) * y;
        }
    }
    for i in 0..p {
        for j in i + 1..p {
            a[i][j] = a[j][i];
        }
    }
    for i in 0..d {
        a[i][i] += lambda; // slopes only; the intercept stays unpenalized
    }

    let mut solution = cholesky_solve(a, b)?;
    let intercept = solution.pop().unwrap();
    Ok(LinearModel {
        weights: solution,
        intercept,
    })
}

/// Ordinary least squares. Errors with a rank-deficiency report when the
/// normal equations are singular.
pub fn ols_regress(train: &Dataset) -> Result<LinearModel> {
    normal_equations(train, 0.0)
}

/// Ridge regression with penalty `lambda >= 0` on the slopes.
pub fn ridge_regress(train: &Dataset, lambda: f64) -> Result<LinearModel> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    normal_equations(train, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn dataset(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Dataset {
        let d = rows[0].len();
        Dataset::new(
            rows,
            targets,
            None,
            (0..d).map(|i| format!("x{i}")).collect(),
        )
        .unwrap()
    }

    fn random_dataset(seed: u64, n: usize, d: usize) -> Dataset {
        let mut rng = crate::rng::rng_from(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
            .collect();
        let targets = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(j, v)| (j as f64 + 1.0) * v)
                    .sum::<f64>()
                    + 0.05 * (rng.random::<f64>() - 0.5)
            })
            .collect();
        dataset(rows, targets)
    }

    #[test]
    fn exact_line_is_interpolated() {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x[0] + 1.0).collect();
        let model = ols_regress(&dataset(xs, ys)).unwrap();
        assert!((model.weights[0] - 3.0).abs() < 1e-9);
        assert!((model.intercept - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ridge_zero_equals_ols() {
        let ds = random_dataset(3, 50, 3);
        let ols = ols_regress(&ds).unwrap();
        let ridge = ridge_regress(&ds, 0.0).unwrap();
        for (a, b) in ols.weights.iter().zip(ridge.weights.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!((ols.intercept - ridge.intercept).abs() < 1e-8);
    }

    #[test]
    fn ridge_shrinks_monotonically() {
        let ds = random_dataset(11, 40, 1);
        let mut prev = f64::INFINITY;
        for lambda in [0.0, 0.1, 1.0, 10.0, 100.0, 1000.0] {
            let m = ridge_regress(&ds, lambda).unwrap();
            let slope = m.weights[0].abs();
            assert!(
                slope <= prev + 1e-12,
                "slope grew at lambda={lambda}: {slope} > {prev}"
            );
            prev = slope;
        }
        let heavy = ridge_regress(&ds, 1e9).unwrap();
        assert!(heavy.weights[0].abs() < 1e-4);
    }

    #[test]
    fn singular_system_reports_rank_deficiency() {
        // Duplicate column: x1 = x0.
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, i as f64]).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        assert!(matches!(
            ols_regress(&dataset(rows, ys)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn more_columns_than_rows_rejected() {
        let ds = dataset(vec![vec![1.0, 2.0, 3.0]], vec![1.0]);
        assert!(ols_regress(&ds).is_err());
        assert!(ridge_regress(&ds, -1.0).is_err());
    }
}
