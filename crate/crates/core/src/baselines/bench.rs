//! Benchmark harness: trains every baseline plus the proposed pipeline on a
//! train split, evaluates on the test split, and shapes the results into the
//! numeric and categorical tables (Markdown, CSV, JSON renderings).

use serde::{Deserialize, Serialize};

use super::{
    bernoulli_nb, evaluate_classification, evaluate_regression, gaussian_nb, knn_regress,
    linear_svm, ols_regress, ridge_regress, tree_classify, tree_regress, Distance,
};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::ingest::{split, Dataset};
use crate::pipeline::{split_seed, train_pipeline, TrainedModel};

pub const REGRESSION_COLUMNS: [&str; 3] = [
    "Techniques applied",
    "Statistical analysis",
    "Estimation error",
];
pub const CLASSIFICATION_COLUMNS: [&str; 3] = ["Techniques applied", "Precision value", "Accuracy"];

/// Outcome of one technique row: its two metric values, or the error that
/// kept it out of the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RowOutcome {
    Metrics { values: [f64; 2] },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub technique: String,
    pub outcome: RowOutcome,
}

impl BenchRow {
    pub fn metrics(technique: &str, first: f64, second: f64) -> BenchRow {
        BenchRow {
            technique: technique.to_string(),
            outcome: RowOutcome::Metrics {
                values: [first, second],
            },
        }
    }

    pub fn failed(technique: &str, error: String) -> BenchRow {
        BenchRow {
            technique: technique.to_string(),
            outcome: RowOutcome::Failed { error },
        }
    }

    fn from_result(technique: &str, result: Result<(f64, f64)>) -> BenchRow {
        match result {
            Ok((a, b)) => BenchRow::metrics(technique, a, b),
            Err(e) => BenchRow::failed(technique, e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub regression: Vec<BenchRow>,
    pub classification: Option<Vec<BenchRow>>,
    pub notes: Vec<String>,
}

fn render_markdown_table(columns: &[&str; 3], rows: &[BenchRow], out: &mut String) {
    out.push_str(&format!(
        "| {} | {} | {} |\n",
        columns[0], columns[1], columns[2]
    ));
    out.push_str("| --- | --- | --- |\n");
    for row in rows {
        match &row.outcome {
            RowOutcome::Metrics { values } => {
                out.push_str(&format!(
                    "| {} | {} | {} |\n",
                    row.technique, values[0], values[1]
                ));
            }
            RowOutcome::Failed { .. } => {
                out.push_str(&format!("| {} | — | — |\n", row.technique));
            }
        }
    }
    for row in rows {
        if let RowOutcome::Failed { error } = &row.outcome {
            out.push_str(&format!("- {} failed: {}\n", row.technique, error));
        }
    }
}

fn render_csv_table(columns: &[&str; 3], rows: &[BenchRow], out: &mut String) {
    out.push_str(&format!("{},{},{}\n", columns[0], columns[1], columns[2]));
    for row in rows {
        match &row.outcome {
            RowOutcome::Metrics { values } => {
                out.push_str(&format!("{},{},{}\n", row.technique, values[0], values[1]));
            }
            RowOutcome::Failed { error } => {
                out.push_str(&format!(
                    "{},,\n# {} failed: {}\n",
                    row.technique, row.technique, error
                ));
            }
        }
    }
}

impl BenchReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Benchmark report\n\n## Numerical prediction\n\n");
        render_markdown_table(&REGRESSION_COLUMNS, &self.regression, &mut out);
        out.push_str("\n## Categorical prediction\n\n");
        match &self.classification {
            Some(rows) => render_markdown_table(&CLASSIFICATION_COLUMNS, rows, &mut out),
            None => out.push_str("categorical table omitted: dataset has no label column\n"),
        }
        if !self.notes.is_empty() {
            out.push_str("\n## Notes\n\n");
            for n in &self.notes {
                out.push_str(&format!("- {n}\n"));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        render_csv_table(&REGRESSION_COLUMNS, &self.regression, &mut out);
        out.push('\n');
        match &self.classification {
            Some(rows) => render_csv_table(&CLASSIFICATION_COLUMNS, rows, &mut out),
            None => out.push_str("# categorical table omitted: dataset has no label column\n"),
        }
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn regression_pair(pred: Vec<f64>, truth: &[f64]) -> Result<(f64, f64)> {
    let m = evaluate_regression(&pred, truth)?;
    Ok((m.score, m.estimation_error))
}

fn classification_pair(pred: Vec<String>, truth: &[String]) -> Result<(f64, f64)> {
    let m = evaluate_classification(&pred, truth)?;
    Ok((m.precision, m.accuracy))
}

/// Run the full benchmark: every baseline plus the proposed pipeline, trained
/// on the train split and evaluated on the test split. A failing technique
/// produces an error-annotated row, never a crashed run.
pub fn bench(data: &Dataset, config: &PipelineConfig) -> Result<BenchReport> {
    config.validate()?;
    let (train, test) = split(data, config.bench.test_fraction, split_seed(config))?;
    let b = &config.bench;
    let mut notes = Vec::new();

    // The proposed pipeline is shared by the regression row and (for binary
    // tasks) the categorical extension row. The error is stringified so both
    // rows can report it.
    let proposed: std::result::Result<TrainedModel, String> =
        train_pipeline(&train, config).map_err(|e| e.to_string());

    let knn_metric: Distance = b.knn_metric.parse()?;
    let knn_k = b.knn_k.min(train.len());

    let regression = vec![
        BenchRow::from_result("Decision tree", {
            tree_regress(&train, b.tree_max_depth, b.tree_min_leaf).and_then(|tree| {
                regression_pair(
                    test.rows.iter().map(|r| tree.predict(r)).collect(),
                    &test.targets,
                )
            })
        }),
        BenchRow::from_result("KNN", {
            test.rows
                .iter()
                .map(|r| knn_regress(&train, r, knn_k, knn_metric))
                .collect::<Result<Vec<f64>>>()
                .and_then(|pred| regression_pair(pred, &test.targets))
        }),
        BenchRow::from_result("Ridge", {
            ridge_regress(&train, b.ridge_lambda).and_then(|m| {
                regression_pair(
                    test.rows.iter().map(|r| m.predict(r)).collect(),
                    &test.targets,
                )
            })
        }),
        BenchRow::from_result("Linear Regression", {
            ols_regress(&train).and_then(|m| {
                regression_pair(
                    test.rows.iter().map(|r| m.predict(r)).collect(),
                    &test.targets,
                )
            })
        }),
        BenchRow::from_result(
            "Proposed MLDM",
            match &proposed {
                Ok(model) => test
                    .rows
                    .iter()
                    .map(|r| model.predict(r))
                    .collect::<Result<Vec<f64>>>()
                    .and_then(|pred| regression_pair(pred, &test.targets)),
                Err(e) => Err(crate::error::Error::Config(e.clone())),
            },
        ),
    ];

    let classification = if let Some(test_labels) = test.labels.clone() {
        let mut rows = vec![
            BenchRow::from_result("Gaussiandistribution", {
                gaussian_nb(&train).and_then(|nb| {
                    classification_pair(
                        test.rows
                            .iter()
                            .map(|r| nb.predict(r).to_string())
                            .collect(),
                        &test_labels,
                    )
                })
            }),
            BenchRow::from_result("Bernoulis approximation", {
                bernoulli_nb(&train, b.binarize_threshold).and_then(|nb| {
                    classification_pair(
                        test.rows
                            .iter()
                            .map(|r| nb.predict(r).to_string())
                            .collect(),
                        &test_labels,
                    )
                })
            }),
            BenchRow::from_result("Decision tree", {
                tree_classify(&train, b.tree_max_depth, b.tree_min_leaf).and_then(|tree| {
                    classification_pair(
                        test.rows
                            .iter()
                            .map(|r| tree.predict(r).to_string())
                            .collect(),
                        &test_labels,
                    )
                })
            }),
            BenchRow::from_result("Support vector machine (SVM)", {
                linear_svm(&train, b.svm_lr, b.svm_epochs, b.svm_c).and_then(|svm| {
                    classification_pair(
                        test.rows
                            .iter()
                            .map(|r| svm.predict(r).to_string())
                            .collect(),
                        &test_labels,
                    )
                })
            }),
        ];

        // Extension row: the proposed model thresholds its decision value at
        // zero for binary tasks (not part of the original table shape).
        let mut classes: Vec<String> = train
            .labels
            .iter()
            .flatten()
            .chain(test_labels.iter())
            .cloned()
            .collect();
        classes.sort();
        classes.dedup();
        if classes.len() == 2 {
            rows.push(BenchRow::from_result(
                "Proposed MLDM (extension)",
                match &proposed {
                    Ok(model) => test
                        .rows
                        .iter()
                        .map(|r| {
                            model.decision_value(r).map(|dv| {
                                if dv > 0.0 {
                                    classes[1].clone()
                                } else {
                                    classes[0].clone()
                                }
                            })
                        })
                        .collect::<Result<Vec<String>>>()
                        .and_then(|pred| classification_pair(pred, &test_labels)),
                    Err(e) => Err(crate::error::Error::Config(e.clone())),
                },
            ));
            notes.push(
                "Proposed MLDM (extension): decision value thresholded at 0 for the binary task"
                    .to_string(),
            );
        } else {
            notes.push(format!(
                "proposed-method categorical row needs a binary task; found {} classes",
                classes.len()
            ));
        }
        Some(rows)
    } else {
        notes.push("categorical table omitted: dataset has no label column".to_string());
        None
    };

    Ok(BenchReport {
        regression,
        classification,
        notes,
    })
}
