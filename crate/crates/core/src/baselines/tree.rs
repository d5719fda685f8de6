//! CART-style decision trees: greedy axis-aligned splits at midpoints between
//! sorted distinct feature values, variance reduction for regression and Gini
//! impurity for classification. Leaves predict the mean / majority class
//! (ties to the smallest class label).

use crate::error::{Error, Result};
use crate::ingest::Dataset;

#[derive(Debug, Clone, PartialEq)]
enum Node<L> {
    Leaf(L),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node<L>>,
        right: Box<Node<L>>,
    },
}

impl<L> Node<L> {
    fn descend(&self, x: &[f64]) -> &L {
        match self {
            Node::Leaf(l) => l,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.descend(x)
                } else {
                    right.descend(x)
                }
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Candidate split positions for one feature over the given rows: midpoints
/// between consecutive distinct sorted values.
fn candidate_thresholds(values: &mut Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

// ---------------------------------------------------------------------------
// Regression
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    root: Node<f64>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        *self.root.descend(x)
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

fn sse(targets: &[f64], members: &[usize]) -> f64 {
    let mean = members.iter().map(|&i| targets[i]).sum::<f64>() / members.len() as f64;
    members
        .iter()
        .map(|&i| (targets[i] - mean) * (targets[i] - mean))
        .sum()
}

/// Greedy variance-reduction tree.
pub fn tree_regress(train: &Dataset, max_depth: usize, min_leaf: usize) -> Result<RegressionTree> {
    if max_depth < 1 || min_leaf < 1 {
        return Err(Error::InvalidArgument(
            "max_depth and min_leaf must be >= 1".into(),
        ));
    }
    let members: Vec<usize> = (0..train.len()).collect();
    Ok(RegressionTree {
        root: grow_regression(train, members, max_depth, min_leaf),
    })
}

fn grow_regression(
    train: &Dataset,
    members: Vec<usize>,
    depth: usize,
    min_leaf: usize,
) -> Node<f64> {
    let mean = members.iter().map(|&i| train.targets[i]).sum::<f64>() / members.len() as f64;
    let parent_sse = sse(&train.targets, &members);
    if depth == 0 || parent_sse == 0.0 || members.len() < 2 * min_leaf {
        return Node::Leaf(mean);
    }

    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    for f in 0..train.dim() {
        let mut vals: Vec<f64> = members.iter().map(|&i| train.rows[i][f]).collect();
        for t in candidate_thresholds(&mut vals) {
            let left: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| train.rows[i][f] <= t)
                .collect();
            if left.len() < min_leaf || members.len() - left.len() < min_leaf {
                continue;
            }
            let right: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| train.rows[i][f] > t)
                .collect();
            let gain = parent_sse - sse(&train.targets, &left) - sse(&train.targets, &right);
            if best.as_ref().is_none_or(|(g, _, _)| gain > *g) {
                best = Some((gain, f, t));
            }
        }
    }

    match best {
        Some((gain, feature, threshold)) if gain > 0.0 => {
            let (left, right): (Vec<usize>, Vec<usize>) = members
                .into_iter()
                .partition(|&i| train.rows[i][feature] <= threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow_regression(train, left, depth - 1, min_leaf)),
                right: Box::new(grow_regression(train, right, depth - 1, min_leaf)),
            }
        }
        _ => Node::Leaf(mean),
    }
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationTree {
    root: Node<String>,
    pub classes: Vec<String>,
}

impl ClassificationTree {
    pub fn predict(&self, x: &[f64]) -> &str {
        self.root.descend(x)
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

fn class_counts(labels: &[String], members: &[usize], classes: &[String]) -> Vec<usize> {
    let mut counts = vec![0usize; classes.len()];
    for &i in members {
        let c = classes.iter().position(|c| c == &labels[i]).unwrap();
        counts[c] += 1;
    }
    counts
}

fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

/// Majority class; ties go to the smallest class label (classes are sorted).
fn majority(counts: &[usize], classes: &[String]) -> String {
    let mut best = 0;
    for (c, &count) in counts.iter().enumerate() {
        if count > counts[best] {
            best = c;
        }
    }
    classes[best].clone()
}

/// Greedy Gini-impurity tree over the dataset's labels.
pub fn tree_classify(
    train: &Dataset,
    max_depth: usize,
    min_leaf: usize,
) -> Result<ClassificationTree> {
    if max_depth < 1 || min_leaf < 1 {
        return Err(Error::InvalidArgument(
            "max_depth and min_leaf must be >= 1".into(),
        ));
    }
    let labels = train
        .labels
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("dataset has no label column".into()))?;
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();

    let members: Vec<usize> = (0..train.len()).collect();
    let root = grow_classification(train, labels, &classes, members, max_depth, min_leaf);
    Ok(ClassificationTree { root, classes })
}

fn grow_classification(
    train: &Dataset,
    labels: &[String],
    classes: &[String],
    members: Vec<usize>,
    depth: usize,
    min_leaf: usize,
) -> Node<String> {
    let counts = class_counts(labels, &members, classes);
    let parent_gini = gini(&counts);
    if depth == 0 || parent_gini == 0.0 || members.len() < 2 * min_leaf {
        return Node::Leaf(majority(&counts, classes));
    }

    let n = members.len() as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..train.dim() {
        let mut vals: Vec<f64> = members.iter().map(|&i| train.rows[i][f]).collect();
        for t in candidate_thresholds(&mut vals) {
            let left: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| train.rows[i][f] <= t)
                .collect();
            if left.len() < min_leaf || members.len() - left.len() < min_leaf {
                continue;
            }
            let right: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| train.rows[i][f] > t)
                .collect();
            let weighted = gini(&class_counts(labels, &left, classes)) * left.len() as f64 / n
                + gini(&class_counts(labels, &right, classes)) * right.len() as f64 / n;
            let gain = parent_gini - weighted;
            if best.as_ref().is_none_or(|(g, _, _)| gain > *g) {
                best = Some((gain, f, t));
            }
        }
    }

    match best {
        Some((gain, feature, threshold)) if gain > 0.0 => {
            let (left, right): (Vec<usize>, Vec<usize>) = members
                .into_iter()
                .partition(|&i| train.rows[i][feature] <= threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow_classification(
                    train,
                    labels,
                    classes,
                    left,
                    depth - 1,
                    min_leaf,
                )),
                right: Box::new(grow_classification(
                    train,
                    labels,
                    classes,
                    right,
                    depth - 1,
                    min_leaf,
                )),
            }
        }
        _ => Node::Leaf(majority(&counts, classes)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regression_data(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Dataset {
        let d = rows[0].len();
        Dataset::new(
            rows,
            targets,
            None,
            (0..d).map(|i| format!("x{i}")).collect(),
        )
        .unwrap()
    }

    fn labeled_data(rows: Vec<Vec<f64>>, labels: Vec<&str>) -> Dataset {
        let n = rows.len();
        let d = rows[0].len();
        Dataset::new(
            rows,
            vec![0.0; n],
            Some(labels.into_iter().map(String::from).collect()),
            (0..d).map(|i| format!("x{i}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn pure_class_is_a_depth_zero_tree() {
        let ds = labeled_data(vec![vec![0.0], vec![1.0], vec![2.0]], vec!["a", "a", "a"]);
        let tree = tree_classify(&ds, 5, 1).unwrap();
        assert_eq!(tree.depth(), 0);
        for row in &ds.rows {
            assert_eq!(tree.predict(row), "a");
        }
    }

    #[test]
    fn step_function_splits_at_midpoint_five() {
        // y jumps from 0 to 10 between x=4 and x=6; variance reduction peaks
        // at the straddling midpoint (4+6)/2 = 5, checked by hand over all
        // candidate midpoints {2, 3.5, 5, 7}.
        let ds = regression_data(
            vec![vec![1.0], vec![3.0], vec![4.0], vec![6.0], vec![8.0]],
            vec![0.0, 0.0, 0.0, 10.0, 10.0],
        );
        let tree = tree_regress(&ds, 5, 1).unwrap();
        assert_eq!(tree.depth(), 1);
        match &tree.root {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 5.0);
            }
            Node::Leaf(_) => panic!("expected a split"),
        }
        for (row, &y) in ds.rows.iter().zip(ds.targets.iter()) {
            assert_eq!(tree.predict(row), y);
        }
    }

    #[test]
    fn depth_one_stump_cannot_solve_xor() {
        let ds = labeled_data(
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            vec!["a", "b", "b", "a"],
        );
        let tree = tree_classify(&ds, 1, 1).unwrap();
        let correct = ds
            .rows
            .iter()
            .zip(ds.labels.as_ref().unwrap())
            .filter(|(row, label)| tree.predict(row) == label.as_str())
            .count();
        assert!(correct as f64 / 4.0 <= 0.75);
    }

    #[test]
    fn training_error_non_increasing_in_depth() {
        let mut rng = crate::rng::rng_from(5);
        use rand::Rng;
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0])
            .collect();
        let targets: Vec<f64> = rows
            .iter()
            .map(|r| (r[0] * 0.7).sin() * 5.0 + r[1] + rng.random::<f64>())
            .collect();
        let ds = regression_data(rows, targets);
        let mut prev = f64::INFINITY;
        for depth in 1..=8 {
            let tree = tree_regress(&ds, depth, 1).unwrap();
            let err: f64 = ds
                .rows
                .iter()
                .zip(ds.targets.iter())
                .map(|(r, &y)| (tree.predict(r) - y).powi(2))
                .sum();
            assert!(err <= prev + 1e-9, "depth {depth}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn majority_tie_takes_smallest_label() {
        // One row per class and min_leaf forcing a single leaf.
        let ds = labeled_data(vec![vec![0.0], vec![1.0]], vec!["b", "a"]);
        let tree = tree_classify(&ds, 3, 2).unwrap();
        assert_eq!(tree.predict(&[0.5]), "a");
    }
}
