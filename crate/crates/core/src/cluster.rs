//! Hierarchical k-means: a seeded k-means++ / Lloyd core, plus the cluster
//! tree that recursively subdivides low-quality clusters and routes points to
//! leaves. Leaves hold member-row indices; leaf models are attached later by
//! the pipeline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{mix_seed, rng_from};

/// Squared Euclidean distance.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn centroid_of(points: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let d = points[members[0]].len();
    let mut c = vec![0.0; d];
    for &i in members {
        for (j, v) in points[i].iter().enumerate() {
            c[j] += v;
        }
    }
    let n = members.len() as f64;
    for v in &mut c {
        *v /= n;
    }
    c
}

/// Mean squared distance of the members to their centroid; the tree's
/// cluster-quality measure (lower is tighter).
fn mean_sq_dist(points: &[Vec<f64>], members: &[usize], centroid: &[f64]) -> f64 {
    members
        .iter()
        .map(|&i| dist2(&points[i], centroid))
        .sum::<f64>()
        / members.len() as f64
}

fn count_distinct(points: &[Vec<f64>], members: &[usize]) -> usize {
    use std::collections::HashSet;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for &i in members {
        // +0.0 folds -0.0 into 0.0 so bit patterns compare as values
        seen.insert(points[i].iter().map(|v| (v + 0.0).to_bits()).collect());
    }
    seen.len()
}

/// One flat k-means result.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// k centroids of dimension d.
    pub centroids: Vec<Vec<f64>>,
    /// Per-row index of the nearest centroid (ties: lowest centroid index).
    pub membership: Vec<usize>,
    /// Sum over rows of squared distance to the assigned centroid.
    pub wcss: f64,
    /// Lloyd iterations run.
    pub iterations: usize,
    /// WCSS recorded after every iteration (non-increasing), final pass last.
    pub wcss_trace: Vec<f64>,
}

fn nearest(centroids: &[Vec<f64>], point: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = dist2(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn wcss_of(points: &[Vec<f64>], centroids: &[Vec<f64>], membership: &[usize]) -> f64 {
    points
        .iter()
        .zip(membership.iter())
        .map(|(p, &c)| dist2(p, &centroids[c]))
        .sum()
}

/// Lloyd iteration from seeded k-means++ initialization. Terminates when the
/// largest centroid movement drops below `tol` or after `max_iter` rounds;
/// WCSS is non-increasing across iterations.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterAssignment> {
    if points.is_empty() {
        return Err(Error::EmptyDataset("kmeans on no points".into()));
    }
    if k < 1 || max_iter < 1 || tol < 0.0 {
        return Err(Error::InvalidArgument(
            "kmeans requires k >= 1, max_iter >= 1, tol >= 0".into(),
        ));
    }
    let all: Vec<usize> = (0..points.len()).collect();
    let distinct = count_distinct(points, &all);
    if k > distinct {
        return Err(Error::InvalidArgument(format!(
            "k={k} exceeds the {distinct} distinct points"
        )));
    }

    let n = points.len();
    let mut rng = rng_from(seed);

    // k-means++ seeding: first centroid uniform, the rest proportional to
    // squared distance from the nearest chosen centroid.
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let r = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &w) in d2.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                chosen = Some(i);
                if acc >= r {
                    break;
                }
            }
        }
        let c = chosen.expect("a positive-distance point exists while k <= distinct");
        centroids.push(points[c].clone());
        for (i, w) in d2.iter_mut().enumerate() {
            let nd = dist2(&points[i], centroids.last().unwrap());
            if nd < *w {
                *w = nd;
            }
        }
    }

    let mut membership = vec![0usize; n];
    let mut wcss_trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;

        // Assignment (nearest centroid, ties to the lowest index).
        for (i, p) in points.iter().enumerate() {
            membership[i] = nearest(&centroids, p);
        }

        // Empty-cluster repair: reseed each empty centroid to the point
        // farthest from its currently assigned centroid, donors of size >= 2.
        let mut counts = vec![0usize; k];
        for &m in &membership {
            counts[m] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far_i = None;
            let mut far_d = -1.0;
            for (i, p) in points.iter().enumerate() {
                if counts[membership[i]] < 2 {
                    continue;
                }
                let d = dist2(p, &centroids[membership[i]]);
                if d > far_d {
                    far_d = d;
                    far_i = Some(i);
                }
            }
            let i = far_i.expect("a donor cluster of size >= 2 exists");
            counts[membership[i]] -= 1;
            membership[i] = c;
            counts[c] = 1;
            centroids[c] = points[i].clone();
        }

        // Update step.
        let mut movement: f64 = 0.0;
        for c in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| membership[i] == c).collect();
            let new_c = centroid_of(points, &members);
            movement = movement.max(dist2(&centroids[c], &new_c).sqrt());
            centroids[c] = new_c;
        }

        wcss_trace.push(wcss_of(points, &centroids, &membership));
        if movement < tol {
            break;
        }
    }

    // Final assignment against the final centroids, so membership satisfies
    // the nearest-centroid invariant.
    for (i, p) in points.iter().enumerate() {
        membership[i] = nearest(&centroids, p);
    }
    let wcss = wcss_of(points, &centroids, &membership);
    wcss_trace.push(wcss);

    Ok(ClusterAssignment {
        centroids,
        membership,
        wcss,
        iterations,
        wcss_trace,
    })
}

/// Shape parameters for [`build_hierarchy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub branching_k: usize,
    pub max_depth: usize,
    pub min_leaf_size: usize,
    /// A cluster whose mean squared distance to centroid exceeds this (and
    /// whose size allows it) is re-clustered.
    pub quality_threshold: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            branching_k: 2,
            max_depth: 5,
            min_leaf_size: 20,
            quality_threshold: 0.25,
            max_iter: 100,
            tol: 1e-6,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.branching_k < 2 {
            return Err(Error::InvalidArgument("branching_k must be >= 2".into()));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidArgument("max_depth must be >= 1".into()));
        }
        if self.min_leaf_size < 1 {
            return Err(Error::InvalidArgument("min_leaf_size must be >= 1".into()));
        }
        if self.max_iter < 1 || self.tol < 0.0 || self.quality_threshold < 0.0 {
            return Err(Error::InvalidArgument(
                "max_iter >= 1, tol >= 0, quality_threshold >= 0 required".into(),
            ));
        }
        Ok(())
    }
}

/// One leaf of the cluster tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub id: usize,
    pub centroid: Vec<f64>,
    /// Mean squared distance of the members to the centroid.
    pub spread: f64,
    /// Training-row indices, ascending.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Internal {
        centroids: Vec<Vec<f64>>,
        children: Vec<TreeNode>,
    },
    Leaf(Leaf),
}

/// Hierarchical k-means tree whose leaves partition the
/// training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTree {
    pub root: TreeNode,
    pub dim: usize,
    pub depth: usize,
    pub n_leaves: usize,
    pub config: TreeConfig,
}

impl ClusterTree {
    /// Descend from the root choosing the nearest child centroid at each
    /// level (ties: lowest index) and return the reached leaf id.
    pub fn assign_leaf(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf(leaf) => return Ok(leaf.id),
                TreeNode::Internal {
                    centroids,
                    children,
                } => {
                    node = &children[nearest(centroids, point)];
                }
            }
        }
    }

    /// All leaves in id (depth-first) order.
    pub fn leaves(&self) -> Vec<&Leaf> {
        fn walk<'a>(node: &'a TreeNode, out: &mut Vec<&'a Leaf>) {
            match node {
                TreeNode::Leaf(leaf) => out.push(leaf),
                TreeNode::Internal { children, .. } => {
                    for c in children {
                        walk(c, out);
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(self.n_leaves);
        walk(&self.root, &mut out);
        out
    }
}

/// Build the hierarchy: k-means at the root, then recursive re-clustering of
/// any cluster whose quality exceeds `quality_threshold` and whose size is at
/// least twice `min_leaf_size`, down to `max_depth` layers. Splits that would
/// produce a child smaller than `min_leaf_size` are rejected, so leaves keep
/// the size floor. Child seeds derive from the parent seed mixed with the
/// child index, making the construction order-independent and reproducible.
pub fn build_hierarchy(points: &[Vec<f64>], config: &TreeConfig, seed: u64) -> Result<ClusterTree> {
    config.validate()?;
    if points.is_empty() {
        return Err(Error::EmptyDataset("cannot build a hierarchy".into()));
    }
    let dim = points[0].len();
    let members: Vec<usize> = (0..points.len()).collect();
    let mut next_leaf_id = 0usize;
    let (root, depth) = build_node(
        points,
        members,
        config.max_depth,
        seed,
        config,
        &mut next_leaf_id,
    )?;
    Ok(ClusterTree {
        root,
        dim,
        depth,
        n_leaves: next_leaf_id,
        config: config.clone(),
    })
}

fn build_node(
    points: &[Vec<f64>],
    members: Vec<usize>,
    depth_left: usize,
    seed: u64,
    config: &TreeConfig,
    next_leaf_id: &mut usize,
) -> Result<(TreeNode, usize)> {
    let centroid = centroid_of(points, &members);
    let quality = mean_sq_dist(points, &members, &centroid);

    let splittable = depth_left >= 1
        && members.len() >= 2 * config.min_leaf_size
        && quality > config.quality_threshold
        && count_distinct(points, &members) >= config.branching_k;

    let mut make_leaf = |members: Vec<usize>| {
        let id = *next_leaf_id;
        *next_leaf_id += 1;
        TreeNode::Leaf(Leaf {
            id,
            centroid: centroid.clone(),
            spread: quality,
            members,
        })
    };

    if !splittable {
        return Ok((make_leaf(members), 0));
    }

    let local: Vec<Vec<f64>> = members.iter().map(|&i| points[i].clone()).collect();
    let km = kmeans(
        &local,
        config.branching_k,
        seed,
        config.max_iter,
        config.tol,
    )?;

    let mut child_members: Vec<Vec<usize>> = vec![Vec::new(); config.branching_k];
    for (local_i, &c) in km.membership.iter().enumerate() {
        child_members[c].push(members[local_i]);
    }
    if child_members.iter().any(|m| m.len() < config.min_leaf_size) {
        return Ok((make_leaf(members), 0));
    }

    let mut children = Vec::with_capacity(config.branching_k);
    let mut max_child_depth = 0;
    for (c, child) in child_members.into_iter().enumerate() {
        let (node, d) = build_node(
            points,
            child,
            depth_left - 1,
            mix_seed(seed, c as u64),
            config,
            next_leaf_id,
        )?;
        max_child_depth = max_child_depth.max(d);
        children.push(node);
    }

    Ok((
        TreeNode::Internal {
            centroids: km.centroids,
            children,
        },
        max_child_depth + 1,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Brute-force WCSS oracle: enumerate every assignment of n points to k
    // clusters and take the best. Independent of the kmeans implementation.
    fn brute_force_optimal_wcss(points: &[Vec<f64>], k: usize) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        let combos = (k as u64).pow(n as u32);
        for code in 0..combos {
            let mut c = code;
            let mut assign = vec![0usize; n];
            for a in assign.iter_mut() {
                *a = (c % k as u64) as usize;
                c /= k as u64;
            }
            let mut total = 0.0;
            for cluster in 0..k {
                let members: Vec<usize> = (0..n).filter(|&i| assign[i] == cluster).collect();
                if members.is_empty() {
                    continue;
                }
                let centroid = centroid_of(points, &members);
                total += members
                    .iter()
                    .map(|&i| dist2(&points[i], &centroid))
                    .sum::<f64>();
            }
            if total < best {
                best = total;
            }
        }
        best
    }

    fn unit_square() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ]
    }

    #[test]
    fn separated_pair_is_exact() {
        let pts = vec![vec![0.0, 0.0], vec![10.0, 10.0]];
        let r = kmeans(&pts, 2, 1, 100, 1e-9).unwrap();
        assert!(r.wcss.abs() < 1e-12);
        let mut cs = r.centroids.clone();
        cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(cs, pts);
    }

    #[test]
    fn k1_is_the_mean_and_total_variance() {
        let pts = vec![vec![1.0], vec![2.0], vec![6.0]];
        let r = kmeans(&pts, 1, 5, 100, 1e-9).unwrap();
        assert!((r.centroids[0][0] - 3.0).abs() < 1e-12);
        // n * variance = sum of squared deviations = 4 + 1 + 9
        assert!((r.wcss - 14.0).abs() < 1e-12);
    }

    #[test]
    fn unit_square_reaches_brute_force_optimum() {
        let pts = unit_square();
        let optimal = brute_force_optimal_wcss(&pts, 2);
        assert!((optimal - 1.0).abs() < 1e-12); // two side-pairs
        let mut attained = f64::INFINITY;
        for seed in 0..20 {
            let r = kmeans(&pts, 2, seed, 100, 1e-9).unwrap();
            attained = attained.min(r.wcss);
        }
        assert!((attained - optimal).abs() < 1e-9);
    }

    #[test]
    fn wcss_trace_is_non_increasing() {
        let mut rng = crate::rng::rng_from(99);
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0])
            .collect();
        for seed in 0..10 {
            let r = kmeans(&pts, 3, seed, 100, 0.0).unwrap();
            for w in r.wcss_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "wcss increased: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn micro_restarts_attain_optimum() {
        let sets: Vec<Vec<Vec<f64>>> = vec![
            unit_square(),
            vec![vec![0.0], vec![1.0], vec![2.0], vec![10.0], vec![11.0]],
            vec![
                vec![0.0, 0.0],
                vec![5.0, 0.1],
                vec![5.1, 0.0],
                vec![0.2, 0.1],
                vec![9.0, 9.0],
                vec![9.2, 9.1],
            ],
        ];
        for pts in &sets {
            for k in 1..=3 {
                let optimal = brute_force_optimal_wcss(pts, k);
                let attained = (0..20)
                    .map(|seed| kmeans(pts, k, seed, 100, 1e-9).unwrap().wcss)
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    (attained - optimal).abs() < 1e-9,
                    "k={k}: attained {attained} vs optimal {optimal}"
                );
            }
        }
    }

    #[test]
    fn kmeans_rejects_k_above_distinct_count() {
        let pts = vec![vec![1.0], vec![1.0], vec![2.0]];
        assert!(kmeans(&pts, 3, 0, 10, 1e-9).is_err());
        assert!(kmeans(&pts, 2, 0, 10, 1e-9).is_ok());
        assert!(kmeans(&[], 1, 0, 10, 1e-9).is_err());
    }

    fn four_blobs(per: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        // Centers far apart relative to spread 0.05.
        let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]];
        let mut rng = crate::rng::rng_from(7);
        let mut pts = Vec::new();
        let mut blob = Vec::new();
        for (b, c) in centers.iter().enumerate() {
            for _ in 0..per {
                let dx = (rng.random::<f64>() - 0.5) * 0.1;
                let dy = (rng.random::<f64>() - 0.5) * 0.1;
                pts.push(vec![c[0] + dx, c[1] + dy]);
                blob.push(b);
            }
        }
        (pts, blob)
    }

    fn blob_config() -> TreeConfig {
        TreeConfig {
            branching_k: 2,
            max_depth: 3,
            min_leaf_size: 2,
            quality_threshold: 0.5,
            ..TreeConfig::default()
        }
    }

    #[test]
    fn hierarchy_separates_four_blobs() {
        let (pts, blob) = four_blobs(6);
        let tree = build_hierarchy(&pts, &blob_config(), 11).unwrap();
        assert_eq!(tree.n_leaves, 4);
        for leaf in tree.leaves() {
            let first = blob[leaf.members[0]];
            assert!(leaf.members.iter().all(|&i| blob[i] == first));
            assert_eq!(leaf.members.len(), 6);
        }
    }

    #[test]
    fn depth_one_is_a_single_kmeans_layer() {
        let (pts, _) = four_blobs(6);
        let cfg = TreeConfig {
            max_depth: 1,
            ..blob_config()
        };
        let tree = build_hierarchy(&pts, &cfg, 11).unwrap();
        assert_eq!(tree.depth, 1);
        assert_eq!(tree.n_leaves, cfg.branching_k);
        match &tree.root {
            TreeNode::Internal { children, .. } => {
                assert!(children.iter().all(|c| matches!(c, TreeNode::Leaf(_))));
            }
            TreeNode::Leaf(_) => panic!("expected a split at the root"),
        }
    }

    #[test]
    fn size_floor_forces_single_leaf() {
        let (pts, _) = four_blobs(5); // n = 20
        let cfg = TreeConfig {
            min_leaf_size: 20,
            ..blob_config()
        };
        let tree = build_hierarchy(&pts, &cfg, 3).unwrap();
        assert_eq!(tree.n_leaves, 1);
        assert_eq!(tree.depth, 0);
    }

    #[test]
    fn leaves_partition_rows() {
        let (pts, _) = four_blobs(7);
        let tree = build_hierarchy(&pts, &blob_config(), 23).unwrap();
        let mut all: Vec<usize> = tree
            .leaves()
            .iter()
            .flat_map(|l| l.members.iter().copied())
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..pts.len()).collect::<Vec<_>>());
    }

    #[test]
    fn assign_leaf_routes_training_rows_home() {
        let (pts, _) = four_blobs(6);
        let tree = build_hierarchy(&pts, &blob_config(), 11).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let leaf_id = tree.assign_leaf(p).unwrap();
            let leaf = tree.leaves().into_iter().find(|l| l.id == leaf_id).unwrap();
            assert!(leaf.members.contains(&i));
        }
    }

    #[test]
    fn assign_leaf_centroid_is_fixed_point() {
        let (pts, _) = four_blobs(6);
        let tree = build_hierarchy(&pts, &blob_config(), 11).unwrap();
        for leaf in tree.leaves() {
            assert_eq!(tree.assign_leaf(&leaf.centroid).unwrap(), leaf.id);
        }
    }

    #[test]
    fn assign_leaf_tie_goes_to_lower_index() {
        let tree = ClusterTree {
            root: TreeNode::Internal {
                centroids: vec![vec![0.0], vec![2.0]],
                children: vec![
                    TreeNode::Leaf(Leaf {
                        id: 0,
                        centroid: vec![0.0],
                        spread: 0.0,
                        members: vec![0],
                    }),
                    TreeNode::Leaf(Leaf {
                        id: 1,
                        centroid: vec![2.0],
                        spread: 0.0,
                        members: vec![1],
                    }),
                ],
            },
            dim: 1,
            depth: 1,
            n_leaves: 2,
            config: TreeConfig::default(),
        };
        // Equidistant between the sibling centroids.
        assert_eq!(tree.assign_leaf(&[1.0]).unwrap(), 0);
        assert!(tree.assign_leaf(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn tree_serializes_round_trip() {
        let (pts, _) = four_blobs(6);
        let tree = build_hierarchy(&pts, &blob_config(), 11).unwrap();
        let json = serde_json::to_string(&tree).unwrap();
        let back: ClusterTree = serde_json::from_str(&json).unwrap();
        assert_eq!(tree, back);
    }
}
