//! End-to-end training and scoring: normalize, build the cluster hierarchy,
//! train one shallow network per leaf, and score alternatives into decision
//! values and rankings. The trained result serializes as a model bundle
//! directory with content-hashed files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::{build_hierarchy, ClusterTree};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::ingest::{zscore_normalize, Dataset, NormParams};
use crate::mcdm::{build_agent_graph, Ranking};
use crate::neuralnet::{self, Mlp, TrainHyper, TrainReport};
use crate::rng::mix_seed;

/// Column names echoed into the bundle so alternatives files can be matched
/// by header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaEcho {
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub label_name: Option<String>,
}

/// The full trained pipeline: normalization statistics, the cluster tree,
/// one trained network per leaf, and the MCDM parameters from the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema: SchemaEcho,
    pub feature_norm: NormParams,
    /// Single-column statistics of the training targets; decision values are
    /// z-scores against these.
    pub target_norm: NormParams,
    pub tree: ClusterTree,
    /// Leaf models in leaf-id order.
    pub leaf_models: Vec<Mlp>,
    pub leaf_reports: Vec<TrainReport>,
    pub config: PipelineConfig,
}

// Salts for deriving per-stage seeds from the pipeline seed.
const TREE_SEED_SALT: u64 = 0xC1;
const SPLIT_SEED_SALT: u64 = 0x5B;
const STREAM_SEED_SALT: u64 = 0x57;

/// Seed for the cluster hierarchy.
pub fn tree_seed(config: &PipelineConfig) -> u64 {
    mix_seed(config.seed, TREE_SEED_SALT)
}

/// Seed for train/test splitting.
pub fn split_seed(config: &PipelineConfig) -> u64 {
    mix_seed(config.seed, SPLIT_SEED_SALT)
}

/// Seed for the synthetic stream replay.
pub fn stream_seed(config: &PipelineConfig) -> u64 {
    mix_seed(config.seed, STREAM_SEED_SALT)
}

/// Train the full pipeline on a dataset. Deterministic for a fixed config.
pub fn train_pipeline(data: &Dataset, config: &PipelineConfig) -> Result<TrainedModel> {
    config.validate()?;
    let (normalized, feature_norm) = zscore_normalize(data)?;
    let target_norm = NormParams::fit_values(&data.targets);
    let norm_targets: Vec<f64> = data
        .targets
        .iter()
        .map(|&t| {
            if target_norm.constant[0] {
                0.0
            } else {
                (t - target_norm.mean[0]) / target_norm.delta[0]
            }
        })
        .collect();

    let tree = build_hierarchy(&normalized.rows, &config.clustering, tree_seed(config))?;

    let mut sizes = vec![data.dim()];
    sizes.extend_from_slice(&config.network.hidden);
    sizes.push(1);

    let mut leaf_models = Vec::with_capacity(tree.n_leaves);
    let mut leaf_reports = Vec::with_capacity(tree.n_leaves);
    for leaf in tree.leaves() {
        let inputs: Vec<Vec<f64>> = leaf
            .members
            .iter()
            .map(|&i| normalized.rows[i].clone())
            .collect();
        let targets: Vec<Vec<f64>> = leaf
            .members
            .iter()
            .map(|&i| vec![norm_targets[i]])
            .collect();
        let init_seed = mix_seed(config.network.seed, 2 * leaf.id as u64);
        let train_seed = mix_seed(config.network.seed, 2 * leaf.id as u64 + 1);
        let model = Mlp::init(&sizes, init_seed)?;
        let hyper = TrainHyper {
            lr: config.network.lr,
            epochs: config.network.epochs,
            batch_size: config.network.batch,
            seed: train_seed,
        };
        let (trained, report) = neuralnet::train(&model, &inputs, &targets, &hyper)?;
        leaf_models.push(trained);
        leaf_reports.push(report);
    }

    Ok(TrainedModel {
        schema: SchemaEcho {
            feature_names: data.feature_names.clone(),
            target_name: data.target_name.clone(),
            label_name: data.label_name.clone(),
        },
        feature_norm,
        target_norm,
        tree,
        leaf_models,
        leaf_reports,
        config: config.clone(),
    })
}

impl TrainedModel {
    pub fn dim(&self) -> usize {
        self.tree.dim
    }

    fn denorm_target(&self, v: f64) -> f64 {
        v * self.target_norm.delta[0] + self.target_norm.mean[0]
    }

    /// Predict the raw-unit target for already-normalized features: route to
    /// a leaf, run its network, map back to target units.
    pub fn predict_normalized(&self, normalized: &[f64]) -> Result<f64> {
        let leaf = self.tree.assign_leaf(normalized)?;
        let out = self.leaf_models[leaf].forward(normalized)?[0];
        Ok(self.denorm_target(out))
    }

    /// Predict the raw-unit target for raw features.
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        let mut x = features.to_vec();
        self.feature_norm.apply(&mut x)?;
        self.predict_normalized(&x)
    }

    /// Decision value of raw features: the prediction z-scored against the
    /// training-target statistics.
    pub fn decision_value(&self, features: &[f64]) -> Result<f64> {
        neuralnet::decision_value(self.predict(features)?, &self.target_norm, 0)
    }

    /// Decision value for features already in normalized space.
    pub fn decision_value_normalized(&self, normalized: &[f64]) -> Result<f64> {
        neuralnet::decision_value(self.predict_normalized(normalized)?, &self.target_norm, 0)
    }

    /// Per-criterion decision values for a set of raw alternatives. With a
    /// single target there is one criterion per alternative.
    pub fn criteria_for(&self, alternatives: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        alternatives
            .iter()
            .map(|row| Ok(vec![self.decision_value(row)?]))
            .collect()
    }

    /// Score alternatives, build the agent graph with the configured MCDM
    /// parameters, and rank.
    pub fn rank_alternatives(&self, alternatives: &[Vec<f64>]) -> Result<Ranking> {
        let criteria = self.criteria_for(alternatives)?;
        let graph = build_agent_graph(
            &criteria,
            self.config.mcdm.neighborhood_k,
            self.config.mcdm.normalization,
        )?;
        graph.rank(self.config.mcdm.weighting)
    }
}

// ---------------------------------------------------------------------------
// Model bundle directory
// ---------------------------------------------------------------------------

const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    /// File name -> sha256 of its bytes.
    files: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NormSection {
    schema: SchemaEcho,
    feature: NormParams,
    target: NormParams,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelsSection {
    leaves: Vec<Mlp>,
    reports: Vec<TrainReport>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn losses_csv(reports: &[TrainReport]) -> Vec<u8> {
    let mut out = String::from("leaf_id,epoch,mse\n");
    for (leaf, report) in reports.iter().enumerate() {
        for (epoch, mse) in report.epoch_losses.iter().enumerate() {
            out.push_str(&format!("{leaf},{epoch},{mse}\n"));
        }
    }
    out.into_bytes()
}

/// Write the model as a bundle directory: `tree.json`, `models.json`,
/// `norm_params.json`, `config.json`, `losses.csv`, and a `manifest.json`
/// carrying a sha256 per file. Writing is deterministic: identical models
/// produce byte-identical bundles.
pub fn write_bundle(model: &TrainedModel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;

    let files: Vec<(&str, Vec<u8>)> = vec![
        ("tree.json", json_bytes(&model.tree)?),
        (
            "models.json",
            json_bytes(&ModelsSection {
                leaves: model.leaf_models.clone(),
                reports: model.leaf_reports.clone(),
            })?,
        ),
        (
            "norm_params.json",
            json_bytes(&NormSection {
                schema: model.schema.clone(),
                feature: model.feature_norm.clone(),
                target: model.target_norm.clone(),
            })?,
        ),
        ("config.json", json_bytes(&model.config)?),
        ("losses.csv", losses_csv(&model.leaf_reports)),
    ];

    let mut manifest = Manifest {
        format_version: BUNDLE_FORMAT_VERSION,
        files: BTreeMap::new(),
    };
    for (name, bytes) in &files {
        manifest.files.insert(name.to_string(), sha256_hex(bytes));
    }

    for (name, bytes) in files
        .iter()
        .map(|(n, b)| (*n, b.clone()))
        .chain(std::iter::once(("manifest.json", json_bytes(&manifest)?)))
    {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(())
}

fn read_file(dir: &Path, name: &str) -> Result<Vec<u8>> {
    let path = dir.join(name);
    fs::read(&path).map_err(|e| Error::Io { path, source: e })
}

/// Read a bundle back, verifying every content hash against the manifest.
pub fn read_bundle(dir: &Path) -> Result<TrainedModel> {
    let manifest_bytes = read_file(dir, "manifest.json")?;
    let manifest: Manifest =
        serde_json::from_slice(&manifest_bytes).map_err(|e| Error::Bundle {
            path: dir.to_path_buf(),
            msg: format!("bad manifest: {e}"),
        })?;
    if manifest.format_version != BUNDLE_FORMAT_VERSION {
        return Err(Error::Bundle {
            path: dir.to_path_buf(),
            msg: format!("unsupported bundle format {}", manifest.format_version),
        });
    }

    let mut contents: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for (name, expected) in &manifest.files {
        let bytes = read_file(dir, name)?;
        let got = sha256_hex(&bytes);
        if &got != expected {
            return Err(Error::Bundle {
                path: dir.to_path_buf(),
                msg: format!("checksum mismatch on {name}"),
            });
        }
        contents.insert(name.clone(), bytes);
    }

    let parse_err = |name: &str, e: serde_json::Error| Error::Bundle {
        path: dir.to_path_buf(),
        msg: format!("bad {name}: {e}"),
    };
    let get = |name: &str| {
        contents.get(name).ok_or_else(|| Error::Bundle {
            path: dir.to_path_buf(),
            msg: format!("manifest lists no {name}"),
        })
    };

    let tree: ClusterTree =
        serde_json::from_slice(get("tree.json")?).map_err(|e| parse_err("tree.json", e))?;
    let models: ModelsSection =
        serde_json::from_slice(get("models.json")?).map_err(|e| parse_err("models.json", e))?;
    let norm: NormSection = serde_json::from_slice(get("norm_params.json")?)
        .map_err(|e| parse_err("norm_params.json", e))?;
    let config: PipelineConfig =
        serde_json::from_slice(get("config.json")?).map_err(|e| parse_err("config.json", e))?;

    if models.leaves.len() != tree.n_leaves {
        return Err(Error::Bundle {
            path: dir.to_path_buf(),
            msg: format!(
                "{} leaf models for a tree with {} leaves",
                models.leaves.len(),
                tree.n_leaves
            ),
        });
    }

    Ok(TrainedModel {
        schema: norm.schema,
        feature_norm: norm.feature,
        target_norm: norm.target,
        tree,
        leaf_models: models.leaves,
        leaf_reports: models.reports,
        config,
    })
}
