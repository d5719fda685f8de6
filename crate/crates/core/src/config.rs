//! Pipeline configuration: one flat declarative bag covering clustering,
//! the leaf networks, the MCDM stage, the streaming harness, and the
//! benchmark defaults. Every field has a default; files and flags override.

use serde::{Deserialize, Serialize};

use crate::cluster::TreeConfig;
use crate::error::{Error, Result};
use crate::mcdm::Weighting;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root seed for the whole pipeline; every stage derives its own stream
    /// from it.
    pub seed: u64,
    pub clustering: TreeConfig,
    pub network: NetworkConfig,
    pub mcdm: McdmConfig,
    pub stream: StreamConfig,
    pub bench: BenchConfig,
    pub io: IoConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Hidden layer widths; the head is always a single linear output.
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            hidden: vec![16, 8],
            lr: 0.1,
            epochs: 200,
            batch: 32,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McdmConfig {
    /// Neighborhood size for the agent graph.
    pub neighborhood_k: usize,
    /// The constant K in the mu coefficients; defaults to neighborhood_k.
    pub normalization: Option<f64>,
    pub weighting: Weighting,
}

impl Default for McdmConfig {
    fn default() -> Self {
        McdmConfig {
            neighborhood_k: 10,
            normalization: None,
            weighting: Weighting::Plain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamConfig {
    /// Sliding-window capacity (records).
    pub window: usize,
    /// Records the window must hold before the speed layer scores.
    pub min_fill: usize,
    /// Speed-layer agent pool capacity; the oldest agent is evicted when
    /// full, keeping MCDM latency bounded.
    pub agent_pool: usize,
    /// Worker ladder for the latency experiment.
    pub workers: Vec<usize>,
    /// Synthetic stream length.
    pub records: usize,
    /// Repetitions per worker count; the report is the per-field median.
    pub repetitions: usize,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            window: 1024,
            min_fill: 64,
            agent_pool: 1024,
            workers: vec![1, 2, 4, 8],
            records: 10_000,
            repetitions: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub test_fraction: f64,
    pub knn_k: usize,
    /// euclidean | manhattan | minkowski[:p]
    pub knn_metric: String,
    pub ridge_lambda: f64,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    pub svm_lr: f64,
    pub svm_epochs: usize,
    pub svm_c: f64,
    /// Bernoulli binarization threshold on raw feature values.
    pub binarize_threshold: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            test_fraction: 0.25,
            knn_k: 10,
            knn_metric: "euclidean".into(),
            ridge_lambda: 1.0,
            tree_max_depth: 5,
            tree_min_leaf: 2,
            svm_lr: 0.2,
            svm_epochs: 300,
            svm_c: 5.0,
            binarize_threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// Primary format echoed to stdout by the CLI: csv | json | md.
    pub format: String,
}

impl Default for IoConfig {
    fn default() -> Self {
        IoConfig {
            format: "csv".into(),
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            clustering: TreeConfig::default(),
            network: NetworkConfig::default(),
            mcdm: McdmConfig::default(),
            stream: StreamConfig::default(),
            bench: BenchConfig::default(),
            io: IoConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Range checks across all sections, delegating to the owning modules'
    /// declared bounds.
    pub fn validate(&self) -> Result<()> {
        self.clustering.validate()?;
        let n = &self.network;
        if n.lr <= 0.0 || n.epochs < 1 || n.batch < 1 || n.hidden.contains(&0) {
            return Err(Error::Config(
                "network requires lr > 0, epochs >= 1, batch >= 1, nonzero hidden widths".into(),
            ));
        }
        if self.mcdm.neighborhood_k < 1 {
            return Err(Error::Config("mcdm.neighborhood_k must be >= 1".into()));
        }
        if let Some(k) = self.mcdm.normalization {
            if k <= 0.0 {
                return Err(Error::Config("mcdm.normalization must be positive".into()));
            }
        }
        let s = &self.stream;
        if s.window < 1 || s.min_fill < 1 || s.min_fill > s.window || s.agent_pool < 2 {
            return Err(Error::Config(
                "stream requires window >= 1, 1 <= min_fill <= window, agent_pool >= 2".into(),
            ));
        }
        if s.workers.is_empty() || s.workers.contains(&0) || s.repetitions < 1 {
            return Err(Error::Config(
                "stream requires a nonempty worker ladder of nonzero counts and repetitions >= 1"
                    .into(),
            ));
        }
        let b = &self.bench;
        if !(b.test_fraction > 0.0 && b.test_fraction < 1.0) {
            return Err(Error::Config("bench.test_fraction must be in (0,1)".into()));
        }
        if b.knn_k < 1 || b.tree_max_depth < 1 || b.tree_min_leaf < 1 {
            return Err(Error::Config(
                "bench requires knn_k, tree_max_depth, tree_min_leaf >= 1".into(),
            ));
        }
        b.knn_metric.parse::<crate::baselines::Distance>()?;
        if b.ridge_lambda < 0.0 || b.svm_lr <= 0.0 || b.svm_epochs < 1 || b.svm_c <= 0.0 {
            return Err(Error::Config(
                "bench requires ridge_lambda >= 0, svm_lr > 0, svm_epochs >= 1, svm_c > 0".into(),
            ));
        }
        match self.io.format.as_str() {
            "csv" | "json" | "md" => Ok(()),
            other => Err(Error::Config(format!(
                "io.format must be csv|json|md, got '{other}'"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let mut cfg = PipelineConfig::default();
        cfg.mcdm.normalization = Some(3.5);
        cfg.network.hidden = vec![4];
        let json = serde_json::to_string(&cfg).unwrap();
        let back: PipelineConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn bad_ranges_rejected() {
        let mut cfg = PipelineConfig::default();
        cfg.network.lr = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = PipelineConfig::default();
        cfg.bench.test_fraction = 1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = PipelineConfig::default();
        cfg.stream.min_fill = 5000;
        assert!(cfg.validate().is_err());

        let mut cfg = PipelineConfig::default();
        cfg.io.format = "xml".into();
        assert!(cfg.validate().is_err());
    }
}
