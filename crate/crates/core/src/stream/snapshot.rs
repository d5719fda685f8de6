//! Batch layer: full pipeline retraining into immutable, versioned,
//! checksummed snapshots published by atomic swap. Readers hold an `Arc` to
//! whatever snapshot was current when they looked; a running batch never
//! disturbs them.

use std::sync::{Arc, RwLock};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::pipeline::{train_pipeline, TrainedModel};

/// An immutable published result of one batch run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSnapshot {
    pub version: u64,
    /// sha256 over the serialized model, fixed at publication.
    pub checksum: String,
    pub model: TrainedModel,
}

impl ModelSnapshot {
    pub fn checksum_of(model: &TrainedModel) -> Result<String> {
        let bytes = serde_json::to_vec(model)
            .map_err(|e| Error::Config(format!("snapshot serialization failed: {e}")))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        Ok(hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect())
    }

    /// Recompute the content hash and compare with the published one; a
    /// mismatch would mean a torn read.
    pub fn verify(&self) -> Result<bool> {
        Ok(Self::checksum_of(&self.model)? == self.checksum)
    }
}

#[derive(Debug)]
struct StoreInner {
    version: u64,
    current: Option<Arc<ModelSnapshot>>,
}

/// Holder for the live snapshot. Publication swaps the `Arc` under a write
/// lock; the scoring path only ever clones the `Arc` under a read lock.
#[derive(Debug)]
pub struct SnapshotStore {
    inner: RwLock<StoreInner>,
}

impl Default for SnapshotStore {
    fn default() -> Self {
        Self::new()
    }
}

impl SnapshotStore {
    pub fn new() -> SnapshotStore {
        SnapshotStore {
            inner: RwLock::new(StoreInner {
                version: 0,
                current: None,
            }),
        }
    }

    /// The live snapshot, if one has been published.
    pub fn current(&self) -> Result<Arc<ModelSnapshot>> {
        self.inner
            .read()
            .expect("snapshot lock poisoned")
            .current
            .clone()
            .ok_or(Error::NoSnapshot)
    }

    pub fn version(&self) -> u64 {
        self.inner.read().expect("snapshot lock poisoned").version
    }

    /// One batch-layer run: train the full pipeline privately on the
    /// accumulated data, then publish atomically. The previous snapshot stays
    /// live until the swap.
    pub fn run_batch(
        &self,
        accumulated: &Dataset,
        config: &PipelineConfig,
    ) -> Result<Arc<ModelSnapshot>> {
        if accumulated.len() < config.clustering.min_leaf_size {
            return Err(Error::InvalidArgument(format!(
                "batch layer needs at least min_leaf_size = {} rows, got {}",
                config.clustering.min_leaf_size,
                accumulated.len()
            )));
        }
        let model = train_pipeline(accumulated, config)?;
        self.publish(model)
    }

    /// Publish an already-trained model (e.g. one loaded from a bundle) as
    /// the next snapshot version.
    pub fn publish(&self, model: TrainedModel) -> Result<Arc<ModelSnapshot>> {
        let checksum = ModelSnapshot::checksum_of(&model)?;
        let mut guard = self.inner.write().expect("snapshot lock poisoned");
        guard.version += 1;
        let snapshot = Arc::new(ModelSnapshot {
            version: guard.version,
            checksum,
            model,
        });
        guard.current = Some(snapshot.clone());
        Ok(snapshot)
    }
}
