//! Desk-scale lambda architecture: a batch layer that retrains the pipeline
//! into immutable versioned snapshots, a speed layer that scores arriving
//! records against the current snapshot with sliding-window statistics, and a
//! latency harness decomposing per-record time into processing vs MCDM work.

mod latency;
mod snapshot;
mod speed;
mod window;

pub use latency::{
    reports_to_csv, run_latency_experiment, run_latency_experiment_with, LatencyReport,
    RecordScorer, PAPER_REFERENCE_OVERHEAD_PCT,
};
pub use snapshot::{ModelSnapshot, SnapshotStore};
pub use speed::{RankingDelta, SpeedLayer, SpeedScore};
pub use window::SlidingWindow;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::TrainedModel;
use crate::rng::rng_from;
use crate::synth::standard_normal;

/// One record of a stream source: a strictly increasing sequence id, a
/// monotone event timestamp, and a feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub sequence_id: u64,
    pub timestamp: u64,
    pub features: Vec<f64>,
}

/// Drift-free synthetic stream matching the training blobs: leaves are
/// sampled by member count, points drawn around the leaf centroid with the
/// leaf's spread, then mapped back to raw feature units.
pub fn synthetic_stream(model: &TrainedModel, n: usize, seed: u64) -> Vec<StreamRecord> {
    let mut rng = rng_from(seed);
    let leaves = model.tree.leaves();
    let total_members: usize = leaves.iter().map(|l| l.members.len()).sum();
    let d = model.dim();

    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        // Weighted leaf choice.
        let mut pick = (rng.random::<f64>() * total_members as f64) as usize;
        let mut leaf = leaves[0];
        for l in &leaves {
            if pick < l.members.len() {
                leaf = l;
                break;
            }
            pick -= l.members.len();
        }
        let sigma = (leaf.spread / d as f64).sqrt();
        let mut features: Vec<f64> = leaf
            .centroid
            .iter()
            .map(|c| c + sigma * standard_normal(&mut rng))
            .collect();
        model
            .feature_norm
            .invert(&mut features)
            .expect("leaf centroid matches the model dimension");
        records.push(StreamRecord {
            sequence_id: i as u64 + 1,
            timestamp: (i as u64 + 1) * 1_000,
            features,
        });
    }
    records
}

/// Write a replay file: `sequence_id,timestamp,x0..x{d-1}`.
pub fn write_replay_csv(records: &[StreamRecord], path: &Path) -> Result<()> {
    let d = records.first().map_or(0, |r| r.features.len());
    let mut out = String::from("sequence_id,timestamp");
    for j in 0..d {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!("{},{}", r.sequence_id, r.timestamp));
        for v in &r.features {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Read a replay file, enforcing strictly increasing sequence ids.
pub fn read_replay_csv(path: &Path) -> Result<Vec<StreamRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Csv {
        path: path.to_path_buf(),
        msg: "empty replay file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "sequence_id" || cols[1] != "timestamp" {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            msg: "replay header must start with sequence_id,timestamp".into(),
        });
    }
    let d = cols.len() - 2;
    let mut records = Vec::new();
    let mut last_seq: Option<u64> = None;
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != d + 2 {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                msg: format!(
                    "data row {}: expected {} fields, got {}",
                    i + 1,
                    d + 2,
                    parts.len()
                ),
            });
        }
        let parse_u64 = |s: &str, col: &str| {
            s.trim().parse::<u64>().map_err(|_| Error::InvalidCell {
                row: i + 1,
                column: col.to_string(),
                msg: format!("cannot parse '{s}'"),
            })
        };
        let sequence_id = parse_u64(parts[0], "sequence_id")?;
        let timestamp = parse_u64(parts[1], "timestamp")?;
        if let Some(prev) = last_seq {
            if sequence_id <= prev {
                return Err(Error::InvalidCell {
                    row: i + 1,
                    column: "sequence_id".into(),
                    msg: format!("sequence id {sequence_id} not greater than {prev}"),
                });
            }
        }
        last_seq = Some(sequence_id);
        let mut features = Vec::with_capacity(d);
        for (j, s) in parts[2..].iter().enumerate() {
            let v: f64 = s.trim().parse().map_err(|_| Error::InvalidCell {
                row: i + 1,
                column: format!("x{j}"),
                msg: format!("cannot parse '{s}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidCell {
                    row: i + 1,
                    column: format!("x{j}"),
                    msg: format!("non-finite value '{s}'"),
                });
            }
            features.push(v);
        }
        records.push(StreamRecord {
            sequence_id,
            timestamp,
            features,
        });
    }
    Ok(records)
}
