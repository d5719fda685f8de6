#![allow(clippy::needless_range_loop)]

//! Decision-analytics engine fusing multi-criteria ranking with a
//! hierarchical-cluster-plus-shallow-network predictor.

pub mod baselines;
pub mod cluster;
pub mod config;
pub mod error;
pub mod ingest;
pub mod mcdm;
pub mod neuralnet;
pub mod pipeline;
pub mod rng;
pub mod stream;
pub mod synth;

pub use error::{Error, Result};
