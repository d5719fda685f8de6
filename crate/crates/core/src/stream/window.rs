//! Incremental sliding-window statistics: a fixed-capacity buffer with
//! running sum and sum-of-squares per feature, giving O(1) mean/delta updates
//! on push and eviction.
//!
//! Sums are accumulated around a per-feature anchor (shifted-data form) so a
//! window whose values sit far from zero with a small spread keeps full
//! precision. When the anchor drifts too far from the data the feature is
//! re-anchored at the current mean, an O(window) rescan that only fires on
//! large-scale drift.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SlidingWindow {
    capacity: usize,
    dim: usize,
    buffer: VecDeque<Vec<f64>>,
    anchor: Vec<f64>,
    /// Per-feature sum of (x - anchor) over the buffer.
    sum: Vec<f64>,
    /// Per-feature sum of (x - anchor)^2 over the buffer.
    sum_sq: Vec<f64>,
}

impl SlidingWindow {
    pub fn new(capacity: usize, dim: usize) -> Result<SlidingWindow> {
        if capacity < 1 || dim < 1 {
            return Err(Error::InvalidArgument(
                "window needs capacity >= 1 and dim >= 1".into(),
            ));
        }
        Ok(SlidingWindow {
            capacity,
            dim,
            buffer: VecDeque::with_capacity(capacity),
            anchor: vec![0.0; dim],
            sum: vec![0.0; dim],
            sum_sq: vec![0.0; dim],
        })
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Absorb a record, evicting the oldest when full. O(1) in the window
    /// length: add the new shifted sums, subtract the evicted ones.
    pub fn push(&mut self, features: &[f64]) -> Result<()> {
        if features.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: features.len(),
            });
        }
        if self.buffer.len() == self.capacity {
            let old = self.buffer.pop_front().expect("window is full");
            for (j, v) in old.iter().enumerate() {
                let s = v - self.anchor[j];
                self.sum[j] -= s;
                self.sum_sq[j] -= s * s;
            }
        }
        for (j, v) in features.iter().enumerate() {
            let s = v - self.anchor[j];
            self.sum[j] += s;
            self.sum_sq[j] += s * s;
        }
        self.buffer.push_back(features.to_vec());

        // Precision guard: when the shifted mean dominates the spread, the
        // variance difference is cancelling; re-anchor at the current mean.
        let n = self.buffer.len() as f64;
        for j in 0..self.dim {
            let m = self.sum[j] / n;
            let var = (self.sum_sq[j] / n - m * m).max(0.0);
            if m * m > 0.0 && var < m * m * 1e-8 {
                self.reanchor(j);
            }
        }
        Ok(())
    }

    fn reanchor(&mut self, j: usize) {
        let n = self.buffer.len() as f64;
        self.anchor[j] += self.sum[j] / n;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for row in &self.buffer {
            let s = row[j] - self.anchor[j];
            sum += s;
            sum_sq += s * s;
        }
        self.sum[j] = sum;
        self.sum_sq[j] = sum_sq;
    }

    /// Per-feature mean over the buffered records.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.buffer.len() as f64;
        self.sum
            .iter()
            .zip(self.anchor.iter())
            .map(|(s, a)| a + s / n)
            .collect()
    }

    /// Per-feature population standard deviation; negative variance residue
    /// from cancellation clamps to zero.
    pub fn delta(&self) -> Vec<f64> {
        let n = self.buffer.len() as f64;
        self.sum
            .iter()
            .zip(self.sum_sq.iter())
            .map(|(s, sq)| {
                let mean = s / n;
                (sq / n - mean * mean).max(0.0).sqrt()
            })
            .collect()
    }

    /// Features whose window delta is zero.
    pub fn constant_flags(&self) -> Vec<bool> {
        self.delta().iter().map(|d| *d == 0.0).collect()
    }

    pub fn is_warm(&self, min_fill: usize) -> bool {
        self.buffer.len() >= min_fill
    }

    /// The buffered records, oldest first.
    pub fn records(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.buffer.iter()
    }
}
