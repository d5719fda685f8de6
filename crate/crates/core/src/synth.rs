//! Seeded synthetic dataset generators for the benchmark harness and tests:
//! linear-plus-noise, a piecewise step function, and clustered blobs with
//! per-blob targets.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ingest::Dataset;
use crate::rng::rng_from;

/// Standard normal draw via Box-Muller.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `y = w . x + 1 + noise` with fixed integer-ish weights, x uniform in
/// [-2, 2).
pub fn make_linear(n: usize, d: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = rng_from(seed);
    let weights: Vec<f64> = (0..d).map(|j| j as f64 + 1.0).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
        .collect();
    let targets: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>()
                + 1.0
                + noise * standard_normal(&mut rng)
        })
        .collect();
    let mut ds = Dataset::new(
        rows,
        targets,
        None,
        (0..d).map(|j| format!("x{j}")).collect(),
    )
    .expect("generated data is valid");
    ds.target_name = "y".into();
    ds
}

/// One-dimensional step function: x uniform in [0, 10), y jumps by 10 at
/// each integer boundary bucket of width 2.5.
pub fn make_piecewise(n: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = rng_from(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>() * 10.0]).collect();
    let targets: Vec<f64> = rows
        .iter()
        .map(|r| (r[0] / 2.5).floor() * 10.0 + noise * standard_normal(&mut rng))
        .collect();
    let mut ds =
        Dataset::new(rows, targets, None, vec!["x0".into()]).expect("generated data is valid");
    ds.target_name = "y".into();
    ds
}

/// Isotropic Gaussian blobs around the given centers. Targets are the blob's
/// entry in `blob_targets` plus noise; labels (when requested) name the blob.
pub fn make_blobs(
    centers: &[Vec<f64>],
    per_blob: usize,
    spread: f64,
    blob_targets: &[f64],
    target_noise: f64,
    seed: u64,
    with_labels: bool,
) -> Dataset {
    assert_eq!(centers.len(), blob_targets.len());
    let d = centers[0].len();
    let mut rng = rng_from(seed);
    let mut rows = Vec::with_capacity(centers.len() * per_blob);
    let mut targets = Vec::with_capacity(rows.capacity());
    let mut labels = Vec::with_capacity(rows.capacity());
    for (b, center) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            let row: Vec<f64> = center
                .iter()
                .map(|c| c + spread * standard_normal(&mut rng))
                .collect();
            rows.push(row);
            targets.push(blob_targets[b] + target_noise * standard_normal(&mut rng));
            labels.push(format!("blob{b}"));
        }
    }
    let mut ds = Dataset::new(
        rows,
        targets,
        with_labels.then_some(labels),
        (0..d).map(|j| format!("x{j}")).collect(),
    )
    .expect("generated data is valid");
    ds.target_name = "y".into();
    if with_labels {
        ds.label_name = Some("label".into());
    }
    ds
}

/// The standard four-corner blob fixture used across the test suites:
/// well-separated corners with ordered targets 0, 10, 20, 30.
pub fn four_corner_blobs(per_blob: usize, seed: u64, with_labels: bool) -> Dataset {
    make_blobs(
        &[
            vec![0.0, 0.0],
            vec![10.0, 0.0],
            vec![0.0, 10.0],
            vec![10.0, 10.0],
        ],
        per_blob,
        0.2,
        &[0.0, 10.0, 20.0, 30.0],
        0.1,
        seed,
        with_labels,
    )
}
