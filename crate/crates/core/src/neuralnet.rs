//! The per-leaf shallow network: sigmoid hidden layers, a linear regression
//! head, exact backpropagation for mean squared error, and seeded mini-batch
//! gradient descent. The normalized decision value lives here too.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::NormParams;
use crate::rng::{mix_seed, rng_from};

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// One dense layer: weight matrix (out x in) and a bias per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayerSer", into = "LayerSer")]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

/// Wire format: layer shape plus row-major parameter arrays.
#[derive(Serialize, Deserialize)]
struct LayerSer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl From<Layer> for LayerSer {
    fn from(l: Layer) -> Self {
        LayerSer {
            in_dim: l.in_dim(),
            out_dim: l.out_dim(),
            weights: l.weights.into_iter().flatten().collect(),
            biases: l.biases,
        }
    }
}

impl TryFrom<LayerSer> for Layer {
    type Error = String;
    fn try_from(s: LayerSer) -> std::result::Result<Self, String> {
        if s.weights.len() != s.in_dim * s.out_dim || s.biases.len() != s.out_dim {
            return Err(format!(
                "layer shape {}x{} does not match {} weights / {} biases",
                s.out_dim,
                s.in_dim,
                s.weights.len(),
                s.biases.len()
            ));
        }
        let weights = s.weights.chunks(s.in_dim).map(|row| row.to_vec()).collect();
        Ok(Layer {
            weights,
            biases: s.biases,
        })
    }
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn out_dim(&self) -> usize {
        self.weights.len()
    }

    fn affine(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(self.biases.iter())
            .map(|(row, b)| {
                row.iter()
                    .zip(input.iter())
                    .map(|(w, x)| w * x)
                    .sum::<f64>()
                    + b
            })
            .collect()
    }
}

/// Feed-forward network. Every layer but the last applies the sigmoid; the
/// last layer is a linear regression head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// Seeded initialization with weights and biases uniform in
    /// +-1/sqrt(fan_in). `sizes` lists the layer widths input-first, e.g.
    /// `[d, 16, 8, 1]`.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Mlp> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidArgument(
                "network needs at least [in, out] layer sizes, all nonzero".into(),
            ));
        }
        let mut rng = rng_from(seed);
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut sample = || (rng.random::<f64>() * 2.0 - 1.0) * bound;
            let weights = (0..fan_out)
                .map(|_| (0..fan_in).map(|_| sample()).collect())
                .collect();
            let biases = (0..fan_out).map(|_| sample()).collect();
            layers.push(Layer { weights, biases });
        }
        Ok(Mlp { layers })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Mlp> {
        let m = Mlp { layers };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidArgument("network has no layers".into()));
        }
        for pair in self.layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::DimMismatch {
                    expected: pair[0].out_dim(),
                    got: pair[1].in_dim(),
                });
            }
        }
        for l in &self.layers {
            let finite = l.weights.iter().flatten().all(|w| w.is_finite())
                && l.biases.iter().all(|b| b.is_finite());
            if !finite {
                return Err(Error::InvalidArgument("non-finite parameter".into()));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// Apply the network: sigmoid through the hidden layers, linear head.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(input)?.pop().unwrap())
    }

    /// Like [`Mlp::forward`] but returns every activation, input first,
    /// output last.
    pub fn forward_trace(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        if input.len() != self.input_dim() {
            return Err(Error::DimMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(acts.last().unwrap());
            if l != last {
                for v in &mut z {
                    *v = sigmoid(*v);
                }
            }
            acts.push(z);
        }
        Ok(acts)
    }
}

/// Parameter gradients, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(model: &Mlp) -> Gradients {
        Gradients {
            weights: model
                .layers
                .iter()
                .map(|l| vec![vec![0.0; l.in_dim()]; l.out_dim()])
                .collect(),
            biases: model
                .layers
                .iter()
                .map(|l| vec![0.0; l.out_dim()])
                .collect(),
        }
    }
}

/// Mean squared error over a batch: mean over samples and output components.
pub fn mse(model: &Mlp, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    check_batch(model, inputs, targets)?;
    let m = model.output_dim() as f64;
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(targets.iter()) {
        let out = model.forward(x)?;
        total += out
            .iter()
            .zip(y.iter())
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>();
    }
    Ok(total / (inputs.len() as f64 * m))
}

fn check_batch(model: &Mlp, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<()> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "batch of {} inputs vs {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    for x in inputs {
        if x.len() != model.input_dim() {
            return Err(Error::DimMismatch {
                expected: model.input_dim(),
                got: x.len(),
            });
        }
    }
    for y in targets {
        if y.len() != model.output_dim() {
            return Err(Error::DimMismatch {
                expected: model.output_dim(),
                got: y.len(),
            });
        }
    }
    Ok(())
}

/// Exact gradient of the batch mean squared error via backpropagation.
pub fn gradient(model: &Mlp, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<Gradients> {
    check_batch(model, inputs, targets)?;
    let n = inputs.len() as f64;
    let m = model.output_dim() as f64;
    let last = model.layers.len() - 1;
    let mut grads = Gradients::zeros_like(model);

    for (x, y) in inputs.iter().zip(targets.iter()) {
        let acts = model.forward_trace(x)?;
        // Output layer is linear: dL/dz_L = 2 (a_L - y) / (n m).
        let mut delta: Vec<f64> = acts[last + 1]
            .iter()
            .zip(y.iter())
            .map(|(p, t)| 2.0 * (p - t) / (n * m))
            .collect();

        for l in (0..=last).rev() {
            let input = &acts[l];
            for (j, d) in delta.iter().enumerate() {
                for (i, xi) in input.iter().enumerate() {
                    grads.weights[l][j][i] += d * xi;
                }
                grads.biases[l][j] += d;
            }
            if l > 0 {
                // Propagate through the sigmoid of the previous layer.
                let layer = &model.layers[l];
                let prev_act = &acts[l];
                delta = (0..layer.in_dim())
                    .map(|i| {
                        let upstream: f64 = delta
                            .iter()
                            .zip(layer.weights.iter())
                            .map(|(d, row)| d * row[i])
                            .sum();
                        upstream * prev_act[i] * (1.0 - prev_act[i])
                    })
                    .collect();
            }
        }
    }
    Ok(grads)
}

/// Hyperparameters for [`train`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Full-dataset mean squared error recorded after each epoch.
    pub epoch_losses: Vec<f64>,
    pub final_loss: f64,
    pub epochs_run: usize,
}

/// Seeded mini-batch gradient descent on mean squared error. Deterministic
/// for a fixed seed. Aborts when an epoch loss exceeds 1e6 times the initial
/// loss (divergence guard).
pub fn train(
    model: &Mlp,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    hyper: &TrainHyper,
) -> Result<(Mlp, TrainReport)> {
    if hyper.lr < 0.0 || hyper.epochs < 1 || hyper.batch_size < 1 {
        return Err(Error::InvalidArgument(
            "train requires lr >= 0, epochs >= 1, batch_size >= 1".into(),
        ));
    }
    check_batch(model, inputs, targets)?;

    let n = inputs.len();
    let batch = hyper.batch_size.min(n);
    let initial_loss = mse(model, inputs, targets)?;
    let limit = 1e6 * initial_loss;

    let mut trained = model.clone();
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);

    for epoch in 0..hyper.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        {
            use rand::seq::SliceRandom;
            order.shuffle(&mut rng_from(mix_seed(hyper.seed, epoch as u64)));
        }
        for chunk in order.chunks(batch) {
            let bx: Vec<Vec<f64>> = chunk.iter().map(|&i| inputs[i].clone()).collect();
            let by: Vec<Vec<f64>> = chunk.iter().map(|&i| targets[i].clone()).collect();
            let g = gradient(&trained, &bx, &by)?;
            for (l, layer) in trained.layers.iter_mut().enumerate() {
                for (j, row) in layer.weights.iter_mut().enumerate() {
                    for (i, w) in row.iter_mut().enumerate() {
                        *w -= hyper.lr * g.weights[l][j][i];
                    }
                    layer.biases[j] -= hyper.lr * g.biases[l][j];
                }
            }
        }
        let loss = mse(&trained, inputs, targets)?;
        if !loss.is_finite() || loss > limit {
            return Err(Error::Diverged { loss, limit });
        }
        epoch_losses.push(loss);
    }

    let report = TrainReport {
        final_loss: *epoch_losses.last().unwrap(),
        epochs_run: epoch_losses.len(),
        epoch_losses,
    };
    Ok((trained, report))
}

/// Normalized decision value of a model output against the target-space
/// statistics at column `k`: `(x - mean) / delta`.
pub fn decision_value(x: f64, params: &NormParams, k: usize) -> Result<f64> {
    params.apply_scalar(x, k)
}
