use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Activation, DenseLayer, DropoutLayer, Layer, NeuralError};

/// Topology entry used to build a [`Network`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Dense { outputs: usize, activation: Activation },
    Dropout { rate: f64 },
}

/// Widths of the hidden dense layers in the default topology.
pub const DEFAULT_HIDDEN: [usize; 5] = [64, 128, 256, 256, 128];
pub const DEFAULT_DROPOUT: f64 = 0.2;

/// Dense ReLU layers interleaved with dropout, closed by a sigmoid layer.
/// Five hidden widths give the 11-layer default.
pub fn default_topology(hidden: &[usize], dropout: f64, outputs: usize) -> Vec<LayerSpec> {
    let mut specs = Vec::new();
    for (k, &width) in hidden.iter().enumerate() {
        if k > 0 {
            specs.push(LayerSpec::Dropout { rate: dropout });
        }
        specs.push(LayerSpec::Dense {
            outputs: width,
            activation: Activation::Relu,
        });
    }
    specs.push(LayerSpec::Dropout { rate: dropout });
    specs.push(LayerSpec::Dense {
        outputs,
        activation: Activation::Sigmoid,
    });
    specs
}

/// An ordered stack of dense and dropout layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    inputs: usize,
    seed: u64,
}

/// Activations recorded by a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// Input to each layer, plus the network output last.
    activations: Vec<Array2<f64>>,
    /// Pre-activation of each dense layer (`None` for dropout).
    pre: Vec<Option<Array2<f64>>>,
    /// Multiplier mask of each dropout layer (`None` for dense).
    masks: Vec<Option<Array2<f64>>>,
}

impl Trace {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("trace holds the input")
    }

    pub fn masks(&self) -> &[Option<Array2<f64>>] {
        &self.masks
    }
}

/// Loss gradients, one `(dW, db)` pair per dense layer in stack order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub dense: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Gradients {
    /// Flat views in the same order as [`Network::parameters_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        self.dense
            .iter()
            .flat_map(|(w, b)| {
                [
                    w.as_slice().expect("standard layout"),
                    b.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Network {
    /// Builds and seeds a network for `inputs`-wide samples.
    pub fn new(inputs: usize, specs: &[LayerSpec], seed: u64) -> Result<Self, NeuralError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut width = inputs;
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            match *spec {
                LayerSpec::Dense { outputs, activation } => {
                    layers.push(Layer::Dense(DenseLayer::initialized(width, outputs, activation, &mut rng)));
                    width = outputs;
                }
                LayerSpec::Dropout { rate } => layers.push(Layer::Dropout(DropoutLayer::new(rate)?)),
            }
        }
        Self::from_layers(inputs, layers, seed)
    }

    /// The default 24→48 topology.
    pub fn default_for(inputs: usize, outputs: usize, dropout: f64, seed: u64) -> Result<Self, NeuralError> {
        Self::new(inputs, &default_topology(&DEFAULT_HIDDEN, dropout, outputs), seed)
    }

    pub fn from_layers(inputs: usize, layers: Vec<Layer>, seed: u64) -> Result<Self, NeuralError> {
        if !layers.iter().any(|l| matches!(l, Layer::Dense(_))) {
            return Err(NeuralError::EmptyNetwork);
        }
        let mut width = inputs;
        for layer in &layers {
            if let Layer::Dense(d) = layer {
                if d.inputs() != width {
                    return Err(NeuralError::WidthMismatch {
                        expected: width,
                        got: d.inputs(),
                    });
                }
                width = d.outputs();
            }
        }
        Ok(Self { layers, inputs, seed })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Seed the weights were initialized from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_width(&self) -> usize {
        self.inputs
    }

    pub fn output_width(&self) -> usize {
        self.dense_layers().last().map_or(self.inputs, |d| d.outputs())
    }

    pub fn dense_layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            Layer::Dropout(_) => None,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.dense_layers().map(|d| d.weights.len() + d.biases.len()).sum()
    }

    /// Mutable flat parameter views: `W0, b0, W1, b1, ...`.
    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            if let Layer::Dense(d) = layer {
                out.push(d.weights.as_slice_mut().expect("standard layout"));
                out.push(d.biases.as_slice_mut().expect("standard layout"));
            }
        }
        out
    }

    pub fn parameter_lengths(&self) -> Vec<usize> {
        self.dense_layers()
            .flat_map(|d| [d.weights.len(), d.biases.len()])
            .collect()
    }

    fn check_input(&self, x: &Array2<f64>) -> Result<(), NeuralError> {
        if x.ncols() != self.inputs {
            return Err(NeuralError::WidthMismatch {
                expected: self.inputs,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Inference-mode forward pass over a batch (one sample per row).
    pub fn predict(&self, x: &Array2<f64>) -> Result<Array2<f64>, NeuralError> {
        self.check_input(x)?;
        let mut a = x.to_owned();
        for layer in &self.layers {
            if let Layer::Dense(d) = layer {
                a = d.activate(&d.pre_activation(&a));
            }
        }
        Ok(a)
    }

    pub fn predict_one(&self, x: &[f64]) -> Result<Vec<f64>, NeuralError> {
        let batch = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row vector");
        Ok(self.predict(&batch)?.into_raw_vec_and_offset().0)
    }

    /// Training-mode forward pass with fresh dropout masks.
    pub fn forward_train<R: Rng + ?Sized>(&self, x: &Array2<f64>, rng: &mut R) -> Result<Trace, NeuralError> {
        self.check_input(x)?;
        let mut masks = Vec::with_capacity(self.layers.len());
        let mut width = self.inputs;
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) => {
                    masks.push(None);
                    width = d.outputs();
                }
                Layer::Dropout(p) => masks.push(Some(p.sample_mask((x.nrows(), width), rng))),
            }
        }
        self.forward_with_masks(x, masks)
    }

    /// Forward pass reusing given dropout masks. Replaying the masks of an
    /// earlier trace makes the pass a deterministic function of the weights.
    pub fn forward_with_masks(&self, x: &Array2<f64>, masks: Vec<Option<Array2<f64>>>) -> Result<Trace, NeuralError> {
        self.check_input(x)?;
        if masks.len() != self.layers.len() {
            return Err(NeuralError::TraceMismatch("mask count differs from layer count"));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        activations.push(x.to_owned());
        for (layer, mask) in self.layers.iter().zip(&masks) {
            let a = activations.last().expect("non-empty");
            match (layer, mask) {
                (Layer::Dense(d), None) => {
                    let z = d.pre_activation(a);
                    let y = d.activate(&z);
                    pre.push(Some(z));
                    activations.push(y);
                }
                (Layer::Dropout(_), Some(m)) => {
                    if m.dim() != a.dim() {
                        return Err(NeuralError::TraceMismatch("dropout mask shape"));
                    }
                    pre.push(None);
                    activations.push(a * m);
                }
                _ => return Err(NeuralError::TraceMismatch("mask placement does not match layer kinds")),
            }
        }
        Ok(Trace { activations, pre, masks })
    }

    /// Mean-squared-error gradients for a recorded trace.
    pub fn backward(&self, trace: &Trace, target: &Array2<f64>) -> Result<Gradients, NeuralError> {
        if trace.activations.len() != self.layers.len() + 1 || trace.pre.len() != self.layers.len() {
            return Err(NeuralError::TraceMismatch("trace was recorded on a different network"));
        }
        let output = trace.output();
        if output.dim() != target.dim() {
            return Err(NeuralError::WidthMismatch {
                expected: output.len(),
                got: target.len(),
            });
        }
        let mut grad = mse_gradient(output, target);
        let mut dense = Vec::new();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            match layer {
                Layer::Dense(d) => {
                    let z = trace.pre[k]
                        .as_ref()
                        .ok_or(NeuralError::TraceMismatch("missing pre-activation"))?;
                    let (dw, db, dx) = d.backward(&trace.activations[k], z, &trace.activations[k + 1], &grad);
                    dense.push((dw, db));
                    grad = dx;
                }
                Layer::Dropout(_) => {
                    let m = trace.masks[k]
                        .as_ref()
                        .ok_or(NeuralError::TraceMismatch("missing dropout mask"))?;
                    grad *= m;
                }
            }
        }
        dense.reverse();
        Ok(Gradients { dense })
    }
}

/// `(1/m) Σ (pred − target)²` over equal-length slices.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64, NeuralError> {
    if pred.len() != target.len() {
        return Err(NeuralError::WidthMismatch {
            expected: target.len(),
            got: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(NeuralError::EmptyBatch);
    }
    Ok(pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64)
}

/// Batch MSE over every element.
pub fn mse_batch(pred: &Array2<f64>, target: &Array2<f64>) -> Result<f64, NeuralError> {
    if pred.dim() != target.dim() {
        return Err(NeuralError::WidthMismatch {
            expected: target.len(),
            got: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(NeuralError::EmptyBatch);
    }
    let sum: f64 = ndarray::Zip::from(pred)
        .and(target)
        .fold(0.0, |acc, &p, &t| acc + (p - t) * (p - t));
    Ok(sum / pred.len() as f64)
}

fn mse_gradient(pred: &Array2<f64>, target: &Array2<f64>) -> Array2<f64> {
    let scale = 2.0 / pred.len() as f64;
    let mut g = pred - target;
    g *= scale;
    g
}
