use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use super::{Activation, Mode, NeuralError};

/// Fully connected layer computing `φ(W·x + b)`; `weights` is `[out × in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Array2<f64>, biases: Array1<f64>, activation: Activation) -> Result<Self, NeuralError> {
        if weights.nrows() != biases.len() {
            return Err(NeuralError::WidthMismatch {
                expected: weights.nrows(),
                got: biases.len(),
            });
        }
        Ok(Self {
            weights: weights.as_standard_layout().into_owned(),
            biases,
            activation,
        })
    }

    /// He-normal weights for ReLU, Xavier-uniform otherwise; zero biases.
    pub fn initialized<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let weights = match activation {
            Activation::Relu => {
                let normal = Normal::new(0.0, (2.0 / inputs as f64).sqrt()).expect("positive std");
                Array2::from_shape_simple_fn((outputs, inputs), || normal.sample(rng))
            }
            Activation::Sigmoid | Activation::Identity => {
                let limit = (6.0 / (inputs + outputs) as f64).sqrt();
                let uniform = Uniform::new_inclusive(-limit, limit);
                Array2::from_shape_simple_fn((outputs, inputs), || uniform.sample(rng))
            }
        };
        Self {
            weights,
            biases: Array1::zeros(outputs),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    /// Single-sample forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NeuralError> {
        if x.len() != self.inputs() {
            return Err(NeuralError::WidthMismatch {
                expected: self.inputs(),
                got: x.len(),
            });
        }
        Ok(self
            .weights
            .outer_iter()
            .zip(&self.biases)
            .map(|(row, b)| {
                let z: f64 = row.iter().zip(x).map(|(w, a)| w * a).sum::<f64>() + b;
                self.activation.apply(z)
            })
            .collect())
    }

    /// Batch pre-activations, one sample per row.
    pub(crate) fn pre_activation(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.weights.t());
        z += &self.biases;
        z
    }

    pub(crate) fn activate(&self, z: &Array2<f64>) -> Array2<f64> {
        let act = self.activation;
        z.mapv(|v| act.apply(v))
    }

    /// Returns `(dW, db, dX)` for upstream gradient `dy`.
    pub(crate) fn backward(
        &self,
        x: &Array2<f64>,
        z: &Array2<f64>,
        y: &Array2<f64>,
        dy: &Array2<f64>,
    ) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
        let act = self.activation;
        let mut dz = dy.clone();
        ndarray::Zip::from(&mut dz)
            .and(z)
            .and(y)
            .for_each(|d, &zv, &yv| *d *= act.derivative(zv, yv));
        let dw = dz.t().dot(x);
        let db = dz.sum_axis(Axis(0));
        let dx = dz.dot(&self.weights);
        (dw, db, dx)
    }
}

/// Inverted dropout: train-time survivors are scaled by `1/(1-p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropoutLayer {
    rate: f64,
}

impl DropoutLayer {
    pub fn new(rate: f64) -> Result<Self, NeuralError> {
        if (0.0..1.0).contains(&rate) {
            Ok(Self { rate })
        } else {
            Err(NeuralError::InvalidDropout(rate))
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn keep_scale(&self) -> f64 {
        1.0 / (1.0 - self.rate)
    }

    /// Single-vector pass returning the output and the applied mask.
    ///
    /// The mask holds the per-element multiplier: 0 for dropped elements and
    /// `1/(1-p)` for survivors (all ones in infer mode).
    pub fn forward<R: Rng + ?Sized>(&self, x: &[f64], mode: Mode, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let mask: Vec<f64> = match mode {
            Mode::Infer => vec![1.0; x.len()],
            Mode::Train => x.iter().map(|_| self.draw(rng)).collect(),
        };
        let out = x.iter().zip(&mask).map(|(v, m)| v * m).collect();
        (out, mask)
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.rate == 0.0 || rng.gen::<f64>() >= self.rate {
            self.keep_scale()
        } else {
            0.0
        }
    }

    pub(crate) fn sample_mask<R: Rng + ?Sized>(&self, shape: (usize, usize), rng: &mut R) -> Array2<f64> {
        Array2::from_shape_simple_fn(shape, || self.draw(rng))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(DenseLayer),
    Dropout(DropoutLayer),
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_layer_passes_through() {
        let layer = DenseLayer::new(Array2::eye(3), Array1::zeros(3), Activation::Identity).unwrap();
        assert_eq!(layer.forward(&[1.0, -2.0, 3.5]).unwrap(), vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn zero_weights_give_relu_of_bias() {
        let layer = DenseLayer::new(Array2::zeros((3, 2)), array![-1.0, 0.0, 2.0], Activation::Relu).unwrap();
        assert_eq!(layer.forward(&[5.0, 7.0]).unwrap(), vec![0.0, 0.0, 2.0]);
    }

    #[test]
    fn two_by_two_product() {
        let layer = DenseLayer::new(array![[1.0, 2.0], [3.0, 4.0]], array![1.0, -1.0], Activation::Identity).unwrap();
        assert_eq!(layer.forward(&[1.0, 1.0]).unwrap(), vec![4.0, 6.0]);
        let batch = layer.pre_activation(&array![[1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(batch, array![[4.0, 6.0], [3.0, 3.0]]);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let layer = DenseLayer::new(Array2::eye(2), Array1::zeros(2), Activation::Identity).unwrap();
        assert_eq!(
            layer.forward(&[1.0]),
            Err(NeuralError::WidthMismatch { expected: 2, got: 1 })
        );
        assert!(DenseLayer::new(Array2::eye(2), Array1::zeros(3), Activation::Relu).is_err());
    }

    #[test]
    fn dropout_identity_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..100).map(f64::from).collect();
        let (y, mask) = DropoutLayer::new(0.0).unwrap().forward(&x, Mode::Train, &mut rng);
        assert_eq!(y, x);
        assert!(mask.iter().all(|&m| m == 1.0));
        let (y, mask) = DropoutLayer::new(0.7).unwrap().forward(&x, Mode::Infer, &mut rng);
        assert_eq!(y, x);
        assert!(mask.iter().all(|&m| m == 1.0));
    }

    #[test]
    fn dropout_half_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let x = vec![1.5; 100_000];
        let (y, _) = DropoutLayer::new(0.5).unwrap().forward(&x, Mode::Train, &mut rng);
        let zeros = y.iter().filter(|&&v| v == 0.0).count() as f64 / y.len() as f64;
        assert!((zeros - 0.5).abs() <= 0.01, "zero fraction {zeros}");
        assert!(y.iter().all(|&v| v == 0.0 || v == 3.0));
    }

    #[test]
    fn dropout_rate_bounds() {
        assert!(DropoutLayer::new(1.0).is_err());
        assert!(DropoutLayer::new(-0.1).is_err());
        assert!(DropoutLayer::new(0.999).is_ok());
    }
}
