use std::fmt::Write as _;
use std::time::{Duration, Instant};

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::{to_arrays, DatasetRecord};
use super::evaluate::per_bit_accuracy;
use super::PipelineError;
use crate::features::INPUT_WIDTH;
use crate::geometry::CODE_BITS;
use crate::neural::{
    default_topology, mse_batch, AdamConfig, AdamState, Network, DEFAULT_DROPOUT, DEFAULT_HIDDEN,
};

/// Minimum test-MSE improvement that resets the early-stop counter.
pub const EARLY_STOP_MIN_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub split_ratio: f64,
    /// `None` trains on the full set every step.
    pub batch_size: Option<usize>,
    pub seed: u64,
    /// Stop after this many epochs without test-MSE improvement.
    pub patience: Option<usize>,
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 5000,
            learning_rate: AdamConfig::default().learning_rate,
            dropout: DEFAULT_DROPOUT,
            split_ratio: 0.7,
            batch_size: None,
            seed: 42,
            patience: None,
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad(format!("split ratio {} outside (0, 1)", self.split_ratio));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.batch_size == Some(0) {
            return bad("batch size must be positive".into());
        }
        Ok(())
    }

    pub fn build_network(&self) -> Result<Network, PipelineError> {
        Ok(Network::new(
            INPUT_WIDTH,
            &default_topology(&self.hidden, self.dropout, CODE_BITS),
            self.seed,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Training-mode (dropout active) MSE of the epoch's updates.
    pub train_mse: f64,
    pub test_mse: f64,
    pub per_bit_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub wall_clock: Duration,
    /// Epoch whose weights were kept (highest test accuracy, earliest on ties).
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_mse,test_mse,per_bit_acc\n");
        for e in &self.epochs {
            writeln!(out, "{},{:.9},{:.9},{:.6}", e.epoch, e.train_mse, e.test_mse, e.per_bit_acc).unwrap();
        }
        out
    }

    pub fn last(&self) -> &EpochRecord {
        self.epochs.last().expect("at least one epoch")
    }

    pub fn best(&self) -> &EpochRecord {
        &self.epochs[self.best_epoch - 1]
    }
}

/// Best network found, its optimizer state and the training curves.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: Network,
    pub optimizer: AdamState,
    pub report: TrainReport,
}

pub fn train(train: &[DatasetRecord], test: &[DatasetRecord], config: &TrainConfig) -> Result<TrainOutcome, PipelineError> {
    train_with_progress(train, test, config, |_| {})
}

/// Like [`train`], calling `progress` after every epoch.
pub fn train_with_progress<F>(
    train: &[DatasetRecord],
    test: &[DatasetRecord],
    config: &TrainConfig,
    mut progress: F,
) -> Result<TrainOutcome, PipelineError>
where
    F: FnMut(&EpochRecord),
{
    config.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let started = Instant::now();
    let (x_train, y_train) = to_arrays(train);
    let (x_test, y_test) = to_arrays(test);

    let mut network = config.build_network()?;
    let adam = AdamConfig {
        learning_rate: config.learning_rate,
        ..AdamConfig::default()
    };
    let mut optimizer = AdamState::new(adam, &network.parameter_lengths());
    // stream 0 of this seed initialized the weights
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let n = train.len();
    let batch = config.batch_size.unwrap_or(n).min(n);
    let mut order: Vec<usize> = (0..n).collect();

    let mut epochs = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, Network, AdamState)> = None;
    let mut best_test_mse = f64::INFINITY;
    let mut stale = 0usize;
    let mut stopped_early = false;

    for epoch in 1..=config.epochs {
        let mut loss_sum = 0.0;
        if batch < n {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            let (xb, yb) = if batch == n {
                (x_train.view().to_owned(), y_train.view().to_owned())
            } else {
                (x_train.select(Axis(0), chunk), y_train.select(Axis(0), chunk))
            };
            loss_sum += step(&mut network, &mut optimizer, &xb, &yb, &mut rng)? * chunk.len() as f64;
        }
        let train_mse = loss_sum / n as f64;
        if !train_mse.is_finite() {
            return Err(PipelineError::Diverged { epoch, loss: train_mse });
        }

        let pred = network.predict(&x_test)?;
        let test_mse = mse_batch(&pred, &y_test)?;
        if !test_mse.is_finite() {
            return Err(PipelineError::Diverged { epoch, loss: test_mse });
        }
        let record = EpochRecord {
            epoch,
            train_mse,
            test_mse,
            per_bit_acc: per_bit_accuracy(&pred, &y_test),
        };
        progress(&record);
        epochs.push(record);

        if best.as_ref().is_none_or(|(acc, ..)| record.per_bit_acc > *acc) {
            best = Some((record.per_bit_acc, epoch, network.clone(), optimizer.clone()));
        }

        if let Some(patience) = config.patience {
            if test_mse < best_test_mse - EARLY_STOP_MIN_DELTA {
                best_test_mse = test_mse;
                stale = 0;
            } else {
                stale += 1;
                if stale >= patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    let (_, best_epoch, network, optimizer) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        network,
        optimizer,
        report: TrainReport {
            epochs,
            wall_clock: started.elapsed(),
            best_epoch,
            stopped_early,
        },
    })
}

/// One forward/backward/update; returns the training-mode batch loss.
fn step(
    network: &mut Network,
    optimizer: &mut AdamState,
    x: &Array2<f64>,
    y: &Array2<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<f64, PipelineError> {
    let trace = network.forward_train(x, rng)?;
    let loss = mse_batch(trace.output(), y)?;
    let grads = network.backward(&trace, y)?;
    optimizer.update(&mut network.parameters_mut(), &grads.slices())?;
    Ok(loss)
}
