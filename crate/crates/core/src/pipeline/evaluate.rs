use ndarray::Array2;

use super::dataset::{to_arrays, DatasetRecord};
use super::PipelineError;
use crate::geometry::{BITS_PER_TILE, CODE_BITS};
use crate::neural::{mse_batch, Network, NeuralError};

/// Anything that maps a batch of 24-wide inputs to 48 activations in `[0, 1]`.
pub trait Predictor {
    fn predict_batch(&self, x: &Array2<f64>) -> Result<Array2<f64>, NeuralError>;
}

impl Predictor for Network {
    fn predict_batch(&self, x: &Array2<f64>) -> Result<Array2<f64>, NeuralError> {
        self.predict(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Share of the 48 thresholded bits matching the label.
    pub per_bit_accuracy: f64,
    /// Share of 3-bit tile codes decoded exactly.
    pub per_slot_accuracy: f64,
    /// Share of records whose whole 48-bit code is exact.
    pub exact_cell_rate: f64,
    pub mse: f64,
}

/// Bit accuracy after thresholding at 0.5 (ties to 1).
pub fn per_bit_accuracy(pred: &Array2<f64>, labels: &Array2<f64>) -> f64 {
    let hits = ndarray::Zip::from(pred)
        .and(labels)
        .fold(0usize, |acc, &p, &l| acc + usize::from((p >= 0.5) == (l >= 0.5)));
    hits as f64 / pred.len() as f64
}

pub fn evaluate<P: Predictor + ?Sized>(model: &P, records: &[DatasetRecord]) -> Result<Metrics, PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    let (x, y) = to_arrays(records);
    let pred = model.predict_batch(&x)?;
    if pred.dim() != y.dim() {
        return Err(NeuralError::WidthMismatch {
            expected: CODE_BITS,
            got: pred.ncols(),
        }
        .into());
    }
    let mut bits = 0usize;
    let mut slots = 0usize;
    let mut cells = 0usize;
    for (p, l) in pred.outer_iter().zip(y.outer_iter()) {
        let hit: Vec<bool> = p.iter().zip(l.iter()).map(|(&p, &l)| (p >= 0.5) == (l >= 0.5)).collect();
        bits += hit.iter().filter(|&&h| h).count();
        let slot_hits = hit.chunks(BITS_PER_TILE).filter(|c| c.iter().all(|&h| h)).count();
        slots += slot_hits;
        cells += usize::from(slot_hits == CODE_BITS / BITS_PER_TILE);
    }
    let n = records.len() as f64;
    Ok(Metrics {
        per_bit_accuracy: bits as f64 / (n * CODE_BITS as f64),
        per_slot_accuracy: slots as f64 / (n * (CODE_BITS / BITS_PER_TILE) as f64),
        exact_cell_rate: cells as f64 / n,
        mse: mse_batch(&pred, &y)?,
    })
}

/// Accuracy of the best constant predictor: each bit position predicts its
/// majority value over `records`.
pub fn constant_baseline(records: &[DatasetRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let n = records.len() as f64;
    (0..CODE_BITS)
        .map(|k| {
            let ones = records.iter().filter(|r| r.label.bit(k) == 1).count() as f64 / n;
            ones.max(1.0 - ones)
        })
        .sum::<f64>()
        / CODE_BITS as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::generate_dataset;

    /// Returns the true labels: looks each input row up in the records.
    struct Oracle<'a>(&'a [DatasetRecord]);

    impl Predictor for Oracle<'_> {
        fn predict_batch(&self, x: &Array2<f64>) -> Result<Array2<f64>, NeuralError> {
            let (_, y) = to_arrays(self.0);
            assert_eq!(x.nrows(), y.nrows());
            Ok(y)
        }
    }

    struct Constant(f64);

    impl Predictor for Constant {
        fn predict_batch(&self, x: &Array2<f64>) -> Result<Array2<f64>, NeuralError> {
            Ok(Array2::from_elem((x.nrows(), CODE_BITS), self.0))
        }
    }

    #[test]
    fn oracle_scores_perfectly() {
        let data = generate_dataset(40, 1).unwrap();
        let m = evaluate(&Oracle(&data), &data).unwrap();
        assert_eq!((m.per_bit_accuracy, m.per_slot_accuracy, m.exact_cell_rate, m.mse), (1.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn half_output_predicts_all_ones() {
        let data = generate_dataset(500, 2).unwrap();
        let m = evaluate(&Constant(0.5), &data).unwrap();
        let ones: u32 = data.iter().map(|r| r.label.count_ones()).sum();
        let expected = ones as f64 / (data.len() * CODE_BITS) as f64;
        assert!((m.per_bit_accuracy - expected).abs() < 1e-12);
        assert!((m.per_bit_accuracy - 0.5).abs() < 0.02);
        assert_eq!(m.mse, 0.25);
    }

    #[test]
    fn metric_ordering() {
        let data = generate_dataset(200, 3).unwrap();
        let net = crate::pipeline::TrainConfig::default().build_network().unwrap();
        for m in [evaluate(&net, &data).unwrap(), evaluate(&Constant(0.2), &data).unwrap()] {
            assert!(m.exact_cell_rate <= m.per_slot_accuracy);
            assert!(m.per_slot_accuracy <= m.per_bit_accuracy);
            assert!((0.0..=1.0).contains(&m.per_bit_accuracy));
        }
    }

    #[test]
    fn baseline_at_least_half() {
        let data = generate_dataset(300, 4).unwrap();
        let b = constant_baseline(&data);
        assert!((0.5..0.6).contains(&b));
    }
}
