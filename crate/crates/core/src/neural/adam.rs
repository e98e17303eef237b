use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment accumulators for a list of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    /// Fresh state for parameter tensors of the given flat lengths.
    pub fn new(config: AdamConfig, lengths: &[usize]) -> Self {
        Self {
            config,
            step: 0,
            first_moment: lengths.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: lengths.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.first_moment.iter().map(Vec::len).collect()
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn update(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NeuralError> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(NeuralError::ShapeMismatch);
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first_moment) {
            if p.len() != m.len() || g.len() != m.len() {
                return Err(NeuralError::ShapeMismatch);
            }
        }

        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let correct1 = 1.0 - beta1.powf(self.step as f64);
        let correct2 = 1.0 - beta2.powf(self.step as f64);

        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            for (((theta, &grad), m), v) in p.iter_mut().zip(g.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = beta1 * *m + (1.0 - beta1) * grad;
                *v = beta2 * *v + (1.0 - beta2) * grad * grad;
                let m_hat = *m / correct1;
                let v_hat = *v / correct2;
                *theta -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}
