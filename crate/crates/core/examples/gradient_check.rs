//! Compares backprop gradients with central differences on a small network.
//!
//! ```bash
//! cargo run -p metasurf --example gradient_check
//! ```

use metasurf::neural::{mse_batch, Activation, LayerSpec, Network};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        LayerSpec::Dense { outputs: 8, activation: Activation::Relu },
        LayerSpec::Dropout { rate: 0.2 },
        LayerSpec::Dense { outputs: 48, activation: Activation::Sigmoid },
    ];
    let mut net = Network::new(24, &specs, 5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = Array2::from_shape_simple_fn((3, 24), || rng.gen_range(-1.0..1.0));
    let y = Array2::from_shape_simple_fn((3, 48), || f64::from(rng.gen_bool(0.5)));

    let trace = net.forward_train(&x, &mut rng)?;
    let analytic: Vec<Vec<f64>> = net.backward(&trace, &y)?.slices().iter().map(|s| s.to_vec()).collect();
    let masks = trace.masks().to_vec();
    let h = 1e-5;
    for (t, grads) in analytic.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (k, &a) in grads.iter().enumerate() {
            let original = net.parameters_mut()[t][k];
            net.parameters_mut()[t][k] = original + h;
            let plus = mse_batch(net.forward_with_masks(&x, masks.clone())?.output(), &y)?;
            net.parameters_mut()[t][k] = original - h;
            let minus = mse_batch(net.forward_with_masks(&x, masks.clone())?.output(), &y)?;
            net.parameters_mut()[t][k] = original;
            let numeric = (plus - minus) / (2.0 * h);
            let scale = a.abs().max(numeric.abs());
            if scale > 1e-8 {
                worst = worst.max((a - numeric).abs() / scale);
            }
        }
        println!("tensor {t}: {} values, worst relative error {worst:.2e}", grads.len());
    }
    Ok(())
}
