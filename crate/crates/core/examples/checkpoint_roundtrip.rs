//! Trains briefly, saves a checkpoint, reloads it and compares predictions.
//!
//! ```bash
//! cargo run --release -p metasurf --example checkpoint_roundtrip
//! ```

use metasurf::neural::{load_checkpoint, save_checkpoint};
use metasurf::pipeline::{generate_dataset, split, to_arrays, train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = TrainConfig { epochs: 20, ..TrainConfig::default() };
    let data = generate_dataset(200, config.seed)?;
    let (train_set, test_set) = split(&data, config.split_ratio, config.seed)?;
    let outcome = train(&train_set, &test_set, &config)?;

    let bytes = save_checkpoint(&outcome.network, Some(&outcome.optimizer));
    let path = std::env::temp_dir().join("metasurf-example.bin");
    std::fs::write(&path, &bytes)?;
    let (loaded, optimizer) = load_checkpoint(&std::fs::read(&path)?)?;
    std::fs::remove_file(&path)?;

    let (x, _) = to_arrays(&test_set);
    let same = outcome.network.predict(&x)? == loaded.predict(&x)?;
    println!("{} bytes, {} parameters", bytes.len(), loaded.parameter_count());
    println!("optimizer step {}", optimizer.map_or(0, |o| o.step));
    println!("predictions identical after reload: {same}");

    let mut corrupt = bytes.clone();
    corrupt[100] ^= 1;
    println!("corrupted copy: {}", load_checkpoint(&corrupt).unwrap_err());
    Ok(())
}
