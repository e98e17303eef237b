//! Generates the default dataset, trains the network and designs a cell for
//! one held-out target.
//!
//! ```bash
//! cargo run --release -p metasurf --example train_and_design -- 300
//! ```
//! The optional argument overrides the epoch count (default 5000).

use metasurf::features::target_of_cell;
use metasurf::pipeline::{
    constant_baseline, design, evaluate, generate_dataset, split, train_with_progress, verify_design, Tolerances,
    TrainConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5000);
    let config = TrainConfig { epochs, ..TrainConfig::default() };

    let data = generate_dataset(2000, config.seed)?;
    let (train_set, test_set) = split(&data, config.split_ratio, config.seed)?;
    println!("train={} test={}", train_set.len(), test_set.len());

    let outcome = train_with_progress(&train_set, &test_set, &config, |e| {
        if e.epoch == 1 || e.epoch % 250 == 0 {
            println!(
                "epoch {:>5}  train_mse {:.5}  test_mse {:.5}  per_bit {:.4}",
                e.epoch, e.train_mse, e.test_mse, e.per_bit_acc
            );
        }
    })?;
    let m = evaluate(&outcome.network, &test_set)?;
    println!(
        "best epoch {} after {:.1}s: per_bit {:.4} (constant baseline {:.4}), per_slot {:.4}, exact {:.4}",
        outcome.report.best_epoch,
        outcome.report.wall_clock.as_secs_f64(),
        m.per_bit_accuracy,
        constant_baseline(&test_set),
        m.per_slot_accuracy,
        m.exact_cell_rate
    );

    let target = target_of_cell(&test_set[0].cell);
    let proposal = design(&outcome.network, &target)?;
    let report = verify_design(&proposal.cell, &target, Tolerances::default());
    println!("requested cell {}", test_set[0].cell);
    println!("designed  cell {}  ({:.2} ms)", proposal.cell, proposal.elapsed.as_secs_f64() * 1e3);
    print!("{}", report.to_text());
    Ok(())
}
