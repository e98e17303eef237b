//! Trains a short run, then designs cells for two hand-written targets and
//! checks them against the surrogate.
//!
//! ```bash
//! cargo run --release -p metasurf --example design_from_target -- 300
//! ```

use metasurf::features::{DesignTarget, NotchFeature};
use metasurf::geometry::{render, RenderFormat};
use metasurf::pipeline::{design, generate_dataset, split, train, verify_design, Tolerances, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let epochs = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(300);
    let config = TrainConfig { epochs, ..TrainConfig::default() };
    let data = generate_dataset(2000, config.seed)?;
    let (train_set, test_set) = split(&data, config.split_ratio, config.seed)?;
    let network = train(&train_set, &test_set, &config)?.network;

    let targets = [
        DesignTarget::new(
            vec![NotchFeature::new(27.5, -30.0, 0.5)],
            vec![NotchFeature::new(14.0, -22.0, 0.2)],
        )?,
        DesignTarget::new(
            vec![NotchFeature::new(24.5, -34.5, 0.5)],
            vec![
                NotchFeature::new(10.0, -18.5, 0.2),
                NotchFeature::new(14.5, -20.0, 0.4),
                NotchFeature::new(33.0, -14.0, 0.3),
            ],
        )?,
    ];
    for target in &targets {
        let proposal = design(&network, target)?;
        println!("designed {} in {:.2} ms", proposal.cell, proposal.elapsed.as_secs_f64() * 1e3);
        print!("{}", String::from_utf8(render(&proposal.cell, RenderFormat::Ascii))?);
        print!("{}", verify_design(&proposal.cell, target, Tolerances::default()).to_text());
    }
    Ok(())
}
