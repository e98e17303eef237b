//! Turns a design target into the 24-value network input and back, and shows
//! notch recovery on a synthetic spectrum.
//!
//! ```bash
//! cargo run -p metasurf --example feature_extraction
//! ```

use metasurf::features::{assemble_input, extract_notches, DesignTarget};
use metasurf::surrogate::{NotchParams, Polarization, ReflectionSpectrum};

const TARGET: &str = r#"{
  "te": [{"freq_ghz": 24.5, "depth_db": -34.5, "bandwidth_ghz": 0.5}],
  "tm": [{"freq_ghz": 10.0, "depth_db": -18.5, "bandwidth_ghz": 0.2},
         {"freq_ghz": 14.5, "depth_db": -20.0, "bandwidth_ghz": 0.4},
         {"freq_ghz": 33.0, "depth_db": -14.0, "bandwidth_ghz": 0.3}]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = DesignTarget::from_json(TARGET)?;
    let target = DesignTarget::new(raw.te, raw.tm)?;
    let input = assemble_input(&target)?;
    for (slot, triple) in input.values().chunks(3).enumerate() {
        let pol = if slot < 4 { "te" } else { "tm" };
        println!("{pol}{}  {:.5} {:.5} {:.5}", slot % 4, triple[0], triple[1], triple[2]);
    }
    assert_eq!(input.to_target().notches(Polarization::Tm).len(), 3);

    let truth = NotchParams { center_ghz: 17.03, depth_db: -27.0, halfwidth_ghz: 0.35 };
    let spectrum = ReflectionSpectrum::from_notches(Polarization::Te, &[truth]);
    for f in extract_notches(&spectrum) {
        println!(
            "synthetic notch at {:.2} GHz / {:.1} dB recovered as {:.4} GHz / {:.3} dB, width {:.3} GHz",
            truth.center_ghz, truth.depth_db, f.frequency_ghz, f.depth_db, f.bandwidth_ghz
        );
    }
    Ok(())
}
