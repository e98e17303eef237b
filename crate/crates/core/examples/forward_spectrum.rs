//! Forward-simulates a unit cell with the surrogate and lists the notches
//! each polarization shows.
//!
//! ```bash
//! cargo run -p metasurf --example forward_spectrum -- 0,0,3,3,0,0,3,3,5,5,5,5,5,5,5,5
//! ```

use metasurf::features::extract_notches;
use metasurf::geometry::UnitCell;
use metasurf::surrogate::{notch_params, reflection_spectrum, spectra_csv, Polarization};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "0,0,3,3,0,0,3,3,5,5,5,5,5,5,5,5".into());
    let ids = arg.split(',').map(|s| s.trim().parse()).collect::<Result<Vec<i64>, _>>()?;
    let cell = UnitCell::from_ids(&ids)?;

    for pol in Polarization::BOTH {
        println!("{pol:?}");
        for n in notch_params(&cell, pol) {
            println!(
                "  model notch  {:7.3} GHz  {:7.2} dB  half-width {:.2} GHz",
                n.center_ghz, n.depth_db, n.halfwidth_ghz
            );
        }
        for f in extract_notches(&reflection_spectrum(&cell, pol)) {
            println!(
                "  extracted    {:7.3} GHz  {:7.2} dB  -10 dB width {:.3} GHz",
                f.frequency_ghz, f.depth_db, f.bandwidth_ghz
            );
        }
    }

    let csv = spectra_csv(
        &reflection_spectrum(&cell, Polarization::Te),
        &reflection_spectrum(&cell, Polarization::Tm),
    );
    println!("first rows of the spectra CSV:");
    for line in csv.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
