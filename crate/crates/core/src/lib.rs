//! Confined-output inverse design of dual-polarization annular metasurfaces.
//!
//! A unit cell is a 4×4 grid of eight annular tiles, so any structure is a
//! 48-bit code. A Lorentzian surrogate turns cells into TE/TM reflection
//! spectra, notch features of those spectra become a 24-value input vector,
//! and a dense network learns to map the features back to the code.
//!
//! ```no_run
//! use metasurf::pipeline::{generate_dataset, split, train, design, verify_design, TrainConfig, Tolerances};
//! use metasurf::features::target_of_cell;
//!
//! let data = generate_dataset(2000, 42)?;
//! let (train_set, test_set) = split(&data, 0.7, 42)?;
//! let outcome = train(&train_set, &test_set, &TrainConfig::default())?;
//! let target = target_of_cell(&test_set[0].cell);
//! let proposal = design(&outcome.network, &target)?;
//! let report = verify_design(&proposal.cell, &target, Tolerances::default());
//! println!("matched {:.0}% of requested notches", 100.0 * report.fraction());
//! # Ok::<(), metasurf::pipeline::PipelineError>(())
//! ```

pub mod cli;
pub mod features;
pub mod geometry;
pub mod neural;
pub mod pipeline;
pub mod surrogate;
