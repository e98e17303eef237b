use std::time::{Duration, Instant};

use super::PipelineError;
use crate::features::{assemble_input, extract_notches, DesignTarget, NotchFeature};
use crate::geometry::{decode_bits, decode_soft, BitVector48, UnitCell};
use crate::neural::Network;
use crate::surrogate::{reflection_spectrum, Polarization};

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub cell: UnitCell,
    pub code: BitVector48,
    pub activations: Vec<f64>,
    pub elapsed: Duration,
}

/// Runs the network on a target and decodes the structure it proposes.
pub fn design(network: &Network, target: &DesignTarget) -> Result<Design, PipelineError> {
    let started = Instant::now();
    let input = assemble_input(target)?;
    let activations = network.predict_one(input.values())?;
    let code = decode_soft(&activations)?;
    let cell = decode_bits(code);
    Ok(Design {
        cell,
        code,
        activations,
        elapsed: started.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub frequency_ghz: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { frequency_ghz: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotchMatch {
    pub requested: NotchFeature,
    /// Closest qualifying notch within tolerance, if any.
    pub found: Option<NotchFeature>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationReport {
    pub polarization: Polarization,
    pub matches: Vec<NotchMatch>,
    /// Every notch the forward spectrum shows.
    pub observed: Vec<NotchFeature>,
}

impl PolarizationReport {
    pub fn matched(&self) -> usize {
        self.matches.iter().filter(|m| m.found.is_some()).count()
    }

    /// Matched share of requested notches; 1 when nothing was requested.
    pub fn fraction(&self) -> f64 {
        if self.matches.is_empty() {
            1.0
        } else {
            self.matched() as f64 / self.matches.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub te: PolarizationReport,
    pub tm: PolarizationReport,
}

impl VerificationReport {
    pub fn requested(&self) -> usize {
        self.te.matches.len() + self.tm.matches.len()
    }

    pub fn matched(&self) -> usize {
        self.te.matched() + self.tm.matched()
    }

    pub fn fraction(&self) -> f64 {
        match self.requested() {
            0 => 1.0,
            n => self.matched() as f64 / n as f64,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in [&self.te, &self.tm] {
            let name = match r.polarization {
                Polarization::Te => "te",
                Polarization::Tm => "tm",
            };
            out.push_str(&format!("{name}_matched={}/{} fraction={:.4}\n", r.matched(), r.matches.len(), r.fraction()));
            for m in &r.matches {
                match m.found {
                    Some(f) => out.push_str(&format!(
                        "  {name} {:.3} GHz -> found {:.3} GHz, {:.2} dB, {:.3} GHz wide\n",
                        m.requested.frequency_ghz, f.frequency_ghz, f.depth_db, f.bandwidth_ghz
                    )),
                    None => out.push_str(&format!("  {name} {:.3} GHz -> missing\n", m.requested.frequency_ghz)),
                }
            }
        }
        out.push_str(&format!("overall={}/{} fraction={:.4}\n", self.matched(), self.requested(), self.fraction()));
        out
    }
}

/// Forward-simulates `cell` and checks every requested notch against the
/// notches its spectra actually show.
pub fn verify_design(cell: &UnitCell, target: &DesignTarget, tolerances: Tolerances) -> VerificationReport {
    let check = |pol: Polarization| {
        let observed = extract_notches(&reflection_spectrum(cell, pol));
        let matches = target
            .notches(pol)
            .iter()
            .map(|&requested| NotchMatch {
                requested,
                found: observed
                    .iter()
                    .filter(|o| (o.frequency_ghz - requested.frequency_ghz).abs() <= tolerances.frequency_ghz)
                    .min_by(|a, b| {
                        let da = (a.frequency_ghz - requested.frequency_ghz).abs();
                        let db = (b.frequency_ghz - requested.frequency_ghz).abs();
                        da.total_cmp(&db)
                    })
                    .copied(),
            })
            .collect();
        PolarizationReport {
            polarization: pol,
            matches,
            observed,
        }
    };
    VerificationReport {
        te: check(Polarization::Te),
        tm: check(Polarization::Tm),
    }
}
