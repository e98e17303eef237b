//! Deterministic Lorentzian-sum stand-in for full-wave reflection simulation.
//!
//! Every distinct tile present in a cell contributes one notch. The tile id
//! sets the base frequency, the tile's multiplicity sets depth and width, and
//! the mean grid position of its copies shifts the notch differently for the
//! two polarizations (row for TE, column for TM).

use std::fmt::Write as _;

use crate::geometry::{TileId, UnitCell, TILE_COUNT};

/// Lower edge of the simulated band, GHz.
pub const F_START_GHZ: f64 = 4.0;
/// Upper edge of the simulated band, GHz.
pub const F_STOP_GHZ: f64 = 45.0;
/// Grid spacing, GHz.
pub const F_STEP_GHZ: f64 = 0.05;
/// Samples covering `[F_START_GHZ, F_STOP_GHZ]` inclusive.
pub const SAMPLE_COUNT: usize = 821;
/// Reflection floor, dB.
pub const FLOOR_DB: f64 = -60.0;
/// Deepest single notch the model emits, dB.
pub const MAX_NOTCH_DEPTH_DB: f64 = -40.0;
/// Identifies this surrogate in dataset headers.
pub const MODEL_VERSION: &str = "lorentzian-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Te, Polarization::Tm];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotchParams {
    pub center_ghz: f64,
    pub depth_db: f64,
    pub halfwidth_ghz: f64,
}

impl NotchParams {
    /// Lorentzian contribution at `f`, in dB.
    pub fn response(&self, f: f64) -> f64 {
        let h2 = self.halfwidth_ghz * self.halfwidth_ghz;
        let df = f - self.center_ghz;
        self.depth_db * h2 / (df * df + h2)
    }
}

/// Grid frequency of sample `i`.
pub fn grid_frequency(i: usize) -> f64 {
    F_START_GHZ + i as f64 * F_STEP_GHZ
}

/// Base notch frequency of a tile, GHz.
pub fn tile_base_frequency(id: TileId) -> f64 {
    6.0 + 5.0 * id.value() as f64
}

/// One notch per distinct tile id, ordered by id.
pub fn notch_params(cell: &UnitCell, pol: Polarization) -> Vec<NotchParams> {
    let mut count = [0u32; TILE_COUNT];
    let mut position_sum = [0u32; TILE_COUNT];
    for (row, col, id) in cell.slots() {
        let t = id.value() as usize;
        count[t] += 1;
        position_sum[t] += match pol {
            Polarization::Te => row,
            Polarization::Tm => col,
        } as u32;
    }

    TileId::all()
        .filter(|id| count[id.value() as usize] > 0)
        .map(|id| {
            let n = count[id.value() as usize] as f64;
            let mean = position_sum[id.value() as usize] as f64 / n;
            let shift = 0.5 * (mean - 1.5);
            NotchParams {
                center_ghz: (tile_base_frequency(id) + shift).clamp(F_START_GHZ, F_STOP_GHZ),
                depth_db: (-6.0 - 3.0 * n).max(MAX_NOTCH_DEPTH_DB),
                halfwidth_ghz: 0.15 + 0.05 * n,
            }
        })
        .collect()
}

/// Sampled reflection amplitude for one polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionSpectrum {
    pol: Polarization,
    samples: Vec<f64>,
}

impl ReflectionSpectrum {
    /// Superposes the notches on the standard grid and clamps to `[-60, 0]` dB.
    pub fn from_notches(pol: Polarization, notches: &[NotchParams]) -> Self {
        let samples = (0..SAMPLE_COUNT)
            .map(|i| reflection_at(notches, grid_frequency(i)))
            .collect();
        Self { pol, samples }
    }

    /// Wraps raw samples on the standard grid. Returns `None` unless exactly
    /// [`SAMPLE_COUNT`] samples are given; values are clamped to `[-60, 0]`.
    pub fn from_samples(pol: Polarization, samples: Vec<f64>) -> Option<Self> {
        (samples.len() == SAMPLE_COUNT).then(|| Self {
            pol,
            samples: samples.into_iter().map(|s| s.clamp(FLOOR_DB, 0.0)).collect(),
        })
    }

    pub fn polarization(&self) -> Polarization {
        self.pol
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn frequency(&self, i: usize) -> f64 {
        grid_frequency(i)
    }

    /// Index and value of the lowest sample (first one on ties).
    pub fn minimum(&self) -> (usize, f64) {
        self.samples
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
    }
}

/// Clamped notch superposition at an arbitrary frequency.
pub fn reflection_at(notches: &[NotchParams], f: f64) -> f64 {
    notches
        .iter()
        .map(|n| n.response(f))
        .sum::<f64>()
        .clamp(FLOOR_DB, 0.0)
}

pub fn reflection_spectrum(cell: &UnitCell, pol: Polarization) -> ReflectionSpectrum {
    ReflectionSpectrum::from_notches(pol, &notch_params(cell, pol))
}

/// CSV with header `freq_ghz,te_db,tm_db`, six decimals per field.
pub fn spectra_csv(te: &ReflectionSpectrum, tm: &ReflectionSpectrum) -> String {
    let mut out = String::from("freq_ghz,te_db,tm_db\n");
    for (i, (a, b)) in te.samples.iter().zip(&tm.samples).enumerate() {
        writeln!(out, "{:.6},{:.6},{:.6}", grid_frequency(i), a, b).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tile(v: u8) -> TileId {
        TileId::new(v).unwrap()
    }

    #[test]
    fn grid_covers_band() {
        assert_eq!(grid_frequency(0), 4.0);
        assert!((grid_frequency(SAMPLE_COUNT - 1) - 45.0).abs() < 1e-9);
    }

    #[test]
    fn all_zero_cell_te() {
        let notches = notch_params(&UnitCell::uniform(tile(0)), Polarization::Te);
        assert_eq!(notches.len(), 1);
        let n = notches[0];
        assert_eq!(n.center_ghz, 6.0);
        assert_eq!(n.depth_db, -40.0);
        assert!((n.halfwidth_ghz - 0.95).abs() < 1e-12);
    }

    #[test]
    fn single_corner_seven() {
        let mut cell = UnitCell::uniform(tile(0));
        cell.set(0, 0, tile(7));
        let notches = notch_params(&cell, Polarization::Te);
        assert_eq!(notches.len(), 2);
        let n7 = notches[1];
        assert!((n7.center_ghz - 40.25).abs() < 1e-12);
        assert_eq!(n7.depth_db, -9.0);
        assert!((n7.halfwidth_ghz - 0.2).abs() < 1e-12);
    }

    #[test]
    fn all_zero_spectrum_minimum() {
        let spec = reflection_spectrum(&UnitCell::uniform(tile(0)), Polarization::Te);
        assert_eq!(spec.samples().len(), SAMPLE_COUNT);
        let (i, v) = spec.minimum();
        assert!((grid_frequency(i) - 6.0).abs() < 1e-9);
        assert!((v + 40.0).abs() <= 0.5);
        assert!(spec.samples().iter().any(|&s| s < 0.0));
    }

    #[test]
    fn transposition_swaps_polarizations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let cell = UnitCell::random(&mut rng);
            let t = cell.transpose();
            assert_eq!(notch_params(&cell, Polarization::Te), notch_params(&t, Polarization::Tm));
            assert_eq!(
                reflection_spectrum(&cell, Polarization::Te).samples(),
                reflection_spectrum(&t, Polarization::Tm).samples()
            );
        }
    }

    #[test]
    fn adding_a_copy_deepens_and_widens() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let mut cell = UnitCell::random(&mut rng);
            let (r, c) = (rng.gen_range(0..4), rng.gen_range(0..4));
            let (r2, c2) = ((r + 1) % 4, c);
            let id = cell.get(r, c);
            if cell.get(r2, c2) == id {
                continue;
            }
            let find = |cell: &UnitCell| {
                let pos = TileId::all()
                    .filter(|t| cell.tiles().contains(t))
                    .position(|t| t == id)
                    .unwrap();
                notch_params(cell, Polarization::Te)[pos]
            };
            let before = find(&cell);
            cell.set(r2, c2, id);
            let after = find(&cell);
            assert!(after.depth_db <= before.depth_db);
            assert!(after.halfwidth_ghz > before.halfwidth_ghz);
        }
    }

    #[test]
    fn isolated_notch_reaches_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        for _ in 0..200 {
            let cell = UnitCell::random(&mut rng);
            for pol in Polarization::BOTH {
                let notches = notch_params(&cell, pol);
                for (k, n) in notches.iter().enumerate() {
                    let isolated = notches.iter().enumerate().all(|(j, m)| {
                        j == k || (m.center_ghz - n.center_ghz).abs() > 10.0 * n.halfwidth_ghz.max(m.halfwidth_ghz)
                    });
                    if isolated {
                        assert!((reflection_at(&notches, n.center_ghz) - n.depth_db).abs() <= 0.5);
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn csv_layout() {
        let cell = UnitCell::uniform(tile(2));
        let csv = spectra_csv(
            &reflection_spectrum(&cell, Polarization::Te),
            &reflection_spectrum(&cell, Polarization::Tm),
        );
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), SAMPLE_COUNT + 1);
        assert_eq!(lines[0], "freq_ghz,te_db,tm_db");
        assert!(lines[1].starts_with("4.000000,"));
        assert!(lines[SAMPLE_COUNT].starts_with("45.000000,"));
    }
}
