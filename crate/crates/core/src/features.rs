//! Notch detection on reflection spectra and the normalized network input.
//!
//! A notch qualifies when it dips to −10 dB or below. Its frequency and depth
//! come from a parabola through the minimum sample and its two neighbours;
//! its bandwidth is the width of the contiguous region at or below −10 dB,
//! with linear interpolation at both crossings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::UnitCell;
use crate::surrogate::{
    reflection_spectrum, Polarization, ReflectionSpectrum, F_START_GHZ, F_STEP_GHZ, F_STOP_GHZ,
};

/// Level a dip must reach to count as a notch, dB.
pub const NOTCH_THRESHOLD_DB: f64 = -10.0;
/// Feature slots per polarization in the network input.
pub const SLOTS_PER_POLARIZATION: usize = 4;
/// Values per feature slot: frequency, depth, bandwidth.
pub const VALUES_PER_SLOT: usize = 3;
/// Width of the network input.
pub const INPUT_WIDTH: usize = 2 * SLOTS_PER_POLARIZATION * VALUES_PER_SLOT;

const FREQ_SPAN_GHZ: f64 = F_STOP_GHZ - F_START_GHZ;
const DEPTH_CAP_DB: f64 = 40.0;
const BANDWIDTH_CAP_GHZ: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("notch frequency {0} GHz outside [4, 45] GHz")]
    FrequencyOutOfBand(f64),
    #[error("notch depth {0} dB does not reach the -10 dB threshold")]
    TooShallow(f64),
    #[error("notch bandwidth {0} GHz must be positive")]
    NonPositiveBandwidth(f64),
    #[error("non-finite value in notch feature")]
    NonFinite,
    #[error("input vector has {got} values, expected {expected}")]
    WrongWidth { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotchFeature {
    #[serde(rename = "freq_ghz")]
    pub frequency_ghz: f64,
    #[serde(rename = "depth_db")]
    pub depth_db: f64,
    #[serde(rename = "bandwidth_ghz")]
    pub bandwidth_ghz: f64,
}

impl NotchFeature {
    pub fn new(frequency_ghz: f64, depth_db: f64, bandwidth_ghz: f64) -> Self {
        Self {
            frequency_ghz,
            depth_db,
            bandwidth_ghz,
        }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(self.frequency_ghz.is_finite() && self.depth_db.is_finite() && self.bandwidth_ghz.is_finite()) {
            return Err(FeatureError::NonFinite);
        }
        if !(F_START_GHZ..=F_STOP_GHZ).contains(&self.frequency_ghz) {
            return Err(FeatureError::FrequencyOutOfBand(self.frequency_ghz));
        }
        if self.depth_db > NOTCH_THRESHOLD_DB {
            return Err(FeatureError::TooShallow(self.depth_db));
        }
        if self.bandwidth_ghz <= 0.0 {
            return Err(FeatureError::NonPositiveBandwidth(self.bandwidth_ghz));
        }
        Ok(())
    }
}

/// Finds every qualifying notch, sorted by frequency.
pub fn extract_notches(spec: &ReflectionSpectrum) -> Vec<NotchFeature> {
    let r = spec.samples();
    let n = r.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if r[i] < r[i - 1] && r[i] <= NOTCH_THRESHOLD_DB {
            // walk across a plateau of equal values
            let mut j = i;
            while j + 1 < n && r[j + 1] == r[i] {
                j += 1;
            }
            if j + 1 < n && r[j + 1] > r[i] {
                out.push(describe_minimum(r, i, j));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Builds the feature for a minimum spanning samples `left..=right`.
fn describe_minimum(r: &[f64], left: usize, right: usize) -> NotchFeature {
    let (y0, y1, y2) = (r[left - 1], r[left], r[left + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    let offset = if curvature > 0.0 { 0.5 * (y0 - y2) / curvature } else { 0.0 };
    let frequency = crate::surrogate::grid_frequency(left) + offset * F_STEP_GHZ;
    let depth = y1 - 0.25 * (y0 - y2) * offset;

    let lower = crossing_left(r, left);
    let upper = crossing_right(r, right);
    NotchFeature::new(frequency, depth, upper - lower)
}

fn interpolate_crossing(i: usize, a: f64, b: f64) -> f64 {
    // a at sample i, b at sample i + 1, threshold between them
    let t = (NOTCH_THRESHOLD_DB - a) / (b - a);
    crate::surrogate::grid_frequency(i) + t * F_STEP_GHZ
}

fn crossing_left(r: &[f64], from: usize) -> f64 {
    let mut k = from;
    while k > 0 && r[k - 1] <= NOTCH_THRESHOLD_DB {
        k -= 1;
    }
    if k == 0 {
        F_START_GHZ
    } else {
        interpolate_crossing(k - 1, r[k - 1], r[k])
    }
}

fn crossing_right(r: &[f64], from: usize) -> f64 {
    let mut k = from;
    while k + 1 < r.len() && r[k + 1] <= NOTCH_THRESHOLD_DB {
        k += 1;
    }
    if k + 1 == r.len() {
        F_STOP_GHZ
    } else {
        interpolate_crossing(k, r[k], r[k + 1])
    }
}

/// Keeps the `SLOTS_PER_POLARIZATION` deepest notches (lower frequency wins
/// ties), then restores frequency order.
pub fn truncate_deepest(mut notches: Vec<NotchFeature>) -> Vec<NotchFeature> {
    if notches.len() > SLOTS_PER_POLARIZATION {
        notches.sort_by(|a, b| {
            a.depth_db
                .total_cmp(&b.depth_db)
                .then(a.frequency_ghz.total_cmp(&b.frequency_ghz))
        });
        notches.truncate(SLOTS_PER_POLARIZATION);
    }
    notches.sort_by(|a, b| a.frequency_ghz.total_cmp(&b.frequency_ghz));
    notches
}

/// Requested notches for both polarizations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DesignTarget {
    #[serde(default)]
    pub te: Vec<NotchFeature>,
    #[serde(default)]
    pub tm: Vec<NotchFeature>,
}

impl DesignTarget {
    /// Validates each notch and applies the deepest-four truncation rule.
    pub fn new(te: Vec<NotchFeature>, tm: Vec<NotchFeature>) -> Result<Self, FeatureError> {
        for f in te.iter().chain(&tm) {
            f.validate()?;
        }
        Ok(Self {
            te: truncate_deepest(te),
            tm: truncate_deepest(tm),
        })
    }

    pub fn notches(&self, pol: Polarization) -> &[NotchFeature] {
        match pol {
            Polarization::Te => &self.te,
            Polarization::Tm => &self.tm,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.te.is_empty() && self.tm.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("target serializes")
    }
}

/// The 24 normalized values fed to the network.
///
/// Layout: TE slots 0..4 then TM slots 0..4, each slot
/// `(f_norm, d_norm, b_norm)`. Empty slots are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputVector24([f64; INPUT_WIDTH]);

impl InputVector24 {
    pub fn from_slice(values: &[f64]) -> Result<Self, FeatureError> {
        let arr: [f64; INPUT_WIDTH] = values.try_into().map_err(|_| FeatureError::WrongWidth {
            expected: INPUT_WIDTH,
            got: values.len(),
        })?;
        if arr.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite);
        }
        Ok(Self(arr))
    }

    pub fn values(&self) -> &[f64; INPUT_WIDTH] {
        &self.0
    }

    /// Inverts the normalization; a slot whose depth value is zero is empty.
    pub fn to_target(&self) -> DesignTarget {
        let decode = |pol_offset: usize| {
            (0..SLOTS_PER_POLARIZATION)
                .map(|s| &self.0[pol_offset + s * VALUES_PER_SLOT..][..VALUES_PER_SLOT])
                .filter(|slot| slot[1] != 0.0)
                .map(|slot| NotchFeature {
                    frequency_ghz: F_START_GHZ + slot[0] * FREQ_SPAN_GHZ,
                    depth_db: -slot[1] * DEPTH_CAP_DB,
                    bandwidth_ghz: slot[2] * BANDWIDTH_CAP_GHZ,
                })
                .collect()
        };
        DesignTarget {
            te: decode(0),
            tm: decode(SLOTS_PER_POLARIZATION * VALUES_PER_SLOT),
        }
    }
}

fn normalize(f: &NotchFeature) -> [f64; VALUES_PER_SLOT] {
    [
        (f.frequency_ghz - F_START_GHZ) / FREQ_SPAN_GHZ,
        (-f.depth_db).min(DEPTH_CAP_DB) / DEPTH_CAP_DB,
        f.bandwidth_ghz.min(BANDWIDTH_CAP_GHZ) / BANDWIDTH_CAP_GHZ,
    ]
}

pub fn assemble_input(target: &DesignTarget) -> Result<InputVector24, FeatureError> {
    let mut values = [0.0; INPUT_WIDTH];
    for (p, pol) in Polarization::BOTH.into_iter().enumerate() {
        let notches = target.notches(pol);
        for f in notches {
            f.validate()?;
        }
        let kept = truncate_deepest(notches.to_vec());
        for (s, f) in kept.iter().enumerate() {
            let at = (p * SLOTS_PER_POLARIZATION + s) * VALUES_PER_SLOT;
            values[at..at + VALUES_PER_SLOT].copy_from_slice(&normalize(f));
        }
    }
    Ok(InputVector24(values))
}

/// Forward-simulates a cell and extracts its notches for both polarizations.
pub fn target_of_cell(cell: &UnitCell) -> DesignTarget {
    DesignTarget {
        te: truncate_deepest(extract_notches(&reflection_spectrum(cell, Polarization::Te))),
        tm: truncate_deepest(extract_notches(&reflection_spectrum(cell, Polarization::Tm))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TileId;
    use crate::surrogate::{notch_params, NotchParams};

    fn lorentzian(center: f64, depth: f64, halfwidth: f64) -> ReflectionSpectrum {
        ReflectionSpectrum::from_notches(
            Polarization::Te,
            &[NotchParams { center_ghz: center, depth_db: depth, halfwidth_ghz: halfwidth }],
        )
    }

    #[test]
    fn single_lorentzian() {
        let feats = extract_notches(&lorentzian(10.0, -20.0, 0.3));
        assert_eq!(feats.len(), 1);
        let f = feats[0];
        assert!((f.frequency_ghz - 10.0).abs() <= 0.05);
        assert!((f.depth_db + 20.0).abs() <= 0.2);
        // -10 dB crossings of d·h²/((f−c)²+h²): 2h·sqrt(d/−10 − 1)
        let analytic = 2.0 * 0.3 * (20.0f64 / 10.0 - 1.0).sqrt();
        assert!((f.bandwidth_ghz - analytic).abs() <= 0.1);
    }

    #[test]
    fn flat_spectrum_has_no_notches() {
        let spec = ReflectionSpectrum::from_samples(Polarization::Te, vec![-3.0; 821]).unwrap();
        assert!(extract_notches(&spec).is_empty());
    }

    #[test]
    fn two_tile_cell_two_notches() {
        let mut cell = crate::geometry::UnitCell::uniform(TileId::new(1).unwrap());
        for c in 0..4 {
            cell.set(3, c, TileId::new(6).unwrap());
        }
        let params = notch_params(&cell, Polarization::Te);
        let feats = extract_notches(&reflection_spectrum(&cell, Polarization::Te));
        assert_eq!(feats.len(), 2);
        assert!(feats[0].frequency_ghz < feats[1].frequency_ghz);
        for (f, p) in feats.iter().zip(&params) {
            assert!((f.frequency_ghz - p.center_ghz).abs() <= 0.05);
            assert!((f.depth_db - p.depth_db).abs() <= 0.2);
        }
    }

    #[test]
    fn plateau_reported_once_at_left_edge() {
        let mut samples = vec![-1.0; 821];
        samples[100] = -12.0;
        samples[101] = -15.0;
        samples[102] = -15.0;
        samples[103] = -15.0;
        samples[104] = -12.0;
        let feats = extract_notches(&ReflectionSpectrum::from_samples(Polarization::Tm, samples).unwrap());
        assert_eq!(feats.len(), 1);
        assert!(feats[0].frequency_ghz >= crate::surrogate::grid_frequency(101));
        assert!(feats[0].frequency_ghz <= crate::surrogate::grid_frequency(102));
    }

    #[test]
    fn shallow_minimum_ignored() {
        let feats = extract_notches(&lorentzian(20.0, -9.0, 0.5));
        assert!(feats.is_empty());
    }

    #[test]
    fn empty_target_is_zero() {
        assert_eq!(assemble_input(&DesignTarget::default()).unwrap().values(), &[0.0; 24]);
    }

    #[test]
    fn three_notch_target_normalization() {
        let target = DesignTarget::new(
            vec![NotchFeature::new(24.5, -34.5, 0.5)],
            vec![
                NotchFeature::new(10.0, -18.5, 0.2),
                NotchFeature::new(14.5, -20.0, 0.4),
                NotchFeature::new(33.0, -14.0, 0.3),
            ],
        )
        .unwrap();
        let v = assemble_input(&target).unwrap();
        let expected = [
            0.5, 0.8625, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.14634, 0.4625, 0.1, 0.25610, 0.5, 0.2, 0.70732, 0.35, 0.15, 0.0, 0.0, 0.0,
        ];
        for (k, (a, b)) in v.values().iter().zip(expected).enumerate() {
            assert!((a - b).abs() < 1e-5, "slot value {k}: {a} vs {b}");
        }
    }

    #[test]
    fn normalization_round_trip() {
        let target = DesignTarget::new(
            vec![NotchFeature::new(6.5, -21.5, 0.3), NotchFeature::new(11.5, -22.5, 1.0), NotchFeature::new(24.0, -25.0, 0.6)],
            vec![NotchFeature::new(6.5, -12.0, 0.2), NotchFeature::new(11.5, -21.5, 1.0)],
        )
        .unwrap();
        let back = assemble_input(&target).unwrap().to_target();
        for pol in Polarization::BOTH {
            assert_eq!(back.notches(pol).len(), target.notches(pol).len());
            for (a, b) in back.notches(pol).iter().zip(target.notches(pol)) {
                assert!((a.frequency_ghz - b.frequency_ghz).abs() < 1e-9);
                assert!((a.depth_db - b.depth_db).abs() < 1e-9);
                assert!((a.bandwidth_ghz - b.bandwidth_ghz).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn out_of_band_rejected() {
        let target = DesignTarget {
            te: vec![NotchFeature::new(46.0, -20.0, 0.2)],
            tm: vec![],
        };
        assert_eq!(assemble_input(&target), Err(FeatureError::FrequencyOutOfBand(46.0)));
        assert!(DesignTarget::new(vec![NotchFeature::new(3.9, -20.0, 0.2)], vec![]).is_err());
    }

    #[test]
    fn truncation_keeps_four_deepest() {
        let notches: Vec<_> = [(5.0, -11.0), (10.0, -30.0), (15.0, -12.0), (20.0, -25.0), (25.0, -35.0), (30.0, -20.0)]
            .into_iter()
            .map(|(f, d)| NotchFeature::new(f, d, 0.3))
            .collect();
        let kept = truncate_deepest(notches);
        let freqs: Vec<_> = kept.iter().map(|n| n.frequency_ghz).collect();
        assert_eq!(freqs, vec![10.0, 20.0, 25.0, 30.0]);
    }

    #[test]
    fn all_zero_cell_target() {
        let t = target_of_cell(&crate::geometry::UnitCell::default());
        assert_eq!(t.te.len(), 1);
        assert!((t.te[0].frequency_ghz - 6.0).abs() <= 0.05);
        assert!((t.te[0].depth_db + 40.0).abs() <= 0.5);
        assert_eq!(target_of_cell(&crate::geometry::UnitCell::default()), t);
    }

    #[test]
    fn target_json_round_trip() {
        let text = r#"{"te":[{"freq_ghz":27.5,"depth_db":-30,"bandwidth_ghz":0.5}],"tm":[{"freq_ghz":14,"depth_db":-22,"bandwidth_ghz":0.2}]}"#;
        let t = DesignTarget::from_json(text).unwrap();
        assert_eq!(t.te[0].frequency_ghz, 27.5);
        assert_eq!(DesignTarget::from_json(&t.to_json()).unwrap(), t);
    }
}
