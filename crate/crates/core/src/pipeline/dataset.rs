use std::io::{BufRead, Write};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::features::{assemble_input, target_of_cell, InputVector24, INPUT_WIDTH};
use crate::geometry::{encode_bits, BitVector48, UnitCell, CODE_BITS};
use crate::surrogate::MODEL_VERSION;

pub const DATASET_FORMAT: &str = "metasurf-dataset";
pub const DATASET_VERSION: u32 = 1;

/// One labeled example: spectral features in, structure code out.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub seed_index: u64,
    pub cell: UnitCell,
    pub input: InputVector24,
    pub label: BitVector48,
}

impl DatasetRecord {
    /// Simulates `cell` and labels it.
    pub fn from_cell(seed_index: u64, cell: UnitCell) -> Self {
        let input = assemble_input(&target_of_cell(&cell)).expect("extracted notches lie in band");
        Self {
            seed_index,
            cell,
            input,
            label: encode_bits(&cell),
        }
    }
}

/// Random generator for record `index`: ChaCha8 keyed by the master seed, on
/// stream `index`. Each record depends only on `(master_seed, index)`.
pub fn record_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

pub fn generate_dataset(count: usize, master_seed: u64) -> Result<Vec<DatasetRecord>, PipelineError> {
    if count == 0 {
        return Err(PipelineError::EmptyDataset);
    }
    Ok((0..count as u64)
        .map(|i| DatasetRecord::from_cell(i, UnitCell::random(&mut record_rng(master_seed, i))))
        .collect())
}

/// Seeded shuffle, then the first `⌊n·ratio⌋` records train and the rest test.
pub fn split(
    records: &[DatasetRecord],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<DatasetRecord>, Vec<DatasetRecord>), PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(PipelineError::InvalidConfig(format!("split ratio {ratio} outside (0, 1)")));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (records.len() as f64 * ratio).floor() as usize;
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect();
    Ok((pick(&order[..cut]), pick(&order[cut..])))
}

/// Stacks inputs and labels into `(n × 24, n × 48)` matrices.
pub fn to_arrays(records: &[DatasetRecord]) -> (Array2<f64>, Array2<f64>) {
    let mut x = Array2::zeros((records.len(), INPUT_WIDTH));
    let mut y = Array2::zeros((records.len(), CODE_BITS));
    for (i, r) in records.iter().enumerate() {
        x.row_mut(i).assign(&ndarray::ArrayView1::from(&r.input.values()[..]));
        y.row_mut(i).assign(&ndarray::ArrayView1::from(&r.label.to_reals()[..]));
    }
    (x, y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    pub master_seed: u64,
    pub surrogate: String,
    pub count: usize,
}

impl DatasetHeader {
    pub fn new(master_seed: u64, count: usize) -> Self {
        Self {
            format: DATASET_FORMAT.to_string(),
            version: DATASET_VERSION,
            master_seed,
            surrogate: MODEL_VERSION.to_string(),
            count,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    seed_index: u64,
    tiles: Vec<i64>,
    input: Vec<f64>,
    label: String,
}

/// Writes the header line and one JSON object per record.
pub fn write_dataset<W: Write>(mut out: W, header: &DatasetHeader, records: &[DatasetRecord]) -> Result<(), PipelineError> {
    serde_json::to_writer(&mut out, header)?;
    out.write_all(b"\n")?;
    for r in records {
        let line = RecordLine {
            seed_index: r.seed_index,
            tiles: r.cell.tiles().iter().map(|t| t.value() as i64).collect(),
            input: r.input.values().to_vec(),
            label: r.label.to_string(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<(DatasetHeader, Vec<DatasetRecord>), PipelineError> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| PipelineError::Format { line: 1, reason: "missing header".into() })??;
    let header: DatasetHeader = serde_json::from_str(&first).map_err(|e| PipelineError::Format {
        line: 1,
        reason: format!("bad header: {e}"),
    })?;
    if header.format != DATASET_FORMAT || header.version != DATASET_VERSION {
        return Err(PipelineError::Format {
            line: 1,
            reason: format!("unsupported dataset {} v{}", header.format, header.version),
        });
    }

    let mut records = Vec::with_capacity(header.count);
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| PipelineError::Format { line: line_no, reason };
        let raw: RecordLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if raw.input.len() != INPUT_WIDTH {
            return Err(PipelineError::InputWidth {
                line: line_no,
                expected: INPUT_WIDTH,
                got: raw.input.len(),
            });
        }
        let cell = UnitCell::from_ids(&raw.tiles).map_err(|e| bad(e.to_string()))?;
        let label: BitVector48 = raw.label.parse().map_err(|e| bad(format!("label: {e}")))?;
        if label != encode_bits(&cell) {
            return Err(bad("label does not encode the tiles".into()));
        }
        let input = InputVector24::from_slice(&raw.input).map_err(|e| bad(e.to_string()))?;
        records.push(DatasetRecord {
            seed_index: raw.seed_index,
            cell,
            input,
            label,
        });
    }
    if records.len() != header.count {
        return Err(PipelineError::Format {
            line: records.len() + 2,
            reason: format!("header announces {} records, found {}", header.count, records.len()),
        });
    }
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_dataset(50, 42).unwrap(), generate_dataset(50, 42).unwrap());
        assert_ne!(generate_dataset(5, 42).unwrap(), generate_dataset(5, 43).unwrap());
    }

    #[test]
    fn records_independent_of_count() {
        let small = generate_dataset(10, 7).unwrap();
        let large = generate_dataset(30, 7).unwrap();
        assert_eq!(small[..], large[..10]);
    }

    #[test]
    fn zero_count_rejected() {
        assert!(matches!(generate_dataset(0, 1), Err(PipelineError::EmptyDataset)));
    }

    #[test]
    fn labels_encode_cells() {
        for r in generate_dataset(100, 3).unwrap() {
            assert_eq!(r.label, encode_bits(&r.cell));
            assert_eq!(r.input, assemble_input(&target_of_cell(&r.cell)).unwrap());
        }
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let data = generate_dataset(200, 1).unwrap();
        let (train, test) = split(&data, 0.7, 9).unwrap();
        assert_eq!((train.len(), test.len()), (140, 60));
        let mut ids: Vec<u64> = train.iter().chain(&test).map(|r| r.seed_index).collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..200).collect::<Vec<_>>());
        assert_eq!(split(&data, 0.7, 9).unwrap(), (train, test));
        assert!(split(&data, 1.0, 9).is_err());
        assert!(split(&[], 0.5, 9).is_err());
    }

    #[test]
    fn file_round_trip() {
        let data = generate_dataset(20, 5).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &DatasetHeader::new(5, data.len()), &data).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 21);
        let (header, back) = read_dataset(&buf[..]).unwrap();
        assert_eq!(header.master_seed, 5);
        assert_eq!(header.surrogate, MODEL_VERSION);
        assert_eq!(back, data);
    }

    #[test]
    fn wrong_input_width_reported() {
        let data = generate_dataset(2, 5).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &DatasetHeader::new(5, 2), &data).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("\"input\":[", "\"input\":[0.0,", 1);
        assert!(matches!(
            read_dataset(text.as_bytes()),
            Err(PipelineError::InputWidth { line: 2, expected: 24, got: 25 })
        ));
    }

    #[test]
    fn tampered_label_rejected() {
        let data = generate_dataset(1, 5).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &DatasetHeader::new(5, 1), &data).unwrap();
        let label = data[0].label.to_string();
        let flipped: String = label
            .chars()
            .enumerate()
            .map(|(i, c)| if i == 0 { if c == '0' { '1' } else { '0' } } else { c })
            .collect();
        let text = String::from_utf8(buf).unwrap().replace(&label, &flipped);
        assert!(matches!(read_dataset(text.as_bytes()), Err(PipelineError::Format { line: 2, .. })));
    }
}
