//! Binary checkpoint: topology, parameters and optimizer state.
//!
//! ```text
//! "MCNN"                         magic
//! u16  version                   (1)
//! u64  init seed
//! u32  input width
//! u32  layer count
//! per layer: u8 kind (0 dense, 1 dropout), u32 in, u32 out,
//!            u8 activation (0 identity, 1 relu, 2 sigmoid), f64 dropout rate
//! per dense layer: W row-major, then b                  (f64)
//! u8   optimizer present
//!      f64 lr, f64 beta1, f64 beta2, f64 eps, u64 step
//!      per parameter tensor: first moment, second moment (f64)
//! u32  CRC-32 of every preceding byte
//! ```
//! All integers and floats are little-endian.

use ndarray::{Array1, Array2};
use thiserror::Error;

use super::{Activation, AdamConfig, AdamState, DenseLayer, DropoutLayer, Layer, Network};

pub const MAGIC: &[u8; 4] = b"MCNN";
pub const VERSION: u16 = 1;

const KIND_DENSE: u8 = 0;
const KIND_DROPOUT: u8 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckpointError {
    #[error("bad magic at offset 0")]
    BadMagic,
    #[error("unsupported checkpoint version {found} at offset {offset}")]
    UnsupportedVersion { found: u16, offset: usize },
    #[error("checkpoint truncated at offset {offset}")]
    Truncated { offset: usize },
    #[error("invalid checkpoint at offset {offset}: {reason}")]
    Invalid { offset: usize, reason: String },
    #[error("checksum mismatch at offset {offset}: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { offset: usize, stored: u32, computed: u32 },
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }
}

pub fn save_checkpoint(network: &Network, optimizer: Option<&AdamState>) -> Vec<u8> {
    let mut w = Writer(Vec::with_capacity(64 + network.parameter_count() * 24));
    w.0.extend_from_slice(MAGIC);
    w.u16(VERSION);
    w.u64(network.seed());
    w.u32(network.input_width() as u32);
    w.u32(network.layers().len() as u32);

    let mut width = network.input_width();
    for layer in network.layers() {
        match layer {
            Layer::Dense(d) => {
                w.u8(KIND_DENSE);
                w.u32(d.inputs() as u32);
                w.u32(d.outputs() as u32);
                w.u8(d.activation.code());
                w.f64(0.0);
                width = d.outputs();
            }
            Layer::Dropout(p) => {
                w.u8(KIND_DROPOUT);
                w.u32(width as u32);
                w.u32(width as u32);
                w.u8(0);
                w.f64(p.rate());
            }
        }
    }
    for d in network.dense_layers() {
        w.f64s(d.weights.as_slice().expect("standard layout"));
        w.f64s(d.biases.as_slice().expect("standard layout"));
    }

    match optimizer {
        None => w.u8(0),
        Some(state) => {
            w.u8(1);
            let c = state.config;
            w.f64(c.learning_rate);
            w.f64(c.beta1);
            w.f64(c.beta2);
            w.f64(c.epsilon);
            w.u64(state.step);
            for (m, v) in state.first_moment.iter().zip(&state.second_moment) {
                w.f64s(m);
                w.f64s(v);
            }
        }
    }

    let crc = crc32fast::hash(&w.0);
    w.u32(crc);
    w.0
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(CheckpointError::Truncated { offset: self.bytes.len() }),
        }
    }
    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        let bytes = self.take(n.checked_mul(8).ok_or(CheckpointError::Truncated { offset: self.pos })?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn invalid(&self, at: usize, reason: impl Into<String>) -> CheckpointError {
        CheckpointError::Invalid {
            offset: at,
            reason: reason.into(),
        }
    }
}

struct LayerHeader {
    kind: u8,
    inputs: usize,
    outputs: usize,
    activation: u8,
    rate: f64,
    offset: usize,
}

/// Parses a checkpoint. Nothing is returned unless every byte checks out.
pub fn load_checkpoint(bytes: &[u8]) -> Result<(Network, Option<AdamState>), CheckpointError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4).map_err(|_| CheckpointError::BadMagic)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion { found: version, offset: 4 });
    }
    let seed = r.u64()?;
    let inputs = r.u32()? as usize;
    let count_at = r.pos;
    let count = r.u32()? as usize;
    // each header is 18 bytes
    if count.saturating_mul(18) > bytes.len() - r.pos {
        return Err(CheckpointError::Truncated { offset: bytes.len() });
    }

    let mut headers = Vec::with_capacity(count);
    for _ in 0..count {
        let offset = r.pos;
        headers.push(LayerHeader {
            kind: r.u8()?,
            inputs: r.u32()? as usize,
            outputs: r.u32()? as usize,
            activation: r.u8()?,
            rate: r.f64()?,
            offset,
        });
    }

    let mut layers = Vec::with_capacity(count);
    let mut width = inputs;
    for h in &headers {
        match h.kind {
            KIND_DENSE => {
                if h.inputs != width {
                    return Err(r.invalid(h.offset, format!("dense input width {} after width {width}", h.inputs)));
                }
                let activation = Activation::from_code(h.activation)
                    .ok_or_else(|| r.invalid(h.offset, format!("unknown activation code {}", h.activation)))?;
                let n = h.inputs.checked_mul(h.outputs).ok_or_else(|| r.invalid(h.offset, "layer too large"))?;
                let weights = Array2::from_shape_vec((h.outputs, h.inputs), r.f64s(n)?).expect("sized read");
                let biases = Array1::from_vec(r.f64s(h.outputs)?);
                layers.push(Layer::Dense(DenseLayer { weights, biases, activation }));
                width = h.outputs;
            }
            KIND_DROPOUT => {
                if h.inputs != width || h.outputs != width {
                    return Err(r.invalid(h.offset, "dropout width does not match its input"));
                }
                let p = DropoutLayer::new(h.rate).map_err(|e| r.invalid(h.offset, e.to_string()))?;
                layers.push(Layer::Dropout(p));
            }
            other => return Err(r.invalid(h.offset, format!("unknown layer kind {other}"))),
        }
    }
    let network = Network::from_layers(inputs, layers, seed).map_err(|e| r.invalid(count_at, e.to_string()))?;

    let flag_at = r.pos;
    let optimizer = match r.u8()? {
        0 => None,
        1 => {
            let config = AdamConfig {
                learning_rate: r.f64()?,
                beta1: r.f64()?,
                beta2: r.f64()?,
                epsilon: r.f64()?,
            };
            let mut state = AdamState::new(config, &[]);
            state.step = r.u64()?;
            for n in network.parameter_lengths() {
                state.first_moment.push(r.f64s(n)?);
                state.second_moment.push(r.f64s(n)?);
            }
            Some(state)
        }
        other => return Err(r.invalid(flag_at, format!("bad optimizer flag {other}"))),
    };

    let body_end = r.pos;
    let stored = r.u32()?;
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(CheckpointError::Checksum {
            offset: body_end,
            stored,
            computed,
        });
    }
    if r.pos != bytes.len() {
        return Err(r.invalid(r.pos, "trailing bytes after checksum"));
    }
    Ok((network, optimizer))
}
