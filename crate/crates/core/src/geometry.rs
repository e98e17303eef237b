//! Annular tiles, 4×4 unit cells and the confined 48-bit structure code.
//!
//! A unit cell is 16 tile slots in row-major order. Each slot holds one of
//! eight concentric-shell tiles; the tile id doubles as its 3-bit code, so
//! the whole cell packs into 48 bits with no lookup table.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// Number of distinct annular tiles.
pub const TILE_COUNT: usize = 8;
/// Side of one tile in lattice cells.
pub const TILE_SIDE: usize = 8;
/// Side of the tile grid in a unit cell.
pub const GRID_SIDE: usize = 4;
/// Number of tile slots in a unit cell.
pub const SLOTS: usize = GRID_SIDE * GRID_SIDE;
/// Side of the composed binary matrix.
pub const MATRIX_SIDE: usize = GRID_SIDE * TILE_SIDE;
/// Bits per tile code.
pub const BITS_PER_TILE: usize = 3;
/// Length of the confined structure code.
pub const CODE_BITS: usize = SLOTS * BITS_PER_TILE;

/// Lattice pitch in millimetres. Documentation only.
pub const LATTICE_PITCH_MM: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("tile id {0} out of range 0..=7")]
    TileOutOfRange(i64),
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("value at position {index} is not binary")]
    NotBinary { index: usize },
    #[error("activation {value} at position {index} is outside [0, 1]")]
    ActivationOutOfRange { index: usize, value: f64 },
    #[error("unknown render format `{0}` (expected `ascii` or `pgm`)")]
    UnknownFormat(String),
}

/// One of the eight annular tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TileId(u8);

impl TileId {
    pub fn new(value: u8) -> Result<Self, GeometryError> {
        if (value as usize) < TILE_COUNT {
            Ok(Self(value))
        } else {
            Err(GeometryError::TileOutOfRange(value as i64))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = TileId> {
        (0..TILE_COUNT as u8).map(TileId)
    }
}

impl TryFrom<i64> for TileId {
    type Error = GeometryError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        if (0..TILE_COUNT as i64).contains(&value) {
            Ok(Self(value as u8))
        } else {
            Err(GeometryError::TileOutOfRange(value))
        }
    }
}

impl fmt::Display for TileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An 8×8 copper map. `true` is copper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TilePattern {
    cells: [[bool; TILE_SIDE]; TILE_SIDE],
}

impl TilePattern {
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row][col]
    }

    pub fn rows(&self) -> &[[bool; TILE_SIDE]; TILE_SIDE] {
        &self.cells
    }

    pub fn copper_count(&self) -> usize {
        self.cells.iter().flatten().filter(|&&c| c).count()
    }

    /// Rotates the pattern by 90° clockwise.
    pub fn rotated(&self) -> Self {
        let mut cells = [[false; TILE_SIDE]; TILE_SIDE];
        for (r, row) in cells.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = self.cells[TILE_SIDE - 1 - c][r];
            }
        }
        Self { cells }
    }
}

/// Concentric shell index of a tile lattice cell: 0 for the centre 2×2, 3 for the rim.
pub fn shell_of(row: usize, col: usize) -> usize {
    // max(|i - 3.5|, |j - 3.5|) - 0.5, kept in integers by doubling.
    let dist2 = |i: usize| (2 * i as i64 - 7).unsigned_abs() as usize;
    (dist2(row).max(dist2(col)) - 1) / 2
}

/// The canonical annular pattern for a tile.
///
/// Shell 0 is always copper; shell `s` in 1..=3 is copper iff bit `s - 1`
/// of the id is set.
pub fn tile_pattern(id: TileId) -> TilePattern {
    let mut cells = [[false; TILE_SIDE]; TILE_SIDE];
    for (r, row) in cells.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let shell = shell_of(r, c);
            *cell = shell == 0 || (id.0 >> (shell - 1)) & 1 == 1;
        }
    }
    TilePattern { cells }
}

/// A 4×4 arrangement of tiles, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct UnitCell {
    tiles: [TileId; SLOTS],
}

impl UnitCell {
    pub fn new(tiles: [TileId; SLOTS]) -> Self {
        Self { tiles }
    }

    pub fn uniform(id: TileId) -> Self {
        Self { tiles: [id; SLOTS] }
    }

    pub fn from_ids(ids: &[i64]) -> Result<Self, GeometryError> {
        if ids.len() != SLOTS {
            return Err(GeometryError::WrongLength {
                expected: SLOTS,
                got: ids.len(),
            });
        }
        let mut tiles = [TileId::default(); SLOTS];
        for (slot, &id) in tiles.iter_mut().zip(ids) {
            *slot = TileId::try_from(id)?;
        }
        Ok(Self { tiles })
    }

    /// Draws 16 independent uniform tiles.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut tiles = [TileId::default(); SLOTS];
        for slot in tiles.iter_mut() {
            *slot = TileId(rng.gen_range(0..TILE_COUNT as u8));
        }
        Self { tiles }
    }

    pub fn tiles(&self) -> &[TileId; SLOTS] {
        &self.tiles
    }

    pub fn get(&self, row: usize, col: usize) -> TileId {
        self.tiles[row * GRID_SIDE + col]
    }

    pub fn set(&mut self, row: usize, col: usize, id: TileId) {
        self.tiles[row * GRID_SIDE + col] = id;
    }

    /// Mirrors the tile grid about its main diagonal.
    pub fn transpose(&self) -> Self {
        let mut out = *self;
        for r in 0..GRID_SIDE {
            for c in 0..GRID_SIDE {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Iterates `(row, col, tile)` in row-major order.
    pub fn slots(&self) -> impl Iterator<Item = (usize, usize, TileId)> + '_ {
        self.tiles
            .iter()
            .enumerate()
            .map(|(k, &t)| (k / GRID_SIDE, k % GRID_SIDE, t))
    }
}

impl fmt::Display for UnitCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.tiles.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// The 32×32 copper map of a composed unit cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix32 {
    cells: [[bool; MATRIX_SIDE]; MATRIX_SIDE],
}

impl Matrix32 {
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row][col]
    }

    pub fn rows(&self) -> &[[bool; MATRIX_SIDE]; MATRIX_SIDE] {
        &self.cells
    }

    pub fn copper_count(&self) -> usize {
        self.cells.iter().flatten().filter(|&&c| c).count()
    }
}

/// Expands a unit cell into its 32×32 binary matrix.
pub fn compose(cell: &UnitCell) -> Matrix32 {
    let mut cells = [[false; MATRIX_SIDE]; MATRIX_SIDE];
    for (r, c, id) in cell.slots() {
        let pattern = tile_pattern(id);
        for i in 0..TILE_SIDE {
            for j in 0..TILE_SIDE {
                cells[r * TILE_SIDE + i][c * TILE_SIDE + j] = pattern.get(i, j);
            }
        }
    }
    Matrix32 { cells }
}

/// 48 ordered bits. Sequence position `k` lives at integer bit `47 - k`, so
/// the binary rendering of the backing integer reads in sequence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitVector48(u64);

impl BitVector48 {
    const MASK: u64 = (1 << CODE_BITS) - 1;

    pub fn from_u64(raw: u64) -> Self {
        Self(raw & Self::MASK)
    }

    pub fn as_u64(self) -> u64 {
        self.0
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, GeometryError> {
        if bits.len() != CODE_BITS {
            return Err(GeometryError::WrongLength {
                expected: CODE_BITS,
                got: bits.len(),
            });
        }
        let mut raw = 0u64;
        for (index, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(GeometryError::NotBinary { index });
            }
            raw = (raw << 1) | b as u64;
        }
        Ok(Self(raw))
    }

    pub fn bit(self, k: usize) -> u8 {
        assert!(k < CODE_BITS, "bit index {k} out of range");
        ((self.0 >> (CODE_BITS - 1 - k)) & 1) as u8
    }

    pub fn to_bits(self) -> [u8; CODE_BITS] {
        let mut out = [0u8; CODE_BITS];
        for (k, b) in out.iter_mut().enumerate() {
            *b = self.bit(k);
        }
        out
    }

    /// Bits as `0.0` / `1.0`, the form used as network labels.
    pub fn to_reals(self) -> [f64; CODE_BITS] {
        self.to_bits().map(f64::from)
    }

    pub fn count_ones(self) -> u32 {
        self.0.count_ones()
    }
}

impl fmt::Display for BitVector48 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:048b}", self.0)
    }
}

impl FromStr for BitVector48 {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits: Vec<u8> = s
            .chars()
            .enumerate()
            .map(|(index, ch)| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(GeometryError::NotBinary { index }),
            })
            .collect::<Result<_, _>>()?;
        Self::from_bits(&bits)
    }
}

pub fn encode_bits(cell: &UnitCell) -> BitVector48 {
    let raw = cell
        .tiles
        .iter()
        .fold(0u64, |acc, t| (acc << BITS_PER_TILE) | t.0 as u64);
    BitVector48(raw)
}

pub fn decode_bits(bits: BitVector48) -> UnitCell {
    let mut tiles = [TileId::default(); SLOTS];
    for (k, slot) in tiles.iter_mut().enumerate() {
        let shift = CODE_BITS - BITS_PER_TILE * (k + 1);
        *slot = TileId(((bits.0 >> shift) & 0b111) as u8);
    }
    UnitCell { tiles }
}

/// Thresholds 48 sigmoid activations. An activation of exactly 0.5 becomes 1.
pub fn decode_soft(activations: &[f64]) -> Result<BitVector48, GeometryError> {
    if activations.len() != CODE_BITS {
        return Err(GeometryError::WrongLength {
            expected: CODE_BITS,
            got: activations.len(),
        });
    }
    let mut raw = 0u64;
    for (index, &value) in activations.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(GeometryError::ActivationOutOfRange { index, value });
        }
        raw = (raw << 1) | u64::from(value >= 0.5);
    }
    Ok(BitVector48(raw))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    /// 32 lines of 32 characters, `#` for copper and `.` for empty.
    Ascii,
    /// Binary portable graymap, copper black (0) and empty white (255).
    Pgm,
}

impl FromStr for RenderFormat {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ascii" => Ok(Self::Ascii),
            "pgm" => Ok(Self::Pgm),
            other => Err(GeometryError::UnknownFormat(other.to_string())),
        }
    }
}

pub const PGM_HEADER: &[u8] = b"P5 32 32 255\n";

pub fn render(cell: &UnitCell, format: RenderFormat) -> Vec<u8> {
    let matrix = compose(cell);
    match format {
        RenderFormat::Ascii => {
            let mut out = Vec::with_capacity(MATRIX_SIDE * (MATRIX_SIDE + 1));
            for row in matrix.rows() {
                out.extend(row.iter().map(|&c| if c { b'#' } else { b'.' }));
                out.push(b'\n');
            }
            out
        }
        RenderFormat::Pgm => {
            let mut out = Vec::with_capacity(PGM_HEADER.len() + MATRIX_SIDE * MATRIX_SIDE);
            out.extend_from_slice(PGM_HEADER);
            for row in matrix.rows() {
                out.extend(row.iter().map(|&c| if c { 0u8 } else { 255u8 }));
            }
            out
        }
    }
}
