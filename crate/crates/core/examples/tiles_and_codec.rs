//! The eight tile patterns, a composed unit cell and its 48-bit code.
//!
//! ```bash
//! cargo run -p metasurf --example tiles_and_codec
//! ```

use metasurf::geometry::{decode_bits, encode_bits, render, tile_pattern, RenderFormat, TileId, UnitCell};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for id in TileId::all() {
        let pattern = tile_pattern(id);
        println!("tile {}: {} copper pixels", id.value(), pattern.copper_count());
        for row in pattern.rows() {
            println!("  {}", row.iter().map(|&c| if c { '#' } else { '.' }).collect::<String>());
        }
    }

    let cell = UnitCell::from_ids(&[7, 6, 5, 4, 3, 2, 1, 0, 0, 1, 2, 3, 4, 5, 6, 7])?;
    let code = encode_bits(&cell);
    println!("cell  {cell}");
    println!("code  {code}");
    assert_eq!(decode_bits(code), cell);
    print!("{}", String::from_utf8(render(&cell, RenderFormat::Ascii))?);
    Ok(())
}
