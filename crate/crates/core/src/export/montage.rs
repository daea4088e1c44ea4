use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{LungBlock, WindowConfig};
use crate::error::{Error, Result};

/// (width, height) in pixels of a montage with `columns` tiles per row.
pub fn montage_dimensions(block: &LungBlock, columns: usize) -> (usize, usize) {
    let grid_rows = block.depth.div_ceil(columns);
    (columns * block.cols, grid_rows * block.rows)
}

/// Tiles the windowed slices row-major into one binary PGM; unused trailing
/// tiles stay black.
pub fn write_montage_pgm(
    block: &LungBlock,
    path: &Path,
    columns: usize,
    window: &WindowConfig,
) -> Result<()> {
    if columns == 0 {
        return Err(Error::Config("montage needs at least one column".into()));
    }
    let (width, height) = montage_dimensions(block, columns);
    let mut image = vec![0u8; width * height];
    for d in 0..block.depth {
        let (tile_row, tile_col) = (d / columns, d % columns);
        let grey = super::window_rescale(block.slice(d), window);
        for r in 0..block.rows {
            let y = tile_row * block.rows + r;
            let x = tile_col * block.cols;
            image[y * width + x..y * width + x + block.cols]
                .copy_from_slice(&grey[r * block.cols..(r + 1) * block.cols]);
        }
    }

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write!(w, "P5\n{width} {height}\n255\n")
        .and_then(|_| w.write_all(&image))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}
