//! On-disk matrix formats.
//!
//! Binary format (bit-exact):
//!   magic "SPINMAT1" (8 ASCII bytes)
//!   u64 little-endian: matrix order n
//!   u64 little-endian: block size
//!   b^2 records in ascending (rowIndex, colIndex) order, each
//!     u64 rowIndex, u64 colIndex, block_size^2 f64 little-endian
//!     values in column-major order.
//!
//! A plain CSV of decimal values (one matrix row per line) is supported
//! for small matrices; paths ending in `.csv` select it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::block::{BlockMatrix, MatrixBlock};
use crate::dense::DenseTile;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SPINMAT1";

pub fn write_binary(matrix: &BlockMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(matrix.n() as u64).to_le_bytes())?;
    w.write_all(&(matrix.block_size() as u64).to_le_bytes())?;
    // Blocks are already canonically sorted by (row, col).
    for blk in matrix.blocks() {
        w.write_all(&(blk.row as u64).to_le_bytes())?;
        w.write_all(&(blk.col as u64).to_le_bytes())?;
        for v in blk.tile.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<BlockMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(MAGIC)
        )));
    }
    let n = read_u64(&mut r)? as usize;
    let block_size = read_u64(&mut r)? as usize;
    if block_size == 0 || n == 0 || n % block_size != 0 {
        return Err(Error::Format(format!(
            "inconsistent header: n={n} block_size={block_size}"
        )));
    }
    let b = n / block_size;
    let mut blocks = Vec::with_capacity(b * b);
    for _ in 0..b * b {
        let row = read_u64(&mut r)? as usize;
        let col = read_u64(&mut r)? as usize;
        let mut data = Vec::with_capacity(block_size * block_size);
        let mut buf = [0u8; 8];
        for _ in 0..block_size * block_size {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Format("truncated tile payload".into()))?;
            data.push(f64::from_le_bytes(buf));
        }
        blocks.push(MatrixBlock {
            row,
            col,
            tile: DenseTile::new(block_size, data)?,
        });
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after final block".into()));
    }
    BlockMatrix::from_blocks(n, block_size, blocks)
}

pub fn write_csv_dense(dense: &DenseTile, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = dense.dim();
    let mut line = String::new();
    for r in 0..n {
        line.clear();
        for c in 0..n {
            if c > 0 {
                line.push(',');
            }
            // Shortest round-trip formatting keeps the file exact.
            line.push_str(&format!("{:?}", dense.at(r, c)));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv_dense(path: &Path) -> Result<DenseTile> {
    let content = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line
            .split(',')
            .map(|cell| cell.trim().parse::<f64>())
            .collect();
        let row = row.map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Format("empty CSV matrix".into()));
    }
    let mut dense = DenseTile::zeros(n);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Format(format!(
                "row {} has {} columns, expected {n}",
                r + 1,
                row.len()
            )));
        }
        for (c, v) in row.iter().enumerate() {
            dense.set(r, c, *v);
        }
    }
    Ok(dense)
}

/// Path-based dispatch: `.csv` selects the dense text format, anything
/// else the binary block format. CSV files carry no block size, so the
/// caller provides one for re-blocking.
pub fn read_matrix(path: &Path, csv_block_size: Option<usize>) -> Result<BlockMatrix> {
    if is_csv(path) {
        let dense = read_csv_dense(path)?;
        let bs = csv_block_size.unwrap_or(dense.dim());
        crate::block::partition(&dense, bs)
    } else {
        read_binary(path)
    }
}

pub fn write_matrix(matrix: &BlockMatrix, path: &Path) -> Result<()> {
    if is_csv(path) {
        write_csv_dense(&crate::block::densify(matrix), path)
    } else {
        write_binary(matrix, path)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .map(|ext| ext.eq_ignore_ascii_case("csv"))
        .unwrap_or(false)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Format("truncated header".into()))?;
    Ok(u64::from_le_bytes(buf))
}
