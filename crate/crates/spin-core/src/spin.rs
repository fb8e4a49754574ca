//! Block-recursive Strassen inversion.
//!
//! Each internal node breaks the matrix into quadrants, recursively
//! inverts the top-left block, forms the (negated) Schur complement,
//! recursively inverts that, and reassembles the four result quadrants
//! from six block multiplications, two subtractions and one scalar
//! negation. Leaves invert their single block through a one-task stage
//! rather than a driver-local call, so stage accounting stays uniform.

use crate::block::{
    arrange, break_mat, multiply, quadrant, scalar_mul, subtract, BlockMatrix, MatrixBlock,
    Quadrant,
};
use crate::dense::DenseTile;
use crate::error::{Error, Result};
use crate::executor::{Executor, StageKind};
use crate::trace::InversionTrace;

/// Inverts `a`, returning the inverse and the per-level stage trace.
///
/// Requires every leading principal block pivot encountered along the
/// recursion to be invertible; symmetric positive definite inputs
/// guarantee that. There is no pivoting across blocks, so inputs outside
/// that class may legitimately fail with `SingularTile`.
pub fn spin_invert(a: &BlockMatrix, exec: &Executor) -> Result<(BlockMatrix, InversionTrace)> {
    let depth = a.grid().trailing_zeros() as usize;
    let mut trace = InversionTrace::new(depth);
    let inverse = invert_rec(a, 0, exec, &mut trace)?;
    Ok((inverse, trace))
}

fn invert_rec(
    a: &BlockMatrix,
    level: usize,
    exec: &Executor,
    trace: &mut InversionTrace,
) -> Result<BlockMatrix> {
    trace.enter_node(level);
    if a.grid() == 1 {
        let (blocks, report) = exec.run_stage(StageKind::LeafNode, a.blocks(), 0, |blk| {
            Ok(MatrixBlock {
                row: blk.row,
                col: blk.col,
                tile: blk.tile.invert()?,
            })
        })?;
        trace.record_leaf(level, report, 1);
        return BlockMatrix::from_blocks(a.n(), a.block_size(), blocks);
    }

    let (quads, report) = break_mat(a, exec)?;
    trace.record(level, report);
    let mut parts = Vec::with_capacity(4);
    for tag in Quadrant::ALL {
        let (part, report) = quadrant(&quads, tag, exec)?;
        trace.record(level, report);
        parts.push(part);
    }
    let a22 = parts.pop().expect("four quadrants");
    let a21 = parts.pop().expect("four quadrants");
    let a12 = parts.pop().expect("four quadrants");
    let a11 = parts.pop().expect("four quadrants");

    let inv11 = invert_rec(&a11, level + 1, exec, trace)?;

    let (low, report) = multiply(&a21, &inv11, exec)?; // A21 * A11^-1
    trace.record(level, report);
    let (up, report) = multiply(&inv11, &a12, exec)?; // A11^-1 * A12
    trace.record(level, report);
    let (schur_part, report) = multiply(&a21, &up, exec)?;
    trace.record(level, report);
    // Negated Schur complement: A21 * A11^-1 * A12 - A22.
    let (neg_schur, report) = subtract(&schur_part, &a22, exec)?;
    trace.record(level, report);

    let neg_schur_inv = invert_rec(&neg_schur, level + 1, exec, trace)?;

    let (c12, report) = multiply(&up, &neg_schur_inv, exec)?;
    trace.record(level, report);
    let (c21, report) = multiply(&neg_schur_inv, &low, exec)?;
    trace.record(level, report);
    let (correction, report) = multiply(&up, &c21, exec)?;
    trace.record(level, report);
    let (c11, report) = subtract(&inv11, &correction, exec)?;
    trace.record(level, report);
    let (c22, report) = scalar_mul(&neg_schur_inv, -1.0, exec)?;
    trace.record(level, report);

    let (assembled, report) = arrange(&c11, &c12, &c21, &c22, exec)?;
    trace.record(level, report);
    Ok(assembled)
}

/// Serial dense reference: the same recursion on element halves with a
/// cutoff at `threshold`, below which the tile is inverted directly.
/// Splits at the same boundaries as the blocked version, so for
/// `threshold == block_size` the two produce bit-identical results.
pub fn spin_invert_serial(a: &DenseTile, threshold: usize) -> Result<DenseTile> {
    if threshold == 0 {
        return Err(Error::InvalidParams("threshold must be >= 1".into()));
    }
    if a.dim() <= threshold {
        return a.invert();
    }
    if a.dim() % 2 != 0 {
        return Err(Error::NonPowerOfTwo {
            what: "matrix order",
            value: a.dim(),
        });
    }
    let a11 = a.half(0, 0);
    let a12 = a.half(0, 1);
    let a21 = a.half(1, 0);
    let a22 = a.half(1, 1);

    let inv11 = spin_invert_serial(&a11, threshold)?;
    let low = a21.gemm(&inv11)?;
    let up = inv11.gemm(&a12)?;
    let neg_schur = a21.gemm(&up)?.sub(&a22)?;
    let neg_schur_inv = spin_invert_serial(&neg_schur, threshold)?;
    let c12 = up.gemm(&neg_schur_inv)?;
    let c21 = neg_schur_inv.gemm(&low)?;
    let c11 = inv11.sub(&up.gemm(&c21)?)?;
    let c22 = neg_schur_inv.scale(-1.0);

    let mut out = DenseTile::zeros(a.dim());
    out.set_half(0, 0, &c11);
    out.set_half(0, 1, &c12);
    out.set_half(1, 0, &c21);
    out.set_half(1, 1, &c22);
    Ok(out)
}
