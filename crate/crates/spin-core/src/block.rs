//! Block matrix data model and its structural operations.
//!
//! A matrix of order `n` lives as a `b x b` grid of `block_size`-sided
//! dense tiles. All the distributed-style methods (break into quadrants,
//! extract, rearrange, scalar multiply, subtract, cogroup multiply) run as
//! stages through the [`Executor`] so that every run is instrumented and
//! scheduling-independent.

use crate::dense::DenseTile;
use crate::error::{is_pow2, Error, Result};
use crate::executor::{account_multiply_shuffle, Executor, StageKind, StageReport};

/// One tile addressed by its block-grid coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixBlock {
    pub row: usize,
    pub col: usize,
    pub tile: DenseTile,
}

/// Quadrant tag assigned by `break_mat`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrant {
    A11,
    A12,
    A21,
    A22,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::A11, Quadrant::A12, Quadrant::A21, Quadrant::A22];

    /// Serialized form keeps the classic "A11".."A22" names.
    pub fn as_str(&self) -> &'static str {
        match self {
            Quadrant::A11 => "A11",
            Quadrant::A12 => "A12",
            Quadrant::A21 => "A21",
            Quadrant::A22 => "A22",
        }
    }

    fn index(&self) -> usize {
        match self {
            Quadrant::A11 => 0,
            Quadrant::A12 => 1,
            Quadrant::A21 => 2,
            Quadrant::A22 => 3,
        }
    }
}

/// A block paired with its quadrant tag; indices already remapped to the
/// quadrant-local grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedBlock {
    pub tag: Quadrant,
    pub block: MatrixBlock,
}

/// Materialized output of `break_mat`: the four tagged collections.
#[derive(Debug, Clone)]
pub struct QuadrantSet {
    half_size: usize,
    block_size: usize,
    quads: [Vec<TaggedBlock>; 4],
}

impl QuadrantSet {
    /// Blocks per side of each quadrant.
    pub fn half_size(&self) -> usize {
        self.half_size
    }

    pub fn tagged(&self, which: Quadrant) -> &[TaggedBlock] {
        &self.quads[which.index()]
    }
}

/// Square matrix stored as an unordered-in-spirit, canonically-sorted
/// collection of blocks. `n = b * block_size`; both `n` and `b` are
/// powers of two.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    n: usize,
    block_size: usize,
    /// Row-major by (row, col); exactly one block per coordinate.
    blocks: Vec<MatrixBlock>,
}

impl BlockMatrix {
    /// Validates the grid invariants and canonicalizes block order.
    pub fn from_blocks(n: usize, block_size: usize, mut blocks: Vec<MatrixBlock>) -> Result<Self> {
        if !is_pow2(n) {
            return Err(Error::NonPowerOfTwo {
                what: "matrix order",
                value: n,
            });
        }
        if !is_pow2(block_size) || block_size > n || n % block_size != 0 {
            return Err(Error::BadBlockSize { n, block_size });
        }
        let b = n / block_size;
        if blocks.len() != b * b {
            return Err(Error::DimensionMismatch {
                left: blocks.len(),
                right: b * b,
                context: "block count",
            });
        }
        blocks.sort_by_key(|blk| (blk.row, blk.col));
        for (idx, blk) in blocks.iter().enumerate() {
            if blk.row != idx / b || blk.col != idx % b {
                return Err(Error::InvalidParams(format!(
                    "missing or duplicate block at grid position ({}, {})",
                    idx / b,
                    idx % b
                )));
            }
            if blk.tile.dim() != block_size {
                return Err(Error::DimensionMismatch {
                    left: blk.tile.dim(),
                    right: block_size,
                    context: "tile dim vs block size",
                });
            }
        }
        Ok(Self {
            n,
            block_size,
            blocks,
        })
    }

    pub fn identity(n: usize, block_size: usize) -> Result<Self> {
        let mut m = Self::zeros(n, block_size)?;
        let b = m.grid();
        for i in 0..b {
            m.blocks[i * b + i].tile = DenseTile::identity(block_size);
        }
        Ok(m)
    }

    pub fn zeros(n: usize, block_size: usize) -> Result<Self> {
        if !is_pow2(n) {
            return Err(Error::NonPowerOfTwo {
                what: "matrix order",
                value: n,
            });
        }
        if !is_pow2(block_size) || block_size > n || n % block_size != 0 {
            return Err(Error::BadBlockSize { n, block_size });
        }
        let b = n / block_size;
        let mut blocks = Vec::with_capacity(b * b);
        for row in 0..b {
            for col in 0..b {
                blocks.push(MatrixBlock {
                    row,
                    col,
                    tile: DenseTile::zeros(block_size),
                });
            }
        }
        Ok(Self {
            n,
            block_size,
            blocks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Splits per side (`b`).
    pub fn grid(&self) -> usize {
        self.n / self.block_size
    }

    pub fn blocks(&self) -> &[MatrixBlock] {
        &self.blocks
    }

    #[inline]
    pub fn block(&self, row: usize, col: usize) -> &MatrixBlock {
        &self.blocks[row * self.grid() + col]
    }

    fn check_conformable(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
                context,
            });
        }
        if self.block_size != other.block_size {
            return Err(Error::DimensionMismatch {
                left: self.block_size,
                right: other.block_size,
                context,
            });
        }
        Ok(())
    }
}

/// Tags every block with its quadrant and remaps indices to the half
/// grid: `tag` from integer division by `size = b/2`, local index from
/// the remainder.
pub fn break_mat(a: &BlockMatrix, exec: &Executor) -> Result<(QuadrantSet, StageReport)> {
    let b = a.grid();
    if b < 2 || b % 2 != 0 {
        return Err(Error::OddGrid { grid: b });
    }
    let size = b / 2;
    let (tagged, report) = exec.run_stage(StageKind::BreakMat, a.blocks(), 0, |blk| {
        let tag = match (blk.row / size, blk.col / size) {
            (0, 0) => Quadrant::A11,
            (0, 1) => Quadrant::A12,
            (1, 0) => Quadrant::A21,
            _ => Quadrant::A22,
        };
        Ok(TaggedBlock {
            tag,
            block: MatrixBlock {
                row: blk.row % size,
                col: blk.col % size,
                tile: blk.tile.clone(),
            },
        })
    })?;

    let mut quads: [Vec<TaggedBlock>; 4] = Default::default();
    for tb in tagged {
        quads[tb.tag.index()].push(tb);
    }
    Ok((
        QuadrantSet {
            half_size: size,
            block_size: a.block_size(),
            quads,
        },
        report,
    ))
}

/// Filters one quadrant out of the broken set and rebuilds it as a
/// half-order matrix. The stage scans every tagged block, mirroring the
/// filter-then-map pair of the distributed version.
pub fn quadrant(
    q: &QuadrantSet,
    which: Quadrant,
    exec: &Executor,
) -> Result<(BlockMatrix, StageReport)> {
    let all: Vec<&TaggedBlock> = Quadrant::ALL
        .iter()
        .flat_map(|tag| q.tagged(*tag).iter())
        .collect();
    let (hits, report) = exec.run_stage(StageKind::Xy, &all, 0, |tb| {
        if tb.tag == which {
            Ok(Some(tb.block.clone()))
        } else {
            Ok(None)
        }
    })?;
    let blocks: Vec<MatrixBlock> = hits.into_iter().flatten().collect();
    let matrix = BlockMatrix::from_blocks(q.half_size * q.block_size, q.block_size, blocks)?;
    Ok((matrix, report))
}

/// Rearranges four half-order matrices into one: C12 shifts its column
/// indices by `half`, C21 its rows, C22 both, then the pieces union.
pub fn arrange(
    c11: &BlockMatrix,
    c12: &BlockMatrix,
    c21: &BlockMatrix,
    c22: &BlockMatrix,
    exec: &Executor,
) -> Result<(BlockMatrix, StageReport)> {
    c11.check_conformable(c12, "arrange operands")?;
    c11.check_conformable(c21, "arrange operands")?;
    c11.check_conformable(c22, "arrange operands")?;
    let half = c11.grid();
    let tasks: Vec<(usize, usize, &MatrixBlock)> =
        [(c11, 0, 0), (c12, 0, 1), (c21, 1, 0), (c22, 1, 1)]
            .into_iter()
            .flat_map(|(m, dr, dc)| m.blocks().iter().map(move |blk| (dr, dc, blk)))
            .collect();
    let (blocks, report) = exec.run_stage(StageKind::Arrange, &tasks, 0, |(dr, dc, blk)| {
        Ok(MatrixBlock {
            row: blk.row + dr * half,
            col: blk.col + dc * half,
            tile: blk.tile.clone(),
        })
    })?;
    let matrix = BlockMatrix::from_blocks(2 * c11.n(), c11.block_size(), blocks)?;
    Ok((matrix, report))
}

/// Maps every tile through `tile * s`; indices untouched.
pub fn scalar_mul(a: &BlockMatrix, s: f64, exec: &Executor) -> Result<(BlockMatrix, StageReport)> {
    let (blocks, report) = exec.run_stage(StageKind::ScalarMul, a.blocks(), 0, |blk| {
        Ok(MatrixBlock {
            row: blk.row,
            col: blk.col,
            tile: blk.tile.scale(s),
        })
    })?;
    let matrix = BlockMatrix::from_blocks(a.n(), a.block_size(), blocks)?;
    Ok((matrix, report))
}

/// Blockwise `a - b`, joined on the grid coordinate.
pub fn subtract(
    a: &BlockMatrix,
    b: &BlockMatrix,
    exec: &Executor,
) -> Result<(BlockMatrix, StageReport)> {
    a.check_conformable(b, "subtract operands")?;
    let coords: Vec<(usize, usize)> = a.blocks().iter().map(|blk| (blk.row, blk.col)).collect();
    let (blocks, report) = exec.run_stage(StageKind::Subtract, &coords, 0, |&(row, col)| {
        let tile = a.block(row, col).tile.sub(&b.block(row, col).tile)?;
        Ok(MatrixBlock { row, col, tile })
    })?;
    let matrix = BlockMatrix::from_blocks(a.n(), a.block_size(), blocks)?;
    Ok((matrix, report))
}

/// Cogroup-style block multiply: one task per output coordinate. Each
/// task first materializes its replica group (copies of the `b` lhs
/// blocks of its row and the `b` rhs blocks of its column, the same
/// bytes a real shuffle would move and exactly what the stage report
/// accounts), then reduces the partial products over `k` in ascending
/// order, so the result is bit-identical to the dense triple loop.
pub fn multiply(
    a: &BlockMatrix,
    b: &BlockMatrix,
    exec: &Executor,
) -> Result<(BlockMatrix, StageReport)> {
    a.check_conformable(b, "multiply operands")?;
    let grid = a.grid();
    let shuffle = account_multiply_shuffle(a, b);
    let bs = a.block_size();
    let tile_len = bs * bs;
    let coords: Vec<(usize, usize)> = a.blocks().iter().map(|blk| (blk.row, blk.col)).collect();
    let (blocks, report) =
        exec.run_stage(StageKind::Multiply, &coords, shuffle, |&(row, col)| {
            let mut lhs_group = Vec::with_capacity(grid * tile_len);
            let mut rhs_group = Vec::with_capacity(grid * tile_len);
            for k in 0..grid {
                lhs_group.extend_from_slice(a.block(row, k).tile.data());
                rhs_group.extend_from_slice(b.block(k, col).tile.data());
            }
            let mut acc = vec![0.0_f64; tile_len];
            for k in 0..grid {
                crate::dense::gemm_acc_raw(
                    &lhs_group[k * tile_len..(k + 1) * tile_len],
                    &rhs_group[k * tile_len..(k + 1) * tile_len],
                    &mut acc,
                    bs,
                );
            }
            Ok(MatrixBlock {
                row,
                col,
                tile: DenseTile::new(bs, acc)?,
            })
        })?;
    let matrix = BlockMatrix::from_blocks(a.n(), a.block_size(), blocks)?;
    Ok((matrix, report))
}

/// Assembles the whole matrix into one dense column-major tile.
/// Test-oracle bridge; keep to orders that fit in one allocation.
pub fn densify(a: &BlockMatrix) -> DenseTile {
    let mut out = DenseTile::zeros(a.n());
    let bs = a.block_size();
    for blk in a.blocks() {
        for c in 0..bs {
            for r in 0..bs {
                out.set(blk.row * bs + r, blk.col * bs + c, blk.tile.at(r, c));
            }
        }
    }
    out
}

/// Inverse of [`densify`]: cuts a dense matrix into a block grid.
pub fn partition(dense: &DenseTile, block_size: usize) -> Result<BlockMatrix> {
    let n = dense.dim();
    if !is_pow2(n) {
        return Err(Error::NonPowerOfTwo {
            what: "matrix order",
            value: n,
        });
    }
    if !is_pow2(block_size) || block_size > n || n % block_size != 0 {
        return Err(Error::BadBlockSize { n, block_size });
    }
    let b = n / block_size;
    let mut blocks = Vec::with_capacity(b * b);
    for row in 0..b {
        for col in 0..b {
            let mut tile = DenseTile::zeros(block_size);
            for c in 0..block_size {
                for r in 0..block_size {
                    tile.set(r, c, dense.at(row * block_size + r, col * block_size + c));
                }
            }
            blocks.push(MatrixBlock { row, col, tile });
        }
    }
    BlockMatrix::from_blocks(n, block_size, blocks)
}
