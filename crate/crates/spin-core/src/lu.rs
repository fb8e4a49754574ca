//! Block-recursive LU factorization and the LU-based inversion baseline.
//!
//! The recursion mirrors the Schur scheme: factor the top-left quadrant,
//! solve for the off-diagonal factors, factor the Schur complement, and
//! assemble. Triangular-factor inverses are carried up the recursion and
//! composed per level, so the final inverse is a single product
//! `U^-1 * L^-1` (recorded as the additional post-factorization cost).
//!
//! Each leaf performs nine cubic tile kernels (two LU factorizations,
//! four triangular inversions and three multiplies) by running one
//! element-level Schur step inside its tile and then inverting the
//! assembled tile factors. That matches the baseline's characteristic
//! leaf cost of nine cubic operations against the single inversion a
//! Strassen leaf performs.

use crate::block::{
    arrange, break_mat, multiply, quadrant, scalar_mul, subtract, BlockMatrix, MatrixBlock,
    Quadrant,
};
use crate::dense::DenseTile;
use crate::error::Result;
use crate::executor::{Executor, StageKind};
use crate::trace::InversionTrace;

/// Unit-lower / upper triangular factor pair with `L * U = A`.
#[derive(Debug, Clone)]
pub struct BlockLUResult {
    pub l: BlockMatrix,
    pub u: BlockMatrix,
}

/// Which side a triangular matrix carries its mass on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangularSide {
    Lower,
    Upper,
}

/// Factors plus carried inverses, the unit the recursion passes upward.
struct LuFactors {
    l: BlockMatrix,
    u: BlockMatrix,
    l_inv: BlockMatrix,
    u_inv: BlockMatrix,
}

/// Output of the leaf bundle on a single tile.
struct LeafFactors {
    l: DenseTile,
    u: DenseTile,
    l_inv: DenseTile,
    u_inv: DenseTile,
    cubic_ops: usize,
}

/// Block LU decomposition without pivoting. All leading principal minors
/// must be nonsingular (SPD and diagonally dominant inputs qualify).
pub fn block_lu(a: &BlockMatrix, exec: &Executor) -> Result<BlockLUResult> {
    let depth = a.grid().trailing_zeros() as usize;
    let mut trace = InversionTrace::new(depth);
    let factors = lu_core(a, 0, exec, &mut trace, false)?;
    Ok(BlockLUResult {
        l: factors.l,
        u: factors.u,
    })
}

/// LU-based inversion: factor recursively (inverses carried and composed
/// per level), then multiply `U^-1 * L^-1` as the final stage. The final
/// multiply is recorded under the `additional` stage kind.
pub fn lu_invert(a: &BlockMatrix, exec: &Executor) -> Result<(BlockMatrix, InversionTrace)> {
    let depth = a.grid().trailing_zeros() as usize;
    let mut trace = InversionTrace::new(depth);
    let factors = lu_core(a, 0, exec, &mut trace, true)?;
    let (inverse, mut report) = multiply(&factors.u_inv, &factors.l_inv, exec)?;
    report.stage = StageKind::Additional;
    trace.record(0, report);
    Ok((inverse, trace))
}

fn lu_core(
    a: &BlockMatrix,
    level: usize,
    exec: &Executor,
    trace: &mut InversionTrace,
    want_inverses: bool,
) -> Result<LuFactors> {
    trace.enter_node(level);
    if a.grid() == 1 {
        let (mut bundles, report) = exec.run_stage(StageKind::LeafNode, a.blocks(), 0, |blk| {
            leaf_bundle(&blk.tile)
        })?;
        let bundle = bundles.pop().expect("one leaf task");
        trace.record_leaf(level, report, bundle.cubic_ops);
        let single = |tile: DenseTile| {
            BlockMatrix::from_blocks(
                a.n(),
                a.block_size(),
                vec![MatrixBlock {
                    row: 0,
                    col: 0,
                    tile,
                }],
            )
        };
        return Ok(LuFactors {
            l: single(bundle.l)?,
            u: single(bundle.u)?,
            l_inv: single(bundle.l_inv)?,
            u_inv: single(bundle.u_inv)?,
        });
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

    let top = lu_core(&a11, level + 1, exec, trace, true)?;

    let (u12, report) = multiply(&top.l_inv, &a12, exec)?;
    trace.record(level, report);
    let (l21, report) = multiply(&a21, &top.u_inv, exec)?;
    trace.record(level, report);
    let (update, report) = multiply(&l21, &u12, exec)?;
    trace.record(level, report);
    let (schur, report) = subtract(&a22, &update, exec)?;
    trace.record(level, report);

    let bottom = lu_core(&schur, level + 1, exec, trace, true)?;

    let zeros = BlockMatrix::zeros(a11.n(), a11.block_size())?;
    let (l, report) = arrange(&top.l, &zeros, &l21, &bottom.l, exec)?;
    trace.record(level, report);
    let (u, report) = arrange(&top.u, &u12, &zeros, &bottom.u, exec)?;
    trace.record(level, report);

    if !want_inverses {
        // Root of a factor-only call: skip composing inverses one level up.
        return Ok(LuFactors {
            l_inv: zeros.clone(),
            u_inv: zeros,
            l,
            u,
        });
    }

    // L^-1 = [[L11i, 0], [-L22i*L21*L11i, L22i]]
    let (w, report) = multiply(&bottom.l_inv, &l21, exec)?;
    trace.record(level, report);
    let (w, report) = multiply(&w, &top.l_inv, exec)?;
    trace.record(level, report);
    let (w, report) = scalar_mul(&w, -1.0, exec)?;
    trace.record(level, report);
    // U^-1 = [[U11i, -U11i*U12*U22i], [0, U22i]]
    let (v, report) = multiply(&top.u_inv, &u12, exec)?;
    trace.record(level, report);
    let (v, report) = multiply(&v, &bottom.u_inv, exec)?;
    trace.record(level, report);
    let (v, report) = scalar_mul(&v, -1.0, exec)?;
    trace.record(level, report);

    let (l_inv, report) = arrange(&top.l_inv, &zeros, &w, &bottom.l_inv, exec)?;
    trace.record(level, report);
    let (u_inv, report) = arrange(&top.u_inv, &v, &zeros, &bottom.u_inv, exec)?;
    trace.record(level, report);

    Ok(LuFactors { l, u, l_inv, u_inv })
}

/// Nine cubic kernels on one tile: an element-level Schur step (two
/// half-tile LU factorizations, two half triangular inversions, three
/// half multiplies) assembles the tile factors, then two full-tile
/// triangular inversions produce the carried inverses. A 1x1 tile cannot
/// be halved and degenerates to three kernels.
fn leaf_bundle(tile: &DenseTile) -> Result<LeafFactors> {
    let d = tile.dim();
    if d == 1 {
        let (l, u) = tile.lu_factor()?;
        let l_inv = l.invert_lower()?;
        let u_inv = u.invert_upper()?;
        return Ok(LeafFactors {
            l,
            u,
            l_inv,
            u_inv,
            cubic_ops: 3,
        });
    }

    let a11 = tile.half(0, 0);
    let a12 = tile.half(0, 1);
    let a21 = tile.half(1, 0);
    let a22 = tile.half(1, 1);

    let (l1, u1) = a11.lu_factor()?; // 1
    let l1_inv = l1.invert_lower()?; // 2
    let u1_inv = u1.invert_upper()?; // 3
    let u12 = l1_inv.gemm(&a12)?; // 4
    let l21 = a21.gemm(&u1_inv)?; // 5
    let update = l21.gemm(&u12)?; // 6
    let schur = a22.sub(&update)?;
    let (l2, u2) = schur.lu_factor()?; // 7

    let mut l = DenseTile::zeros(d);
    l.set_half(0, 0, &l1);
    l.set_half(1, 0, &l21);
    l.set_half(1, 1, &l2);
    let mut u = DenseTile::zeros(d);
    u.set_half(0, 0, &u1);
    u.set_half(0, 1, &u12);
    u.set_half(1, 1, &u2);

    let l_inv = l.invert_lower()?; // 8
    let u_inv = u.invert_upper()?; // 9

    Ok(LeafFactors {
        l,
        u,
        l_inv,
        u_inv,
        cubic_ops: 9,
    })
}

/// Block-recursive triangular inverse:
/// lower `T^-1 = [[T11^-1, 0], [-T22^-1*T21*T11^-1, T22^-1]]`, the
/// transposed pattern for upper. Diagonal blocks must be nonsingular.
pub fn triangular_invert(
    t: &BlockMatrix,
    side: TriangularSide,
    exec: &Executor,
) -> Result<BlockMatrix> {
    if t.grid() == 1 {
        let (blocks, _) = exec.run_stage(StageKind::LeafNode, t.blocks(), 0, |blk| {
            let tile = match side {
                TriangularSide::Lower => blk.tile.invert_lower()?,
                TriangularSide::Upper => blk.tile.invert_upper()?,
            };
            Ok(MatrixBlock {
                row: blk.row,
                col: blk.col,
                tile,
            })
        })?;
        return BlockMatrix::from_blocks(t.n(), t.block_size(), blocks);
    }

    let (quads, _) = break_mat(t, exec)?;
    let (t11, _) = quadrant(&quads, Quadrant::A11, exec)?;
    let (t22, _) = quadrant(&quads, Quadrant::A22, exec)?;
    let diag_top = triangular_invert(&t11, side, exec)?;
    let diag_bottom = triangular_invert(&t22, side, exec)?;
    let zeros = BlockMatrix::zeros(t11.n(), t11.block_size())?;

    match side {
        TriangularSide::Lower => {
            let (t21, _) = quadrant(&quads, Quadrant::A21, exec)?;
            let (w, _) = multiply(&diag_bottom, &t21, exec)?;
            let (w, _) = multiply(&w, &diag_top, exec)?;
            let (w, _) = scalar_mul(&w, -1.0, exec)?;
            Ok(arrange(&diag_top, &zeros, &w, &diag_bottom, exec)?.0)
        }
        TriangularSide::Upper => {
            let (t12, _) = quadrant(&quads, Quadrant::A12, exec)?;
            let (v, _) = multiply(&diag_top, &t12, exec)?;
            let (v, _) = multiply(&v, &diag_bottom, exec)?;
            let (v, _) = scalar_mul(&v, -1.0, exec)?;
            Ok(arrange(&diag_top, &v, &zeros, &diag_bottom, exec)?.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{densify, partition};
    use crate::error::Error;
    use crate::executor::ExecConfig;

    fn exec() -> Executor {
        Executor::new(ExecConfig::new(2).unwrap())
    }

    fn spd(n: usize, seed: u64) -> DenseTile {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut m = DenseTile::zeros(n);
        for c in 0..n {
            for r in 0..n {
                m.set(r, c, next());
            }
        }
        let mut a = DenseTile::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += m.at(k, r) * m.at(k, c);
                }
                a.set(r, c, s);
            }
            a.set(r, r, a.at(r, r) + n as f64);
        }
        a
    }

    fn assert_triangular(result: &BlockLUResult) {
        let l = densify(&result.l);
        let u = densify(&result.u);
        let n = l.dim();
        for i in 0..n {
            assert_eq!(l.at(i, i), 1.0, "L must be unit diagonal");
            for j in i + 1..n {
                assert_eq!(l.at(i, j), 0.0, "L must be lower triangular");
                assert_eq!(u.at(j, i), 0.0, "U must be upper triangular");
            }
        }
    }

    #[test]
    fn identity_factors_trivially() {
        let id = BlockMatrix::identity(8, 2).unwrap();
        let result = block_lu(&id, &exec()).unwrap();
        assert_eq!(result.l, id);
        assert_eq!(result.u, id);
    }

    #[test]
    fn doolittle_two_by_two() {
        // [[4,3],[6,3]] -> L=[[1,0],[1.5,1]], U=[[4,3],[0,-1.5]]
        let a = DenseTile::new(2, vec![4.0, 6.0, 3.0, 3.0]).unwrap();
        let blocks = partition(&a, 1).unwrap();
        let result = block_lu(&blocks, &exec()).unwrap();
        let l = densify(&result.l);
        let u = densify(&result.u);
        assert_eq!(l.data(), &[1.0, 1.5, 0.0, 1.0]);
        assert_eq!(u.data(), &[4.0, 0.0, 3.0, -1.5]);
    }

    #[test]
    fn factorization_reconstructs_input() {
        for (n, bs, seed) in [(16, 2, 1u64), (32, 4, 2), (32, 8, 3), (16, 16, 4)] {
            let a = spd(n, seed);
            let blocks = partition(&a, bs).unwrap();
            let result = block_lu(&blocks, &exec()).unwrap();
            assert_triangular(&result);
            let back = densify(&result.l).gemm(&densify(&result.u)).unwrap();
            let dist = back.rel_distance(&a);
            assert!(dist < 1e-9, "n={n} bs={bs}: {dist}");
        }
    }

    #[test]
    fn factorization_reconstructs_diagonally_dominant_input() {
        let n = 128;
        let mut state = 0x5eed_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut a = DenseTile::zeros(n);
        for c in 0..n {
            for r in 0..n {
                a.set(r, c, next());
            }
        }
        for i in 0..n {
            let row_sum: f64 = (0..n).map(|c| a.at(i, c).abs()).sum();
            a.set(i, i, a.at(i, i) + row_sum + 1.0);
        }
        let blocks = partition(&a, 16).unwrap();
        let result = block_lu(&blocks, &exec()).unwrap();
        assert_triangular(&result);
        let back = densify(&result.l).gemm(&densify(&result.u)).unwrap();
        let dist = back.rel_distance(&a);
        assert!(dist < 1e-10, "{dist}");
    }

    #[test]
    fn inversion_identity() {
        let id = BlockMatrix::identity(8, 4).unwrap();
        let (inv, _) = lu_invert(&id, &exec()).unwrap();
        assert_eq!(densify(&inv), DenseTile::identity(8));
    }

    #[test]
    fn inversion_hand_checked_two_by_two() {
        let a = DenseTile::new(2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let blocks = partition(&a, 1).unwrap();
        let (inv, _) = lu_invert(&blocks, &exec()).unwrap();
        let dense = densify(&inv);
        for (got, want) in dense.data().iter().zip([3.0, -2.0, -2.0, 4.0]) {
            assert!((got - want / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn inversion_matches_oracle_and_leaves_residual_small() {
        for (n, bs, seed) in [(32, 4, 5u64), (64, 8, 6), (64, 16, 7)] {
            let a = spd(n, seed);
            let blocks = partition(&a, bs).unwrap();
            let (inv, _) = lu_invert(&blocks, &exec()).unwrap();
            let dense_inv = densify(&inv);
            let oracle = a.invert().unwrap();
            let dist = dense_inv.rel_distance(&oracle);
            assert!(dist < 1e-8, "n={n} bs={bs}: {dist}");
            let residual = a
                .gemm(&dense_inv)
                .unwrap()
                .sub(&DenseTile::identity(n))
                .unwrap()
                .inf_norm();
            assert!(residual <= 1e-6, "n={n} bs={bs}: {residual}");
        }
    }

    #[test]
    fn spin_and_lu_agree() {
        let a = spd(64, 8);
        let blocks = partition(&a, 8).unwrap();
        let (lu_inv, _) = lu_invert(&blocks, &exec()).unwrap();
        let (spin_inv, _) = crate::spin::spin_invert(&blocks, &exec()).unwrap();
        let dist = densify(&lu_inv).rel_distance(&densify(&spin_inv));
        assert!(dist < 1e-8, "{dist}");
    }

    #[test]
    fn census_nine_cubic_ops_per_leaf() {
        for (n, bs) in [(16, 4), (32, 4), (64, 16)] {
            let a = spd(n, 9);
            let blocks = partition(&a, bs).unwrap();
            let (_, trace) = lu_invert(&blocks, &exec()).unwrap();
            let b = n / bs;
            assert_eq!(trace.leaf_nodes, b, "n={n} bs={bs}");
            assert_eq!(trace.leaf_ops, 9 * b, "n={n} bs={bs}");
            assert_eq!(trace.stage_count(StageKind::Additional), 1);
        }
    }

    #[test]
    fn trace_counts_internal_stages() {
        let a = spd(32, 10);
        let blocks = partition(&a, 8).unwrap(); // b = 4, depth 2
        let (_, trace) = lu_invert(&blocks, &exec()).unwrap();
        for level in 0..2 {
            let nodes = trace.nodes_at(level);
            assert_eq!(nodes, 1 << level);
            // 3 Schur multiplies + 4 inverse-composition multiplies.
            assert_eq!(trace.stage_count_at(level, StageKind::Multiply), 7 * nodes);
            assert_eq!(trace.stage_count_at(level, StageKind::Subtract), nodes);
            assert_eq!(trace.stage_count_at(level, StageKind::ScalarMul), 2 * nodes);
            assert_eq!(trace.stage_count_at(level, StageKind::Arrange), 4 * nodes);
        }
    }

    #[test]
    fn singular_input_is_reported() {
        let zero = BlockMatrix::zeros(4, 2).unwrap();
        assert!(matches!(
            lu_invert(&zero, &exec()),
            Err(Error::SingularTile { .. })
        ));
    }

    #[test]
    fn triangular_invert_identity_and_diagonal() {
        let id = BlockMatrix::identity(8, 2).unwrap();
        for side in [TriangularSide::Lower, TriangularSide::Upper] {
            let inv = triangular_invert(&id, side, &exec()).unwrap();
            assert_eq!(densify(&inv), DenseTile::identity(8));
        }

        // Block-diagonal: the inverse is the blockwise leaf inverse.
        let mut dense = DenseTile::zeros(8);
        for i in 0..8 {
            dense.set(i, i, (i + 2) as f64);
        }
        let m = partition(&dense, 4).unwrap();
        let inv = triangular_invert(&m, TriangularSide::Lower, &exec()).unwrap();
        for i in 0..8 {
            assert!((densify(&inv).at(i, i) - 1.0 / (i + 2) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn triangular_invert_matches_substitution_oracle() {
        // Unit lower-triangular random 64x64.
        let mut state = 0xabcdef12345_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let n = 64;
        let mut dense = DenseTile::zeros(n);
        for c in 0..n {
            for r in c + 1..n {
                dense.set(r, c, next());
            }
        }
        for i in 0..n {
            dense.set(i, i, 1.0);
        }

        // Forward-substitution oracle: solve L x = e_j per column.
        let mut oracle = DenseTile::zeros(n);
        for j in 0..n {
            let mut x = vec![0.0f64; n];
            for i in 0..n {
                let mut s = if i == j { 1.0 } else { 0.0 };
                for k in 0..i {
                    s -= dense.at(i, k) * x[k];
                }
                x[i] = s / dense.at(i, i);
            }
            for i in 0..n {
                oracle.set(i, j, x[i]);
            }
        }

        let m = partition(&dense, 8).unwrap();
        let inv = triangular_invert(&m, TriangularSide::Lower, &exec()).unwrap();
        let dist = densify(&inv).rel_distance(&oracle);
        assert!(dist < 1e-10, "{dist}");

        // Upper side through the transpose pattern.
        let mut upper = DenseTile::zeros(n);
        for r in 0..n {
            for c in 0..n {
                upper.set(c, r, dense.at(r, c));
            }
        }
        let m = partition(&upper, 8).unwrap();
        let inv = triangular_invert(&m, TriangularSide::Upper, &exec()).unwrap();
        let mut oracle_t = DenseTile::zeros(n);
        for r in 0..n {
            for c in 0..n {
                oracle_t.set(c, r, oracle.at(r, c));
            }
        }
        let dist = densify(&inv).rel_distance(&oracle_t);
        assert!(dist < 1e-10, "{dist}");
    }
}
