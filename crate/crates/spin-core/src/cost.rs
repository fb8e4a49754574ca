//! Analytical wall-clock cost model.
//!
//! The authoritative predictor is the per-level summation: every
//! recursion level contributes `nodes x per-node cost / parallelization
//! factor`, where the parallelization factor is `min(tasks at that
//! level, cores)`. Computation terms are flop-like unit counts;
//! communication terms count the bytes a cogroup multiply would
//! replicate (the same accounting the executor reports), added linearly.
//!
//! The closed forms keep a free level index `i` inside their `min`
//! expressions, which a summed-out formula cannot legally contain; they
//! are provided verbatim for comparison plotting, with `i` as an explicit
//! argument. Known quirks of the printed closed forms (a filter
//! polynomial inconsistent with its own derivation, communication
//! polynomials that go negative for small `b`) are documented at the
//! relevant functions; the level-sum avoids them.

use crate::error::{is_pow2, Error, Result};

/// Model inputs. `n` is the matrix order, `b` the splits per side,
/// `cores` the parallelism cap; `m = log2(b)` levels of recursion.
#[derive(Debug, Clone, Copy)]
pub struct CostParams {
    pub n: usize,
    pub b: usize,
    pub cores: usize,
}

impl CostParams {
    pub fn new(n: usize, b: usize, cores: usize) -> Result<Self> {
        if !is_pow2(n) {
            return Err(Error::NonPowerOfTwo {
                what: "matrix order",
                value: n,
            });
        }
        if !is_pow2(b) || b > n {
            return Err(Error::InvalidParams(format!(
                "splits b={b} must be a power of two no larger than n={n}"
            )));
        }
        if cores == 0 {
            return Err(Error::InvalidParams("cores must be >= 1".into()));
        }
        Ok(Self { n, b, cores })
    }

    /// Recursion depth `m = log2(b)`.
    pub fn levels(&self) -> usize {
        self.b.trailing_zeros() as usize
    }

    /// Block size `n / b` (`2^q`).
    pub fn block_size(&self) -> usize {
        self.n / self.b
    }
}

/// Per-method cost terms. `total` accumulates the parts in field order;
/// keeping that order fixed makes level-sum outputs bit-reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub leaf_node: f64,
    pub break_mat: f64,
    pub xy_filter: f64,
    pub xy_map: f64,
    pub multiply_large: f64,
    pub multiply_comm_large: f64,
    pub multiply_small: f64,
    pub multiply_comm_small: f64,
    pub subtract: f64,
    pub scalar_mul: f64,
    pub arrange: f64,
    pub additional_cost: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn finish(mut self) -> Self {
        self.total = self.leaf_node
            + self.break_mat
            + self.xy_filter
            + self.xy_map
            + self.multiply_large
            + self.multiply_comm_large
            + self.multiply_small
            + self.multiply_comm_small
            + self.subtract
            + self.scalar_mul
            + self.arrange
            + self.additional_cost;
        self
    }

    const fn zeroed() -> Self {
        Self {
            leaf_node: 0.0,
            break_mat: 0.0,
            xy_filter: 0.0,
            xy_map: 0.0,
            multiply_large: 0.0,
            multiply_comm_large: 0.0,
            multiply_small: 0.0,
            multiply_comm_small: 0.0,
            subtract: 0.0,
            scalar_mul: 0.0,
            arrange: 0.0,
            additional_cost: 0.0,
            total: 0.0,
        }
    }

    /// `(term, value)` pairs in canonical order, `total` last.
    pub fn terms(&self) -> [(&'static str, f64); 13] {
        [
            ("leafNode", self.leaf_node),
            ("breakMat", self.break_mat),
            ("xyFilter", self.xy_filter),
            ("xyMap", self.xy_map),
            ("multiplyLarge", self.multiply_large),
            ("multiplyCommLarge", self.multiply_comm_large),
            ("multiplySmall", self.multiply_small),
            ("multiplyCommSmall", self.multiply_comm_small),
            ("subtract", self.subtract),
            ("scalarMul", self.scalar_mul),
            ("arrange", self.arrange),
            ("additionalCost", self.additional_cost),
            ("total", self.total),
        ]
    }
}

/// Parallelization factor `min(tasks, cores)`, clamped at 1: the printed
/// per-level denominators can fall below one task at the deepest level,
/// and nothing runs slower than serial.
fn pf(tasks: f64, cores: usize) -> f64 {
    tasks.min(cores as f64).max(1.0)
}

/// Level-summed cost of the Strassen scheme.
///
/// Per internal level `i` (with `2^i` nodes, node grid `b/2^i`, tile side
/// `n/b`): one break over the node's blocks, four filter scans, four
/// quadrant maps, the multiply work `n^3/8^(i+1)`, six cogroup
/// replication sets, one subtract pass `n^2/4^(i+1)`, one scalar map and
/// one arrange map over the half grid. Leaves run serially one block at
/// a time, so the leaf term `n^3/b^2` is not divided by a parallelization
/// factor.
pub fn spin_cost_levelsum(p: &CostParams) -> CostBreakdown {
    let n = p.n as f64;
    let b = p.b as f64;
    let tile = p.block_size() as f64;
    let mut out = CostBreakdown::zeroed();
    out.leaf_node = n.powi(3) / (b * b);
    for i in 0..p.levels() as i32 {
        let nodes = 2f64.powi(i);
        let blocks = b * b / 4f64.powi(i);
        let half_blocks = blocks / 4.0;
        let half_grid = b / 2f64.powi(i + 1);
        let elems_half = n * n / 4f64.powi(i + 1);

        out.break_mat += nodes * blocks / pf(blocks, p.cores);
        out.xy_filter += nodes * 4.0 * blocks / pf(blocks, p.cores);
        out.xy_map += nodes * 4.0 * half_blocks / pf(half_blocks, p.cores);
        out.multiply_large += nodes * n.powi(3) / 8f64.powi(i + 1) / pf(elems_half, p.cores);
        // Six half-grid cogroup multiplies: 8 bytes x 2 operands x g^3
        // block replicas x tile^2 elements each.
        out.multiply_comm_large +=
            nodes * 6.0 * 16.0 * half_grid.powi(3) * tile * tile / pf(half_blocks, p.cores);
        out.subtract += nodes * elems_half / pf(elems_half, p.cores);
        out.scalar_mul += nodes * half_blocks / pf(half_blocks, p.cores);
        out.arrange += nodes * half_blocks / pf(half_blocks, p.cores);
    }
    out.finish()
}

/// Level-summed cost of the LU baseline, same structure with the LU
/// column's per-node terms and `2^i - 1` nodes per level: nine cubic
/// leaf kernels per leaf, four full-grid and eight half-grid multiplies
/// per internal node, one subtract, two scalar maps, and the one-off
/// post-factorization cost of seven half-order multiplies.
pub fn lu_cost_levelsum(p: &CostParams) -> CostBreakdown {
    let n = p.n as f64;
    let b = p.b as f64;
    let tile = p.block_size() as f64;
    let mut out = CostBreakdown::zeroed();
    out.leaf_node = 9.0 * n.powi(3) / (b * b);
    for i in 0..p.levels() as i32 {
        let nodes = 2f64.powi(i) - 1.0;
        if nodes == 0.0 {
            continue;
        }
        let blocks = b * b / 4f64.powi(i);
        let half_blocks = blocks / 4.0;
        let quarter_blocks = blocks / 16.0;
        let full_grid = b / 2f64.powi(i);
        let half_grid = full_grid / 2.0;
        let elems_full = n * n / 4f64.powi(i);
        let elems_half = elems_full / 4.0;

        out.break_mat += nodes * blocks / pf(blocks, p.cores);
        out.xy_filter += nodes * blocks / pf(half_blocks, p.cores);
        out.xy_map += nodes * half_blocks / pf(quarter_blocks, p.cores);
        out.multiply_large += nodes * 4.0 * n.powi(3) / 8f64.powi(i) / pf(elems_full, p.cores);
        out.multiply_comm_large +=
            nodes * 4.0 * 16.0 * full_grid.powi(3) * tile * tile / pf(blocks, p.cores);
        out.multiply_small += nodes * n.powi(3) / 8f64.powi(i) / pf(elems_half, p.cores);
        out.multiply_comm_small +=
            nodes * 8.0 * 16.0 * half_grid.powi(3) * tile * tile / pf(half_blocks, p.cores);
        out.subtract += nodes * elems_full / pf(elems_full, p.cores);
        out.scalar_mul += nodes * 2.0 * blocks / pf(blocks, p.cores);
    }
    out.additional_cost = 7.0 * (n / 2.0).powi(3) / pf(n * n / 4.0, p.cores);
    out.finish()
}

/// Closed-form Strassen cost, evaluated verbatim with the caller's level
/// index `i` inside the `min` terms. The first term is `n^3/b^2`; the
/// grouped method polynomials follow the printed form (whose filter
/// constant differs from the level-sum's own accounting by `4b`).
/// Comparison plotting only; the level-sum is authoritative.
pub fn spin_cost_closed(p: &CostParams, i: u32) -> Result<f64> {
    if p.b < 2 {
        return Err(Error::InvalidParams(
            "closed form needs b >= 2 (one recursion level)".into(),
        ));
    }
    let n = p.n as f64;
    let b = p.b as f64;
    let i = i as i32;
    Ok(n.powi(3) / (b * b)
        + (10.0 * b * b - 6.0 * b) / pf(b * b / 4f64.powi(i), p.cores)
        + ((b - 1.0) + (9.0 * b * b + n * n * (b + 1.0)))
            / (b * pf(b * b / 4f64.powi(i + 1), p.cores))
        + n * n * (b * b * n + b * b - 2.0 * n) / (b * b * pf(n * n / 4f64.powi(i + 1), p.cores)))
}

/// Closed-form LU cost, evaluated verbatim with the caller's level index
/// `i`. Note the `(b^2 - 14)` factors: for `b <= 3` the printed
/// polynomial goes negative. Comparison plotting only.
pub fn lu_cost_closed(p: &CostParams, i: u32) -> Result<f64> {
    if p.b < 2 {
        return Err(Error::InvalidParams(
            "closed form needs b >= 2 (one recursion level)".into(),
        ));
    }
    let n = p.n as f64;
    let b = p.b as f64;
    let i = i as i32;
    Ok(9.0 * n.powi(3) / (b * b)
        + (b - 1.0) * (210.0 * b * b * (b - 2.0) + 64.0 * n * n * (b + 1.0) * (b * b - 14.0))
            / (105.0 * b * b * pf(b * b / 4f64.powi(i), p.cores))
        + (b - 1.0) * (70.0 * b * b * (b - 2.0) + 8.0 * n * n * (b + 1.0) * (b * b - 14.0))
            / (105.0 * b * b * pf(b * b / 4f64.powi(i + 1), p.cores))
        + (b - 1.0) * (b - 2.0) / (105.0 * b * b * pf(b * b / 4f64.powi(i + 2), p.cores))
        + 2.0 * n * n * (b - 1.0) * (8.0 * n * (b * b + b + 6.0) + 7.0 * b * (b - 2.0))
            / (21.0 * b.powi(3) * pf(n * n / 4f64.powi(i), p.cores))
        + 8.0 * n.powi(3) * (b - 1.0) * (b * b + b - 6.0)
            / (42.0 * b.powi(3) * pf(n * n / 4f64.powi(i + 1), p.cores))
        + 7.0 * n.powi(3) / (8.0 * pf(n * n / 4.0, p.cores)))
}

/// Predicted totals over a partition-size sweep, plus the argmin.
#[derive(Debug, Clone)]
pub struct UCurve {
    /// `(b, predicted total)` in the caller's order.
    pub points: Vec<(usize, f64)>,
    pub argmin_b: usize,
}

/// Evaluates the Strassen level-sum across ascending partition sizes.
pub fn predict_u_curve(n: usize, cores: usize, b_values: &[usize]) -> Result<UCurve> {
    if b_values.is_empty() {
        return Err(Error::InvalidParams("empty partition-size list".into()));
    }
    let mut points = Vec::with_capacity(b_values.len());
    for &b in b_values {
        let params = CostParams::new(n, b, cores)?;
        points.push((b, spin_cost_levelsum(&params).total));
    }
    let argmin_b = points
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite costs"))
        .expect("nonempty")
        .0;
    Ok(UCurve { points, argmin_b })
}

/// Count of strict local minima over the curve (plateau-free input).
pub fn local_minima(points: &[(usize, f64)]) -> usize {
    let vals: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mut count = 0;
    for i in 0..vals.len() {
        let left_ok = i == 0 || vals[i] < vals[i - 1];
        let right_ok = i == vals.len() - 1 || vals[i] < vals[i + 1];
        if left_ok && right_ok {
            count += 1;
        }
    }
    count
}
