//! Sequential dense kernels on single tiles.
//!
//! Everything a single worker runs locally lives here: leaf inversion
//! (Gauss-Jordan with partial pivoting), the cubic triple-loop multiply,
//! elementwise subtract/scale, the max-row-sum norm, and the Doolittle
//! factor / triangular-inverse kernels used by the LU baseline's leaves.
//! Tiles are column-major and immutable once built; every kernel returns
//! a fresh tile so stage bodies stay pure.

use crate::error::{Error, Result};

/// Relative pivot tolerance: a pivot below `SINGULARITY_RTOL * ||a||_inf`
/// aborts elimination with [`Error::SingularTile`].
pub const SINGULARITY_RTOL: f64 = 1e-12;

/// One dense square tile, `dim x dim` doubles in column-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTile {
    dim: usize,
    data: Vec<f64>,
}

impl DenseTile {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("tile dim must be >= 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: dim * dim,
                context: "tile data length",
            });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t.data[i * dim + i] = 1.0;
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.dim + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.dim + row] = value;
    }

    fn check_same_dim(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
                context,
            });
        }
        Ok(())
    }

    /// Max absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.dim {
            let mut sum = 0.0;
            for c in 0..self.dim {
                sum += self.at(r, c).abs();
            }
            worst = worst.max(sum);
        }
        worst
    }

    /// Leaf inversion: Gauss-Jordan elimination with partial pivoting.
    ///
    /// The row operations are applied column by column (each elimination
    /// matrix acts independently on every column), which keeps the inner
    /// loops on contiguous column slices in this layout. The arithmetic
    /// per element is the textbook sequence: scale by the pivot, then
    /// subtract the multiplier times the pivot row.
    ///
    /// Fails with `SingularTile` when the best remaining pivot drops below
    /// `SINGULARITY_RTOL * ||self||_inf`.
    pub fn invert(&self) -> Result<DenseTile> {
        let d = self.dim;
        let tol = SINGULARITY_RTOL * self.inf_norm();
        let mut work = self.clone();
        let mut inv = DenseTile::identity(d);
        let mut multipliers = vec![0.0_f64; d];
        for k in 0..d {
            // Partial pivot: largest magnitude in column k at or below row k.
            let col_k = &work.data[k * d..(k + 1) * d];
            let mut pivot_row = k;
            let mut best = col_k[k].abs();
            for (r, v) in col_k.iter().enumerate().skip(k + 1) {
                if v.abs() > best {
                    best = v.abs();
                    pivot_row = r;
                }
            }
            if best <= tol {
                return Err(Error::SingularTile {
                    pivot: best,
                    tolerance: tol,
                });
            }
            if pivot_row != k {
                swap_rows(&mut work, k, pivot_row);
                swap_rows(&mut inv, k, pivot_row);
            }
            let pivot = work.at(k, k);
            multipliers.copy_from_slice(&work.data[k * d..(k + 1) * d]);
            multipliers[k] = 0.0;
            // Columns left of k in the work matrix are already unit columns
            // and stay untouched.
            for j in k..d {
                eliminate_column(&mut work.data[j * d..(j + 1) * d], k, pivot, &multipliers);
            }
            for j in 0..d {
                eliminate_column(&mut inv.data[j * d..(j + 1) * d], k, pivot, &multipliers);
            }
        }
        Ok(inv)
    }

    /// `self * rhs` with exact triple-loop semantics: each output element
    /// accumulates `a[i,k] * b[k,j]` in ascending `k`, so the result is
    /// bit-reproducible and independent of scheduling.
    pub fn gemm(&self, rhs: &DenseTile) -> Result<DenseTile> {
        self.check_same_dim(rhs, "gemm operands")?;
        let mut out = DenseTile::zeros(self.dim);
        self.gemm_into(rhs, &mut out)?;
        Ok(out)
    }

    /// `acc += self * rhs`, same summation order as [`DenseTile::gemm`].
    pub fn gemm_into(&self, rhs: &DenseTile, acc: &mut DenseTile) -> Result<()> {
        self.check_same_dim(rhs, "gemm operands")?;
        self.check_same_dim(acc, "gemm accumulator")?;
        gemm_acc_raw(&self.data, &rhs.data, &mut acc.data, self.dim);
        Ok(())
    }

    /// Elementwise `self - rhs`.
    pub fn sub(&self, rhs: &DenseTile) -> Result<DenseTile> {
        self.check_same_dim(rhs, "subtract operands")?;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseTile {
            dim: self.dim,
            data,
        })
    }

    /// Elementwise `s * self`.
    pub fn scale(&self, s: f64) -> DenseTile {
        DenseTile {
            dim: self.dim,
            data: self.data.iter().map(|v| s * v).collect(),
        }
    }

    /// Doolittle factorization without pivoting: `self = L * U` with unit
    /// lower-triangular `L`. The input class (SPD / diagonally dominant)
    /// guarantees the pivots; anything else may hit `SingularTile`.
    pub fn lu_factor(&self) -> Result<(DenseTile, DenseTile)> {
        let d = self.dim;
        let tol = SINGULARITY_RTOL * self.inf_norm();
        let mut lower = DenseTile::identity(d);
        let mut upper = DenseTile::zeros(d);
        for i in 0..d {
            for j in i..d {
                let mut sum = self.at(i, j);
                for k in 0..i {
                    sum -= lower.at(i, k) * upper.at(k, j);
                }
                upper.set(i, j, sum);
            }
            let pivot = upper.at(i, i);
            if pivot.abs() <= tol {
                return Err(Error::SingularTile {
                    pivot: pivot.abs(),
                    tolerance: tol,
                });
            }
            for j in i + 1..d {
                let mut sum = self.at(j, i);
                for k in 0..i {
                    sum -= lower.at(j, k) * upper.at(k, i);
                }
                lower.set(j, i, sum / pivot);
            }
        }
        Ok((lower, upper))
    }

    /// Inverse of a lower-triangular tile by forward substitution.
    pub fn invert_lower(&self) -> Result<DenseTile> {
        let d = self.dim;
        let tol = SINGULARITY_RTOL * self.inf_norm();
        let mut inv = DenseTile::zeros(d);
        for j in 0..d {
            for i in j..d {
                if i == j {
                    let pivot = self.at(i, i);
                    if pivot.abs() <= tol {
                        return Err(Error::SingularTile {
                            pivot: pivot.abs(),
                            tolerance: tol,
                        });
                    }
                    inv.set(i, j, 1.0 / pivot);
                } else {
                    let mut sum = 0.0;
                    for k in j..i {
                        sum += self.at(i, k) * inv.at(k, j);
                    }
                    inv.set(i, j, -sum / self.at(i, i));
                }
            }
        }
        Ok(inv)
    }

    /// Inverse of an upper-triangular tile by back substitution.
    pub fn invert_upper(&self) -> Result<DenseTile> {
        let d = self.dim;
        let tol = SINGULARITY_RTOL * self.inf_norm();
        let mut inv = DenseTile::zeros(d);
        for j in (0..d).rev() {
            for i in (0..=j).rev() {
                if i == j {
                    let pivot = self.at(i, i);
                    if pivot.abs() <= tol {
                        return Err(Error::SingularTile {
                            pivot: pivot.abs(),
                            tolerance: tol,
                        });
                    }
                    inv.set(i, j, 1.0 / pivot);
                } else {
                    let mut sum = 0.0;
                    for k in i + 1..=j {
                        sum += self.at(i, k) * inv.at(k, j);
                    }
                    inv.set(i, j, -sum / self.at(i, i));
                }
            }
        }
        Ok(inv)
    }

    /// Element half of the tile: quadrant `(qr, qc)` of the 2x2 split.
    /// Used by the LU baseline's leaf bundle; requires an even dim.
    pub fn half(&self, qr: usize, qc: usize) -> DenseTile {
        let h = self.dim / 2;
        let mut out = DenseTile::zeros(h);
        for c in 0..h {
            for r in 0..h {
                out.set(r, c, self.at(qr * h + r, qc * h + c));
            }
        }
        out
    }

    /// Writes `part` into quadrant `(qr, qc)` of the 2x2 element split.
    pub fn set_half(&mut self, qr: usize, qc: usize, part: &DenseTile) {
        let h = self.dim / 2;
        debug_assert_eq!(part.dim, h);
        for c in 0..h {
            for r in 0..h {
                self.set(qr * h + r, qc * h + c, part.at(r, c));
            }
        }
    }

    /// Largest relative elementwise distance to `other`, scaled by the
    /// larger inf-norm. Test helper shared across the crate.
    pub fn rel_distance(&self, other: &DenseTile) -> f64 {
        let scale = self.inf_norm().max(other.inf_norm()).max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for (a, b) in self.data.iter().zip(&other.data) {
            worst = worst.max((a - b).abs());
        }
        worst / scale
    }
}

fn swap_rows(t: &mut DenseTile, a: usize, b: usize) {
    for c in 0..t.dim {
        let va = t.at(a, c);
        let vb = t.at(b, c);
        t.set(a, c, vb);
        t.set(b, c, va);
    }
}

/// Core accumulate kernel on raw column-major buffers, `dim * dim` each:
/// `acc += lhs * rhs`. jki order; the inner loop walks one column of both
/// acc and lhs, keeping the accumulation per element in ascending k. No
/// zero-skipping: every product is added, exactly like the reference
/// triple loop.
pub(crate) fn gemm_acc_raw(lhs: &[f64], rhs: &[f64], acc: &mut [f64], dim: usize) {
    debug_assert_eq!(lhs.len(), dim * dim);
    debug_assert_eq!(rhs.len(), dim * dim);
    debug_assert_eq!(acc.len(), dim * dim);
    for j in 0..dim {
        let acc_col = &mut acc[j * dim..(j + 1) * dim];
        for k in 0..dim {
            let bkj = rhs[j * dim + k];
            let a_col = &lhs[k * dim..(k + 1) * dim];
            for i in 0..dim {
                acc_col[i] += a_col[i] * bkj;
            }
        }
    }
}

/// One Gauss-Jordan elimination step on a single column: scale the pivot
/// entry, subtract multiplier * pivot-row value from every other row.
#[inline]
fn eliminate_column(col: &mut [f64], k: usize, pivot: f64, multipliers: &[f64]) {
    let scaled = col[k] / pivot;
    if scaled != 0.0 {
        for (c, m) in col.iter_mut().zip(multipliers) {
            *c -= m * scaled;
        }
    }
    col[k] = scaled;
}
