//! Deterministic test-matrix generation.
//!
//! One ChaCha8 stream per seed fills the base matrix in column-major
//! order, so a given spec always produces byte-identical files. The
//! default `spd` kind builds `M^T M + n I`, symmetric positive definite
//! by construction with smallest eigenvalue at least `n`, which keeps
//! every pivot the unpivoted recursions encounter safely nonsingular.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spin_core::block::{multiply, partition, BlockMatrix};
use spin_core::dense::DenseTile;
use spin_core::error::{Error, Result};
use spin_core::executor::{ExecConfig, Executor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// `M^T M + n I`: guaranteed invertible without pivoting.
    Spd,
    /// Uniform noise with the diagonal raised above each row sum.
    DiagonallyDominant,
    /// Raw uniform noise in [-1, 1); may legitimately fail to invert.
    Uniform,
}

impl MatrixKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::Spd => "spd",
            MatrixKind::DiagonallyDominant => "dd",
            MatrixKind::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for MatrixKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spd" => Ok(MatrixKind::Spd),
            "dd" => Ok(MatrixKind::DiagonallyDominant),
            "uniform" => Ok(MatrixKind::Uniform),
            other => Err(Error::InvalidParams(format!(
                "unknown matrix kind {other:?} (expected spd|dd|uniform)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GenSpec {
    pub n: usize,
    pub block_size: usize,
    pub seed: u64,
    pub kind: MatrixKind,
}

/// Generates the matrix for `spec`. Deterministic in the seed; the core
/// count never changes the values.
pub fn generate(spec: &GenSpec) -> Result<BlockMatrix> {
    let dense = generate_dense(spec.n, spec.seed, spec.kind)?;
    partition(&dense, spec.block_size)
}

pub fn generate_dense(n: usize, seed: u64, kind: MatrixKind) -> Result<DenseTile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut base = DenseTile::zeros(n);
    for c in 0..n {
        for r in 0..n {
            base.set(r, c, rng.gen_range(-1.0..1.0));
        }
    }
    match kind {
        MatrixKind::Uniform => Ok(base),
        MatrixKind::DiagonallyDominant => {
            let mut out = base;
            for i in 0..n {
                let row_sum: f64 = (0..n).map(|c| out.at(i, c).abs()).sum();
                out.set(i, i, out.at(i, i) + row_sum + 1.0);
            }
            Ok(out)
        }
        MatrixKind::Spd => {
            let mut transposed = DenseTile::zeros(n);
            for r in 0..n {
                for c in 0..n {
                    transposed.set(c, r, base.at(r, c));
                }
            }
            // The blocked product reduces in ascending k, so it is
            // bit-identical to the dense triple loop at any core count.
            let gram = gram_product(&transposed, &base)?;
            let mut out = gram;
            for i in 0..n {
                out.set(i, i, out.at(i, i) + n as f64);
            }
            Ok(out)
        }
    }
}

fn gram_product(lhs: &DenseTile, rhs: &DenseTile) -> Result<DenseTile> {
    let n = lhs.dim();
    if n <= 128 {
        return lhs.gemm(rhs);
    }
    let cores = std::thread::available_parallelism()
        .map(|c| c.get())
        .unwrap_or(1);
    let exec = Executor::new(ExecConfig::new(cores)?);
    let bs = 128;
    let (product, _) = multiply(&partition(lhs, bs)?, &partition(rhs, bs)?, &exec)?;
    Ok(spin_core::block::densify(&product))
}
