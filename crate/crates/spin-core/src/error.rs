use thiserror::Error;

/// Errors shared by the dense kernels, the block-matrix layer and the drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A pivot fell below the singularity tolerance during elimination.
    #[error("singular tile: pivot magnitude {pivot:.3e} below tolerance {tolerance:.3e}")]
    SingularTile { pivot: f64, tolerance: f64 },

    #[error("dimension mismatch: {left} vs {right} in {context}")]
    DimensionMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    /// break_mat needs an even block grid.
    #[error("odd block grid: {grid} cannot be split into quadrants")]
    OddGrid { grid: usize },

    #[error("bad block size: {block_size} does not evenly tile a matrix of order {n}")]
    BadBlockSize { n: usize, block_size: usize },

    /// The inversion schemes only accept power-of-two orders and grids.
    #[error("{what} must be a power of two, got {value}")]
    NonPowerOfTwo { what: &'static str, value: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("matrix file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn is_pow2(v: usize) -> bool {
    v != 0 && v & (v - 1) == 0
}
