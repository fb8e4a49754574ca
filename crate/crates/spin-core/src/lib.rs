//! Block-partitioned matrix inversion over a core-capped stage executor.
//!
//! The crate provides two block-recursive inversion schemes, a
//! Strassen-style recursion ([`spin::spin_invert`]) and an LU-based
//! baseline ([`lu::lu_invert`]), running on a shared block-matrix data
//! model whose structural operations execute as instrumented parallel
//! stages. An analytical cost model ([`cost`]) predicts wall-clock
//! behaviour as a function of matrix order, partition count and core
//! budget, reproducing the characteristic U-shaped runtime curve over
//! partition sizes.

pub mod block;
pub mod cost;
pub mod dense;
pub mod error;
pub mod executor;
pub mod io;
pub mod lu;
pub mod spin;
pub mod trace;

pub use block::{BlockMatrix, MatrixBlock, Quadrant, QuadrantSet, TaggedBlock};
pub use dense::DenseTile;
pub use error::{Error, Result};
pub use executor::{ExecConfig, Executor, StageKind, StageReport};
pub use trace::{InversionTrace, LevelTrace};
