//! Benchmark harness for the block-recursive inversion engine: input
//! generation, timed inversion runs, partition-size sweeps, analytical
//! model comparison and scalability measurements, all emitting
//! schema-stable CSV.

pub mod gen;
pub mod harness;
pub mod record;

pub use gen::{generate, generate_dense, GenSpec, MatrixKind};
pub use harness::{
    compare_model, residual_inf_norm, run_invert, scalability, sweep, CompareResult, ScaleRow,
    SweepConfig, COMPARE_HEADER, DEFAULT_SWEEP_SEED, SCALE_HEADER,
};
pub use record::{median, Algorithm, BenchRecord, SWEEP_HEADER};

/// Process exit codes: 0 success, 2 numerical failure, 3 I/O or format
/// failure, 4 bad arguments.
pub fn exit_code_for(err: &spin_core::Error) -> i32 {
    use spin_core::Error::*;
    match err {
        SingularTile { .. } => 2,
        Io(_) | Format(_) => 3,
        DimensionMismatch { .. }
        | OddGrid { .. }
        | BadBlockSize { .. }
        | NonPowerOfTwo { .. }
        | InvalidParams(_) => 4,
    }
}
