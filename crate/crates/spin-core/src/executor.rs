//! Core-capped task-parallel stage execution.
//!
//! One stage at a time, a pool of at most `cores` workers per stage,
//! pure task bodies, canonical output order. This stands in for the
//! cluster stages of the distributed design: "executors" and "nodes"
//! collapse into the single `cores` cap, and shuffle traffic is
//! accounted rather than transmitted. Workers live for one stage: the
//! per-stage setup cost is the local counterpart of the cluster's
//! per-stage task scheduling, and grows with stage count just as the
//! measured method overheads do.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::block::BlockMatrix;
use crate::error::{Error, Result};

/// Environment variable overriding the configured core cap.
pub const CORES_ENV: &str = "SPIN_CORES";

/// Executor configuration: parallelism cap plus an instrumentation switch.
#[derive(Debug, Clone, Copy)]
pub struct ExecConfig {
    pub cores: usize,
    pub instrument: bool,
}

impl ExecConfig {
    pub fn new(cores: usize) -> Result<Self> {
        if cores == 0 {
            return Err(Error::InvalidParams("cores must be >= 1".into()));
        }
        Ok(Self {
            cores,
            instrument: true,
        })
    }

    /// Like [`ExecConfig::new`] but honouring the `SPIN_CORES` override.
    pub fn from_env_or(cores: usize) -> Result<Self> {
        match std::env::var(CORES_ENV) {
            Ok(raw) => {
                let parsed: usize = raw.parse().map_err(|_| {
                    Error::InvalidParams(format!("{CORES_ENV} must be a positive integer: {raw}"))
                })?;
                Self::new(parsed)
            }
            Err(_) => Self::new(cores),
        }
    }
}

/// Stage labels; one per distributed method plus the LU baseline's
/// post-factorization multiply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageKind {
    LeafNode,
    BreakMat,
    Xy,
    Multiply,
    Subtract,
    ScalarMul,
    Arrange,
    Additional,
}

impl StageKind {
    pub const ALL: [StageKind; 8] = [
        StageKind::LeafNode,
        StageKind::BreakMat,
        StageKind::Xy,
        StageKind::Multiply,
        StageKind::Subtract,
        StageKind::ScalarMul,
        StageKind::Arrange,
        StageKind::Additional,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StageKind::LeafNode => "leafNode",
            StageKind::BreakMat => "breakMat",
            StageKind::Xy => "xy",
            StageKind::Multiply => "multiply",
            StageKind::Subtract => "subtract",
            StageKind::ScalarMul => "scalarMul",
            StageKind::Arrange => "arrange",
            StageKind::Additional => "additional",
        }
    }
}

/// Instrumentation record for one executed stage.
#[derive(Debug, Clone)]
pub struct StageReport {
    pub stage: StageKind,
    pub tasks: usize,
    pub wall_millis: f64,
    /// Bytes logically replicated across a grouping boundary; zero for
    /// narrow (map/filter) stages.
    pub shuffle_bytes: u64,
    /// Highest number of task bodies observed running at once.
    pub peak_concurrency: usize,
}

/// Runs stages under the configured core cap.
#[derive(Debug, Clone)]
pub struct Executor {
    cfg: ExecConfig,
}

impl Executor {
    pub fn new(cfg: ExecConfig) -> Self {
        Self { cfg }
    }

    pub fn cores(&self) -> usize {
        self.cfg.cores
    }

    pub fn config(&self) -> ExecConfig {
        self.cfg
    }

    /// Runs `body` over `tasks` with effective concurrency
    /// `min(tasks.len(), cores)`. Results come back in task order no
    /// matter how the workers interleave; on failure the error of the
    /// lowest-indexed failing task is returned after the stage drains.
    pub fn run_stage<T, R, F>(
        &self,
        stage: StageKind,
        tasks: &[T],
        shuffle_bytes: u64,
        body: F,
    ) -> Result<(Vec<R>, StageReport)>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync,
    {
        let started = Instant::now();
        let workers = self.cfg.cores.min(tasks.len().max(1));
        let (results, peak) = if workers <= 1 {
            let mut out = Vec::with_capacity(tasks.len());
            for task in tasks {
                out.push(body(task));
            }
            (out, usize::from(!tasks.is_empty()))
        } else {
            run_parallel(tasks, workers, &body)
        };

        let mut collected = Vec::with_capacity(results.len());
        let mut first_err = None;
        for res in results {
            match res {
                Ok(value) => collected.push(value),
                Err(err) => {
                    if first_err.is_none() {
                        first_err = Some(err);
                    }
                }
            }
        }
        if let Some(err) = first_err {
            return Err(err);
        }

        let wall_millis = if self.cfg.instrument {
            started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        let report = StageReport {
            stage,
            tasks: tasks.len(),
            wall_millis,
            shuffle_bytes,
            peak_concurrency: peak,
        };
        Ok((collected, report))
    }
}

/// Stage pool: `workers` threads pull task indices from a shared atomic
/// counter, stash `(index, result)` pairs locally, and the merge
/// re-sorts by index so output order is canonical regardless of
/// interleaving.
fn run_parallel<T, R, F>(tasks: &[T], workers: usize, body: &F) -> (Vec<Result<R>>, usize)
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    let next = AtomicUsize::new(0);
    let running = AtomicUsize::new(0);
    let peak = AtomicUsize::new(0);
    let merged: Mutex<Vec<(usize, Result<R>)>> = Mutex::new(Vec::with_capacity(tasks.len()));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut local = Vec::new();
                loop {
                    let idx = next.fetch_add(1, Ordering::Relaxed);
                    if idx >= tasks.len() {
                        break;
                    }
                    let now = running.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    local.push((idx, body(&tasks[idx])));
                    running.fetch_sub(1, Ordering::SeqCst);
                }
                merged.lock().unwrap().extend(local);
            });
        }
    });

    let mut pairs = merged.into_inner().unwrap();
    pairs.sort_by_key(|(idx, _)| *idx);
    let results = pairs.into_iter().map(|(_, res)| res).collect();
    (results, peak.into_inner())
}

/// Shuffle bytes for one cogroup multiply: every block of both operands
/// is replicated `b` times across the grouping boundary, 8 bytes per
/// element, independent of the core count.
pub fn account_multiply_shuffle(a: &BlockMatrix, b: &BlockMatrix) -> u64 {
    debug_assert_eq!(a.grid(), b.grid());
    let grid = a.grid() as u64;
    let tile_elems = (a.block_size() * a.block_size()) as u64;
    8 * 2 * grid * grid * grid * tile_elems
}
