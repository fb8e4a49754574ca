//! Inversion runs, partition-size sweeps, model comparison, scalability.

use std::path::Path;
use std::time::Instant;

use spin_core::block::{densify, multiply, partition, BlockMatrix};
use spin_core::cost::{spin_cost_levelsum, CostParams};
use spin_core::error::{Error, Result};
use spin_core::executor::Executor;
use spin_core::lu::lu_invert;
use spin_core::spin::spin_invert;
use spin_core::trace::InversionTrace;

use crate::gen::{generate_dense, MatrixKind};
use crate::record::{median, Algorithm, BenchRecord, SWEEP_HEADER};

/// Header of the model-comparison CSV.
pub const COMPARE_HEADER: &str = "b,measured_ms,predicted_units,predicted_ms,ratio,measured_argmin_b,predicted_argmin_b,argmin_within_one_step";

/// Header of the scalability CSV.
pub const SCALE_HEADER: &str = "cores,wall_ms,ideal_ms,efficiency";

/// Seed used when a command generates its own input matrix.
pub const DEFAULT_SWEEP_SEED: u64 = 42;

pub fn invert_with(
    algorithm: Algorithm,
    matrix: &BlockMatrix,
    exec: &Executor,
) -> Result<(BlockMatrix, InversionTrace)> {
    match algorithm {
        Algorithm::Spin => spin_invert(matrix, exec),
        Algorithm::Lu => lu_invert(matrix, exec),
    }
}

/// `||a * c - I||_inf`, computed blockwise then reduced densely.
pub fn residual_inf_norm(a: &BlockMatrix, c: &BlockMatrix, exec: &Executor) -> Result<f64> {
    let (product, _) = multiply(a, c, exec)?;
    let mut dense = densify(&product);
    for i in 0..dense.dim() {
        dense.set(i, i, dense.at(i, i) - 1.0);
    }
    Ok(dense.inf_norm())
}

/// One timed inversion: wall clock covers the full driver run; the
/// residual check happens outside the timed window.
pub fn run_invert(
    algorithm: Algorithm,
    matrix: &BlockMatrix,
    exec: &Executor,
    run_id: usize,
) -> Result<(BlockMatrix, BenchRecord)> {
    let started = Instant::now();
    let (inverse, trace) = invert_with(algorithm, matrix, exec)?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let residual = residual_inf_norm(matrix, &inverse, exec)?;
    let record = BenchRecord::from_trace(
        algorithm,
        matrix.n(),
        matrix.block_size(),
        exec.cores(),
        run_id,
        wall_ms,
        &trace,
        residual,
    );
    Ok((inverse, record))
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n: usize,
    pub algorithms: Vec<Algorithm>,
    pub b_values: Vec<usize>,
    pub cores: usize,
    pub repeats: usize,
    pub seed: u64,
    pub kind: MatrixKind,
}

/// Runs every (algorithm, b, repeat) cell over one shared generated
/// matrix and appends a median summary row per cell. Failed cells are
/// recorded with an error status and the sweep continues.
pub fn sweep(cfg: &SweepConfig, exec: &Executor) -> Result<Vec<BenchRecord>> {
    if cfg.repeats == 0 {
        return Err(Error::InvalidParams("repeats must be >= 1".into()));
    }
    let dense = generate_dense(cfg.n, cfg.seed, cfg.kind)?;
    let mut rows = Vec::new();
    for &algorithm in &cfg.algorithms {
        for &b in &cfg.b_values {
            if b == 0 || cfg.n % b != 0 {
                return Err(Error::InvalidParams(format!(
                    "b={b} does not divide n={}",
                    cfg.n
                )));
            }
            let block_size = cfg.n / b;
            let matrix = partition(&dense, block_size)?;
            let mut cell: Vec<BenchRecord> = Vec::with_capacity(cfg.repeats);
            for repeat in 0..cfg.repeats {
                match run_invert(algorithm, &matrix, exec, repeat) {
                    Ok((_, record)) => cell.push(record),
                    Err(err) => cell.push(BenchRecord::failure(
                        algorithm,
                        cfg.n,
                        block_size,
                        exec.cores(),
                        repeat,
                        &err.to_string(),
                    )),
                }
            }
            let summary = summarize_cell(&cell);
            rows.extend(cell);
            rows.push(summary);
        }
    }
    Ok(rows)
}

fn summarize_cell(cell: &[BenchRecord]) -> BenchRecord {
    let ok: Vec<&BenchRecord> = cell.iter().filter(|r| r.is_ok()).collect();
    let template = &cell[0];
    if ok.is_empty() {
        let mut failed = template.clone();
        failed.run_id = "median".into();
        return failed;
    }
    let mut stage_ms = [0.0; 8];
    for (idx, slot) in stage_ms.iter_mut().enumerate() {
        let samples: Vec<f64> = ok.iter().map(|r| r.stage_ms[idx]).collect();
        *slot = median(&samples);
    }
    let walls: Vec<f64> = ok.iter().map(|r| r.wall_ms).collect();
    let residuals: Vec<f64> = ok.iter().map(|r| r.residual_inf).collect();
    BenchRecord {
        algorithm: template.algorithm,
        n: template.n,
        block_size: template.block_size,
        b: template.b,
        cores: template.cores,
        run_id: "median".into(),
        status: "ok".into(),
        wall_ms: median(&walls),
        stage_ms,
        shuffle_bytes: ok[0].shuffle_bytes,
        residual_inf: median(&residuals),
    }
}

pub fn write_sweep_csv(rows: &[BenchRecord], path: &Path) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 128);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_row());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    let content = std::fs::read_to_string(path)?;
    let mut lines = content.lines();
    match lines.next() {
        Some(header) if header == SWEEP_HEADER => {}
        Some(other) => return Err(Error::Format(format!("unexpected sweep header: {other:?}"))),
        None => return Err(Error::Format("empty sweep file".into())),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(BenchRecord::parse_csv_row)
        .collect()
}

/// One row of the model-vs-measurement comparison.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub b: usize,
    pub measured_ms: f64,
    pub predicted_units: f64,
    pub predicted_ms: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct CompareResult {
    pub rows: Vec<CompareRow>,
    pub measured_argmin_b: usize,
    pub predicted_argmin_b: usize,
    pub argmin_within_one_step: bool,
    /// Least-squares milliseconds-per-model-unit constant.
    pub calibration: f64,
}

/// Joins the sweep's median rows for the Strassen scheme with level-sum
/// predictions at the given parameters, fitting the single unit constant
/// by least squares through the origin.
pub fn compare_model(records: &[BenchRecord], n: usize, cores: usize) -> Result<CompareResult> {
    let mut medians: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.algorithm == Algorithm::Spin && r.run_id == "median" && r.is_ok() && r.n == n)
        .map(|r| (r.b, r.wall_ms))
        .collect();
    medians.sort_by_key(|(b, _)| *b);
    medians.dedup_by_key(|(b, _)| *b);
    if medians.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "insufficient data: need medians for at least 3 partition sizes, found {}",
            medians.len()
        )));
    }

    let predictions: Vec<(usize, f64)> = medians
        .iter()
        .map(|(b, _)| {
            let params = CostParams::new(n, *b, cores)?;
            Ok((*b, spin_cost_levelsum(&params).total))
        })
        .collect::<Result<_>>()?;

    let dot: f64 = medians
        .iter()
        .zip(&predictions)
        .map(|((_, m), (_, p))| m * p)
        .sum();
    let norm: f64 = predictions.iter().map(|(_, p)| p * p).sum();
    let calibration = dot / norm;

    let rows: Vec<CompareRow> = medians
        .iter()
        .zip(&predictions)
        .map(|((b, measured), (_, units))| {
            let predicted_ms = calibration * units;
            CompareRow {
                b: *b,
                measured_ms: *measured,
                predicted_units: *units,
                predicted_ms,
                ratio: measured / predicted_ms,
            }
        })
        .collect();

    let argmin = |pairs: &[(usize, f64)]| -> usize {
        pairs
            .iter()
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
            .expect("nonempty")
            .0
    };
    let measured_argmin_b = argmin(&medians);
    let predicted_argmin_b = argmin(&predictions);
    let grid: Vec<usize> = medians.iter().map(|(b, _)| *b).collect();
    let step_of = |b: usize| grid.iter().position(|g| *g == b).expect("argmin in grid");
    let argmin_within_one_step =
        step_of(measured_argmin_b).abs_diff(step_of(predicted_argmin_b)) <= 1;

    Ok(CompareResult {
        rows,
        measured_argmin_b,
        predicted_argmin_b,
        argmin_within_one_step,
        calibration,
    })
}

pub fn write_compare_csv(result: &CompareResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(COMPARE_HEADER);
    out.push('\n');
    for row in &result.rows {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{:.6},{},{},{}\n",
            row.b,
            row.measured_ms,
            row.predicted_units,
            row.predicted_ms,
            row.ratio,
            result.measured_argmin_b,
            result.predicted_argmin_b,
            result.argmin_within_one_step,
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ScaleRow {
    pub cores: usize,
    pub wall_ms: f64,
    pub ideal_ms: f64,
    pub efficiency: f64,
}

/// Runs the inversion at each core count; the ideal line is
/// `wall(min cores) * min_cores / cores`.
pub fn scalability(
    algorithm: Algorithm,
    matrix: &BlockMatrix,
    cores_list: &[usize],
) -> Result<Vec<ScaleRow>> {
    if cores_list.is_empty() {
        return Err(Error::InvalidParams("empty cores list".into()));
    }
    let mut measured = Vec::with_capacity(cores_list.len());
    for &cores in cores_list {
        let exec = Executor::new(spin_core::executor::ExecConfig::new(cores)?);
        let started = Instant::now();
        invert_with(algorithm, matrix, &exec)?;
        measured.push((cores, started.elapsed().as_secs_f64() * 1e3));
    }
    let (base_cores, base_wall) = measured
        .iter()
        .copied()
        .min_by_key(|(cores, _)| *cores)
        .expect("nonempty");
    Ok(measured
        .into_iter()
        .map(|(cores, wall_ms)| {
            let ideal_ms = base_wall * base_cores as f64 / cores as f64;
            ScaleRow {
                cores,
                wall_ms,
                ideal_ms,
                efficiency: ideal_ms / wall_ms,
            }
        })
        .collect())
}

pub fn write_scale_csv(rows: &[ScaleRow], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(SCALE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.4}\n",
            row.cores, row.wall_ms, row.ideal_ms, row.efficiency
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}
