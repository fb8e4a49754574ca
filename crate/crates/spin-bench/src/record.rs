//! Benchmark observations and the stable sweep CSV schema.

use spin_core::error::{Error, Result};
use spin_core::executor::StageKind;
use spin_core::trace::InversionTrace;

/// Column order is part of the tool's contract; do not reorder.
pub const SWEEP_HEADER: &str = "algorithm,n,block_size,b,cores,run_id,status,wall_ms,leaf_ms,breakmat_ms,xy_ms,multiply_ms,subtract_ms,scalarmul_ms,arrange_ms,additional_ms,shuffle_bytes,residual_inf";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Spin,
    Lu,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Spin => "spin",
            Algorithm::Lu => "lu",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin" => Ok(Algorithm::Spin),
            "lu" => Ok(Algorithm::Lu),
            other => Err(Error::InvalidParams(format!(
                "unknown algorithm {other:?} (expected spin|lu)"
            ))),
        }
    }
}

/// Stage kinds in sweep-column order (leaf..additional).
pub const STAGE_COLUMNS: [StageKind; 8] = [
    StageKind::LeafNode,
    StageKind::BreakMat,
    StageKind::Xy,
    StageKind::Multiply,
    StageKind::Subtract,
    StageKind::ScalarMul,
    StageKind::Arrange,
    StageKind::Additional,
];

/// One benchmark observation (or the median summary of a cell).
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub block_size: usize,
    pub b: usize,
    pub cores: usize,
    /// Repeat index, or "median" for the per-cell summary row.
    pub run_id: String,
    /// "ok", or "error: <message>" for recorded failures.
    pub status: String,
    pub wall_ms: f64,
    /// Per-stage milliseconds in `STAGE_COLUMNS` order.
    pub stage_ms: [f64; 8],
    pub shuffle_bytes: u64,
    pub residual_inf: f64,
}

impl BenchRecord {
    pub fn from_trace(
        algorithm: Algorithm,
        n: usize,
        block_size: usize,
        cores: usize,
        run_id: usize,
        wall_ms: f64,
        trace: &InversionTrace,
        residual_inf: f64,
    ) -> Self {
        let mut stage_ms = [0.0; 8];
        for (slot, kind) in stage_ms.iter_mut().zip(STAGE_COLUMNS) {
            *slot = trace.stage_millis(kind);
        }
        Self {
            algorithm,
            n,
            block_size,
            b: n / block_size,
            cores,
            run_id: run_id.to_string(),
            status: "ok".into(),
            wall_ms,
            stage_ms,
            shuffle_bytes: trace.total_shuffle_bytes(),
            residual_inf,
        }
    }

    pub fn failure(
        algorithm: Algorithm,
        n: usize,
        block_size: usize,
        cores: usize,
        run_id: usize,
        message: &str,
    ) -> Self {
        Self {
            algorithm,
            n,
            block_size,
            b: n / block_size,
            cores,
            run_id: run_id.to_string(),
            // Commas would break the row; keep the message clean.
            status: format!("error: {}", message.replace(',', ";")),
            wall_ms: 0.0,
            stage_ms: [0.0; 8],
            shuffle_bytes: 0,
            residual_inf: f64::NAN,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_csv_row(&self) -> String {
        let stage = self
            .stage_ms
            .iter()
            .map(|ms| format!("{ms:.3}"))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{},{},{},{},{},{},{},{:.3},{},{},{:?}",
            self.algorithm.as_str(),
            self.n,
            self.block_size,
            self.b,
            self.cores,
            self.run_id,
            self.status,
            self.wall_ms,
            stage,
            self.shuffle_bytes,
            self.residual_inf,
        )
    }

    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 18 {
            return Err(Error::Format(format!(
                "expected 18 sweep columns, got {}: {line:?}",
                cells.len()
            )));
        }
        let algorithm: Algorithm = cells[0].parse()?;
        let parse_usize = |idx: usize| -> Result<usize> {
            cells[idx]
                .parse()
                .map_err(|e| Error::Format(format!("column {idx}: {e}")))
        };
        let parse_f64 = |idx: usize| -> Result<f64> {
            cells[idx]
                .parse()
                .map_err(|e| Error::Format(format!("column {idx}: {e}")))
        };
        let mut stage_ms = [0.0; 8];
        for (offset, slot) in stage_ms.iter_mut().enumerate() {
            *slot = parse_f64(8 + offset)?;
        }
        Ok(Self {
            algorithm,
            n: parse_usize(1)?,
            block_size: parse_usize(2)?,
            b: parse_usize(3)?,
            cores: parse_usize(4)?,
            run_id: cells[5].to_string(),
            status: cells[6].to_string(),
            wall_ms: parse_f64(7)?,
            stage_ms,
            shuffle_bytes: parse_usize(16)? as u64,
            residual_inf: parse_f64(17)?,
        })
    }
}

/// Median over already-sorted-or-not samples; mean of the middle pair
/// for even counts.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let rec = BenchRecord {
            algorithm: Algorithm::Spin,
            n: 256,
            block_size: 32,
            b: 8,
            cores: 4,
            run_id: "1".into(),
            status: "ok".into(),
            wall_ms: 12.345,
            stage_ms: [1.0, 2.0, 3.5, 4.0, 0.5, 0.25, 0.125, 0.0],
            shuffle_bytes: 4096,
            residual_inf: 1.25e-9,
        };
        let row = rec.to_csv_row();
        assert_eq!(row.split(',').count(), SWEEP_HEADER.split(',').count());
        let back = BenchRecord::parse_csv_row(&row).unwrap();
        assert_eq!(back.n, 256);
        assert_eq!(back.b, 8);
        assert_eq!(back.run_id, "1");
        assert_eq!(back.residual_inf, 1.25e-9);
        assert_eq!(back.stage_ms[2], 3.5);
    }

    #[test]
    fn failure_rows_parse_too() {
        let rec = BenchRecord::failure(Algorithm::Lu, 64, 8, 2, 0, "singular tile, pivot 0");
        let row = rec.to_csv_row();
        let back = BenchRecord::parse_csv_row(&row).unwrap();
        assert!(!back.is_ok());
        assert!(back.residual_inf.is_nan());
    }

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }
}
