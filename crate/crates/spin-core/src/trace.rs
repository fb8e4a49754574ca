//! Per-level instrumentation collected while an inversion recursion runs.

use crate::executor::{StageKind, StageReport};

/// Stage reports grouped by recursion level, plus leaf-operation counters
/// for the operation census.
#[derive(Debug, Clone)]
pub struct InversionTrace {
    /// Recursion depth `m = log2(b)`; leaves live at level `m`.
    pub depth: usize,
    /// One entry per level `0..=depth`.
    pub levels: Vec<LevelTrace>,
    /// Number of leaf nodes entered.
    pub leaf_nodes: usize,
    /// Cubic tile kernels executed inside leaf stages.
    pub leaf_ops: usize,
}

#[derive(Debug, Clone)]
pub struct LevelTrace {
    pub level: usize,
    /// Recursion nodes entered at this level.
    pub nodes: usize,
    pub reports: Vec<StageReport>,
}

impl InversionTrace {
    pub(crate) fn new(depth: usize) -> Self {
        Self {
            depth,
            levels: (0..=depth)
                .map(|level| LevelTrace {
                    level,
                    nodes: 0,
                    reports: Vec::new(),
                })
                .collect(),
            leaf_nodes: 0,
            leaf_ops: 0,
        }
    }

    pub(crate) fn enter_node(&mut self, level: usize) {
        self.levels[level].nodes += 1;
    }

    pub(crate) fn record(&mut self, level: usize, report: StageReport) {
        self.levels[level].reports.push(report);
    }

    pub(crate) fn record_leaf(&mut self, level: usize, report: StageReport, cubic_ops: usize) {
        self.leaf_nodes += 1;
        self.leaf_ops += cubic_ops;
        self.record(level, report);
    }

    /// Total stages of `kind` at one level.
    pub fn stage_count_at(&self, level: usize, kind: StageKind) -> usize {
        self.levels[level]
            .reports
            .iter()
            .filter(|r| r.stage == kind)
            .count()
    }

    pub fn stage_count(&self, kind: StageKind) -> usize {
        (0..self.levels.len())
            .map(|level| self.stage_count_at(level, kind))
            .sum()
    }

    /// Wall-clock milliseconds summed over every stage of `kind`.
    pub fn stage_millis(&self, kind: StageKind) -> f64 {
        // fold from +0.0: an empty `sum()` would yield -0.0.
        self.levels
            .iter()
            .flat_map(|l| &l.reports)
            .filter(|r| r.stage == kind)
            .map(|r| r.wall_millis)
            .fold(0.0, |acc, ms| acc + ms)
    }

    pub fn total_shuffle_bytes(&self) -> u64 {
        self.levels
            .iter()
            .flat_map(|l| &l.reports)
            .map(|r| r.shuffle_bytes)
            .sum()
    }

    pub fn nodes_at(&self, level: usize) -> usize {
        self.levels[level].nodes
    }
}
