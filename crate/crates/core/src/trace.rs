use serde::{Deserialize, Serialize};

use crate::solver::Variant;

/// One row per sweep.
///
/// `alpha` is the refinement factor that produced the search point sweep `k`
/// started from. It is absent for plain coordinate descent and for the first
/// sweep, which always starts from zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub f: f64,
    pub alpha: Option<f64>,
    pub step_norm: f64,
    pub sparsity: f64,
}

/// Run-level metadata written as a header line by the trace writers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub variant: Variant,
    pub lambda: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub meta: Option<TraceMeta>,
    pub rows: Vec<TraceRow>,
}

impl IterationTrace {
    pub fn new(meta: Option<TraceMeta>) -> Self {
        IterationTrace {
            meta,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.f)
    }

    /// Refinement factors in the order they were computed (the first one is
    /// stored on row 2). Rows without a factor count as 1, which is what plain
    /// coordinate descent amounts to.
    pub fn refinement_factors(&self) -> Vec<f64> {
        self.rows
            .iter()
            .skip(1)
            .map(|r| r.alpha.unwrap_or(1.0))
            .collect()
    }
}
