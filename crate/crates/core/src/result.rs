//! Result types shared by every selection algorithm.

use serde::Serialize;

use crate::model::{Beamformer, Selection, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoStatus {
    /// Terminated by its own convergence test.
    Converged,
    /// Hit the outer iteration / node budget; the returned solution is still
    /// feasible.
    OuterLimit,
    /// The instance cannot be served at the configured targets.
    Infeasible,
}

impl AlgoStatus {
    pub fn is_feasible(self) -> bool {
        !matches!(self, AlgoStatus::Infeasible)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AlgoStatus::Converged => "converged",
            AlgoStatus::OuterLimit => "outer_limit",
            AlgoStatus::Infeasible => "infeasible",
        }
    }
}

/// One outer iteration of the dual ascent, as plotted in convergence traces.
/// `tol1`/`tol2` are base-10 logs of the selection / beamformer iterate
/// differences, floored at 1e-16 so exact repeats stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: usize,
    pub lambda: f64,
    pub residual: f64,
    pub tol1: f64,
    pub tol2: f64,
    pub lagrangian: f64,
}

/// Outcome of one algorithm on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoResult {
    /// Active RRH indices, ascending.
    pub active_set: Vec<usize>,
    pub z_final: Selection,
    pub v_final: Beamformer,
    /// Network power of the returned solution, watts; NaN when infeasible.
    pub power_w: f64,
    /// Outer dual iterations (dual ascent) or expanded nodes (tree search);
    /// zero for single-shot baselines.
    pub outer_iterations: usize,
    /// Total cone-program solves spent, including post-processing.
    pub inner_solves: usize,
    pub status: AlgoStatus,
    /// Per-outer-iteration records; empty for algorithms without a dual loop.
    pub trace: Vec<TraceRow>,
}

impl AlgoResult {
    pub fn infeasible(cfg: &SystemConfig, inner_solves: usize) -> Self {
        AlgoResult {
            active_set: Vec::new(),
            z_final: Selection::all_off(cfg.num_rrhs),
            v_final: Beamformer::zeros(cfg),
            power_w: f64::NAN,
            outer_iterations: 0,
            inner_solves,
            status: AlgoStatus::Infeasible,
            trace: Vec::new(),
        }
    }
}
