//! Standard-form second-order-cone programs shared by every algorithm in the
//! crate, plus the solver contract. A program is a list of affine blocks
//! `A x + b ∈ K` with `K` a zero, nonnegative, or second-order cone, a linear
//! objective, and a variable map tying scalar indices back to the model's
//! beamformers, selection variables, and epigraph auxiliaries.

mod build;
mod solve;
#[cfg(test)]
mod tests;

pub use build::{
    build_fixed_support, build_group_norm, build_relaxed, build_relaxed_pinned, build_surrogate,
    complex_soc_rows,
};
pub use solve::solve;

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::model::{Beamformer, Selection, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConeKind {
    /// Every row equals zero.
    Zero,
    /// Every row is nonnegative.
    NonNegative,
    /// First row bounds the Euclidean norm of the remaining rows.
    SecondOrderCone,
}

/// One scalar row of an affine map: sum of `coefficients` against x plus
/// `constant`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineRow {
    pub coefficients: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineRow {
    pub fn constant(c: f64) -> Self {
        AffineRow {
            coefficients: Vec::new(),
            constant: c,
        }
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|&(i, c)| c * x[i])
            .sum::<f64>()
            + self.constant
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub label: String,
    pub rows: Vec<AffineRow>,
}

impl ConeBlock {
    /// How far the block sits outside its cone at x (0 = inside).
    pub fn violation_at(&self, x: &[f64]) -> f64 {
        match self.kind {
            ConeKind::Zero => self
                .rows
                .iter()
                .map(|r| r.value_at(x).abs())
                .fold(0.0, f64::max),
            ConeKind::NonNegative => self
                .rows
                .iter()
                .map(|r| (-r.value_at(x)).max(0.0))
                .fold(0.0, f64::max),
            ConeKind::SecondOrderCone => {
                let head = self.rows[0].value_at(x);
                let tail_sq: f64 = self.rows[1..]
                    .iter()
                    .map(|r| {
                        let v = r.value_at(x);
                        v * v
                    })
                    .sum();
                (tail_sq.sqrt() - head).max(0.0)
            }
        }
    }
}

/// Contiguous run of scalar variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VarSpan {
    pub start: usize,
    pub len: usize,
}

impl VarSpan {
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Where each model quantity lives inside the flat variable vector.
/// `beam[l][k]` spans the interleaved (re, im) pairs of v_lk; absent spans
/// mean the RRH is excluded and its vectors are identically zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarMap {
    pub num_vars: usize,
    pub beam: Vec<Vec<Option<VarSpan>>>,
    pub selection: Vec<Option<usize>>,
    /// Per-RRH auxiliary scalar: the transmit-power epigraph t_l, or the
    /// group-norm bound s_l in the group-norm program.
    pub aux: Vec<Option<usize>>,
    /// True when `aux` bounds the squared group norm, false when it bounds
    /// the norm itself.
    pub aux_is_squared: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeProgram {
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub blocks: Vec<ConeBlock>,
    pub var_map: VarMap,
}

impl ConeProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.blocks.iter().map(|b| b.rows.len()).sum()
    }

    pub fn objective_value_at(&self, x: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(c, v)| c * v)
            .sum::<f64>()
            + self.objective_constant
    }

    /// Worst constraint violation across all blocks at x.
    pub fn max_residual_at(&self, x: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.violation_at(x))
            .fold(0.0, f64::max)
    }

    /// Structural well-formedness: index bounds, finite data, SOC blocks
    /// nonempty, and a variable map whose spans tile the variable vector.
    pub fn validate(&self) -> Result<(), Error> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) || !self.objective_constant.is_finite() {
            return Err(Error::InvalidArgument("non-finite objective".into()));
        }
        for block in &self.blocks {
            if block.kind == ConeKind::SecondOrderCone && block.rows.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "SOC block {} is empty",
                    block.label
                )));
            }
            for row in &block.rows {
                if !row.constant.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "non-finite constant in block {}",
                        block.label
                    )));
                }
                for &(idx, coef) in &row.coefficients {
                    if idx >= n {
                        return Err(Error::InvalidArgument(format!(
                            "block {} references variable {idx} of {n}",
                            block.label
                        )));
                    }
                    if !coef.is_finite() {
                        return Err(Error::InvalidArgument(format!(
                            "non-finite coefficient in block {}",
                            block.label
                        )));
                    }
                }
            }
        }
        let map = &self.var_map;
        if map.num_vars != n {
            return Err(Error::InvalidArgument(format!(
                "var_map covers {} variables, program has {n}",
                map.num_vars
            )));
        }
        let mut seen = vec![false; n];
        let mut claim = |start: usize, len: usize| -> Result<(), Error> {
            for i in start..start + len {
                if i >= seen.len() || seen[i] {
                    return Err(Error::InvalidArgument(
                        "var_map spans overlap or exceed the variable count".into(),
                    ));
                }
                seen[i] = true;
            }
            Ok(())
        };
        for per_rrh in &map.beam {
            for span in per_rrh.iter().flatten() {
                claim(span.start, span.len)?;
            }
        }
        for idx in map.selection.iter().flatten() {
            claim(*idx, 1)?;
        }
        for idx in map.aux.iter().flatten() {
            claim(*idx, 1)?;
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidArgument(
                "var_map does not cover every variable".into(),
            ));
        }
        Ok(())
    }

    /// Decode a primal vector into model types. Selection entries are
    /// clamped onto [0,1] (interior-point iterates sit within solver
    /// tolerance of the box, not exactly on it). Programs without selection
    /// variables report the RRHs that own beam spans as a binary selection.
    pub fn decode(&self, cfg: &SystemConfig, x: &[f64]) -> (Selection, Beamformer) {
        let map = &self.var_map;
        let mut bf = Beamformer::zeros(cfg);
        for (l, per_rrh) in map.beam.iter().enumerate() {
            for (k, span) in per_rrh.iter().enumerate() {
                if let Some(span) = span {
                    let dst = bf.vector_mut(l, k);
                    for (j, c) in dst.iter_mut().enumerate() {
                        *c = Complex64::new(x[span.start + 2 * j], x[span.start + 2 * j + 1]);
                    }
                }
            }
        }
        let sel = if map.selection.iter().any(Option::is_some) {
            let z = map
                .selection
                .iter()
                .map(|idx| idx.map_or(0.0, |i| x[i].clamp(0.0, 1.0)))
                .collect();
            Selection::relaxed(z).expect("clamped values are inside the box")
        } else {
            let active: Vec<usize> = map
                .beam
                .iter()
                .enumerate()
                .filter(|(_, spans)| spans.iter().any(Option::is_some))
                .map(|(l, _)| l)
                .collect();
            Selection::from_active(cfg.num_rrhs, &active)
        };
        (sel, bf)
    }

    /// Inverse of [`decode`](Self::decode) for exact model points: place a
    /// (selection, beamformer) pair into a primal vector, with epigraph
    /// auxiliaries set tight. Beam entries without a span must be zero.
    pub fn embed_point(
        &self,
        cfg: &SystemConfig,
        sel: &Selection,
        bf: &Beamformer,
    ) -> Result<Vec<f64>, Error> {
        if sel.len() != cfg.num_rrhs || bf.num_rrhs() != cfg.num_rrhs {
            return Err(Error::DimensionMismatch(
                "selection/beamformer shape does not match config".into(),
            ));
        }
        let map = &self.var_map;
        let mut x = vec![0.0; self.num_vars()];
        for (l, per_rrh) in map.beam.iter().enumerate() {
            for (k, span) in per_rrh.iter().enumerate() {
                let v = bf.vector(l, k);
                match span {
                    Some(span) => {
                        for (j, c) in v.iter().enumerate() {
                            x[span.start + 2 * j] = c.re;
                            x[span.start + 2 * j + 1] = c.im;
                        }
                    }
                    None => {
                        if v.iter().any(|c| c.norm_sqr() > 0.0) {
                            return Err(Error::InvalidArgument(format!(
                                "beamformer is nonzero at excluded RRH {l}"
                            )));
                        }
                    }
                }
            }
        }
        for (l, idx) in map.selection.iter().enumerate() {
            if let Some(i) = idx {
                x[*i] = sel.values()[l];
            }
        }
        for (l, idx) in map.aux.iter().enumerate() {
            if let Some(i) = idx {
                let norm_sq = bf.rrh_norm_sq(l);
                x[*i] = if map.aux_is_squared {
                    norm_sq
                } else {
                    norm_sq.sqrt()
                };
            }
        }
        Ok(x)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("cone program serializes")
    }

    /// Debug dump for cross-checking against external solvers. The format is
    /// the JSON serialization of the program itself: objective, blocks (each
    /// row as sparse (index, coefficient) pairs plus a constant, semantics
    /// `A x + b ∈ K`), and the variable map.
    pub fn dump_json(&self, path: &Path) -> Result<(), Error> {
        let wrap = |source: std::io::Error| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut file = std::fs::File::create(path).map_err(wrap)?;
        file.write_all(self.to_json_string().as_bytes())
            .map_err(wrap)?;
        file.write_all(b"\n").map_err(wrap)
    }
}

/// Solver contract knobs. `feasibility_tol` bounds the primal residual the
/// wrapped solver may leave on a result reported Optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub feasibility_tol: f64,
    pub max_iterations: u32,
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            feasibility_tol: 1e-8,
            max_iterations: 200,
            verbose: false,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.feasibility_tol > 0.0) {
            return Err(Error::InvalidArgument("feasibility_tol must be > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
    NumericalError,
}

/// Outcome of one solve. `objective_value` and `max_primal_residual` are
/// recomputed from the program data (not trusted from the backend) and only
/// meaningful when the status is Optimal; `solve_time_ms` is wall time and
/// is the only non-deterministic field.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub max_primal_residual: f64,
    pub solve_time_ms: f64,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
