//! Exact and relaxed mixed-integer baselines: an exhaustive enumeration
//! oracle over all on/off patterns, a best-first branch-and-bound on the
//! selection vector, and the rounding heuristic that sorts the relaxed
//! selection and bisects. Enumeration is ground truth; branch-and-bound is
//! the scalable path and must agree with it.

use std::cmp;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::conic::{self, SolveStatus, SolverSettings};
use crate::error::Error;
use crate::gsbf;
use crate::model::{network_power, Channel, Selection, SystemConfig};
use crate::result::{AlgoResult, AlgoStatus};

/// Hard cap on exhaustive enumeration; 2^L cone programs get solved.
pub const ENUM_MAX_RRHS: usize = 16;

/// A subproblem of the tree search: RRHs pinned on, pinned off, the value of
/// its pinned box relaxation (a lower bound on every completion), and depth.
#[derive(Debug, Clone)]
pub struct BnBNode {
    pub fixed_on: Vec<usize>,
    pub fixed_off: Vec<usize>,
    pub lower_bound: f64,
    pub depth: usize,
}

impl BnBNode {
    fn pins(&self, num_rrhs: usize) -> Vec<Option<bool>> {
        let mut pins = vec![None; num_rrhs];
        for &l in &self.fixed_on {
            pins[l] = Some(true);
        }
        for &l in &self.fixed_off {
            pins[l] = Some(false);
        }
        pins
    }
}

#[derive(Debug, Clone)]
pub struct BnbSettings {
    /// Budget of expanded nodes before giving up and returning the incumbent.
    pub max_nodes: usize,
    /// A relaxed selection entry within this of 0 or 1 counts as integral.
    pub integrality_tol: f64,
    pub solver: SolverSettings,
}

impl Default for BnbSettings {
    fn default() -> Self {
        BnbSettings {
            max_nodes: 10_000,
            integrality_tol: 1e-6,
            solver: SolverSettings::default(),
        }
    }
}

/// Search diagnostics, mostly for auditing bound validity.
#[derive(Debug, Clone, Default)]
pub struct BnbStats {
    /// Nodes popped and processed (branched or fathomed integral), root
    /// included.
    pub nodes_expanded: usize,
    /// Lower bound of each expanded node, in expansion order.
    pub expanded_bounds: Vec<f64>,
    pub solver_calls: usize,
}

fn subset_from_mask(mask: usize, num_rrhs: usize) -> Vec<usize> {
    (0..num_rrhs).filter(|l| mask & (1 << l) != 0).collect()
}

/// Solve the fixed-support problem for every subset of RRHs and keep the
/// cheapest feasible one; ties go to the lexicographically smallest subset.
/// Ground truth for everything else in this crate, so no pruning.
pub fn enumerate_optimal(cfg: &SystemConfig, ch: &Channel) -> Result<AlgoResult, Error> {
    cfg.validate()?;
    if cfg.num_rrhs > ENUM_MAX_RRHS {
        return Err(Error::InvalidArgument(format!(
            "enumeration over {} RRHs would take 2^{} solves (cap {})",
            cfg.num_rrhs, cfg.num_rrhs, ENUM_MAX_RRHS
        )));
    }
    let solver = SolverSettings::default();
    let total = 1usize << cfg.num_rrhs;

    // Each subset is independent; the merge below is a total order, so the
    // winner does not depend on scheduling.
    let best = (0..total)
        .into_par_iter()
        .map(|mask| -> Result<Option<(f64, Vec<usize>, Vec<f64>)>, Error> {
            let subset = subset_from_mask(mask, cfg.num_rrhs);
            let program = conic::build_fixed_support(cfg, ch, &subset)?;
            let result = conic::solve(&program, &solver)?;
            match result.status {
                SolveStatus::Optimal => {
                    let (z, v) = program.decode(cfg, &result.x);
                    Ok(Some((network_power(cfg, &z, &v), subset, result.x)))
                }
                SolveStatus::Infeasible => Ok(None),
                status => Err(Error::SolverFailure(status)),
            }
        })
        .try_reduce(
            || None,
            |a, b| {
                Ok(match (a, b) {
                    (None, b) => b,
                    (a, None) => a,
                    (Some(a), Some(b)) => {
                        let keep_a = match a.0.total_cmp(&b.0) {
                            cmp::Ordering::Less => true,
                            cmp::Ordering::Greater => false,
                            cmp::Ordering::Equal => a.1 <= b.1,
                        };
                        Some(if keep_a { a } else { b })
                    }
                })
            },
        )?;

    match best {
        None => Ok(AlgoResult::infeasible(cfg, total)),
        Some((power_w, subset, x)) => {
            let program = conic::build_fixed_support(cfg, ch, &subset)?;
            let (z_final, v_final) = program.decode(cfg, &x);
            Ok(AlgoResult {
                active_set: subset,
                z_final,
                v_final,
                power_w,
                outer_iterations: 0,
                inner_solves: total,
                status: AlgoStatus::Converged,
                trace: Vec::new(),
            })
        }
    }
}

struct Relaxation {
    value: f64,
    z: Vec<f64>,
}

enum NodeRelaxation {
    Solved(Relaxation),
    Infeasible,
    /// The backend gave up (iteration limit or numerical trouble) without a
    /// certificate either way. Happens on nodes pinned right onto the
    /// feasibility boundary; the node can be neither bounded nor fathomed.
    Unknown,
}

/// Solve the pinned box relaxation of a node.
fn node_relaxation(
    cfg: &SystemConfig,
    ch: &Channel,
    pins: &[Option<bool>],
    solver: &SolverSettings,
    calls: &mut usize,
) -> Result<NodeRelaxation, Error> {
    let program = conic::build_relaxed_pinned(cfg, ch, pins)?;
    let result = conic::solve(&program, solver)?;
    *calls += 1;
    Ok(match result.status {
        SolveStatus::Optimal => {
            let (z, _) = program.decode(cfg, &result.x);
            NodeRelaxation::Solved(Relaxation {
                value: result.objective_value,
                z: z.values().to_vec(),
            })
        }
        SolveStatus::Infeasible => NodeRelaxation::Infeasible,
        SolveStatus::IterationLimit | SolveStatus::NumericalError => NodeRelaxation::Unknown,
    })
}

/// Stand-in selection for a node whose relaxation did not solve: pinned
/// coordinates at their pins, free ones at one half so every free coordinate
/// is maximally fractional and the node keeps branching in index order.
fn midpoint_selection(pins: &[Option<bool>]) -> Vec<f64> {
    pins.iter()
        .map(|p| match p {
            Some(true) => 1.0,
            Some(false) => 0.0,
            None => 0.5,
        })
        .collect()
}

/// Exact binary candidate for a node whose relaxation came out integral.
fn integral_candidate(
    cfg: &SystemConfig,
    ch: &Channel,
    support: &[usize],
    solver: &SolverSettings,
    calls: &mut usize,
) -> Result<Option<(f64, Selection, crate::model::Beamformer)>, Error> {
    let program = conic::build_fixed_support(cfg, ch, support)?;
    let result = conic::solve(&program, solver)?;
    *calls += 1;
    match result.status {
        SolveStatus::Optimal => {
            let (z, v) = program.decode(cfg, &result.x);
            let power = network_power(cfg, &z, &v);
            Ok(Some((power, z, v)))
        }
        // Rounding a borderline-integral relaxation can lose feasibility.
        SolveStatus::Infeasible => Ok(None),
        status => Err(Error::SolverFailure(status)),
    }
}

/// Heap entry ordered so the node with the smallest lower bound pops first,
/// with insertion order breaking ties deterministically.
struct OpenNode {
    node: BnBNode,
    z: Vec<f64>,
    seq: usize,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.node.lower_bound == other.node.lower_bound && self.seq == other.seq
    }
}
impl Eq for OpenNode {}
impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenNode {
    fn cmp(&self, other: &Self) -> cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap and we want the smallest bound.
        other
            .node
            .lower_bound
            .total_cmp(&self.node.lower_bound)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Best-first branch-and-bound, also returning search diagnostics.
pub fn branch_and_bound_traced(
    cfg: &SystemConfig,
    ch: &Channel,
    settings: &BnbSettings,
) -> Result<(AlgoResult, BnbStats), Error> {
    cfg.validate()?;
    settings.solver.validate()?;
    let num_rrhs = cfg.num_rrhs;
    let mut stats = BnbStats::default();

    let root_pins = vec![None; num_rrhs];
    let root = match node_relaxation(cfg, ch, &root_pins, &settings.solver, &mut stats.solver_calls)? {
        NodeRelaxation::Solved(rel) => rel,
        NodeRelaxation::Infeasible => {
            // Relaxation infeasible implies the binary problem is too.
            let mut out = AlgoResult::infeasible(cfg, stats.solver_calls);
            out.inner_solves = stats.solver_calls;
            return Ok((out, stats));
        }
        NodeRelaxation::Unknown => Relaxation {
            value: f64::NEG_INFINITY,
            z: midpoint_selection(&root_pins),
        },
    };

    let mut heap: BinaryHeap<OpenNode> = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(OpenNode {
        node: BnBNode {
            fixed_on: Vec::new(),
            fixed_off: Vec::new(),
            lower_bound: root.value,
            depth: 0,
        },
        z: root.z,
        seq,
    });

    let mut incumbent: Option<(f64, Selection, crate::model::Beamformer)> = None;
    let mut budget_exhausted = false;

    while let Some(open) = heap.pop() {
        if let Some((value, _, _)) = &incumbent {
            if open.node.lower_bound >= value - 1e-9 {
                continue;
            }
        }
        if stats.nodes_expanded >= settings.max_nodes {
            budget_exhausted = true;
            break;
        }
        stats.nodes_expanded += 1;
        stats.expanded_bounds.push(open.node.lower_bound);

        // Most fractional unpinned coordinate; lowest index on ties.
        let pins = open.node.pins(num_rrhs);
        let branch_var = (0..num_rrhs)
            .filter(|&l| pins[l].is_none())
            .filter(|&l| {
                let z = open.z[l];
                z.min(1.0 - z) > settings.integrality_tol
            })
            .max_by(|&a, &b| {
                let frac = |l: usize| {
                    let z: f64 = open.z[l];
                    z.min(1.0 - z)
                };
                frac(a).total_cmp(&frac(b)).then(b.cmp(&a))
            });

        let Some(branch_var) = branch_var else {
            // Integral relaxation: resolve its rounded support exactly and
            // fathom. The relaxation value lower-bounds the whole subtree,
            // so nothing below this node can beat the candidate.
            let support: Vec<usize> =
                (0..num_rrhs).filter(|&l| open.z[l] > 0.5).collect();
            if let Some((power, z, v)) =
                integral_candidate(cfg, ch, &support, &settings.solver, &mut stats.solver_calls)?
            {
                if incumbent.as_ref().map_or(true, |(best, _, _)| power < *best) {
                    incumbent = Some((power, z, v));
                }
            }
            continue;
        };

        for pin_on in [false, true] {
            let mut child = BnBNode {
                fixed_on: open.node.fixed_on.clone(),
                fixed_off: open.node.fixed_off.clone(),
                lower_bound: f64::NAN,
                depth: open.node.depth + 1,
            };
            if pin_on {
                child.fixed_on.push(branch_var);
            } else {
                child.fixed_off.push(branch_var);
            }
            let child_pins = child.pins(num_rrhs);
            let rel = match node_relaxation(
                cfg,
                ch,
                &child_pins,
                &settings.solver,
                &mut stats.solver_calls,
            )? {
                NodeRelaxation::Solved(rel) => rel,
                NodeRelaxation::Infeasible => continue,
                // No certificate, so neither fathom nor prune: inherit the
                // parent's bound (still valid for the subtree) and keep
                // splitting until the subproblems become solvable again.
                NodeRelaxation::Unknown => Relaxation {
                    value: open.node.lower_bound,
                    z: midpoint_selection(&child_pins),
                },
            };
            if let Some((value, _, _)) = &incumbent {
                if rel.value >= value - 1e-9 {
                    continue;
                }
            }
            child.lower_bound = rel.value;
            seq += 1;
            heap.push(OpenNode {
                node: child,
                z: rel.z,
                seq,
            });
        }
    }

    if incumbent.is_none() && budget_exhausted {
        // The root relaxation was feasible, so the full support is feasible:
        // scaling every z up to 1 only loosens the coupling constraints.
        let all: Vec<usize> = (0..num_rrhs).collect();
        incumbent = integral_candidate(cfg, ch, &all, &settings.solver, &mut stats.solver_calls)?;
    }

    let result = match incumbent {
        None => {
            let mut out = AlgoResult::infeasible(cfg, stats.solver_calls);
            out.inner_solves = stats.solver_calls;
            out.outer_iterations = stats.nodes_expanded;
            out
        }
        Some((power_w, z_final, v_final)) => AlgoResult {
            active_set: z_final.active_indices(),
            z_final,
            v_final,
            power_w,
            outer_iterations: stats.nodes_expanded,
            inner_solves: stats.solver_calls,
            status: if budget_exhausted {
                AlgoStatus::OuterLimit
            } else {
                AlgoStatus::Converged
            },
            trace: Vec::new(),
        },
    };
    Ok((result, stats))
}

pub fn branch_and_bound(
    cfg: &SystemConfig,
    ch: &Channel,
    settings: &BnbSettings,
) -> Result<AlgoResult, Error> {
    branch_and_bound_traced(cfg, ch, settings).map(|(result, _)| result)
}

/// Rounding heuristic: solve the box relaxation, deactivate RRHs in order of
/// increasing relaxed selection value, and pick the best prefix by bisection.
pub fn run_rmip(cfg: &SystemConfig, ch: &Channel) -> Result<AlgoResult, Error> {
    cfg.validate()?;
    let solver = SolverSettings::default();
    let program = conic::build_relaxed(cfg, ch)?;
    let relaxed = conic::solve(&program, &solver)?;
    match relaxed.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Ok(AlgoResult::infeasible(cfg, 1)),
        status => return Err(Error::SolverFailure(status)),
    }
    let (z_relaxed, _) = program.decode(cfg, &relaxed.x);

    let criterion = z_relaxed.values().to_vec();
    let mut order: Vec<usize> = (0..cfg.num_rrhs).collect();
    order.sort_by(|&a, &b| criterion[a].total_cmp(&criterion[b]).then(a.cmp(&b)));
    let ordering = gsbf::Ordering {
        deactivation_order: order,
        criterion,
    };

    let mut result = gsbf::bisection_selection(cfg, ch, &ordering, &solver)?;
    result.inner_solves += 1;
    Ok(result)
}
