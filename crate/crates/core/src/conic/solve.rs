//! Solver backend. Programs are handed to Clarabel's interior-point method;
//! the wrapper owns the standard-form translation, status mapping, and an
//! independent residual check so the contract does not depend on backend
//! internals. One solve is single-threaded and deterministic.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::error::Error;

use super::{ConeKind, ConeProgram, SolveResult, SolveStatus, SolverSettings};

/// Solve a cone program. Solver outcomes (optimal, infeasible, iteration
/// limit, numerical breakdown) are reported through `SolveResult::status`;
/// `Err` is reserved for malformed inputs.
pub fn solve(program: &ConeProgram, settings: &SolverSettings) -> Result<SolveResult, Error> {
    settings.validate()?;
    program.validate()?;

    let n = program.num_vars();
    if n == 0 {
        // Nothing to optimize: the blocks are constants, so feasibility is a
        // direct membership check.
        let residual = program.max_residual_at(&[]);
        let feasible = residual <= settings.feasibility_tol;
        return Ok(SolveResult {
            status: if feasible {
                SolveStatus::Optimal
            } else {
                SolveStatus::Infeasible
            },
            x: Vec::new(),
            objective_value: if feasible {
                program.objective_constant
            } else {
                f64::NAN
            },
            max_primal_residual: if feasible { residual } else { f64::NAN },
            solve_time_ms: 0.0,
        });
    }

    // Blocks are `A_blk x + b_blk ∈ K`; Clarabel wants `Ax + s = b, s ∈ K`,
    // i.e. s = b - Ax, so the block rows enter negated.
    let m = program.num_rows();
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut b = Vec::with_capacity(m);
    let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(program.blocks.len());
    let mut row_idx = 0usize;
    for block in &program.blocks {
        for row in &block.rows {
            for &(col, coef) in &row.coefficients {
                rows.push(row_idx);
                cols.push(col);
                vals.push(-coef);
            }
            b.push(row.constant);
            row_idx += 1;
        }
        let dim = block.rows.len();
        cones.push(match block.kind {
            ConeKind::Zero => SupportedConeT::ZeroConeT(dim),
            ConeKind::NonNegative => SupportedConeT::NonnegativeConeT(dim),
            // A one-dimensional second-order cone is just nonnegativity.
            ConeKind::SecondOrderCone if dim == 1 => SupportedConeT::NonnegativeConeT(1),
            ConeKind::SecondOrderCone => SupportedConeT::SecondOrderConeT(dim),
        });
    }
    let a = CscMatrix::new_from_triplets(m, n, rows, cols, vals);
    let p = CscMatrix::zeros((n, n));

    let mut backend = DefaultSettings::default();
    backend.verbose = settings.verbose;
    backend.max_iter = settings.max_iterations;
    // Keep backend termination strictly inside the contract tolerance so the
    // independent residual check below has margin.
    backend.tol_feas = settings.feasibility_tol * 0.1;
    backend.tol_gap_abs = 1e-9;
    backend.tol_gap_rel = 1e-9;

    let mut solver = DefaultSolver::new(&p, &program.objective, &a, &b, &cones, backend)
        .map_err(|e| Error::InvalidArgument(format!("solver setup rejected program: {e:?}")))?;
    solver.solve();
    let solution = &solver.solution;

    let mut status = match solution.status {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        SolverStatus::MaxIterations => SolveStatus::IterationLimit,
        _ => SolveStatus::NumericalError,
    };

    let x = solution.x.clone();
    let mut objective_value = f64::NAN;
    let mut max_primal_residual = f64::NAN;
    if status == SolveStatus::Optimal {
        objective_value = program.objective_value_at(&x);
        max_primal_residual = program.max_residual_at(&x);
        if !(max_primal_residual <= settings.feasibility_tol) {
            log::warn!(
                "backend reported optimal but residual {max_primal_residual:.3e} exceeds {:.3e}",
                settings.feasibility_tol
            );
            status = SolveStatus::NumericalError;
            objective_value = f64::NAN;
            max_primal_residual = f64::NAN;
        }
    }

    Ok(SolveResult {
        status,
        x,
        objective_value,
        max_primal_residual,
        solve_time_ms: solution.solve_time * 1e3,
    })
}
