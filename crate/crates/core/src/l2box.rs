//! The main algorithm: dual ascent on the sphere constraint of the exact
//! box-sphere reformulation, with an inexact majorization-minimization inner
//! loop. Each outer iteration minimizes a convex tangent surrogate of the
//! penalized Lagrangian a few times, then grows the multiplier by the sphere
//! residual, driving the selection vector onto a vertex of the box. A final
//! ordering + bisection pass converts the near-binary iterate into an exact,
//! feasible on/off decision.

use crate::conic::{self, SolveStatus, SolverSettings};
use crate::error::Error;
use crate::gsbf;
use crate::model::{
    network_power, sphere_residual, Beamformer, Channel, Selection, SystemConfig,
};
use crate::result::{AlgoResult, AlgoStatus, TraceRow};

/// Tolerances and budgets of the dual ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct L2BoxSettings {
    /// Inner loop stops when consecutive iterates move less than this.
    pub inner_tol: f64,
    /// Outer loop stops when the multiplier moves less than this.
    pub dual_tol: f64,
    /// Outer loop stops when the primal iterates move less than this.
    pub primal_tol: f64,
    /// Starting multiplier, > 0. Large enough that the very first surrogate
    /// already moves the iterate by more than `primal_tol`; a near-zero
    /// start reproduces the box relaxation so exactly that the primal
    /// stopping rule fires before the ascent has done anything.
    pub initial_multiplier: f64,
    /// Constant dual step size. The residual lives in [0, L/4] and the
    /// fronthaul powers set the scale at which the multiplier starts to flip
    /// selection entries, so with 13 W links a step of 10 reaches that scale
    /// within a couple of iterations.
    pub step_size: f64,
    pub max_outer: usize,
    /// Surrogate solves per inner loop; the subproblem is deliberately not
    /// solved to stationarity.
    pub max_inner: usize,
    pub solver: SolverSettings,
}

impl Default for L2BoxSettings {
    fn default() -> Self {
        L2BoxSettings {
            inner_tol: 1e-5,
            dual_tol: 1e-2,
            primal_tol: 1e-3,
            initial_multiplier: 1.0,
            step_size: 10.0,
            max_outer: 50,
            max_inner: 3,
            solver: SolverSettings::default(),
        }
    }
}

impl L2BoxSettings {
    pub fn validate(&self) -> Result<(), Error> {
        let positives = [
            ("inner_tol", self.inner_tol),
            ("dual_tol", self.dual_tol),
            ("primal_tol", self.primal_tol),
            ("initial_multiplier", self.initial_multiplier),
            ("step_size", self.step_size),
        ];
        for (name, v) in positives {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be > 0")));
            }
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return Err(Error::InvalidArgument(
                "max_inner and max_outer must be >= 1".into(),
            ));
        }
        self.solver.validate()
    }
}

/// Mutable state of the outer loop, exposed for inspection and tracing.
#[derive(Debug, Clone)]
pub struct DualState {
    pub lambda: f64,
    pub outer: usize,
    pub selection: Selection,
    pub beamformer: Beamformer,
    pub trace: Vec<TraceRow>,
}

/// Result of one inner loop. `lagrangian_path` holds the true penalized
/// objective at the start point and after every surrogate solve.
#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub selection: Selection,
    pub beamformer: Beamformer,
    pub inner_count: usize,
    pub lagrangian_path: Vec<f64>,
}

/// Penalized objective: network power plus lambda times the sphere residual.
/// Coincides with the network power on binary points for any multiplier.
pub fn lagrangian(cfg: &SystemConfig, sel: &Selection, bf: &Beamformer, lambda: f64) -> f64 {
    network_power(cfg, sel, bf) + lambda * sphere_residual(sel)
}

/// Solve the box relaxation for the starting point of the ascent.
pub fn initialize(
    cfg: &SystemConfig,
    ch: &Channel,
    solver: &SolverSettings,
) -> Result<(Selection, Beamformer), Error> {
    let program = conic::build_relaxed(cfg, ch)?;
    let result = conic::solve(&program, solver)?;
    match result.status {
        SolveStatus::Optimal => Ok(program.decode(cfg, &result.x)),
        SolveStatus::Infeasible => Err(Error::Infeasible(
            "SINR targets unreachable with all RRHs active".into(),
        )),
        status => Err(Error::SolverFailure(status)),
    }
}

/// Inexact minimization of the penalized Lagrangian at fixed multiplier:
/// repeatedly minimize the convex surrogate anchored at the current iterate,
/// stopping once the move is below `inner_tol` or after `max_inner` solves.
/// The surrogate majorizes the Lagrangian and touches it at the anchor, so
/// the true Lagrangian is nonincreasing along the returned path.
pub fn inner_mm(
    cfg: &SystemConfig,
    ch: &Channel,
    lambda: f64,
    z_start: &Selection,
    v_start: &Beamformer,
    inner_tol: f64,
    max_inner: usize,
    solver: &SolverSettings,
) -> Result<InnerOutcome, Error> {
    assert!(lambda >= 0.0);
    assert!(max_inner >= 1);
    let mut selection = z_start.clone();
    let mut beamformer = v_start.clone();
    let mut lagrangian_path = vec![lagrangian(cfg, &selection, &beamformer, lambda)];
    let mut inner_count = 0;
    for _ in 0..max_inner {
        let program = conic::build_surrogate(cfg, ch, lambda, &selection)?;
        let result = conic::solve(&program, solver)?;
        match result.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => {
                return Err(Error::Infeasible("surrogate subproblem infeasible".into()))
            }
            status => return Err(Error::SolverFailure(status)),
        }
        let (next_sel, next_bf) = program.decode(cfg, &result.x);
        inner_count += 1;
        let dz = iterate_distance(&selection, &next_sel);
        let dv = beamformer.frobenius_diff(&next_bf);
        selection = next_sel;
        beamformer = next_bf;
        lagrangian_path.push(lagrangian(cfg, &selection, &beamformer, lambda));
        if dz + dv < inner_tol {
            break;
        }
    }
    Ok(InnerOutcome {
        selection,
        beamformer,
        inner_count,
        lagrangian_path,
    })
}

/// Multiplier update: grow lambda by the step-scaled sphere residual. The
/// residual is nonnegative on the box, so the multiplier never decreases.
pub fn dual_step(lambda: f64, sel: &Selection, step_size: f64) -> f64 {
    assert!(step_size > 0.0);
    lambda + step_size * sphere_residual(sel)
}

fn iterate_distance(a: &Selection, b: &Selection) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Run the full algorithm and also return the per-outer-iteration Lagrangian
/// descent paths of the inner loops (one vector per outer iteration),
/// used to audit monotonicity.
pub fn run_l2box_detailed(
    cfg: &SystemConfig,
    ch: &Channel,
    settings: &L2BoxSettings,
) -> Result<(AlgoResult, Vec<Vec<f64>>), Error> {
    settings.validate()?;
    cfg.validate()?;

    let (mut z, mut v) = match initialize(cfg, ch, &settings.solver) {
        Ok(start) => start,
        Err(Error::Infeasible(_)) => {
            return Ok((AlgoResult::infeasible(cfg, 1), Vec::new()));
        }
        Err(e) => return Err(e),
    };
    let mut solves = 1usize;
    let mut lambda = settings.initial_multiplier;
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut inner_paths: Vec<Vec<f64>> = Vec::new();
    let mut outer = 0usize;
    let mut converged = false;

    while outer < settings.max_outer {
        let inner = match inner_mm(
            cfg,
            ch,
            lambda,
            &z,
            &v,
            settings.inner_tol,
            settings.max_inner,
            &settings.solver,
        ) {
            Ok(inner) => inner,
            // A breakdown at an extreme multiplier (the surrogate shares the
            // relaxation's feasible set, so "infeasible" here is also
            // numerical). Keep the last good iterate and let post-processing
            // recover a solution.
            Err(Error::SolverFailure(_)) | Err(Error::Infeasible(_)) => {
                log::warn!(
                    "surrogate solve broke down at outer {outer} (lambda {lambda:.3e}); stopping ascent early"
                );
                break;
            }
            Err(e) => return Err(e),
        };
        solves += inner.inner_count;
        let dz = iterate_distance(&z, &inner.selection);
        let dv = v.frobenius_diff(&inner.beamformer);
        let residual = sphere_residual(&inner.selection);
        let next_lambda = dual_step(lambda, &inner.selection, settings.step_size);
        trace.push(TraceRow {
            t: outer,
            lambda,
            residual,
            tol1: dz.max(1e-16).log10(),
            tol2: dv.max(1e-16).log10(),
            lagrangian: *inner
                .lagrangian_path
                .last()
                .expect("inner loop records at least the start point"),
        });
        inner_paths.push(inner.lagrangian_path);
        z = inner.selection;
        v = inner.beamformer;
        outer += 1;
        if (next_lambda - lambda).abs() < settings.dual_tol || dz + dv < settings.primal_tol {
            lambda = next_lambda;
            converged = true;
            break;
        }
        lambda = next_lambda;
    }
    log::debug!(
        "dual ascent stopped after {outer} outer iterations (lambda {lambda:.3}, converged {converged})"
    );

    // The ascent leaves z near a vertex; recover an exactly binary, feasible
    // decision by ordering RRHs on their group norms and bisecting.
    let order = gsbf::ordering(cfg, &v);
    let selected = gsbf::bisection_selection(cfg, ch, &order, &settings.solver)?;
    solves += selected.inner_solves;
    let status = if selected.status == AlgoStatus::Infeasible {
        AlgoStatus::Infeasible
    } else if converged {
        AlgoStatus::Converged
    } else {
        AlgoStatus::OuterLimit
    };
    Ok((
        AlgoResult {
            active_set: selected.active_set,
            z_final: selected.z_final,
            v_final: selected.v_final,
            power_w: selected.power_w,
            outer_iterations: outer,
            inner_solves: solves,
            status,
            trace,
        },
        inner_paths,
    ))
}

/// Dual ascent with MM inner loop, then ordering + bisection post-processing.
pub fn run_l2box(
    cfg: &SystemConfig,
    ch: &Channel,
    settings: &L2BoxSettings,
) -> Result<AlgoResult, Error> {
    run_l2box_detailed(cfg, ch, settings).map(|(result, _)| result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use crate::model::check_feasibility;

    fn toy_config() -> SystemConfig {
        let mut cfg = SystemConfig::uniform(1, 1, 1);
        cfg.max_tx_power_w = vec![4.0];
        cfg.noise_power_w = vec![1.0];
        cfg.sinr_target = vec![1.0];
        cfg
    }

    fn toy_channel(cfg: &SystemConfig) -> Channel {
        Channel::new(cfg, vec![vec![vec![Complex64::new(1.0, 0.0)]]]).unwrap()
    }

    #[test]
    fn lagrangian_hand_values() {
        // phi = 13*(0.5 + 1) + 4*0.375 = 21, residual = 0.25.
        let cfg = SystemConfig::uniform(2, 1, 1);
        let sel = Selection::relaxed(vec![0.5, 1.0]).unwrap();
        let mut bf = Beamformer::zeros(&cfg);
        bf.vector_mut(0, 0)[0] = Complex64::new(0.375f64.sqrt(), 0.0);
        assert_abs_diff_eq!(
            network_power(&cfg, &sel, &bf),
            21.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(lagrangian(&cfg, &sel, &bf, 4.0), 22.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            lagrangian(&cfg, &sel, &bf, 0.0),
            network_power(&cfg, &sel, &bf),
            epsilon = 1e-12
        );

        // Binary points: penalty vanishes for any multiplier.
        let binary = Selection::from_active(2, &[1]);
        assert_eq!(
            lagrangian(&cfg, &binary, &bf, 123.0),
            network_power(&cfg, &binary, &bf)
        );
    }

    #[test]
    fn dual_step_hand_values() {
        let quarter = Selection::relaxed(vec![0.5, 1.0]).unwrap();
        assert_abs_diff_eq!(dual_step(1.0, &quarter, 10.0), 3.5, epsilon = 1e-12);

        let center = Selection::relaxed(vec![0.5; 10]).unwrap();
        assert_abs_diff_eq!(dual_step(0.1, &center, 1.0), 2.6, epsilon = 1e-12);

        let binary = Selection::from_active(3, &[0, 2]);
        assert_eq!(dual_step(7.0, &binary, 10.0), 7.0);
    }

    #[test]
    fn initialize_toy_matches_relaxation_oracle() {
        let cfg = toy_config();
        let ch = toy_channel(&cfg);
        let (z, v) = initialize(&cfg, &ch, &SolverSettings::default()).unwrap();
        assert_abs_diff_eq!(z.values()[0], 0.5, epsilon = 1e-5);
        assert_abs_diff_eq!(v.rrh_norm(0), 1.0, epsilon = 1e-5);
    }

    #[test]
    fn initialize_detects_infeasibility() {
        let mut cfg = toy_config();
        cfg.sinr_target = vec![8.0];
        let ch = toy_channel(&cfg);
        match initialize(&cfg, &ch, &SolverSettings::default()) {
            Err(Error::Infeasible(_)) => {}
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn inner_mm_is_capped_and_stationary_at_zero_multiplier() {
        let cfg = toy_config();
        let ch = toy_channel(&cfg);
        let solver = SolverSettings::default();
        let (z0, v0) = initialize(&cfg, &ch, &solver).unwrap();

        // At lambda = 0 the surrogate is the relaxation itself, so starting
        // from its optimum the first solve moves nowhere.
        let out = inner_mm(&cfg, &ch, 0.0, &z0, &v0, 1e-5, 3, &solver).unwrap();
        assert_eq!(out.inner_count, 1);
        assert!(iterate_distance(&z0, &out.selection) < 1e-5);

        // A unit cap means exactly one solve regardless of movement.
        let far = Selection::relaxed(vec![1.0]).unwrap();
        let out = inner_mm(&cfg, &ch, 5.0, &far, &v0, 1e-9, 1, &solver).unwrap();
        assert_eq!(out.inner_count, 1);
    }

    #[test]
    fn run_l2box_toy_instance() {
        let cfg = toy_config();
        let ch = toy_channel(&cfg);
        let result = run_l2box(&cfg, &ch, &L2BoxSettings::default()).unwrap();
        assert_eq!(result.active_set, vec![0]);
        assert_abs_diff_eq!(result.power_w, 17.0, epsilon = 1e-5);
        assert!(result.z_final.is_binary_exact());
        let report = check_feasibility(&cfg, &ch, &result.v_final, &result.z_final, 1e-6);
        assert!(report.feasible);
        assert_abs_diff_eq!(
            result.power_w,
            network_power(&cfg, &result.z_final, &result.v_final),
            epsilon = 1e-9
        );
    }

    #[test]
    fn run_l2box_zero_targets_converges_immediately() {
        let mut cfg = SystemConfig::uniform(4, 2, 2);
        cfg.sinr_target = vec![0.0, 0.0];
        let topo = crate::model::generate_topology(&cfg, 3);
        let ch = crate::model::generate_channel(&cfg, &topo, 4);
        let result = run_l2box(&cfg, &ch, &L2BoxSettings::default()).unwrap();
        assert_eq!(result.status, AlgoStatus::Converged);
        assert_eq!(result.active_set, Vec::<usize>::new());
        assert_eq!(result.power_w, 0.0);
        assert_eq!(result.outer_iterations, 1);
    }

    #[test]
    fn run_l2box_infeasible_instance() {
        let mut cfg = toy_config();
        cfg.sinr_target = vec![8.0];
        let ch = toy_channel(&cfg);
        let result = run_l2box(&cfg, &ch, &L2BoxSettings::default()).unwrap();
        assert_eq!(result.status, AlgoStatus::Infeasible);
        assert!(result.trace.is_empty());
    }

    #[test]
    fn trace_is_monotone_in_lambda_with_bounded_residuals() {
        let cfg = SystemConfig::uniform(6, 3, 2).with_sinr_target_db(4.0);
        let topo = crate::model::generate_topology(&cfg, 11);
        let ch = crate::model::generate_channel(&cfg, &topo, 12);
        let result = run_l2box(&cfg, &ch, &L2BoxSettings::default()).unwrap();
        assert!(!result.trace.is_empty());
        for pair in result.trace.windows(2) {
            assert!(pair[1].lambda >= pair[0].lambda);
        }
        for row in &result.trace {
            assert!(row.residual >= 0.0);
            assert!(row.residual <= cfg.num_rrhs as f64 / 4.0 + 1e-12);
        }
    }
}
