//! Group-sparse beamforming baseline, in three stages: a weighted group-norm
//! relaxation that pushes whole per-RRH blocks toward zero, an ordering of
//! RRHs by how cheaply they can be switched off, and a binary search over
//! prefix supports followed by a best-combination scan. The ordering and
//! selection stages are shared with the dual-ascent algorithm's
//! post-processing.

use std::collections::HashMap;

use crate::conic::{self, SolveStatus, SolverSettings};
use crate::error::Error;
use crate::model::{network_power, Beamformer, Channel, SystemConfig};
use crate::result::{AlgoResult, AlgoStatus};

/// Deactivation priorities: `deactivation_order[0]` is switched off first.
/// `criterion[l]` is the score of RRH `l`; the order sorts it ascending with
/// lower index winning ties.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    pub deactivation_order: Vec<usize>,
    pub criterion: Vec<f64>,
}

impl Ordering {
    pub fn validate(&self) -> Result<(), Error> {
        let l = self.criterion.len();
        if self.deactivation_order.len() != l {
            return Err(Error::InvalidArgument(
                "ordering length does not match criterion length".into(),
            ));
        }
        let mut seen = vec![false; l];
        for &idx in &self.deactivation_order {
            if idx >= l || seen[idx] {
                return Err(Error::InvalidArgument(
                    "deactivation order is not a permutation".into(),
                ));
            }
            seen[idx] = true;
        }
        Ok(())
    }

    /// The `count` RRHs kept on longest (the suffix of the deactivation
    /// order), ascending.
    pub fn active_suffix(&self, count: usize) -> Vec<usize> {
        let l = self.deactivation_order.len();
        let mut active: Vec<usize> = self.deactivation_order[l - count..].to_vec();
        active.sort_unstable();
        active
    }
}

/// Stage-1 weights: sqrt(P^c_l / eta_l), penalizing RRHs whose on-state is
/// expensive. Uniform constants make this a plain unweighted group norm.
pub fn default_weights(cfg: &SystemConfig) -> Vec<f64> {
    (0..cfg.num_rrhs)
        .map(|l| (cfg.fronthaul_power_w[l] / cfg.drain_efficiency[l]).sqrt())
        .collect()
}

/// Solve the weighted group-norm relaxation and return its beamformer.
pub fn stage1_group_norm(
    cfg: &SystemConfig,
    ch: &Channel,
    weights: &[f64],
    solver: &SolverSettings,
) -> Result<Beamformer, Error> {
    let program = conic::build_group_norm(cfg, ch, weights)?;
    let result = conic::solve(&program, solver)?;
    match result.status {
        SolveStatus::Optimal => Ok(program.decode(cfg, &result.x).1),
        SolveStatus::Infeasible => Err(Error::Infeasible(
            "SINR targets unreachable with all RRHs active".into(),
        )),
        status => Err(Error::SolverFailure(status)),
    }
}

/// Score each RRH by its group norm scaled by sqrt(eta_l / P^c_l): a small
/// score means little transmit utility relative to the fronthaul power it
/// burns, so it is deactivated first.
pub fn ordering(cfg: &SystemConfig, bf: &Beamformer) -> Ordering {
    assert_eq!(bf.num_rrhs(), cfg.num_rrhs);
    let criterion: Vec<f64> = (0..cfg.num_rrhs)
        .map(|l| bf.rrh_norm(l) * (cfg.drain_efficiency[l] / cfg.fronthaul_power_w[l]).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cfg.num_rrhs).collect();
    order.sort_by(|&a, &b| criterion[a].total_cmp(&criterion[b]).then(a.cmp(&b)));
    Ordering {
        deactivation_order: order,
        criterion,
    }
}

/// Binary-search the smallest feasible prefix support along the ordering,
/// then scan every prefix from there up and keep the cheapest. Feasibility
/// of `active_suffix(J)` is monotone in J, which the search relies on.
pub fn bisection_selection(
    cfg: &SystemConfig,
    ch: &Channel,
    order: &Ordering,
    solver: &SolverSettings,
) -> Result<AlgoResult, Error> {
    order.validate()?;
    if order.deactivation_order.len() != cfg.num_rrhs {
        return Err(Error::DimensionMismatch(
            "ordering does not cover every RRH".into(),
        ));
    }
    let num_rrhs = cfg.num_rrhs;
    let mut solves = 0usize;
    let mut cache: HashMap<usize, conic::SolveResult> = HashMap::new();

    let ensure = |count: usize,
                  cache: &mut HashMap<usize, conic::SolveResult>,
                  solves: &mut usize|
     -> Result<(), Error> {
        if cache.contains_key(&count) {
            return Ok(());
        }
        let program = conic::build_fixed_support(cfg, ch, &order.active_suffix(count))?;
        let result = conic::solve(&program, solver)?;
        if matches!(
            result.status,
            SolveStatus::IterationLimit | SolveStatus::NumericalError
        ) {
            return Err(Error::SolverFailure(result.status));
        }
        *solves += 1;
        cache.insert(count, result);
        Ok(())
    };

    ensure(num_rrhs, &mut cache, &mut solves)?;
    if !cache[&num_rrhs].is_optimal() {
        return Ok(AlgoResult::infeasible(cfg, solves));
    }

    let mut lo = 0usize;
    let mut hi = num_rrhs;
    while lo < hi {
        let mid = (lo + hi) / 2;
        ensure(mid, &mut cache, &mut solves)?;
        if cache[&mid].is_optimal() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let min_feasible = lo;
    log::debug!("bisection: minimal feasible prefix {min_feasible} of {num_rrhs}");

    let mut best: Option<(usize, f64)> = None;
    for count in min_feasible..=num_rrhs {
        ensure(count, &mut cache, &mut solves)?;
        let result = &cache[&count];
        if !result.is_optimal() {
            log::warn!("prefix {count} unexpectedly infeasible during scan");
            continue;
        }
        let value = result.objective_value;
        if best.map_or(true, |(_, incumbent)| value < incumbent) {
            best = Some((count, value));
        }
    }
    let (best_count, _) = best.expect("the full prefix is feasible");

    let program = conic::build_fixed_support(cfg, ch, &order.active_suffix(best_count))?;
    let result = &cache[&best_count];
    let (z_final, v_final) = program.decode(cfg, &result.x);
    let active_set = z_final.active_indices();
    let power_w = network_power(cfg, &z_final, &v_final);
    Ok(AlgoResult {
        active_set,
        z_final,
        v_final,
        power_w,
        outer_iterations: 0,
        inner_solves: solves,
        status: AlgoStatus::Converged,
        trace: Vec::new(),
    })
}

/// The full baseline: group-norm relaxation, ordering, bisection selection.
pub fn run_gsbf(cfg: &SystemConfig, ch: &Channel) -> Result<AlgoResult, Error> {
    let solver = SolverSettings::default();
    let bf = match stage1_group_norm(cfg, ch, &default_weights(cfg), &solver) {
        Ok(bf) => bf,
        Err(Error::Infeasible(_)) => return Ok(AlgoResult::infeasible(cfg, 1)),
        Err(e) => return Err(e),
    };
    let order = ordering(cfg, &bf);
    log::debug!("gsbf ordering: {:?}", order.deactivation_order);
    let mut result = bisection_selection(cfg, ch, &order, &solver)?;
    result.inner_solves += 1;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

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
    fn ordering_sorts_ascending_with_index_ties() {
        let cfg = SystemConfig::uniform(3, 1, 1);
        let mut bf = Beamformer::zeros(&cfg);
        bf.vector_mut(1, 0)[0] = Complex64::new(5.0, 0.0);
        bf.vector_mut(2, 0)[0] = Complex64::new(1.0, 0.0);
        let order = ordering(&cfg, &bf);
        assert_eq!(order.deactivation_order, vec![0, 2, 1]);
        order.validate().unwrap();

        let mut bf = Beamformer::zeros(&cfg);
        for l in 0..3 {
            bf.vector_mut(l, 0)[0] = Complex64::new(1.0, 0.0);
        }
        assert_eq!(ordering(&cfg, &bf).deactivation_order, vec![0, 1, 2]);
    }

    #[test]
    fn ordering_prefers_shutting_down_expensive_fronthaul() {
        let mut cfg = SystemConfig::uniform(2, 1, 1);
        cfg.fronthaul_power_w = vec![13.0, 1.0];
        let mut bf = Beamformer::zeros(&cfg);
        bf.vector_mut(0, 0)[0] = Complex64::new(1.0, 0.0);
        bf.vector_mut(1, 0)[0] = Complex64::new(1.0, 0.0);
        let order = ordering(&cfg, &bf);
        assert!(order.criterion[0] < order.criterion[1]);
        assert_eq!(order.deactivation_order, vec![0, 1]);
    }

    #[test]
    fn active_suffix_returns_sorted_tail() {
        let order = Ordering {
            deactivation_order: vec![2, 0, 3, 1],
            criterion: vec![0.0; 4],
        };
        assert_eq!(order.active_suffix(0), Vec::<usize>::new());
        assert_eq!(order.active_suffix(2), vec![1, 3]);
        assert_eq!(order.active_suffix(4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn stage1_silences_unreachable_rrh() {
        // The only user is invisible to RRH 1, so its group norm must be 0.
        let cfg = SystemConfig::uniform(2, 1, 1);
        let ch = Channel::new(
            &cfg,
            vec![vec![
                vec![Complex64::new(1.0, 0.0)],
                vec![Complex64::new(0.0, 0.0)],
            ]],
        )
        .unwrap();
        let bf =
            stage1_group_norm(&cfg, &ch, &default_weights(&cfg), &SolverSettings::default())
                .unwrap();
        assert!(bf.rrh_norm(1) <= 1e-6, "norm {}", bf.rrh_norm(1));
        // Single served user over a unit channel: minimal norm is sqrt(gamma * sigma^2).
        let expected = (cfg.sinr_target[0] * cfg.noise_power_w[0]).sqrt();
        assert_abs_diff_eq!(bf.rrh_norm(0), expected, epsilon = 1e-6);
    }

    #[test]
    fn stage1_toy_matches_closed_form() {
        let cfg = toy_config();
        let ch = toy_channel(&cfg);
        let bf =
            stage1_group_norm(&cfg, &ch, &default_weights(&cfg), &SolverSettings::default())
                .unwrap();
        assert_abs_diff_eq!(bf.rrh_norm(0), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn stage1_zero_targets_give_zero_beamformer() {
        let mut cfg = toy_config();
        cfg.sinr_target = vec![0.0];
        let ch = toy_channel(&cfg);
        let bf =
            stage1_group_norm(&cfg, &ch, &default_weights(&cfg), &SolverSettings::default())
                .unwrap();
        assert!(bf.rrh_norm(0) <= 1e-8);
    }

    #[test]
    fn run_gsbf_toy_instance() {
        let cfg = toy_config();
        let ch = toy_channel(&cfg);
        let result = run_gsbf(&cfg, &ch).unwrap();
        assert_eq!(result.status, AlgoStatus::Converged);
        assert_eq!(result.active_set, vec![0]);
        assert_abs_diff_eq!(result.power_w, 17.0, epsilon = 1e-5);
        assert!(result.z_final.is_binary_exact());
    }

    #[test]
    fn run_gsbf_zero_targets_switch_everything_off() {
        let mut cfg = SystemConfig::uniform(3, 2, 2);
        cfg.sinr_target = vec![0.0, 0.0];
        let topo = crate::model::generate_topology(&cfg, 1);
        let ch = crate::model::generate_channel(&cfg, &topo, 2);
        let result = run_gsbf(&cfg, &ch).unwrap();
        assert_eq!(result.active_set, Vec::<usize>::new());
        assert_eq!(result.power_w, 0.0);
    }

    #[test]
    fn bisection_needs_log_many_solves_when_everything_is_required() {
        // Four users each reachable through exactly one RRH: every prefix
        // short of the full set is infeasible.
        let cfg = SystemConfig::uniform(4, 4, 1);
        let entries = (0..4)
            .map(|k| {
                (0..4)
                    .map(|l| {
                        vec![Complex64::new(if k == l { 1.0 } else { 0.0 }, 0.0)]
                    })
                    .collect()
            })
            .collect();
        let ch = Channel::new(&cfg, entries).unwrap();
        let order = Ordering {
            deactivation_order: vec![0, 1, 2, 3],
            criterion: vec![0.0; 4],
        };
        let result = bisection_selection(&cfg, &ch, &order, &SolverSettings::default()).unwrap();
        assert_eq!(result.active_set, vec![0, 1, 2, 3]);
        // One full-set check plus ceil(log2(L+1)) bisection probes, all
        // prefix evaluations served from cache.
        assert!(
            result.inner_solves <= 4,
            "expected <= 4 solves, used {}",
            result.inner_solves
        );
        assert_eq!(result.status, AlgoStatus::Converged);
    }

    #[test]
    fn infeasible_instance_reports_infeasible() {
        let mut cfg = toy_config();
        // Requires |v|^2 >= 8 but the power cap is 4.
        cfg.sinr_target = vec![8.0];
        let ch = toy_channel(&cfg);
        let result = run_gsbf(&cfg, &ch).unwrap();
        assert_eq!(result.status, AlgoStatus::Infeasible);
        assert!(result.power_w.is_nan());
    }
}
