use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::{
    check_feasibility, generate_channel, generate_topology, network_power, sphere_residual,
    Channel, Selection,
};

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

fn random_instance(l: usize, k: usize, n: usize, seed: u64) -> (SystemConfig, Channel) {
    let mut cfg = SystemConfig::uniform(l, k, n).with_sinr_target_db(4.0);
    // Benign scale so arbitrary seeds stay feasible on these tiny networks;
    // the default caps are sized for the ten-RRH protocol geometry.
    cfg.noise_power_w = vec![1e-6; k];
    cfg.max_tx_power_w = vec![1.0; l];
    let topo = generate_topology(&cfg, seed);
    let ch = generate_channel(&cfg, &topo, seed.wrapping_mul(31).wrapping_add(7));
    (cfg, ch)
}

// --- complex embedding -------------------------------------------------

#[test]
fn complex_rows_identity_channel() {
    let span = VarSpan { start: 0, len: 2 };
    let (re, im) = complex_soc_rows(&[Complex64::new(1.0, 0.0)], span).unwrap();
    let x = [0.3, -0.8]; // v = a + bi
    assert_abs_diff_eq!(re.value_at(&x), 0.3, epsilon = 1e-15);
    assert_abs_diff_eq!(im.value_at(&x), -0.8, epsilon = 1e-15);
}

#[test]
fn complex_rows_imaginary_channel() {
    // h = i, so h^H v = -i(a + bi) = b - ai.
    let span = VarSpan { start: 0, len: 2 };
    let (re, im) = complex_soc_rows(&[Complex64::new(0.0, 1.0)], span).unwrap();
    let x = [0.3, -0.8];
    assert_abs_diff_eq!(re.value_at(&x), -0.8, epsilon = 1e-15);
    assert_abs_diff_eq!(im.value_at(&x), -0.3, epsilon = 1e-15);
}

#[test]
fn complex_rows_match_complex_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let dim = rng.random_range(1..5);
        let h: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        let x: Vec<f64> = (0..2 * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let v: Vec<Complex64> = (0..dim)
            .map(|j| Complex64::new(x[2 * j], x[2 * j + 1]))
            .collect();
        let direct: Complex64 = h.iter().zip(&v).map(|(hj, vj)| hj.conj() * vj).sum();
        let span = VarSpan {
            start: 0,
            len: 2 * dim,
        };
        let (re, im) = complex_soc_rows(&h, span).unwrap();
        assert_abs_diff_eq!(re.value_at(&x), direct.re, epsilon = 1e-14);
        assert_abs_diff_eq!(im.value_at(&x), direct.im, epsilon = 1e-14);
    }
}

#[test]
fn complex_rows_reject_bad_span() {
    let span = VarSpan { start: 0, len: 3 };
    assert!(complex_soc_rows(&[Complex64::new(1.0, 0.0)], span).is_err());
}

// --- builders -----------------------------------------------------------

#[test]
fn fixed_support_block_census() {
    let (cfg, ch) = random_instance(2, 2, 2, 1);
    let program = build_fixed_support(&cfg, &ch, &[0, 1]).unwrap();
    program.validate().unwrap();
    let count = |prefix: &str| {
        program
            .blocks
            .iter()
            .filter(|b| b.label.starts_with(prefix))
            .count()
    };
    assert_eq!(count("sinr"), 2);
    assert_eq!(count("power"), 2);
    assert_eq!(count("transmit_epi"), 2);
    assert_eq!(program.blocks.len(), 6);
    // 2 RRHs x 2 users x 2 antennas x 2 reals + 2 epigraphs.
    assert_eq!(program.num_vars(), 18);
    assert!(program
        .blocks
        .iter()
        .all(|b| b.kind == ConeKind::SecondOrderCone));
}

#[test]
fn fixed_support_empty_set_zero_targets() {
    let (mut cfg, _) = random_instance(2, 2, 1, 2);
    cfg.sinr_target = vec![0.0, 0.0];
    let topo = generate_topology(&cfg, 2);
    let ch = generate_channel(&cfg, &topo, 3);
    let program = build_fixed_support(&cfg, &ch, &[]).unwrap();
    assert_eq!(program.num_vars(), 0);
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert!(result.is_optimal());
    assert_eq!(result.objective_value, 0.0);
}

#[test]
fn fixed_support_empty_set_positive_targets_is_infeasible() {
    let (cfg, ch) = random_instance(2, 2, 1, 3);
    let program = build_fixed_support(&cfg, &ch, &[]).unwrap();
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert_eq!(result.status, SolveStatus::Infeasible);
}

#[test]
fn fixed_support_toy_oracle() {
    let cfg = toy_config();
    let ch = toy_channel(&cfg);
    let program = build_fixed_support(&cfg, &ch, &[0]).unwrap();
    program.validate().unwrap();
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert!(result.is_optimal());
    // Minimal transmit power gamma*sigma^2/|h|^2 = 1, so 13 + 4*1.
    assert_abs_diff_eq!(result.objective_value, 17.0, epsilon = 1e-5);
    let (sel, bf) = program.decode(&cfg, &result.x);
    assert!(sel.is_binary_exact());
    assert_eq!(sel.active_indices(), vec![0]);
    assert_abs_diff_eq!(bf.rrh_norm_sq(0), 1.0, epsilon = 1e-5);
}

#[test]
fn fixed_support_rejects_out_of_range_and_dedups() {
    let (cfg, ch) = random_instance(2, 1, 1, 4);
    assert!(build_fixed_support(&cfg, &ch, &[5]).is_err());
    let program = build_fixed_support(&cfg, &ch, &[1, 1, 0]).unwrap();
    program.validate().unwrap();
    assert_eq!(
        program.var_map.beam.iter().flatten().flatten().count(),
        2 * 1
    );
}

#[test]
fn relaxed_zero_targets_turn_everything_off() {
    let (mut cfg, _) = random_instance(3, 2, 1, 5);
    cfg.sinr_target = vec![0.0, 0.0];
    let topo = generate_topology(&cfg, 5);
    let ch = generate_channel(&cfg, &topo, 6);
    let program = build_relaxed(&cfg, &ch).unwrap();
    program.validate().unwrap();
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert!(result.is_optimal());
    assert_abs_diff_eq!(result.objective_value, 0.0, epsilon = 1e-6);
    let (sel, _) = program.decode(&cfg, &result.x);
    assert!(sel.values().iter().all(|&z| z < 1e-6));
}

#[test]
fn relaxed_coupling_block_dimension() {
    let (cfg, ch) = random_instance(3, 2, 2, 6);
    let program = build_relaxed(&cfg, &ch).unwrap();
    for l in 0..3 {
        let block = program
            .blocks
            .iter()
            .find(|b| b.label == format!("coupling[{l}]"))
            .unwrap();
        // 1 + 2*K*N_l rows.
        assert_eq!(block.rows.len(), 1 + 2 * 2 * 2);
    }
}

#[test]
fn relaxed_toy_oracle() {
    let cfg = toy_config();
    let ch = toy_channel(&cfg);
    let program = build_relaxed(&cfg, &ch).unwrap();
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert!(result.is_optimal());
    // z = |v|/sqrt(P) = 0.5, value 13*0.5 + 4*1 = 10.5.
    assert_abs_diff_eq!(result.objective_value, 10.5, epsilon = 1e-5);
    let (sel, bf) = program.decode(&cfg, &result.x);
    assert_abs_diff_eq!(sel.values()[0], 0.5, epsilon = 1e-5);
    assert_abs_diff_eq!(bf.rrh_norm_sq(0), 1.0, epsilon = 1e-5);
}

#[test]
fn pinned_relaxation_respects_pins() {
    let (cfg, ch) = random_instance(3, 2, 1, 7);
    let pins = vec![Some(true), None, Some(false)];
    let program = build_relaxed_pinned(&cfg, &ch, &pins).unwrap();
    program.validate().unwrap();
    let result = solve(&program, &SolverSettings::default()).unwrap();
    if result.is_optimal() {
        let (sel, bf) = program.decode(&cfg, &result.x);
        assert_abs_diff_eq!(sel.values()[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sel.values()[2], 0.0, epsilon = 1e-6);
        assert!(bf.rrh_norm(2) <= 1e-6);
    }
}

#[test]
fn surrogate_at_zero_multiplier_is_the_relaxation() {
    let (cfg, ch) = random_instance(3, 2, 1, 8);
    let anchor = Selection::relaxed(vec![0.3, 0.9, 0.5]).unwrap();
    let relaxed = build_relaxed(&cfg, &ch).unwrap();
    let surrogate = build_surrogate(&cfg, &ch, 0.0, &anchor).unwrap();
    assert_eq!(surrogate.objective, relaxed.objective);
    assert_eq!(surrogate.objective_constant, relaxed.objective_constant);
    assert_eq!(surrogate.blocks.len(), relaxed.blocks.len());
}

#[test]
fn surrogate_at_center_anchor_only_shifts_constant() {
    let (cfg, ch) = random_instance(2, 1, 1, 9);
    let center = Selection::relaxed(vec![0.5, 0.5]).unwrap();
    let relaxed = build_relaxed(&cfg, &ch).unwrap();
    let lambda = 3.0;
    let surrogate = build_surrogate(&cfg, &ch, lambda, &center).unwrap();
    assert_eq!(surrogate.objective, relaxed.objective);
    assert_abs_diff_eq!(
        surrogate.objective_constant,
        relaxed.objective_constant + lambda * 2.0 / 4.0,
        epsilon = 1e-12
    );
}

#[test]
fn surrogate_rejects_negative_multiplier() {
    let (cfg, ch) = random_instance(2, 1, 1, 10);
    let anchor = Selection::relaxed(vec![0.5, 0.5]).unwrap();
    assert!(build_surrogate(&cfg, &ch, -1.0, &anchor).is_err());
    assert!(build_surrogate(&cfg, &ch, f64::NAN, &anchor).is_err());
}

#[test]
fn surrogate_touches_and_majorizes_the_lagrangian() {
    let (cfg, ch) = random_instance(4, 2, 1, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let lambda = rng.random_range(0.0..20.0);
        let anchor = Selection::relaxed(
            (0..4).map(|_| rng.random_range(0.0..=1.0)).collect(),
        )
        .unwrap();
        let program = build_surrogate(&cfg, &ch, lambda, &anchor).unwrap();

        let mut bf = crate::model::Beamformer::zeros(&cfg);
        for l in 0..4 {
            for k in 0..2 {
                bf.vector_mut(l, k)[0] =
                    Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            }
        }
        let lagrangian = |sel: &Selection| {
            network_power(&cfg, sel, &bf) + lambda * sphere_residual(sel)
        };

        // Touching at the anchor.
        let x = program.embed_point(&cfg, &anchor, &bf).unwrap();
        let at_anchor = program.objective_value_at(&x);
        let scale = 1.0f64.max(at_anchor.abs());
        assert_abs_diff_eq!(at_anchor, lagrangian(&anchor), epsilon = 1e-10 * scale);

        // Majorization across the box.
        for _ in 0..10 {
            let z = Selection::relaxed(
                (0..4).map(|_| rng.random_range(0.0..=1.0)).collect(),
            )
            .unwrap();
            let x = program.embed_point(&cfg, &z, &bf).unwrap();
            let surrogate_value = program.objective_value_at(&x);
            let truth = lagrangian(&z);
            assert!(
                surrogate_value >= truth - 1e-10 * 1.0f64.max(truth.abs()),
                "surrogate {surrogate_value} fell below Lagrangian {truth}"
            );
        }
    }
}

// --- solver contract ----------------------------------------------------

fn scalar_map(n: usize) -> VarMap {
    VarMap {
        num_vars: n,
        beam: Vec::new(),
        selection: (0..n).map(Some).collect(),
        aux: Vec::new(),
        aux_is_squared: false,
    }
}

#[test]
fn solve_one_dimensional_lp() {
    let program = ConeProgram {
        objective: vec![1.0],
        objective_constant: 0.0,
        blocks: vec![ConeBlock {
            kind: ConeKind::NonNegative,
            label: "x_lower".into(),
            rows: vec![AffineRow {
                coefficients: vec![(0, 1.0)],
                constant: -1.0,
            }],
        }],
        var_map: scalar_map(1),
    };
    program.validate().unwrap();
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert!(result.is_optimal());
    assert_abs_diff_eq!(result.x[0], 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(result.objective_value, 1.0, epsilon = 1e-6);
    assert!(result.max_primal_residual <= 1e-8);
}

#[test]
fn solve_euclidean_norm_soc() {
    let program = ConeProgram {
        objective: vec![1.0],
        objective_constant: 0.0,
        blocks: vec![ConeBlock {
            kind: ConeKind::SecondOrderCone,
            label: "norm".into(),
            rows: vec![
                AffineRow {
                    coefficients: vec![(0, 1.0)],
                    constant: 0.0,
                },
                AffineRow::constant(3.0),
                AffineRow::constant(4.0),
            ],
        }],
        var_map: scalar_map(1),
    };
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert!(result.is_optimal());
    assert_abs_diff_eq!(result.x[0], 5.0, epsilon = 1e-6);
}

#[test]
fn solve_detects_infeasible_pair() {
    let program = ConeProgram {
        objective: vec![0.0],
        objective_constant: 0.0,
        blocks: vec![
            ConeBlock {
                kind: ConeKind::NonNegative,
                label: "x_ge_1".into(),
                rows: vec![AffineRow {
                    coefficients: vec![(0, 1.0)],
                    constant: -1.0,
                }],
            },
            ConeBlock {
                kind: ConeKind::NonNegative,
                label: "x_le_0".into(),
                rows: vec![AffineRow {
                    coefficients: vec![(0, -1.0)],
                    constant: 0.0,
                }],
            },
        ],
        var_map: scalar_map(1),
    };
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert_eq!(result.status, SolveStatus::Infeasible);
    assert!(result.objective_value.is_nan());
}

#[test]
fn solve_zero_cone_equality() {
    let program = ConeProgram {
        objective: vec![1.0],
        objective_constant: 0.5,
        blocks: vec![ConeBlock {
            kind: ConeKind::Zero,
            label: "x_eq_2".into(),
            rows: vec![AffineRow {
                coefficients: vec![(0, 1.0)],
                constant: -2.0,
            }],
        }],
        var_map: scalar_map(1),
    };
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert!(result.is_optimal());
    assert_abs_diff_eq!(result.objective_value, 2.5, epsilon = 1e-6);
}

#[test]
fn solve_no_variables_checks_constants() {
    let feasible = ConeProgram {
        objective: Vec::new(),
        objective_constant: 7.0,
        blocks: vec![ConeBlock {
            kind: ConeKind::NonNegative,
            label: "const".into(),
            rows: vec![AffineRow::constant(1.0)],
        }],
        var_map: scalar_map(0),
    };
    let result = solve(&feasible, &SolverSettings::default()).unwrap();
    assert!(result.is_optimal());
    assert_eq!(result.objective_value, 7.0);

    let infeasible = ConeProgram {
        objective: Vec::new(),
        objective_constant: 0.0,
        blocks: vec![ConeBlock {
            kind: ConeKind::NonNegative,
            label: "const".into(),
            rows: vec![AffineRow::constant(-1.0)],
        }],
        var_map: scalar_map(0),
    };
    let result = solve(&infeasible, &SolverSettings::default()).unwrap();
    assert_eq!(result.status, SolveStatus::Infeasible);
}

#[test]
fn solve_is_deterministic() {
    let (cfg, ch) = random_instance(3, 2, 2, 13);
    let program = build_relaxed(&cfg, &ch).unwrap();
    let a = solve(&program, &SolverSettings::default()).unwrap();
    let b = solve(&program, &SolverSettings::default()).unwrap();
    assert_eq!(a.status, b.status);
    assert_eq!(a.x, b.x);
    assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
}

#[test]
fn solve_rejects_malformed_programs() {
    // Index out of range.
    let bad = ConeProgram {
        objective: vec![1.0],
        objective_constant: 0.0,
        blocks: vec![ConeBlock {
            kind: ConeKind::NonNegative,
            label: "oob".into(),
            rows: vec![AffineRow {
                coefficients: vec![(3, 1.0)],
                constant: 0.0,
            }],
        }],
        var_map: scalar_map(1),
    };
    assert!(bad.validate().is_err());
    assert!(solve(&bad, &SolverSettings::default()).is_err());

    // Overlapping var_map spans.
    let mut map = scalar_map(1);
    map.aux = vec![Some(0)];
    let overlapping = ConeProgram {
        objective: vec![1.0],
        objective_constant: 0.0,
        blocks: Vec::new(),
        var_map: map,
    };
    assert!(overlapping.validate().is_err());

    // Empty SOC block.
    let empty_soc = ConeProgram {
        objective: vec![1.0],
        objective_constant: 0.0,
        blocks: vec![ConeBlock {
            kind: ConeKind::SecondOrderCone,
            label: "empty".into(),
            rows: Vec::new(),
        }],
        var_map: scalar_map(1),
    };
    assert!(empty_soc.validate().is_err());

    // Bad solver settings.
    let fine = ConeProgram {
        objective: vec![1.0],
        objective_constant: 0.0,
        blocks: Vec::new(),
        var_map: scalar_map(1),
    };
    let mut settings = SolverSettings::default();
    settings.feasibility_tol = 0.0;
    assert!(solve(&fine, &settings).is_err());
}

// --- round trips ----------------------------------------------------------

#[test]
fn decode_then_embed_reproduces_objective() {
    let (cfg, ch) = random_instance(3, 2, 2, 14);
    let program = build_relaxed(&cfg, &ch).unwrap();
    let result = solve(&program, &SolverSettings::default()).unwrap();
    assert!(result.is_optimal());
    let (sel, bf) = program.decode(&cfg, &result.x);
    let x = program.embed_point(&cfg, &sel, &bf).unwrap();
    // Embedding sets the epigraphs tight, so the objective can only drop.
    let re_embedded = program.objective_value_at(&x);
    assert!(re_embedded <= result.objective_value + 1e-6);
    assert_abs_diff_eq!(re_embedded, result.objective_value, epsilon = 1e-4);
}

#[test]
fn embed_rejects_power_at_excluded_rrh() {
    let (cfg, ch) = random_instance(2, 1, 1, 15);
    let program = build_fixed_support(&cfg, &ch, &[0]).unwrap();
    let sel = Selection::from_active(2, &[0]);
    let mut bf = crate::model::Beamformer::zeros(&cfg);
    bf.vector_mut(1, 0)[0] = Complex64::new(0.1, 0.0);
    assert!(program.embed_point(&cfg, &sel, &bf).is_err());
}

#[test]
fn optimal_solutions_pass_model_feasibility() {
    for seed in [21u64, 22, 23] {
        let (cfg, ch) = random_instance(4, 3, 2, seed);
        let program = build_fixed_support(&cfg, &ch, &[0, 1, 2, 3]).unwrap();
        let settings = SolverSettings::default();
        let result = solve(&program, &settings).unwrap();
        if !result.is_optimal() {
            continue;
        }
        let (sel, bf) = program.decode(&cfg, &result.x);
        let report = check_feasibility(&cfg, &ch, &bf, &sel, 10.0 * settings.feasibility_tol);
        assert!(report.feasible, "seed {seed}: {report:?}");
    }
}

#[test]
fn support_monotonicity() {
    // If a subset is feasible, any superset stays feasible.
    for seed in [31u64, 32] {
        let (cfg, ch) = random_instance(4, 2, 1, seed);
        let settings = SolverSettings::default();
        let feasible = |active: &[usize]| {
            let program = build_fixed_support(&cfg, &ch, active).unwrap();
            solve(&program, &settings).unwrap().is_optimal()
        };
        if feasible(&[1, 2]) {
            assert!(feasible(&[0, 1, 2]));
            assert!(feasible(&[1, 2, 3]));
            assert!(feasible(&[0, 1, 2, 3]));
        }
    }
}

#[test]
fn relaxation_chain_bounds() {
    let (cfg, ch) = random_instance(4, 2, 2, 41);
    let settings = SolverSettings::default();
    let relaxed = solve(&build_relaxed(&cfg, &ch).unwrap(), &settings).unwrap();
    let all: Vec<usize> = (0..4).collect();
    let fixed = solve(&build_fixed_support(&cfg, &ch, &all).unwrap(), &settings).unwrap();
    assert!(relaxed.is_optimal() && fixed.is_optimal());
    assert!(relaxed.objective_value <= fixed.objective_value + 1e-6);
    let fronthaul_total: f64 = cfg.fronthaul_power_w.iter().sum();
    assert!(fixed.objective_value >= fronthaul_total - 1e-6);
}

#[test]
fn dump_json_round_trips_structure() {
    let (cfg, ch) = random_instance(2, 1, 1, 51);
    let program = build_fixed_support(&cfg, &ch, &[0, 1]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("program.json");
    program.dump_json(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(
        value["objective"].as_array().unwrap().len(),
        program.num_vars()
    );
    assert_eq!(
        value["blocks"].as_array().unwrap().len(),
        program.blocks.len()
    );
    assert!(value["var_map"]["num_vars"].is_number());
}
