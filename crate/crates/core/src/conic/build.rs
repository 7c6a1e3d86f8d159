//! Constructors for every cone program in the toolkit: fixed-support power
//! minimization, the box relaxation (optionally with pinned selection
//! coordinates), the tangent-majorizer surrogate of the penalized
//! Lagrangian, and the weighted group-norm program.

use num_complex::Complex64;

use crate::error::Error;
use crate::model::{Channel, Selection, SystemConfig};

use super::{AffineRow, ConeBlock, ConeKind, ConeProgram, VarMap, VarSpan};

/// Real embedding of a complex inner product: rows computing Re(h^H v) and
/// Im(h^H v) from a span holding v as interleaved (re, im) pairs. The sum of
/// squares of the two rows is |h^H v|^2.
pub fn complex_soc_rows(h: &[Complex64], v_span: VarSpan) -> Result<(AffineRow, AffineRow), Error> {
    if v_span.len != 2 * h.len() {
        return Err(Error::DimensionMismatch(format!(
            "span holds {} reals, channel vector needs {}",
            v_span.len,
            2 * h.len()
        )));
    }
    let mut re = Vec::with_capacity(2 * h.len());
    let mut im = Vec::with_capacity(2 * h.len());
    for (j, hj) in h.iter().enumerate() {
        let re_idx = v_span.start + 2 * j;
        let im_idx = re_idx + 1;
        // conj(h_j) * (vr + i*vi) = (hr*vr + hi*vi) + i*(hr*vi - hi*vr)
        re.push((re_idx, hj.re));
        re.push((im_idx, hj.im));
        im.push((re_idx, -hj.im));
        im.push((im_idx, hj.re));
    }
    Ok((
        AffineRow {
            coefficients: re,
            constant: 0.0,
        },
        AffineRow {
            coefficients: im,
            constant: 0.0,
        },
    ))
}

struct VarAlloc {
    next: usize,
}

impl VarAlloc {
    fn new() -> Self {
        VarAlloc { next: 0 }
    }

    fn span(&mut self, len: usize) -> VarSpan {
        let span = VarSpan {
            start: self.next,
            len,
        };
        self.next += len;
        span
    }

    fn scalar(&mut self) -> usize {
        let idx = self.next;
        self.next += 1;
        idx
    }
}

fn check_instance(cfg: &SystemConfig, ch: &Channel) -> Result<(), Error> {
    cfg.validate()?;
    if ch.num_users() != cfg.num_users || ch.num_rrhs() != cfg.num_rrhs {
        return Err(Error::DimensionMismatch(
            "channel shape does not match config".into(),
        ));
    }
    Ok(())
}

/// Aggregate Re/Im rows of h_k^H v_i over every RRH that owns a beam span.
fn inner_product_rows(
    ch: &Channel,
    user: usize,
    stream: usize,
    beam: &[Vec<Option<VarSpan>>],
) -> (AffineRow, AffineRow) {
    let mut re = AffineRow::constant(0.0);
    let mut im = AffineRow::constant(0.0);
    for (l, per_rrh) in beam.iter().enumerate() {
        if let Some(span) = per_rrh[stream] {
            let (r, i) = complex_soc_rows(ch.vector(user, l), span)
                .expect("allocated spans match channel dimensions");
            re.coefficients.extend(r.coefficients);
            im.coefficients.extend(i.coefficients);
        }
    }
    (re, im)
}

/// One SOC block per user with a positive target: the noise-augmented
/// interference norm is bounded by the desired inner product scaled by
/// 1/sqrt(gamma). Users with gamma = 0 contribute no block.
fn sinr_blocks(cfg: &SystemConfig, ch: &Channel, beam: &[Vec<Option<VarSpan>>]) -> Vec<ConeBlock> {
    let mut blocks = Vec::new();
    for k in 0..cfg.num_users {
        let gamma = cfg.sinr_target[k];
        if gamma == 0.0 {
            continue;
        }
        let (mut head, _) = inner_product_rows(ch, k, k, beam);
        for (_, coef) in &mut head.coefficients {
            *coef /= gamma.sqrt();
        }
        let mut rows = vec![head];
        for i in 0..cfg.num_users {
            if i == k {
                continue;
            }
            let (re, im) = inner_product_rows(ch, k, i, beam);
            rows.push(re);
            rows.push(im);
        }
        rows.push(AffineRow::constant(cfg.noise_power_w[k].sqrt()));
        blocks.push(ConeBlock {
            kind: ConeKind::SecondOrderCone,
            label: format!("sinr[{k}]"),
            rows,
        });
    }
    blocks
}

/// Identity rows over every real component of RRH `l`'s beam spans.
fn group_component_rows(beam_l: &[Option<VarSpan>], scale: f64) -> Vec<AffineRow> {
    let mut rows = Vec::new();
    for span in beam_l.iter().flatten() {
        for idx in span.indices() {
            rows.push(AffineRow {
                coefficients: vec![(idx, scale)],
                constant: 0.0,
            });
        }
    }
    rows
}

/// SOC encoding of ||group||^2 <= t via || (2*group, t - 1) || <= t + 1.
fn epigraph_block(beam_l: &[Option<VarSpan>], t_idx: usize, label: String) -> ConeBlock {
    let mut rows = vec![AffineRow {
        coefficients: vec![(t_idx, 1.0)],
        constant: 1.0,
    }];
    rows.extend(group_component_rows(beam_l, 2.0));
    rows.push(AffineRow {
        coefficients: vec![(t_idx, 1.0)],
        constant: -1.0,
    });
    ConeBlock {
        kind: ConeKind::SecondOrderCone,
        label,
        rows,
    }
}

/// Minimum-power beamforming with the support fixed: only the listed RRHs
/// own variables, everything else transmits nothing. The objective counts
/// the active RRHs' fronthaul power as a constant plus efficiency-scaled
/// epigraphs of the squared group norms.
pub fn build_fixed_support(
    cfg: &SystemConfig,
    ch: &Channel,
    active: &[usize],
) -> Result<ConeProgram, Error> {
    check_instance(cfg, ch)?;
    let mut active: Vec<usize> = active.to_vec();
    active.sort_unstable();
    active.dedup();
    if active.iter().any(|&l| l >= cfg.num_rrhs) {
        return Err(Error::InvalidArgument(format!(
            "active set references an RRH >= {}",
            cfg.num_rrhs
        )));
    }

    let mut alloc = VarAlloc::new();
    let mut beam: Vec<Vec<Option<VarSpan>>> = vec![vec![None; cfg.num_users]; cfg.num_rrhs];
    for &l in &active {
        for k in 0..cfg.num_users {
            beam[l][k] = Some(alloc.span(2 * cfg.antennas[l]));
        }
    }
    let mut aux: Vec<Option<usize>> = vec![None; cfg.num_rrhs];
    for &l in &active {
        aux[l] = Some(alloc.scalar());
    }

    let n = alloc.next;
    let mut objective = vec![0.0; n];
    let mut constant = 0.0;
    for &l in &active {
        objective[aux[l].unwrap()] = 1.0 / cfg.drain_efficiency[l];
        constant += cfg.fronthaul_power_w[l];
    }

    let mut blocks = sinr_blocks(cfg, ch, &beam);
    for &l in &active {
        let mut rows = vec![AffineRow::constant(cfg.max_tx_power_w[l].sqrt())];
        rows.extend(group_component_rows(&beam[l], 1.0));
        blocks.push(ConeBlock {
            kind: ConeKind::SecondOrderCone,
            label: format!("power[{l}]"),
            rows,
        });
    }
    for &l in &active {
        blocks.push(epigraph_block(
            &beam[l],
            aux[l].unwrap(),
            format!("transmit_epi[{l}]"),
        ));
    }

    Ok(ConeProgram {
        objective,
        objective_constant: constant,
        blocks,
        var_map: VarMap {
            num_vars: n,
            beam,
            selection: vec![None; cfg.num_rrhs],
            aux,
            aux_is_squared: true,
        },
    })
}

/// Box relaxation of the joint selection/beamforming problem, with optional
/// pinned selection coordinates (used by branch-and-bound): `pins[l] =
/// Some(true/false)` appends a zero-cone row fixing z_l to 1/0.
pub fn build_relaxed_pinned(
    cfg: &SystemConfig,
    ch: &Channel,
    pins: &[Option<bool>],
) -> Result<ConeProgram, Error> {
    check_instance(cfg, ch)?;
    if pins.len() != cfg.num_rrhs {
        return Err(Error::DimensionMismatch(format!(
            "{} pins for {} RRHs",
            pins.len(),
            cfg.num_rrhs
        )));
    }

    let mut alloc = VarAlloc::new();
    let beam: Vec<Vec<Option<VarSpan>>> = (0..cfg.num_rrhs)
        .map(|l| {
            (0..cfg.num_users)
                .map(|_| Some(alloc.span(2 * cfg.antennas[l])))
                .collect()
        })
        .collect();
    let aux: Vec<Option<usize>> = (0..cfg.num_rrhs).map(|_| Some(alloc.scalar())).collect();
    let selection: Vec<Option<usize>> = (0..cfg.num_rrhs).map(|_| Some(alloc.scalar())).collect();

    let n = alloc.next;
    let mut objective = vec![0.0; n];
    for l in 0..cfg.num_rrhs {
        objective[aux[l].unwrap()] = 1.0 / cfg.drain_efficiency[l];
        objective[selection[l].unwrap()] = cfg.fronthaul_power_w[l];
    }

    let mut blocks = sinr_blocks(cfg, ch, &beam);
    for l in 0..cfg.num_rrhs {
        // ||group_l|| <= z_l * sqrt(P_l); together with z_l <= 1 this also
        // enforces the per-RRH power cap.
        let mut rows = vec![AffineRow {
            coefficients: vec![(selection[l].unwrap(), cfg.max_tx_power_w[l].sqrt())],
            constant: 0.0,
        }];
        rows.extend(group_component_rows(&beam[l], 1.0));
        blocks.push(ConeBlock {
            kind: ConeKind::SecondOrderCone,
            label: format!("coupling[{l}]"),
            rows,
        });
    }
    for l in 0..cfg.num_rrhs {
        blocks.push(epigraph_block(
            &beam[l],
            aux[l].unwrap(),
            format!("transmit_epi[{l}]"),
        ));
    }
    blocks.push(ConeBlock {
        kind: ConeKind::NonNegative,
        label: "z_lower".into(),
        rows: (0..cfg.num_rrhs)
            .map(|l| AffineRow {
                coefficients: vec![(selection[l].unwrap(), 1.0)],
                constant: 0.0,
            })
            .collect(),
    });
    blocks.push(ConeBlock {
        kind: ConeKind::NonNegative,
        label: "z_upper".into(),
        rows: (0..cfg.num_rrhs)
            .map(|l| AffineRow {
                coefficients: vec![(selection[l].unwrap(), -1.0)],
                constant: 1.0,
            })
            .collect(),
    });
    for (l, pin) in pins.iter().enumerate() {
        if let Some(on) = pin {
            blocks.push(ConeBlock {
                kind: ConeKind::Zero,
                label: format!("z_pin[{l}]"),
                rows: vec![AffineRow {
                    coefficients: vec![(selection[l].unwrap(), 1.0)],
                    constant: if *on { -1.0 } else { 0.0 },
                }],
            });
        }
    }

    Ok(ConeProgram {
        objective,
        objective_constant: 0.0,
        blocks,
        var_map: VarMap {
            num_vars: n,
            beam,
            selection,
            aux,
            aux_is_squared: true,
        },
    })
}

/// Box relaxation without pins: the initialization program and the RMIP
/// relaxation.
pub fn build_relaxed(cfg: &SystemConfig, ch: &Channel) -> Result<ConeProgram, Error> {
    build_relaxed_pinned(cfg, ch, &vec![None; cfg.num_rrhs])
}

/// Convex surrogate of the penalized objective at multiplier `lambda`,
/// majorizing the Lagrangian on the box and touching it at `z_anchor`: the
/// concave penalty lambda*(L/4 - ||z - 1/2||^2) is replaced by its tangent
/// at the anchor, which only shifts the relaxed objective by a linear term
/// -2*lambda*(anchor - 1/2) . z and a constant.
pub fn build_surrogate(
    cfg: &SystemConfig,
    ch: &Channel,
    lambda: f64,
    z_anchor: &Selection,
) -> Result<ConeProgram, Error> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "multiplier must be finite and >= 0, got {lambda}"
        )));
    }
    if z_anchor.len() != cfg.num_rrhs {
        return Err(Error::DimensionMismatch(format!(
            "anchor has {} entries for {} RRHs",
            z_anchor.len(),
            cfg.num_rrhs
        )));
    }
    let mut program = build_relaxed(cfg, ch)?;
    let num_rrhs = cfg.num_rrhs as f64;
    let mut constant = num_rrhs / 4.0;
    for (l, &a) in z_anchor.values().iter().enumerate() {
        let centered = a - 0.5;
        let z_idx = program.var_map.selection[l].expect("relaxed program has z variables");
        program.objective[z_idx] += -2.0 * lambda * centered;
        constant += -centered * centered + 2.0 * centered * a;
    }
    program.objective_constant += lambda * constant;
    Ok(program)
}

/// Weighted group-norm relaxation: minimize sum of w_l * ||group_l|| under
/// the SINR cones and per-RRH power caps. The auxiliary scalars bound the
/// group norms directly (not squared).
pub fn build_group_norm(
    cfg: &SystemConfig,
    ch: &Channel,
    weights: &[f64],
) -> Result<ConeProgram, Error> {
    check_instance(cfg, ch)?;
    if weights.len() != cfg.num_rrhs {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} RRHs",
            weights.len(),
            cfg.num_rrhs
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument("weights must be > 0".into()));
    }

    let mut alloc = VarAlloc::new();
    let beam: Vec<Vec<Option<VarSpan>>> = (0..cfg.num_rrhs)
        .map(|l| {
            (0..cfg.num_users)
                .map(|_| Some(alloc.span(2 * cfg.antennas[l])))
                .collect()
        })
        .collect();
    let aux: Vec<Option<usize>> = (0..cfg.num_rrhs).map(|_| Some(alloc.scalar())).collect();

    let n = alloc.next;
    let mut objective = vec![0.0; n];
    for l in 0..cfg.num_rrhs {
        objective[aux[l].unwrap()] = weights[l];
    }

    let mut blocks = sinr_blocks(cfg, ch, &beam);
    for l in 0..cfg.num_rrhs {
        let mut rows = vec![AffineRow {
            coefficients: vec![(aux[l].unwrap(), 1.0)],
            constant: 0.0,
        }];
        rows.extend(group_component_rows(&beam[l], 1.0));
        blocks.push(ConeBlock {
            kind: ConeKind::SecondOrderCone,
            label: format!("group_norm[{l}]"),
            rows,
        });
    }
    for l in 0..cfg.num_rrhs {
        let mut rows = vec![AffineRow::constant(cfg.max_tx_power_w[l].sqrt())];
        rows.extend(group_component_rows(&beam[l], 1.0));
        blocks.push(ConeBlock {
            kind: ConeKind::SecondOrderCone,
            label: format!("power[{l}]"),
            rows,
        });
    }

    Ok(ConeProgram {
        objective,
        objective_constant: 0.0,
        blocks,
        var_map: VarMap {
            num_vars: n,
            beam,
            selection: vec![None; cfg.num_rrhs],
            aux,
            aux_is_squared: false,
        },
    })
}
