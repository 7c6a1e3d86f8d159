//! System model for a downlink Cloud-RAN: network layout, random channel
//! generation, and exact evaluation of SINR, network power, feasibility, and
//! the sphere residual that drives the binary reformulation of RRH selection.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Error;

/// Convert a target SINR in dB to linear scale.
pub fn sinr_db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Physical and dimensional constants of one network instance.
///
/// All per-RRH fields have length `num_rrhs`; all per-user fields have
/// length `num_users`. SINR targets are stored on linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub num_rrhs: usize,
    pub num_users: usize,
    /// Transmit antennas at each RRH.
    pub antennas: Vec<usize>,
    /// Per-RRH maximum transmit power, watts.
    pub max_tx_power_w: Vec<f64>,
    /// Per-RRH fronthaul link power drawn while the RRH is active, watts.
    pub fronthaul_power_w: Vec<f64>,
    /// Per-RRH amplifier drain efficiency, in (0, 1].
    pub drain_efficiency: Vec<f64>,
    /// Per-user noise power sigma_k^2, watts.
    pub noise_power_w: Vec<f64>,
    /// Per-user SINR target gamma_k, linear scale (>= 0).
    pub sinr_target: Vec<f64>,
    /// RRHs and users are dropped uniformly in [-w, w]^2, meters.
    pub region_halfwidth_m: f64,
    pub pathloss_exponent: f64,
    /// Reference distance below which the large-scale gain is clamped to 1.
    pub pathloss_ref_m: f64,
    /// Base seed used when no explicit per-instance seed is given.
    pub seed: u64,
}

impl SystemConfig {
    /// Default per-RRH transmit power cap, watts. Deliberately tight against
    /// the default noise floor: the selection dynamics of the penalized
    /// ascent only bite when the box relaxation loads the strongest RRHs to
    /// an appreciable fraction of their cap (z near or above one half).
    /// With loose caps the relaxation spreads power thinly, every z sits
    /// near zero, and the sphere penalty has nothing to grab.
    pub const DEFAULT_MAX_TX_POWER_W: f64 = 0.1;
    pub const DEFAULT_FRONTHAUL_POWER_W: f64 = 13.0;
    pub const DEFAULT_DRAIN_EFFICIENCY: f64 = 0.25;
    /// Default noise power, watts. With the default path-loss model
    /// (exponent 3.7, 50 m reference, km-scale region), large-scale gains
    /// sit around 1e-7..1e-3, so a noise floor of 3e-5 W puts
    /// single-digit-dB targets at the edge of what a handful of cooperating
    /// RRHs can serve under the 0.1 W caps. A noise floor near 1 W would
    /// make every instance infeasible at these distances.
    pub const DEFAULT_NOISE_POWER_W: f64 = 3e-5;
    pub const DEFAULT_REGION_HALFWIDTH_M: f64 = 1000.0;
    pub const DEFAULT_PATHLOSS_EXPONENT: f64 = 3.7;
    pub const DEFAULT_PATHLOSS_REF_M: f64 = 50.0;
    pub const DEFAULT_SINR_TARGET_DB: f64 = 4.0;

    /// A config with `antennas` antennas at every RRH and the default
    /// constants everywhere. Fields are public; tests and callers tweak them
    /// directly or through the `with_*` helpers.
    pub fn uniform(num_rrhs: usize, num_users: usize, antennas: usize) -> Self {
        SystemConfig {
            num_rrhs,
            num_users,
            antennas: vec![antennas; num_rrhs],
            max_tx_power_w: vec![Self::DEFAULT_MAX_TX_POWER_W; num_rrhs],
            fronthaul_power_w: vec![Self::DEFAULT_FRONTHAUL_POWER_W; num_rrhs],
            drain_efficiency: vec![Self::DEFAULT_DRAIN_EFFICIENCY; num_rrhs],
            noise_power_w: vec![Self::DEFAULT_NOISE_POWER_W; num_users],
            sinr_target: vec![sinr_db_to_linear(Self::DEFAULT_SINR_TARGET_DB); num_users],
            region_halfwidth_m: Self::DEFAULT_REGION_HALFWIDTH_M,
            pathloss_exponent: Self::DEFAULT_PATHLOSS_EXPONENT,
            pathloss_ref_m: Self::DEFAULT_PATHLOSS_REF_M,
            seed: 0,
        }
    }

    pub fn with_sinr_target_db(mut self, db: f64) -> Self {
        self.sinr_target = vec![sinr_db_to_linear(db); self.num_users];
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn total_antennas(&self) -> usize {
        self.antennas.iter().sum()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let l = self.num_rrhs;
        let k = self.num_users;
        if l == 0 || k == 0 {
            return Err(Error::InvalidConfig(
                "need at least one RRH and one user".into(),
            ));
        }
        let per_rrh: [(&str, usize); 4] = [
            ("antennas", self.antennas.len()),
            ("max_tx_power_w", self.max_tx_power_w.len()),
            ("fronthaul_power_w", self.fronthaul_power_w.len()),
            ("drain_efficiency", self.drain_efficiency.len()),
        ];
        for (name, len) in per_rrh {
            if len != l {
                return Err(Error::InvalidConfig(format!(
                    "{name} has length {len}, expected {l}"
                )));
            }
        }
        let per_user: [(&str, usize); 2] = [
            ("noise_power_w", self.noise_power_w.len()),
            ("sinr_target", self.sinr_target.len()),
        ];
        for (name, len) in per_user {
            if len != k {
                return Err(Error::InvalidConfig(format!(
                    "{name} has length {len}, expected {k}"
                )));
            }
        }
        if self.antennas.iter().any(|&n| n == 0) {
            return Err(Error::InvalidConfig("every RRH needs >= 1 antenna".into()));
        }
        if self.max_tx_power_w.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidConfig("max_tx_power_w must be > 0".into()));
        }
        if self
            .fronthaul_power_w
            .iter()
            .any(|&p| !(p > 0.0) || !p.is_finite())
        {
            return Err(Error::InvalidConfig("fronthaul_power_w must be > 0".into()));
        }
        if self
            .drain_efficiency
            .iter()
            .any(|&e| !(e > 0.0 && e <= 1.0))
        {
            return Err(Error::InvalidConfig(
                "drain_efficiency must lie in (0, 1]".into(),
            ));
        }
        if self.noise_power_w.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig("noise_power_w must be > 0".into()));
        }
        if self.sinr_target.iter().any(|&g| !(g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidConfig("sinr_target must be >= 0".into()));
        }
        if !(self.region_halfwidth_m >= 0.0) || !self.region_halfwidth_m.is_finite() {
            return Err(Error::InvalidConfig(
                "region_halfwidth_m must be >= 0".into(),
            ));
        }
        if !(self.pathloss_ref_m > 0.0) || !self.pathloss_exponent.is_finite() {
            return Err(Error::InvalidConfig(
                "pathloss_ref_m must be > 0 and exponent finite".into(),
            ));
        }
        Ok(())
    }
}

/// Planar positions of RRHs and users, meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub rrh_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
}

impl Topology {
    pub fn distance(&self, user: usize, rrh: usize) -> f64 {
        let u = self.user_positions[user];
        let r = self.rrh_positions[rrh];
        (u[0] - r[0]).hypot(u[1] - r[1])
    }
}

/// Complex channel vectors, one per (user, RRH) pair, entry `[k][l]` of
/// length `antennas[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    entries: Vec<Vec<Vec<Complex64>>>,
}

impl Channel {
    pub fn new(cfg: &SystemConfig, entries: Vec<Vec<Vec<Complex64>>>) -> Result<Self, Error> {
        if entries.len() != cfg.num_users {
            return Err(Error::DimensionMismatch(format!(
                "channel has {} users, config says {}",
                entries.len(),
                cfg.num_users
            )));
        }
        for (k, row) in entries.iter().enumerate() {
            if row.len() != cfg.num_rrhs {
                return Err(Error::DimensionMismatch(format!(
                    "channel row {k} has {} RRHs, config says {}",
                    row.len(),
                    cfg.num_rrhs
                )));
            }
            for (l, h) in row.iter().enumerate() {
                if h.len() != cfg.antennas[l] {
                    return Err(Error::DimensionMismatch(format!(
                        "channel ({k},{l}) has {} entries, RRH has {} antennas",
                        h.len(),
                        cfg.antennas[l]
                    )));
                }
                if h.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "channel ({k},{l}) has non-finite entries"
                    )));
                }
            }
        }
        Ok(Channel { entries })
    }

    pub fn num_users(&self) -> usize {
        self.entries.len()
    }

    pub fn num_rrhs(&self) -> usize {
        self.entries[0].len()
    }

    /// h_kl, the channel from RRH `l` to user `k`.
    pub fn vector(&self, user: usize, rrh: usize) -> &[Complex64] {
        &self.entries[user][rrh]
    }

    /// The aggregate inner product h_k^H v_i over all RRHs.
    pub fn inner_product(&self, user: usize, bf: &Beamformer, stream: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, h) in self.entries[user].iter().enumerate() {
            let v = bf.vector(l, stream);
            for (hj, vj) in h.iter().zip(v) {
                acc += hj.conj() * vj;
            }
        }
        acc
    }

    /// Order-sensitive hash of the exact bit content, used to assert that
    /// concurrent experiment arms consumed identical instances.
    pub fn content_hash(&self) -> u64 {
        const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
        fn mix(mut h: u64, bits: u64) -> u64 {
            for b in bits.to_le_bytes() {
                h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
            }
            h
        }
        let mut h = FNV_OFFSET;
        h = mix(h, self.entries.len() as u64);
        for row in &self.entries {
            h = mix(h, row.len() as u64);
            for vec in row {
                h = mix(h, vec.len() as u64);
                for c in vec {
                    h = mix(h, c.re.to_bits());
                    h = mix(h, c.im.to_bits());
                }
            }
        }
        h
    }
}

/// Transmit beamforming vectors, entry `[l][k]` of length `antennas[l]`,
/// units sqrt(watt). The per-RRH stack over all users is the group whose
/// norm decides whether RRH `l` must stay on.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    v: Vec<Vec<Vec<Complex64>>>,
}

impl Beamformer {
    pub fn zeros(cfg: &SystemConfig) -> Self {
        let v = (0..cfg.num_rrhs)
            .map(|l| vec![vec![Complex64::new(0.0, 0.0); cfg.antennas[l]]; cfg.num_users])
            .collect();
        Beamformer { v }
    }

    pub fn new(cfg: &SystemConfig, v: Vec<Vec<Vec<Complex64>>>) -> Result<Self, Error> {
        if v.len() != cfg.num_rrhs {
            return Err(Error::DimensionMismatch(format!(
                "beamformer has {} RRHs, config says {}",
                v.len(),
                cfg.num_rrhs
            )));
        }
        for (l, per_user) in v.iter().enumerate() {
            if per_user.len() != cfg.num_users {
                return Err(Error::DimensionMismatch(format!(
                    "beamformer RRH {l} has {} users, config says {}",
                    per_user.len(),
                    cfg.num_users
                )));
            }
            for (k, vec) in per_user.iter().enumerate() {
                if vec.len() != cfg.antennas[l] {
                    return Err(Error::DimensionMismatch(format!(
                        "beamformer ({l},{k}) has {} entries, RRH has {} antennas",
                        vec.len(),
                        cfg.antennas[l]
                    )));
                }
                if vec.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "beamformer ({l},{k}) has non-finite entries"
                    )));
                }
            }
        }
        Ok(Beamformer { v })
    }

    pub fn num_rrhs(&self) -> usize {
        self.v.len()
    }

    pub fn num_users(&self) -> usize {
        self.v[0].len()
    }

    /// v_lk, the vector RRH `l` uses for user `k`'s stream.
    pub fn vector(&self, rrh: usize, user: usize) -> &[Complex64] {
        &self.v[rrh][user]
    }

    pub fn vector_mut(&mut self, rrh: usize, user: usize) -> &mut [Complex64] {
        &mut self.v[rrh][user]
    }

    /// Squared norm of the per-RRH stack over all users.
    pub fn rrh_norm_sq(&self, rrh: usize) -> f64 {
        self.v[rrh]
            .iter()
            .flat_map(|vec| vec.iter())
            .map(|c| c.norm_sqr())
            .sum()
    }

    pub fn rrh_norm(&self, rrh: usize) -> f64 {
        self.rrh_norm_sq(rrh).sqrt()
    }

    /// Rotate every per-RRH component of user `k`'s stream by a common
    /// unit-modulus factor.
    pub fn rotate_user(&mut self, user: usize, factor: Complex64) {
        for per_user in &mut self.v {
            for c in &mut per_user[user] {
                *c *= factor;
            }
        }
    }

    /// Frobenius norm of the difference, over all entries.
    pub fn frobenius_diff(&self, other: &Beamformer) -> f64 {
        let mut acc = 0.0;
        for (a_rrh, b_rrh) in self.v.iter().zip(&other.v) {
            for (a_vec, b_vec) in a_rrh.iter().zip(b_rrh) {
                for (a, b) in a_vec.iter().zip(b_vec) {
                    acc += (a - b).norm_sqr();
                }
            }
        }
        acc.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    Relaxed,
    Binary,
}

/// Per-RRH activity vector; relaxed entries live in [0,1], binary entries
/// are exactly 0.0 or 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    z: Vec<f64>,
    mode: SelectionMode,
}

impl Selection {
    /// Build a relaxed selection. Values may stray outside [0,1] by at most
    /// 1e-9 (solver noise) and are clamped back onto the box.
    pub fn relaxed(values: Vec<f64>) -> Result<Self, Error> {
        const SLACK: f64 = 1e-9;
        let mut z = values;
        for v in &mut z {
            if !v.is_finite() || *v < -SLACK || *v > 1.0 + SLACK {
                return Err(Error::InvalidArgument(format!(
                    "relaxed selection entry {v} outside [0,1]"
                )));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Selection {
            z,
            mode: SelectionMode::Relaxed,
        })
    }

    pub fn binary_from_values(values: Vec<f64>) -> Result<Self, Error> {
        if values.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidArgument(
                "binary selection entries must be exactly 0 or 1".into(),
            ));
        }
        Ok(Selection {
            z: values,
            mode: SelectionMode::Binary,
        })
    }

    /// Binary selection with the listed RRHs on.
    pub fn from_active(num_rrhs: usize, active: &[usize]) -> Self {
        let mut z = vec![0.0; num_rrhs];
        for &l in active {
            z[l] = 1.0;
        }
        Selection {
            z,
            mode: SelectionMode::Binary,
        }
    }

    pub fn all_on(num_rrhs: usize) -> Self {
        Selection {
            z: vec![1.0; num_rrhs],
            mode: SelectionMode::Binary,
        }
    }

    pub fn all_off(num_rrhs: usize) -> Self {
        Selection {
            z: vec![0.0; num_rrhs],
            mode: SelectionMode::Binary,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn mode(&self) -> SelectionMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn is_binary_exact(&self) -> bool {
        self.z.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Indices with z > 1/2, ascending.
    pub fn active_indices(&self) -> Vec<usize> {
        self.z
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.5)
            .map(|(l, _)| l)
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.z.iter().filter(|&&v| v > 0.5).count()
    }

    /// One character per RRH, '1' when active.
    pub fn bitstring(&self) -> String {
        self.z
            .iter()
            .map(|&v| if v > 0.5 { '1' } else { '0' })
            .collect()
    }
}

/// Per-constraint feasibility breakdown at a given tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// Per user: interference-plus-noise norm within the scaled desired
    /// signal, i.e. the SINR target is met.
    pub sinr_ok: Vec<bool>,
    /// Per RRH: group transmit norm within the selection-scaled power cap.
    pub power_ok: Vec<bool>,
    pub max_sinr_violation: f64,
    pub max_power_violation: f64,
    pub feasible: bool,
}

/// Drop RRHs and users uniformly at random in the configured square.
/// Deterministic in (cfg dimensions, seed); the RRH points are drawn first.
pub fn generate_topology(cfg: &SystemConfig, seed: u64) -> Topology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hw = cfg.region_halfwidth_m;
    let point = move |rng: &mut ChaCha8Rng| -> [f64; 2] {
        if hw == 0.0 {
            return [0.0, 0.0];
        }
        [rng.random_range(-hw..=hw), rng.random_range(-hw..=hw)]
    };
    let rrh_positions = (0..cfg.num_rrhs).map(|_| point(&mut rng)).collect();
    let user_positions = (0..cfg.num_users).map(|_| point(&mut rng)).collect();
    Topology {
        rrh_positions,
        user_positions,
    }
}

/// Rayleigh-faded channel with power-law path loss: each entry is
/// sqrt(g_kl) * w with w circularly-symmetric standard normal and
/// g_kl = (max(d_kl, d_ref)/d_ref)^(-exponent). Deterministic in seed;
/// draws run user-major, then RRH, then antenna.
pub fn generate_channel(cfg: &SystemConfig, topo: &Topology, seed: u64) -> Channel {
    assert_eq!(topo.rrh_positions.len(), cfg.num_rrhs, "topology/config RRH mismatch");
    assert_eq!(topo.user_positions.len(), cfg.num_users, "topology/config user mismatch");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(cfg.num_users);
    for k in 0..cfg.num_users {
        let mut row = Vec::with_capacity(cfg.num_rrhs);
        for l in 0..cfg.num_rrhs {
            let d = topo.distance(k, l).max(cfg.pathloss_ref_m);
            let gain = (d / cfg.pathloss_ref_m).powf(-cfg.pathloss_exponent);
            // sqrt(g) * (x + iy)/sqrt(2) keeps E[|entry|^2] = g.
            let scale = (gain / 2.0).sqrt();
            let vec = (0..cfg.antennas[l])
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * scale, im * scale)
                })
                .collect();
            row.push(vec);
        }
        entries.push(row);
    }
    Channel { entries }
}

/// Total network power: fronthaul power of the selected RRHs plus
/// efficiency-scaled transmit power, watts.
pub fn network_power(cfg: &SystemConfig, sel: &Selection, bf: &Beamformer) -> f64 {
    assert_eq!(sel.len(), cfg.num_rrhs);
    assert_eq!(bf.num_rrhs(), cfg.num_rrhs);
    let mut total = 0.0;
    for l in 0..cfg.num_rrhs {
        total += cfg.fronthaul_power_w[l] * sel.values()[l];
        total += bf.rrh_norm_sq(l) / cfg.drain_efficiency[l];
    }
    total
}

/// Received SINR of user `k` under beamformer `bf`, linear scale.
pub fn sinr(cfg: &SystemConfig, ch: &Channel, bf: &Beamformer, user: usize) -> f64 {
    assert!(user < cfg.num_users);
    let desired = ch.inner_product(user, bf, user).norm_sqr();
    let mut denom = cfg.noise_power_w[user];
    for i in 0..cfg.num_users {
        if i != user {
            denom += ch.inner_product(user, bf, i).norm_sqr();
        }
    }
    desired / denom
}

/// Check the convex (cone) form of every constraint at tolerance `tol`:
/// per user, sqrt(interference + noise) <= Re(h_k^H v_k)/sqrt(gamma_k) + tol
/// (trivially satisfied when gamma_k = 0); per RRH, ||group|| <= z_l *
/// sqrt(P_l) + tol. The cone form of the SINR requirement assumes the
/// desired inner product has been phase-rotated onto the real axis; see
/// [`phase_normalize`].
pub fn check_feasibility(
    cfg: &SystemConfig,
    ch: &Channel,
    bf: &Beamformer,
    sel: &Selection,
    tol: f64,
) -> FeasibilityReport {
    assert!(tol >= 0.0);
    let mut sinr_ok = Vec::with_capacity(cfg.num_users);
    let mut max_sinr_violation = 0.0f64;
    for k in 0..cfg.num_users {
        let gamma = cfg.sinr_target[k];
        if gamma == 0.0 {
            sinr_ok.push(true);
            continue;
        }
        let mut lhs_sq = cfg.noise_power_w[k];
        for i in 0..cfg.num_users {
            if i != k {
                lhs_sq += ch.inner_product(k, bf, i).norm_sqr();
            }
        }
        let lhs = lhs_sq.sqrt();
        let scaled_signal = ch.inner_product(k, bf, k).re / gamma.sqrt();
        let violation = lhs - scaled_signal;
        sinr_ok.push(violation <= tol);
        max_sinr_violation = max_sinr_violation.max(violation);
    }
    let mut power_ok = Vec::with_capacity(cfg.num_rrhs);
    let mut max_power_violation = 0.0f64;
    for l in 0..cfg.num_rrhs {
        let cap = sel.values()[l] * cfg.max_tx_power_w[l].sqrt();
        let violation = bf.rrh_norm(l) - cap;
        power_ok.push(violation <= tol);
        max_power_violation = max_power_violation.max(violation);
    }
    let feasible = sinr_ok.iter().all(|&b| b) && power_ok.iter().all(|&b| b);
    FeasibilityReport {
        sinr_ok,
        power_ok,
        max_sinr_violation: max_sinr_violation.max(0.0),
        max_power_violation: max_power_violation.max(0.0),
        feasible,
    }
}

/// Rotate each user's stream by a unit-modulus factor so the desired inner
/// product h_k^H v_k lands on the nonnegative real axis. Leaves every group
/// norm and every SINR untouched.
pub fn phase_normalize(ch: &Channel, bf: &Beamformer) -> Beamformer {
    let mut out = bf.clone();
    for k in 0..bf.num_users() {
        let desired = ch.inner_product(k, bf, k);
        let mag = desired.norm();
        if mag > 0.0 {
            out.rotate_user(k, desired.conj() / mag);
        }
    }
    out
}

/// Distance of a point in the unit box from the sphere that carves out its
/// vertices: L/4 - ||z - 1/2|| ^2. Nonnegative on the box, exactly zero iff
/// every entry is binary.
pub fn sphere_residual(sel: &Selection) -> f64 {
    let z = sel.values();
    debug_assert!(z.iter().all(|&v| (0.0..=1.0).contains(&v)));
    let dist_sq: f64 = z.iter().map(|&v| (v - 0.5) * (v - 0.5)).sum();
    z.len() as f64 / 4.0 - dist_sq
}
