//! Monte-Carlo experiment harness: config ingestion, trial execution across
//! algorithms and SINR targets, and CSV emission of per-run records,
//! aggregates, and convergence traces.

mod config;
mod emit;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::gsbf;
use crate::l2box::{self, L2BoxSettings};
use crate::mip::{self, BnbSettings};
use crate::model::{generate_channel, generate_topology, Channel, SystemConfig, Topology};
use crate::result::AlgoResult;

pub use config::{load_config, parse_config_str};
pub use emit::{emit_results, emit_trace, summarize, SummaryRow};

/// Channel draws use the trial seed XORed with this constant so topology and
/// fading never share a stream (64-bit golden-ratio constant).
pub const CHANNEL_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Exhaustive enumeration is skipped (status "skipped") above this many RRHs;
/// 2^L cone solves per run grow out of hand quickly.
pub const MIP_ENUM_MAX_RRHS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    L2Box,
    Gsbf,
    Rmip,
    MipEnum,
    MipBnb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::L2Box,
        Algorithm::Gsbf,
        Algorithm::Rmip,
        Algorithm::MipEnum,
        Algorithm::MipBnb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::L2Box => "l2box",
            Algorithm::Gsbf => "gsbf",
            Algorithm::Rmip => "rmip",
            Algorithm::MipEnum => "mip_enum",
            Algorithm::MipBnb => "mip_bnb",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown algorithm {s:?}; expected one of l2box, gsbf, rmip, mip_enum, mip_bnb"
                ))
            })
    }
}

/// A full experiment: one base configuration swept over SINR targets, with
/// `trials` independent topology/channel draws shared by every algorithm.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub base_config: SystemConfig,
    pub sinr_targets_db: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub parallelism: usize,
    /// Record wall-clock times. Off by default so repeated runs of the same
    /// spec emit byte-identical CSVs.
    pub record_timing: bool,
}

impl ExperimentSpec {
    /// The evaluation protocol configuration: 10 RRHs with 2 antennas each,
    /// 6 users, default powers, 25 trials over {0,2,4,6,8} dB.
    pub fn protocol_default() -> Self {
        let base_config = SystemConfig::uniform(10, 6, 2);
        ExperimentSpec {
            base_seed: base_config.seed,
            base_config,
            sinr_targets_db: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            trials: 25,
            algorithms: vec![Algorithm::L2Box, Algorithm::Gsbf, Algorithm::Rmip],
            output_dir: PathBuf::from("out"),
            parallelism: 1,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.base_config.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("algorithms must be nonempty".into()));
        }
        let mut seen = self.algorithms.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return Err(Error::InvalidConfig("duplicate algorithm listed".into()));
        }
        if self.sinr_targets_db.is_empty() {
            return Err(Error::InvalidConfig(
                "sinr_targets_db must be nonempty".into(),
            ));
        }
        if self.sinr_targets_db.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig(
                "sinr_targets_db entries must be finite".into(),
            ));
        }
        if self.parallelism == 0 {
            return Err(Error::InvalidConfig("parallelism must be >= 1".into()));
        }
        Ok(())
    }
}

/// One algorithm run on one instance at one target; a row of the detail CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub trial: usize,
    pub seed: u64,
    pub algo: String,
    pub sinr_db: f64,
    pub status: String,
    pub power_w: f64,
    pub active_count: usize,
    /// One character per RRH, '1' = active, e.g. "0110".
    pub active_set: String,
    pub outer_iterations: usize,
    pub solver_calls: usize,
    pub wall_ms: f64,
}

impl ResultRecord {
    fn from_result(
        trial: usize,
        seed: u64,
        algo: Algorithm,
        sinr_db: f64,
        result: &AlgoResult,
        wall_ms: f64,
    ) -> Self {
        ResultRecord {
            trial,
            seed,
            algo: algo.as_str().to_owned(),
            sinr_db,
            status: result.status.as_str().to_owned(),
            power_w: result.power_w,
            active_count: result.active_set.len(),
            active_set: result.z_final.bitstring(),
            outer_iterations: result.outer_iterations,
            solver_calls: result.inner_solves,
            wall_ms,
        }
    }

    fn placeholder(
        trial: usize,
        seed: u64,
        algo: Algorithm,
        sinr_db: f64,
        cfg: &SystemConfig,
        status: &str,
    ) -> Self {
        ResultRecord {
            trial,
            seed,
            algo: algo.as_str().to_owned(),
            sinr_db,
            status: status.to_owned(),
            power_w: f64::NAN,
            active_count: 0,
            active_set: "0".repeat(cfg.num_rrhs),
            outer_iterations: 0,
            solver_calls: 0,
            wall_ms: 0.0,
        }
    }

    /// Rows that enter feasible-only aggregates.
    pub fn is_feasible(&self) -> bool {
        self.status == "converged" || self.status == "outer_limit"
    }
}

/// The shared instance of a trial: topology and channel depend only on the
/// base configuration and `base_seed + trial`, never on the SINR target, so
/// every algorithm at every target sees identical data.
pub fn build_instance(cfg: &SystemConfig, base_seed: u64, trial: usize) -> (Topology, Channel) {
    let trial_seed = base_seed.wrapping_add(trial as u64);
    let topo = generate_topology(cfg, trial_seed);
    let ch = generate_channel(cfg, &topo, trial_seed ^ CHANNEL_SEED_SALT);
    (topo, ch)
}

/// Dispatch one algorithm with its default settings.
pub fn run_algorithm(algo: Algorithm, cfg: &SystemConfig, ch: &Channel) -> Result<AlgoResult, Error> {
    match algo {
        Algorithm::L2Box => l2box::run_l2box(cfg, ch, &L2BoxSettings::default()),
        Algorithm::Gsbf => gsbf::run_gsbf(cfg, ch),
        Algorithm::Rmip => mip::run_rmip(cfg, ch),
        Algorithm::MipEnum => mip::enumerate_optimal(cfg, ch),
        Algorithm::MipBnb => mip::branch_and_bound(cfg, ch, &BnbSettings::default()),
    }
}

fn run_trial(spec: &ExperimentSpec, trial: usize) -> Vec<ResultRecord> {
    let (_, ch) = build_instance(&spec.base_config, spec.base_seed, trial);
    let hash = ch.content_hash();
    log::info!("trial {trial}: channel hash {hash:016x}");
    let seed = spec.base_seed.wrapping_add(trial as u64);
    let mut out = Vec::with_capacity(spec.sinr_targets_db.len() * spec.algorithms.len());
    for &target_db in &spec.sinr_targets_db {
        let cfg = spec.base_config.clone().with_sinr_target_db(target_db);
        for &algo in &spec.algorithms {
            assert_eq!(ch.content_hash(), hash, "channel mutated within trial");
            if algo == Algorithm::MipEnum && cfg.num_rrhs > MIP_ENUM_MAX_RRHS {
                log::warn!(
                    "trial {trial}: skipping mip_enum, {} RRHs exceeds cap {MIP_ENUM_MAX_RRHS}",
                    cfg.num_rrhs
                );
                out.push(ResultRecord::placeholder(
                    trial, seed, algo, target_db, &cfg, "skipped",
                ));
                continue;
            }
            let started = Instant::now();
            let run = run_algorithm(algo, &cfg, &ch);
            let wall_ms = if spec.record_timing {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            out.push(match run {
                Ok(result) => {
                    ResultRecord::from_result(trial, seed, algo, target_db, &result, wall_ms)
                }
                Err(e) => {
                    log::warn!("trial {trial} {algo} at {target_db} dB failed: {e}");
                    ResultRecord::placeholder(trial, seed, algo, target_db, &cfg, "error")
                }
            });
        }
    }
    out
}

/// Run every (trial, target, algorithm) combination. Trials are independent
/// work units; the final sort by (sinr_db, algo, trial) makes the record list
/// identical for any degree of parallelism.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRecord>, Error> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let mut records: Vec<ResultRecord> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .flat_map_iter(|trial| run_trial(spec, trial))
            .collect()
    });
    records.sort_by(|a, b| {
        a.sinr_db
            .total_cmp(&b.sinr_db)
            .then_with(|| a.algo.cmp(&b.algo))
            .then(a.trial.cmp(&b.trial))
    });
    Ok(records)
}

/// Run a single algorithm on one trial's instance at the base configuration's
/// own SINR targets, for convergence-trace inspection. Only the dual-ascent
/// algorithm produces a trace.
pub fn run_trace(spec: &ExperimentSpec, algo: Algorithm, trial: usize) -> Result<AlgoResult, Error> {
    spec.validate()?;
    if trial >= spec.trials {
        return Err(Error::InvalidArgument(format!(
            "trial {trial} out of range (trials = {})",
            spec.trials
        )));
    }
    if algo != Algorithm::L2Box {
        return Err(Error::InvalidArgument(format!(
            "{algo} records no convergence trace; use l2box"
        )));
    }
    let (_, ch) = build_instance(&spec.base_config, spec.base_seed, trial);
    run_algorithm(algo, &spec.base_config, &ch)
}
