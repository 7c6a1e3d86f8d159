//! JSON experiment configuration. Keys mirror the domain names: the
//! `base_config` block uses the symbol-style names (`L`, `K`, `N_l`,
//! `P_max_l`, ...) with per-RRH / per-user entries accepted either as one
//! scalar broadcast to every index or as a full-length list; the
//! `experiment` block mirrors `ExperimentSpec`. Every key is optional except
//! `schema_version`, which must be 1. SINR figures in the file are in dB.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::Error;
use crate::model::{sinr_db_to_linear, SystemConfig};

use super::{Algorithm, ExperimentSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// A scalar broadcast over all indices, or one value per index.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ScalarOrVec {
    Scalar(f64),
    PerIndex(Vec<f64>),
}

impl ScalarOrVec {
    fn broadcast(&self, len: usize, key: &str) -> Result<Vec<f64>, Error> {
        match self {
            ScalarOrVec::Scalar(v) => Ok(vec![*v; len]),
            ScalarOrVec::PerIndex(v) if v.len() == len => Ok(v.clone()),
            ScalarOrVec::PerIndex(v) => Err(Error::ConfigParse(format!(
                "{key}: expected {len} entries, got {}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum CountOrVec {
    Scalar(usize),
    PerIndex(Vec<usize>),
}

impl CountOrVec {
    fn broadcast(&self, len: usize, key: &str) -> Result<Vec<usize>, Error> {
        match self {
            CountOrVec::Scalar(v) => Ok(vec![*v; len]),
            CountOrVec::PerIndex(v) if v.len() == len => Ok(v.clone()),
            CountOrVec::PerIndex(v) => Err(Error::ConfigParse(format!(
                "{key}: expected {len} entries, got {}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct BaseConfigJson {
    L: Option<usize>,
    K: Option<usize>,
    N_l: Option<CountOrVec>,
    P_max_l: Option<ScalarOrVec>,
    P_fronthaul_l: Option<ScalarOrVec>,
    eta_l: Option<ScalarOrVec>,
    noise_power_k: Option<ScalarOrVec>,
    gamma_k_db: Option<ScalarOrVec>,
    region_halfwidth_m: Option<f64>,
    pathloss_exponent: Option<f64>,
    pathloss_ref_m: Option<f64>,
    seed: Option<u64>,
}

impl Default for BaseConfigJson {
    fn default() -> Self {
        BaseConfigJson {
            L: None,
            K: None,
            N_l: None,
            P_max_l: None,
            P_fronthaul_l: None,
            eta_l: None,
            noise_power_k: None,
            gamma_k_db: None,
            region_halfwidth_m: None,
            pathloss_exponent: None,
            pathloss_ref_m: None,
            seed: None,
        }
    }
}

impl BaseConfigJson {
    fn build(&self) -> Result<SystemConfig, Error> {
        let l = self.L.unwrap_or(10);
        let k = self.K.unwrap_or(6);
        if l == 0 || k == 0 {
            return Err(Error::ConfigParse("L and K must be >= 1".into()));
        }
        let mut cfg = SystemConfig::uniform(l, k, 2);
        if let Some(n) = &self.N_l {
            cfg.antennas = n.broadcast(l, "N_l")?;
        }
        if let Some(p) = &self.P_max_l {
            cfg.max_tx_power_w = p.broadcast(l, "P_max_l")?;
        }
        if let Some(p) = &self.P_fronthaul_l {
            cfg.fronthaul_power_w = p.broadcast(l, "P_fronthaul_l")?;
        }
        if let Some(eta) = &self.eta_l {
            cfg.drain_efficiency = eta.broadcast(l, "eta_l")?;
        }
        if let Some(n) = &self.noise_power_k {
            cfg.noise_power_w = n.broadcast(k, "noise_power_k")?;
        }
        if let Some(g) = &self.gamma_k_db {
            cfg.sinr_target = g
                .broadcast(k, "gamma_k_db")?
                .into_iter()
                .map(sinr_db_to_linear)
                .collect();
        }
        if let Some(v) = self.region_halfwidth_m {
            cfg.region_halfwidth_m = v;
        }
        if let Some(v) = self.pathloss_exponent {
            cfg.pathloss_exponent = v;
        }
        if let Some(v) = self.pathloss_ref_m {
            cfg.pathloss_ref_m = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentJson {
    sinr_targets_db: Option<Vec<f64>>,
    trials: Option<usize>,
    algorithms: Option<Vec<String>>,
    base_seed: Option<u64>,
    output_dir: Option<PathBuf>,
    parallelism: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    #[serde(default)]
    base_config: BaseConfigJson,
    #[serde(default)]
    experiment: ExperimentJson,
}

/// Parse a configuration document into a validated experiment spec.
pub fn parse_config_str(text: &str) -> Result<ExperimentSpec, Error> {
    let file: ConfigFile =
        serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::ConfigParse(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    let base_config = file.base_config.build()?;
    let exp = file.experiment;
    let algorithms = match exp.algorithms {
        None => vec![Algorithm::L2Box, Algorithm::Gsbf, Algorithm::Rmip],
        Some(names) => names
            .iter()
            .map(|n| n.parse())
            .collect::<Result<Vec<Algorithm>, Error>>()?,
    };
    let spec = ExperimentSpec {
        base_seed: exp.base_seed.unwrap_or(base_config.seed),
        sinr_targets_db: exp
            .sinr_targets_db
            .unwrap_or_else(|| vec![0.0, 2.0, 4.0, 6.0, 8.0]),
        trials: exp.trials.unwrap_or(25),
        algorithms,
        output_dir: exp.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        parallelism: exp.parallelism.unwrap_or(1),
        record_timing: false,
        base_config,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}
