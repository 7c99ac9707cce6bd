//! Scenario files and the seeded construction of a [`Scenario`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use sensedag_core::graph::{build_dag, CostRanges, DagGraph, DagTopologySpec, GraphError};
use sensedag_core::sensing::{BandSpec, SensingParams, SinrTrace, BITS_PER_KB};
use sensedag_core::{derive_seed, PolicyConfig, PolicyError, Scenario};

/// Stream tag for graph costs ("graph" in ASCII).
pub const GRAPH_STREAM: u64 = 0x6772_6170_6800_0000;
/// Stream tag for the SINR trace ("sinr" in ASCII).
pub const SINR_STREAM: u64 = 0x7369_6e72_0000_0000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// Seeded scenario description. Missing fields take the reference defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "C")]
    pub c: usize,
    pub branch_node_counts: Vec<usize>,
    pub align_groups: Vec<u32>,
    pub fusion_head: bool,
    #[serde(rename = "eta_kB")]
    pub eta_kb: Vec<f64>,
    pub bandwidth_hz: f64,
    pub sinr_range_db: [f64; 2],
    pub sinr_threshold_db: f64,
    #[serde(rename = "T_max")]
    pub t_max: u32,
    pub slot_ms: f64,
    /// Spectral efficiency cap, bit/s/Hz.
    pub max_spectral_eff: f64,
    pub cost_ranges: CostRanges,
    pub seed: u64,
    pub policy: PolicyConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            k: 6,
            c: 4,
            branch_node_counts: vec![5, 6, 7, 6, 8, 6],
            align_groups: vec![1, 1, 1, 2, 2, 2],
            fusion_head: true,
            eta_kb: vec![0.2, 1.5, 5.0, 2.0, 7.0, 10.0],
            bandwidth_hz: 180_000.0,
            sinr_range_db: [5.0, 20.0],
            sinr_threshold_db: 6.0,
            t_max: 2000,
            slot_ms: 1.0,
            max_spectral_eff: 8.0,
            cost_ranges: CostRanges::reference(),
            seed: 0,
            policy: PolicyConfig::joint(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn graph_seed(&self) -> u64 {
        derive_seed(self.seed, GRAPH_STREAM)
    }

    pub fn sinr_seed(&self) -> u64 {
        derive_seed(self.seed, SINR_STREAM)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return invalid("K must be at least 1");
        }
        if self.c == 0 {
            return invalid("C must be at least 1");
        }
        for (name, len) in [
            ("branch_node_counts", self.branch_node_counts.len()),
            ("align_groups", self.align_groups.len()),
            ("eta_kB", self.eta_kb.len()),
        ] {
            if len != self.k {
                return invalid(format!("{name} has {len} entries but K = {}", self.k));
            }
        }
        if let Some(e) = self.eta_kb.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return invalid(format!("eta_kB entries must be positive, got {e}"));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return invalid("bandwidth_hz must be positive");
        }
        let [lo, hi] = self.sinr_range_db;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return invalid(format!("sinr_range_db [{lo}, {hi}] is not a valid range"));
        }
        if !self.sinr_threshold_db.is_finite() {
            return invalid("sinr_threshold_db must be finite");
        }
        if self.t_max == 0 {
            return invalid("T_max must be at least 1");
        }
        if !(self.slot_ms.is_finite() && self.slot_ms > 0.0) {
            return invalid("slot_ms must be positive");
        }
        if !(self.max_spectral_eff.is_finite() && self.max_spectral_eff > 0.0) {
            return invalid("max_spectral_eff must be positive");
        }
        Ok(())
    }

    pub fn topology(&self) -> DagTopologySpec {
        DagTopologySpec {
            branch_node_counts: self.branch_node_counts.clone(),
            align_groups: self.align_groups.clone(),
            fusion_head: self.fusion_head,
            cost_ranges: self.cost_ranges,
            seed: self.graph_seed(),
        }
    }

    pub fn build_graph(&self) -> Result<DagGraph, ConfigError> {
        self.validate()?;
        Ok(build_dag(&self.topology())?)
    }

    pub fn build_scenario(&self) -> Result<Scenario, ConfigError> {
        let graph = self.build_graph()?;
        let mut bands = Vec::with_capacity(self.k);
        for (i, &eta) in self.eta_kb.iter().enumerate() {
            let band = i as u32 + 1;
            let Some(entry) = graph.entry_of_branch(band) else {
                return invalid(format!("generated graph has no entry for branch {band}"));
            };
            bands.push(BandSpec {
                band,
                eta_bits: eta * BITS_PER_KB,
                bandwidth_hz: self.bandwidth_hz,
                sinr_threshold_db: self.sinr_threshold_db,
                entry,
            });
        }
        let [lo, hi] = self.sinr_range_db;
        let sinr = SinrTrace::generate(self.sinr_seed(), lo, hi, self.k, self.t_max);
        let scenario = Scenario {
            graph,
            bands,
            sinr,
            params: SensingParams {
                slot_ms: self.slot_ms,
                max_spectral_eff: self.max_spectral_eff,
                t_max: self.t_max,
            },
            cores: self.c,
        };
        scenario.check().map_err(|e| match e {
            PolicyError::Scenario(m) => ConfigError::Invalid(m),
            other => ConfigError::Invalid(other.to_string()),
        })?;
        Ok(scenario)
    }
}
