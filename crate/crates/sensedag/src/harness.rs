//! Scenario runs and parameter sweeps.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use sensedag_core::policies::verify_run;
use sensedag_core::{run_policy, PolicyError, PolicyKind, RunResult, Scenario};

use crate::config::{ConfigError, ScenarioConfig};

/// Relative tolerance used when replaying sensing traces.
pub const REPLAY_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("invariant violation: {}", .0.join("; "))]
    Invariant(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Hex SHA-256 of any serializable value's compact JSON form.
pub fn json_sha256<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Builds the scenario for `cfg` and runs its configured policy.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult, HarnessError> {
    let scenario = cfg.build_scenario()?;
    Ok(run_policy(&scenario, &cfg.policy)?)
}

/// Runs `kind` on a prepared scenario and re-checks the result.
fn run_checked(
    scenario: &Scenario,
    cfg: &ScenarioConfig,
    kind: PolicyKind,
) -> Result<Result<RunResult, PolicyError>, HarnessError> {
    let policy = cfg.policy.with_kind(kind);
    match run_policy(scenario, &policy) {
        Ok(r) => {
            let v = verify_run(scenario, &r, REPLAY_TOL);
            if !v.is_empty() {
                return Err(HarnessError::Invariant(v));
            }
            Ok(Ok(r))
        }
        Err(e) => Ok(Err(e)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Cores,
    Bandwidth,
    SinrThreshold,
    EtaProfile,
    NodeProfile,
}

impl Axis {
    /// Documented default grids for the numeric axes; bandwidth is in Hz.
    pub fn default_values(self) -> Vec<Value> {
        match self {
            Axis::Cores => [2, 4, 6, 8].iter().map(|&c| Value::from(c)).collect(),
            Axis::Bandwidth => (1..=5).map(|i| Value::from(60_000 * i)).collect(),
            Axis::SinrThreshold => [2, 4, 6, 8, 10].iter().map(|&c| Value::from(c)).collect(),
            Axis::EtaProfile | Axis::NodeProfile => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: ScenarioConfig,
    pub axis: Axis,
    pub values: Vec<Value>,
    pub seeds: Vec<u64>,
}

fn bad_value<T>(axis: Axis, v: &Value, what: &str) -> Result<T, HarnessError> {
    Err(HarnessError::Sweep(format!(
        "{axis:?} value {v} is not {what}"
    )))
}

/// Applies one axis value to a base config.
///
/// `eta_profile` values are per-band lists where `null` drops the band and its
/// branch; the remaining align groups are renumbered densely.
pub fn apply_axis(
    base: &ScenarioConfig,
    axis: Axis,
    v: &Value,
) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = base.clone();
    match axis {
        Axis::Cores => match v.as_u64() {
            Some(c) if c >= 1 => cfg.c = c as usize,
            _ => return bad_value(axis, v, "a positive integer"),
        },
        Axis::Bandwidth => match v.as_f64() {
            Some(b) => cfg.bandwidth_hz = b,
            None => return bad_value(axis, v, "a number"),
        },
        Axis::SinrThreshold => match v.as_f64() {
            Some(t) => cfg.sinr_threshold_db = t,
            None => return bad_value(axis, v, "a number"),
        },
        Axis::EtaProfile => {
            let Some(list) = v.as_array().filter(|l| l.len() == base.k) else {
                return bad_value(axis, v, "a list with one entry per band");
            };
            let mut eta = Vec::new();
            let mut counts = Vec::new();
            let mut groups = Vec::new();
            for (k, x) in list.iter().enumerate() {
                if x.is_null() {
                    continue;
                }
                let Some(e) = x.as_f64() else {
                    return bad_value(axis, v, "a list of numbers or nulls");
                };
                eta.push(e);
                counts.push(base.branch_node_counts[k]);
                groups.push(base.align_groups[k]);
            }
            if eta.is_empty() {
                return bad_value(axis, v, "a profile with at least one band");
            }
            let mut distinct = groups.clone();
            distinct.sort_unstable();
            distinct.dedup();
            for g in &mut groups {
                *g = distinct.binary_search(g).expect("present") as u32 + 1;
            }
            cfg.k = eta.len();
            cfg.eta_kb = eta;
            cfg.branch_node_counts = counts;
            cfg.align_groups = groups;
        }
        Axis::NodeProfile => {
            let counts: Option<Vec<usize>> = v
                .as_array()
                .filter(|l| l.len() == base.k)
                .and_then(|l| l.iter().map(|x| x.as_u64().map(|n| n as usize)).collect());
            match counts {
                Some(c) => cfg.branch_node_counts = c,
                None => return bad_value(axis, v, "a list of node counts, one per band"),
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Ok(Self::from_json(&text)?)
    }

    /// Expands the axis into one base config per value.
    pub fn configs(&self) -> Result<Vec<ScenarioConfig>, HarnessError> {
        if self.values.is_empty() {
            return Err(HarnessError::Sweep("no axis values".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Sweep("no seeds".into()));
        }
        self.base.validate()?;
        self.values
            .iter()
            .map(|v| apply_axis(&self.base, self.axis, v))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: Axis,
    pub value: String,
    pub seed: u64,
    pub policy: PolicyKind,
    #[serde(rename = "T_total_ms")]
    pub t_total_ms: f64,
    pub release_min_ms: f64,
    pub release_max_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub axis: Axis,
    pub value: String,
    pub mean_gain_pct: f64,
    pub std_gain_pct: f64,
    pub n_seeds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub axis: Axis,
    pub value: String,
    pub policy: PolicyKind,
    #[serde(rename = "mean_T_ms")]
    pub mean_t_ms: f64,
    #[serde(rename = "std_T_ms")]
    pub std_t_ms: f64,
    pub n_seeds: usize,
}

/// The instance both policies consumed in one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub axis: Axis,
    pub value: String,
    pub seed: u64,
    pub graph_sha256: String,
    pub sinr_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissingCell {
    pub axis: Axis,
    pub value: String,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub gains: Vec<GainRow>,
    pub summary: Vec<SummaryRow>,
    pub instances: Vec<InstanceRow>,
    pub missing: Vec<MissingCell>,
}

pub const RUNS_CSV: &str = "runs.csv";
pub const GAINS_CSV: &str = "gains.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const INSTANCES_CSV: &str = "instances.csv";
pub const MISSING_CSV: &str = "missing.csv";

/// Mean and sample standard deviation (n - 1); the std of one sample is 0.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Positive when joint is faster.
pub fn gain_pct(t_joint: f64, t_decoupled: f64) -> f64 {
    100.0 * (t_decoupled - t_joint) / t_decoupled
}

struct Cell {
    instance: InstanceRow,
    joint: Result<RunResult, String>,
    decoupled: Result<RunResult, String>,
}

fn run_cell(
    cfg: &ScenarioConfig,
    axis: Axis,
    value: &str,
    seed: u64,
) -> Result<Result<Cell, MissingCell>, HarnessError> {
    let cfg = ScenarioConfig {
        seed,
        ..cfg.clone()
    };
    let missing = |reason: String| MissingCell {
        axis,
        value: value.to_string(),
        seed,
        reason,
    };
    let scenario = match cfg.build_scenario() {
        Ok(s) => s,
        Err(e) => return Ok(Err(missing(e.to_string()))),
    };
    let instance = InstanceRow {
        axis,
        value: value.to_string(),
        seed,
        graph_sha256: json_sha256(&scenario.graph),
        sinr_sha256: json_sha256(&scenario.sinr),
    };
    // both policies borrow the same scenario, so they see the same graph and trace
    let joint = run_checked(&scenario, &cfg, PolicyKind::Joint)?.map_err(|e| e.to_string());
    let decoupled = run_checked(&scenario, &cfg, PolicyKind::Decoupled)?.map_err(|e| e.to_string());
    Ok(Ok(Cell {
        instance,
        joint,
        decoupled,
    }))
}

fn row(axis: Axis, value: &str, seed: u64, r: &RunResult) -> SweepRow {
    let lo = r.releases_ms.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.releases_ms.iter().copied().fold(0.0, f64::max);
    SweepRow {
        axis,
        value: value.to_string(),
        seed,
        policy: r.policy.kind,
        t_total_ms: r.total_latency_ms,
        release_min_ms: lo,
        release_max_ms: hi,
    }
}

/// Runs both policies for every (value, seed) cell, `jobs` cells at a time
/// (`None` = available parallelism). Results are ordered by value, then seed,
/// in the order the sweep file lists them.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepResult, HarnessError> {
    let configs = spec.configs()?;
    let labels: Vec<String> = spec.values.iter().map(|v| v.to_string()).collect();
    let tasks: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|i| spec.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let axis = spec.axis;
    let work = || {
        tasks
            .par_iter()
            .map(|&(i, seed)| run_cell(&configs[i], axis, &labels[i], seed))
            .collect::<Result<Vec<_>, HarnessError>>()
    };
    let cells = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Sweep(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    let mut out = SweepResult::default();
    let mut per_value: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> =
        vec![(Vec::new(), Vec::new(), Vec::new()); configs.len()];
    for (&(i, seed), cell) in tasks.iter().zip(cells) {
        let label = &labels[i];
        let cell = match cell {
            Ok(c) => c,
            Err(m) => {
                out.missing.push(m);
                continue;
            }
        };
        out.instances.push(cell.instance);
        let (tj, td, gains) = &mut per_value[i];
        match (&cell.joint, &cell.decoupled) {
            (Ok(j), Ok(d)) => {
                out.rows.push(row(axis, label, seed, j));
                out.rows.push(row(axis, label, seed, d));
                tj.push(j.total_latency_ms);
                td.push(d.total_latency_ms);
                gains.push(gain_pct(j.total_latency_ms, d.total_latency_ms));
            }
            (j, d) => {
                let mut reasons = Vec::new();
                for (name, r) in [("joint", j), ("decoupled", d)] {
                    if let Err(e) = r {
                        reasons.push(format!("{name}: {e}"));
                    }
                }
                out.missing.push(MissingCell {
                    axis,
                    value: label.clone(),
                    seed,
                    reason: reasons.join("; "),
                });
            }
        }
    }
    for (i, (tj, td, gains)) in per_value.iter().enumerate() {
        if gains.is_empty() {
            continue;
        }
        let (mean, std) = mean_std(gains);
        out.gains.push(GainRow {
            axis,
            value: labels[i].clone(),
            mean_gain_pct: mean,
            std_gain_pct: std,
            n_seeds: gains.len(),
        });
        for (policy, ts) in [(PolicyKind::Joint, tj), (PolicyKind::Decoupled, td)] {
            let (mean, std) = mean_std(ts);
            out.summary.push(SummaryRow {
                axis,
                value: labels[i].clone(),
                policy,
                mean_t_ms: mean,
                std_t_ms: std,
                n_seeds: ts.len(),
            });
        }
    }
    Ok(out)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok(rows)
}

impl SweepResult {
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        write_csv(
            &dir.join(RUNS_CSV),
            &self.rows,
            &[
                "axis",
                "value",
                "seed",
                "policy",
                "T_total_ms",
                "release_min_ms",
                "release_max_ms",
            ],
        )?;
        write_csv(
            &dir.join(GAINS_CSV),
            &self.gains,
            &["axis", "value", "mean_gain_pct", "std_gain_pct", "n_seeds"],
        )?;
        write_csv(
            &dir.join(SUMMARY_CSV),
            &self.summary,
            &[
                "axis",
                "value",
                "policy",
                "mean_T_ms",
                "std_T_ms",
                "n_seeds",
            ],
        )?;
        write_csv(
            &dir.join(INSTANCES_CSV),
            &self.instances,
            &["axis", "value", "seed", "graph_sha256", "sinr_sha256"],
        )?;
        write_csv(
            &dir.join(MISSING_CSV),
            &self.missing,
            &["axis", "value", "seed", "reason"],
        )
    }

    pub fn read(dir: &Path) -> Result<Self, HarnessError> {
        Ok(SweepResult {
            rows: read_csv(&dir.join(RUNS_CSV))?,
            gains: read_csv(&dir.join(GAINS_CSV))?,
            summary: read_csv(&dir.join(SUMMARY_CSV))?,
            instances: read_csv(&dir.join(INSTANCES_CSV))?,
            missing: read_csv(&dir.join(MISSING_CSV))?,
        })
    }

    /// Per-seed gains for one axis value, in seed order.
    pub fn seed_gains(&self, value: &str) -> Vec<f64> {
        let mut out = Vec::new();
        let rows: Vec<&SweepRow> = self.rows.iter().filter(|r| r.value == value).collect();
        for pair in rows.chunks(2) {
            if let [j, d] = pair {
                debug_assert_eq!(
                    (j.policy, d.policy),
                    (PolicyKind::Joint, PolicyKind::Decoupled)
                );
                out.push(gain_pct(j.t_total_ms, d.t_total_ms));
            }
        }
        out
    }
}
