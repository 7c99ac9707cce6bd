//! RunResult bundles: a directory holding the config, the full result and
//! flat exports derived from it.
//!
//! ```text
//! config.json     scenario config exactly as run
//! result.json     RunResult plus config/graph/SINR hashes
//! sensing.csv     t,chosen_band,gamma_db,gain_bits,X_after_bits
//! sensing.json    per-slot records, tau and release times
//! decisions.csv   t,candidate_band,estimated_L,chosen
//! gantt.svg       optional timeline
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sensedag_core::policies::verify_run;
use sensedag_core::sensing::SlotRecord;
use sensedag_core::{run_policy, RunResult, Scenario};

use crate::config::{ConfigError, ScenarioConfig};
use crate::gantt::render_gantt;
use crate::harness::{json_sha256, HarnessError, REPLAY_TOL};

pub const CONFIG_JSON: &str = "config.json";
pub const RESULT_JSON: &str = "result.json";
pub const SENSING_CSV: &str = "sensing.csv";
pub const SENSING_JSON: &str = "sensing.json";
pub const DECISIONS_CSV: &str = "decisions.csv";
pub const GANTT_SVG: &str = "gantt.svg";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleRecord {
    pub config_sha256: String,
    pub seed: u64,
    pub graph_sha256: String,
    pub sinr_sha256: String,
    pub result: RunResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingExport {
    pub records: Vec<SlotRecord>,
    pub tau: Vec<Option<u32>>,
    pub release_ms: Vec<f64>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_bytes(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::Sweep(e.to_string()))
}

fn sensing_csv(records: &[SlotRecord]) -> Result<Vec<u8>, HarnessError> {
    csv_bytes(
        &["t", "chosen_band", "gamma_db", "gain_bits", "X_after_bits"],
        records.iter().map(|r| {
            vec![
                r.t.to_string(),
                r.chosen
                    .map_or_else(|| "idle".to_string(), |k| k.to_string()),
                opt(r.gamma_db),
                r.gain_bits.to_string(),
                opt(r.x_after),
            ]
        }),
    )
}

fn decisions_csv(result: &RunResult) -> Result<Vec<u8>, HarnessError> {
    csv_bytes(
        &["t", "candidate_band", "estimated_L", "chosen"],
        result.decision_log.iter().flat_map(|d| {
            d.candidates.iter().map(move |c| {
                vec![
                    d.t.to_string(),
                    c.band.to_string(),
                    opt(c.estimated_l),
                    u8::from(c.band == d.chosen).to_string(),
                ]
            })
        }),
    )
}

/// Every file of a bundle, in write order, as bytes.
pub fn bundle_files(
    cfg: &ScenarioConfig,
    scenario: &Scenario,
    result: &RunResult,
    gantt: bool,
) -> Result<Vec<(&'static str, Vec<u8>)>, HarnessError> {
    let config = cfg.to_json().into_bytes();
    let record = BundleRecord {
        config_sha256: hex::encode(Sha256::digest(&config)),
        seed: cfg.seed,
        graph_sha256: json_sha256(&scenario.graph),
        sinr_sha256: json_sha256(&scenario.sinr),
        result: result.clone(),
    };
    let records = result
        .sensing
        .records(&scenario.sinr, &scenario.bands, &scenario.params);
    let export = SensingExport {
        tau: result.sensing.tau.clone(),
        release_ms: result.releases_ms.clone(),
        records,
    };
    let mut files = vec![
        (CONFIG_JSON, config),
        (RESULT_JSON, serde_json::to_vec_pretty(&record)?),
        (SENSING_CSV, sensing_csv(&export.records)?),
        (SENSING_JSON, serde_json::to_vec_pretty(&export)?),
        (DECISIONS_CSV, decisions_csv(result)?),
    ];
    if gantt {
        files.push((
            GANTT_SVG,
            render_gantt(&scenario.graph, result).into_bytes(),
        ));
    }
    Ok(files)
}

pub fn write_bundle(
    dir: &Path,
    cfg: &ScenarioConfig,
    scenario: &Scenario,
    result: &RunResult,
    gantt: bool,
) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    for (name, bytes) in bundle_files(cfg, scenario, result, gantt)? {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(())
}

/// Builds the scenario, runs the configured policy and writes its bundle.
pub fn run_to_bundle(
    cfg: &ScenarioConfig,
    dir: &Path,
    gantt: bool,
) -> Result<RunResult, HarnessError> {
    let scenario = cfg.build_scenario()?;
    let result = run_policy(&scenario, &cfg.policy)?;
    let v = verify_run(&scenario, &result, REPLAY_TOL);
    if !v.is_empty() {
        return Err(HarnessError::Invariant(v));
    }
    write_bundle(dir, cfg, &scenario, &result, gantt)?;
    Ok(result)
}

/// Re-checks a bundle: hashes, every run invariant, a fresh re-run and the
/// derived exports. `Err` means the bundle could not be read; `Ok` carries the
/// list of violations, empty when clean.
pub fn validate_bundle(dir: &Path) -> Result<Vec<String>, HarnessError> {
    let read = |name: &str| {
        let path = dir.join(name);
        std::fs::read(&path).map_err(|e| HarnessError::io(&path, e))
    };
    let config_bytes = read(CONFIG_JSON)?;
    let cfg: ScenarioConfig =
        serde_json::from_slice(&config_bytes).map_err(|source| ConfigError::Parse {
            path: dir.join(CONFIG_JSON).display().to_string(),
            source,
        })?;
    let record: BundleRecord = serde_json::from_slice(&read(RESULT_JSON)?)?;
    let scenario = cfg.build_scenario()?;

    let mut out = Vec::new();
    if hex::encode(Sha256::digest(&config_bytes)) != record.config_sha256 {
        out.push("config hash does not match config.json".to_string());
    }
    if record.seed != cfg.seed {
        out.push(format!(
            "seed {} differs from config seed {}",
            record.seed, cfg.seed
        ));
    }
    if json_sha256(&scenario.graph) != record.graph_sha256 {
        out.push("regenerated graph differs from the recorded graph hash".to_string());
    }
    if json_sha256(&scenario.sinr) != record.sinr_sha256 {
        out.push("regenerated SINR trace differs from the recorded hash".to_string());
    }
    let result = &record.result;
    if result.policy != cfg.policy {
        out.push("recorded policy differs from the config policy".to_string());
    }
    out.extend(verify_run(&scenario, result, REPLAY_TOL));
    if !out.is_empty() {
        return Ok(out);
    }

    match run_policy(&scenario, &cfg.policy) {
        Ok(fresh) if &fresh == result => {}
        Ok(_) => out.push("re-running the config gives a different result".to_string()),
        Err(e) => out.push(format!("re-running the config fails: {e}")),
    }
    let gantt = dir.join(GANTT_SVG).exists();
    for (name, bytes) in bundle_files(&cfg, &scenario, result, gantt)? {
        if name == CONFIG_JSON {
            continue;
        }
        if read(name)? != bytes {
            out.push(format!("{name} does not match the recorded result"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sensedag_core::PolicyConfig;

    fn cfg(seed: u64, policy: PolicyConfig) -> ScenarioConfig {
        ScenarioConfig {
            seed,
            policy,
            t_max: 800,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn bundle_round_trip_validates() {
        for policy in [PolicyConfig::joint(), PolicyConfig::decoupled()] {
            let dir = tempfile::tempdir().unwrap();
            run_to_bundle(&cfg(21, policy), dir.path(), true).unwrap();
            for f in [
                CONFIG_JSON,
                RESULT_JSON,
                SENSING_CSV,
                SENSING_JSON,
                DECISIONS_CSV,
                GANTT_SVG,
            ] {
                assert!(dir.path().join(f).exists(), "{f}");
            }
            assert_eq!(validate_bundle(dir.path()).unwrap(), Vec::<String>::new());
        }
    }

    #[test]
    fn exports_have_expected_headers() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_to_bundle(&cfg(2, PolicyConfig::decoupled()), dir.path(), false).unwrap();
        let s = std::fs::read_to_string(dir.path().join(SENSING_CSV)).unwrap();
        assert!(s.starts_with("t,chosen_band,gamma_db,gain_bits,X_after_bits\n"));
        assert_eq!(s.lines().count(), r.sensing.activation.len() + 1);
        let d = std::fs::read_to_string(dir.path().join(DECISIONS_CSV)).unwrap();
        assert!(d.starts_with("t,candidate_band,estimated_L,chosen\n"));
        let chosen = d.lines().skip(1).filter(|l| l.ends_with(",1")).count();
        assert_eq!(chosen, r.decision_log.len());
        assert!(!dir.path().join(GANTT_SVG).exists());
    }

    #[test]
    fn tampering_detected() {
        let dir = tempfile::tempdir().unwrap();
        run_to_bundle(&cfg(4, PolicyConfig::joint()), dir.path(), true).unwrap();
        let path = dir.path().join(RESULT_JSON);
        let mut rec: BundleRecord = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        rec.result.total_latency_ms += 1.0;
        std::fs::write(&path, serde_json::to_vec_pretty(&rec).unwrap()).unwrap();
        assert!(!validate_bundle(dir.path()).unwrap().is_empty());

        let dir = tempfile::tempdir().unwrap();
        run_to_bundle(&cfg(4, PolicyConfig::joint()), dir.path(), true).unwrap();
        std::fs::write(dir.path().join(GANTT_SVG), "<svg/>").unwrap();
        let v = validate_bundle(dir.path()).unwrap();
        assert!(v.iter().any(|m| m.contains(GANTT_SVG)), "{v:?}");

        let dir = tempfile::tempdir().unwrap();
        run_to_bundle(&cfg(4, PolicyConfig::joint()), dir.path(), false).unwrap();
        let p = dir.path().join(CONFIG_JSON);
        let text = std::fs::read_to_string(&p)
            .unwrap()
            .replace("\"C\": 4", "\"C\": 3");
        std::fs::write(&p, text).unwrap();
        assert!(!validate_bundle(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn unreadable_bundle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(validate_bundle(dir.path()).is_err());
        std::fs::write(dir.path().join(CONFIG_JSON), "{").unwrap();
        assert!(validate_bundle(dir.path()).is_err());
    }
}
