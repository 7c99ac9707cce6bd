//! Command-line front end.
//!
//! Exit codes: 0 success, 1 malformed input, 2 infeasible scenario (sensing
//! cannot finish within T_max), 3 invariant violation.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use sensedag_core::oracle::{optimal_makespan, OracleError, OracleLimit};
use sensedag_core::verify::check_schedule;
use sensedag_core::{radg, DagGraph, PolicyError, PolicyKind, ReleaseVector};

use crate::bundle::{run_to_bundle, validate_bundle};
use crate::config::ScenarioConfig;
use crate::harness::{run_sweep, HarnessError, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "sensedag",
    version,
    about = "Joint multi-band sensing and DAG inference scheduling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Joint,
    Decoupled,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Joint => PolicyKind::Joint,
            PolicyArg::Decoupled => PolicyKind::Decoupled,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write its result bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        policy: PolicyArg,
        #[arg(long)]
        out: PathBuf,
        /// Also write gantt.svg into the bundle.
        #[arg(long)]
        gantt: bool,
    },
    /// Run both policies over a parameter sweep and write CSVs.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Parallel sweep cells (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write the scenario's generated DAG as JSON.
    GenDag {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare RADG against the exhaustive oracle on a tiny instance.
    OracleCheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Replay a result bundle and re-check every invariant.
    Validate {
        #[arg(long)]
        bundle: PathBuf,
    },
}

/// Tiny oracle instance: a graph, optional per-node releases (default 0) and
/// a core count.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TinyInstance {
    pub graph: DagGraph,
    #[serde(default)]
    pub rho: Option<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: usize,
}

pub fn exit_code(e: &HarnessError) -> i32 {
    match e {
        HarnessError::Policy(PolicyError::Exhausted { .. })
        | HarnessError::Policy(PolicyError::NeverCompletes { .. }) => EXIT_INFEASIBLE,
        HarnessError::Policy(PolicyError::Schedule(_)) | HarnessError::Invariant(_) => {
            EXIT_INVARIANT
        }
        _ => EXIT_MALFORMED,
    }
}

fn read_text(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

fn oracle_check(path: &Path, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let tiny: TinyInstance = serde_json::from_str(&read_text(path)?)?;
    let n = tiny.graph.len();
    let rho = ReleaseVector::from_vec(tiny.rho.unwrap_or_else(|| vec![0.0; n]));
    let greedy = radg::schedule(&tiny.graph, &rho, tiny.c)
        .map_err(|e| HarnessError::Sweep(format!("RADG: {e}")))?;
    let (opt, best) = match optimal_makespan(&tiny.graph, &rho, tiny.c, &OracleLimit::default()) {
        Ok(x) => x,
        Err(e @ (OracleError::TooLarge { .. } | OracleError::Budget { .. })) => {
            return Err(HarnessError::Sweep(e.to_string()))
        }
        Err(OracleError::Schedule(e)) => return Err(HarnessError::Sweep(e.to_string())),
    };
    let _ = writeln!(out, "RADG={} OPT={}", greedy.makespan, opt);
    let mut bad = Vec::new();
    for (name, s) in [("RADG", &greedy), ("OPT", &best)] {
        for v in check_schedule(&tiny.graph, &rho, tiny.c, s) {
            bad.push(format!("{name}: {v}"));
        }
    }
    if greedy.makespan < opt {
        bad.push(format!("RADG {} beats the oracle {}", greedy.makespan, opt));
    }
    if bad.is_empty() {
        Ok(EXIT_OK)
    } else {
        Err(HarnessError::Invariant(bad))
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, HarnessError> {
    match cmd {
        Command::Run {
            config,
            policy,
            out: dir,
            gantt,
        } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            cfg.policy = cfg.policy.with_kind(policy.into());
            let r = run_to_bundle(&cfg, &dir, gantt)?;
            let _ = writeln!(
                out,
                "policy={} T_total_ms={} bundle={}",
                r.policy.kind.as_str(),
                r.total_latency_ms,
                dir.display()
            );
            Ok(EXIT_OK)
        }
        Command::Sweep {
            spec,
            out: dir,
            jobs,
        } => {
            if jobs == Some(0) {
                return Err(HarnessError::Sweep("--jobs must be at least 1".into()));
            }
            let spec = SweepSpec::load(&spec)?;
            let r = run_sweep(&spec, jobs)?;
            r.write(&dir)?;
            let _ = writeln!(
                out,
                "cells={} missing={} out={}",
                r.instances.len(),
                r.missing.len(),
                dir.display()
            );
            Ok(EXIT_OK)
        }
        Command::GenDag { config, out: path } => {
            let g = ScenarioConfig::load(&config)?.build_graph()?;
            let text = serde_json::to_string_pretty(&g)?;
            std::fs::write(&path, text + "\n").map_err(|e| HarnessError::io(&path, e))?;
            let _ = writeln!(out, "nodes={} edges={}", g.len(), g.edges().len());
            Ok(EXIT_OK)
        }
        Command::OracleCheck { config } => oracle_check(&config, out),
        Command::Validate { bundle } => {
            let v = validate_bundle(&bundle)?;
            if v.is_empty() {
                let _ = writeln!(out, "ok");
                Ok(EXIT_OK)
            } else {
                Err(HarnessError::Invariant(v))
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_MALFORMED
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = main_with(
            std::iter::once("sensedag").chain(args.iter().copied()),
            &mut o,
            &mut e,
        );
        (
            code,
            String::from_utf8(o).unwrap(),
            String::from_utf8(e).unwrap(),
        )
    }

    #[test]
    fn usage_errors_are_malformed() {
        assert_eq!(run(&[]).0, EXIT_MALFORMED);
        assert_eq!(run(&["frobnicate"]).0, EXIT_MALFORMED);
        assert_eq!(run(&["run", "--config", "x.json"]).0, EXIT_MALFORMED);
        assert_eq!(
            run(&["run", "--config", "x", "--policy", "greedy", "--out", "o"]).0,
            EXIT_MALFORMED
        );
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("oracle-check"));
    }

    #[test]
    fn exit_code_mapping() {
        use sensedag_core::SensingState;
        let ex = HarnessError::Policy(PolicyError::Exhausted {
            t_max: 3,
            state: SensingState::new(1),
        });
        assert_eq!(exit_code(&ex), EXIT_INFEASIBLE);
        assert_eq!(exit_code(&HarnessError::Invariant(vec![])), EXIT_INVARIANT);
        assert_eq!(exit_code(&HarnessError::Sweep("x".into())), EXIT_MALFORMED);
    }

    #[test]
    fn missing_files_are_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.json");
        let m = missing.to_str().unwrap();
        let o = dir.path().join("o");
        assert_eq!(
            run(&[
                "run",
                "--config",
                m,
                "--policy",
                "joint",
                "--out",
                o.to_str().unwrap()
            ])
            .0,
            EXIT_MALFORMED
        );
        assert_eq!(run(&["oracle-check", "--config", m]).0, EXIT_MALFORMED);
        assert_eq!(run(&["validate", "--bundle", m]).0, EXIT_MALFORMED);
        assert!(!o.exists());
    }
}
