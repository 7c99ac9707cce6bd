//! Sensing-side decision policies.
//!
//! * **Joint** (rollout): in every slot, each feasible unfinished band is
//!   tentatively given the slot, the resulting release vector is scored by a
//!   full greedy DAG pass, and the band with the smallest estimated makespan
//!   wins (ties to the lowest band id).
//! * **Decoupled**: every slot goes to the feasible unfinished band with the
//!   largest residual demand; once sensing ends, all entries are released at
//!   the last completion slot and the DAG is scheduled once.
//!
//! Bands that have not completed yet have no release during the rollout. The
//! [`Estimator`] decides what stands in for it.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::{DagGraph, NodeId};
use crate::radg::{OrderRule, Radg, ReleaseVector, Schedule, ScheduleError};
use crate::sensing::{
    self, apply_slot, check_bands, expected_gain_bits, feasible_set, gain_bits, BandSpec,
    SensingError, SensingParams, SensingState, SensingTrace, SinrTrace,
};
use crate::verify::check_schedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Joint,
    Decoupled,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Joint => "joint",
            PolicyKind::Decoupled => "decoupled",
        }
    }
}

/// Release surrogate for bands that are still sensing during the rollout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Unfinished band `j` is released at `(t + ceil(R_j / g_j)) * slot_ms`,
    /// `g_j` being its expected per-slot gain under the SINR distribution.
    #[default]
    ExpectedRate,
    /// Unfinished entries and every job reachable only through them are
    /// left out of the makespan.
    PartialMakespan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub order: OrderRule,
}

impl PolicyConfig {
    pub fn joint() -> Self {
        PolicyConfig {
            kind: PolicyKind::Joint,
            estimator: Estimator::ExpectedRate,
            order: OrderRule::MinId,
        }
    }

    pub fn decoupled() -> Self {
        PolicyConfig {
            kind: PolicyKind::Decoupled,
            ..Self::joint()
        }
    }

    pub fn with_kind(self, kind: PolicyKind) -> Self {
        PolicyConfig { kind, ..self }
    }
}

/// Everything a policy run consumes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub graph: DagGraph,
    pub bands: Vec<BandSpec>,
    pub sinr: SinrTrace,
    pub params: SensingParams,
    pub cores: usize,
}

impl Scenario {
    pub fn check(&self) -> Result<(), PolicyError> {
        check_bands(&self.bands)?;
        self.params.check()?;
        if self.bands.is_empty() {
            return Err(PolicyError::Scenario(String::from("no bands")));
        }
        if self.sinr.bands() != self.bands.len() {
            return Err(PolicyError::Scenario(format!(
                "SINR trace has {} bands, scenario has {}",
                self.sinr.bands(),
                self.bands.len()
            )));
        }
        if self.sinr.slots() < self.params.t_max {
            return Err(PolicyError::Scenario(format!(
                "SINR trace covers {} slots, T_max is {}",
                self.sinr.slots(),
                self.params.t_max
            )));
        }
        for b in &self.bands {
            if self.graph.entry_of_branch(b.band) != Some(b.entry) {
                return Err(PolicyError::Scenario(format!(
                    "band {} entry {} is not the entry of branch {}",
                    b.band, b.entry, b.band
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("band can never complete: band {band} has zero expected gain")]
    NeverCompletes { band: u32 },
    #[error("T_max = {t_max} slots exhausted with bands {:?} unfinished", state.incomplete())]
    Exhausted { t_max: u32, state: SensingState },
}

/// One candidate evaluated in a slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Candidate {
    pub band: u32,
    /// Rollout makespan estimate (joint only).
    pub estimated_l: Option<f64>,
    /// Residual demand before the slot.
    pub residual_bits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decision {
    pub t: u32,
    pub candidates: Vec<Candidate>,
    pub chosen: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunResult {
    pub policy: PolicyConfig,
    pub sensing: SensingTrace,
    /// Release of each band's entry job in ms (index `k - 1`).
    pub releases_ms: Vec<f64>,
    pub schedule: Schedule,
    pub total_latency_ms: f64,
    pub decision_log: Vec<Decision>,
}

/// Rollout release vector plus the entries that are still sensing.
#[derive(Clone, Debug, PartialEq)]
pub struct ReleaseEstimate {
    pub rho: ReleaseVector,
    /// Entry jobs of unfinished bands.
    pub pending: Vec<NodeId>,
}

/// Builds rollout release vectors from a (tentative) sensing state.
#[derive(Clone, Debug)]
pub struct ReleaseEstimator {
    estimator: Estimator,
    slot_ms: f64,
    /// Expected per-slot gain in bits, per band.
    rates: Vec<f64>,
}

impl ReleaseEstimator {
    pub fn new(
        estimator: Estimator,
        bands: &[BandSpec],
        params: &SensingParams,
        sinr_range_db: (f64, f64),
    ) -> Self {
        let rates = match estimator {
            Estimator::ExpectedRate => bands
                .iter()
                .map(|b| expected_gain_bits(b, params, sinr_range_db.0, sinr_range_db.1))
                .collect(),
            Estimator::PartialMakespan => Vec::new(),
        };
        ReleaseEstimator {
            estimator,
            slot_ms: params.slot_ms,
            rates,
        }
    }

    pub fn expected_rate(&self, band: u32) -> Option<f64> {
        self.rates.get(band as usize - 1).copied()
    }

    /// Release vector after deciding slot `t`. Completed bands (true or
    /// tentative) release at `tau * slot_ms`; unfinished bands get the
    /// configured surrogate.
    pub fn estimate(
        &self,
        g: &DagGraph,
        state: &SensingState,
        t: u32,
        bands: &[BandSpec],
    ) -> Result<ReleaseEstimate, PolicyError> {
        let mut rho = ReleaseVector::zeros(g.len());
        let mut pending = Vec::new();
        for b in bands {
            let i = b.band as usize - 1;
            let residual = (b.eta_bits - state.x[i]).max(0.0);
            let release = match state.tau[i] {
                Some(tau) => tau as f64 * self.slot_ms,
                None if residual == 0.0 => t as f64 * self.slot_ms,
                None => match self.estimator {
                    Estimator::ExpectedRate => {
                        let rate = self.rates[i];
                        if !(rate > 0.0) {
                            return Err(PolicyError::NeverCompletes { band: b.band });
                        }
                        (t as f64 + libm::ceil(residual / rate)) * self.slot_ms
                    }
                    Estimator::PartialMakespan => {
                        pending.push(b.entry);
                        0.0
                    }
                },
            };
            rho.set(b.entry, release);
        }
        Ok(ReleaseEstimate { rho, pending })
    }
}

/// Stand-alone form of [`ReleaseEstimator::estimate`].
pub fn estimate_releases(
    g: &DagGraph,
    state: &SensingState,
    t: u32,
    bands: &[BandSpec],
    params: &SensingParams,
    estimator: Estimator,
    sinr_range_db: (f64, f64),
) -> Result<ReleaseEstimate, PolicyError> {
    ReleaseEstimator::new(estimator, bands, params, sinr_range_db).estimate(g, state, t, bands)
}

pub fn run_policy(scenario: &Scenario, config: &PolicyConfig) -> Result<RunResult, PolicyError> {
    match config.kind {
        PolicyKind::Joint => run_joint(scenario, config),
        PolicyKind::Decoupled => run_decoupled(scenario, config),
    }
}

/// Shared slot loop; `choose` picks a band from the non-empty candidate set
/// and returns the logged candidate rows.
fn sense<F>(
    scenario: &Scenario,
    mut choose: F,
) -> Result<(SensingTrace, Vec<Decision>), PolicyError>
where
    F: FnMut(&SensingState, &[u32]) -> Result<(u32, Vec<Candidate>), PolicyError>,
{
    let Scenario {
        bands,
        sinr,
        params,
        ..
    } = scenario;
    let mut state = SensingState::new(bands.len());
    let mut activation = Vec::new();
    let mut log = Vec::new();
    for t in 1..=params.t_max {
        if state.all_complete() {
            break;
        }
        let open: Vec<u32> = feasible_set(sinr, bands, t)?
            .into_iter()
            .filter(|&k| !state.is_complete(k))
            .collect();
        let chosen = if open.is_empty() {
            None
        } else {
            let (k, candidates) = choose(&state, &open)?;
            log.push(Decision {
                t,
                candidates,
                chosen: k,
            });
            Some(k)
        };
        state = apply_slot(&state, chosen, sinr, bands, params)?;
        activation.push(chosen);
    }
    if !state.all_complete() {
        return Err(PolicyError::Exhausted {
            t_max: params.t_max,
            state,
        });
    }
    Ok((
        SensingTrace {
            activation,
            tau: state.tau,
            x_final: state.x,
        },
        log,
    ))
}

fn finish(
    scenario: &Scenario,
    radg: &Radg<'_>,
    policy: PolicyConfig,
    sensing: SensingTrace,
    releases_ms: Vec<f64>,
    decision_log: Vec<Decision>,
) -> Result<RunResult, PolicyError> {
    let rho = ReleaseVector::from_band_releases(&scenario.graph, &releases_ms);
    let schedule = radg.schedule(&rho)?;
    Ok(RunResult {
        policy,
        sensing,
        releases_ms,
        total_latency_ms: schedule.makespan,
        schedule,
        decision_log,
    })
}

/// Rollout joint scheduling.
pub fn run_joint(scenario: &Scenario, config: &PolicyConfig) -> Result<RunResult, PolicyError> {
    scenario.check()?;
    let Scenario {
        graph,
        bands,
        sinr,
        params,
        cores,
    } = scenario;
    let radg = Radg::new(graph, *cores, config.order)?;
    let estimator = ReleaseEstimator::new(config.estimator, bands, params, sinr.distribution());

    let (trace, log) = sense(scenario, |state, open| {
        let t = state.t;
        let mut best: Option<(f64, u32)> = None;
        let mut rows = Vec::with_capacity(open.len());
        for &k in open {
            let band = &bands[k as usize - 1];
            let residual = sensing::residual_demand(state, bands, k)?;
            let mut tentative = state.clone();
            tentative.accumulate(
                k,
                gain_bits(sinr.gamma_db(k, t), band, params),
                band.eta_bits,
            );
            let est = estimator.estimate(graph, &tentative, t, bands)?;
            let l = match config.estimator {
                Estimator::ExpectedRate => radg.makespan(&est.rho)?,
                Estimator::PartialMakespan => radg.partial_makespan(&est.rho, &est.pending)?,
            };
            rows.push(Candidate {
                band: k,
                estimated_l: Some(l),
                residual_bits: residual,
            });
            if best.is_none_or(|(bl, _)| l < bl) {
                best = Some((l, k));
            }
        }
        Ok((best.expect("non-empty candidate set").1, rows))
    })?;

    let releases = trace.release_times_ms(params)?;
    finish(scenario, &radg, *config, trace, releases, log)
}

/// Largest-residual-first sensing, then one DAG pass with a common release.
pub fn run_decoupled(scenario: &Scenario, config: &PolicyConfig) -> Result<RunResult, PolicyError> {
    scenario.check()?;
    let Scenario {
        graph,
        bands,
        params,
        cores,
        ..
    } = scenario;
    let radg = Radg::new(graph, *cores, config.order)?;

    let (trace, log) = sense(scenario, |state, open| {
        let mut best: Option<(f64, u32)> = None;
        let mut rows = Vec::with_capacity(open.len());
        for &k in open {
            let r = sensing::residual_demand(state, bands, k)?;
            rows.push(Candidate {
                band: k,
                estimated_l: None,
                residual_bits: r,
            });
            if best.is_none_or(|(br, _)| r > br) {
                best = Some((r, k));
            }
        }
        Ok((best.expect("non-empty candidate set").1, rows))
    })?;

    let last = trace
        .tau
        .iter()
        .map(|t| t.expect("sensing completed"))
        .max()
        .expect("at least one band");
    let start = last as f64 * params.slot_ms;
    let releases = vec![start; bands.len()];
    finish(scenario, &radg, *config, trace, releases, log)
}

/// Re-checks every invariant of a finished run against its scenario:
/// sensing replay (conservation, first crossing, feasibility), work
/// conservation, decision-rule legality, release rules and schedule
/// feasibility. Returns human-readable violations; empty means clean.
pub fn verify_run(scenario: &Scenario, result: &RunResult, rel_tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    let Scenario {
        graph,
        bands,
        sinr,
        params,
        cores,
    } = scenario;
    let trace = &result.sensing;
    if let Err(e) = trace.replay(sinr, bands, params, rel_tol) {
        out.push(format!("sensing replay: {e}"));
        return out;
    }

    // work conservation and decision legality, replaying the state slot by slot
    let mut state = SensingState::new(bands.len());
    let mut log = result.decision_log.iter().peekable();
    for (i, &chosen) in trace.activation.iter().enumerate() {
        let t = i as u32 + 1;
        let open: Vec<u32> = match feasible_set(sinr, bands, t) {
            Ok(f) => f.into_iter().filter(|&k| !state.is_complete(k)).collect(),
            Err(e) => {
                out.push(format!("slot {t}: {e}"));
                break;
            }
        };
        match chosen {
            None if !open.is_empty() => {
                out.push(format!("slot {t}: idle with open bands {open:?}"))
            }
            None => {}
            Some(k) => {
                let Some(d) = log.next_if(|d| d.t == t) else {
                    out.push(format!("slot {t}: no decision record"));
                    continue;
                };
                if d.chosen != k {
                    out.push(format!(
                        "slot {t}: log chose {} but trace sensed {k}",
                        d.chosen
                    ));
                }
                let bands_logged: Vec<u32> = d.candidates.iter().map(|c| c.band).collect();
                if bands_logged != open {
                    out.push(format!(
                        "slot {t}: candidates {bands_logged:?} != open {open:?}"
                    ));
                }
                let pick = match result.policy.kind {
                    PolicyKind::Joint => d
                        .candidates
                        .iter()
                        .filter_map(|c| c.estimated_l.map(|l| (l, c.band)))
                        .fold(None, |acc: Option<(f64, u32)>, (l, b)| match acc {
                            Some((bl, _)) if bl <= l => acc,
                            _ => Some((l, b)),
                        }),
                    PolicyKind::Decoupled => d
                        .candidates
                        .iter()
                        .map(|c| {
                            let r = (bands[c.band as usize - 1].eta_bits
                                - state.x[c.band as usize - 1])
                                .max(0.0);
                            (r, c.band)
                        })
                        .fold(None, |acc: Option<(f64, u32)>, (r, b)| match acc {
                            Some((br, _)) if br >= r => acc,
                            _ => Some((r, b)),
                        }),
                };
                if pick.map(|p| p.1) != Some(k) {
                    out.push(format!(
                        "slot {t}: chose band {k}, decision rule picks {pick:?}"
                    ));
                }
            }
        }
        match apply_slot(&state, chosen, sinr, bands, params) {
            Ok(s) => state = s,
            Err(e) => {
                out.push(format!("slot {t}: {e}"));
                break;
            }
        }
    }
    if log.next().is_some() {
        out.push(String::from("decision log has records beyond the trace"));
    }

    let taus: Vec<f64> = trace
        .tau
        .iter()
        .map(|t| t.map_or(f64::NAN, |t| t as f64 * params.slot_ms))
        .collect();
    match result.policy.kind {
        PolicyKind::Joint => {
            if result.releases_ms != taus {
                out.push(format!(
                    "joint releases {:?} differ from completion times {taus:?}",
                    result.releases_ms
                ));
            }
        }
        PolicyKind::Decoupled => {
            let last = taus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if result.releases_ms.iter().any(|&r| r != last) {
                out.push(format!(
                    "decoupled releases {:?} are not all max tau = {last}",
                    result.releases_ms
                ));
            }
        }
    }

    let rho = ReleaseVector::from_band_releases(graph, &result.releases_ms);
    for v in check_schedule(graph, &rho, *cores, &result.schedule) {
        out.push(format!("schedule: {v}"));
    }
    if result.total_latency_ms != result.schedule.makespan {
        out.push(String::from("total latency differs from schedule makespan"));
    }
    out
}
