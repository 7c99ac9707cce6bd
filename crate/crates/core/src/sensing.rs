//! Slot-based multi-band sensing.
//!
//! At most one band senses per slot. A band is feasible in slot `t` when its
//! SINR strictly exceeds its threshold. Sensing a band adds
//! `B * slot * min(log2(1 + sinr), cap)` bits; the band completes in the first
//! slot where its accumulated bits reach its threshold.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// Bits per kB for threshold configuration.
pub const BITS_PER_KB: f64 = 8000.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    /// 1-based band index.
    pub band: u32,
    /// Information threshold in bits.
    pub eta_bits: f64,
    pub bandwidth_hz: f64,
    pub sinr_threshold_db: f64,
    /// Branch-entry job released when this band completes.
    pub entry: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingParams {
    pub slot_ms: f64,
    /// Spectral efficiency cap in bit/s/Hz.
    pub max_spectral_eff: f64,
    pub t_max: u32,
}

impl SensingParams {
    /// 1 ms slots, 8 bit/s/Hz cap, 2000 slots.
    pub const fn reference() -> Self {
        SensingParams {
            slot_ms: 1.0,
            max_spectral_eff: 8.0,
            t_max: 2000,
        }
    }
}

impl Default for SensingParams {
    fn default() -> Self {
        Self::reference()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SensingError {
    #[error("slot {t} outside 1..={slots}")]
    SlotOutOfRange { t: u32, slots: u32 },
    #[error("unknown band {band}")]
    UnknownBand { band: u32 },
    #[error("band {band} is not feasible in slot {t}")]
    Infeasible { band: u32, t: u32 },
    #[error("band {band} already completed sensing")]
    AlreadyComplete { band: u32 },
    #[error("bands {bands:?} never completed sensing")]
    Incomplete { bands: Vec<u32> },
    #[error("invalid band spec for band {band}: {reason}")]
    BadBand { band: u32, reason: &'static str },
    #[error("invalid sensing parameters: {0}")]
    BadParams(&'static str),
}

/// Checks band ids are `1..=K` in order and thresholds/bandwidths positive.
pub fn check_bands(bands: &[BandSpec]) -> Result<(), SensingError> {
    for (i, b) in bands.iter().enumerate() {
        if b.band as usize != i + 1 {
            return Err(SensingError::BadBand {
                band: b.band,
                reason: "band ids must be 1..=K in order",
            });
        }
        if !(b.eta_bits > 0.0 && b.eta_bits.is_finite()) {
            return Err(SensingError::BadBand {
                band: b.band,
                reason: "eta must be positive",
            });
        }
        if !(b.bandwidth_hz > 0.0 && b.bandwidth_hz.is_finite()) {
            return Err(SensingError::BadBand {
                band: b.band,
                reason: "bandwidth must be positive",
            });
        }
        if b.sinr_threshold_db.is_nan() {
            return Err(SensingError::BadBand {
                band: b.band,
                reason: "threshold is NaN",
            });
        }
    }
    Ok(())
}

impl SensingParams {
    pub fn check(&self) -> Result<(), SensingError> {
        if !(self.slot_ms > 0.0 && self.slot_ms.is_finite()) {
            return Err(SensingError::BadParams("slot_ms must be positive"));
        }
        if !(self.max_spectral_eff > 0.0 && self.max_spectral_eff.is_finite()) {
            return Err(SensingError::BadParams("max_spectral_eff must be positive"));
        }
        Ok(())
    }
}

/// Per-band per-slot SINR realizations in dB.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinrTrace {
    /// `values[k - 1][t - 1]` is the SINR of band `k` in slot `t`.
    values: Vec<Vec<f64>>,
    seed: u64,
    lo_db: f64,
    hi_db: f64,
}

impl SinrTrace {
    /// Draws `bands x slots` i.i.d. uniform SINR values, slot-major, so a
    /// longer horizon extends a shorter one without changing its prefix.
    pub fn generate(seed: u64, lo_db: f64, hi_db: f64, bands: usize, slots: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![Vec::with_capacity(slots as usize); bands];
        for _ in 0..slots {
            for row in values.iter_mut() {
                let x = if hi_db > lo_db {
                    rng.gen_range(lo_db..hi_db)
                } else {
                    lo_db
                };
                row.push(x);
            }
        }
        SinrTrace {
            values,
            seed,
            lo_db,
            hi_db,
        }
    }

    /// Wraps explicit values (rows per band). `lo_db`/`hi_db` describe the
    /// distribution the estimator should assume.
    pub fn from_values(values: Vec<Vec<f64>>, lo_db: f64, hi_db: f64) -> Self {
        SinrTrace {
            values,
            seed: 0,
            lo_db,
            hi_db,
        }
    }

    pub fn bands(&self) -> usize {
        self.values.len()
    }

    pub fn slots(&self) -> u32 {
        self.values.iter().map(Vec::len).min().unwrap_or(0) as u32
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> (f64, f64) {
        (self.lo_db, self.hi_db)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn gamma_db(&self, band: u32, t: u32) -> f64 {
        self.values[band as usize - 1][t as usize - 1]
    }
}

/// `{k : gamma_k(t) > Gamma_k}` in ascending band order.
pub fn feasible_set(
    trace: &SinrTrace,
    bands: &[BandSpec],
    t: u32,
) -> Result<Vec<u32>, SensingError> {
    if t == 0 || t > trace.slots() {
        return Err(SensingError::SlotOutOfRange {
            t,
            slots: trace.slots(),
        });
    }
    Ok(bands
        .iter()
        .filter(|b| (b.band as usize) <= trace.bands())
        .filter(|b| trace.gamma_db(b.band, t) > b.sinr_threshold_db)
        .map(|b| b.band)
        .collect())
}

/// Bits gathered by sensing `band` for one slot at `gamma_db`.
pub fn gain_bits(gamma_db: f64, band: &BandSpec, params: &SensingParams) -> f64 {
    let linear = libm::pow(10.0, gamma_db / 10.0);
    let eff = libm::log2(1.0 + linear).min(params.max_spectral_eff);
    band.bandwidth_hz * params.slot_ms / 1000.0 * eff
}

/// Expected per-slot bits of `band` when SINR ~ U[lo_db, hi_db] and the slot
/// only counts when the band is feasible: `P(feasible) * E[gain | feasible]`.
pub fn expected_gain_bits(band: &BandSpec, params: &SensingParams, lo_db: f64, hi_db: f64) -> f64 {
    let threshold = band.sinr_threshold_db;
    if hi_db <= lo_db {
        return if lo_db > threshold {
            gain_bits(lo_db, band, params)
        } else {
            0.0
        };
    }
    let a = lo_db.max(threshold);
    if a >= hi_db {
        return 0.0;
    }
    let cap = params.max_spectral_eff;
    // SINR (dB) where log2(1 + sinr) hits the cap; integrand is smooth on each side
    let cap_db = 10.0 * libm::log10(libm::exp2(cap) - 1.0);
    let c = cap_db.clamp(a, hi_db);
    let eff = |x: f64| libm::log2(1.0 + libm::pow(10.0, x / 10.0));
    let integral = simpson(eff, a, c, 1024) + (hi_db - c) * cap;
    band.bandwidth_hz * params.slot_ms / 1000.0 * integral / (hi_db - lo_db)
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}

/// Sensing progress at the start of slot `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingState {
    /// Current slot, 1-based.
    pub t: u32,
    /// Accumulated bits per band (index `k - 1`).
    pub x: Vec<f64>,
    /// Completion slot per band.
    pub tau: Vec<Option<u32>>,
}

impl SensingState {
    pub fn new(bands: usize) -> Self {
        SensingState {
            t: 1,
            x: vec![0.0; bands],
            tau: vec![None; bands],
        }
    }

    pub fn is_complete(&self, band: u32) -> bool {
        self.tau[band as usize - 1].is_some()
    }

    pub fn all_complete(&self) -> bool {
        self.tau.iter().all(Option::is_some)
    }

    pub fn incomplete(&self) -> Vec<u32> {
        self.tau
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_none())
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    /// Adds `gain` to band `k`, stamping completion slot `t` on the first crossing.
    pub(crate) fn accumulate(&mut self, band: u32, gain: f64, eta: f64) {
        let i = band as usize - 1;
        self.x[i] += gain;
        if self.tau[i].is_none() && self.x[i] >= eta {
            self.tau[i] = Some(self.t);
        }
    }
}

/// Advances `state` by one slot, sensing `chosen` (or idling on `None`).
pub fn apply_slot(
    state: &SensingState,
    chosen: Option<u32>,
    trace: &SinrTrace,
    bands: &[BandSpec],
    params: &SensingParams,
) -> Result<SensingState, SensingError> {
    let t = state.t;
    if t == 0 || t > trace.slots() {
        return Err(SensingError::SlotOutOfRange {
            t,
            slots: trace.slots(),
        });
    }
    let mut next = state.clone();
    if let Some(k) = chosen {
        let band = band(bands, k)?;
        if state.is_complete(k) {
            return Err(SensingError::AlreadyComplete { band: k });
        }
        let gamma = trace.gamma_db(k, t);
        if !(gamma > band.sinr_threshold_db) {
            return Err(SensingError::Infeasible { band: k, t });
        }
        next.accumulate(k, gain_bits(gamma, band, params), band.eta_bits);
    }
    next.t = t + 1;
    Ok(next)
}

/// `max(0, eta_k - X_k)`.
pub fn residual_demand(
    state: &SensingState,
    bands: &[BandSpec],
    k: u32,
) -> Result<f64, SensingError> {
    let b = band(bands, k)?;
    let x = *state
        .x
        .get(k as usize - 1)
        .ok_or(SensingError::UnknownBand { band: k })?;
    Ok((b.eta_bits - x).max(0.0))
}

fn band(bands: &[BandSpec], k: u32) -> Result<&BandSpec, SensingError> {
    if k == 0 {
        return Err(SensingError::UnknownBand { band: k });
    }
    bands
        .get(k as usize - 1)
        .filter(|b| b.band == k)
        .ok_or(SensingError::UnknownBand { band: k })
}

/// Outcome of a sensing run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingTrace {
    /// Band sensed in slot `t` (index `t - 1`), `None` when idle.
    pub activation: Vec<Option<u32>>,
    pub tau: Vec<Option<u32>>,
    /// Accumulated bits per band at the end of the run.
    pub x_final: Vec<f64>,
}

/// Per-slot view of a [`SensingTrace`] for export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub t: u32,
    pub chosen: Option<u32>,
    /// SINR of the chosen band, `None` when idle.
    pub gamma_db: Option<f64>,
    pub gain_bits: f64,
    /// Accumulated bits of the chosen band after the slot.
    pub x_after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error("band {band}: replayed X = {replayed} but trace reports {recorded}")]
    Conservation {
        band: u32,
        replayed: f64,
        recorded: f64,
    },
    #[error("band {band}: completion slot {recorded:?} but first crossing is {replayed:?}")]
    Completion {
        band: u32,
        replayed: Option<u32>,
        recorded: Option<u32>,
    },
    #[error("band count mismatch")]
    Shape,
}

impl SensingTrace {
    /// Releases `tau_k * slot_ms`, the end of the completing slot.
    pub fn release_times_ms(&self, params: &SensingParams) -> Result<Vec<f64>, SensingError> {
        release_times_ms(self, params)
    }

    pub fn records(
        &self,
        sinr: &SinrTrace,
        bands: &[BandSpec],
        params: &SensingParams,
    ) -> Vec<SlotRecord> {
        let mut x = vec![0.0; bands.len()];
        self.activation
            .iter()
            .enumerate()
            .map(|(i, &chosen)| {
                let t = i as u32 + 1;
                match chosen {
                    None => SlotRecord {
                        t,
                        chosen,
                        gamma_db: None,
                        gain_bits: 0.0,
                        x_after: None,
                    },
                    Some(k) => {
                        let gamma = sinr.gamma_db(k, t);
                        let g = gain_bits(gamma, &bands[k as usize - 1], params);
                        x[k as usize - 1] += g;
                        SlotRecord {
                            t,
                            chosen,
                            gamma_db: Some(gamma),
                            gain_bits: g,
                            x_after: Some(x[k as usize - 1]),
                        }
                    }
                }
            })
            .collect()
    }

    /// Replays the activations from scratch and checks conservation of
    /// accumulated bits (relative tolerance `rel_tol`), feasibility of every
    /// activation and that each `tau_k` is the first crossing slot.
    pub fn replay(
        &self,
        sinr: &SinrTrace,
        bands: &[BandSpec],
        params: &SensingParams,
        rel_tol: f64,
    ) -> Result<(), ReplayError> {
        if self.tau.len() != bands.len() || self.x_final.len() != bands.len() {
            return Err(ReplayError::Shape);
        }
        let mut state = SensingState::new(bands.len());
        for &chosen in &self.activation {
            state = apply_slot(&state, chosen, sinr, bands, params)?;
        }
        for (i, b) in bands.iter().enumerate() {
            // independent sum over the activation list
            let sum: f64 = self
                .activation
                .iter()
                .enumerate()
                .filter(|(_, c)| **c == Some(b.band))
                .map(|(s, _)| gain_bits(sinr.gamma_db(b.band, s as u32 + 1), b, params))
                .sum();
            let recorded = self.x_final[i];
            let scale = recorded.abs().max(sum.abs()).max(f64::MIN_POSITIVE);
            if (sum - recorded).abs() > rel_tol * scale {
                return Err(ReplayError::Conservation {
                    band: b.band,
                    replayed: sum,
                    recorded,
                });
            }
            let mut acc = 0.0;
            let mut first = None;
            for (s, c) in self.activation.iter().enumerate() {
                if *c == Some(b.band) {
                    acc += gain_bits(sinr.gamma_db(b.band, s as u32 + 1), b, params);
                    if acc >= b.eta_bits {
                        first = Some(s as u32 + 1);
                        break;
                    }
                }
            }
            if first != self.tau[i] || state.tau[i] != self.tau[i] {
                return Err(ReplayError::Completion {
                    band: b.band,
                    replayed: first,
                    recorded: self.tau[i],
                });
            }
        }
        Ok(())
    }
}

/// `rho_k = tau_k * slot_ms` per band; errors listing any incomplete band.
pub fn release_times_ms(
    trace: &SensingTrace,
    params: &SensingParams,
) -> Result<Vec<f64>, SensingError> {
    let missing: Vec<u32> = trace
        .tau
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_none())
        .map(|(i, _)| i as u32 + 1)
        .collect();
    if !missing.is_empty() {
        return Err(SensingError::Incomplete { bands: missing });
    }
    Ok(trace
        .tau
        .iter()
        .map(|t| t.expect("checked") as f64 * params.slot_ms)
        .collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn band(k: u32, eta_bits: f64) -> BandSpec {
        BandSpec {
            band: k,
            eta_bits,
            bandwidth_hz: 180_000.0,
            sinr_threshold_db: 6.0,
            entry: NodeId(0),
        }
    }

    fn params() -> SensingParams {
        SensingParams::reference()
    }

    #[test]
    fn feasibility_is_strict() {
        let trace = SinrTrace::from_values(vec![vec![5.5], vec![6.0], vec![7.2]], 5.0, 20.0);
        let bands = [band(1, 1.0), band(2, 1.0), band(3, 1.0)];
        assert_eq!(feasible_set(&trace, &bands, 1).unwrap(), [3]);
    }

    #[test]
    fn nothing_feasible_means_idle() {
        let trace = SinrTrace::from_values(vec![vec![1.0], vec![2.0]], 5.0, 20.0);
        let bands = [band(1, 1.0), band(2, 1.0)];
        assert!(feasible_set(&trace, &bands, 1).unwrap().is_empty());
    }

    #[test]
    fn minus_infinity_threshold_admits_all() {
        let trace = SinrTrace::from_values(vec![vec![-40.0], vec![0.0]], 5.0, 20.0);
        let mut bands = [band(1, 1.0), band(2, 1.0)];
        for b in bands.iter_mut() {
            b.sinr_threshold_db = f64::NEG_INFINITY;
        }
        assert_eq!(feasible_set(&trace, &bands, 1).unwrap(), [1, 2]);
    }

    #[test]
    fn slot_range_checked() {
        let trace = SinrTrace::from_values(vec![vec![7.0, 7.0]], 5.0, 20.0);
        let bands = [band(1, 1.0)];
        assert!(matches!(
            feasible_set(&trace, &bands, 0),
            Err(SensingError::SlotOutOfRange { .. })
        ));
        assert!(matches!(
            feasible_set(&trace, &bands, 3),
            Err(SensingError::SlotOutOfRange { t: 3, slots: 2 })
        ));
    }

    #[test]
    fn gain_values() {
        let b = band(1, 1.0);
        // 180 * log2(101)
        let g = gain_bits(20.0, &b, &params());
        assert!((g - 1198.478066895323).abs() < 1e-9, "{g}");
        // log2(1001) > 8 caps at 180 * 8
        assert_eq!(gain_bits(30.0, &b, &params()), 1440.0);
        assert_eq!(gain_bits(f64::NEG_INFINITY, &b, &params()), 0.0);
    }

    #[test]
    fn completion_on_crossing() {
        let trace = SinrTrace::from_values(vec![vec![20.0; 10]], 5.0, 20.0);
        let bands = [band(1, 80_000.0)];
        let state = SensingState {
            t: 4,
            x: vec![79_000.0],
            tau: vec![None],
        };
        let next = apply_slot(&state, Some(1), &trace, &bands, &params()).unwrap();
        assert!((next.x[0] - 80_198.478_066_895_32).abs() < 1e-9);
        assert_eq!(next.tau, [Some(4)]);
        assert_eq!(next.t, 5);
    }

    #[test]
    fn idle_slot_only_advances_time() {
        let trace = SinrTrace::from_values(vec![vec![20.0; 3]], 5.0, 20.0);
        let bands = [band(1, 80_000.0)];
        let state = SensingState {
            t: 2,
            x: vec![123.0],
            tau: vec![None],
        };
        let next = apply_slot(&state, None, &trace, &bands, &params()).unwrap();
        assert_eq!(next.x, state.x);
        assert_eq!(next.tau, state.tau);
        assert_eq!(next.t, 3);
    }

    #[test]
    fn apply_slot_rejects_bad_choices() {
        let trace = SinrTrace::from_values(vec![vec![20.0; 3], vec![3.0; 3]], 5.0, 20.0);
        let bands = [band(1, 100.0), band(2, 100.0)];
        let done = SensingState {
            t: 2,
            x: vec![200.0, 0.0],
            tau: vec![Some(1), None],
        };
        assert_eq!(
            apply_slot(&done, Some(1), &trace, &bands, &params()),
            Err(SensingError::AlreadyComplete { band: 1 })
        );
        assert_eq!(
            apply_slot(&done, Some(2), &trace, &bands, &params()),
            Err(SensingError::Infeasible { band: 2, t: 2 })
        );
        assert_eq!(
            apply_slot(&done, Some(5), &trace, &bands, &params()),
            Err(SensingError::UnknownBand { band: 5 })
        );
    }

    #[test]
    fn residuals() {
        let bands = [band(1, 80_000.0)];
        let mut s = SensingState::new(1);
        s.x[0] = 20_000.0;
        assert_eq!(residual_demand(&s, &bands, 1).unwrap(), 60_000.0);
        s.x[0] = 80_000.0;
        assert_eq!(residual_demand(&s, &bands, 1).unwrap(), 0.0);
        s.x[0] = 90_000.0;
        assert_eq!(residual_demand(&s, &bands, 1).unwrap(), 0.0);
        assert!(residual_demand(&s, &bands, 2).is_err());
    }

    #[test]
    fn releases_from_completion_slots() {
        let trace = SensingTrace {
            activation: vec![],
            tau: vec![Some(3), Some(7)],
            x_final: vec![0.0, 0.0],
        };
        assert_eq!(trace.release_times_ms(&params()).unwrap(), [3.0, 7.0]);
        let one = SensingTrace {
            activation: vec![],
            tau: vec![Some(1)],
            x_final: vec![0.0],
        };
        assert_eq!(one.release_times_ms(&params()).unwrap(), [1.0]);
        let open = SensingTrace {
            activation: vec![],
            tau: vec![Some(1), None, None],
            x_final: vec![0.0; 3],
        };
        assert_eq!(
            open.release_times_ms(&params()),
            Err(SensingError::Incomplete { bands: vec![2, 3] })
        );
    }

    /// Midpoint-rule oracle, evaluating the capped integrand directly.
    fn expected_gain_oracle(b: &BandSpec, p: &SensingParams, lo: f64, hi: f64) -> f64 {
        // midpoint rule on the feasible part only, so no cell straddles the threshold
        let a = lo.max(b.sinr_threshold_db);
        if a >= hi {
            return 0.0;
        }
        let n = 2_000_000;
        let h = (hi - a) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            acc += gain_bits(a + (i as f64 + 0.5) * h, b, p);
        }
        acc * h / (hi - lo)
    }

    #[test]
    fn expected_gain_matches_quadrature() {
        let b = band(1, 60_000.0);
        let p = params();
        let oracle = expected_gain_oracle(&b, &p, 5.0, 20.0);
        // frozen from adaptive quadrature of the same integral
        assert!((oracle - 742.5753785868002).abs() < 1e-6, "{oracle}");
        let g = expected_gain_bits(&b, &p, 5.0, 20.0);
        assert!((g - oracle).abs() < 1e-6, "{g} vs {oracle}");
        assert_eq!(libm::ceil(60_000.0 / g), 81.0);
    }

    #[test]
    fn expected_gain_across_cap() {
        let b = band(1, 1.0);
        let p = params();
        let oracle = expected_gain_oracle(&b, &p, 0.0, 40.0);
        let g = expected_gain_bits(&b, &p, 0.0, 40.0);
        assert!((g - oracle).abs() < 1e-6, "{g} vs {oracle}");
    }

    #[test]
    fn degenerate_distributions() {
        let b = band(1, 1.0);
        let p = params();
        assert_eq!(expected_gain_bits(&b, &p, 1.0, 5.0), 0.0);
        assert_eq!(expected_gain_bits(&b, &p, 6.0, 6.0), 0.0);
        assert_eq!(
            expected_gain_bits(&b, &p, 20.0, 20.0),
            gain_bits(20.0, &b, &p)
        );
    }

    #[test]
    fn generation_is_seeded() {
        let a = SinrTrace::generate(11, 5.0, 20.0, 3, 50);
        let b = SinrTrace::generate(11, 5.0, 20.0, 3, 50);
        assert_eq!(a, b);
        assert!(a.rows().iter().flatten().all(|&x| (5.0..20.0).contains(&x)));
        let longer = SinrTrace::generate(11, 5.0, 20.0, 3, 80);
        for k in 0..3 {
            assert_eq!(a.rows()[k][..], longer.rows()[k][..50]);
        }
        assert_ne!(a, SinrTrace::generate(12, 5.0, 20.0, 3, 50));
    }

    proptest! {
        #[test]
        fn gain_is_monotone(a in -50.0f64..60.0, b in -50.0f64..60.0) {
            let band = band(1, 1.0);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(gain_bits(lo, &band, &params()) <= gain_bits(hi, &band, &params()));
            prop_assert!(gain_bits(lo, &band, &params()) >= 0.0);
        }
    }
}
