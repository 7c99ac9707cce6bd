//! Mapping-dependent job timing.
//!
//! Data movement never occupies a core: read/write latencies only push back
//! the consumer's start through the data-ready time of each incoming edge.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::{DagNode, NodeId};

/// How a producer's output reaches its consumer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferMode {
    OnChip,
    OffChip,
}

impl TransferMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransferMode::OnChip => "on_chip",
            TransferMode::OffChip => "off_chip",
        }
    }
}

/// On-chip forwarding needs the same core and the same branch.
pub fn delta(u: &DagNode, v: &DagNode, core_u: usize, core_v: usize) -> TransferMode {
    if core_u == core_v && u.branch == v.branch {
        TransferMode::OnChip
    } else {
        TransferMode::OffChip
    }
}

/// Time at which `u`'s output is readable by `v`.
pub fn data_ready(u: &DagNode, v: &DagNode, f_u: f64, mode: TransferMode) -> f64 {
    match mode {
        TransferMode::OnChip => f_u + (u.w_on + v.r_on),
        TransferMode::OffChip => f_u + (u.w_off + v.r_off),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("release time {0} is not finite")]
pub struct NonFiniteRelease(pub f64);

/// `max(core_free, release, max(pred_ready))`, with an empty max taken as 0.
pub fn earliest_start<I: IntoIterator<Item = f64>>(
    core_free: f64,
    release: f64,
    pred_ready: I,
) -> Result<f64, NonFiniteRelease> {
    if !release.is_finite() {
        return Err(NonFiniteRelease(release));
    }
    let preds = pred_ready.into_iter().fold(0.0f64, f64::max);
    Ok(core_free.max(release).max(preds))
}

/// Per-core availability times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreState {
    pub chi: Vec<f64>,
}

impl CoreState {
    pub fn idle(cores: usize) -> Self {
        CoreState {
            chi: vec![0.0; cores],
        }
    }
}

/// Transfer decision recorded for one edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeTransfer {
    pub u: NodeId,
    pub v: NodeId,
    pub mode: TransferMode,
}

/// Core assignment and timing of every job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    /// `core[v]` is the core of node `v`.
    pub core: Vec<usize>,
    pub start: Vec<f64>,
    pub finish: Vec<f64>,
    pub transfers: Vec<EdgeTransfer>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use proptest::prelude::*;

    fn node(branch: u32, w_on: f64, r_on: f64, w_off: f64, r_off: f64) -> DagNode {
        DagNode {
            id: NodeId(0),
            branch,
            label: String::new(),
            d_cmp: 1.0,
            r_on,
            w_on,
            r_off,
            w_off,
        }
    }

    #[test]
    fn delta_cases() {
        let b2 = node(2, 0.0, 0.0, 0.0, 0.0);
        let b0 = node(0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(delta(&b2, &b2, 1, 1), TransferMode::OnChip);
        assert_eq!(delta(&b2, &b0, 1, 1), TransferMode::OffChip);
        assert_eq!(delta(&b2, &b2, 0, 1), TransferMode::OffChip);
        assert_eq!(delta(&b0, &b0, 3, 3), TransferMode::OnChip);
    }

    #[test]
    fn data_ready_cases() {
        let u = node(1, 0.2, 0.0, 3.0, 0.0);
        let v = node(1, 0.0, 0.3, 0.0, 4.0);
        assert_eq!(data_ready(&u, &v, 10.0, TransferMode::OnChip), 10.5);
        assert_eq!(data_ready(&u, &v, 10.0, TransferMode::OffChip), 17.0);
        let z = node(1, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(data_ready(&z, &z, 10.0, TransferMode::OffChip), 10.0);
        assert_eq!(data_ready(&z, &z, 10.0, TransferMode::OnChip), 10.0);
    }

    #[test]
    fn earliest_start_cases() {
        assert_eq!(earliest_start(5.0, 0.0, [5.5]).unwrap(), 5.5);
        assert_eq!(earliest_start(0.0, 7.0, []).unwrap(), 7.0);
        assert_eq!(earliest_start(9.0, 2.0, [4.0]).unwrap(), 9.0);
        assert!(earliest_start(0.0, f64::INFINITY, []).is_err());
        assert!(earliest_start(0.0, f64::NAN, []).is_err());
    }

    proptest! {
        #[test]
        fn earliest_start_dominates(
            chi in 0.0f64..100.0,
            rho in 0.0f64..100.0,
            preds in proptest::collection::vec(0.0f64..100.0, 0..6),
        ) {
            let s = earliest_start(chi, rho, preds.iter().copied()).unwrap();
            prop_assert!(s >= chi && s >= rho);
            for p in preds {
                prop_assert!(s >= p);
            }
        }

        #[test]
        fn on_chip_never_later(
            f in 0.0f64..100.0,
            w_on in 0.0f64..1.0, r_on in 0.0f64..1.0,
            dw in 0.0f64..5.0, dr in 0.0f64..5.0,
        ) {
            let u = node(1, w_on, 0.0, w_on + dw, 0.0);
            let v = node(1, 0.0, r_on, 0.0, r_on + dr);
            prop_assert!(
                data_ready(&u, &v, f, TransferMode::OnChip)
                    <= data_ready(&u, &v, f, TransferMode::OffChip)
            );
        }
    }
}
