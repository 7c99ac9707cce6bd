//! Joint scheduling of multi-band radar sensing and multi-branch DNN inference
//! on a multi-core accelerator.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the pure parts of
//! the simulator:
//!
//! * [`graph`]: the multi-branch inference DAG, its generator and validation.
//! * [`sensing`]: slot-based band sensing (feasibility, information gain,
//!   accumulation and completion slots).
//! * [`exec`]: mapping-dependent data-ready and start times.
//! * [`radg`]: the release-aware greedy list scheduler.
//! * [`policies`]: the rollout joint policy and the decoupled baseline.
//! * [`oracle`]: an exhaustive makespan minimizer for tiny instances.
//! * [`verify`]: independent feasibility checks for schedules.
//!
//! IO, file formats and the command-line tool live in the `sensedag` crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod exec;
pub mod graph;
pub mod oracle;
pub mod policies;
pub mod radg;
pub mod sensing;
pub mod verify;

pub use exec::{CoreState, Placement, TransferMode};
pub use graph::{CostRange, CostRanges, DagGraph, DagNode, DagTopologySpec, GraphError, NodeId};
pub use oracle::{optimal_makespan, OracleError, OracleLimit};
pub use policies::{
    run_decoupled, run_joint, run_policy, Estimator, PolicyConfig, PolicyError, PolicyKind,
    RunResult, Scenario,
};
pub use radg::{OrderRule, Radg, ReleaseVector, Schedule, ScheduleError};
pub use sensing::{BandSpec, SensingParams, SensingState, SensingTrace, SinrTrace};

/// Derives an independent 64-bit seed from a master seed and a stream tag
/// (SplitMix64 finalizer applied to `master ^ tag`).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = (master ^ stream).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
