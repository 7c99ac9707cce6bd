//! Independent schedule feasibility checks.
//!
//! Recomputes every constraint from the graph and the recorded placement
//! without going through the scheduler's code paths.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::exec::TransferMode;
use crate::graph::{DagGraph, NodeId};
use crate::radg::{ReleaseVector, Schedule};

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleViolation {
    Shape,
    BadCore {
        node: NodeId,
        core: usize,
    },
    FinishIdentity {
        node: NodeId,
    },
    Release {
        node: NodeId,
        start: f64,
        release: f64,
    },
    Precedence {
        u: NodeId,
        v: NodeId,
        ready: f64,
        start: f64,
    },
    TransferMode {
        u: NodeId,
        v: NodeId,
    },
    Overlap {
        core: usize,
        a: NodeId,
        b: NodeId,
    },
    Makespan {
        recorded: f64,
        actual: f64,
    },
    Order,
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleViolation::*;
        match self {
            Shape => write!(f, "placement does not cover every node exactly once"),
            BadCore { node, core } => write!(f, "node {node} on nonexistent core {core}"),
            FinishIdentity { node } => write!(f, "node {node}: finish != start + d_cmp"),
            Release {
                node,
                start,
                release,
            } => {
                write!(
                    f,
                    "node {node} starts at {start} before its release {release}"
                )
            }
            Precedence { u, v, ready, start } => write!(
                f,
                "edge ({u},{v}): consumer starts at {start} before data ready at {ready}"
            ),
            TransferMode { u, v } => {
                write!(
                    f,
                    "edge ({u},{v}): recorded transfer mode disagrees with placement"
                )
            }
            Overlap { core, a, b } => write!(f, "core {core}: nodes {a} and {b} overlap"),
            Makespan { recorded, actual } => {
                write!(f, "makespan {recorded} but latest finish is {actual}")
            }
            Order => write!(f, "recorded order is not a topological permutation"),
        }
    }
}

/// Checks single assignment, non-preemptive timing, releases, precedence
/// with data-ready times, per-core non-overlap and the makespan.
pub fn check_schedule(
    g: &DagGraph,
    rho: &ReleaseVector,
    cores: usize,
    s: &Schedule,
) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    let n = g.len();
    let p = &s.placement;
    if p.core.len() != n || p.start.len() != n || p.finish.len() != n || rho.len() != n {
        out.push(ScheduleViolation::Shape);
        return out;
    }
    for v in 0..n {
        let id = NodeId(v);
        if p.core[v] >= cores || s.cores != cores {
            out.push(ScheduleViolation::BadCore {
                node: id,
                core: p.core[v],
            });
        }
        if p.finish[v] != p.start[v] + g.node(id).d_cmp || !p.start[v].is_finite() {
            out.push(ScheduleViolation::FinishIdentity { node: id });
        }
        if p.start[v] < rho.get(id) {
            out.push(ScheduleViolation::Release {
                node: id,
                start: p.start[v],
                release: rho.get(id),
            });
        }
    }

    for &(u, v) in g.edges() {
        let (a, b) = (g.node(u), g.node(v));
        let local = p.core[u.0] == p.core[v.0] && a.branch == b.branch;
        let ready = if local {
            p.finish[u.0] + (a.w_on + b.r_on)
        } else {
            p.finish[u.0] + (a.w_off + b.r_off)
        };
        if p.start[v.0] < ready {
            out.push(ScheduleViolation::Precedence {
                u,
                v,
                ready,
                start: p.start[v.0],
            });
        }
    }
    if p.transfers.len() != g.edges().len() {
        out.push(ScheduleViolation::Shape);
    }
    for (t, &(u, v)) in p.transfers.iter().zip(g.edges()) {
        let local = p.core[u.0] == p.core[v.0] && g.node(u).branch == g.node(v).branch;
        if t.u != u || t.v != v || (t.mode == TransferMode::OnChip) != local {
            out.push(ScheduleViolation::TransferMode { u, v });
        }
    }

    for c in 0..cores {
        let mut jobs: Vec<usize> = (0..n).filter(|&v| p.core[v] == c).collect();
        jobs.sort_by(|&a, &b| {
            p.start[a]
                .total_cmp(&p.start[b])
                .then(p.finish[a].total_cmp(&p.finish[b]))
        });
        for w in jobs.windows(2) {
            if p.finish[w[0]] > p.start[w[1]] {
                out.push(ScheduleViolation::Overlap {
                    core: c,
                    a: NodeId(w[0]),
                    b: NodeId(w[1]),
                });
            }
        }
    }

    let actual = p.finish.iter().copied().fold(0.0, f64::max);
    if s.makespan != actual {
        out.push(ScheduleViolation::Makespan {
            recorded: s.makespan,
            actual,
        });
    }

    let mut pos = vec![usize::MAX; n];
    let mut order_ok = s.order.len() == n;
    for (i, v) in s.order.iter().enumerate() {
        if v.0 >= n || pos[v.0] != usize::MAX {
            order_ok = false;
            break;
        }
        pos[v.0] = i;
    }
    if order_ok && g.edges().iter().any(|&(u, v)| pos[u.0] >= pos[v.0]) {
        order_ok = false;
    }
    if !order_ok {
        out.push(ScheduleViolation::Order);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radg::schedule;
    use crate::radg::tests::{independent, two_chain};

    #[test]
    fn clean_schedule_passes() {
        let g = two_chain();
        let rho = ReleaseVector::zeros(2);
        let s = schedule(&g, &rho, 2).unwrap();
        assert!(check_schedule(&g, &rho, 2, &s).is_empty());
    }

    #[test]
    fn detects_tampering() {
        let g = two_chain();
        let rho = ReleaseVector::zeros(2);
        let good = schedule(&g, &rho, 2).unwrap();

        let mut s = good.clone();
        s.placement.start[1] = 5.2;
        s.placement.finish[1] = 10.2;
        s.makespan = 10.2;
        assert!(check_schedule(&g, &rho, 2, &s)
            .iter()
            .any(|v| matches!(v, ScheduleViolation::Precedence { .. })));

        let mut s = good.clone();
        s.placement.core[1] = 1;
        assert!(check_schedule(&g, &rho, 2, &s)
            .iter()
            .any(|v| matches!(v, ScheduleViolation::TransferMode { .. })));

        let mut s = good.clone();
        s.placement.finish[0] = 4.0;
        assert!(check_schedule(&g, &rho, 2, &s)
            .contains(&ScheduleViolation::FinishIdentity { node: NodeId(0) }));

        let late = ReleaseVector::from_vec(vec![1.0, 0.0]);
        assert!(check_schedule(&g, &late, 2, &good)
            .iter()
            .any(|v| matches!(v, ScheduleViolation::Release { .. })));

        let mut s = good.clone();
        s.makespan = 11.0;
        assert!(check_schedule(&g, &rho, 2, &s)
            .iter()
            .any(|v| matches!(v, ScheduleViolation::Makespan { .. })));

        let mut s = good;
        s.order.reverse();
        assert!(check_schedule(&g, &rho, 2, &s).contains(&ScheduleViolation::Order));
    }

    #[test]
    fn detects_overlap() {
        let g = independent(&[5.0, 7.0]);
        let rho = ReleaseVector::zeros(2);
        let mut s = schedule(&g, &rho, 2).unwrap();
        s.placement.core[1] = 0;
        let v = check_schedule(&g, &rho, 2, &s);
        assert!(v
            .iter()
            .any(|x| matches!(x, ScheduleViolation::Overlap { core: 0, .. })));
        assert!(check_schedule(&g, &rho, 1, &s)
            .iter()
            .any(|x| matches!(x, ScheduleViolation::BadCore { .. })));
    }
}
