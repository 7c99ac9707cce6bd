//! Exhaustive makespan minimizer for tiny instances.
//!
//! Enumerates every core assignment and every topological order and places
//! each job at its earliest feasible time (a semi-active schedule). Edge
//! costs depend on the assignment only, so for fixed releases the optimum is
//! among the enumerated schedules.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::{DagGraph, NodeId};
use crate::radg::{place_fixed, ReleaseVector, Schedule, ScheduleError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimit {
    pub max_nodes: usize,
    pub max_cores: usize,
    /// Upper bound on (assignment, order) pairs evaluated.
    pub node_budget: u64,
}

impl Default for OracleLimit {
    fn default() -> Self {
        OracleLimit {
            max_nodes: 8,
            max_cores: 2,
            node_budget: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("instance with {nodes} nodes on {cores} cores exceeds the oracle limits")]
    TooLarge { nodes: usize, cores: usize },
    #[error("search space of {needed} states exceeds the budget of {budget}")]
    Budget { needed: u64, budget: u64 },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

fn topological_orders(g: &DagGraph, cap: u64) -> Result<Vec<Vec<usize>>, OracleError> {
    fn rec(
        g: &DagGraph,
        indeg: &mut Vec<usize>,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: u64,
    ) -> bool {
        let n = g.len();
        if cur.len() == n {
            out.push(cur.clone());
            return out.len() as u64 <= cap;
        }
        for v in 0..n {
            if used[v] || indeg[v] != 0 {
                continue;
            }
            used[v] = true;
            cur.push(v);
            for w in g.succs(NodeId(v)) {
                indeg[w.0] -= 1;
            }
            let ok = rec(g, indeg, used, cur, out, cap);
            for w in g.succs(NodeId(v)) {
                indeg[w.0] += 1;
            }
            cur.pop();
            used[v] = false;
            if !ok {
                return false;
            }
        }
        true
    }
    let mut indeg: Vec<usize> = (0..g.len()).map(|v| g.preds(NodeId(v)).len()).collect();
    let mut out = Vec::new();
    let ok = rec(
        g,
        &mut indeg,
        &mut vec![false; g.len()],
        &mut Vec::new(),
        &mut out,
        cap,
    );
    if !ok {
        return Err(OracleError::Budget {
            needed: out.len() as u64,
            budget: cap,
        });
    }
    Ok(out)
}

/// Minimum makespan over all semi-active schedules, with one optimal schedule.
/// Ties go to the lexicographically smallest assignment vector, then order.
pub fn optimal_makespan(
    g: &DagGraph,
    rho: &ReleaseVector,
    cores: usize,
    limit: &OracleLimit,
) -> Result<(f64, Schedule), OracleError> {
    let n = g.len();
    if n > limit.max_nodes || cores > limit.max_cores {
        return Err(OracleError::TooLarge { nodes: n, cores });
    }
    if cores == 0 {
        return Err(ScheduleError::NoCores.into());
    }
    if rho.len() != n {
        return Err(ScheduleError::ReleaseLength {
            expected: n,
            got: rho.len(),
        }
        .into());
    }
    if let Some(v) = rho
        .as_slice()
        .iter()
        .position(|r| !(r.is_finite() && *r >= 0.0))
    {
        return Err(ScheduleError::BadRelease {
            node: NodeId(v),
            value: rho.as_slice()[v],
        }
        .into());
    }
    // surfaces cycles before the enumeration, which would find no order
    g.topological_order().map_err(ScheduleError::from)?;

    let assignments = (cores as u64).saturating_pow(n as u32);
    let orders = topological_orders(g, limit.node_budget)?;
    let needed = assignments.saturating_mul(orders.len() as u64);
    if needed > limit.node_budget {
        return Err(OracleError::Budget {
            needed,
            budget: limit.node_budget,
        });
    }

    let nodes = g.nodes();
    let mut assign = vec![0usize; n];
    let mut finish = vec![0.0f64; n];
    let mut chi = vec![0.0f64; cores];
    let mut best: Option<(f64, Vec<usize>, usize)> = None;
    for _ in 0..assignments {
        for (oi, order) in orders.iter().enumerate() {
            chi.iter_mut().for_each(|c| *c = 0.0);
            let mut span = 0.0f64;
            for &v in order {
                let c = assign[v];
                let node = &nodes[v];
                let mut s = chi[c].max(rho.as_slice()[v]);
                for &u in g.preds(NodeId(v)) {
                    let p = &nodes[u.0];
                    let ready = if assign[u.0] == c && p.branch == node.branch {
                        finish[u.0] + (p.w_on + node.r_on)
                    } else {
                        finish[u.0] + (p.w_off + node.r_off)
                    };
                    s = s.max(ready);
                }
                finish[v] = s + node.d_cmp;
                chi[c] = finish[v];
                span = span.max(finish[v]);
            }
            if best.as_ref().is_none_or(|b| span < b.0) {
                best = Some((span, assign.clone(), oi));
            }
        }
        // next assignment in lexicographic order (node 0 most significant)
        for i in (0..n).rev() {
            assign[i] += 1;
            if assign[i] < cores {
                break;
            }
            assign[i] = 0;
        }
    }

    let (span, assignment, oi) = best.expect("at least one assignment and order");
    let order: Vec<NodeId> = orders[oi].iter().map(|&v| NodeId(v)).collect();
    let schedule = place_fixed(g, rho, cores, &order, &assignment)?;
    debug_assert_eq!(schedule.makespan, span);
    Ok((span, schedule))
}
