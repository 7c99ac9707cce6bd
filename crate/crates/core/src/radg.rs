//! Release-aware greedy DAG list scheduling.
//!
//! Jobs are taken in a topological order computed once per call. Each job is
//! tried on every core; it starts at the latest of the core's availability,
//! its own release and the data-ready time of every predecessor (evaluated for
//! that core), and goes to the core with the earliest finish, ties to the
//! lowest core index. Cores are modeled by a single availability time, so no
//! job is inserted into an idle gap.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::exec::{data_ready, delta, EdgeTransfer, Placement};
use crate::graph::{DagGraph, GraphError, NodeId, Violation};

/// Topological order used by the scheduler.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderRule {
    /// Kahn order, smallest ready id first. Independent of releases.
    #[default]
    MinId,
    /// Kahn order, ready nodes by ascending `(release, id)`.
    ReleaseSorted,
}

/// Per-node release times in ms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReleaseVector {
    rho: Vec<f64>,
}

impl ReleaseVector {
    pub fn zeros(nodes: usize) -> Self {
        ReleaseVector {
            rho: vec![0.0; nodes],
        }
    }

    pub fn from_vec(rho: Vec<f64>) -> Self {
        ReleaseVector { rho }
    }

    /// Zero everywhere except entry nodes: `per_band_ms[k - 1]` on the entry of branch `k`.
    pub fn from_band_releases(g: &DagGraph, per_band_ms: &[f64]) -> Self {
        let mut r = Self::zeros(g.len());
        for (i, &ms) in per_band_ms.iter().enumerate() {
            if let Some(e) = g.entry_of_branch(i as u32 + 1) {
                r.rho[e.0] = ms;
            }
        }
        r
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn get(&self, v: NodeId) -> f64 {
        self.rho[v.0]
    }

    pub fn set(&mut self, v: NodeId, ms: f64) {
        self.rho[v.0] = ms;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rho
    }
}

/// A complete assignment and timing of every job.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub cores: usize,
    pub placement: Placement,
    pub makespan: f64,
    pub order: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("at least one core is required")]
    NoCores,
    #[error("release vector has {got} entries for {expected} nodes")]
    ReleaseLength { expected: usize, got: usize },
    #[error("release of node {node} is {value}; releases must be finite and non-negative")]
    BadRelease { node: NodeId, value: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph cannot be scheduled: {0}")]
    InvalidGraph(Violation),
    #[error("order or assignment does not cover the graph")]
    BadPlan,
}

/// Greedy scheduler bound to one graph and core count.
#[derive(Clone, Debug)]
pub struct Radg<'g> {
    graph: &'g DagGraph,
    cores: usize,
    rule: OrderRule,
    min_id_order: Vec<NodeId>,
}

impl<'g> Radg<'g> {
    pub fn new(graph: &'g DagGraph, cores: usize, rule: OrderRule) -> Result<Self, ScheduleError> {
        if cores == 0 {
            return Err(ScheduleError::NoCores);
        }
        if let Some(v) = graph.validate().into_iter().find(|v| {
            matches!(
                v,
                Violation::IdMismatch { .. }
                    | Violation::BadCost { .. }
                    | Violation::MissingEndpoint { .. }
            )
        }) {
            return Err(ScheduleError::InvalidGraph(v));
        }
        let min_id_order = graph.topological_order()?;
        Ok(Radg {
            graph,
            cores,
            rule,
            min_id_order,
        })
    }

    pub fn graph(&self) -> &'g DagGraph {
        self.graph
    }

    pub fn cores(&self) -> usize {
        self.cores
    }

    fn check_releases(&self, rho: &ReleaseVector) -> Result<(), ScheduleError> {
        if rho.len() != self.graph.len() {
            return Err(ScheduleError::ReleaseLength {
                expected: self.graph.len(),
                got: rho.len(),
            });
        }
        for (i, &r) in rho.as_slice().iter().enumerate() {
            if !(r.is_finite() && r >= 0.0) {
                return Err(ScheduleError::BadRelease {
                    node: NodeId(i),
                    value: r,
                });
            }
        }
        Ok(())
    }

    fn order_for(&self, rho: &ReleaseVector) -> Result<Vec<NodeId>, ScheduleError> {
        match self.rule {
            OrderRule::MinId => Ok(self.min_id_order.clone()),
            // bit patterns of non-negative finite floats sort like the floats
            OrderRule::ReleaseSorted => {
                Ok(self.graph.topological_order_by(|v| rho.get(v).to_bits())?)
            }
        }
    }

    /// Greedy pass over `order`; nodes with `active[v] == false` are skipped
    /// and their outgoing edges ignored. Returns per-node (core, start, finish).
    fn pass(
        &self,
        order: &[NodeId],
        rho: &ReleaseVector,
        active: Option<&[bool]>,
    ) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
        let g = self.graph;
        let n = g.len();
        let mut chi = vec![0.0f64; self.cores];
        let mut core = vec![usize::MAX; n];
        let mut start = vec![0.0f64; n];
        let mut finish = vec![0.0f64; n];
        let on = |v: NodeId| active.is_none_or(|a| a[v.0]);
        for &v in order {
            if !on(v) {
                continue;
            }
            let node = g.node(v);
            let mut best_f = f64::INFINITY;
            let mut best_s = 0.0;
            let mut best_c = 0;
            for (c, &free) in chi.iter().enumerate() {
                let mut s = free.max(rho.get(v));
                for &u in g.preds(v) {
                    if !on(u) {
                        continue;
                    }
                    let pu = g.node(u);
                    let mode = delta(pu, node, core[u.0], c);
                    s = s.max(data_ready(pu, node, finish[u.0], mode));
                }
                let f = s + node.d_cmp;
                if f < best_f {
                    best_f = f;
                    best_s = s;
                    best_c = c;
                }
            }
            core[v.0] = best_c;
            start[v.0] = best_s;
            finish[v.0] = best_f;
            chi[best_c] = best_f;
        }
        (core, start, finish)
    }

    pub fn schedule(&self, rho: &ReleaseVector) -> Result<Schedule, ScheduleError> {
        self.check_releases(rho)?;
        let order = self.order_for(rho)?;
        let (core, start, finish) = self.pass(&order, rho, None);
        Ok(assemble(self.graph, self.cores, order, core, start, finish))
    }

    /// Makespan of [`Radg::schedule`] without building the schedule record.
    pub fn makespan(&self, rho: &ReleaseVector) -> Result<f64, ScheduleError> {
        self.check_releases(rho)?;
        let order = self.order_for(rho)?;
        let (_, _, finish) = self.pass(&order, rho, None);
        Ok(finish.into_iter().fold(0.0, f64::max))
    }

    /// Makespan over the jobs that can run once every entry not in `pending`
    /// is released: a job counts if it is a source that is not pending, or if
    /// any of its predecessors counts. Edges from excluded jobs are ignored.
    /// Releases of pending entries are never read.
    pub fn partial_makespan(
        &self,
        rho: &ReleaseVector,
        pending: &[NodeId],
    ) -> Result<f64, ScheduleError> {
        let g = self.graph;
        let mut rho = rho.clone();
        for &p in pending {
            rho.set(p, 0.0);
        }
        self.check_releases(&rho)?;
        let mut active = vec![false; g.len()];
        for &v in &self.min_id_order {
            active[v.0] = if g.preds(v).is_empty() {
                !pending.contains(&v)
            } else {
                g.preds(v).iter().any(|u| active[u.0])
            };
        }
        let order = self.order_for(&rho)?;
        let (_, _, finish) = self.pass(&order, &rho, Some(&active));
        Ok(finish
            .iter()
            .zip(&active)
            .filter(|(_, a)| **a)
            .map(|(f, _)| *f)
            .fold(0.0, f64::max))
    }
}

fn assemble(
    g: &DagGraph,
    cores: usize,
    order: Vec<NodeId>,
    core: Vec<usize>,
    start: Vec<f64>,
    finish: Vec<f64>,
) -> Schedule {
    let transfers = g
        .edges()
        .iter()
        .map(|&(u, v)| EdgeTransfer {
            u,
            v,
            mode: delta(g.node(u), g.node(v), core[u.0], core[v.0]),
        })
        .collect();
    let makespan = finish.iter().copied().fold(0.0, f64::max);
    Schedule {
        cores,
        placement: Placement {
            core,
            start,
            finish,
            transfers,
        },
        makespan,
        order,
    }
}

/// Schedules `g` with the default min-id order.
pub fn schedule(
    g: &DagGraph,
    rho: &ReleaseVector,
    cores: usize,
) -> Result<Schedule, ScheduleError> {
    Radg::new(g, cores, OrderRule::MinId)?.schedule(rho)
}

/// Semi-active placement for a fixed order and core assignment: each job
/// starts as early as its core (in order), release and inputs allow.
pub fn place_fixed(
    g: &DagGraph,
    rho: &ReleaseVector,
    cores: usize,
    order: &[NodeId],
    assignment: &[usize],
) -> Result<Schedule, ScheduleError> {
    if cores == 0 {
        return Err(ScheduleError::NoCores);
    }
    let n = g.len();
    if order.len() != n || assignment.len() != n || assignment.iter().any(|&c| c >= cores) {
        return Err(ScheduleError::BadPlan);
    }
    let mut chi = vec![0.0f64; cores];
    let mut start = vec![0.0; n];
    let mut finish = vec![0.0; n];
    let mut placed = vec![false; n];
    for &v in order {
        if v.0 >= n || placed[v.0] {
            return Err(ScheduleError::BadPlan);
        }
        let c = assignment[v.0];
        let node = g.node(v);
        let mut s = chi[c].max(rho.get(v));
        for &u in g.preds(v) {
            if !placed[u.0] {
                return Err(ScheduleError::BadPlan);
            }
            let pu = g.node(u);
            s = s.max(data_ready(
                pu,
                node,
                finish[u.0],
                delta(pu, node, assignment[u.0], c),
            ));
        }
        start[v.0] = s;
        finish[v.0] = s + node.d_cmp;
        chi[c] = finish[v.0];
        placed[v.0] = true;
    }
    Ok(assemble(
        g,
        cores,
        order.to_vec(),
        assignment.to_vec(),
        start,
        finish,
    ))
}
