use std::collections::BTreeMap;

use serde::Serialize;

use super::tasks::{TaskLogEntry, TaskStatus};
use super::FaultEffect;
use crate::ids::{ClusterId, NodeId};
use crate::stats::spearman;
use crate::topology::ClusterDag;

/// One node's ledger state at the end of a round. `rolling_average` is `None`
/// until the node has been rated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrustRow {
    pub round: u64,
    pub node: NodeId,
    pub cluster: ClusterId,
    pub rolling_average: Option<f64>,
    pub count: u64,
    pub is_coordinator: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoordinatorRow {
    pub round: u64,
    pub cluster: ClusterId,
    pub node: NodeId,
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttachRecord {
    pub round: u64,
    pub cluster: ClusterId,
    pub members: Vec<NodeId>,
    pub targets: Vec<ClusterId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaultRecord {
    pub round: u64,
    pub node: NodeId,
    #[serde(flatten)]
    pub effect: FaultEffect,
    pub reliability_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSummary {
    pub node: NodeId,
    pub cluster: ClusterId,
    pub latent_reliability: f64,
    pub final_rolling_average: Option<f64>,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TaskCounts {
    pub assigned: usize,
    pub refused: usize,
    pub routing_error: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub rounds: u64,
    pub nodes: Vec<NodeSummary>,
    pub final_coordinators: Vec<CoordinatorRow>,
    /// Rows where a cluster's coordinator (or its bootstrap flag) changed.
    pub coordinator_changes: Vec<CoordinatorRow>,
    /// Spearman correlation between latent reliability and final rolling
    /// average over rated nodes; `None` with fewer than two distinct values.
    pub rank_correlation: Option<f64>,
    pub tasks: TaskCounts,
    pub max_divergence: usize,
    pub attachments: Vec<AttachRecord>,
    pub faults: Vec<FaultRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub trust: Vec<TrustRow>,
    pub coordinators: Vec<CoordinatorRow>,
    pub tasks: Vec<TaskLogEntry>,
    /// Replicas out of agreement after each round's sync.
    pub divergence: Vec<usize>,
    pub attachments: Vec<AttachRecord>,
    pub faults: Vec<FaultRecord>,
    pub summary: Summary,
}

impl SimulationReport {
    pub(crate) fn new(seed: u64) -> Self {
        SimulationReport {
            seed,
            ..Default::default()
        }
    }

    /// Coordinator of `cluster` at `round`, if the cluster existed then.
    pub fn coordinator_at(&self, cluster: ClusterId, round: u64) -> Option<CoordinatorRow> {
        self.coordinators
            .iter()
            .find(|c| c.cluster == cluster && c.round == round)
            .copied()
    }

    /// Trust rows for the last simulated round.
    pub fn final_rows(&self) -> Vec<&TrustRow> {
        let Some(last) = self.trust.last().map(|r| r.round) else {
            return Vec::new();
        };
        self.trust.iter().filter(|r| r.round == last).collect()
    }

    pub fn coordinator_changes(&self) -> Vec<CoordinatorRow> {
        let mut last: BTreeMap<ClusterId, (NodeId, bool)> = BTreeMap::new();
        let mut out = Vec::new();
        for row in &self.coordinators {
            let now = (row.node, row.bootstrap);
            if last.insert(row.cluster, now) != Some(now) {
                out.push(*row);
            }
        }
        out
    }

    pub(crate) fn summarize(
        &mut self,
        dag: &ClusterDag,
        latent: &BTreeMap<NodeId, f64>,
        rounds: u64,
    ) {
        let final_rows = self.final_rows();
        let nodes: Vec<NodeSummary> = dag
            .nodes()
            .map(|node| {
                let row = final_rows.iter().find(|r| r.node == node);
                NodeSummary {
                    node,
                    cluster: dag.cluster_of(node).expect("node belongs to a cluster"),
                    latent_reliability: latent.get(&node).copied().unwrap_or(f64::NAN),
                    final_rolling_average: row.and_then(|r| r.rolling_average),
                    count: row.map_or(0, |r| r.count),
                }
            })
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = nodes
            .iter()
            .filter_map(|n| n.final_rolling_average.map(|t| (n.latent_reliability, t)))
            .unzip();
        let last_round = self.coordinators.last().map(|c| c.round);
        let final_coordinators = self
            .coordinators
            .iter()
            .filter(|c| Some(c.round) == last_round)
            .copied()
            .collect();
        let mut tasks = TaskCounts::default();
        for t in &self.tasks {
            match t.status {
                TaskStatus::Assigned => tasks.assigned += 1,
                TaskStatus::Refused => tasks.refused += 1,
                TaskStatus::RoutingError => tasks.routing_error += 1,
            }
        }
        self.summary = Summary {
            seed: self.seed,
            rounds,
            nodes,
            final_coordinators,
            coordinator_changes: self.coordinator_changes(),
            rank_correlation: spearman(&xs, &ys),
            tasks,
            max_divergence: self.divergence.iter().copied().max().unwrap_or(0),
            attachments: self.attachments.clone(),
            faults: self.faults.clone(),
        };
    }
}
