use std::collections::BTreeMap;

use serde::Serialize;

use crate::ids::{ClusterId, NodeId};
use crate::ledger::{coordinator_of, Coordinator, LedgerEntry};
use crate::topology::ClusterDag;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Task {
    pub id: u32,
    pub cluster: ClusterId,
    /// Number of workers required.
    pub workers: usize,
    pub partner: Option<ClusterId>,
    pub round: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoordinatorDesignation {
    pub node: NodeId,
    /// True while no member is mature and the smallest id stands in.
    pub bootstrap: bool,
}

/// The elected coordinator, or the smallest member id as a temporary stand-in
/// while nobody in the cluster is mature. `None` only for an empty member list.
pub fn bootstrap_coordinator(
    members: &[NodeId],
    entries: &BTreeMap<NodeId, LedgerEntry>,
    maturity: u64,
) -> Option<CoordinatorDesignation> {
    match coordinator_of(entries, members, maturity) {
        Coordinator::Elected(node) => Some(CoordinatorDesignation {
            node,
            bootstrap: false,
        }),
        Coordinator::Bootstrap => members.iter().min().map(|&node| CoordinatorDesignation {
            node,
            bootstrap: true,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Assigned,
    Refused,
    RoutingError,
}

impl TaskStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskStatus::Assigned => "assigned",
            TaskStatus::Refused => "refused",
            TaskStatus::RoutingError => "routing_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskLogEntry {
    pub round: u64,
    pub task_id: u32,
    pub cluster: ClusterId,
    /// Coordinator of the issuing cluster, which distributes the work.
    pub coordinator: Option<NodeId>,
    pub bootstrap: bool,
    pub partner: Option<ClusterId>,
    pub partner_coordinator: Option<NodeId>,
    pub status: TaskStatus,
    pub workers: Vec<NodeId>,
}

/// Picks the `task.workers` members of the issuing cluster with the highest
/// rolling average among those that are mature and at or above `threshold`.
/// Under-staffed tasks are refused rather than given to untrusted nodes.
/// Cross-cluster tasks must target a direct successor of the issuing cluster.
pub fn assign_task(
    task: &Task,
    entries: &BTreeMap<NodeId, LedgerEntry>,
    dag: &ClusterDag,
    threshold: f64,
    maturity: u64,
) -> TaskLogEntry {
    let mut log = TaskLogEntry {
        round: task.round,
        task_id: task.id,
        cluster: task.cluster,
        coordinator: None,
        bootstrap: false,
        partner: task.partner,
        partner_coordinator: None,
        status: TaskStatus::Refused,
        workers: Vec::new(),
    };
    let Some(cluster) = dag.cluster(task.cluster) else {
        log.status = TaskStatus::RoutingError;
        return log;
    };
    let members = cluster.member_list();
    if let Some(c) = bootstrap_coordinator(&members, entries, maturity) {
        log.coordinator = Some(c.node);
        log.bootstrap = c.bootstrap;
    }

    if let Some(partner) = task.partner {
        if !dag.delegation_targets(task.cluster).contains(&partner) {
            log.status = TaskStatus::RoutingError;
            return log;
        }
        let partner_members = dag
            .cluster(partner)
            .map(|c| c.member_list())
            .unwrap_or_default();
        log.partner_coordinator =
            bootstrap_coordinator(&partner_members, entries, maturity).map(|c| c.node);
    }

    let mut eligible: Vec<(NodeId, f64)> = members
        .iter()
        .filter_map(|n| entries.get(n))
        .filter(|e| e.is_mature(maturity) && !e.history.is_empty())
        .filter(|e| e.rolling_average >= threshold)
        .map(|e| (e.node, e.rolling_average))
        .collect();
    if task.workers == 0 || eligible.len() < task.workers {
        return log;
    }
    eligible.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    log.workers = eligible[..task.workers].iter().map(|(n, _)| *n).collect();
    log.status = TaskStatus::Assigned;
    log
}
