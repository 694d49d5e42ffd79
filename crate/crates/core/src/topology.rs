//! Peer-to-peer clusters arranged as vertices of a directed acyclic graph.
//!
//! An edge `A -> B` means cluster A may delegate decision-making work to B,
//! so a cluster's delegation partners are its direct successors.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ids::{ClusterId, NodeId};
use crate::ledger::LedgerEntry;

pub const DEFAULT_FANOUT: usize = 2;
pub const DEFAULT_SIZE_TOLERANCE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub id: ClusterId,
    pub members: BTreeSet<NodeId>,
}

impl Cluster {
    pub fn new(id: ClusterId, members: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let members: BTreeSet<NodeId> = members.into_iter().collect();
        if members.is_empty() {
            return Err(Error::Contract(format!("cluster {id} has no members")));
        }
        Ok(Cluster { id, members })
    }

    pub fn member_list(&self) -> Vec<NodeId> {
        self.members.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Acyclicity {
    /// Clusters in a topological order (ready clusters taken smallest id first).
    Order(Vec<ClusterId>),
    /// Vertices of one directed cycle, in edge order.
    Cycle(Vec<ClusterId>),
}

impl Acyclicity {
    pub fn is_acyclic(&self) -> bool {
        matches!(self, Acyclicity::Order(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeFlag {
    pub smaller: ClusterId,
    pub larger: ClusterId,
    pub ratio: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClusterDag {
    clusters: BTreeMap<ClusterId, Cluster>,
    edges: BTreeSet<(ClusterId, ClusterId)>,
    #[serde(skip)]
    membership: BTreeMap<NodeId, ClusterId>,
}

impl ClusterDag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clusters(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.values()
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.get(&id)
    }

    pub fn cluster_ids(&self) -> Vec<ClusterId> {
        self.clusters.keys().copied().collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (ClusterId, ClusterId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cluster_of(&self, node: NodeId) -> Option<ClusterId> {
        self.membership.get(&node).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.membership.keys().copied()
    }

    /// Adds a vertex with no edges. Membership must stay a partition.
    pub fn add_cluster(&mut self, cluster: Cluster) -> Result<()> {
        if self.clusters.contains_key(&cluster.id) {
            return Err(Error::Contract(format!("duplicate cluster {}", cluster.id)));
        }
        if let Some(n) = cluster
            .members
            .iter()
            .find(|n| self.membership.contains_key(n))
        {
            return Err(Error::Contract(format!(
                "{n} already belongs to {}",
                self.membership[n]
            )));
        }
        for &n in &cluster.members {
            self.membership.insert(n, cluster.id);
        }
        self.clusters.insert(cluster.id, cluster);
        Ok(())
    }

    /// Adds an edge without checking for cycles; see [`ClusterDag::validate_acyclic`].
    pub fn add_edge(&mut self, from: ClusterId, to: ClusterId) -> Result<()> {
        for c in [from, to] {
            if !self.clusters.contains_key(&c) {
                return Err(Error::Contract(format!("unknown cluster {c}")));
            }
        }
        if from == to {
            return Err(Error::Contract(format!("self-loop on {from}")));
        }
        if !self.edges.insert((from, to)) {
            return Err(Error::Contract(format!("duplicate edge {from} -> {to}")));
        }
        Ok(())
    }

    pub fn validate_acyclic(&self) -> Acyclicity {
        let mut indegree: BTreeMap<ClusterId, usize> =
            self.clusters.keys().map(|&c| (c, 0)).collect();
        for &(_, to) in &self.edges {
            *indegree.get_mut(&to).expect("edge endpoints exist") += 1;
        }
        let mut ready: BTreeSet<ClusterId> = indegree
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&c, _)| c)
            .collect();
        let mut order = Vec::with_capacity(self.clusters.len());
        while let Some(c) = ready.pop_first() {
            order.push(c);
            for s in self.delegation_targets(c) {
                let d = indegree.get_mut(&s).expect("edge endpoints exist");
                *d -= 1;
                if *d == 0 {
                    ready.insert(s);
                }
            }
        }
        if order.len() == self.clusters.len() {
            return Acyclicity::Order(order);
        }
        let done: BTreeSet<ClusterId> = order.into_iter().collect();
        Acyclicity::Cycle(self.find_cycle(&done))
    }

    // Every vertex left after Kahn's pass has a predecessor that is also left,
    // so walking backwards must revisit a vertex.
    fn find_cycle(&self, done: &BTreeSet<ClusterId>) -> Vec<ClusterId> {
        let start = *self
            .clusters
            .keys()
            .find(|c| !done.contains(c))
            .expect("some vertex remains");
        let mut path = vec![start];
        let mut cur = start;
        loop {
            let prev = self
                .edges
                .iter()
                .find(|&&(from, to)| to == cur && !done.contains(&from))
                .map(|&(from, _)| from)
                .expect("remaining vertex has a remaining predecessor");
            if let Some(pos) = path.iter().position(|&c| c == prev) {
                let mut cycle: Vec<ClusterId> = path[pos..].to_vec();
                cycle.reverse();
                return cycle;
            }
            path.push(prev);
            cur = prev;
        }
    }

    /// Direct successors of `cluster`: the legal partners for cross-cluster work.
    pub fn delegation_targets(&self, cluster: ClusterId) -> Vec<ClusterId> {
        self.edges
            .range((cluster, ClusterId(0))..=(cluster, ClusterId(u32::MAX)))
            .map(|&(_, to)| to)
            .collect()
    }

    /// Adds `cluster` with edges to the `fanout` existing clusters of highest mean
    /// trust (ties to the smaller id). Returns the chosen targets. The new vertex
    /// has no in-edges, so the graph stays acyclic.
    pub fn attach_cluster(
        &mut self,
        cluster: Cluster,
        mean_trust: &BTreeMap<ClusterId, f64>,
        fanout: usize,
    ) -> Result<Vec<ClusterId>> {
        let mut ranked: Vec<(ClusterId, f64)> = self
            .clusters
            .keys()
            .map(|&c| (c, mean_trust.get(&c).copied().unwrap_or(0.0)))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let targets: Vec<ClusterId> = ranked.into_iter().take(fanout).map(|(c, _)| c).collect();
        let id = cluster.id;
        self.add_cluster(cluster)?;
        for &t in &targets {
            self.add_edge(id, t)?;
        }
        Ok(targets)
    }

    /// Mean rolling average over each cluster's rated members; clusters with no
    /// rated member score 0.
    pub fn mean_trust(&self, entries: &BTreeMap<NodeId, LedgerEntry>) -> BTreeMap<ClusterId, f64> {
        self.clusters
            .values()
            .map(|c| {
                let rated: Vec<f64> = c
                    .members
                    .iter()
                    .filter_map(|n| entries.get(n))
                    .filter(|e| !e.history.is_empty())
                    .map(|e| e.rolling_average)
                    .collect();
                let mean = if rated.is_empty() {
                    0.0
                } else {
                    rated.iter().sum::<f64>() / rated.len() as f64
                };
                (c.id, mean)
            })
            .collect()
    }

    /// Cluster pairs whose size ratio (larger / smaller) exceeds `tolerance`.
    pub fn size_uniformity_report(&self, tolerance: f64) -> Vec<SizeFlag> {
        let sizes: Vec<(ClusterId, usize)> = self
            .clusters
            .values()
            .map(|c| (c.id, c.members.len()))
            .collect();
        let mut flags = Vec::new();
        for (i, &(a, sa)) in sizes.iter().enumerate() {
            for &(b, sb) in &sizes[i + 1..] {
                let (smaller, larger, lo, hi) = if sa <= sb {
                    (a, b, sa, sb)
                } else {
                    (b, a, sb, sa)
                };
                let ratio = hi as f64 / lo as f64;
                if ratio > tolerance {
                    flags.push(SizeFlag {
                        smaller,
                        larger,
                        ratio,
                    });
                }
            }
        }
        flags
    }
}
