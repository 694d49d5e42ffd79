//! Round-based simulation of clustered peers rating one another.
//!
//! Each round: sample interacting pairs per cluster, let both sides of every
//! pair gather synthetic evidence and rate each other, synchronize the ledger
//! replicas, re-elect coordinators, then process the tasks and faults scheduled
//! for the round. Faults change behaviour from the next round on.

pub mod report;
pub mod tasks;

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ClusterId, NodeId};
use crate::ledger::{divergence, sync_replicas, LedgerEntry, LedgerReplica, TrustRecord};
use crate::streams::{derive_seed, purpose, stream};
use crate::taxonomy::{FacetId, FacetKind, Observation, Payload, UncertaintySet};
use crate::topology::{Cluster, ClusterDag};
use crate::trust::TrustEvaluator;

pub use report::{
    AttachRecord, CoordinatorRow, FaultRecord, NodeSummary, SimulationReport, Summary, TaskCounts,
    TrustRow,
};
pub use tasks::{
    assign_task, bootstrap_coordinator, CoordinatorDesignation, Task, TaskLogEntry, TaskStatus,
};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_SAMPLES_PER_OBSERVATION: usize = 8;
pub const DEFAULT_RELIABILITY: f64 = 0.8;
/// Nominal value around which synthetic measurements scatter.
pub const MEASUREMENT_SCALE: f64 = 10.0;

/// Latent behaviour of a node: how reliable its evidence looks, overall and
/// optionally per facet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReliabilityProfile {
    pub reliability: f64,
    pub facets: BTreeMap<FacetId, f64>,
}

impl ReliabilityProfile {
    pub fn new(reliability: f64) -> Result<Self> {
        check_unit("reliability", reliability)?;
        Ok(ReliabilityProfile {
            reliability,
            facets: BTreeMap::new(),
        })
    }

    pub fn with_facet(mut self, facet: FacetId, reliability: f64) -> Result<Self> {
        check_unit("reliability", reliability)?;
        self.facets.insert(facet, reliability);
        Ok(self)
    }

    pub fn for_facet(&self, facet: &FacetId) -> f64 {
        self.facets.get(facet).copied().unwrap_or(self.reliability)
    }

    fn degrade(&mut self, delta: f64) {
        self.reliability = (self.reliability - delta).clamp(0.0, 1.0);
        for r in self.facets.values_mut() {
            *r = (*r - delta).clamp(0.0, 1.0);
        }
    }
}

fn check_unit(what: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} {v} outside [0, 1]")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "snake_case")]
pub enum FaultEffect {
    /// Lower reliability by `delta`, clamped at 0.
    Degrade { delta: f64 },
    /// Return to the baseline profile.
    Restore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaultEvent {
    pub round: u64,
    pub node: NodeId,
    pub effect: FaultEffect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttachEvent {
    pub round: u64,
    pub cluster: Cluster,
    pub fanout: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimParams {
    pub rounds: u64,
    pub interactions_per_round: usize,
    pub maturity: u64,
    pub window: usize,
    pub threshold: f64,
    pub seed: u64,
    pub samples_per_observation: usize,
    pub size_tolerance: f64,
    /// Base seed for bootstrap resampling; per-evaluation seeds derive from it.
    pub resample_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerSeed {
    pub node: NodeId,
    pub history: Vec<f64>,
    pub count: u64,
}

/// A fully resolved, validated simulation input.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub evaluator: TrustEvaluator,
    pub dag: ClusterDag,
    /// Baseline profiles for every node, including nodes of clusters attached later.
    pub profiles: BTreeMap<NodeId, ReliabilityProfile>,
    pub params: SimParams,
    pub ledger_seed: Vec<LedgerSeed>,
    pub tasks: Vec<Task>,
    pub faults: Vec<FaultEvent>,
    pub attaches: Vec<AttachEvent>,
}

/// Synthetic evidence about a node with the given profile. Measurements are
/// `scale * (1 + cap * (1 - r) * z)` with standard normal `z`, so a fully
/// reliable node yields constant readings. Labels are the least uncertain term
/// with probability `r`, otherwise one of the others uniformly.
pub fn generate_evidence<R: Rng>(
    evaluator: &TrustEvaluator,
    profile: &ReliabilityProfile,
    samples: usize,
    rng: &mut R,
) -> Result<UncertaintySet> {
    let cap = evaluator.monte_carlo.dispersion_cap;
    let mut set = UncertaintySet::default();
    for facet in evaluator.taxonomy.facets() {
        let r = profile.for_facet(&facet.id);
        let payload = match facet.kind {
            FacetKind::Aleatoric => {
                let spread = cap * (1.0 - r);
                let values = (0..samples)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        MEASUREMENT_SCALE * (1.0 + spread * z)
                    })
                    .collect();
                Payload::Quant {
                    samples: values,
                    unit: String::new(),
                }
            }
            FacetKind::Epistemic => {
                let Some(first) = facet.terms.first() else {
                    continue;
                };
                let others = &facet.terms[1..];
                let term = if others.is_empty() || rng.random_bool(r) {
                    first
                } else {
                    &others[rng.random_range(0..others.len())]
                };
                Payload::Qual { term: term.clone() }
            }
        };
        set.push(Observation::new(facet, payload)?);
    }
    Ok(set)
}

/// Up to `k` distinct unordered pairs drawn uniformly from `members`.
pub fn sample_pairs<R: Rng>(members: &[NodeId], k: usize, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    let mut all = Vec::new();
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            all.push((a, b));
        }
    }
    let k = k.min(all.len());
    let mut picked = index::sample(rng, all.len(), k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| all[i]).collect()
}

/// Mutable simulation state. [`Simulation::run`] drives it to completion.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    dag: ClusterDag,
    current: BTreeMap<NodeId, ReliabilityProfile>,
    replicas: Vec<LedgerReplica>,
    round: u64,
    report: SimulationReport,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self> {
        let params = &scenario.params;
        let mut template = LedgerReplica::new(ClusterId(0), params.window)?;
        for s in &scenario.ledger_seed {
            template.seed_entry(s.node, &s.history, s.count)?;
        }
        for node in scenario.dag.nodes() {
            if !scenario.profiles.contains_key(&node) {
                return Err(Error::Config(format!("no reliability profile for {node}")));
            }
        }
        let replicas = scenario
            .dag
            .cluster_ids()
            .into_iter()
            .map(|c| LedgerReplica::join(c, &template))
            .collect();
        Ok(Simulation {
            dag: scenario.dag.clone(),
            current: scenario.profiles.clone(),
            replicas,
            round: 0,
            report: SimulationReport::new(params.seed),
            scenario,
        })
    }

    pub fn dag(&self) -> &ClusterDag {
        &self.dag
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn profile(&self, node: NodeId) -> Option<&ReliabilityProfile> {
        self.current.get(&node)
    }

    /// The synchronized ledger view (all replicas agree after every round).
    pub fn entries(&self) -> &BTreeMap<NodeId, LedgerEntry> {
        self.replicas[0].entries()
    }

    pub fn replicas(&self) -> &[LedgerReplica] {
        &self.replicas
    }

    /// The report so far; the summary is filled in by [`Simulation::run`].
    pub fn report(&self) -> &SimulationReport {
        &self.report
    }

    /// Both ratings produced when `a` and `b` interact in `round`: the record
    /// about `a` (rated by `b`), then the record about `b`. Each side rates the
    /// other from evidence drawn from the other's current profile.
    pub fn communication_round(
        &self,
        a: NodeId,
        b: NodeId,
        round: u64,
    ) -> Result<[TrustRecord; 2]> {
        let (ca, cb) = (self.dag.cluster_of(a), self.dag.cluster_of(b));
        if ca.is_none() || ca != cb {
            return Err(Error::Contract(format!(
                "{a} and {b} are not members of the same cluster"
            )));
        }
        Ok([self.rate(b, a, round)?, self.rate(a, b, round)?])
    }

    fn rate(&self, evaluator: NodeId, evaluated: NodeId, round: u64) -> Result<TrustRecord> {
        let p = &self.scenario.params;
        let key = [round, u64::from(evaluator.0), u64::from(evaluated.0)];
        let mut rng = stream(p.seed, &[purpose::EVIDENCE, key[0], key[1], key[2]]);
        let profile = self
            .current
            .get(&evaluated)
            .ok_or_else(|| Error::Config(format!("no reliability profile for {evaluated}")))?;
        let ev = &self.scenario.evaluator;
        let evidence = generate_evidence(ev, profile, p.samples_per_observation, &mut rng)?;
        let rating = ev.evaluate_seeded(
            &evidence,
            None,
            evaluated,
            evaluator,
            round,
            derive_seed(p.resample_seed, &key),
        )?;
        TrustRecord::new(evaluated, evaluator, round, rating.value)
    }

    /// Applies a fault to the current profile. It influences evidence generated
    /// in later rounds only.
    pub fn inject_fault(&mut self, event: &FaultEvent) -> Result<()> {
        let baseline =
            self.scenario.profiles.get(&event.node).ok_or_else(|| {
                Error::Config(format!("fault targets unknown node {}", event.node))
            })?;
        match event.effect {
            FaultEffect::Degrade { delta } => {
                let cur = self
                    .current
                    .entry(event.node)
                    .or_insert_with(|| baseline.clone());
                cur.degrade(delta);
            }
            FaultEffect::Restore => {
                self.current.insert(event.node, baseline.clone());
            }
        }
        self.report.faults.push(FaultRecord {
            round: event.round,
            node: event.node,
            effect: event.effect,
            reliability_after: self.current[&event.node].reliability,
        });
        Ok(())
    }

    fn replica_index(&self, cluster: ClusterId) -> Option<usize> {
        self.replicas.iter().position(|r| r.cluster() == cluster)
    }

    fn attach(&mut self, event: &AttachEvent) -> Result<()> {
        let means = self.dag.mean_trust(self.entries());
        let targets = self
            .dag
            .attach_cluster(event.cluster.clone(), &means, event.fanout)?;
        let replica = LedgerReplica::join(event.cluster.id, &self.replicas[0]);
        self.replicas.push(replica);
        self.report.attachments.push(AttachRecord {
            round: event.round,
            cluster: event.cluster.id,
            members: event.cluster.member_list(),
            targets,
        });
        Ok(())
    }

    /// Runs one round.
    pub fn step(&mut self) -> Result<()> {
        let round = self.round;
        let p = self.scenario.params.clone();

        let attaches: Vec<AttachEvent> = self
            .scenario
            .attaches
            .iter()
            .filter(|a| a.round == round)
            .cloned()
            .collect();
        for a in &attaches {
            self.attach(a)?;
        }

        let mut pairs = Vec::new();
        for cluster in self.dag.clusters() {
            let members = cluster.member_list();
            let mut rng = stream(p.seed, &[purpose::PAIRS, round, u64::from(cluster.id.0)]);
            for (a, b) in sample_pairs(&members, p.interactions_per_round, &mut rng) {
                pairs.push((cluster.id, a, b));
            }
        }
        let records = pairs
            .iter()
            .map(|&(c, a, b)| Ok((c, self.communication_round(a, b, round)?)))
            .collect::<Result<Vec<_>>>()?;
        for (cluster, pair) in records {
            let i = self
                .replica_index(cluster)
                .ok_or_else(|| Error::Contract(format!("no ledger replica for {cluster}")))?;
            for rec in pair {
                self.replicas[i].record_evaluation(rec)?;
            }
        }
        sync_replicas(&mut self.replicas);
        let div = divergence(&self.replicas);
        self.report.divergence.push(div);

        let entries = self.replicas[0].entries().clone();
        let mut coordinators = BTreeMap::new();
        for cluster in self.dag.clusters() {
            if let Some(c) = bootstrap_coordinator(&cluster.member_list(), &entries, p.maturity) {
                coordinators.insert(cluster.id, c.node);
                self.report.coordinators.push(CoordinatorRow {
                    round,
                    cluster: cluster.id,
                    node: c.node,
                    bootstrap: c.bootstrap,
                });
            }
        }
        for node in self.dag.nodes() {
            let cluster = self
                .dag
                .cluster_of(node)
                .expect("node belongs to a cluster");
            let entry = entries.get(&node).filter(|e| !e.history.is_empty());
            self.report.trust.push(TrustRow {
                round,
                node,
                cluster,
                rolling_average: entry.map(|e| e.rolling_average),
                count: entry.map_or(0, |e| e.count),
                is_coordinator: coordinators.get(&cluster) == Some(&node),
            });
        }

        for task in self.scenario.tasks.iter().filter(|t| t.round == round) {
            let log = assign_task(task, &entries, &self.dag, p.threshold, p.maturity);
            self.report.tasks.push(log);
        }
        let faults: Vec<FaultEvent> = self
            .scenario
            .faults
            .iter()
            .filter(|f| f.round == round)
            .copied()
            .collect();
        for f in &faults {
            self.inject_fault(f)?;
        }

        self.round += 1;
        Ok(())
    }

    /// Runs all remaining rounds and returns the report.
    pub fn run(mut self) -> Result<SimulationReport> {
        while self.round < self.scenario.params.rounds {
            self.step()?;
        }
        Ok(self.finish())
    }

    fn finish(mut self) -> SimulationReport {
        let latent: BTreeMap<NodeId, f64> = self
            .scenario
            .profiles
            .iter()
            .map(|(n, p)| (*n, p.reliability))
            .collect();
        self.report.summarize(&self.dag, &latent, self.round);
        self.report
    }
}

/// Convenience: build and run.
pub fn run(scenario: Scenario) -> Result<SimulationReport> {
    Simulation::new(scenario)?.run()
}
