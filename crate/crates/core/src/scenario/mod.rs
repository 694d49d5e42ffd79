//! Scenario files: a TOML description of the taxonomy, fuzzy rule base, Monte
//! Carlo settings, weights, cluster topology, node profiles, and the schedule of
//! tasks, faults and cluster attachments.
//!
//! [`ScenarioConfig`] is the raw, serde-facing form. [`ScenarioConfig::validate`]
//! collects every problem at once; [`ScenarioConfig::compile`] turns a clean
//! config into a runnable [`Scenario`].

mod bundle;
mod evidence;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use bundle::{write_bundle, SummaryDocument, SUMMARY_FILE, TASK_LOG_FILE, TRUST_FILE};
pub use evidence::{parse_evidence, Evidence};

use crate::aleatoric::{MonteCarloConfig, DEFAULT_DISPERSION_CAP, DEFAULT_TRIALS};
use crate::error::{Error, Result};
use crate::fuzzy::{EpistemicQuantifier, RuleBase, RuleBaseSpec};
use crate::ids::{ClusterId, NodeId};
use crate::ledger::{DEFAULT_MATURITY, DEFAULT_WINDOW};
use crate::sim::{
    AttachEvent, FaultEffect, FaultEvent, LedgerSeed, ReliabilityProfile, Scenario, SimParams,
    Task, DEFAULT_RELIABILITY, DEFAULT_SAMPLES_PER_OBSERVATION, DEFAULT_THRESHOLD,
};
use crate::streams::{derive_seed, purpose};
use crate::taxonomy::{
    canonical_specs, default_term_set, validate_scenario_taxonomy, FacetKind, SourceSpec, Taxonomy,
};
use crate::topology::{Acyclicity, Cluster, ClusterDag, DEFAULT_FANOUT, DEFAULT_SIZE_TOLERANCE};
use crate::trust::TrustEvaluator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub taxonomy: TaxonomySection,
    /// Omitted: the built-in three-term rule base.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuzzy: Option<RuleBaseSpec>,
    #[serde(default)]
    pub montecarlo: MonteCarloSection,
    /// Per-source weight overrides, keyed by source name.
    #[serde(default)]
    pub weights: BTreeMap<String, f64>,
    pub topology: TopologySection,
    #[serde(default)]
    pub profiles: ProfilesSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomySection {
    /// Start from the eleven built-in sources.
    #[serde(default = "yes")]
    pub canonical: bool,
    /// Linguistic terms for epistemic facets, least uncertain first.
    #[serde(default = "default_term_set")]
    pub terms: Vec<String>,
    /// Extra sources, or replacements for built-in ones with the same name
    /// (typically to give an explicit facet decomposition).
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
}

impl Default for TaxonomySection {
    fn default() -> Self {
        TaxonomySection {
            canonical: true,
            terms: default_term_set(),
            sources: Vec::new(),
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_cap")]
    pub dispersion_cap: f64,
    /// Omitted: derived from the simulation seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        MonteCarloSection {
            trials: DEFAULT_TRIALS,
            dispersion_cap: DEFAULT_DISPERSION_CAP,
            seed: None,
        }
    }
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_cap() -> f64 {
    DEFAULT_DISPERSION_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub id: u32,
    pub members: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub clusters: Vec<ClusterSpec>,
    /// Directed delegation edges `[from, to]` between cluster ids.
    #[serde(default)]
    pub edges: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub node: u32,
    pub reliability: f64,
    /// Per-facet reliability, keyed by facet name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub facets: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesSection {
    #[serde(default = "default_reliability")]
    pub default_reliability: f64,
    #[serde(default)]
    pub nodes: Vec<ProfileSpec>,
}

impl Default for ProfilesSection {
    fn default() -> Self {
        ProfilesSection {
            default_reliability: DEFAULT_RELIABILITY,
            nodes: Vec::new(),
        }
    }
}

fn default_reliability() -> f64 {
    DEFAULT_RELIABILITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: u32,
    pub round: u64,
    pub cluster: u32,
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<u32>,
    /// Re-issue the task every this many rounds after `round`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub every: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub round: u64,
    pub node: u32,
    #[serde(flatten)]
    pub effect: FaultEffect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachSpec {
    pub round: u64,
    pub cluster: ClusterSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fanout: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub faults: Vec<FaultSpec>,
    #[serde(default)]
    pub attach: Vec<AttachSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerSeedSpec {
    pub node: u32,
    pub history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub rounds: u64,
    pub seed: u64,
    pub interactions_per_round: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_maturity")]
    pub maturity: u64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_samples")]
    pub samples_per_observation: usize,
    #[serde(default = "default_fanout")]
    pub fanout: usize,
    #[serde(default = "default_tolerance")]
    pub size_tolerance: f64,
    /// Pre-existing ledger history, applied before round 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ledger_seed: Vec<LedgerSeedSpec>,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_maturity() -> u64 {
    DEFAULT_MATURITY
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES_PER_OBSERVATION
}

fn default_fanout() -> usize {
    DEFAULT_FANOUT
}

fn default_tolerance() -> f64 {
    DEFAULT_SIZE_TOLERANCE
}

/// Everything wrong with a scenario, plus non-fatal warnings.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, section: &str, msg: impl fmt::Display) {
        self.errors.push(format!("[{section}] {msg}"));
    }

    fn warn(&mut self, section: &str, msg: impl fmt::Display) {
        self.warnings.push(format!("[{section}] {msg}"));
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Input(format!("scenario parse error: {e}")))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Input(format!("scenario serialize error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Collects every problem without stopping at the first.
    pub fn validate(&self) -> ValidationReport {
        match self.compile() {
            Ok((_, report)) | Err(report) => report,
        }
    }

    /// The runnable scenario plus any warnings, or the full report on failure.
    pub fn compile(&self) -> std::result::Result<(Scenario, ValidationReport), ValidationReport> {
        let mut report = ValidationReport::default();

        let taxonomy = self.check_taxonomy(&mut report);
        let quantifier = self.check_rulebase(taxonomy.as_ref(), &mut report);
        let monte_carlo = self.check_montecarlo(&mut report);
        if let Some(tax) = &taxonomy {
            self.check_weights(tax, &mut report);
        }
        let dag = self.check_topology(&mut report);
        let known: BTreeSet<NodeId> = dag
            .iter()
            .flat_map(|d| d.nodes())
            .chain(
                self.schedule
                    .attach
                    .iter()
                    .flat_map(|a| a.cluster.members.iter().map(|&m| NodeId(m))),
            )
            .collect();
        let profiles = self.check_profiles(&known, taxonomy.as_ref(), &mut report);
        self.check_simulation(&known, &mut report);
        let attaches = self.check_attach(dag.as_ref(), &mut report);
        let tasks = self.check_tasks(dag.as_ref(), &mut report);
        let faults = self.check_faults(&known, &mut report);

        if let Some(dag) = &dag {
            for flag in dag.size_uniformity_report(self.simulation.size_tolerance) {
                report.warn(
                    "topology",
                    format!(
                        "cluster {} is {:.2}x the size of {} (tolerance {})",
                        flag.larger, flag.ratio, flag.smaller, self.simulation.size_tolerance
                    ),
                );
            }
        }

        if !report.is_ok() {
            return Err(report);
        }
        let (Some(taxonomy), Some(epistemic), Some(monte_carlo), Some(dag)) =
            (taxonomy, quantifier, monte_carlo, dag)
        else {
            return Err(report);
        };
        let sim = &self.simulation;
        let resample_seed = self
            .montecarlo
            .seed
            .unwrap_or_else(|| derive_seed(sim.seed, &[purpose::RESAMPLE]));
        let scenario = Scenario {
            evaluator: TrustEvaluator {
                taxonomy,
                epistemic,
                monte_carlo: monte_carlo.with_seed(resample_seed),
                weight_overrides: self.weights.clone(),
            },
            dag,
            profiles,
            params: SimParams {
                rounds: sim.rounds,
                interactions_per_round: sim.interactions_per_round,
                maturity: sim.maturity,
                window: sim.window,
                threshold: sim.threshold,
                seed: sim.seed,
                samples_per_observation: sim.samples_per_observation,
                size_tolerance: sim.size_tolerance,
                resample_seed,
            },
            ledger_seed: sim
                .ledger_seed
                .iter()
                .map(|s| LedgerSeed {
                    node: NodeId(s.node),
                    history: s.history.clone(),
                    count: s.count.unwrap_or(s.history.len() as u64),
                })
                .collect(),
            tasks,
            faults,
            attaches,
        };
        Ok((scenario, report))
    }

    fn check_taxonomy(&self, report: &mut ValidationReport) -> Option<Taxonomy> {
        let t = &self.taxonomy;
        if t.terms.is_empty() {
            report.error("taxonomy", "term list is empty");
        }
        let mut specs = if t.canonical {
            canonical_specs()
        } else {
            Vec::new()
        };
        // A custom source replaces the built-in of the same name once; any
        // further repeat is kept so it is reported as a duplicate.
        let mut replaced = BTreeSet::new();
        for s in &t.sources {
            let builtin = t.canonical && replaced.insert(s.name.as_str());
            match specs.iter_mut().find(|c| c.name == s.name) {
                Some(slot) if builtin => *slot = s.clone(),
                _ => specs.push(s.clone()),
            }
        }
        let checked = validate_scenario_taxonomy(&specs, &t.terms);
        for v in &checked.violations {
            report.error("taxonomy", v);
        }
        let taxonomy = checked.taxonomy?;
        if taxonomy.facets().is_empty() {
            report.error("taxonomy", "no facets declared");
            return None;
        }
        Some(taxonomy)
    }

    fn check_rulebase(
        &self,
        taxonomy: Option<&Taxonomy>,
        report: &mut ValidationReport,
    ) -> Option<EpistemicQuantifier> {
        let spec = self.fuzzy.clone().unwrap_or_default();
        let rb = match RuleBase::new(spec) {
            Ok(rb) => rb,
            Err(_) => {
                for p in self.fuzzy.clone().unwrap_or_default().problems() {
                    report.error("fuzzy", p);
                }
                return None;
            }
        };
        if let (Some(tax), Some(input)) = (taxonomy, rb.inputs().first()) {
            let needed: BTreeSet<&str> = tax
                .facets()
                .iter()
                .filter(|f| f.kind == FacetKind::Epistemic)
                .flat_map(|f| f.terms.iter().map(String::as_str))
                .collect();
            for term in needed {
                if input.term(term).is_none() {
                    report.error(
                        "fuzzy",
                        format!(
                            "term {term:?} is used by an epistemic facet but is not a term of input {:?}",
                            input.name
                        ),
                    );
                }
            }
        }
        match EpistemicQuantifier::new(rb) {
            Ok(q) => Some(q),
            Err(e) => {
                report.error("fuzzy", e);
                None
            }
        }
    }

    fn check_montecarlo(&self, report: &mut ValidationReport) -> Option<MonteCarloConfig> {
        let mc = &self.montecarlo;
        match MonteCarloConfig::new(mc.trials, mc.seed.unwrap_or(0), mc.dispersion_cap) {
            Ok(c) => Some(c),
            Err(e) => {
                report.error("montecarlo", e);
                None
            }
        }
    }

    fn check_weights(&self, taxonomy: &Taxonomy, report: &mut ValidationReport) {
        for (name, &w) in &self.weights {
            if !taxonomy.sources().iter().any(|s| &s.name == name) {
                report.error("weights", format!("unknown source {name:?}"));
            }
            if !(w.is_finite() && w > 0.0) {
                report.error("weights", format!("{name}: weight {w} must be positive"));
            }
        }
    }

    fn check_topology(&self, report: &mut ValidationReport) -> Option<ClusterDag> {
        let topo = &self.topology;
        let before = report.errors.len();
        if topo.clusters.is_empty() {
            report.error("topology", "no clusters declared");
        }
        let mut dag = ClusterDag::new();
        for c in &topo.clusters {
            let cluster = match Cluster::new(ClusterId(c.id), c.members.iter().map(|&m| NodeId(m)))
            {
                Ok(cl) => cl,
                Err(e) => {
                    report.error("topology", format!("cluster {}: {e}", ClusterId(c.id)));
                    continue;
                }
            };
            if cluster.members.len() != c.members.len() {
                report.error(
                    "topology",
                    format!("cluster {} lists a member twice", cluster.id),
                );
            }
            if let Err(e) = dag.add_cluster(cluster) {
                report.error("topology", e);
            }
        }
        for &[a, b] in &topo.edges {
            let (a, b) = (ClusterId(a), ClusterId(b));
            for end in [a, b] {
                if dag.cluster(end).is_none() {
                    report.error(
                        "topology",
                        format!("edge {a} -> {b} refers to unknown cluster {end}"),
                    );
                }
            }
            if dag.cluster(a).is_some() && dag.cluster(b).is_some() {
                if let Err(e) = dag.add_edge(a, b) {
                    report.error("topology", e);
                }
            }
        }
        if let Acyclicity::Cycle(cycle) = dag.validate_acyclic() {
            let path: Vec<String> = cycle
                .iter()
                .chain(cycle.first())
                .map(ToString::to_string)
                .collect();
            report.error(
                "topology",
                format!("delegation graph has a cycle: {}", path.join(" -> ")),
            );
        }
        (report.errors.len() == before).then_some(dag)
    }

    fn check_profiles(
        &self,
        known: &BTreeSet<NodeId>,
        taxonomy: Option<&Taxonomy>,
        report: &mut ValidationReport,
    ) -> BTreeMap<NodeId, ReliabilityProfile> {
        let p = &self.profiles;
        let mut out = BTreeMap::new();
        let default = match ReliabilityProfile::new(p.default_reliability) {
            Ok(d) => d,
            Err(e) => {
                report.error("profiles", format!("default: {e}"));
                return out;
            }
        };
        for &n in known {
            out.insert(n, default.clone());
        }
        let mut seen = BTreeSet::new();
        for spec in &p.nodes {
            let node = NodeId(spec.node);
            if !seen.insert(node) {
                report.error("profiles", format!("{node}: profile declared twice"));
            }
            if !known.contains(&node) {
                report.error("profiles", format!("{node}: not a member of any cluster"));
            }
            let mut profile = match ReliabilityProfile::new(spec.reliability) {
                Ok(pr) => pr,
                Err(e) => {
                    report.error("profiles", format!("{node}: {e}"));
                    continue;
                }
            };
            for (name, &r) in &spec.facets {
                let Some(facet) = taxonomy.and_then(|t| t.facet_by_name(name).ok()) else {
                    if taxonomy.is_some() {
                        report.error("profiles", format!("{node}: unknown facet {name:?}"));
                    }
                    continue;
                };
                match profile.clone().with_facet(facet.id.clone(), r) {
                    Ok(pr) => profile = pr,
                    Err(e) => report.error("profiles", format!("{node}, {name}: {e}")),
                }
            }
            out.insert(node, profile);
        }
        out
    }

    fn check_simulation(&self, known: &BTreeSet<NodeId>, report: &mut ValidationReport) {
        let s = &self.simulation;
        if s.rounds == 0 {
            report.error("simulation", "rounds must be at least 1");
        }
        if !(0.0..=1.0).contains(&s.threshold) {
            report.error(
                "simulation",
                format!("threshold {} outside [0, 1]", s.threshold),
            );
        }
        if s.window == 0 {
            report.error("simulation", "window must be at least 1");
        }
        if s.samples_per_observation < 2 {
            report.error("simulation", "samples_per_observation must be at least 2");
        }
        if !(s.size_tolerance.is_finite() && s.size_tolerance >= 1.0) {
            report.error(
                "simulation",
                format!("size_tolerance {} must be at least 1", s.size_tolerance),
            );
        }
        let mut seen = BTreeSet::new();
        for seed in &s.ledger_seed {
            let node = NodeId(seed.node);
            if !seen.insert(node) {
                report.error("simulation", format!("ledger_seed: {node} seeded twice"));
            }
            if !known.contains(&node) {
                report.error(
                    "simulation",
                    format!("ledger_seed: {node} is not a member of any cluster"),
                );
            }
            if seed.history.is_empty() {
                report.error(
                    "simulation",
                    format!("ledger_seed: {node} has an empty history"),
                );
            }
            if let Some(v) = seed.history.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                report.error(
                    "simulation",
                    format!("ledger_seed: {node} rating {v} outside [0, 1]"),
                );
            }
        }
    }

    fn check_attach(
        &self,
        dag: Option<&ClusterDag>,
        report: &mut ValidationReport,
    ) -> Vec<AttachEvent> {
        let mut out = Vec::new();
        let mut ids: BTreeSet<u32> = self.topology.clusters.iter().map(|c| c.id).collect();
        let mut nodes: BTreeSet<NodeId> = dag.iter().flat_map(|d| d.nodes()).collect();
        for a in &self.schedule.attach {
            let id = ClusterId(a.cluster.id);
            let late = a.round >= self.simulation.rounds;
            if late {
                report.warn(
                    "schedule",
                    format!(
                        "attach {id} at round {} is past the last round; ignored",
                        a.round
                    ),
                );
            }
            if !ids.insert(a.cluster.id) {
                report.error(
                    "schedule",
                    format!("attach {id}: cluster id already in use"),
                );
            }
            for &m in &a.cluster.members {
                if !nodes.insert(NodeId(m)) {
                    report.error(
                        "schedule",
                        format!("attach {id}: {} already belongs to a cluster", NodeId(m)),
                    );
                }
            }
            match Cluster::new(id, a.cluster.members.iter().map(|&m| NodeId(m))) {
                Ok(_) if late => {}
                Ok(cluster) => out.push(AttachEvent {
                    round: a.round,
                    cluster,
                    fanout: a.fanout.unwrap_or(self.simulation.fanout),
                }),
                Err(e) => report.error("schedule", format!("attach {id}: {e}")),
            }
        }
        out
    }

    fn check_tasks(&self, dag: Option<&ClusterDag>, report: &mut ValidationReport) -> Vec<Task> {
        let rounds = self.simulation.rounds;
        let mut out = Vec::new();
        let mut ids = BTreeSet::new();
        let attached = |id: u32, round: u64| {
            self.schedule
                .attach
                .iter()
                .any(|a| a.cluster.id == id && a.round <= round)
        };
        let exists = |id: u32, round: u64| {
            dag.is_some_and(|d| d.cluster(ClusterId(id)).is_some()) || attached(id, round)
        };
        for t in &self.schedule.tasks {
            if !ids.insert(t.id) {
                report.error("schedule", format!("task {}: id used twice", t.id));
            }
            if t.workers == 0 {
                report.error(
                    "schedule",
                    format!("task {}: workers must be at least 1", t.id),
                );
            }
            if t.round >= rounds {
                report.warn(
                    "schedule",
                    format!(
                        "task {} at round {} is past the last round; ignored",
                        t.id, t.round
                    ),
                );
            }
            if !exists(t.cluster, t.round) {
                report.error(
                    "schedule",
                    format!("task {}: unknown cluster {}", t.id, ClusterId(t.cluster)),
                );
            }
            if let Some(p) = t.partner {
                if !exists(p, t.round) {
                    report.error(
                        "schedule",
                        format!("task {}: unknown partner cluster {}", t.id, ClusterId(p)),
                    );
                }
            }
            if t.every == Some(0) {
                report.error(
                    "schedule",
                    format!("task {}: every must be at least 1", t.id),
                );
                continue;
            }
            let mut round = t.round;
            while round < rounds {
                out.push(Task {
                    id: t.id,
                    cluster: ClusterId(t.cluster),
                    workers: t.workers,
                    partner: t.partner.map(ClusterId),
                    round,
                });
                match t.every {
                    Some(k) => round += k,
                    None => break,
                }
            }
        }
        out.sort_by_key(|t| (t.round, t.id));
        out
    }

    fn check_faults(
        &self,
        known: &BTreeSet<NodeId>,
        report: &mut ValidationReport,
    ) -> Vec<FaultEvent> {
        let mut out = Vec::new();
        for f in &self.schedule.faults {
            let node = NodeId(f.node);
            if !known.contains(&node) {
                report.error(
                    "schedule",
                    format!("fault at round {}: unknown node {node}", f.round),
                );
            }
            let late = f.round >= self.simulation.rounds;
            if late {
                report.warn(
                    "schedule",
                    format!(
                        "fault on {node} at round {} is past the last round; ignored",
                        f.round
                    ),
                );
            }
            if let FaultEffect::Degrade { delta } = f.effect {
                if !(delta.is_finite() && delta > 0.0 && delta <= 1.0) {
                    report.error(
                        "schedule",
                        format!("fault on {node}: delta {delta} outside (0, 1]"),
                    );
                }
            }
            if !late {
                out.push(FaultEvent {
                    round: f.round,
                    node,
                    effect: f.effect,
                });
            }
        }
        out
    }
}
