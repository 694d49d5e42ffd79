mod common;

use std::collections::{BTreeMap, BTreeSet};

use trustsim_core::ledger::{coordinator_of, LedgerReplica};
use trustsim_core::scenario::{
    write_bundle, AttachSpec, ClusterSpec, FaultSpec, ScenarioConfig, TaskSpec,
};
use trustsim_core::sim::{self, FaultEffect, FaultEvent, Simulation, SimulationReport, TaskStatus};
use trustsim_core::stats::spearman;
use trustsim_core::{ClusterId, Error, NodeId};

use common::small;

fn run(cfg: &ScenarioConfig) -> SimulationReport {
    let (scenario, _) = cfg.compile().unwrap_or_else(|r| panic!("{r}"));
    sim::run(scenario).unwrap()
}

#[test]
fn null_scenario() {
    let mut cfg = small(1, 3);
    cfg.simulation.interactions_per_round = 0;
    let report = run(&cfg);
    assert_eq!(report.trust.len(), 7);
    assert!(report
        .trust
        .iter()
        .all(|r| r.rolling_average.is_none() && r.count == 0));
    assert!(report.coordinators.iter().all(|c| c.bootstrap));
    assert_eq!(report.coordinators[0].node, NodeId(1));
    assert_eq!(report.coordinators[1].node, NodeId(5));
    assert!(report.tasks.is_empty());
    assert_eq!(report.summary.rank_correlation, None);
}

#[test]
fn mutual_evaluation_shape() {
    let (scenario, _) = small(1, 3).compile().unwrap();
    let sim = Simulation::new(scenario).unwrap();
    let [a, b] = sim.communication_round(NodeId(1), NodeId(3), 4).unwrap();
    assert_eq!((a.evaluated, a.evaluator), (NodeId(1), NodeId(3)));
    assert_eq!((b.evaluated, b.evaluator), (NodeId(3), NodeId(1)));
    assert!(a.round == 4 && b.round == 4);
    assert!(matches!(
        sim.communication_round(NodeId(1), NodeId(5), 0),
        Err(Error::Contract(_))
    ));
}

#[test]
fn symmetric_profiles_rate_alike() {
    let (scenario, _) = small(1, 11).compile().unwrap();
    let sim = Simulation::new(scenario).unwrap();
    // N5 and N6 share the default profile.
    let (mut sa, mut sb) = (0.0, 0.0);
    for round in 0..1000 {
        let [a, b] = sim
            .communication_round(NodeId(5), NodeId(6), round)
            .unwrap();
        sa += a.rating;
        sb += b.rating;
    }
    assert!(
        (sa - sb).abs() / 1000.0 < 0.05,
        "{} vs {}",
        sa / 1000.0,
        sb / 1000.0
    );
}

fn audit(report: &SimulationReport, theta: f64, maturity: u64) {
    // Row counts.
    let rounds: BTreeSet<u64> = report.trust.iter().map(|r| r.round).collect();
    assert_eq!(rounds.len() as u64, report.summary.rounds);
    let joined: BTreeMap<NodeId, u64> = report
        .attachments
        .iter()
        .flat_map(|a| a.members.iter().map(move |&m| (m, a.round)))
        .collect();
    for &round in &rounds {
        let expected = report
            .summary
            .nodes
            .iter()
            .filter(|n| joined.get(&n.node).is_none_or(|&j| j <= round))
            .count();
        let got = report.trust.iter().filter(|r| r.round == round).count();
        assert_eq!(got, expected, "round {round}");
    }

    // Replica audit.
    assert!(report.divergence.iter().all(|&d| d == 0));

    // Timeline consistency: recompute every coordinator from the logged table.
    let mut by_round: BTreeMap<u64, Vec<_>> = BTreeMap::new();
    for row in &report.trust {
        by_round.entry(row.round).or_default().push(row);
    }
    for c in &report.coordinators {
        let rows = &by_round[&c.round];
        let mut view = LedgerReplica::new(c.cluster, 1).unwrap();
        for r in rows.iter() {
            if let Some(avg) = r.rolling_average {
                view.seed_entry(r.node, &[avg], r.count).unwrap();
            }
        }
        let entries = view.entries();
        let members: Vec<NodeId> = rows
            .iter()
            .filter(|r| r.cluster == c.cluster)
            .map(|r| r.node)
            .collect();
        match coordinator_of(entries, &members, maturity) {
            trustsim_core::ledger::Coordinator::Elected(n) => {
                assert!(!c.bootstrap);
                assert_eq!(n, c.node, "round {}", c.round);
            }
            trustsim_core::ledger::Coordinator::Bootstrap => {
                assert!(c.bootstrap);
                assert_eq!(Some(&c.node), members.iter().min());
            }
        }
        let flagged: Vec<NodeId> = rows
            .iter()
            .filter(|r| r.cluster == c.cluster && r.is_coordinator)
            .map(|r| r.node)
            .collect();
        assert_eq!(flagged, vec![c.node]);
    }

    // Gating: every assigned worker meets θ and maturity in the logged table.
    for t in &report.tasks {
        if t.status != TaskStatus::Assigned {
            continue;
        }
        for w in &t.workers {
            let row = by_round[&t.round].iter().find(|r| r.node == *w).unwrap();
            assert!(row.rolling_average.unwrap() >= theta);
            assert!(row.count >= maturity);
            assert_eq!(row.cluster, t.cluster);
        }
    }

    // Summary recomputable from the final rows.
    let last = *rounds.last().unwrap();
    let finals: BTreeMap<NodeId, Option<f64>> = by_round[&last]
        .iter()
        .map(|r| (r.node, r.rolling_average))
        .collect();
    for n in &report.summary.nodes {
        assert_eq!(finals[&n.node], n.final_rolling_average);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = report
        .summary
        .nodes
        .iter()
        .filter_map(|n| n.final_rolling_average.map(|t| (n.latent_reliability, t)))
        .unzip();
    assert_eq!(spearman(&xs, &ys), report.summary.rank_correlation);
}

#[test]
fn report_is_internally_consistent() {
    let mut cfg = small(60, 5);
    cfg.simulation.threshold = 0.55;
    let task = |id, round, cluster, workers, partner, every| TaskSpec {
        id,
        round,
        cluster,
        workers,
        partner,
        every: Some(every),
    };
    cfg.schedule.tasks = vec![task(1, 0, 1, 2, None, 3), task(2, 1, 2, 1, Some(1), 10)];
    let report = run(&cfg);
    audit(&report, 0.55, 10);
    let counts = report.summary.tasks;
    assert!(counts.assigned > 0 && counts.refused > 0, "{counts:?}");
    assert!(counts.routing_error > 0, "H2 -> H1 is not an edge");
}

#[test]
fn one_bootstrap_transition_per_cluster() {
    let report = run(&small(40, 8));
    for c in [ClusterId(1), ClusterId(2)] {
        let timeline: Vec<bool> = report
            .coordinators
            .iter()
            .filter(|r| r.cluster == c)
            .map(|r| r.bootstrap)
            .collect();
        let transitions = timeline.windows(2).filter(|w| w[0] && !w[1]).count();
        assert_eq!(transitions, 1, "{c}");
        assert!(
            timeline.windows(2).all(|w| w[0] || !w[1]),
            "bootstrap never returns"
        );
    }
}

#[test]
fn bundles_are_byte_identical() {
    let cfg = small(30, 21);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_bundle(d.path(), &run(&cfg), &cfg).unwrap();
    }
    for f in ["trust_timeseries.csv", "task_log.csv", "summary.json"] {
        let a = std::fs::read(dirs[0].path().join(f)).unwrap();
        let b = std::fs::read(dirs[1].path().join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let trust = std::fs::read_to_string(dirs[0].path().join("trust_timeseries.csv")).unwrap();
    let mut lines = trust.lines();
    assert_eq!(lines.next(), Some("# seed=21"));
    assert_eq!(
        lines.next(),
        Some("round,node_id,cluster_id,rolling_average,count,is_coordinator")
    );
    assert_eq!(lines.count(), 30 * 7);
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dirs[0].path().join("summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["seed"], 21);
    assert_eq!(summary["config"]["simulation"]["seed"], 21);
}

fn with_isolated_node(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut cfg = cfg.clone();
    cfg.topology.clusters.push(ClusterSpec {
        id: 3,
        members: vec![50],
    });
    cfg
}

#[test]
fn fault_on_isolated_node_changes_nothing() {
    let base = with_isolated_node(&small(30, 4));
    let mut faulted = base.clone();
    faulted.schedule.faults.push(FaultSpec {
        round: 2,
        node: 50,
        effect: FaultEffect::Degrade { delta: 0.5 },
    });
    let (a, b) = (run(&base), run(&faulted));
    assert_eq!(a.trust, b.trust);
    assert_eq!(a.coordinators, b.coordinators);
    assert_eq!(b.faults.len(), 1);
}

#[test]
fn unrelated_cluster_leaves_streams_alone() {
    let base = small(30, 4);
    let a = run(&base);
    let b = run(&with_isolated_node(&base));
    let strip = |r: &SimulationReport| -> Vec<_> {
        r.trust
            .iter()
            .filter(|row| row.node != NodeId(50))
            .cloned()
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn restore_returns_to_baseline() {
    let (scenario, _) = small(5, 4).compile().unwrap();
    let mut sim = Simulation::new(scenario).unwrap();
    let baseline = sim.profile(NodeId(1)).unwrap().clone();
    let fault = |effect| FaultEvent {
        round: 0,
        node: NodeId(1),
        effect,
    };
    sim.inject_fault(&fault(FaultEffect::Degrade { delta: 0.4 }))
        .unwrap();
    assert!((sim.profile(NodeId(1)).unwrap().reliability - 0.55).abs() < 1e-12);
    sim.inject_fault(&fault(FaultEffect::Restore)).unwrap();
    assert_eq!(sim.profile(NodeId(1)).unwrap(), &baseline);
    assert!(sim
        .inject_fault(&FaultEvent {
            round: 0,
            node: NodeId(999),
            effect: FaultEffect::Restore
        })
        .is_err());
}

#[test]
fn more_noise_never_raises_trust() {
    let (mut hi, mut lo) = (0.0, 0.0);
    for seed in [1, 2, 3] {
        let mut cfg = small(40, seed);
        for r in [0.6, 0.3] {
            cfg.profiles.nodes[1].reliability = r;
            let avg = run(&cfg)
                .summary
                .nodes
                .iter()
                .find(|n| n.node == NodeId(2))
                .and_then(|n| n.final_rolling_average)
                .unwrap();
            if r > 0.5 {
                hi += avg;
            } else {
                lo += avg;
            }
        }
    }
    assert!(lo < hi, "{lo} vs {hi}");
}

#[test]
fn attach_joins_the_dag_and_the_ledger() {
    let mut cfg = small(20, 6);
    cfg.schedule.attach.push(AttachSpec {
        round: 10,
        cluster: ClusterSpec {
            id: 9,
            members: vec![90, 91, 92],
        },
        fanout: Some(1),
    });
    let report = run(&cfg);
    assert_eq!(report.attachments.len(), 1);
    let att = &report.attachments[0];
    assert_eq!(att.targets.len(), 1);
    assert!(report
        .trust
        .iter()
        .filter(|r| r.node == NodeId(90))
        .all(|r| r.round >= 10));
    assert!(report
        .trust
        .iter()
        .any(|r| r.node == NodeId(91) && r.rolling_average.is_some()));
    assert!(report.divergence.iter().all(|&d| d == 0));
    audit(&report, 0.5, 10);
}
