//! Replicated trust ledger.
//!
//! Each cluster hosts a [`LedgerReplica`] holding a windowed rolling average of
//! every node's trust ratings. Records are applied locally as they arrive and
//! queued; [`sync_replicas`] then rebuilds every replica from the last
//! synchronized state plus the union of all queued records, applied in the
//! global order `(round, evaluator, evaluated)`. After a sync all replicas are
//! identical regardless of the order in which they were written or visited.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ids::{ClusterId, NodeId};

pub const DEFAULT_WINDOW: usize = 20;
pub const DEFAULT_MATURITY: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrustRecord {
    pub evaluated: NodeId,
    pub evaluator: NodeId,
    pub round: u64,
    pub rating: f64,
}

/// Global application order; also the identity used for de-duplication.
pub type RecordKey = (u64, NodeId, NodeId);

impl TrustRecord {
    pub fn new(evaluated: NodeId, evaluator: NodeId, round: u64, rating: f64) -> Result<Self> {
        let rec = TrustRecord {
            evaluated,
            evaluator,
            round,
            rating,
        };
        rec.check()?;
        Ok(rec)
    }

    pub fn check(&self) -> Result<()> {
        if self.evaluated == self.evaluator {
            return Err(Error::Contract(format!(
                "{} cannot evaluate itself",
                self.evaluator
            )));
        }
        if !(0.0..=1.0).contains(&self.rating) {
            return Err(Error::Contract(format!(
                "rating {} outside [0, 1]",
                self.rating
            )));
        }
        Ok(())
    }

    pub fn key(&self) -> RecordKey {
        (self.round, self.evaluator, self.evaluated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub node: NodeId,
    pub history: VecDeque<f64>,
    pub rolling_average: f64,
    /// Lifetime number of evaluations, including those evicted from the window.
    pub count: u64,
}

impl LedgerEntry {
    fn empty(node: NodeId) -> Self {
        LedgerEntry {
            node,
            history: VecDeque::new(),
            rolling_average: 0.0,
            count: 0,
        }
    }

    fn push(&mut self, rating: f64, window: usize) {
        if self.history.len() == window {
            self.history.pop_front();
        }
        self.history.push_back(rating);
        self.count += 1;
        self.rolling_average = window_mean(&self.history);
    }

    pub fn rolling_average(&self) -> Result<f64> {
        if self.history.is_empty() {
            Err(Error::NoEvidence)
        } else {
            Ok(self.rolling_average)
        }
    }

    pub fn is_mature(&self, maturity: u64) -> bool {
        self.count >= maturity
    }
}

fn window_mean(history: &VecDeque<f64>) -> f64 {
    history.iter().sum::<f64>() / history.len() as f64
}

pub fn rolling_average(entry: &LedgerEntry) -> Result<f64> {
    entry.rolling_average()
}

#[derive(Debug, Clone, Default, PartialEq)]
struct LedgerState {
    entries: BTreeMap<NodeId, LedgerEntry>,
    applied: BTreeSet<RecordKey>,
}

impl LedgerState {
    fn apply(&mut self, record: &TrustRecord, window: usize) {
        if self.applied.insert(record.key()) {
            self.entries
                .entry(record.evaluated)
                .or_insert_with(|| LedgerEntry::empty(record.evaluated))
                .push(record.rating, window);
        }
    }
}

#[derive(Debug, Clone)]
pub struct LedgerReplica {
    cluster: ClusterId,
    window: usize,
    committed: LedgerState,
    working: BTreeMap<NodeId, LedgerEntry>,
    pending: Vec<TrustRecord>,
}

impl LedgerReplica {
    pub fn new(cluster: ClusterId, window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::Config("ledger window must be at least 1".into()));
        }
        Ok(LedgerReplica {
            cluster,
            window,
            committed: LedgerState::default(),
            working: BTreeMap::new(),
            pending: Vec::new(),
        })
    }

    /// A new replica for `cluster` starting from `existing`'s synchronized state.
    pub fn join(cluster: ClusterId, existing: &LedgerReplica) -> Self {
        LedgerReplica {
            cluster,
            window: existing.window,
            committed: existing.committed.clone(),
            working: existing.committed.entries.clone(),
            pending: Vec::new(),
        }
    }

    pub fn cluster(&self) -> ClusterId {
        self.cluster
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn pending(&self) -> &[TrustRecord] {
        &self.pending
    }

    pub fn entry(&self, node: NodeId) -> Option<&LedgerEntry> {
        self.working.get(&node)
    }

    pub fn entries(&self) -> &BTreeMap<NodeId, LedgerEntry> {
        &self.working
    }

    /// Installs a pre-existing history for `node` as already-synchronized state.
    /// The window keeps the most recent `window` ratings; `count` is raised to at
    /// least the number of ratings supplied.
    pub fn seed_entry(&mut self, node: NodeId, history: &[f64], count: u64) -> Result<()> {
        if history.is_empty() {
            return Err(Error::Contract(format!("empty seed history for {node}")));
        }
        if let Some(v) = history.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Contract(format!(
                "seed rating {v} for {node} outside [0, 1]"
            )));
        }
        let mut entry = LedgerEntry::empty(node);
        for &v in history {
            entry.push(v, self.window);
        }
        entry.count = entry.count.max(count);
        self.committed.entries.insert(node, entry.clone());
        self.working.insert(node, entry);
        Ok(())
    }

    /// Applies `record` locally and queues it for the next sync. A record whose
    /// key was already seen is ignored.
    pub fn record_evaluation(&mut self, record: TrustRecord) -> Result<&LedgerEntry> {
        record.check()?;
        let key = record.key();
        let seen =
            self.committed.applied.contains(&key) || self.pending.iter().any(|r| r.key() == key);
        if !seen {
            self.working
                .entry(record.evaluated)
                .or_insert_with(|| LedgerEntry::empty(record.evaluated))
                .push(record.rating, self.window);
            self.pending.push(record);
        }
        self.working.get(&record.evaluated).ok_or(Error::NoEvidence)
    }

    /// Canonical serialized form of the entries, used to audit convergence.
    pub fn serialized_entries(&self) -> String {
        serde_json::to_string(&self.working).expect("ledger entries serialize")
    }
}

/// Merges every replica's pending records and brings all replicas to the same
/// state. Duplicate keys are applied once; if duplicates disagree on the rating
/// the smallest rating wins so the result never depends on visit order.
pub fn sync_replicas(replicas: &mut [LedgerReplica]) {
    let Some(first) = replicas.first() else {
        return;
    };
    debug_assert!(
        replicas.iter().all(|r| r.committed == first.committed),
        "replicas must share their synchronized state"
    );
    let window = first.window;
    let mut merged: BTreeMap<RecordKey, TrustRecord> = BTreeMap::new();
    for r in replicas.iter() {
        for rec in &r.pending {
            merged
                .entry(rec.key())
                .and_modify(|cur| {
                    if rec.rating.total_cmp(&cur.rating).is_lt() {
                        *cur = *rec;
                    }
                })
                .or_insert(*rec);
        }
    }
    let mut state = first.committed.clone();
    for rec in merged.values() {
        state.apply(rec, window);
    }
    for r in replicas.iter_mut() {
        r.committed = state.clone();
        r.working = state.entries.clone();
        r.pending.clear();
    }
}

/// Number of replicas whose entries differ from the first replica's.
pub fn divergence(replicas: &[LedgerReplica]) -> usize {
    let Some(first) = replicas.first() else {
        return 0;
    };
    let reference = first.serialized_entries();
    replicas
        .iter()
        .filter(|r| r.serialized_entries() != reference)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Coordinator {
    Elected(NodeId),
    /// No member has reached maturity yet.
    Bootstrap,
}

/// The mature member with the highest rolling average; ties go to the smaller id.
pub fn coordinator_of(
    entries: &BTreeMap<NodeId, LedgerEntry>,
    members: &[NodeId],
    maturity: u64,
) -> Coordinator {
    let mut sorted = members.to_vec();
    sorted.sort();
    let mut best: Option<(NodeId, f64)> = None;
    for id in sorted {
        let Some(e) = entries.get(&id) else { continue };
        if !e.is_mature(maturity) || e.history.is_empty() {
            continue;
        }
        if best.is_none_or(|(_, avg)| e.rolling_average > avg) {
            best = Some((id, e.rolling_average));
        }
    }
    best.map_or(Coordinator::Bootstrap, |(id, _)| Coordinator::Elected(id))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(evaluated: u32, evaluator: u32, round: u64, rating: f64) -> TrustRecord {
        TrustRecord::new(NodeId(evaluated), NodeId(evaluator), round, rating).unwrap()
    }

    #[test]
    fn first_record() {
        let mut r = LedgerReplica::new(ClusterId(1), 20).unwrap();
        let e = r.record_evaluation(rec(2, 1, 0, 0.8)).unwrap();
        assert_eq!(e.history, [0.8]);
        assert_eq!(e.rolling_average, 0.8);
        assert_eq!(e.count, 1);
        assert_eq!(r.pending().len(), 1);
    }

    #[test]
    fn window_eviction() {
        let mut r = LedgerReplica::new(ClusterId(1), 3).unwrap();
        for (i, v) in [0.2, 0.4, 0.6].into_iter().enumerate() {
            r.record_evaluation(rec(2, 1, i as u64, v)).unwrap();
        }
        let e = r.record_evaluation(rec(2, 1, 3, 0.8)).unwrap();
        assert_eq!(e.history, [0.4, 0.6, 0.8]);
        assert!((e.rolling_average - 0.6).abs() < 1e-15);
        assert_eq!(e.count, 4);
    }

    #[test]
    fn rejects_self_evaluation_and_bad_rating() {
        assert!(matches!(
            TrustRecord::new(NodeId(1), NodeId(1), 0, 0.5),
            Err(Error::Contract(_))
        ));
        assert!(TrustRecord::new(NodeId(1), NodeId(2), 0, 1.5).is_err());
        let mut r = LedgerReplica::new(ClusterId(1), 3).unwrap();
        let bad = TrustRecord {
            evaluated: NodeId(4),
            evaluator: NodeId(4),
            round: 0,
            rating: 0.5,
        };
        assert!(r.record_evaluation(bad).is_err());
    }

    #[test]
    fn rolling_average_examples() {
        let mut r = LedgerReplica::new(ClusterId(1), 20).unwrap();
        r.seed_entry(NodeId(1), &[0.5], 1).unwrap();
        assert_eq!(rolling_average(r.entry(NodeId(1)).unwrap()).unwrap(), 0.5);
        r.seed_entry(NodeId(2), &[0.37; 9], 9).unwrap();
        assert!((rolling_average(r.entry(NodeId(2)).unwrap()).unwrap() - 0.37).abs() < 1e-15);
        r.seed_entry(NodeId(3), &[0.54, 0.79, 0.86, 0.91], 4)
            .unwrap();
        let avg = rolling_average(r.entry(NodeId(3)).unwrap()).unwrap();
        assert!((avg - 0.775).abs() < 1e-12);
        assert_eq!(
            rolling_average(&LedgerEntry::empty(NodeId(9))),
            Err(Error::NoEvidence)
        );
    }

    fn four_node() -> BTreeMap<NodeId, LedgerEntry> {
        let mut r = LedgerReplica::new(ClusterId(1), 20).unwrap();
        for (id, v) in [(1, 0.54), (2, 0.79), (3, 0.86), (4, 0.91)] {
            r.seed_entry(NodeId(id), &[v], 10).unwrap();
        }
        r.entries().clone()
    }

    #[test]
    fn four_node_coordinator() {
        let members: Vec<NodeId> = (1..=4).map(NodeId).collect();
        assert_eq!(
            coordinator_of(&four_node(), &members, 10),
            Coordinator::Elected(NodeId(4))
        );
        assert_eq!(
            coordinator_of(&four_node(), &members, 11),
            Coordinator::Bootstrap
        );
    }

    #[test]
    fn tie_goes_to_lower_id() {
        let mut r = LedgerReplica::new(ClusterId(1), 20).unwrap();
        r.seed_entry(NodeId(7), &[0.9], 10).unwrap();
        r.seed_entry(NodeId(3), &[0.9], 10).unwrap();
        let c = coordinator_of(r.entries(), &[NodeId(7), NodeId(3)], 10);
        assert_eq!(c, Coordinator::Elected(NodeId(3)));
    }

    #[test]
    fn sync_union_and_idempotence() {
        let mut reps = vec![
            LedgerReplica::new(ClusterId(1), 20).unwrap(),
            LedgerReplica::new(ClusterId(2), 20).unwrap(),
        ];
        reps[0].record_evaluation(rec(2, 1, 0, 0.7)).unwrap();
        reps[1].record_evaluation(rec(6, 5, 0, 0.4)).unwrap();
        sync_replicas(&mut reps);
        for r in &reps {
            assert_eq!(r.entries().len(), 2);
            assert!(r.pending().is_empty());
        }
        assert_eq!(divergence(&reps), 0);
        let before = reps[0].serialized_entries();
        sync_replicas(&mut reps);
        assert_eq!(reps[0].serialized_entries(), before);
    }

    #[test]
    fn sync_applies_duplicates_once() {
        let mut reps = vec![
            LedgerReplica::new(ClusterId(1), 20).unwrap(),
            LedgerReplica::new(ClusterId(2), 20).unwrap(),
        ];
        reps[0].record_evaluation(rec(2, 1, 0, 0.7)).unwrap();
        reps[0].record_evaluation(rec(2, 1, 0, 0.7)).unwrap();
        reps[1].record_evaluation(rec(2, 1, 0, 0.7)).unwrap();
        sync_replicas(&mut reps);
        assert_eq!(reps[1].entry(NodeId(2)).unwrap().count, 1);
        // a replay after sync is ignored too
        reps[1].record_evaluation(rec(2, 1, 0, 0.7)).unwrap();
        assert!(reps[1].pending().is_empty());
        assert_eq!(reps[1].entry(NodeId(2)).unwrap().count, 1);
    }

    #[test]
    fn sync_reorders_local_writes() {
        // replica 1 sees round 1 before replica 0's round 0 record locally
        let mut reps = vec![
            LedgerReplica::new(ClusterId(1), 20).unwrap(),
            LedgerReplica::new(ClusterId(2), 20).unwrap(),
        ];
        reps[1].record_evaluation(rec(2, 3, 1, 0.2)).unwrap();
        reps[0].record_evaluation(rec(2, 1, 0, 0.9)).unwrap();
        sync_replicas(&mut reps);
        assert_eq!(reps[0].entry(NodeId(2)).unwrap().history, [0.9, 0.2]);
        assert_eq!(divergence(&reps), 0);
    }

    #[test]
    fn joined_replica_starts_synced() {
        let mut reps = vec![LedgerReplica::new(ClusterId(1), 5).unwrap()];
        reps[0].record_evaluation(rec(2, 1, 0, 0.6)).unwrap();
        sync_replicas(&mut reps);
        let joined = LedgerReplica::join(ClusterId(9), &reps[0]);
        assert_eq!(joined.serialized_entries(), reps[0].serialized_entries());
        assert_eq!(joined.window(), 5);
    }
}
