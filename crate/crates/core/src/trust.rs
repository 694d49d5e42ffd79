//! Turning an evidence set into a trust rating.
//!
//! Quantification maps each observation to a certainty score in `[0, 1]`
//! (aleatoric facets by bootstrap dispersion, epistemic facets by fuzzy
//! inference). Aggregation takes the weighted mean of those scores:
//!
//! ```text
//! T = sum(q_i * w_i) / sum(w_i),   i = 1..n
//! ```
//!
//! A score of 1 means the facet showed minimal uncertainty, so T = 1 is
//! absolute trust and T = 0 absolute distrust.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::aleatoric::{quantify_aleatoric, MonteCarloConfig};
use crate::error::{Error, Result};
use crate::fuzzy::EpistemicQuantifier;
use crate::ids::NodeId;
use crate::streams::{derive_seed, purpose};
use crate::taxonomy::{FacetId, FacetKind, Taxonomy, UncertaintyFacet, UncertaintySet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertaintyEntry {
    pub facet: FacetId,
    pub kind: FacetKind,
    pub value: f64,
}

/// Q, index-aligned with the evidence set it was computed from.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CertaintyVector {
    entries: Vec<CertaintyEntry>,
}

impl CertaintyVector {
    pub fn new(entries: Vec<CertaintyEntry>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|e| !(0.0..=1.0).contains(&e.value)) {
            return Err(Error::Contract(format!(
                "certainty for {} is {} (outside [0, 1])",
                bad.facet, bad.value
            )));
        }
        Ok(CertaintyVector { entries })
    }

    /// Untagged scores, for callers that only have numbers.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .enumerate()
                .map(|(i, &value)| CertaintyEntry {
                    facet: FacetId(format!("q{}", i + 1)),
                    kind: FacetKind::Aleatoric,
                    value,
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[CertaintyEntry] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn aleatoric(&self) -> impl Iterator<Item = &CertaintyEntry> {
        self.entries
            .iter()
            .filter(|e| e.kind == FacetKind::Aleatoric)
    }

    pub fn epistemic(&self) -> impl Iterator<Item = &CertaintyEntry> {
        self.entries
            .iter()
            .filter(|e| e.kind == FacetKind::Epistemic)
    }
}

/// W: strictly positive, finite weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSet(Vec<f64>);

impl WeightSet {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Contract(format!(
                "weight {w} is not a positive number"
            )));
        }
        Ok(WeightSet(weights))
    }

    pub fn uniform(n: usize) -> Self {
        WeightSet(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|w| w * c).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrustRating {
    pub value: f64,
    pub evaluated: NodeId,
    pub evaluator: NodeId,
    pub round: u64,
}

/// Weights from each facet's source priority: tier p gives weight `5 - p`.
/// Both facets of a decomposed source carry the full source weight.
pub fn default_weights(facets: &[&UncertaintyFacet], taxonomy: &Taxonomy) -> Result<WeightSet> {
    weights_with_overrides(facets, taxonomy, &BTreeMap::new())
}

/// As [`default_weights`], with per-source overrides keyed by source name.
pub fn weights_with_overrides(
    facets: &[&UncertaintyFacet],
    taxonomy: &Taxonomy,
    overrides: &BTreeMap<String, f64>,
) -> Result<WeightSet> {
    let weights = facets
        .iter()
        .map(|f| {
            let source = taxonomy.source(&f.source_id)?;
            Ok(overrides
                .get(&source.name)
                .copied()
                .unwrap_or_else(|| source.priority.default_weight()))
        })
        .collect::<Result<Vec<_>>>()?;
    WeightSet::new(weights)
}

/// Weighted mean of certainty scores.
pub fn weighted_trust(q: &CertaintyVector, w: &WeightSet) -> Result<f64> {
    weighted_mean(&q.values(), w.as_slice())
}

pub fn weighted_mean(q: &[f64], w: &[f64]) -> Result<f64> {
    if q.len() != w.len() {
        return Err(Error::Contract(format!(
            "{} certainty scores but {} weights",
            q.len(),
            w.len()
        )));
    }
    if q.is_empty() {
        return Err(Error::NoEvidence);
    }
    let num: f64 = q.iter().zip(w).map(|(q, w)| q * w).sum();
    let den: f64 = w.iter().sum();
    Ok(num / den)
}

/// Everything needed to evaluate evidence: the taxonomy, the fuzzy rule base,
/// Monte Carlo settings, and per-source weight overrides.
#[derive(Debug, Clone)]
pub struct TrustEvaluator {
    pub taxonomy: Taxonomy,
    pub epistemic: EpistemicQuantifier,
    pub monte_carlo: MonteCarloConfig,
    pub weight_overrides: BTreeMap<String, f64>,
}

impl Default for TrustEvaluator {
    fn default() -> Self {
        TrustEvaluator {
            taxonomy: Taxonomy::canonical(),
            epistemic: EpistemicQuantifier::default(),
            monte_carlo: MonteCarloConfig::default(),
            weight_overrides: BTreeMap::new(),
        }
    }
}

impl TrustEvaluator {
    /// Maps every observation to a certainty score, preserving order. Each
    /// aleatoric element resamples with its own seed derived from the Monte
    /// Carlo seed and its position in the set.
    pub fn quantify(&self, set: &UncertaintySet) -> Result<CertaintyVector> {
        self.quantify_seeded(set, self.monte_carlo.seed)
    }

    pub fn quantify_seeded(&self, set: &UncertaintySet, seed: u64) -> Result<CertaintyVector> {
        let partition = set.partition(&self.taxonomy)?;
        let mut entries: Vec<Option<CertaintyEntry>> = vec![None; set.len()];
        for &(i, obs) in &partition.aleatoric {
            let mc = self
                .monte_carlo
                .with_seed(derive_seed(seed, &[purpose::FACET, i as u64]));
            entries[i] = Some(CertaintyEntry {
                facet: obs.facet().clone(),
                kind: FacetKind::Aleatoric,
                value: quantify_aleatoric(obs, &mc)?,
            });
        }
        for &(i, obs) in &partition.epistemic {
            entries[i] = Some(CertaintyEntry {
                facet: obs.facet().clone(),
                kind: FacetKind::Epistemic,
                value: self.epistemic.quantify(obs)?,
            });
        }
        CertaintyVector::new(
            entries
                .into_iter()
                .map(|e| e.expect("partitioned"))
                .collect(),
        )
    }

    pub fn weights(&self, set: &UncertaintySet) -> Result<WeightSet> {
        let facets = set
            .elements()
            .iter()
            .map(|o| self.taxonomy.facet(o.facet()))
            .collect::<Result<Vec<_>>>()?;
        weights_with_overrides(&facets, &self.taxonomy, &self.weight_overrides)
    }

    /// Quantify then aggregate. `weights` defaults to the priority weights
    /// (with overrides) of the evidence's facets.
    pub fn evaluate_node(
        &self,
        evidence: &UncertaintySet,
        weights: Option<&WeightSet>,
        evaluated: NodeId,
        evaluator: NodeId,
        round: u64,
    ) -> Result<TrustRating> {
        self.evaluate_seeded(
            evidence,
            weights,
            evaluated,
            evaluator,
            round,
            self.monte_carlo.seed,
        )
    }

    pub fn evaluate_seeded(
        &self,
        evidence: &UncertaintySet,
        weights: Option<&WeightSet>,
        evaluated: NodeId,
        evaluator: NodeId,
        round: u64,
        seed: u64,
    ) -> Result<TrustRating> {
        if evidence.is_empty() {
            return Err(Error::NoEvidence);
        }
        let q = self.quantify_seeded(evidence, seed)?;
        let owned;
        let w = match weights {
            Some(w) => w,
            None => {
                owned = self.weights(evidence)?;
                &owned
            }
        };
        Ok(TrustRating {
            value: weighted_trust(&q, w)?,
            evaluated,
            evaluator,
            round,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aleatoric::quantify_samples;
    use crate::taxonomy::Observation;

    fn evaluator() -> TrustEvaluator {
        TrustEvaluator {
            monte_carlo: MonteCarloConfig::new(2000, 42, 1.0).unwrap(),
            ..TrustEvaluator::default()
        }
    }

    #[test]
    fn weighted_mean_examples() {
        let ones = CertaintyVector::from_values(&[1.0, 1.0, 1.0]).unwrap();
        let zeros = CertaintyVector::from_values(&[0.0, 0.0]).unwrap();
        let w3 = WeightSet::new(vec![0.3, 2.0, 9.0]).unwrap();
        assert_eq!(weighted_trust(&ones, &w3).unwrap(), 1.0);
        assert_eq!(weighted_trust(&zeros, &WeightSet::uniform(2)).unwrap(), 0.0);
        let q = CertaintyVector::from_values(&[0.5, 1.0]).unwrap();
        let w = WeightSet::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(weighted_trust(&q, &w).unwrap(), 0.875);
    }

    #[test]
    fn weighted_mean_errors() {
        let q = CertaintyVector::from_values(&[0.5]).unwrap();
        assert!(matches!(
            weighted_trust(&q, &WeightSet::uniform(2)),
            Err(Error::Contract(_))
        ));
        assert_eq!(
            weighted_trust(&CertaintyVector::default(), &WeightSet::uniform(0)),
            Err(Error::NoEvidence)
        );
        assert!(WeightSet::new(vec![1.0, 0.0]).is_err());
        assert!(WeightSet::new(vec![-1.0]).is_err());
        assert!(CertaintyVector::from_values(&[1.2]).is_err());
    }

    #[test]
    fn priority_weights() {
        let tax = Taxonomy::canonical();
        let hm = tax.facet_by_name("Hardware Malfunctions/measured").unwrap();
        let env = tax.facet_by_name("Environmental Effects/assessed").unwrap();
        let w = default_weights(&[hm, env], &tax).unwrap();
        assert_eq!(w.as_slice(), &[4.0, 1.0]);

        let tier2: Vec<_> = [
            "Data Management",
            "Network Design/measured",
            "Network Stability/assessed",
        ]
        .iter()
        .map(|n| tax.facet_by_name(n).unwrap())
        .collect();
        let w = default_weights(&tier2, &tax).unwrap();
        assert_eq!(w.as_slice(), &[3.0, 3.0, 3.0]);
        let q = CertaintyVector::from_values(&[0.2, 0.5, 0.8]).unwrap();
        assert!((weighted_trust(&q, &w).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_source_in_weights() {
        let tax = Taxonomy::canonical();
        let stray = UncertaintyFacet::new(
            &crate::taxonomy::SourceId("Solar Flares".into()),
            "Solar Flares",
            FacetKind::Aleatoric,
            &[],
        );
        assert!(matches!(
            default_weights(&[&stray], &tax),
            Err(Error::Taxonomy(_))
        ));
    }

    #[test]
    fn quantify_empty_and_constant() {
        let ev = evaluator();
        assert!(ev.quantify(&UncertaintySet::default()).unwrap().is_empty());
        let dq = ev.taxonomy.facet_by_name("Data Quality").unwrap();
        let set = UncertaintySet::new(vec![Observation::quant(dq, vec![2.0, 2.0, 2.0]).unwrap()]);
        assert_eq!(ev.quantify(&set).unwrap().values(), vec![1.0]);
        let t = ev
            .evaluate_node(
                &set,
                Some(&WeightSet::new(vec![7.0]).unwrap()),
                NodeId(2),
                NodeId(1),
                0,
            )
            .unwrap();
        assert_eq!(t.value, 1.0);
        assert_eq!((t.evaluated, t.evaluator), (NodeId(2), NodeId(1)));
    }

    #[test]
    fn mixed_set_keeps_alignment() {
        let ev = evaluator();
        let tax = &ev.taxonomy;
        let set = UncertaintySet::new(vec![
            Observation::quant(
                tax.facet_by_name("Data Quality").unwrap(),
                vec![1.0, 1.2, 0.9],
            )
            .unwrap(),
            Observation::qual(tax.facet_by_name("Network Scalability").unwrap(), "High").unwrap(),
            Observation::quant(
                tax.facet_by_name("Quality of Service").unwrap(),
                vec![4.0, 4.0],
            )
            .unwrap(),
        ]);
        let q = ev.quantify(&set).unwrap();
        assert_eq!((q.aleatoric().count(), q.epistemic().count()), (2, 1));
        assert_eq!(q.entries()[1].kind, FacetKind::Epistemic);
        assert_eq!(
            q.entries()[1].value,
            ev.epistemic.term_certainty("High").unwrap()
        );
        assert_eq!(q.entries()[2].value, 1.0);
        let mc = ev
            .monte_carlo
            .with_seed(derive_seed(ev.monte_carlo.seed, &[purpose::FACET, 0]));
        assert_eq!(
            q.entries()[0].value,
            quantify_samples(&[1.0, 1.2, 0.9], &mc).unwrap()
        );
    }

    #[test]
    fn evaluate_needs_evidence() {
        let ev = evaluator();
        assert_eq!(
            ev.evaluate_node(&UncertaintySet::default(), None, NodeId(1), NodeId(2), 0),
            Err(Error::NoEvidence)
        );
    }

    #[test]
    fn evaluate_equal_weights_is_mean() {
        let ev = evaluator();
        let tax = &ev.taxonomy;
        // Q = (1, 0): a constant aleatoric facet and a saturated one
        let set = UncertaintySet::new(vec![
            Observation::quant(tax.facet_by_name("Data Quality").unwrap(), vec![3.0, 3.0]).unwrap(),
            Observation::quant(
                tax.facet_by_name("Data Management").unwrap(),
                vec![-5.0, 5.2, -4.0, 6.0, -6.0, 4.5],
            )
            .unwrap(),
        ]);
        let t = ev
            .evaluate_node(&set, Some(&WeightSet::uniform(2)), NodeId(1), NodeId(2), 3)
            .unwrap();
        assert_eq!(t.value, 0.5);
    }
}
