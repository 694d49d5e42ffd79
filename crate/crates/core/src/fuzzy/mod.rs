//! Mamdani fuzzy inference for epistemic (linguistic) evidence.

mod engine;
mod membership;
mod rulebase;

use std::collections::BTreeMap;

pub use engine::{defuzzify, fuzzify, infer, Aggregate, Degrees};
pub use membership::MembershipFunction;
pub use rulebase::{
    FuzzyRule, LinguisticVariable, RuleBase, RuleBaseSpec, Term, DEFAULT_RESOLUTION,
};

use crate::error::{Error, Result};
use crate::taxonomy::{Observation, Payload};

/// Certainty reported when inference produces nothing usable.
pub const NEUTRAL_CERTAINTY: f64 = 0.5;

/// Runs the full pipeline for one linguistic term on the rule base's first
/// input variable. The term is fuzzified at the centroid of its own membership
/// function.
pub fn quantify_term(term: &str, rulebase: &RuleBase) -> Result<f64> {
    let var = &rulebase.inputs()[0];
    let mf = var
        .term(term)
        .ok_or_else(|| Error::Taxonomy(format!("variable {:?} has no term {term:?}", var.name)))?
        .mf;
    let degrees = fuzzify(mf.centroid(), var)?;
    let inputs = BTreeMap::from([(var.name.clone(), degrees)]);
    let outcome = infer(rulebase, &inputs).and_then(|agg| defuzzify(&agg, rulebase.resolution()));
    match outcome {
        Ok(q) => Ok(q),
        Err(Error::EmptyInference) => {
            log::warn!("empty inference for term {term:?}; using neutral certainty");
            Ok(NEUTRAL_CERTAINTY)
        }
        Err(e) => Err(e),
    }
}

/// Certainty score in `[0, 1]` for a qualitative observation; 1 means the
/// evidence carries minimal uncertainty.
pub fn quantify_epistemic(observation: &Observation, rulebase: &RuleBase) -> Result<f64> {
    match observation.payload() {
        Payload::Qual { term } => quantify_term(term, rulebase),
        Payload::Quant { .. } => Err(Error::Taxonomy(format!(
            "facet {} carries a quantitative payload",
            observation.facet()
        ))),
    }
}

/// Rule base with every input term's certainty evaluated once up front.
/// Quantifying a label is a pure function of (term, rule base), so repeated
/// evaluations in a simulation read from the table.
#[derive(Debug, Clone)]
pub struct EpistemicQuantifier {
    rulebase: RuleBase,
    table: BTreeMap<String, f64>,
}

impl EpistemicQuantifier {
    pub fn new(rulebase: RuleBase) -> Result<Self> {
        let table = rulebase.inputs()[0]
            .terms
            .iter()
            .map(|t| Ok((t.name.clone(), quantify_term(&t.name, &rulebase)?)))
            .collect::<Result<_>>()?;
        Ok(EpistemicQuantifier { rulebase, table })
    }

    pub fn rulebase(&self) -> &RuleBase {
        &self.rulebase
    }

    pub fn term_certainty(&self, term: &str) -> Result<f64> {
        self.table
            .get(term)
            .copied()
            .ok_or_else(|| Error::Taxonomy(format!("unknown linguistic term {term:?}")))
    }

    pub fn quantify(&self, observation: &Observation) -> Result<f64> {
        match observation.payload() {
            Payload::Qual { term } => self.term_certainty(term),
            Payload::Quant { .. } => quantify_epistemic(observation, &self.rulebase),
        }
    }
}

impl Default for EpistemicQuantifier {
    fn default() -> Self {
        Self::new(RuleBase::default()).expect("default rule base is valid")
    }
}
