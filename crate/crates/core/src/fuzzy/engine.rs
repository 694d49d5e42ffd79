use std::collections::BTreeMap;

use super::membership::MembershipFunction;
use super::rulebase::{LinguisticVariable, RuleBase};
use crate::error::{Error, Result};

/// Degree of membership per term name.
pub type Degrees = BTreeMap<String, f64>;

/// Evaluates every term of `variable` at `value`. Values outside the universe
/// are clamped to the nearest bound.
pub fn fuzzify(value: f64, variable: &LinguisticVariable) -> Result<Degrees> {
    if !value.is_finite() {
        return Err(Error::Input(format!(
            "cannot fuzzify non-finite value {value} for {:?}",
            variable.name
        )));
    }
    let x = value.clamp(variable.lo(), variable.hi());
    Ok(variable
        .terms
        .iter()
        .map(|t| (t.name.clone(), t.mf.eval(x)))
        .collect())
}

/// Union of clipped consequents: `mu(x) = max_r min(mf_r(x), strength_r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    clips: Vec<(MembershipFunction, f64)>,
}

impl Aggregate {
    pub fn new(clips: Vec<(MembershipFunction, f64)>) -> Self {
        Aggregate { clips }
    }

    pub fn clips(&self) -> &[(MembershipFunction, f64)] {
        &self.clips
    }

    pub fn membership(&self, x: f64) -> f64 {
        self.clips
            .iter()
            .map(|(mf, s)| mf.eval(x).min(*s))
            .fold(0.0, f64::max)
    }

    /// Smallest interval containing every clipped consequent's support.
    pub fn support_hull(&self) -> Option<(f64, f64)> {
        self.clips
            .iter()
            .filter(|(_, s)| *s > 0.0)
            .map(|(mf, _)| mf.support())
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }
}

/// Mamdani inference: min over antecedent degrees gives a rule's firing
/// strength, each consequent is clipped at it, and the clipped sets are joined
/// with a pointwise max.
///
/// `inputs` maps variable name to its fuzzified degrees.
pub fn infer(rulebase: &RuleBase, inputs: &BTreeMap<String, Degrees>) -> Result<Aggregate> {
    let mut strongest: BTreeMap<&str, f64> = BTreeMap::new();
    for rule in rulebase.rules() {
        let mut strength = 1.0_f64;
        for [var, term] in &rule.when {
            let degrees = inputs
                .get(var)
                .ok_or_else(|| Error::Input(format!("no fuzzified input for variable {var:?}")))?;
            let d = degrees
                .get(term)
                .copied()
                .ok_or_else(|| Error::Taxonomy(format!("variable {var:?} has no term {term:?}")))?;
            strength = strength.min(d);
        }
        if strength > 0.0 {
            let slot = strongest.entry(rule.then.as_str()).or_insert(0.0);
            *slot = slot.max(strength);
        }
    }
    if strongest.is_empty() {
        return Err(Error::EmptyInference);
    }
    let output = rulebase.output();
    // clipping at the larger of two strengths dominates the smaller one, so
    // rules sharing a consequent collapse to a single clip
    let clips = strongest
        .into_iter()
        .map(|(term, s)| (output.term(term).expect("validated rule base").mf, s))
        .collect();
    Ok(Aggregate::new(clips))
}

/// Centroid of `aggregate` over `[0, 1]` using the midpoint rule with
/// `resolution` uniform cells.
pub fn defuzzify(aggregate: &Aggregate, resolution: usize) -> Result<f64> {
    if resolution == 0 {
        return Err(Error::Input("resolution must be positive".into()));
    }
    let h = 1.0 / resolution as f64;
    let (mut area, mut moment) = (0.0, 0.0);
    for i in 0..resolution {
        let x = (i as f64 + 0.5) * h;
        let mu = aggregate.membership(x);
        area += mu;
        moment += x * mu;
    }
    if area <= 0.0 {
        return Err(Error::EmptyInference);
    }
    Ok(moment / area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::rulebase::{FuzzyRule, RuleBaseSpec};

    fn default_output_term(name: &str) -> MembershipFunction {
        RuleBase::default().output().term(name).unwrap().mf
    }

    fn dense_grid_equal(a: &Aggregate, b: &Aggregate) -> bool {
        (0..=100_000).all(|i| {
            let x = i as f64 / 100_000.0;
            a.membership(x) == b.membership(x)
        })
    }

    fn single_input(term: &str, degree: f64) -> BTreeMap<String, Degrees> {
        let mut d = Degrees::new();
        for t in ["Low", "Medium", "High"] {
            d.insert(t.to_string(), if t == term { degree } else { 0.0 });
        }
        BTreeMap::from([("uncertainty-level".to_string(), d)])
    }

    #[test]
    fn fuzzify_peak_and_outside_support() {
        let rb = RuleBase::default();
        let var = &rb.inputs()[0];
        let d = fuzzify(0.5, var).unwrap();
        assert_eq!(d["Medium"], 1.0);
        assert_eq!(d["Low"], 0.0);
        assert_eq!(d["High"], 0.0);
        let mid = fuzzify((0.17 + 0.5) / 2.0, var).unwrap();
        assert!((mid["Medium"] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fuzzify_clamps_and_rejects_nan() {
        let rb = RuleBase::default();
        let var = &rb.inputs()[0];
        assert_eq!(fuzzify(-3.0, var).unwrap(), fuzzify(0.0, var).unwrap());
        assert_eq!(fuzzify(7.0, var).unwrap(), fuzzify(1.0, var).unwrap());
        assert!(matches!(fuzzify(f64::NAN, var), Err(Error::Input(_))));
        assert!(fuzzify(f64::INFINITY, var).is_err());
    }

    #[test]
    fn full_strength_rule_reproduces_consequent() {
        let rb = RuleBase::default();
        let agg = infer(&rb, &single_input("Low", 1.0)).unwrap();
        let good = default_output_term("Good");
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert_eq!(agg.membership(x), good.eval(x));
        }
    }

    #[test]
    fn half_strength_rule_clips() {
        let rb = RuleBase::default();
        let agg = infer(&rb, &single_input("Low", 0.5)).unwrap();
        let good = default_output_term("Good");
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert_eq!(agg.membership(x), good.eval(x).min(0.5));
        }
    }

    #[test]
    fn shared_consequent_takes_max() {
        let mut spec = RuleBaseSpec::default();
        spec.rules
            .push(FuzzyRule::new(&[("uncertainty-level", "Medium")], "Good"));
        let rb = RuleBase::new(spec).unwrap();
        let mut inputs = single_input("Low", 0.3);
        inputs
            .get_mut("uncertainty-level")
            .unwrap()
            .insert("Medium".into(), 0.6);
        let both = infer(&rb, &inputs).unwrap();
        // Medium also fires Fair at 0.6 through the default rule
        let good = default_output_term("Good");
        let fair = default_output_term("Fair");
        let oracle = Aggregate::new(vec![(good, 0.6), (fair, 0.6)]);
        assert!(dense_grid_equal(&both, &oracle));

        let single = infer(&RuleBase::default(), &single_input("Low", 0.6)).unwrap();
        let two_rules = infer(
            &RuleBase::new(RuleBaseSpec {
                rules: vec![
                    FuzzyRule::new(&[("uncertainty-level", "Low")], "Good"),
                    FuzzyRule::new(&[("uncertainty-level", "Medium")], "Good"),
                    FuzzyRule::new(&[("uncertainty-level", "High")], "Poor"),
                ],
                ..RuleBaseSpec::default()
            })
            .unwrap(),
            &{
                let mut i = single_input("Low", 0.6);
                i.get_mut("uncertainty-level")
                    .unwrap()
                    .insert("Medium".into(), 0.3);
                i
            },
        )
        .unwrap();
        assert!(dense_grid_equal(&single, &two_rules));
    }

    #[test]
    fn nothing_fires_is_empty_inference() {
        let rb = RuleBase::default();
        let zero = single_input("Low", 0.0);
        assert_eq!(infer(&rb, &zero), Err(Error::EmptyInference));
        assert!(matches!(infer(&rb, &BTreeMap::new()), Err(Error::Input(_))));
    }

    #[test]
    fn defuzzify_symmetric_and_uniform() {
        let tri = MembershipFunction::triangular(0.2, 0.5, 0.8).unwrap();
        let c = defuzzify(&Aggregate::new(vec![(tri, 1.0)]), 1001).unwrap();
        assert!((c - 0.5).abs() <= 1.0 / 1001.0);
        let flat = MembershipFunction::trapezoidal(0.0, 0.0, 1.0, 1.0).unwrap();
        let c = defuzzify(&Aggregate::new(vec![(flat, 1.0)]), 1001).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
    }

    #[test]
    fn defuzzify_clipped_trapezoid_against_dense_oracle() {
        let trap = MembershipFunction::trapezoidal(0.1, 0.3, 0.45, 0.95).unwrap();
        let agg = Aggregate::new(vec![(trap, 0.7)]);
        let n = 1_000_000;
        let (mut m0, mut m1) = (0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            let mu = trap.eval(x).min(0.7);
            m0 += mu;
            m1 += x * mu;
        }
        let c = defuzzify(&agg, 1001).unwrap();
        assert!((c - m1 / m0).abs() < 1e-4);
    }

    #[test]
    fn defuzzify_zero_area_and_zero_resolution() {
        let agg = Aggregate::new(vec![]);
        assert_eq!(defuzzify(&agg, 1001), Err(Error::EmptyInference));
        let tri = MembershipFunction::triangular(0.2, 0.5, 0.8).unwrap();
        assert!(defuzzify(&Aggregate::new(vec![(tri, 1.0)]), 0).is_err());
    }
}
