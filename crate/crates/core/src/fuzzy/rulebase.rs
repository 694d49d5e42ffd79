use serde::{Deserialize, Serialize};

use super::engine::fuzzify;
use super::membership::MembershipFunction;
use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 1001;

/// Grid points used for the load-time coverage scan of each variable.
const COVERAGE_GRID: usize = 1001;
/// Upper bound on grid points for the rule completeness scan across all inputs.
const COMPLETENESS_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub mf: MembershipFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    pub name: String,
    pub universe: [f64; 2],
    pub terms: Vec<Term>,
}

impl LinguisticVariable {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn lo(&self) -> f64 {
        self.universe[0]
    }

    pub fn hi(&self) -> f64 {
        self.universe[1]
    }

    /// Structural problems, each message naming this variable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let [lo, hi] = self.universe;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            out.push(format!(
                "variable {:?}: universe [{lo}, {hi}] is empty",
                self.name
            ));
            return out;
        }
        if self.terms.is_empty() {
            out.push(format!("variable {:?}: no terms", self.name));
            return out;
        }
        for (i, t) in self.terms.iter().enumerate() {
            if self.terms[..i].iter().any(|o| o.name == t.name) {
                out.push(format!(
                    "variable {:?}: duplicate term {:?}",
                    self.name, t.name
                ));
            }
            if let Err(e) = t.mf.check() {
                out.push(format!("variable {:?}, term {:?}: {e}", self.name, t.name));
                continue;
            }
            let (a, d) = t.mf.support();
            if a < lo || d > hi {
                out.push(format!(
                    "variable {:?}, term {:?}: support [{a}, {d}] leaves the universe",
                    self.name, t.name
                ));
            }
        }
        if !out.is_empty() {
            return out;
        }
        if let Some(x) = coverage_gap(self) {
            out.push(format!(
                "variable {:?}: coverage gap at {x} (no term has positive membership)",
                self.name
            ));
        }
        out
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

fn coverage_gap(var: &LinguisticVariable) -> Option<f64> {
    grid(var.lo(), var.hi(), COVERAGE_GRID).find(|&x| var.terms.iter().all(|t| t.mf.eval(x) <= 0.0))
}

/// `when` is a conjunction of `[variable, term]` pairs; `then` names a term of
/// the output variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub when: Vec<[String; 2]>,
    pub then: String,
}

impl FuzzyRule {
    pub fn new(when: &[(&str, &str)], then: &str) -> Self {
        FuzzyRule {
            when: when
                .iter()
                .map(|(v, t)| [v.to_string(), t.to_string()])
                .collect(),
            then: then.to_string(),
        }
    }
}

/// Serializable, unchecked form of a rule base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBaseSpec {
    pub inputs: Vec<LinguisticVariable>,
    pub output: LinguisticVariable,
    pub rules: Vec<FuzzyRule>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

impl Default for RuleBaseSpec {
    fn default() -> Self {
        let mf = |p: &[f64]| match *p {
            [a, b, c] => MembershipFunction::Triangular([a, b, c]),
            [a, b, c, d] => MembershipFunction::Trapezoidal([a, b, c, d]),
            _ => unreachable!(),
        };
        let var = |name: &str, names: [&str; 3]| LinguisticVariable {
            name: name.to_string(),
            universe: [0.0, 1.0],
            terms: vec![
                Term {
                    name: names[0].to_string(),
                    mf: mf(&[0.0, 0.0, 0.17, 0.5]),
                },
                Term {
                    name: names[1].to_string(),
                    mf: mf(&[0.17, 0.5, 0.83]),
                },
                Term {
                    name: names[2].to_string(),
                    mf: mf(&[0.5, 0.83, 1.0, 1.0]),
                },
            ],
        };
        RuleBaseSpec {
            inputs: vec![var("uncertainty-level", ["Low", "Medium", "High"])],
            output: var("certainty", ["Poor", "Fair", "Good"]),
            rules: vec![
                FuzzyRule::new(&[("uncertainty-level", "Low")], "Good"),
                FuzzyRule::new(&[("uncertainty-level", "Medium")], "Fair"),
                FuzzyRule::new(&[("uncertainty-level", "High")], "Poor"),
            ],
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl RuleBaseSpec {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.inputs.is_empty() {
            out.push("rule base has no input variables".to_string());
        }
        for v in &self.inputs {
            out.extend(v.problems());
        }
        out.extend(self.output.problems());
        if self.output.universe != [0.0, 1.0] {
            out.push(format!(
                "output variable {:?}: universe must be exactly [0, 1]",
                self.output.name
            ));
        }
        if self.resolution == 0 {
            out.push("defuzzification resolution must be positive".to_string());
        }
        if self.rules.is_empty() {
            out.push("rule base has no rules".to_string());
        }
        for (i, rule) in self.rules.iter().enumerate() {
            if rule.when.is_empty() {
                out.push(format!("rule {i}: empty antecedent"));
            }
            for [var, term] in &rule.when {
                match self.inputs.iter().find(|v| &v.name == var) {
                    None => out.push(format!("rule {i}: unknown input variable {var:?}")),
                    Some(v) if v.term(term).is_none() => {
                        out.push(format!("rule {i}: variable {var:?} has no term {term:?}"))
                    }
                    Some(_) => {}
                }
            }
            if self.output.term(&rule.then).is_none() {
                out.push(format!(
                    "rule {i}: output variable {:?} has no term {:?}",
                    self.output.name, rule.then
                ));
            }
        }
        if out.is_empty() {
            if let Some(msg) = self.completeness_gap() {
                out.push(msg);
            }
        }
        out
    }

    /// Scans a grid over every input combination for a point where no rule fires.
    fn completeness_gap(&self) -> Option<String> {
        let dims = self.inputs.len() as u32;
        let mut per_dim = COVERAGE_GRID;
        while per_dim > 2
            && per_dim
                .checked_pow(dims)
                .is_none_or(|n| n > COMPLETENESS_BUDGET)
        {
            per_dim -= 1;
        }
        let axes: Vec<Vec<f64>> = self
            .inputs
            .iter()
            .map(|v| grid(v.lo(), v.hi(), per_dim).collect())
            .collect();
        let mut idx = vec![0usize; axes.len()];
        loop {
            let fired = self.rules.iter().any(|rule| {
                rule.when.iter().all(|[var, term]| {
                    let d = self.inputs.iter().position(|v| &v.name == var).unwrap();
                    let t = self.inputs[d].term(term).unwrap();
                    t.mf.eval(axes[d][idx[d]]) > 0.0
                })
            });
            if !fired {
                let point: Vec<String> = self
                    .inputs
                    .iter()
                    .zip(&idx)
                    .enumerate()
                    .map(|(d, (v, &i))| format!("{}={}", v.name, axes[d][i]))
                    .collect();
                return Some(format!(
                    "incomplete rule base: no rule fires at {}",
                    point.join(", ")
                ));
            }
            // odometer increment
            let mut d = 0;
            loop {
                if d == idx.len() {
                    return None;
                }
                idx[d] += 1;
                if idx[d] < axes[d].len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

/// Validated, immutable Mamdani rule base with a single `[0, 1]` output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleBase {
    spec: RuleBaseSpec,
}

impl RuleBase {
    pub fn new(spec: RuleBaseSpec) -> Result<Self> {
        let problems = spec.problems();
        if problems.is_empty() {
            Ok(RuleBase { spec })
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn spec(&self) -> &RuleBaseSpec {
        &self.spec
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.spec.inputs
    }

    pub fn input(&self, name: &str) -> Option<&LinguisticVariable> {
        self.spec.inputs.iter().find(|v| v.name == name)
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.spec.output
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.spec.rules
    }

    pub fn resolution(&self) -> usize {
        self.spec.resolution
    }

    /// Whether every grid point of each input produces in-range degrees.
    pub fn fuzzify_is_bounded(&self) -> bool {
        self.spec.inputs.iter().all(|v| {
            grid(v.lo(), v.hi(), 101).all(|x| {
                fuzzify(x, v)
                    .map(|m| m.values().all(|d| (0.0..=1.0).contains(d)))
                    .unwrap_or(false)
            })
        })
    }
}
