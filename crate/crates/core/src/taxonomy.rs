//! Uncertainty sources, their aleatoric/epistemic facets, and the observations
//! nodes collect about each other.
//!
//! A source of category [`Category::Both`] cannot be quantified directly; it is
//! decomposed into one or more aleatoric facets (measured numerically) and one or
//! more epistemic facets (assessed with linguistic labels). Every observation
//! targets exactly one facet, and the facet's kind fixes the payload kind.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TERMS: [&str; 3] = ["Low", "Medium", "High"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Aleatoric,
    Epistemic,
    Both,
}

impl Category {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aleatoric" => Some(Category::Aleatoric),
            "epistemic" => Some(Category::Epistemic),
            "both" => Some(Category::Both),
            _ => None,
        }
    }

    pub fn admits(self, kind: FacetKind) -> bool {
        match self {
            Category::Both => true,
            Category::Aleatoric => kind == FacetKind::Aleatoric,
            Category::Epistemic => kind == FacetKind::Epistemic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FacetKind {
    Aleatoric,
    Epistemic,
}

impl FacetKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aleatoric" => Some(FacetKind::Aleatoric),
            "epistemic" => Some(FacetKind::Epistemic),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FacetKind::Aleatoric => "aleatoric",
            FacetKind::Epistemic => "epistemic",
        }
    }
}

/// Severity tier, 1 (most severe) to 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Priority(u8);

impl Priority {
    pub fn new(tier: i64) -> Result<Self> {
        if (1..=4).contains(&tier) {
            Ok(Priority(tier as u8))
        } else {
            Err(Error::Taxonomy(format!(
                "priority {tier} out of range 1..=4"
            )))
        }
    }

    pub fn tier(self) -> u8 {
        self.0
    }

    /// Weight used when no override is configured: tier 1 → 4, ..., tier 4 → 1.
    pub fn default_weight(self) -> f64 {
        f64::from(5 - self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FacetId(pub String);

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for FacetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintySource {
    pub id: SourceId,
    pub name: String,
    pub priority: Priority,
    pub category: Category,
}

impl UncertaintySource {
    pub fn new(name: &str, priority: Priority, category: Category) -> Self {
        UncertaintySource {
            id: SourceId(name.to_string()),
            name: name.to_string(),
            priority,
            category,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncertaintyFacet {
    pub id: FacetId,
    pub source_id: SourceId,
    pub kind: FacetKind,
    pub name: String,
    /// Declared linguistic terms, ordered from least to most uncertain.
    /// Empty for aleatoric facets.
    pub terms: Vec<String>,
}

impl UncertaintyFacet {
    pub fn new(source: &SourceId, name: &str, kind: FacetKind, terms: &[String]) -> Self {
        let terms = match kind {
            FacetKind::Aleatoric => Vec::new(),
            FacetKind::Epistemic => terms.to_vec(),
        };
        UncertaintyFacet {
            id: FacetId(name.to_string()),
            source_id: source.clone(),
            kind,
            name: name.to_string(),
            terms,
        }
    }
}

// (name, priority tier, category), in priority order.
const CANONICAL: [(&str, u8, Category); 11] = [
    ("Hardware Malfunctions", 1, Category::Both),
    ("Data Management", 2, Category::Aleatoric),
    ("Network Design", 2, Category::Both),
    ("Network Stability", 2, Category::Both),
    ("Devices Heterogeneity", 3, Category::Both),
    ("Data Quality", 3, Category::Aleatoric),
    ("Network Scalability", 3, Category::Epistemic),
    ("Privacy Protection", 3, Category::Both),
    ("Quality of Service", 4, Category::Aleatoric),
    ("Geographical Dispersal", 4, Category::Aleatoric),
    ("Environmental Effects", 4, Category::Both),
];

/// The eleven compiled-in sources with their priority tiers and categories.
pub fn canonical_taxonomy() -> Vec<UncertaintySource> {
    CANONICAL
        .iter()
        .map(|&(name, tier, category)| UncertaintySource::new(name, Priority(tier), category))
        .collect()
}

fn canonical_entry(name: &str) -> Option<(u8, Category)> {
    CANONICAL
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|&(_, tier, cat)| (tier, cat))
}

/// Minimal decomposition: single-category sources get one facet named after the
/// source; `Both` sources get `<name>/measured` (aleatoric) and `<name>/assessed`
/// (epistemic).
pub fn default_facets(source: &UncertaintySource, terms: &[String]) -> Vec<UncertaintyFacet> {
    match source.category {
        Category::Aleatoric => vec![UncertaintyFacet::new(
            &source.id,
            &source.name,
            FacetKind::Aleatoric,
            terms,
        )],
        Category::Epistemic => vec![UncertaintyFacet::new(
            &source.id,
            &source.name,
            FacetKind::Epistemic,
            terms,
        )],
        Category::Both => vec![
            UncertaintyFacet::new(
                &source.id,
                &format!("{}/measured", source.name),
                FacetKind::Aleatoric,
                terms,
            ),
            UncertaintyFacet::new(
                &source.id,
                &format!("{}/assessed", source.name),
                FacetKind::Epistemic,
                terms,
            ),
        ],
    }
}

pub fn default_term_set() -> Vec<String> {
    DEFAULT_TERMS.iter().map(|s| s.to_string()).collect()
}

/// Sources plus their facet decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Taxonomy {
    sources: Vec<UncertaintySource>,
    facets: Vec<UncertaintyFacet>,
    source_index: BTreeMap<SourceId, usize>,
    facet_index: BTreeMap<FacetId, usize>,
}

impl Taxonomy {
    pub fn canonical() -> Self {
        Self::with_default_facets(canonical_taxonomy(), &default_term_set())
    }

    pub fn with_default_facets(sources: Vec<UncertaintySource>, terms: &[String]) -> Self {
        let facets = sources
            .iter()
            .flat_map(|s| default_facets(s, terms))
            .collect();
        Self::from_parts(sources, facets)
    }

    /// Builds without checking decomposition rules; see [`Taxonomy::violations`].
    pub fn from_parts(sources: Vec<UncertaintySource>, facets: Vec<UncertaintyFacet>) -> Self {
        let source_index = sources
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.clone(), i))
            .collect();
        let facet_index = facets
            .iter()
            .enumerate()
            .map(|(i, f)| (f.id.clone(), i))
            .collect();
        Taxonomy {
            sources,
            facets,
            source_index,
            facet_index,
        }
    }

    pub fn sources(&self) -> &[UncertaintySource] {
        &self.sources
    }

    pub fn facets(&self) -> &[UncertaintyFacet] {
        &self.facets
    }

    pub fn source(&self, id: &SourceId) -> Result<&UncertaintySource> {
        self.source_index
            .get(id)
            .map(|&i| &self.sources[i])
            .ok_or_else(|| Error::Taxonomy(format!("unknown source {id:?}")))
    }

    pub fn facet(&self, id: &FacetId) -> Result<&UncertaintyFacet> {
        self.facet_index
            .get(id)
            .map(|&i| &self.facets[i])
            .ok_or_else(|| Error::Taxonomy(format!("unknown facet {id:?}")))
    }

    pub fn facet_by_name(&self, name: &str) -> Result<&UncertaintyFacet> {
        self.facet(&FacetId(name.to_string()))
    }

    pub fn source_of(&self, facet: &FacetId) -> Result<&UncertaintySource> {
        self.source(&self.facet(facet)?.source_id)
    }

    pub fn violations(&self) -> Vec<Violation> {
        check_decomposition(&self.sources, &self.facets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    PriorityOutOfRange { source: String, priority: i64 },
    UndeclaredCategory { source: String, category: String },
    UndeclaredFacetKind { facet: String, kind: String },
    CanonicalMismatch { source: String, detail: String },
    DuplicateSource { source: String },
    DuplicateFacet { facet: String },
    UnknownSource { facet: String, source: String },
    MissingAleatoricFacet { source: String },
    MissingEpistemicFacet { source: String },
    FacetKindNotAllowed { source: String, facet: String },
    TooManyFacets { source: String },
    EmptyTermSet { facet: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PriorityOutOfRange { source, priority } => {
                write!(
                    f,
                    "{source}: priority out of range ({priority}, expected 1..=4)"
                )
            }
            Violation::UndeclaredCategory { source, category } => {
                write!(f, "{source}: undeclared category {category:?}")
            }
            Violation::UndeclaredFacetKind { facet, kind } => {
                write!(f, "{facet}: undeclared facet kind {kind:?}")
            }
            Violation::CanonicalMismatch { source, detail } => write!(f, "{source}: {detail}"),
            Violation::DuplicateSource { source } => write!(f, "{source}: duplicate source"),
            Violation::DuplicateFacet { facet } => write!(f, "{facet}: duplicate facet"),
            Violation::UnknownSource { facet, source } => {
                write!(f, "{facet}: refers to unknown source {source:?}")
            }
            Violation::MissingAleatoricFacet { source } => {
                write!(f, "{source}: missing aleatoric facet")
            }
            Violation::MissingEpistemicFacet { source } => {
                write!(f, "{source}: missing epistemic facet")
            }
            Violation::FacetKindNotAllowed { source, facet } => {
                write!(
                    f,
                    "{source}: facet {facet:?} has a kind the category does not allow"
                )
            }
            Violation::TooManyFacets { source } => {
                write!(
                    f,
                    "{source}: single-category source must have exactly one facet"
                )
            }
            Violation::EmptyTermSet { facet } => write!(f, "{facet}: empty linguistic term set"),
        }
    }
}

fn check_decomposition(
    sources: &[UncertaintySource],
    facets: &[UncertaintyFacet],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for s in sources {
        if !seen.insert(&s.id) {
            out.push(Violation::DuplicateSource {
                source: s.name.clone(),
            });
        }
        if let Some((tier, cat)) = canonical_entry(&s.name) {
            if tier != s.priority.tier() || cat != s.category {
                out.push(Violation::CanonicalMismatch {
                    source: s.name.clone(),
                    detail: format!(
                        "canonical source must be priority {tier}, {cat:?} (got {}, {:?})",
                        s.priority.tier(),
                        s.category
                    ),
                });
            }
        }
    }

    let mut seen_facets = BTreeSet::new();
    let mut per_source: BTreeMap<&SourceId, Vec<&UncertaintyFacet>> = BTreeMap::new();
    for f in facets {
        if !seen_facets.insert(&f.id) {
            out.push(Violation::DuplicateFacet {
                facet: f.name.clone(),
            });
        }
        if f.kind == FacetKind::Epistemic && f.terms.is_empty() {
            out.push(Violation::EmptyTermSet {
                facet: f.name.clone(),
            });
        }
        if sources.iter().any(|s| s.id == f.source_id) {
            per_source.entry(&f.source_id).or_default().push(f);
        } else {
            out.push(Violation::UnknownSource {
                facet: f.name.clone(),
                source: f.source_id.0.clone(),
            });
        }
    }

    for s in sources {
        let fs = per_source.get(&s.id).map(Vec::as_slice).unwrap_or(&[]);
        let has = |k| fs.iter().any(|f| f.kind == k);
        for f in fs.iter().filter(|f| !s.category.admits(f.kind)) {
            out.push(Violation::FacetKindNotAllowed {
                source: s.name.clone(),
                facet: f.name.clone(),
            });
        }
        match s.category {
            Category::Both => {
                if !has(FacetKind::Aleatoric) {
                    out.push(Violation::MissingAleatoricFacet {
                        source: s.name.clone(),
                    });
                }
                if !has(FacetKind::Epistemic) {
                    out.push(Violation::MissingEpistemicFacet {
                        source: s.name.clone(),
                    });
                }
            }
            Category::Aleatoric | Category::Epistemic => {
                let kind = if s.category == Category::Aleatoric {
                    FacetKind::Aleatoric
                } else {
                    FacetKind::Epistemic
                };
                if !has(kind) {
                    out.push(if kind == FacetKind::Aleatoric {
                        Violation::MissingAleatoricFacet {
                            source: s.name.clone(),
                        }
                    } else {
                        Violation::MissingEpistemicFacet {
                            source: s.name.clone(),
                        }
                    });
                } else if fs.len() > 1 {
                    out.push(Violation::TooManyFacets {
                        source: s.name.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Source declaration as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub name: String,
    pub priority: i64,
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<FacetSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetSpec {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaxonomyReport {
    pub violations: Vec<Violation>,
    /// Present only when there are no violations.
    pub taxonomy: Option<Taxonomy>,
}

impl TaxonomyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks scenario-declared sources. Never fails; every problem becomes a
/// [`Violation`]. Sources without explicit facets receive the default decomposition.
pub fn validate_scenario_taxonomy(custom: &[SourceSpec], terms: &[String]) -> TaxonomyReport {
    let mut violations = Vec::new();
    let mut sources = Vec::new();
    let mut facets = Vec::new();

    for spec in custom {
        let priority = Priority::new(spec.priority);
        if priority.is_err() {
            violations.push(Violation::PriorityOutOfRange {
                source: spec.name.clone(),
                priority: spec.priority,
            });
        }
        let category = Category::parse(&spec.category);
        if category.is_none() {
            violations.push(Violation::UndeclaredCategory {
                source: spec.name.clone(),
                category: spec.category.clone(),
            });
        }
        let (Ok(priority), Some(category)) = (priority, category) else {
            continue;
        };
        let source = UncertaintySource::new(&spec.name, priority, category);
        match &spec.facets {
            None => facets.extend(default_facets(&source, terms)),
            Some(list) => {
                for fs in list {
                    let Some(kind) = FacetKind::parse(&fs.kind) else {
                        violations.push(Violation::UndeclaredFacetKind {
                            facet: fs.name.clone(),
                            kind: fs.kind.clone(),
                        });
                        continue;
                    };
                    let t = fs.terms.as_deref().unwrap_or(terms);
                    facets.push(UncertaintyFacet::new(&source.id, &fs.name, kind, t));
                }
            }
        }
        sources.push(source);
    }

    violations.extend(check_decomposition(&sources, &facets));
    let taxonomy = violations
        .is_empty()
        .then(|| Taxonomy::from_parts(sources, facets));
    TaxonomyReport {
        violations,
        taxonomy,
    }
}

/// The spec form of the canonical taxonomy (no explicit facets).
pub fn canonical_specs() -> Vec<SourceSpec> {
    canonical_taxonomy()
        .into_iter()
        .map(|s| SourceSpec {
            name: s.name,
            priority: i64::from(s.priority.tier()),
            category: format!("{:?}", s.category),
            facets: None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Quant { samples: Vec<f64>, unit: String },
    Qual { term: String },
}

impl Payload {
    pub fn kind(&self) -> FacetKind {
        match self {
            Payload::Quant { .. } => FacetKind::Aleatoric,
            Payload::Qual { .. } => FacetKind::Epistemic,
        }
    }
}

/// Evidence for one facet. Construction checks the payload against the facet,
/// so a constructed observation always agrees with its facet's kind and terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    facet: FacetId,
    payload: Payload,
}

impl Observation {
    pub fn new(facet: &UncertaintyFacet, payload: Payload) -> Result<Self> {
        if payload.kind() != facet.kind {
            return Err(Error::Taxonomy(format!(
                "facet {} is {} but payload is {}",
                facet.name,
                facet.kind.as_str(),
                payload.kind().as_str()
            )));
        }
        match &payload {
            Payload::Quant { samples, .. } => {
                if samples.is_empty() {
                    return Err(Error::Input(format!("{}: empty sample list", facet.name)));
                }
                if samples.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Input(format!("{}: non-finite sample", facet.name)));
                }
            }
            Payload::Qual { term } => {
                if !facet.terms.iter().any(|t| t == term) {
                    return Err(Error::Taxonomy(format!(
                        "{}: term {term:?} not in {:?}",
                        facet.name, facet.terms
                    )));
                }
            }
        }
        Ok(Observation {
            facet: facet.id.clone(),
            payload,
        })
    }

    pub fn quant(facet: &UncertaintyFacet, samples: Vec<f64>) -> Result<Self> {
        Self::new(
            facet,
            Payload::Quant {
                samples,
                unit: String::new(),
            },
        )
    }

    pub fn qual(facet: &UncertaintyFacet, term: &str) -> Result<Self> {
        Self::new(
            facet,
            Payload::Qual {
                term: term.to_string(),
            },
        )
    }

    pub fn facet(&self) -> &FacetId {
        &self.facet
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn kind(&self) -> FacetKind {
        self.payload.kind()
    }
}

/// The elements u_1..u_n gathered for one evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UncertaintySet {
    elements: Vec<Observation>,
}

impl UncertaintySet {
    pub fn new(elements: Vec<Observation>) -> Self {
        UncertaintySet { elements }
    }

    pub fn push(&mut self, obs: Observation) {
        self.elements.push(obs);
    }

    pub fn elements(&self) -> &[Observation] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Splits into aleatoric and epistemic parts, preserving relative order.
    pub fn partition<'a>(&'a self, taxonomy: &Taxonomy) -> Result<Partition<'a>> {
        let mut part = Partition::default();
        for (i, obs) in self.elements.iter().enumerate() {
            let facet = taxonomy.facet(obs.facet())?;
            if facet.kind != obs.kind() {
                return Err(Error::Taxonomy(format!(
                    "observation for {} has a {} payload",
                    facet.name,
                    obs.kind().as_str()
                )));
            }
            match facet.kind {
                FacetKind::Aleatoric => part.aleatoric.push((i, obs)),
                FacetKind::Epistemic => part.epistemic.push((i, obs)),
            }
        }
        Ok(part)
    }
}

impl FromIterator<Observation> for UncertaintySet {
    fn from_iter<I: IntoIterator<Item = Observation>>(iter: I) -> Self {
        UncertaintySet::new(iter.into_iter().collect())
    }
}

/// U_A and U_E, each element paired with its index in the original set.
#[derive(Debug, Default)]
pub struct Partition<'a> {
    pub aleatoric: Vec<(usize, &'a Observation)>,
    pub epistemic: Vec<(usize, &'a Observation)>,
}

impl Partition<'_> {
    /// j
    pub fn aleatoric_len(&self) -> usize {
        self.aleatoric.len()
    }

    /// k
    pub fn epistemic_len(&self) -> usize {
        self.epistemic.len()
    }

    pub fn len(&self) -> usize {
        self.aleatoric.len() + self.epistemic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
