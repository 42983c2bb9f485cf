//! The four-layer decision tree: index → requirements → criteria → indicators.
//!
//! Trees are loaded from JSON documents, validated, and are immutable
//! afterwards. Criterion and indicator order is preserved from the document
//! because downstream tie-breaking and weight-matrix layout depend on it.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for per-group and per-tree weight sums.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

/// Largest number of indicators a criterion may hold.
pub const MAX_INDICATORS: usize = 5;

/// Marker accepted in place of a numeric `ahp_weight`.
pub const DERIVE_MARKER: &str = "derive-from-ratings";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Paradigm {
    Sustainability,
    Circularity,
}

impl Paradigm {
    pub fn as_str(self) -> &'static str {
        match self {
            Paradigm::Sustainability => "sustainability",
            Paradigm::Circularity => "circularity",
        }
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Paradigm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sustainability" => Ok(Paradigm::Sustainability),
            "circularity" => Ok(Paradigm::Circularity),
            other => Err(Error::Parse(format!("unknown paradigm `{other}`"))),
        }
    }
}

/// A measurable fourth-layer node. Its value function is looked up by `id`
/// in the indicator value table.
#[derive(Debug, Clone, PartialEq)]
pub struct Indicator {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    /// `None` while the weight is still to be derived from ratings.
    pub ahp_weight: Option<f64>,
    pub indicators: Vec<Indicator>,
}

impl Criterion {
    pub fn m(&self) -> usize {
        self.indicators.len()
    }

    fn matches_key(&self, key: &str) -> bool {
        let key = key.trim();
        self.id == key || self.name.eq_ignore_ascii_case(key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Requirement {
    pub id: String,
    pub name: String,
    pub weight: f64,
    pub criteria: Vec<Criterion>,
}

/// Where the requirement-layer weights came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RequirementWeightSource {
    /// No weights in the document; every requirement gets 1/n.
    EqualDefault,
    Config,
    Override,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub paradigm: Paradigm,
    pub stakeholder_profile: String,
    pub requirement_weight_source: RequirementWeightSource,
    pub requirements: Vec<Requirement>,
}

impl DecisionTree {
    pub fn criteria(&self) -> impl Iterator<Item = &Criterion> {
        self.requirements.iter().flat_map(|r| r.criteria.iter())
    }

    pub fn indicators(&self) -> impl Iterator<Item = &Indicator> {
        self.criteria().flat_map(|c| c.indicators.iter())
    }

    pub fn criterion_count(&self) -> usize {
        self.criteria().count()
    }

    pub fn indicator_count(&self) -> usize {
        self.indicators().count()
    }

    pub fn requirement_weights(&self) -> Vec<f64> {
        self.requirements.iter().map(|r| r.weight).collect()
    }

    /// Replaces the requirement-layer weights.
    pub fn with_requirement_weights(&self, weights: &[f64]) -> Result<DecisionTree> {
        if weights.len() != self.requirements.len() {
            return Err(Error::Length(format!(
                "{} requirement weights given for {} requirements",
                weights.len(),
                self.requirements.len()
            )));
        }
        let mut tree = self.clone();
        for (req, &w) in tree.requirements.iter_mut().zip(weights) {
            req.weight = w;
        }
        tree.requirement_weight_source = RequirementWeightSource::Override;
        let report = validate_tree(&tree);
        if let Some(v) = report.violations.into_iter().next() {
            return Err(v.into_error());
        }
        Ok(tree)
    }

    /// Fails if any criterion still awaits weight derivation.
    pub fn require_weights(&self) -> Result<()> {
        match self.criteria().find(|c| c.ahp_weight.is_none()) {
            Some(c) => Err(Error::PendingWeight(c.id.clone())),
            None => Ok(()),
        }
    }

    pub fn to_document(&self) -> TreeDocument {
        let explicit = self.requirement_weight_source != RequirementWeightSource::EqualDefault;
        TreeDocument {
            paradigm: Some(self.paradigm),
            stakeholder_profile: Some(self.stakeholder_profile.clone()),
            requirements: self
                .requirements
                .iter()
                .map(|r| RequirementDoc {
                    id: r.id.clone(),
                    name: r.name.clone(),
                    weight: explicit.then_some(r.weight),
                    criteria: r
                        .criteria
                        .iter()
                        .map(|c| CriterionDoc {
                            id: c.id.clone(),
                            name: c.name.clone(),
                            ahp_weight: match c.ahp_weight {
                                Some(w) => WeightEntry::Value(w),
                                None => WeightEntry::Marker(DERIVE_MARKER.to_string()),
                            },
                            indicators: c
                                .indicators
                                .iter()
                                .map(|i| IndicatorDoc {
                                    id: i.id.clone(),
                                    name: i.name.clone(),
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("tree document serializes")
    }
}

// ---------------------------------------------------------------------------
// Document format

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paradigm: Option<Paradigm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stakeholder_profile: Option<String>,
    pub requirements: Vec<RequirementDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementDoc {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    pub criteria: Vec<CriterionDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionDoc {
    pub id: String,
    pub name: String,
    pub ahp_weight: WeightEntry,
    pub indicators: Vec<IndicatorDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorDoc {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightEntry {
    Value(f64),
    Marker(String),
}

/// Parses and validates a tree document.
///
/// A `paradigm` field in the document, when present, must agree with
/// `paradigm`.
pub fn load_tree(config: &str, paradigm: Paradigm) -> Result<DecisionTree> {
    let doc: TreeDocument = serde_json::from_str(config)?;
    tree_from_document(doc, paradigm)
}

pub fn load_tree_file(path: impl AsRef<Path>, paradigm: Paradigm) -> Result<DecisionTree> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_tree(&text, paradigm)
}

/// Loads a tree taking the paradigm from the document itself.
pub fn load_tree_auto(config: &str) -> Result<DecisionTree> {
    let doc: TreeDocument = serde_json::from_str(config)?;
    let paradigm = doc.paradigm.unwrap_or(Paradigm::Sustainability);
    tree_from_document(doc, paradigm)
}

pub fn tree_from_document(doc: TreeDocument, paradigm: Paradigm) -> Result<DecisionTree> {
    let tree = build_tree(doc, paradigm)?;
    let report = validate_tree(&tree);
    if let Some(v) = report.violations.into_iter().next() {
        return Err(v.into_error());
    }
    Ok(tree)
}

/// Parses a tree taking the paradigm from the document, checking structure
/// only, so that [`validate_tree`] can list every violation.
pub fn parse_tree_unchecked(config: &str) -> Result<DecisionTree> {
    let doc: TreeDocument = serde_json::from_str(config)?;
    let paradigm = doc.paradigm.unwrap_or(Paradigm::Sustainability);
    build_tree(doc, paradigm)
}

fn build_tree(doc: TreeDocument, paradigm: Paradigm) -> Result<DecisionTree> {
    if let Some(p) = doc.paradigm {
        if p != paradigm {
            return Err(Error::Parse(format!(
                "document declares paradigm `{p}` but `{paradigm}` was requested"
            )));
        }
    }
    let n_req = doc.requirements.len();
    let given = doc.requirements.iter().filter(|r| r.weight.is_some()).count();
    let source = match given {
        0 => RequirementWeightSource::EqualDefault,
        g if g == n_req => RequirementWeightSource::Config,
        _ => {
            return Err(Error::Parse(
                "requirement weights must be given for all requirements or none".into(),
            ))
        }
    };
    let equal = if n_req > 0 { 1.0 / n_req as f64 } else { 0.0 };

    let mut requirements = Vec::with_capacity(n_req);
    for r in doc.requirements {
        let mut criteria = Vec::with_capacity(r.criteria.len());
        for c in r.criteria {
            let ahp_weight = match c.ahp_weight {
                WeightEntry::Value(w) => Some(w),
                WeightEntry::Marker(m) if m == DERIVE_MARKER => None,
                WeightEntry::Marker(m) => {
                    return Err(Error::Parse(format!(
                        "criterion `{}`: ahp_weight must be a number or \"{DERIVE_MARKER}\", got \"{m}\"",
                        c.id
                    )))
                }
            };
            criteria.push(Criterion {
                id: c.id,
                name: c.name,
                ahp_weight,
                indicators: c
                    .indicators
                    .into_iter()
                    .map(|i| Indicator {
                        id: i.id,
                        name: i.name,
                    })
                    .collect(),
            });
        }
        requirements.push(Requirement {
            id: r.id,
            name: r.name,
            weight: r.weight.unwrap_or(equal),
            criteria,
        });
    }

    let tree = DecisionTree {
        paradigm,
        stakeholder_profile: doc
            .stakeholder_profile
            .unwrap_or_else(|| "General".to_string()),
        requirement_weight_source: source,
        requirements,
    };
    Ok(tree)
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty { node: String },
    DuplicateId { kind: &'static str, id: String },
    IndicatorCount { criterion: String, m: usize },
    WeightRange { node: String, weight: f64 },
    GroupWeightSum { requirement: String, sum: f64 },
    RequirementWeightSum { sum: f64 },
}

impl Violation {
    fn into_error(self) -> Error {
        match self {
            Violation::DuplicateId { id, .. } => Error::DuplicateId(id),
            Violation::IndicatorCount { criterion, m } => Error::IndicatorCount { criterion, m },
            other => Error::InvalidTree(other.to_string()),
        }
    }
}

/// Formats a sum with at most six decimals and no trailing zeros.
fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty { node } => write!(f, "`{node}` has no children"),
            Violation::DuplicateId { kind, id } => write!(f, "duplicate {kind} id `{id}`"),
            Violation::IndicatorCount { criterion, m } => {
                write!(f, "criterion `{criterion}`: m out of range ({m})")
            }
            Violation::WeightRange { node, weight } => {
                write!(f, "`{node}`: weight {} outside (0, 1]", short(*weight))
            }
            Violation::GroupWeightSum { requirement, sum } => {
                write!(f, "requirement `{requirement}`: criteria weights sum {}", short(*sum))
            }
            Violation::RequirementWeightSum { sum } => {
                write!(f, "requirement weights sum {}", short(*sum))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "- {v}")?;
        }
        Ok(())
    }
}

fn in_unit_interval(w: f64) -> bool {
    w > 0.0 && w <= 1.0 + WEIGHT_SUM_TOLERANCE
}

/// Lists every invariant violation in `tree`. An empty report means valid.
pub fn validate_tree(tree: &DecisionTree) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen_req = HashSet::new();
    let mut seen_crit = HashSet::new();
    let mut seen_ind = HashSet::new();

    if tree.requirements.is_empty() {
        violations.push(Violation::Empty {
            node: "tree".into(),
        });
    }

    for req in &tree.requirements {
        if !seen_req.insert(req.id.as_str()) {
            violations.push(Violation::DuplicateId {
                kind: "requirement",
                id: req.id.clone(),
            });
        }
        if !in_unit_interval(req.weight) {
            violations.push(Violation::WeightRange {
                node: req.id.clone(),
                weight: req.weight,
            });
        }
        if req.criteria.is_empty() {
            violations.push(Violation::Empty {
                node: req.id.clone(),
            });
        }
        for c in &req.criteria {
            if !seen_crit.insert(c.id.as_str()) {
                violations.push(Violation::DuplicateId {
                    kind: "criterion",
                    id: c.id.clone(),
                });
            }
            if c.indicators.is_empty() || c.m() > MAX_INDICATORS {
                violations.push(Violation::IndicatorCount {
                    criterion: c.id.clone(),
                    m: c.m(),
                });
            }
            if let Some(w) = c.ahp_weight {
                if !in_unit_interval(w) {
                    violations.push(Violation::WeightRange {
                        node: c.id.clone(),
                        weight: w,
                    });
                }
            }
            for i in &c.indicators {
                if !seen_ind.insert(i.id.as_str()) {
                    violations.push(Violation::DuplicateId {
                        kind: "indicator",
                        id: i.id.clone(),
                    });
                }
            }
        }
        // Groups still awaiting derivation are not checked.
        let weights: Option<Vec<f64>> = req.criteria.iter().map(|c| c.ahp_weight).collect();
        if let Some(ws) = weights {
            if !ws.is_empty() {
                let sum: f64 = ws.iter().sum();
                if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                    violations.push(Violation::GroupWeightSum {
                        requirement: req.id.clone(),
                        sum,
                    });
                }
            }
        }
    }

    if !tree.requirements.is_empty() {
        let sum: f64 = tree.requirements.iter().map(|r| r.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            violations.push(Violation::RequirementWeightSum { sum });
        }
    }

    ValidationReport { violations }
}

// ---------------------------------------------------------------------------
// Criterion weights and the circularity variant

/// One stakeholder column of criteria weights, keyed by criterion id or name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriterionWeights {
    pub profile: String,
    pub entries: Vec<(String, f64)>,
}

impl CriterionWeights {
    pub fn new(profile: impl Into<String>, entries: Vec<(String, f64)>) -> Self {
        CriterionWeights {
            profile: profile.into(),
            entries,
        }
    }

    pub fn lookup(&self, criterion: &Criterion) -> Option<f64> {
        self.entries
            .iter()
            .find(|(k, _)| criterion.matches_key(k))
            .map(|&(_, w)| w)
    }
}

/// Groups whose table weights are off by more than rounding noise are
/// rejected rather than silently rescaled.
pub const GROUP_ROUNDING_TOLERANCE: f64 = 1e-3;

fn assign_group(
    req: &mut Requirement,
    weights: &CriterionWeights,
    lost_member: bool,
) -> Result<()> {
    let mut raw = Vec::with_capacity(req.criteria.len());
    for c in &req.criteria {
        let w = weights
            .lookup(c)
            .ok_or_else(|| Error::MissingWeight(c.id.clone()))?;
        if !(w > 0.0) {
            return Err(Error::InvalidTree(format!(
                "criterion `{}`: weight {w} must be positive",
                c.id
            )));
        }
        raw.push(w);
    }
    let sum: f64 = raw.iter().sum();
    if !lost_member && (sum - 1.0).abs() > GROUP_ROUNDING_TOLERANCE {
        return Err(Error::InvalidTree(format!(
            "requirement `{}`: table weights sum {} (profile `{}`)",
            req.id,
            short(sum),
            weights.profile
        )));
    }
    for (c, w) in req.criteria.iter_mut().zip(raw) {
        c.ahp_weight = Some(w / sum);
    }
    Ok(())
}

/// Sets every criterion's AHP weight from `weights`, renormalizing each
/// requirement group so it sums to one.
pub fn apply_criterion_weights(
    tree: &DecisionTree,
    weights: &CriterionWeights,
) -> Result<DecisionTree> {
    let mut out = tree.clone();
    for req in &mut out.requirements {
        assign_group(req, weights, false)?;
    }
    out.stakeholder_profile = weights.profile.clone();
    Ok(out)
}

fn is_waste(c: &Criterion) -> bool {
    let name = c.name.trim().to_ascii_lowercase();
    name == "waste" || name.starts_with("waste ")
}

/// `C<number>` ids are renumbered after a removal; anything else is kept.
fn renumber_criteria(tree: &mut DecisionTree) {
    let numbered = tree.criteria().all(|c| {
        c.id.len() > 1 && c.id.starts_with('C') && c.id[1..].chars().all(|ch| ch.is_ascii_digit())
    });
    if !numbered {
        return;
    }
    let mut k = 0;
    for req in &mut tree.requirements {
        for c in &mut req.criteria {
            k += 1;
            c.id = format!("C{k}");
        }
    }
}

/// Builds the circularity tree from the sustainability tree: the Waste
/// criterion is dropped, criteria are renumbered in order, and every
/// surviving criterion takes its weight from `weights`. The group that lost
/// Waste is renormalized by the sum of its surviving weights.
///
/// Indicator ids are left untouched so they keep matching the value table.
/// A tree with no Waste criterion comes back unchanged apart from the
/// paradigm tag.
pub fn derive_circularity_tree(
    sustainability: &DecisionTree,
    weights: &CriterionWeights,
) -> Result<DecisionTree> {
    let mut out = sustainability.clone();
    out.paradigm = Paradigm::Circularity;
    if !out.criteria().any(is_waste) {
        return Ok(out);
    }

    let mut lost = Vec::with_capacity(out.requirements.len());
    for req in &mut out.requirements {
        let before = req.criteria.len();
        req.criteria.retain(|c| !is_waste(c));
        lost.push(req.criteria.len() != before);
    }
    out.requirements.retain(|r| !r.criteria.is_empty());

    // Weights are looked up before renumbering so keys refer to the
    // sustainability ids or to names.
    for (req, lost_member) in out.requirements.iter_mut().zip(lost) {
        assign_group(req, weights, lost_member)?;
    }
    renumber_criteria(&mut out);
    out.stakeholder_profile = weights.profile.clone();

    let report = validate_tree(&out);
    if let Some(v) = report.violations.into_iter().next() {
        return Err(v.into_error());
    }
    Ok(out)
}
