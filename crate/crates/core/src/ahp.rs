//! Criteria weights via the Analytic Hierarchy Process.
//!
//! Importance ratings (0..=10) are averaged per criterion over the selected
//! respondents; the group means become a ratio pairwise matrix
//! `a_ij = r_i / r_j` whose principal eigenvector gives the weights.
//! Published weight tables can also be ingested directly ([`WeightTable`]).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{CriterionWeights, DecisionTree, Paradigm};

/// Pooled profile covering every respondent.
pub const GENERAL: &str = "General";

/// Zero ratings are raised to this before ratios are formed.
pub const RATING_FLOOR: f64 = 0.5;

pub const MAX_RATING: u8 = 10;

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

/// Saaty random consistency indices for k = 1..=10.
pub const RANDOM_INDEX: [f64; 10] = [0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl PairwiseMatrix {
    /// Builds a matrix from rows, checking positivity and reciprocity.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::Matrix("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Matrix("matrix is not square".into()));
        }
        let entries: Vec<f64> = rows.iter().flatten().copied().collect();
        let m = PairwiseMatrix { k, entries };
        for i in 0..k {
            for j in 0..k {
                let a = m.get(i, j);
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::Matrix(format!("entry ({i}, {j}) = {a} is not positive")));
                }
                if (a * m.get(j, i) - 1.0).abs() > 1e-9 {
                    return Err(Error::Matrix(format!("entries ({i}, {j}) and ({j}, {i}) are not reciprocal")));
                }
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    fn mul(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.k)
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }
}

/// Ratio matrix `a_ij = r_i / r_j` from mean ratings (zeros floored).
pub fn pairwise_from_ratings(mean_ratings: &[f64]) -> Result<PairwiseMatrix> {
    if mean_ratings.is_empty() {
        return Err(Error::Matrix("no ratings".into()));
    }
    let r: Vec<f64> = mean_ratings
        .iter()
        .map(|&x| if x == 0.0 { RATING_FLOOR } else { x })
        .collect();
    if let Some(bad) = r.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Matrix(format!("rating {bad} is not positive")));
    }
    let k = r.len();
    let mut entries = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            entries.push(if i == j { 1.0 } else { r[i] / r[j] });
        }
    }
    Ok(PairwiseMatrix { k, entries })
}

/// Principal eigenvector and eigenvalue by power iteration.
fn power_iteration(m: &PairwiseMatrix) -> Result<(Vec<f64>, f64)> {
    let k = m.size();
    let mut v = vec![1.0 / k as f64; k];
    for _ in 0..POWER_MAX_ITER {
        let w = m.mul(&v);
        let s: f64 = w.iter().sum();
        let next: Vec<f64> = w.iter().map(|x| x / s).collect();
        let change = next
            .iter()
            .zip(&v)
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max);
        v = next;
        if change < POWER_TOLERANCE {
            let av = m.mul(&v);
            let lambda = av.iter().zip(&v).map(|(a, x)| a / x).sum::<f64>() / k as f64;
            return Ok((v, lambda));
        }
    }
    Err(Error::NoConvergence(POWER_MAX_ITER))
}

/// Normalized principal eigenvector (sums to 1, all positive).
pub fn principal_weights(matrix: &PairwiseMatrix) -> Result<Vec<f64>> {
    power_iteration(matrix).map(|(v, _)| v)
}

pub fn principal_eigenvalue(matrix: &PairwiseMatrix) -> Result<f64> {
    power_iteration(matrix).map(|(_, l)| l)
}

/// `CR = ((λ_max - k) / (k - 1)) / RI(k)`, defined as 0 for k ≤ 2.
pub fn consistency_ratio(matrix: &PairwiseMatrix) -> Result<f64> {
    let k = matrix.size();
    if k > RANDOM_INDEX.len() {
        return Err(Error::RandomIndexExhausted(k));
    }
    if k <= 2 {
        return Ok(0.0);
    }
    let lambda = principal_eigenvalue(matrix)?;
    let ci = (lambda - k as f64) / (k as f64 - 1.0);
    Ok((ci / RANDOM_INDEX[k - 1]).max(0.0))
}

// ---------------------------------------------------------------------------
// Ratings

#[derive(Debug, Clone, PartialEq)]
pub struct RatingRow {
    pub respondent: String,
    pub group: String,
    pub ratings: Vec<(String, u8)>,
}

impl RatingRow {
    fn rating(&self, criterion: &str) -> Option<u8> {
        self.ratings
            .iter()
            .find(|(c, _)| c == criterion)
            .map(|&(_, r)| r)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingsTable {
    pub rows: Vec<RatingRow>,
}

impl RatingsTable {
    /// Distinct stakeholder groups in first-seen order.
    pub fn groups(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.group) {
                out.push(r.group.clone());
            }
        }
        out
    }
}

/// Reads `respondent,group,<criterion-id>...` CSV.
pub fn load_ratings(csv_text: &str) -> Result<RatingsTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("respondent") || headers.get(1) != Some("group") {
        return Err(Error::Ratings(
            "header must start with `respondent,group`".into(),
        ));
    }
    let criteria: Vec<String> = headers.iter().skip(2).map(String::from).collect();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let respondent = record.get(0).unwrap_or("").to_string();
        let group = record.get(1).unwrap_or("").to_string();
        let mut ratings = Vec::with_capacity(criteria.len());
        for (i, c) in criteria.iter().enumerate() {
            let raw = record.get(i + 2).unwrap_or("");
            let r: u8 = raw.parse().map_err(|_| {
                Error::Ratings(format!(
                    "row {} ({respondent}): rating for {c} is not an integer: `{raw}`",
                    line + 2
                ))
            })?;
            if r > MAX_RATING {
                return Err(Error::Ratings(format!(
                    "row {} ({respondent}): rating {r} for {c} outside 0..=10",
                    line + 2
                )));
            }
            ratings.push((c.clone(), r));
        }
        rows.push(RatingRow {
            respondent,
            group,
            ratings,
        });
    }
    Ok(RatingsTable { rows })
}

pub fn load_ratings_file(path: impl AsRef<Path>) -> Result<RatingsTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_ratings(&text)
}

/// Weights for one requirement group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupResult {
    pub requirement: String,
    pub criteria: Vec<String>,
    pub mean_ratings: Vec<f64>,
    pub weights: Vec<f64>,
    pub consistency_ratio: f64,
}

/// AHP weights for every requirement group of a tree, for one profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupWeights {
    pub profile: String,
    pub respondents: usize,
    pub groups: Vec<GroupResult>,
}

impl GroupWeights {
    pub fn as_criterion_weights(&self) -> CriterionWeights {
        let entries = self
            .groups
            .iter()
            .flat_map(|g| g.criteria.iter().cloned().zip(g.weights.iter().copied()))
            .collect();
        CriterionWeights::new(self.profile.clone(), entries)
    }
}

/// Runs AHP per requirement group over respondents of `group_filter`
/// (`"General"` pools everyone).
pub fn group_weights(
    table: &RatingsTable,
    tree: &DecisionTree,
    group_filter: &str,
) -> Result<GroupWeights> {
    let rows: Vec<&RatingRow> = if group_filter == GENERAL {
        table.rows.iter().collect()
    } else {
        table.rows.iter().filter(|r| r.group == group_filter).collect()
    };
    if rows.is_empty() {
        if table.rows.is_empty() {
            return Err(Error::Empty("ratings table has no rows".into()));
        }
        let mut available = table.groups();
        available.push(GENERAL.to_string());
        return Err(Error::UnknownGroup {
            requested: group_filter.to_string(),
            available,
        });
    }
    for c in tree.criteria() {
        if rows.iter().any(|r| r.rating(&c.id).is_none()) {
            return Err(Error::MissingCriterion(c.id.clone()));
        }
    }

    let n = rows.len() as f64;
    let mut groups = Vec::with_capacity(tree.requirements.len());
    for req in &tree.requirements {
        let ids: Vec<String> = req.criteria.iter().map(|c| c.id.clone()).collect();
        let means: Vec<f64> = ids
            .iter()
            .map(|id| rows.iter().map(|r| f64::from(r.rating(id).unwrap())).sum::<f64>() / n)
            .collect();
        let matrix = pairwise_from_ratings(&means)?;
        let weights = principal_weights(&matrix)?;
        let cr = consistency_ratio(&matrix)?;
        groups.push(GroupResult {
            requirement: req.id.clone(),
            criteria: ids,
            mean_ratings: means,
            weights,
            consistency_ratio: cr,
        });
    }
    Ok(GroupWeights {
        profile: group_filter.to_string(),
        respondents: rows.len(),
        groups,
    })
}

// ---------------------------------------------------------------------------
// Precomputed weight tables

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightRow {
    /// Criterion name or id.
    pub criterion: String,
    /// One weight per profile, as fractions.
    pub weights: Vec<f64>,
}

/// A stakeholder × criterion weight table loaded verbatim, skipping AHP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTable {
    pub paradigm: Paradigm,
    pub profiles: Vec<String>,
    pub criteria: Vec<WeightRow>,
}

/// Sum of one requirement group's weights for one profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSum {
    pub profile: String,
    pub requirement: String,
    pub sum: f64,
}

impl WeightTable {
    pub fn column(&self, profile: &str) -> Result<CriterionWeights> {
        let k = self
            .profiles
            .iter()
            .position(|p| p == profile)
            .ok_or_else(|| Error::UnknownGroup {
                requested: profile.to_string(),
                available: self.profiles.clone(),
            })?;
        Ok(CriterionWeights::new(
            profile,
            self.criteria
                .iter()
                .map(|r| (r.criterion.clone(), r.weights[k]))
                .collect(),
        ))
    }

    /// Raw per-group sums for every profile, over the criteria of `tree`.
    pub fn group_sums(&self, tree: &DecisionTree) -> Result<Vec<GroupSum>> {
        let mut out = Vec::new();
        for profile in &self.profiles {
            let col = self.column(profile)?;
            for req in &tree.requirements {
                let mut sum = 0.0;
                for c in &req.criteria {
                    sum += col.lookup(c).ok_or_else(|| Error::MissingWeight(c.id.clone()))?;
                }
                out.push(GroupSum {
                    profile: profile.clone(),
                    requirement: req.id.clone(),
                    sum,
                });
            }
        }
        Ok(out)
    }
}

pub fn load_weight_table(json: &str) -> Result<WeightTable> {
    let table: WeightTable = serde_json::from_str(json)?;
    let p = table.profiles.len();
    if p == 0 {
        return Err(Error::Parse("weight table lists no profiles".into()));
    }
    for row in &table.criteria {
        if row.weights.len() != p {
            return Err(Error::Parse(format!(
                "criterion `{}`: {} weights for {p} profiles",
                row.criterion,
                row.weights.len()
            )));
        }
        if let Some(w) = row.weights.iter().find(|w| !(**w > 0.0 && **w <= 1.0)) {
            return Err(Error::Parse(format!(
                "criterion `{}`: weight {w} outside (0, 1]",
                row.criterion
            )));
        }
    }
    Ok(table)
}

pub fn load_weight_table_file(path: impl AsRef<Path>) -> Result<WeightTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_weight_table(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn ratio_matrices() {
        let m = pairwise_from_ratings(&[8.0, 4.0]).unwrap();
        assert_eq!(m.rows(), vec![vec![1.0, 2.0], vec![0.5, 1.0]]);
        let m = pairwise_from_ratings(&[5.0, 5.0, 5.0]).unwrap();
        assert!(m.rows().iter().flatten().all(|&a| a == 1.0));
        let m = pairwise_from_ratings(&[6.0, 3.0, 2.0]).unwrap();
        assert_eq!(m.get(0, 2), 3.0);
        assert_eq!(m.get(1, 2), 1.5);
        assert!(pairwise_from_ratings(&[]).is_err());
        assert!(pairwise_from_ratings(&[3.0, -1.0]).is_err());
    }

    #[test]
    fn zero_rating_is_floored() {
        let m = pairwise_from_ratings(&[0.0, 5.0]).unwrap();
        assert_eq!(m.get(0, 1), 0.1);
    }

    #[test]
    fn eigenvector_examples() {
        let w = principal_weights(&PairwiseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap()).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-10 && (w[1] - 1.0 / 3.0).abs() < 1e-10);
        let w = principal_weights(&pairwise_from_ratings(&[1.0; 4]).unwrap()).unwrap();
        assert!(w.iter().all(|x| (x - 0.25).abs() < 1e-12));
        let w = principal_weights(&pairwise_from_ratings(&[6.0, 3.0, 2.0]).unwrap()).unwrap();
        for (a, b) in w.iter().zip([6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn consistency_ratio_cases() {
        let m = pairwise_from_ratings(&[7.0, 2.0, 5.5, 9.0]).unwrap();
        assert!(consistency_ratio(&m).unwrap().abs() < 1e-8);
        let m = PairwiseMatrix::from_rows(&[vec![1.0, 3.0], vec![1.0 / 3.0, 1.0]]).unwrap();
        assert_eq!(consistency_ratio(&m).unwrap(), 0.0);
        let m = pairwise_from_ratings(&[1.0; 11]).unwrap();
        assert!(matches!(consistency_ratio(&m), Err(Error::RandomIndexExhausted(11))));
    }

    #[test]
    fn reciprocity_enforced() {
        assert!(PairwiseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(PairwiseMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
    }

    fn ratings_csv(rows: &[(&str, &str, [u8; 12])]) -> String {
        let mut s = String::from("respondent,group");
        for k in 1..=12 {
            s.push_str(&format!(",C{k}"));
        }
        s.push('\n');
        for (id, g, r) in rows {
            s.push_str(&format!("{id},{g}"));
            for x in r {
                s.push_str(&format!(",{x}"));
            }
            s.push('\n');
        }
        s
    }

    #[test]
    fn uniform_ratings_give_uniform_weights() {
        let csv = ratings_csv(&[("r1", "Architect", [7; 12]), ("r2", "Client", [7; 12])]);
        let table = load_ratings(&csv).unwrap();
        let gw = group_weights(&table, &data::sustainability_tree(), GENERAL).unwrap();
        assert_eq!(gw.respondents, 2);
        let econ = &gw.groups[0];
        assert!(econ.weights.iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn single_respondent_normalized_ratings() {
        let mut r = [5u8; 12];
        r[0] = 8;
        r[1] = 4;
        r[2] = 4;
        let table = load_ratings(&ratings_csv(&[("r1", "Engineer", r)])).unwrap();
        let gw = group_weights(&table, &data::sustainability_tree(), "Engineer").unwrap();
        let w = &gw.groups[0].weights;
        for (a, b) in w.iter().zip([0.5, 0.25, 0.25]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn group_errors() {
        let table = load_ratings(&ratings_csv(&[("r1", "Architect", [5; 12])])).unwrap();
        let err = group_weights(&table, &data::sustainability_tree(), "Pilot").unwrap_err();
        match err {
            Error::UnknownGroup { available, .. } => assert_eq!(available, ["Architect", "General"]),
            other => panic!("{other}"),
        }
        let missing = "respondent,group,C1,C2,C3,C4,C6\nr1,A,1,2,3,4,6\n";
        let table = load_ratings(missing).unwrap();
        let err = group_weights(&table, &data::sustainability_tree(), GENERAL).unwrap_err();
        assert!(matches!(err, Error::MissingCriterion(ref c) if c == "C5"));
        assert!(load_ratings("respondent,group,C1\nr1,A,11\n").is_err());
        assert!(load_ratings("respondent,group,C1\nr1,A,x\n").is_err());
        assert!(load_ratings("id,group,C1\n").is_err());
    }

    #[test]
    fn bypass_general_column() {
        let table = data::sustainability_weight_table();
        let col = table.column("General").unwrap();
        let econ: Vec<f64> = ["Cost", "Time", "Investment Return"]
            .iter()
            .map(|n| col.entries.iter().find(|(k, _)| k == n).unwrap().1)
            .collect();
        assert_eq!(econ, [0.34740, 0.33660, 0.31600]);
        assert!(table.column("Nobody").is_err());
    }

    #[test]
    fn weight_table_validation() {
        let bad = r#"{"paradigm":"sustainability","profiles":["A","B"],
            "criteria":[{"criterion":"Cost","weights":[0.5]}]}"#;
        assert!(load_weight_table(bad).is_err());
        let neg = r#"{"paradigm":"sustainability","profiles":["A"],
            "criteria":[{"criterion":"Cost","weights":[-0.5]}]}"#;
        assert!(load_weight_table(neg).is_err());
    }
}
