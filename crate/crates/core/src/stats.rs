//! Ranking probabilities, empirical distributions and summary statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::Paradigm;
use crate::simulation::{mean_values, ConfigEcho, Level, MeanValues, NodeInfo, SimulationResult};

pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;
pub const DEFAULT_BINS: usize = 30;

/// Scenario indices from best to worst. Values within `tie_epsilon` of the
/// best remaining value are ordered by ascending index.
pub fn rank_positions(values: &[f64], tie_epsilon: f64) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..values.len()).collect();
    let mut order = Vec::with_capacity(values.len());
    while !remaining.is_empty() {
        let best = remaining
            .iter()
            .map(|&i| values[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let pos = remaining
            .iter()
            .position(|&i| values[i] >= best - tie_epsilon)
            .expect("best value is among the remaining");
        order.push(remaining.remove(pos));
    }
    order
}

/// Position probabilities for one node, `[scenario][position]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRanks {
    pub node: String,
    pub probabilities: Vec<Vec<f64>>,
}

impl NodeRanks {
    pub fn first(&self) -> Vec<f64> {
        self.probabilities.iter().map(|row| row[0]).collect()
    }

    pub fn last(&self) -> Vec<f64> {
        self.probabilities.iter().map(|row| row[row.len() - 1]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankProbabilityTable {
    pub level: Level,
    pub nodes: Vec<NodeRanks>,
}

impl RankProbabilityTable {
    pub fn node(&self, id: &str) -> Option<&NodeRanks> {
        self.nodes.iter().find(|n| n.node == id)
    }
}

pub fn rank_probabilities(result: &SimulationResult, level: Level) -> Result<RankProbabilityTable> {
    rank_probabilities_eps(result, level, DEFAULT_TIE_EPSILON)
}

pub fn rank_probabilities_eps(
    result: &SimulationResult,
    level: Level,
    tie_epsilon: f64,
) -> Result<RankProbabilityTable> {
    if result.runs.is_empty() {
        return Err(Error::Empty("simulation has no runs".into()));
    }
    let n_s = result.scenarios.len();
    let n = result.n_runs() as f64;
    let nodes = result
        .node_ids(level)
        .into_iter()
        .enumerate()
        .map(|(k, node)| {
            let mut counts = vec![vec![0usize; n_s]; n_s];
            for r in 0..result.n_runs() {
                let values = result.values_at(r, level, k);
                for (pos, s) in rank_positions(&values, tie_epsilon).into_iter().enumerate() {
                    counts[s][pos] += 1;
                }
            }
            NodeRanks {
                node,
                probabilities: counts
                    .into_iter()
                    .map(|row| row.into_iter().map(|c| c as f64 / n).collect())
                    .collect(),
            }
        })
        .collect();
    Ok(RankProbabilityTable { level, nodes })
}

/// Equal-width histogram over `[min, max]` with its cumulative fractions.
/// `cdf[i]` is the fraction of values in bins `0..=i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub cdf: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn empirical_distribution(values: &[f64], n_bins: usize) -> Result<EmpiricalDistribution> {
    if values.is_empty() {
        return Err(Error::Empty("no values to bin".into()));
    }
    if n_bins == 0 {
        return Err(Error::Empty("histogram needs at least one bin".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(EmpiricalDistribution {
            edges: vec![lo, hi],
            counts: vec![values.len()],
            cdf: vec![1.0],
        });
    }
    let width = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..n_bins).map(|i| lo + width * i as f64).collect();
    edges.push(hi);
    let mut counts = vec![0usize; n_bins];
    for &x in values {
        let b = (((x - lo) / width).floor() as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let n = values.len() as f64;
    let mut acc = 0usize;
    let cdf = counts
        .iter()
        .map(|&c| {
            acc += c;
            acc as f64 / n
        })
        .collect();
    Ok(EmpiricalDistribution { edges, counts, cdf })
}

/// Linear-interpolation quantile of sorted data (`p` in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub p2_5: f64,
    pub median: f64,
    pub p97_5: f64,
}

pub fn summarize(scenario: &str, values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::Empty("no values to summarize".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Summary {
        scenario: scenario.to_string(),
        mean: crate::simulation::mean(values),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        p2_5: quantile_sorted(&sorted, 0.025),
        median: quantile_sorted(&sorted, 0.5),
        p97_5: quantile_sorted(&sorted, 0.975),
    })
}

/// Overall-index summary per scenario.
pub fn summary(result: &SimulationResult) -> Result<Vec<Summary>> {
    if result.runs.is_empty() {
        return Err(Error::Empty("simulation has no runs".into()));
    }
    result
        .scenarios
        .iter()
        .enumerate()
        .map(|(s, name)| summarize(name, &result.series(Level::Overall, 0, s)))
        .collect()
}

/// Everything the reports need, computed once from a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub paradigm: Paradigm,
    pub config: ConfigEcho,
    pub scenarios: Vec<String>,
    pub requirements: Vec<NodeInfo>,
    pub criteria: Vec<NodeInfo>,
    pub means: MeanValues,
    pub summaries: Vec<Summary>,
    pub rank_overall: RankProbabilityTable,
    pub rank_requirement: RankProbabilityTable,
    pub rank_criterion: RankProbabilityTable,
    pub distributions: Distributions,
}

/// Histograms laid out `[node][scenario]` per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distributions {
    pub overall: Vec<EmpiricalDistribution>,
    pub requirements: Vec<Vec<EmpiricalDistribution>>,
    pub criteria: Vec<Vec<EmpiricalDistribution>>,
}

impl Distributions {
    pub fn level(&self, level: Level) -> Vec<&[EmpiricalDistribution]> {
        match level {
            Level::Overall => vec![self.overall.as_slice()],
            Level::Requirement => self.requirements.iter().map(Vec::as_slice).collect(),
            Level::Criterion => self.criteria.iter().map(Vec::as_slice).collect(),
        }
    }
}

impl Statistics {
    pub fn ranks(&self, level: Level) -> &RankProbabilityTable {
        match level {
            Level::Overall => &self.rank_overall,
            Level::Requirement => &self.rank_requirement,
            Level::Criterion => &self.rank_criterion,
        }
    }

    pub fn node_ids(&self, level: Level) -> Vec<String> {
        match level {
            Level::Overall => vec![crate::simulation::OVERALL_NODE.to_string()],
            Level::Requirement => self.requirements.iter().map(|n| n.id.clone()).collect(),
            Level::Criterion => self.criteria.iter().map(|n| n.id.clone()).collect(),
        }
    }

    pub fn node_names(&self, level: Level) -> Vec<String> {
        match level {
            Level::Overall => vec!["Overall".to_string()],
            Level::Requirement => self.requirements.iter().map(|n| n.name.clone()).collect(),
            Level::Criterion => self.criteria.iter().map(|n| n.name.clone()).collect(),
        }
    }

    /// CSV rows keyed by (paradigm, level, node, scenario).
    pub fn to_csv(&self) -> String {
        let n_s = self.scenarios.len();
        let mut out = String::from("paradigm,level,node,scenario,mean");
        for p in 1..=n_s {
            out.push_str(&format!(",rank_{p}"));
        }
        out.push('\n');
        for level in [Level::Overall, Level::Requirement, Level::Criterion] {
            let means = self.means.level(level);
            for (k, ranks) in self.ranks(level).nodes.iter().enumerate() {
                for (s, scen) in self.scenarios.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{}",
                        self.paradigm,
                        level.as_str(),
                        ranks.node,
                        scen,
                        means[k][s]
                    ));
                    for p in &ranks.probabilities[s] {
                        out.push_str(&format!(",{p}"));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}

pub fn compute_statistics(result: &SimulationResult, n_bins: usize) -> Result<Statistics> {
    let level = |level: Level, n_nodes: usize| -> Result<Vec<Vec<EmpiricalDistribution>>> {
        (0..n_nodes)
            .map(|node| {
                (0..result.scenarios.len())
                    .map(|s| empirical_distribution(&result.series(level, node, s), n_bins))
                    .collect()
            })
            .collect()
    };
    let distributions = Distributions {
        overall: level(Level::Overall, 1)?.remove(0),
        requirements: level(Level::Requirement, result.requirements.len())?,
        criteria: level(Level::Criterion, result.criteria.len())?,
    };
    Ok(Statistics {
        paradigm: result.paradigm,
        config: result.config.clone(),
        scenarios: result.scenarios.clone(),
        requirements: result.requirements.clone(),
        criteria: result.criteria.clone(),
        means: mean_values(result)?,
        summaries: summary(result)?,
        rank_overall: rank_probabilities(result, Level::Overall)?,
        rank_requirement: rank_probabilities(result, Level::Requirement)?,
        rank_criterion: rank_probabilities(result, Level::Criterion)?,
        distributions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank_positions(&[0.4, 0.7, 0.5], DEFAULT_TIE_EPSILON), [1, 2, 0]);
        assert_eq!(rank_positions(&[0.3, 0.3, 0.3], DEFAULT_TIE_EPSILON), [0, 1, 2]);
        assert_eq!(rank_positions(&[0.2, 0.8, 0.8], DEFAULT_TIE_EPSILON), [1, 2, 0]);
        assert_eq!(rank_positions(&[0.5, 0.5 + 1e-12, 0.1], DEFAULT_TIE_EPSILON), [0, 1, 2]);
        assert_eq!(rank_positions(&[0.5], DEFAULT_TIE_EPSILON), [0]);
    }

    #[test]
    fn histogram_examples() {
        let d = empirical_distribution(&vec![0.5; 1000], 30).unwrap();
        assert_eq!(d.counts, [1000]);
        assert_eq!(*d.cdf.last().unwrap(), 1.0);
        let tenths: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let d = empirical_distribution(&tenths, 2).unwrap();
        assert_eq!(d.counts, [5, 5]);
        assert_eq!(d.cdf, [0.5, 1.0]);
        assert!(empirical_distribution(&[], 3).is_err());
        assert!(empirical_distribution(&[1.0], 0).is_err());
    }

    #[test]
    fn summary_examples() {
        let s = summarize("S", &[0.3; 10]).unwrap();
        assert_eq!((s.mean, s.min, s.max), (0.3, 0.3, 0.3));
        let hundred: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        let s = summarize("S", &hundred).unwrap();
        assert!((s.median - 0.505).abs() < 0.005);
        assert!(s.min <= s.p2_5 && s.p2_5 <= s.p97_5 && s.p97_5 <= s.max);
    }
}
