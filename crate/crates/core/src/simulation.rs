//! Per-run aggregation of indicator values into criterion, requirement and
//! overall index values.
//!
//! Indicator values do not depend on the weights, so they are evaluated once
//! per (indicator, scenario). Each run then combines them with its row of the
//! weight matrix, the fixed AHP criteria weights and the requirement weights,
//! all as plain weighted sums.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{DecisionTree, Paradigm, RequirementWeightSource};
use crate::sampler::{ConstraintMode, WeightMatrix};
use crate::value_fn::IndicatorValueTable;

const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Overall,
    Requirement,
    Criterion,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Overall => "overall",
            Level::Requirement => "requirement",
            Level::Criterion => "criterion",
        }
    }
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "overall" => Ok(Level::Overall),
            "requirement" => Ok(Level::Requirement),
            "criterion" => Ok(Level::Criterion),
            other => Err(Error::Parse(format!("unknown level `{other}`"))),
        }
    }
}

pub const OVERALL_NODE: &str = "overall";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeInfo {
    pub id: String,
    pub name: String,
    /// Weight within the parent (requirement weight or AHP criteria weight).
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

/// What produced a result, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub n_runs: usize,
    pub constraint_mode: ConstraintMode,
    pub min_weight: f64,
    pub stakeholder_profile: String,
    pub requirement_weights: Vec<f64>,
    pub requirement_weight_source: RequirementWeightSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub overall: f64,
    pub requirements: Vec<f64>,
    pub criteria: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_index: usize,
    /// One entry per scenario, in scenario order.
    pub scenarios: Vec<ScenarioRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub paradigm: Paradigm,
    pub config: ConfigEcho,
    pub scenarios: Vec<String>,
    pub requirements: Vec<NodeInfo>,
    pub criteria: Vec<NodeInfo>,
    pub runs: Vec<RunResult>,
}

impl SimulationResult {
    pub fn n_runs(&self) -> usize {
        self.runs.len()
    }

    pub fn node_ids(&self, level: Level) -> Vec<String> {
        match level {
            Level::Overall => vec![OVERALL_NODE.to_string()],
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

    /// Value of `node` at `level` for every scenario in run `run`.
    pub fn values_at(&self, run: usize, level: Level, node: usize) -> Vec<f64> {
        self.runs[run]
            .scenarios
            .iter()
            .map(|s| match level {
                Level::Overall => s.overall,
                Level::Requirement => s.requirements[node],
                Level::Criterion => s.criteria[node],
            })
            .collect()
    }

    /// All runs' values of one node for one scenario.
    pub fn series(&self, level: Level, node: usize, scenario: usize) -> Vec<f64> {
        self.runs
            .iter()
            .map(|r| {
                let s = &r.scenarios[scenario];
                match level {
                    Level::Overall => s.overall,
                    Level::Requirement => s.requirements[node],
                    Level::Criterion => s.criteria[node],
                }
            })
            .collect()
    }
}

/// Weighted sum of indicator values; weights must sum to one.
pub fn criterion_value(indicator_values: &[f64], weights_row: &[f64]) -> Result<f64> {
    if indicator_values.len() != weights_row.len() {
        return Err(Error::Length(format!(
            "{} values against {} weights",
            indicator_values.len(),
            weights_row.len()
        )));
    }
    if indicator_values.is_empty() {
        return Err(Error::Empty("no indicator values".into()));
    }
    let sum: f64 = weights_row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::Length(format!("weights sum {sum}, expected 1")));
    }
    Ok(dot(indicator_values, weights_row))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, w)| x * w).sum()
}

fn unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn check_layout(tree: &DecisionTree, weights: &WeightMatrix) -> Result<()> {
    let criteria: Vec<_> = tree.criteria().collect();
    if criteria.len() != weights.blocks.len() {
        return Err(Error::Layout(format!(
            "{} criteria in tree, {} blocks in matrix",
            criteria.len(),
            weights.blocks.len()
        )));
    }
    for (c, b) in criteria.iter().zip(&weights.blocks) {
        if c.id != b.criterion || c.m() != b.m {
            return Err(Error::Layout(format!(
                "tree criterion `{}` (m = {}) against matrix block `{}` (m = {})",
                c.id,
                c.m(),
                b.criterion,
                b.m
            )));
        }
    }
    let tree_ids: Vec<&str> = tree.indicators().map(|i| i.id.as_str()).collect();
    if tree_ids.iter().copied().ne(weights.indicators.iter().map(String::as_str)) {
        return Err(Error::Layout("indicator columns differ from tree order".into()));
    }
    Ok(())
}

/// Aggregates every run of `weights` for every scenario in `value_table`.
pub fn run_simulation(
    tree: &DecisionTree,
    value_table: &IndicatorValueTable,
    weights: &WeightMatrix,
) -> Result<SimulationResult> {
    tree.require_weights()?;
    check_layout(tree, weights)?;
    if weights.n_runs == 0 {
        return Err(Error::Empty("weight matrix has no runs".into()));
    }

    // Per-criterion: indicator values laid out [indicator][scenario].
    let mut cached: Vec<Vec<Vec<f64>>> = Vec::new();
    for c in tree.criteria() {
        let block = c
            .indicators
            .iter()
            .map(|i| value_table.values(&i.id))
            .collect::<Result<Vec<_>>>()?;
        cached.push(block);
    }
    let n_scen = value_table.scenarios.len();
    // [criterion][scenario][indicator]
    let per_scenario: Vec<Vec<Vec<f64>>> = cached
        .iter()
        .map(|block| {
            (0..n_scen)
                .map(|s| block.iter().map(|vals| vals[s]).collect())
                .collect()
        })
        .collect();

    let crit_weights: Vec<Vec<f64>> = tree
        .requirements
        .iter()
        .map(|r| r.criteria.iter().map(|c| c.ahp_weight.unwrap()).collect())
        .collect();
    let req_weights = tree.requirement_weights();

    let runs = (0..weights.n_runs)
        .into_par_iter()
        .map(|r| {
            let scenarios = (0..n_scen)
                .map(|s| {
                    let criteria: Vec<f64> = per_scenario
                        .iter()
                        .enumerate()
                        .map(|(b, per_s)| unit(dot(&per_s[s], weights.block_row(r, b))))
                        .collect();
                    let mut offset = 0;
                    let requirements: Vec<f64> = crit_weights
                        .iter()
                        .map(|cw| {
                            let v = unit(dot(&criteria[offset..offset + cw.len()], cw));
                            offset += cw.len();
                            v
                        })
                        .collect();
                    let overall = unit(dot(&requirements, &req_weights));
                    ScenarioRun {
                        overall,
                        requirements,
                        criteria,
                    }
                })
                .collect();
            RunResult {
                run_index: r,
                scenarios,
            }
        })
        .collect();

    let requirements = tree
        .requirements
        .iter()
        .map(|r| NodeInfo {
            id: r.id.clone(),
            name: r.name.clone(),
            weight: r.weight,
            parent: None,
        })
        .collect();
    let criteria = tree
        .requirements
        .iter()
        .flat_map(|r| {
            r.criteria.iter().map(move |c| NodeInfo {
                id: c.id.clone(),
                name: c.name.clone(),
                weight: c.ahp_weight.unwrap(),
                parent: Some(r.id.clone()),
            })
        })
        .collect();

    Ok(SimulationResult {
        paradigm: tree.paradigm,
        config: ConfigEcho {
            seed: weights.config.seed,
            n_runs: weights.n_runs,
            constraint_mode: weights.config.constraint_mode,
            min_weight: weights.config.min_weight,
            stakeholder_profile: tree.stakeholder_profile.clone(),
            requirement_weights: req_weights,
            requirement_weight_source: tree.requirement_weight_source,
        },
        scenarios: value_table.scenarios.clone(),
        requirements,
        criteria,
        runs,
    })
}

/// Means over runs, laid out `[node][scenario]` per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValues {
    pub overall: Vec<f64>,
    pub requirements: Vec<Vec<f64>>,
    pub criteria: Vec<Vec<f64>>,
}

impl MeanValues {
    pub fn level(&self, level: Level) -> Vec<Vec<f64>> {
        match level {
            Level::Overall => vec![self.overall.clone()],
            Level::Requirement => self.requirements.clone(),
            Level::Criterion => self.criteria.clone(),
        }
    }
}

/// Running mean; exact for constant series.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter()
        .enumerate()
        .fold(0.0, |m, (k, &x)| m + (x - m) / (k + 1) as f64)
}

pub fn mean_values(result: &SimulationResult) -> Result<MeanValues> {
    if result.runs.is_empty() {
        return Err(Error::Empty("simulation has no runs".into()));
    }
    let n_s = result.scenarios.len();
    let level = |level: Level, n_nodes: usize| -> Vec<Vec<f64>> {
        (0..n_nodes)
            .map(|node| (0..n_s).map(|s| mean(&result.series(level, node, s))).collect())
            .collect()
    };
    Ok(MeanValues {
        overall: level(Level::Overall, 1).remove(0),
        requirements: level(Level::Requirement, result.requirements.len()),
        criteria: level(Level::Criterion, result.criteria.len()),
    })
}
