//! Indicator-weight ensembles by constrained Latin Hypercube sampling.
//!
//! For a criterion with `m` indicators every indicator gets its own LHS
//! column of `n_runs` draws, uniform within `[min_weight, 1 + min_weight -
//! min_weight * m]` and one draw per equal-probability stratum, shuffled
//! independently per column. Each row is then divided by its sum.
//! Single-indicator criteria carry a fixed weight of 1.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{Criterion, DecisionTree, MAX_INDICATORS};
use crate::rng::{substream, Stream};

pub const DEFAULT_RUNS: usize = 1000;
pub const DEFAULT_MIN_WEIGHT: f64 = 0.1;
pub const REDRAW_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintMode {
    /// Bounds apply to raw draws only; normalized weights may dip below the
    /// minimum.
    Literal,
    /// Rows whose normalized minimum falls below the bound are redrawn.
    RejectResample,
}

impl fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintMode::Literal => "literal",
            ConstraintMode::RejectResample => "reject-resample",
        })
    }
}

impl FromStr for ConstraintMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(ConstraintMode::Literal),
            "reject" | "reject-resample" => Ok(ConstraintMode::RejectResample),
            other => Err(Error::SamplerConfig(format!("unknown constraint mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_runs: usize,
    pub seed: u64,
    pub min_weight: f64,
    pub constraint_mode: ConstraintMode,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_runs: DEFAULT_RUNS,
            seed: 0,
            min_weight: DEFAULT_MIN_WEIGHT,
            constraint_mode: ConstraintMode::Literal,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::SamplerConfig("n_runs must be at least 1".into()));
        }
        if !(self.min_weight >= 0.0 && self.min_weight < 1.0 / MAX_INDICATORS as f64) {
            return Err(Error::SamplerConfig(format!(
                "min_weight {} outside [0, 0.2)",
                self.min_weight
            )));
        }
        Ok(())
    }
}

/// Raw sampling bounds for a criterion with `m` indicators.
pub fn weight_bounds(m: usize, min_weight: f64) -> Result<(f64, f64)> {
    if !(2..=MAX_INDICATORS).contains(&m) {
        return Err(Error::WeightDomain(m));
    }
    let low = min_weight;
    let high = 1.0 + min_weight - min_weight * m as f64;
    if !(low < high) {
        return Err(Error::Interval { low, high });
    }
    Ok((low, high))
}

/// One uniform draw inside each of `n` equal strata of `[low, high]`,
/// returned in random order.
pub fn lhs_samples(n: usize, low: f64, high: f64, stream: &mut Stream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::SamplerConfig("LHS needs at least one sample".into()));
    }
    if !(low < high) {
        return Err(Error::Interval { low, high });
    }
    let width = high - low;
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let u: f64 = stream.random();
            low + width * (i as f64 + u) / n as f64
        })
        .collect();
    out.shuffle(stream);
    Ok(out)
}

/// Sampled weights for one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSample {
    pub m: usize,
    /// Raw LHS columns before normalization (empty for m = 1).
    pub raw: Vec<Vec<f64>>,
    /// Normalized weights, row-major `n_runs × m`.
    pub weights: Vec<f64>,
    /// Rows redrawn in reject-resample mode.
    pub redrawn_rows: usize,
}

impl CriterionSample {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.m..(r + 1) * self.m]
    }
}

fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    for w in row.iter_mut() {
        *w /= s;
    }
}

fn min_of(row: &[f64]) -> f64 {
    row.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Samples the weight block of one criterion. Streams are keyed by the
/// criterion id and each indicator id.
pub fn sample_criterion_weights(
    criterion_id: &str,
    indicator_ids: &[&str],
    config: &SamplerConfig,
) -> Result<CriterionSample> {
    config.validate()?;
    let m = indicator_ids.len();
    let n = config.n_runs;
    if m == 0 || m > MAX_INDICATORS {
        return Err(Error::IndicatorCount {
            criterion: criterion_id.to_string(),
            m,
        });
    }
    if m == 1 {
        return Ok(CriterionSample {
            m,
            raw: Vec::new(),
            weights: vec![1.0; n],
            redrawn_rows: 0,
        });
    }

    let (low, high) = weight_bounds(m, config.min_weight)?;
    let raw = indicator_ids
        .iter()
        .map(|id| {
            let mut stream = substream(config.seed, &["lhs", criterion_id, id]);
            lhs_samples(n, low, high, &mut stream)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut weights = Vec::with_capacity(n * m);
    for r in 0..n {
        weights.extend(raw.iter().map(|col| col[r]));
    }
    for row in weights.chunks_mut(m) {
        normalize(row);
    }

    let mut redrawn_rows = 0;
    if config.constraint_mode == ConstraintMode::RejectResample {
        let mut stream = substream(config.seed, &["redraw", criterion_id]);
        for (r, row) in weights.chunks_mut(m).enumerate() {
            if min_of(row) >= config.min_weight {
                continue;
            }
            redrawn_rows += 1;
            let mut tries = 0;
            while min_of(row) < config.min_weight {
                if tries == REDRAW_CAP {
                    return Err(Error::RedrawCapExceeded {
                        criterion: criterion_id.to_string(),
                        row: r,
                        cap: REDRAW_CAP,
                    });
                }
                tries += 1;
                for w in row.iter_mut() {
                    *w = stream.random_range(low..high);
                }
                normalize(row);
            }
        }
    }

    Ok(CriterionSample {
        m,
        raw,
        weights,
        redrawn_rows,
    })
}

fn sample_for(criterion: &Criterion, config: &SamplerConfig) -> Result<CriterionSample> {
    let ids: Vec<&str> = criterion.indicators.iter().map(|i| i.id.as_str()).collect();
    sample_criterion_weights(&criterion.id, &ids, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub criterion: String,
    pub start: usize,
    pub m: usize,
}

/// `n_runs × Σm` indicator weights, columns grouped per criterion in tree
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub n_runs: usize,
    pub indicators: Vec<String>,
    pub blocks: Vec<BlockInfo>,
    pub config: SamplerConfig,
    data: Vec<f64>,
    raw: Vec<Vec<Vec<f64>>>,
    redrawn_rows: Vec<usize>,
}

impl WeightMatrix {
    pub fn n_columns(&self) -> usize {
        self.indicators.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let w = self.n_columns();
        &self.data[r * w..(r + 1) * w]
    }

    pub fn block_row(&self, r: usize, block: usize) -> &[f64] {
        let b = &self.blocks[block];
        &self.row(r)[b.start..b.start + b.m]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_runs).map(|r| self.row(r)[c]).collect()
    }

    /// Raw LHS columns of block `block` (empty for single-indicator blocks).
    pub fn raw_columns(&self, block: usize) -> &[Vec<f64>] {
        &self.raw[block]
    }

    pub fn redrawn_rows(&self, block: usize) -> usize {
        self.redrawn_rows[block]
    }

    /// CSV with header `run,<indicator-id>...`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run");
        for id in &self.indicators {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for r in 0..self.n_runs {
            out.push_str(&r.to_string());
            for w in self.row(r) {
                out.push_str(&format!(",{w:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Samples every criterion of `tree` (in parallel) and concatenates the
/// blocks in tree order.
pub fn build_weight_matrix(tree: &DecisionTree, config: &SamplerConfig) -> Result<WeightMatrix> {
    config.validate()?;
    let criteria: Vec<&Criterion> = tree.criteria().collect();
    let samples = criteria
        .par_iter()
        .map(|c| sample_for(c, config))
        .collect::<Result<Vec<_>>>()?;

    let mut indicators = Vec::new();
    let mut blocks = Vec::with_capacity(criteria.len());
    for c in &criteria {
        blocks.push(BlockInfo {
            criterion: c.id.clone(),
            start: indicators.len(),
            m: c.m(),
        });
        indicators.extend(c.indicators.iter().map(|i| i.id.clone()));
    }

    let n = config.n_runs;
    let mut data = Vec::with_capacity(n * indicators.len());
    for r in 0..n {
        for s in &samples {
            data.extend_from_slice(s.row(r));
        }
    }
    let redrawn_rows = samples.iter().map(|s| s.redrawn_rows).collect();
    let raw = samples.into_iter().map(|s| s.raw).collect();
    Ok(WeightMatrix {
        n_runs: n,
        indicators,
        blocks,
        config: *config,
        data,
        raw,
        redrawn_rows,
    })
}
