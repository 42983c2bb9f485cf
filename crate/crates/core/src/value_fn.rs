//! MIVES value functions.
//!
//! A raw indicator score `x` on `[x_min, x_max]` maps to a satisfaction value
//!
//! ```text
//! V(x) = B * (1 - exp(-K * (d / C)^F))
//! B    = 1 / (1 - exp(-K * ((x_max - x_min) / C)^F))
//! ```
//!
//! with `d = x - x_min` for increasing indicators and `d = x_max - x` for
//! decreasing ones, so the best end scores exactly 1 and the worst end 0.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curvature {
    Convex,
    Concave,
    Linear,
    S,
}

/// A shape code such as `D-Convex` or `I-S`. The curvature is descriptive;
/// evaluation only uses the trend and the numeric parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub trend: Trend,
    pub curvature: Curvature,
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(code: &str) -> Result<Self> {
        let unknown = || Error::UnknownShape(code.to_string());
        let (t, c) = code.split_once('-').ok_or_else(unknown)?;
        let trend = match t.trim().to_ascii_uppercase().as_str() {
            "I" => Trend::Increasing,
            "D" => Trend::Decreasing,
            _ => return Err(unknown()),
        };
        let curvature = match c.trim().to_ascii_lowercase().as_str() {
            "convex" => Curvature::Convex,
            "concave" => Curvature::Concave,
            "linear" => Curvature::Linear,
            "s" => Curvature::S,
            _ => return Err(unknown()),
        };
        Ok(Shape { trend, curvature })
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.trend {
            Trend::Increasing => "I",
            Trend::Decreasing => "D",
        };
        write!(f, "{t}-{:?}", self.curvature)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunctionSpec {
    pub x_min: f64,
    pub x_max: f64,
    /// Shape exponent.
    pub f: f64,
    /// Abscissa scale, in score units.
    pub c: f64,
    /// Ordinate factor.
    pub k: f64,
    pub shape: Shape,
}

impl ValueFunctionSpec {
    pub fn trend(&self) -> Trend {
        self.shape.trend
    }

    pub fn check(&self, indicator: &str) -> Result<()> {
        let bad = |reason: &str| Error::ValueFunction {
            indicator: indicator.to_string(),
            reason: reason.to_string(),
        };
        if !(self.x_min.is_finite() && self.x_max.is_finite()) {
            return Err(bad("non-finite range"));
        }
        if !(self.x_min < self.x_max) {
            return Err(bad("degenerate range (x_min must be below x_max)"));
        }
        if !(self.f > 0.0 && self.c > 0.0 && self.k > 0.0) {
            return Err(bad("F, C and K must be positive"));
        }
        Ok(())
    }

    /// Best and worst raw scores.
    pub fn best_end(&self) -> f64 {
        match self.trend() {
            Trend::Increasing => self.x_max,
            Trend::Decreasing => self.x_min,
        }
    }

    pub fn worst_end(&self) -> f64 {
        match self.trend() {
            Trend::Increasing => self.x_min,
            Trend::Decreasing => self.x_max,
        }
    }
}

fn unscaled(spec: &ValueFunctionSpec, d: f64) -> f64 {
    // d^F at d = 0 is taken as 0 for every F > 0.
    let ratio = if d == 0.0 { 0.0 } else { (d / spec.c).powf(spec.f) };
    -(-spec.k * ratio).exp_m1()
}

/// The normalization factor `B`, always ≥ 1.
pub fn normalization_factor(spec: &ValueFunctionSpec) -> Result<f64> {
    if !(spec.x_max > spec.x_min) {
        return Err(Error::ValueFunction {
            indicator: String::new(),
            reason: "degenerate range (x_max = x_min)".into(),
        });
    }
    let full = unscaled(spec, (spec.x_max - spec.x_min).abs());
    if !(full > 0.0) {
        return Err(Error::ValueFunction {
            indicator: String::new(),
            reason: "normalization underflow".into(),
        });
    }
    Ok(1.0 / full)
}

/// Value of score `x`, in `[0, 1]`.
pub fn evaluate(spec: &ValueFunctionSpec, x: f64) -> Result<f64> {
    evaluate_named(spec, x, "")
}

/// Same as [`evaluate`] with the indicator id carried into errors.
pub fn evaluate_named(spec: &ValueFunctionSpec, x: f64, indicator: &str) -> Result<f64> {
    if !(x >= spec.x_min && x <= spec.x_max) {
        return Err(Error::OutOfDomain {
            indicator: indicator.to_string(),
            x,
            x_min: spec.x_min,
            x_max: spec.x_max,
        });
    }
    let b = normalization_factor(spec).map_err(|e| match e {
        Error::ValueFunction { reason, .. } => Error::ValueFunction {
            indicator: indicator.to_string(),
            reason,
        },
        other => other,
    })?;
    let d = match spec.trend() {
        Trend::Increasing => (x - spec.x_min).abs(),
        Trend::Decreasing => (x - spec.x_max).abs(),
    };
    if d == 0.0 {
        return Ok(0.0);
    }
    if d == spec.x_max - spec.x_min {
        return Ok(1.0);
    }
    Ok((b * unscaled(spec, d)).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Value table

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorEntry {
    pub indicator: String,
    pub spec: ValueFunctionSpec,
    /// Raw scores in scenario order.
    pub scores: Vec<f64>,
}

/// Value-function parameters and per-scenario raw scores for each indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorValueTable {
    pub scenarios: Vec<String>,
    pub entries: Vec<IndicatorEntry>,
}

impl IndicatorValueTable {
    pub fn get(&self, indicator: &str) -> Option<&IndicatorEntry> {
        self.entries.iter().find(|e| e.indicator == indicator)
    }

    pub fn scenario_index(&self, scenario: &str) -> Option<usize> {
        self.scenarios.iter().position(|s| s == scenario)
    }

    /// Evaluated value of `indicator` for each scenario.
    pub fn values(&self, indicator: &str) -> Result<Vec<f64>> {
        let entry = self
            .get(indicator)
            .ok_or_else(|| Error::MissingIndicator(indicator.to_string()))?;
        entry
            .scores
            .iter()
            .map(|&x| evaluate_named(&entry.spec, x, indicator))
            .collect()
    }
}

const FIXED_COLUMNS: [&str; 7] = ["indicator", "x_min", "x_max", "F", "C", "K", "shape"];

fn number(field: &str, column: &str, indicator: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::Parse(format!(
            "indicator `{indicator}`: column `{column}` is not a number: `{field}`"
        ))
    })
}

/// Reads a value table from CSV with header
/// `indicator,x_min,x_max,F,C,K,shape,<scenario>...`.
pub fn load_value_table(csv_text: &str) -> Result<IndicatorValueTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    for (i, expected) in FIXED_COLUMNS.iter().enumerate() {
        match headers.get(i) {
            Some(h) if h.eq_ignore_ascii_case(expected) => {}
            other => {
                return Err(Error::Parse(format!(
                    "value table column {} must be `{expected}`, found `{}`",
                    i + 1,
                    other.unwrap_or("")
                )))
            }
        }
    }
    let scenarios: Vec<String> = headers.iter().skip(FIXED_COLUMNS.len()).map(String::from).collect();
    if scenarios.is_empty() {
        return Err(Error::Parse("value table has no scenario columns".into()));
    }

    let mut entries: Vec<IndicatorEntry> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let id = record.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::Parse("value table row without indicator id".into()));
        }
        if entries.iter().any(|e| e.indicator == id) {
            return Err(Error::DuplicateId(id));
        }
        let field = |i: usize| record.get(i).unwrap_or("");
        let spec = ValueFunctionSpec {
            x_min: number(field(1), "x_min", &id)?,
            x_max: number(field(2), "x_max", &id)?,
            f: number(field(3), "F", &id)?,
            c: number(field(4), "C", &id)?,
            k: number(field(5), "K", &id)?,
            shape: field(6).parse()?,
        };
        spec.check(&id)?;
        let mut scores = Vec::with_capacity(scenarios.len());
        for (s, name) in scenarios.iter().enumerate() {
            let raw = record.get(FIXED_COLUMNS.len() + s).unwrap_or("");
            if raw.is_empty() {
                return Err(Error::MissingScenario {
                    indicator: id.clone(),
                    scenario: name.clone(),
                });
            }
            let x = number(raw, name, &id)?;
            if !(x >= spec.x_min && x <= spec.x_max) {
                return Err(Error::OutOfDomain {
                    indicator: id.clone(),
                    x,
                    x_min: spec.x_min,
                    x_max: spec.x_max,
                });
            }
            scores.push(x);
        }
        entries.push(IndicatorEntry {
            indicator: id,
            spec,
            scores,
        });
    }
    Ok(IndicatorValueTable { scenarios, entries })
}

pub fn load_value_table_file(path: impl AsRef<Path>) -> Result<IndicatorValueTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_value_table(&text)
}
