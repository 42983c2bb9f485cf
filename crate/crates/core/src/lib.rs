//! Probabilistic multi-criteria scoring of design scenarios.
//!
//! Scenarios are scored against a requirement → criterion → indicator tree.
//! Criteria weights come from AHP (or a precomputed table), indicator weights
//! from a Latin Hypercube ensemble, and raw indicator scores pass through
//! MIVES value functions. Each ensemble row yields one index value per
//! scenario; the ensemble yields ranking probabilities and distributions.

pub mod ahp;
pub mod data;
pub mod error;
pub mod hierarchy;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod simulation;
pub mod stats;
pub mod value_fn;

pub use error::{Error, Result};
pub use hierarchy::{DecisionTree, Paradigm};
pub use sampler::{ConstraintMode, SamplerConfig, WeightMatrix};
pub use simulation::{Level, SimulationResult};
pub use stats::Statistics;
