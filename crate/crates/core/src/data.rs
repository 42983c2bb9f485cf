//! Bundled reference inputs for the three-panel case study.

use crate::ahp::{load_weight_table, WeightTable};
use crate::hierarchy::{load_tree, DecisionTree, Paradigm};
use crate::value_fn::{load_value_table, IndicatorValueTable};

pub const SUSTAINABILITY_TREE: &str = include_str!("../data/sustainability.json");
pub const CIRCULARITY_TREE: &str = include_str!("../data/circularity.json");
pub const VALUES: &str = include_str!("../data/values.csv");
pub const SUSTAINABILITY_WEIGHTS: &str = include_str!("../data/ahp_sustainability.json");
pub const CIRCULARITY_WEIGHTS: &str = include_str!("../data/ahp_circularity.json");
/// Published results for the case study, used for side-by-side comparison.
pub const REFERENCE: &str = include_str!("../data/reference.json");

pub fn sustainability_tree() -> DecisionTree {
    load_tree(SUSTAINABILITY_TREE, Paradigm::Sustainability).expect("bundled sustainability tree")
}

pub fn circularity_tree() -> DecisionTree {
    load_tree(CIRCULARITY_TREE, Paradigm::Circularity).expect("bundled circularity tree")
}

pub fn tree(paradigm: Paradigm) -> DecisionTree {
    match paradigm {
        Paradigm::Sustainability => sustainability_tree(),
        Paradigm::Circularity => circularity_tree(),
    }
}

pub fn value_table() -> IndicatorValueTable {
    load_value_table(VALUES).expect("bundled value table")
}

pub fn sustainability_weight_table() -> WeightTable {
    load_weight_table(SUSTAINABILITY_WEIGHTS).expect("bundled sustainability weights")
}

pub fn circularity_weight_table() -> WeightTable {
    load_weight_table(CIRCULARITY_WEIGHTS).expect("bundled circularity weights")
}

pub fn reference() -> serde_json::Value {
    serde_json::from_str(REFERENCE).expect("bundled reference")
}
