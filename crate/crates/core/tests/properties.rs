use proptest::prelude::*;

use mivesmc_core::ahp::{consistency_ratio, pairwise_from_ratings, principal_weights};
use mivesmc_core::data;
use mivesmc_core::hierarchy::{load_tree_auto, DecisionTree, RequirementWeightSource};
use mivesmc_core::rng::substream;
use mivesmc_core::sampler::{build_weight_matrix, lhs_samples, sample_criterion_weights};
use mivesmc_core::simulation::{
    run_simulation, ConfigEcho, Level, RunResult, ScenarioRun, SimulationResult,
};
use mivesmc_core::stats::{
    empirical_distribution, rank_positions, rank_probabilities, DEFAULT_TIE_EPSILON,
};
use mivesmc_core::value_fn::{evaluate, load_value_table, Shape, ValueFunctionSpec};
use mivesmc_core::{ConstraintMode, Paradigm, SamplerConfig};

fn config(n_runs: usize, seed: u64, mode: ConstraintMode) -> SamplerConfig {
    SamplerConfig {
        n_runs,
        seed,
        min_weight: 0.1,
        constraint_mode: mode,
    }
}

/// A tree document with the given indicator counts per criterion, one
/// criterion list per requirement, and equal weights everywhere.
fn tree_json(shape: &[Vec<usize>]) -> String {
    let mut ind = 0;
    let mut crit = 0;
    let reqs: Vec<serde_json::Value> = shape
        .iter()
        .enumerate()
        .map(|(r, crits)| {
            let cs: Vec<serde_json::Value> = crits
                .iter()
                .map(|&m| {
                    crit += 1;
                    let inds: Vec<serde_json::Value> = (0..m)
                        .map(|_| {
                            ind += 1;
                            serde_json::json!({"id": format!("I{ind}"), "name": format!("indicator {ind}")})
                        })
                        .collect();
                    serde_json::json!({
                        "id": format!("C{crit}"),
                        "name": format!("criterion {crit}"),
                        "ahp_weight": 1.0 / crits.len() as f64,
                        "indicators": inds,
                    })
                })
                .collect();
            serde_json::json!({"id": format!("B{}", r + 1), "name": format!("group {}", r + 1), "criteria": cs})
        })
        .collect();
    serde_json::json!({"paradigm": "sustainability", "requirements": reqs}).to_string()
}

fn tree_shape() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(1usize..=5, 1..=4), 1..=4)
}

fn synthetic_result(runs: Vec<Vec<f64>>) -> SimulationResult {
    let n_s = runs[0].len();
    SimulationResult {
        paradigm: Paradigm::Sustainability,
        config: ConfigEcho {
            seed: 0,
            n_runs: runs.len(),
            constraint_mode: ConstraintMode::Literal,
            min_weight: 0.1,
            stakeholder_profile: "General".into(),
            requirement_weights: vec![],
            requirement_weight_source: RequirementWeightSource::EqualDefault,
        },
        scenarios: (1..=n_s).map(|s| format!("S{s}")).collect(),
        requirements: vec![],
        criteria: vec![],
        runs: runs
            .into_iter()
            .enumerate()
            .map(|(run_index, vals)| RunResult {
                run_index,
                scenarios: vals
                    .into_iter()
                    .map(|overall| ScenarioRun {
                        overall,
                        requirements: vec![],
                        criteria: vec![],
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    for (rank, i) in idx.into_iter().enumerate() {
        out[i] = rank as f64;
    }
    out
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - mean) * (y - mean)).sum();
    let var: f64 = ra.iter().map(|x| (x - mean).powi(2)).sum();
    cov / var
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_document_round_trips(shape in tree_shape()) {
        let tree = load_tree_auto(&tree_json(&shape)).unwrap();
        let again = load_tree_auto(&tree.to_json()).unwrap();
        prop_assert_eq!(&tree, &again);
        prop_assert_eq!(tree.criterion_count(), shape.iter().map(Vec::len).sum::<usize>());
    }

    #[test]
    fn block_rows_sum_to_one(shape in tree_shape(), seed in any::<u64>(), reject in any::<bool>()) {
        let tree = load_tree_auto(&tree_json(&shape)).unwrap();
        let mode = if reject { ConstraintMode::RejectResample } else { ConstraintMode::Literal };
        let w = build_weight_matrix(&tree, &config(50, seed, mode)).unwrap();
        for r in 0..w.n_runs {
            for (b, block) in w.blocks.iter().enumerate() {
                let row = w.block_row(r, b);
                let sum: f64 = row.iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-9, "block {} row {} sums {}", b, r, sum);
                if block.m == 1 {
                    prop_assert_eq!(row[0], 1.0);
                }
                if reject {
                    prop_assert!(row.iter().all(|&x| x >= 0.1));
                }
            }
        }
    }

    #[test]
    fn lhs_puts_one_draw_in_each_stratum(n in 1usize..400, seed in any::<u64>(), low in 0.0f64..0.2, span in 0.1f64..1.0) {
        let high = low + span;
        let xs = lhs_samples(n, low, high, &mut substream(seed, &["t"])).unwrap();
        let mut counts = vec![0usize; n];
        for &x in &xs {
            prop_assert!(x >= low && x < high);
            let k = (((x - low) / (high - low)) * n as f64).floor() as usize;
            counts[k.min(n - 1)] += 1;
        }
        prop_assert!(counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn sampling_is_reproducible(shape in tree_shape(), seed in any::<u64>()) {
        let tree = load_tree_auto(&tree_json(&shape)).unwrap();
        let cfg = config(30, seed, ConstraintMode::RejectResample);
        let a = build_weight_matrix(&tree, &cfg).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = single.install(|| build_weight_matrix(&tree, &cfg).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ratio_matrices_are_consistent(r in prop::collection::vec(0.5f64..10.0, 1..=10)) {
        let m = pairwise_from_ratings(&r).unwrap();
        prop_assert!(consistency_ratio(&m).unwrap().abs() <= 1e-8);
        let w = principal_weights(&m).unwrap();
        let total: f64 = r.iter().sum();
        for (wi, ri) in w.iter().zip(&r) {
            prop_assert!((wi - ri / total).abs() <= 1e-8);
        }
    }

    #[test]
    fn ahp_weights_ignore_rating_scale(r in prop::collection::vec(0.5f64..10.0, 2..=8), e in -4i32..4, c in 0.1f64..10.0) {
        let base = principal_weights(&pairwise_from_ratings(&r).unwrap()).unwrap();
        // Power-of-two scaling leaves every ratio bit-identical.
        let pow2: Vec<f64> = r.iter().map(|x| x * 2f64.powi(e)).collect();
        prop_assert_eq!(&base, &principal_weights(&pairwise_from_ratings(&pow2).unwrap()).unwrap());
        let scaled: Vec<f64> = r.iter().map(|x| x * c).collect();
        let other = principal_weights(&pairwise_from_ratings(&scaled).unwrap()).unwrap();
        for (a, b) in base.iter().zip(&other) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn ahp_weights_follow_permutations(r in prop::collection::vec(0.5f64..10.0, 2..=8), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..r.len()).collect();
        perm.shuffle(&mut substream(seed, &["perm"]));
        let permuted: Vec<f64> = perm.iter().map(|&i| r[i]).collect();
        let base = principal_weights(&pairwise_from_ratings(&r).unwrap()).unwrap();
        let w = principal_weights(&pairwise_from_ratings(&permuted).unwrap()).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!((w[k] - base[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn value_functions_are_bounded_and_monotone(
        x_min in -50.0f64..50.0,
        span in 1.0f64..100.0,
        f in 0.2f64..5.0,
        c_frac in 0.05f64..1.5,
        k in 0.01f64..5.0,
        increasing in any::<bool>(),
    ) {
        let x_max = x_min + span;
        let shape: Shape = if increasing { "I-S" } else { "D-S" }.parse().unwrap();
        let spec = ValueFunctionSpec { x_min, x_max, f, c: c_frac * span, k, shape };
        prop_assert_eq!(evaluate(&spec, spec.best_end()).unwrap(), 1.0);
        prop_assert_eq!(evaluate(&spec, spec.worst_end()).unwrap(), 0.0);
        let grid: Vec<f64> = (0..=100)
            .map(|i| (x_min + span * i as f64 / 100.0).min(x_max))
            .map(|x| evaluate(&spec, x).unwrap())
            .collect();
        for pair in grid.windows(2) {
            prop_assert!((0.0..=1.0).contains(&pair[0]));
            if increasing {
                prop_assert!(pair[1] >= pair[0]);
            } else {
                prop_assert!(pair[1] <= pair[0]);
            }
        }
    }

    #[test]
    fn rank_tables_are_doubly_stochastic(
        runs in prop::collection::vec(prop::collection::vec(prop::sample::select(vec![0.1, 0.2, 0.3, 0.35]), 3), 1..60)
    ) {
        let n = runs.len() as f64;
        let result = synthetic_result(runs);
        let table = rank_probabilities(&result, Level::Overall).unwrap();
        let p = &table.nodes[0].probabilities;
        for s in 0..3 {
            let row: f64 = p[s].iter().sum();
            let col: f64 = (0..3).map(|t| p[t][s]).sum();
            prop_assert!((row - 1.0).abs() <= 1e-12 && (col - 1.0).abs() <= 1e-12);
            for q in &p[s] {
                prop_assert!((q * n - (q * n).round()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn ranks_survive_monotone_transforms(grid in prop::collection::vec(0u32..100, 1..8)) {
        let xs: Vec<f64> = grid.iter().map(|&g| g as f64 / 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x + x).collect();
        let zs: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let base = rank_positions(&xs, DEFAULT_TIE_EPSILON);
        prop_assert_eq!(&base, &rank_positions(&ys, DEFAULT_TIE_EPSILON));
        prop_assert_eq!(&base, &rank_positions(&zs, DEFAULT_TIE_EPSILON));
    }

    #[test]
    fn cdfs_rise_to_one(xs in prop::collection::vec(-1.0f64..1.0, 1..300), bins in 1usize..40) {
        let d = empirical_distribution(&xs, bins).unwrap();
        prop_assert_eq!(d.total(), xs.len());
        prop_assert_eq!(*d.cdf.last().unwrap(), 1.0);
        for pair in d.cdf.windows(2) {
            prop_assert!(pair[1] >= pair[0]);
        }
        for pair in d.edges.windows(2) {
            prop_assert!(pair[1] >= pair[0]);
        }
    }

    #[test]
    fn dominant_scenario_always_ranks_first(
        shape in tree_shape(),
        seed in any::<u64>(),
        base in prop::collection::vec(0u8..=8, 30),
        bump in prop::collection::vec(0u8..=2, 30),
    ) {
        let tree = load_tree_auto(&tree_json(&shape)).unwrap();
        let mut csv = String::from("indicator,x_min,x_max,F,C,K,shape,S1,S2\n");
        for (i, ind) in tree.indicators().enumerate() {
            let worse = base[i % base.len()];
            // At least one strictly better score keeps the overall lead strict.
            let better = worse + bump[i % bump.len()].max(u8::from(i == 0));
            csv.push_str(&format!("{},0,10,1.5,5,1,I-S,{better},{worse}\n", ind.id));
        }
        let values = load_value_table(&csv).unwrap();
        let w = build_weight_matrix(&tree, &config(40, seed, ConstraintMode::Literal)).unwrap();
        let result = run_simulation(&tree, &values, &w).unwrap();
        let table = rank_probabilities(&result, Level::Overall).unwrap();
        prop_assert_eq!(table.nodes[0].first(), vec![1.0, 0.0]);
        for level in [Level::Requirement, Level::Criterion] {
            let t = rank_probabilities(&result, level).unwrap();
            for node in &t.nodes {
                prop_assert_eq!(node.first()[0], 1.0);
            }
        }
    }
}

#[test]
fn raw_columns_are_rank_uncorrelated() {
    let tree = data::sustainability_tree();
    let mut worst: f64 = 0.0;
    for seed in 1..=5 {
        let w = build_weight_matrix(&tree, &config(1000, seed, ConstraintMode::Literal)).unwrap();
        for b in 0..w.blocks.len() {
            let cols = w.raw_columns(b);
            for i in 0..cols.len() {
                for j in i + 1..cols.len() {
                    worst = worst.max(spearman(&cols[i], &cols[j]).abs());
                }
            }
        }
    }
    assert!(worst < 0.1, "largest |rho| {worst}");
}

#[test]
fn different_seeds_give_different_weights() {
    let a = sample_criterion_weights("C1", &["C11", "C12"], &config(20, 1, ConstraintMode::Literal)).unwrap();
    let b = sample_criterion_weights("C1", &["C11", "C12"], &config(20, 2, ConstraintMode::Literal)).unwrap();
    assert_ne!(a.weights, b.weights);
}

#[test]
fn reject_mode_respects_minimum_on_bundled_tree() {
    let tree: DecisionTree = data::circularity_tree();
    let w = build_weight_matrix(&tree, &config(1000, 9, ConstraintMode::RejectResample)).unwrap();
    for r in 0..w.n_runs {
        assert!(w.row(r).iter().all(|&x| x >= 0.1));
    }
}
