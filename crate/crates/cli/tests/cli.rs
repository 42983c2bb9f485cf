use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mivesmc"));
    cmd.env_remove("MIVESMC_SEED");
    cmd
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, name: &str, tree: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let tree = data(tree);
    let values = data("values.csv");
    let mut args = vec!["simulate", "--tree", s(&tree), "--values", s(&values), "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const CRITERIA: [&str; 12] = [
    "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10", "C11", "C12",
];

fn ratings_csv(groups: &[&str], per_group: usize, skip: Option<&str>, rating: impl Fn(usize, usize) -> u8) -> String {
    let cols: Vec<&str> = CRITERIA.iter().copied().filter(|c| Some(*c) != skip).collect();
    let mut out = format!("respondent,group,{}\n", cols.join(","));
    let mut n = 0;
    for g in groups {
        for _ in 0..per_group {
            n += 1;
            let vals: Vec<String> = (0..cols.len()).map(|k| rating(n, k).to_string()).collect();
            out.push_str(&format!("R{n},{g},{}\n", vals.join(",")));
        }
    }
    out
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", "--tree", s(&data("sustainability.json"))]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("valid"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(data("sustainability.json"))
        .unwrap()
        .replace("0.3474", "0.5474");
    std::fs::write(&bad, text).unwrap();
    let o = run(&["validate", "--tree", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("B1"), "{}", stdout(&o));

    let o = run(&["validate", "--tree", "/definitely/not/here.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["simulate", "--tree", "x.json"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn ahp_uniform_ratings_give_uniform_weights() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("r.csv");
    std::fs::write(&ratings, ratings_csv(&["Architect"], 3, None, |_, _| 7)).unwrap();
    let json = dir.path().join("w.json");
    let o = run(&[
        "ahp", "--ratings", s(&ratings), "--tree", s(&data("sustainability.json")),
        "--group", "General", "--out", s(&json),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tables = read_json(&json);
    for g in tables[0]["groups"].as_array().unwrap() {
        let w = g["weights"].as_array().unwrap();
        let expected = 1.0 / w.len() as f64;
        for x in w {
            assert!((x.as_f64().unwrap() - expected).abs() < 1e-12);
        }
        assert!(g["consistency_ratio"].as_f64().unwrap().abs() < 1e-8);
    }
}

#[test]
fn ahp_reports_each_group_plus_general() {
    let dir = tempfile::tempdir().unwrap();
    let groups = ["Architect", "Engineer", "Manufacturer", "Contractor", "Researcher", "Client"];
    let ratings = dir.path().join("r.csv");
    std::fs::write(&ratings, ratings_csv(&groups, 4, None, |n, k| ((n * 3 + k * 5) % 10 + 1) as u8)).unwrap();
    let json = dir.path().join("w.json");
    let o = run(&[
        "ahp", "--ratings", s(&ratings), "--tree", s(&data("sustainability.json")), "--out", s(&json),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let profiles: Vec<String> = read_json(&json)
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["profile"].as_str().unwrap().to_string())
        .collect();
    let mut expected: Vec<String> = groups.iter().map(|g| g.to_string()).collect();
    expected.push("General".into());
    assert_eq!(profiles, expected);

    let o = run(&[
        "ahp", "--ratings", s(&ratings), "--tree", s(&data("sustainability.json")), "--group", "Plumber",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Architect") && stderr(&o).contains("General"), "{}", stderr(&o));
}

#[test]
fn ahp_names_missing_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = dir.path().join("r.csv");
    std::fs::write(&ratings, ratings_csv(&["Client"], 2, Some("C5"), |_, _| 5)).unwrap();
    let o = run(&["ahp", "--ratings", s(&ratings), "--tree", s(&data("sustainability.json"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("C5"), "{}", stderr(&o));
}

#[test]
fn simulate_defaults_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), "sus.json", "sustainability.json", &[]);
    let results = read_json(&out);
    assert_eq!(results["schema"], "mivesmc-results/1");
    assert_eq!(results["result"]["runs"].as_array().unwrap().len(), 1000);
    assert_eq!(results["result"]["scenarios"].as_array().unwrap().len(), 3);
    assert_eq!(results["result"]["config"]["seed"], 42);

    let manifest = read_json(&dir.path().join("sus.manifest.json"));
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["paradigms"][0], "sustainability");
    for entry in manifest["inputs"].as_array().unwrap().iter().chain(manifest["outputs"].as_array().unwrap()) {
        let bytes = std::fs::read(entry["path"].as_str().unwrap()).unwrap();
        assert_eq!(entry["sha256"], hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn simulate_is_deterministic_and_honors_seed_env() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "a.json", "circularity.json", &["--runs", "200", "--seed", "5"]);
    let b = simulate(dir.path(), "b.json", "circularity.json", &["--runs", "200", "--seed", "5"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let c = dir.path().join("c.json");
    let o = bin()
        .env("MIVESMC_SEED", "5")
        .args([
            "simulate", "--tree", s(&data("circularity.json")), "--values", s(&data("values.csv")),
            "--runs", "200", "--out", s(&c),
        ])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());

    let d = simulate(dir.path(), "d.json", "circularity.json", &["--runs", "200", "--seed", "6"]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&d).unwrap());
}

#[test]
fn simulate_options() {
    let dir = tempfile::tempdir().unwrap();
    let one = simulate(dir.path(), "one.json", "sustainability.json", &["--runs", "1"]);
    assert_eq!(read_json(&one)["result"]["runs"].as_array().unwrap().len(), 1);

    let weights = dir.path().join("w.csv");
    let r = simulate(
        dir.path(),
        "rw.json",
        "sustainability.json",
        &["--runs", "20", "--mode", "reject", "--req-weights", "0.4,0.2,0.2,0.2", "--dump-weights", s(&weights)],
    );
    let cfg = &read_json(&r)["result"]["config"];
    assert_eq!(cfg["constraint_mode"], "reject-resample");
    assert_eq!(cfg["requirement_weight_source"], "override");
    assert_eq!(cfg["requirement_weights"][0], 0.4);
    let csv = std::fs::read_to_string(&weights).unwrap();
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.starts_with("run,C11,C12,C13,C14,"));

    let t = simulate(
        dir.path(),
        "t.json",
        "sustainability.json",
        &["--runs", "20", "--weights", s(&data("ahp_sustainability.json")), "--profile", "Client"],
    );
    assert_eq!(read_json(&t)["result"]["config"]["stakeholder_profile"], "Client");

    let o = run(&[
        "simulate", "--tree", s(&data("sustainability.json")), "--values", s(&data("values.csv")),
        "--req-weights", "0.5,0.5", "--out", s(&dir.path().join("x.json")),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("requirement weights"), "{}", stderr(&o));
}

#[test]
fn report_single_and_dual() {
    let dir = tempfile::tempdir().unwrap();
    let sus = simulate(dir.path(), "sus.json", "sustainability.json", &["--runs", "200"]);
    let circ = simulate(dir.path(), "circ.json", "circularity.json", &["--runs", "200"]);

    let single = dir.path().join("single");
    let o = run(&["report", "--results", s(&sus), "--charts", s(&single)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(single.join("sustainability_heatmap_criterion.svg").exists());
    assert!(!single.join("comparison_overall.svg").exists());

    let dual = dir.path().join("dual");
    let o = run(&["report", "--results", s(&sus), s(&circ), "--charts", s(&dual)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["sustainability_heatmap_criterion.svg", "circularity_heatmap_criterion.svg", "comparison_overall.svg"] {
        assert!(dual.join(f).exists(), "missing {f}");
    }
    let summary = read_json(&dual.join("summary.json"));
    let widths: Vec<usize> = summary["paradigms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["rank_criterion"]["nodes"].as_array().unwrap().len())
        .collect();
    assert_eq!(widths, [12, 11]);

    let manifest = read_json(&dual.join("manifest.json"));
    let listed: Vec<PathBuf> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| PathBuf::from(e["path"].as_str().unwrap()))
        .collect();
    for entry in std::fs::read_dir(&dual).unwrap() {
        let p = entry.unwrap().path();
        if p.file_name().unwrap() != "manifest.json" {
            assert!(listed.contains(&p), "{} not in manifest", p.display());
        }
    }
    for e in manifest["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(e["path"].as_str().unwrap()).unwrap();
        assert_eq!(e["sha256"], hex::encode(Sha256::digest(&bytes)));
    }

    // Same inputs, same summary bytes.
    let again = dir.path().join("again");
    assert_eq!(code(&run(&["report", "--results", s(&sus), s(&circ), "--charts", s(&again)])), 0);
    assert_eq!(
        std::fs::read(dual.join("summary.json")).unwrap(),
        std::fs::read(again.join("summary.json")).unwrap()
    );
}

#[test]
fn report_rejects_bad_results() {
    let dir = tempfile::tempdir().unwrap();
    let corrupt = dir.path().join("corrupt.json");
    std::fs::write(&corrupt, "{\"schema\": \"mivesmc-results/1\",\n \"result\": [1, 2").unwrap();
    let o = run(&["report", "--results", s(&corrupt), "--charts", s(&dir.path().join("c"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let other = dir.path().join("other.json");
    std::fs::write(&other, "{\"schema\": \"something-else/2\"}").unwrap();
    let o = run(&["report", "--results", s(&other), "--charts", s(&dir.path().join("c"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("schema"), "{}", stderr(&o));

    let o = run(&["report", "--results", s(&dir.path().join("none.json")), "--charts", s(&dir.path().join("c"))]);
    assert_eq!(code(&o), 2);
}
