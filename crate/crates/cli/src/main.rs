//! `mivesmc`: validate trees, derive AHP weights, run simulations, emit reports.
//!
//! Exit codes: 0 success, 1 domain violation (bad data, invalid tree, failed
//! parse), 2 I/O or usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mivesmc_core::ahp::{self, GENERAL};
use mivesmc_core::hierarchy::{self, apply_criterion_weights, validate_tree};
use mivesmc_core::report::{self, ReportBundle};
use mivesmc_core::sampler::{build_weight_matrix, DEFAULT_MIN_WEIGHT, DEFAULT_RUNS};
use mivesmc_core::simulation::{run_simulation, SimulationResult};
use mivesmc_core::stats::{compute_statistics, Statistics, DEFAULT_BINS};
use mivesmc_core::value_fn::load_value_table_file;
use mivesmc_core::{ConstraintMode, SamplerConfig};

const RESULTS_SCHEMA: &str = "mivesmc-results/1";
const MANIFEST_SCHEMA: &str = "mivesmc-manifest/1";
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "mivesmc", version, about = "Probabilistic MIVES/AHP scenario ranking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a decision tree and list every violation.
    Validate {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Derive criteria weights from stakeholder ratings.
    Ahp {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        /// One respondent group, or "General" to pool everyone. Default: every
        /// group followed by General.
        #[arg(long)]
        group: Option<String>,
        /// Also write the tables as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample indicator weights and aggregate every run.
    Simulate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        values: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, env = "MIVESMC_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// `literal` or `reject` (reject-resample).
        #[arg(long, default_value = "literal")]
        mode: ConstraintMode,
        #[arg(long, default_value_t = DEFAULT_MIN_WEIGHT)]
        min_weight: f64,
        /// Comma-separated requirement weights, in tree order.
        #[arg(long, value_delimiter = ',')]
        req_weights: Option<Vec<f64>>,
        /// Precomputed criteria weight table (JSON); needs --profile.
        #[arg(long, requires = "profile", conflicts_with = "ratings")]
        weights: Option<PathBuf>,
        #[arg(long)]
        profile: Option<String>,
        /// Ratings CSV to derive criteria weights from.
        #[arg(long)]
        ratings: Option<PathBuf>,
        /// Respondent group used with --ratings.
        #[arg(long, default_value = GENERAL)]
        group: String,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
        /// Manifest path. Default: `<out stem>.manifest.json` next to --out.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Write the sampled weight matrix as CSV.
        #[arg(long)]
        dump_weights: Option<PathBuf>,
    },
    /// Render charts, tables and the summary from one or two results files.
    Report {
        #[arg(long, required = true, num_args = 1..=2)]
        results: Vec<PathBuf>,
        #[arg(long)]
        charts: PathBuf,
    },
}

#[derive(Serialize, Deserialize)]
struct ResultsFile {
    schema: String,
    result: SimulationResult,
    statistics: Statistics,
}

#[derive(Debug, Serialize, Deserialize)]
struct FileDigest {
    path: PathBuf,
    sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    schema: String,
    command: Vec<String>,
    seed: Option<u64>,
    paradigms: Vec<String>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

/// Usage and I/O failures exit 2; everything else is a domain violation.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<mivesmc_core::Error>() {
            return if e.is_io() { 2 } else { 1 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}

/// The error chain joined by ": ", skipping causes already spelled out by
/// the message above them.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Validate { tree } => cmd_validate(&tree),
        Command::Ahp {
            ratings,
            tree,
            group,
            out,
        } => cmd_ahp(&ratings, &tree, group.as_deref(), out.as_deref()).map(|()| 0),
        Command::Simulate {
            tree,
            values,
            runs,
            seed,
            mode,
            min_weight,
            req_weights,
            weights,
            profile,
            ratings,
            group,
            bins,
            out,
            manifest,
            dump_weights,
        } => {
            let config = SamplerConfig {
                n_runs: runs,
                seed,
                min_weight,
                constraint_mode: mode,
            };
            let weights_source = match (weights, ratings) {
                (Some(table), _) => WeightsSource::Table {
                    path: table,
                    profile: profile.expect("clap requires --profile with --weights"),
                },
                (None, Some(path)) => WeightsSource::Ratings { path, group },
                (None, None) => WeightsSource::Tree,
            };
            cmd_simulate(SimulateArgs {
                tree,
                values,
                config,
                req_weights,
                weights_source,
                bins,
                out,
                manifest,
                dump_weights,
            })
            .map(|()| 0)
        }
        Command::Report { results, charts } => cmd_report(&results, &charts).map(|()| 0),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path)
        .map_err(|e| mivesmc_core::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
        .map_err(Into::into)
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| mivesmc_core::Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| mivesmc_core::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn digest_file(path: &Path) -> anyhow::Result<FileDigest> {
    let bytes = fs::read(path).map_err(|e| mivesmc_core::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn cmd_validate(path: &Path) -> anyhow::Result<u8> {
    let text = read(path)?;
    let tree = hierarchy::parse_tree_unchecked(&text)
        .with_context(|| format!("{}", path.display()))?;
    let report = validate_tree(&tree);
    print!("{report}");
    Ok(if report.is_valid() { 0 } else { 1 })
}

fn cmd_ahp(
    ratings: &Path,
    tree: &Path,
    group: Option<&str>,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let tree = hierarchy::load_tree_auto(&read(tree)?)
        .with_context(|| format!("{}", tree.display()))?;
    let table = ahp::load_ratings(&read(ratings)?)
        .with_context(|| format!("{}", ratings.display()))?;
    let groups: Vec<String> = match group {
        Some(g) => vec![g.to_string()],
        None => {
            let mut all = table.groups();
            all.push(GENERAL.to_string());
            all
        }
    };
    let results = groups
        .iter()
        .map(|g| ahp::group_weights(&table, &tree, g))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &results {
        println!("{} ({} respondents)", r.profile, r.respondents);
        for g in &r.groups {
            println!("  {}  CR {:.6}", g.requirement, g.consistency_ratio);
            for ((id, mean), w) in g.criteria.iter().zip(&g.mean_ratings).zip(&g.weights) {
                println!("    {id:<6} mean rating {mean:>7.4}  weight {w:.6}");
            }
        }
    }
    if let Some(out) = out {
        write(out, &(serde_json::to_string_pretty(&results)? + "\n"))?;
    }
    Ok(())
}

enum WeightsSource {
    Tree,
    Table { path: PathBuf, profile: String },
    Ratings { path: PathBuf, group: String },
}

struct SimulateArgs {
    tree: PathBuf,
    values: PathBuf,
    config: SamplerConfig,
    req_weights: Option<Vec<f64>>,
    weights_source: WeightsSource,
    bins: usize,
    out: PathBuf,
    manifest: Option<PathBuf>,
    dump_weights: Option<PathBuf>,
}

fn default_manifest_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}.manifest.json"))
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let mut inputs = vec![args.tree.clone(), args.values.clone()];
    let mut tree = hierarchy::load_tree_auto(&read(&args.tree)?)
        .with_context(|| format!("{}", args.tree.display()))?;
    match &args.weights_source {
        WeightsSource::Tree => {}
        WeightsSource::Table { path, profile } => {
            let table = ahp::load_weight_table(&read(path)?)
                .with_context(|| format!("{}", path.display()))?;
            tree = apply_criterion_weights(&tree, &table.column(profile)?)?;
            inputs.push(path.clone());
        }
        WeightsSource::Ratings { path, group } => {
            let table = ahp::load_ratings(&read(path)?)
                .with_context(|| format!("{}", path.display()))?;
            let derived = ahp::group_weights(&table, &tree, group)?;
            tree = apply_criterion_weights(&tree, &derived.as_criterion_weights())?;
            inputs.push(path.clone());
        }
    }
    if let Some(w) = &args.req_weights {
        tree = tree.with_requirement_weights(w)?;
    }
    tree.require_weights()?;
    let values = load_value_table_file(&args.values)
        .with_context(|| format!("{}", args.values.display()))?;

    let matrix = build_weight_matrix(&tree, &args.config)?;
    let result = run_simulation(&tree, &values, &matrix)?;
    let statistics = compute_statistics(&result, args.bins)?;
    print_overview(&statistics);

    let file = ResultsFile {
        schema: RESULTS_SCHEMA.to_string(),
        result,
        statistics,
    };
    write(&args.out, &(serde_json::to_string(&file)? + "\n"))?;
    let mut outputs = vec![args.out.clone()];
    if let Some(path) = &args.dump_weights {
        write(path, &matrix.to_csv())?;
        outputs.push(path.clone());
    }

    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| default_manifest_path(&args.out));
    write_manifest(
        &manifest_path,
        Some(args.config.seed),
        vec![tree.paradigm.to_string()],
        &inputs,
        &outputs,
    )
}

fn write_manifest(
    path: &Path,
    seed: Option<u64>,
    paradigms: Vec<String>,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
) -> anyhow::Result<()> {
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA.to_string(),
        command: std::env::args().collect(),
        seed,
        paradigms,
        inputs: inputs.iter().map(|p| digest_file(p)).collect::<anyhow::Result<_>>()?,
        outputs: outputs.iter().map(|p| digest_file(p)).collect::<anyhow::Result<_>>()?,
    };
    write(path, &(serde_json::to_string_pretty(&manifest)? + "\n"))
}

fn print_overview(stats: &Statistics) {
    println!(
        "{}: {} runs, seed {}, {} mode, requirement weights {}",
        stats.paradigm,
        stats.config.n_runs,
        stats.config.seed,
        stats.config.constraint_mode,
        report::weight_source_label(stats.config.requirement_weight_source)
    );
    let first = stats.rank_overall.nodes[0].first();
    for (s, summary) in stats.summaries.iter().enumerate() {
        println!(
            "  {:<6} mean {:.4}  95% [{:.4}, {:.4}]  P(first) {:.3}",
            summary.scenario, summary.mean, summary.p2_5, summary.p97_5, first[s]
        );
    }
}

fn load_results(path: &Path) -> anyhow::Result<ResultsFile> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))?;
    match value.get("schema").and_then(|s| s.as_str()) {
        Some(RESULTS_SCHEMA) => {}
        Some(other) => bail!(
            "{}: schema `{other}` is not `{RESULTS_SCHEMA}`",
            path.display()
        ),
        None => bail!("{}: not a results file (no schema tag)", path.display()),
    }
    serde_json::from_value(value).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn cmd_report(results: &[PathBuf], charts: &Path) -> anyhow::Result<()> {
    let files = results
        .iter()
        .map(|p| load_results(p))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let paradigms: Vec<String> = files.iter().map(|f| f.statistics.paradigm.to_string()).collect();
    let bundle = ReportBundle::new(files.into_iter().map(|f| f.statistics).collect())?;
    let outputs = report::emit_report(&bundle, charts)?;
    for p in &outputs {
        println!("{}", p.display());
    }
    write_manifest(&charts.join("manifest.json"), None, paradigms, results, &outputs)
}
