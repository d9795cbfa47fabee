//! Command-line entry point.
//!
//! Subcommands: `gen-target` (synthesize a CFG), `run` (one campaign plus
//! metric CSVs), `compare` (several strategies under one seed), and `reduce`
//! (offline corpus distillation). Identical invocations produce identical
//! output trees; every random decision flows from `--seed`.
//!
//! Exit codes: 0 ok, 1 usage, 2 i/o, 3 infeasible cover. Logging is
//! controlled by the `RANDSET_LOG` environment variable (error|info|debug).

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cfg::{generate_random_cfg, parse_cfg, serialize_cfg, Cfg};
use crate::corpus::{Corpus, FeatureMode};
use crate::metrics::CampaignStats;
use crate::rng::{DetRng, Purpose};
use crate::scheduler::{
    run_campaign, CampaignConfig, CampaignError, Strategy, DEFAULT_MUTANTS_PER_ROUND,
};
use crate::setcover::{exact_min_cover, greedy_cover, randomized_cover, CoverError};
use crate::target::{execute, DEFAULT_MAX_STEPS};

#[derive(Parser, Debug)]
#[command(name = "randset", version, about = "Corpus-reduction seed-scheduling laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic CFG target file
    GenTarget {
        /// Number of nodes
        #[arg(long)]
        nodes: usize,
        /// Maximum children per node
        #[arg(long, default_value_t = 3)]
        max_children: usize,
        /// Probability of adding a loop-back edge per node
        #[arg(long, default_value_t = 0.1)]
        loop_back: f64,
        /// Generator seed
        #[arg(long)]
        seed: u64,
        /// Output CFG file
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scheduling campaign and write metric CSVs
    Run(RunArgs),
    /// Run several strategies under the same seed and write a summary table
    Compare(CompareArgs),
    /// Reduce a seed corpus offline and write the distilled files
    Reduce(ReduceArgs),
}

#[derive(clap::Args, Debug)]
pub struct RunArgs {
    /// CFG target file
    #[arg(long)]
    pub cfg: PathBuf,
    /// Directory of initial seed files
    #[arg(long)]
    pub seeds: PathBuf,
    #[arg(long, value_enum, default_value_t = StrategyArg::Randset)]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = FeatureArg::Frontier)]
    pub features: FeatureArg,
    #[arg(long, default_value_t = 200)]
    pub rounds: usize,
    /// Mutants generated per round
    #[arg(long, default_value_t = DEFAULT_MUTANTS_PER_ROUND)]
    pub mutants: usize,
    /// Campaign seed
    #[arg(long)]
    pub seed: u64,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub cfg: PathBuf,
    #[arg(long)]
    pub seeds: PathBuf,
    /// Comma-separated strategy list
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub strategies: Vec<StrategyArg>,
    #[arg(long, value_enum, default_value_t = FeatureArg::Frontier)]
    pub features: FeatureArg,
    #[arg(long, default_value_t = 200)]
    pub rounds: usize,
    #[arg(long, default_value_t = DEFAULT_MUTANTS_PER_ROUND)]
    pub mutants: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct ReduceArgs {
    #[arg(long)]
    pub cfg: PathBuf,
    #[arg(long)]
    pub seeds: PathBuf,
    #[arg(long, value_enum, default_value_t = FeatureArg::Frontier)]
    pub features: FeatureArg,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Randomized)]
    pub algorithm: AlgorithmArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    Randset,
    Greedy,
    Cullqueue,
    Wrandom,
}

impl From<StrategyArg> for Strategy {
    fn from(arg: StrategyArg) -> Strategy {
        match arg {
            StrategyArg::Randset => Strategy::RandSet,
            StrategyArg::Greedy => Strategy::GreedySubset,
            StrategyArg::Cullqueue => Strategy::CullQueue,
            StrategyArg::Wrandom => Strategy::WeightedRandom,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureArg {
    Frontier,
    Edge,
}

impl From<FeatureArg> for FeatureMode {
    fn from(arg: FeatureArg) -> FeatureMode {
        match arg {
            FeatureArg::Frontier => FeatureMode::Frontier,
            FeatureArg::Edge => FeatureMode::Edge,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmArg {
    Randomized,
    Greedy,
    Exact,
}

impl AlgorithmArg {
    fn name(self) -> &'static str {
        match self {
            AlgorithmArg::Randomized => "randomized",
            AlgorithmArg::Greedy => "greedy",
            AlgorithmArg::Exact => "exact",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("infeasible cover: {0} feature(s) cannot be covered by the corpus", .residual_features)]
    Infeasible { residual_features: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Infeasible { .. } => 3,
        }
    }

    fn io(context: &str, err: impl std::fmt::Display) -> CliError {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl From<CoverError> for CliError {
    fn from(err: CoverError) -> CliError {
        match err {
            CoverError::Infeasible { residual } => CliError::Infeasible {
                residual_features: residual.count_ones(),
            },
            CoverError::TooManySets { count, limit } => CliError::Usage(format!(
                "exact reduction supports at most {limit} seeds, got {count}"
            )),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<CampaignError> for CliError {
    fn from(err: CampaignError) -> CliError {
        match err {
            CampaignError::InvalidConfig(msg) => CliError::Usage(msg.to_string()),
            CampaignError::EmptyCorpus => {
                CliError::Io("seed directory produced an empty corpus".to_string())
            }
            CampaignError::Cover(cover) => cover.into(),
        }
    }
}

/// Manifest echoed next to every output tree; replaying the same manifest
/// reproduces the run.
#[derive(Serialize, Debug)]
struct RunManifest {
    artifact_version: &'static str,
    command: &'static str,
    cfg: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategies: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    algorithm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mutants: Option<usize>,
    max_steps: usize,
    rng_seed: u64,
}

impl RunManifest {
    fn new(command: &'static str, cfg: &Path, rng_seed: u64) -> Self {
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION"),
            command,
            cfg: cfg.display().to_string(),
            seeds: None,
            strategy: None,
            strategies: None,
            features: None,
            algorithm: None,
            rounds: None,
            mutants: None,
            max_steps: DEFAULT_MAX_STEPS,
            rng_seed,
        }
    }
}

/// Parses arguments from the process environment and runs the command,
/// returning the process exit code.
pub fn main_entry() -> i32 {
    let _ = env_logger::Builder::from_env(
        env_logger::Env::default().filter_or("RANDSET_LOG", "error"),
    )
    .try_init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };

    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenTarget {
            nodes,
            max_children,
            loop_back,
            seed,
            out,
        } => cmd_gen_target(nodes, max_children, loop_back, seed, &out),
        Command::Run(args) => cmd_run(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Reduce(args) => cmd_reduce(&args),
    }
}

fn cmd_gen_target(
    nodes: usize,
    max_children: usize,
    loop_back: f64,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    if nodes == 0 {
        return Err(CliError::Usage("--nodes must be at least 1".to_string()));
    }
    if !(1..=256).contains(&max_children) {
        return Err(CliError::Usage(
            "--max-children must be in 1..=256".to_string(),
        ));
    }
    if !(0.0..=1.0).contains(&loop_back) {
        return Err(CliError::Usage(
            "--loop-back must be a probability in [0, 1]".to_string(),
        ));
    }
    let cfg = generate_random_cfg(nodes, max_children, loop_back, seed);
    fs::write(out, serialize_cfg(&cfg))
        .map_err(|e| CliError::io(&format!("writing {}", out.display()), e))?;
    log::info!(
        "generated cfg with {} nodes and {} edges at {}",
        cfg.node_count(),
        cfg.edge_count(),
        out.display()
    );
    Ok(())
}

fn load_cfg(path: &Path) -> Result<Arc<Cfg>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
    let cfg =
        parse_cfg(&text).map_err(|e| CliError::io(&format!("parsing {}", path.display()), e))?;
    Ok(Arc::new(cfg))
}

/// Reads every regular file in the directory as a seed, in file-name order.
fn load_seed_files(dir: &Path) -> Result<Vec<Vec<u8>>, CliError> {
    let mut paths: Vec<PathBuf> = Vec::new();
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::io(&format!("reading seed directory {}", dir.display()), e))?;
    for entry in entries {
        let entry =
            entry.map_err(|e| CliError::io(&format!("reading {}", dir.display()), e))?;
        if entry.path().is_file() {
            paths.push(entry.path());
        }
    }
    paths.sort();
    let mut seeds = Vec::with_capacity(paths.len());
    for path in paths {
        let bytes =
            fs::read(&path).map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
        seeds.push(bytes);
    }
    Ok(seeds)
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(manifest).expect("manifest serialization cannot fail");
    text.push('\n');
    write_output(dir, "manifest.json", &text)
}

fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io(&format!("creating {}", dir.display()), e))
}

fn campaign_stats(
    cfg: Arc<Cfg>,
    seeds: Vec<Vec<u8>>,
    strategy: Strategy,
    features: FeatureMode,
    rounds: usize,
    mutants: usize,
    rng_seed: u64,
) -> Result<CampaignStats, CliError> {
    let config = CampaignConfig {
        cfg,
        initial_seeds: seeds,
        strategy,
        feature_mode: features,
        rounds,
        mutants_per_round: mutants,
        max_steps: DEFAULT_MAX_STEPS,
        rng_seed,
    };
    Ok(run_campaign(&config)?)
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.cfg)?;
    let seeds = load_seed_files(&args.seeds)?;
    let stats = campaign_stats(
        cfg,
        seeds,
        args.strategy.into(),
        args.features.into(),
        args.rounds,
        args.mutants,
        args.seed,
    )?;

    prepare_out_dir(&args.out)?;
    write_output(&args.out, "rounds.csv", &stats.rounds_csv())?;
    write_output(&args.out, "cdf.csv", &stats.cdf_csv())?;
    write_output(&args.out, "summary.csv", &stats.summary_csv())?;

    let mut manifest = RunManifest::new("run", &args.cfg, args.seed);
    manifest.seeds = Some(args.seeds.display().to_string());
    manifest.strategy = Some(Strategy::from(args.strategy).name().to_string());
    manifest.features = Some(FeatureMode::from(args.features).name().to_string());
    manifest.rounds = Some(args.rounds);
    manifest.mutants = Some(args.mutants);
    write_manifest(&args.out, &manifest)?;

    println!(
        "run complete: strategy={} features={} rounds={} final_edges={} subset_ratio={:.2}% unique_seeds={}",
        stats.strategy.name(),
        stats.feature_mode.name(),
        stats.rounds.len(),
        stats.final_edges.count_ones(),
        stats.subset_ratio(),
        stats.unique_seeds()
    );
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.cfg)?;
    let seeds = load_seed_files(&args.seeds)?;

    let mut summary =
        String::from("strategy,feature_mode,final_edges,subset_ratio_pct,unique_seeds,overhead_pct\n");
    for strategy in &args.strategies {
        // Each campaign draws from the same per-purpose streams, so
        // strategies cannot perturb one another.
        let stats = campaign_stats(
            cfg.clone(),
            seeds.clone(),
            (*strategy).into(),
            args.features.into(),
            args.rounds,
            args.mutants,
            args.seed,
        )?;
        summary.push_str(&stats.summary_row());
    }

    prepare_out_dir(&args.out)?;
    write_output(&args.out, "summary.csv", &summary)?;

    let mut manifest = RunManifest::new("compare", &args.cfg, args.seed);
    manifest.seeds = Some(args.seeds.display().to_string());
    manifest.strategies = Some(
        args.strategies
            .iter()
            .map(|s| Strategy::from(*s).name().to_string())
            .collect(),
    );
    manifest.features = Some(FeatureMode::from(args.features).name().to_string());
    manifest.rounds = Some(args.rounds);
    manifest.mutants = Some(args.mutants);
    write_manifest(&args.out, &manifest)?;

    print!("{summary}");
    Ok(())
}

fn cmd_reduce(args: &ReduceArgs) -> Result<(), CliError> {
    let cfg = load_cfg(&args.cfg)?;
    let seeds = load_seed_files(&args.seeds)?;
    if seeds.is_empty() {
        return Err(CliError::Io(
            "seed directory produced an empty corpus".to_string(),
        ));
    }

    let mut corpus = Corpus::new(cfg.clone());
    for bytes in &seeds {
        let trace = execute(&cfg, bytes, DEFAULT_MAX_STEPS);
        corpus.insert_seed(bytes, &trace, 0);
    }

    let mode: FeatureMode = args.features.into();
    let instance = corpus.cover_instance(mode);
    let result = match args.algorithm {
        AlgorithmArg::Randomized => {
            let mut rng = DetRng::for_purpose(args.seed, Purpose::Shuffle);
            randomized_cover(&instance, &mut rng)?
        }
        AlgorithmArg::Greedy => greedy_cover(&instance)?,
        AlgorithmArg::Exact => exact_min_cover(&instance)?,
    };

    let mut chosen = result.chosen;
    chosen.sort();

    prepare_out_dir(&args.out)?;
    for (k, id) in chosen.iter().enumerate() {
        let path = args.out.join(format!("id_{k}.bin"));
        fs::write(&path, &corpus.get(*id).bytes)
            .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))?;
    }

    let mut manifest = RunManifest::new("reduce", &args.cfg, args.seed);
    manifest.seeds = Some(args.seeds.display().to_string());
    manifest.features = Some(mode.name().to_string());
    manifest.algorithm = Some(args.algorithm.name().to_string());
    write_manifest(&args.out, &manifest)?;

    println!(
        "subset ratio: {}/{} = {:.2}%",
        chosen.len(),
        corpus.len(),
        100.0 * chosen.len() as f64 / corpus.len() as f64
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmap::FeatureBitmap;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Io("x".into()).exit_code(), 2);
        assert_eq!(CliError::Infeasible { residual_features: 2 }.exit_code(), 3);
    }

    #[test]
    fn cover_errors_map_to_exit_classes() {
        let infeasible = CoverError::Infeasible {
            residual: FeatureBitmap::from_indices(4, &[1, 2]),
        };
        assert_eq!(CliError::from(infeasible).exit_code(), 3);
        let too_many = CoverError::TooManySets { count: 30, limit: 20 };
        assert_eq!(CliError::from(too_many).exit_code(), 1);
    }

    #[test]
    fn campaign_errors_map_to_exit_classes() {
        assert_eq!(
            CliError::from(CampaignError::InvalidConfig("rounds")).exit_code(),
            1
        );
        assert_eq!(CliError::from(CampaignError::EmptyCorpus).exit_code(), 2);
    }
}
