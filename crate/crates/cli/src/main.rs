use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bioclust::evaluation::{ClusterMethod, MappingMethod};
use bioclust::ingest::Modality;
use bioclust::synthgen::ProtocolConfig;

use bioclust_cli::commands::{
    self, cmd_cluster, cmd_evaluate, cmd_features, cmd_pca, cmd_pipeline, cmd_sweep,
    parse_sweep_range, resolve_seed, PipelineConfig,
};
use bioclust_cli::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "bioclust", about = "Biosignal quality screening pipeline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled session (one CSV per modality)
    Synth {
        /// Protocol JSON; defaults to the 15-minute session
        #[arg(long)]
        synth_config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Extract windowed feature vectors to CSV
    Features {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, default_value_t = 1000.0)]
        fs: f64,
        #[arg(long, default_value = "ecg")]
        modality: Modality,
        #[arg(long, default_value_t = 120.0)]
        window_s: f64,
        #[arg(long, default_value_t = 30.0)]
        stride_s: f64,
        #[arg(long, default_value = "features.csv")]
        out: PathBuf,
    },
    /// Fit a clustering model on a feature CSV
    Cluster {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value = "kmeans")]
        method: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        no_standardize: bool,
        #[arg(long, default_value = "model.json")]
        out: PathBuf,
    },
    /// Silhouette sweep over a k range
    Sweep {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value = "2:10")]
        k_sweep: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "silhouette.csv")]
        out: PathBuf,
    },
    /// 2-D PCA of a feature CSV (scores + model)
    Pca {
        #[arg(long)]
        features: PathBuf,
        /// Optional K-means model JSON for the cluster column
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = "pca_scores.csv")]
        out_scores: PathBuf,
        #[arg(long, default_value = "pca_model.json")]
        out_model: PathBuf,
    },
    /// Evaluate a fitted model against a feature CSV's labels
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "majority")]
        mapping: String,
        #[arg(long)]
        no_standardize: bool,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
    /// Full pipeline: ingest/synth -> windows -> features -> cluster ->
    /// PCA -> reports and plots
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Pipeline config JSON; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Protocol JSON enabling the synthetic source
    #[arg(long)]
    synth_config: Option<PathBuf>,
    #[arg(long)]
    modality: Option<Modality>,
    #[arg(long)]
    fs: Option<f64>,
    #[arg(long)]
    window_s: Option<f64>,
    #[arg(long)]
    stride_s: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    k_sweep: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    mapping: Option<String>,
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf, stage: &str) -> CliResult<T> {
    let bytes = std::fs::read(path).map_err(|e| CliError::config(stage, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::config(stage, e))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth { synth_config, seed, out } => {
            let mut config: ProtocolConfig = match &synth_config {
                Some(path) => read_json(path, "synth-config")?,
                None => ProtocolConfig::default(),
            };
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let written = commands::cmd_synth(&config, &out)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Features { input, fs, modality, window_s, stride_s, out } => {
            let n = cmd_features(&input, fs, modality, window_s, stride_s, &out)?;
            println!("wrote {} ({n} windows)", out.display());
            Ok(())
        }
        Command::Cluster { features, k, method, seed, no_standardize, out } => {
            let method: ClusterMethod = method
                .parse()
                .map_err(|e: bioclust::Error| CliError::config("config", e))?;
            cmd_cluster(&features, k, method, resolve_seed(seed), !no_standardize, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Sweep { features, k_sweep, seed, out } => {
            cmd_sweep(&features, parse_sweep_range(&k_sweep)?, resolve_seed(seed), &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Pca { features, model, out_scores, out_model } => {
            cmd_pca(&features, model.as_deref(), &out_scores, &out_model)?;
            println!("wrote {} and {}", out_scores.display(), out_model.display());
            Ok(())
        }
        Command::Evaluate { features, model, mapping, no_standardize, out } => {
            let mapping: MappingMethod = mapping
                .parse()
                .map_err(|e: bioclust::Error| CliError::config("config", e))?;
            cmd_evaluate(&features, &model, mapping, !no_standardize, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Pipeline(args) => {
            let mut config: PipelineConfig = match &args.config {
                Some(path) => read_json(path, "config")?,
                None => PipelineConfig::default(),
            };
            if !args.input.is_empty() {
                config.input = args.input;
            }
            if let Some(path) = &args.synth_config {
                config.synth = Some(read_json(path, "synth-config")?);
            }
            if let Some(v) = args.modality {
                config.modality = v;
            }
            if let Some(v) = args.fs {
                config.fs = v;
            }
            if let Some(v) = args.window_s {
                config.window_s = v;
            }
            if let Some(v) = args.stride_s {
                config.stride_s = v;
            }
            if let Some(v) = args.k {
                config.k = v;
            }
            if let Some(v) = &args.k_sweep {
                config.k_sweep = Some(parse_sweep_range(v)?);
            }
            if let Some(v) = &args.method {
                config.method = v
                    .parse()
                    .map_err(|e: bioclust::Error| CliError::config("config", e))?;
            }
            if let Some(v) = &args.mapping {
                config.mapping = v
                    .parse()
                    .map_err(|e: bioclust::Error| CliError::config("config", e))?;
            }
            if args.no_standardize {
                config.standardize = false;
            }
            if args.seed.is_some() || std::env::var("BIOCLUST_SEED").is_ok() {
                config.seed = resolve_seed(args.seed);
            }
            if let Some(v) = args.out {
                config.out = v;
            }
            let output = cmd_pipeline(&config)?;
            for path in &output.written {
                println!("wrote {}", path.display());
            }
            println!(
                "binary accuracy {:.4}, multi-class accuracy {:.4}{}",
                output.report.binary.accuracy,
                output.report.multi_class.accuracy,
                output
                    .report
                    .metadata
                    .best_k
                    .map(|k| format!(", silhouette best k = {k}"))
                    .unwrap_or_default()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
