use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use affect_cli::commands::{cmd_evaluate, cmd_predict, cmd_train};
use affect_cli::manifest::{load_manifest, EmbeddingDecl, LexiconDecl};
use affect_core::task::{Dimension, TaskSpec};

/// Tweet affect estimation: stacked ensembles over lexicon and embedding
/// featurizers, with the competition's evaluation metrics.
#[derive(Parser)]
#[command(name = "affect", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a stacked ensemble from a run manifest.
    Train(TrainArgs),
    /// Predict a dataset with a trained ensemble.
    Predict(PredictArgs),
    /// Score a prediction file against gold labels.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Run manifest (TOML).
    #[arg(long)]
    manifest: PathBuf,
    /// Emoji description map (TSV), overriding the manifest.
    #[arg(long)]
    emoji_map: Option<PathBuf>,
    /// Extra lexicon, as NAME=KIND:PATH (repeatable).
    #[arg(long = "lexicon")]
    lexicons: Vec<String>,
    /// Extra embedding table path (repeatable).
    #[arg(long = "embeddings")]
    embeddings: Vec<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained ensemble bundle.
    #[arg(long)]
    model: PathBuf,
    /// Dataset to predict (TSV).
    #[arg(long)]
    data: PathBuf,
    /// Output prediction file.
    #[arg(long)]
    out: PathBuf,
    /// Run manifest declaring the featurizer resources.
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Prediction file to score.
    #[arg(long)]
    pred: PathBuf,
    /// Gold dataset (TSV).
    #[arg(long)]
    data: PathBuf,
    /// Task: ei-reg, ei-oc, v-reg, or v-oc.
    #[arg(long)]
    task: String,
    /// Affect dimension for EI tasks (anger, fear, joy, sadness).
    #[arg(long)]
    dimension: Option<String>,
    /// Where to write the report; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero if any applicable metric is undefined.
    #[arg(long)]
    strict: bool,
}

fn parse_lexicon_flag(raw: &str) -> Result<LexiconDecl> {
    let (name, rest) =
        raw.split_once('=').with_context(|| format!("--lexicon '{raw}' is not NAME=KIND:PATH"))?;
    let (kind, path) =
        rest.split_once(':').with_context(|| format!("--lexicon '{raw}' is not NAME=KIND:PATH"))?;
    Ok(LexiconDecl { name: name.to_string(), kind: kind.to_string(), path: PathBuf::from(path) })
}

fn parse_task(task: &str, dimension: Option<&str>) -> Result<TaskSpec> {
    let spec = match task.to_ascii_lowercase().as_str() {
        "v-reg" => TaskSpec::v_reg(),
        "v-oc" => TaskSpec::v_oc(),
        "ei-reg" | "ei-oc" => {
            let dim = dimension
                .with_context(|| format!("task '{task}' needs --dimension"))
                .and_then(|d| Ok(Dimension::parse(d)?))?;
            if dim == Dimension::Valence {
                bail!("EI tasks take an emotion dimension, not valence");
            }
            if task.eq_ignore_ascii_case("ei-reg") {
                TaskSpec::ei_reg(dim)
            } else {
                TaskSpec::ei_oc(dim)
            }
        }
        other => bail!("unknown task '{other}' (expected ei-reg, ei-oc, v-reg, v-oc)"),
    };
    Ok(spec)
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(args) => {
            let (mut manifest, base) = load_manifest(&args.manifest)?;
            if let Some(map) = args.emoji_map {
                manifest.preprocess.emoji_map = Some(map);
            }
            for raw in &args.lexicons {
                manifest.featurizers.lexicons.push(parse_lexicon_flag(raw)?);
            }
            for path in args.embeddings {
                manifest.featurizers.embeddings.push(EmbeddingDecl { path, dim: None });
            }
            let outcome = cmd_train(&manifest, &base)?;
            println!(
                "trained {} members ({} featurizers) -> {}",
                outcome.ensemble.members.len(),
                outcome.ensemble.members.len() / 2,
                outcome.ensemble_path.display()
            );
            println!("cv report -> {}", outcome.report_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict(args) => {
            let (manifest, base) = load_manifest(&args.manifest)?;
            let predictions = cmd_predict(&args.model, &args.data, &args.out, &manifest, &base)?;
            println!("wrote {} predictions -> {}", predictions.len(), args.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate(args) => {
            let task = parse_task(&args.task, args.dimension.as_deref())?;
            let report = cmd_evaluate(&args.pred, &args.data, &task, args.out.as_deref())?;
            print!("{}", report.to_text());
            if args.strict && !report.all_defined() {
                eprintln!("strict mode: at least one metric is undefined");
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
