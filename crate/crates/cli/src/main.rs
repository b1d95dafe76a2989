use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ukrnp_cli::commands::{self, CorpusInputs};
use ukrnp_cli::{server, STORAGE_ENV};
use ukrnp_core::{AnnotationStore, MatchMode, PipelineConfig, Variant};

#[derive(Parser)]
#[command(
    name = "ukrnp",
    version,
    about = "Ukrainian noun phrase extraction from UD trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract noun phrases and write prediction records.
    Extract(ExtractArgs),
    /// Score the UD+NER, UD and baseline variants against gold spans.
    Evaluate(EvaluateArgs),
    /// Run the annotation HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CoNLL-U corpus.
    #[arg(long)]
    conllu: PathBuf,
    /// Directory of gazetteer lists, one `<category>.txt` per category.
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// Tab-separated entity spans from an external recognizer.
    #[arg(long)]
    ner: Option<PathBuf>,
    /// Minimum confidence of external entity spans.
    #[arg(long, default_value_t = 0.8)]
    threshold: f64,
    /// Keep groups nested inside larger groups.
    #[arg(long)]
    emit_nested: bool,
    /// Keep punctuation at group boundaries.
    #[arg(long)]
    no_trim_punct: bool,
    /// Do not merge entity spans into groups.
    #[arg(long)]
    no_merge: bool,
}

impl InputArgs {
    fn inputs(&self) -> CorpusInputs {
        CorpusInputs {
            conllu: self.conllu.clone(),
            gazetteer: self.gazetteer.clone(),
            ner: self.ner.clone(),
        }
    }

    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        cfg.ner.confidence_threshold = commands::check_threshold(self.threshold)?;
        cfg.ner.merge_enabled = !self.no_merge;
        cfg.extraction.emit_nested = self.emit_nested;
        cfg.extraction.trim_boundary_punct = !self.no_trim_punct;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output file for prediction records.
    #[arg(long)]
    out: PathBuf,
    /// ud+ner, ud or baseline; defaults to ud+ner when entity inputs are given.
    #[arg(long)]
    variant: Option<Variant>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Gold spans (a prediction file is accepted too).
    #[arg(long)]
    gold: PathBuf,
    /// Report only one match mode: full or partial.
    #[arg(long)]
    mode: Option<MatchMode>,
    /// Also write the metrics as JSON lines.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    /// Storage directory for documents and clusters.
    #[arg(long, env = STORAGE_ENV, default_value = "annotations")]
    storage: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(args) => {
            let cfg = args.input.config()?;
            let summary =
                commands::run_extract(&args.input.inputs(), args.variant, &cfg, &args.out)?;
            println!(
                "variant {}: {} documents, {} sentences, {} groups -> {}",
                summary.variant,
                summary.documents,
                summary.sentences,
                summary.groups,
                args.out.display()
            );
        }
        Command::Evaluate(args) => {
            let cfg = args.input.config()?;
            let table = commands::run_evaluate(&args.input.inputs(), &args.gold, &cfg)?;
            let modes = commands::modes_for(args.mode);
            print!("{}", table.render_text(&modes));
            if let Some(path) = &args.json {
                std::fs::write(path, table.to_json_lines(&modes))
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
        }
        Command::Serve(args) => {
            let store = AnnotationStore::open(&args.storage)
                .with_context(|| format!("cannot open storage {}", args.storage.display()))?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(server::serve(store, args.addr))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
