mod commands;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sqlscope::{Dialect, FailurePolicy};

#[derive(Parser)]
#[command(name = "sqlscope", version, about = "SQL structural complexity, query similarity and text-to-SQL generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// CREATE TABLE script used for name resolution
    #[arg(long, value_name = "PATH")]
    ddl: Option<PathBuf>,
    /// Write outputs into this directory instead of standard output
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Treat per-query parse failures as skips
    #[arg(long)]
    lenient: bool,
    #[arg(long, default_value = "postgres")]
    dialect: Dialect,
}

#[derive(Subcommand)]
enum Command {
    /// Feature vector of each query as JSON
    Analyze {
        /// .sql files or directories of .sql files
        inputs: Vec<PathBuf>,
        /// CSV with columns query_id,path
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        /// Keep repeated items in bag features
        #[arg(long)]
        multiset: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Per-feature Jaccard similarity of generated against gold queries
    Compare {
        generated: Option<PathBuf>,
        gold: Option<PathBuf>,
        /// CSV with columns query_id,generated_path,gold_path
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        #[arg(long)]
        multiset: bool,
        /// How unparsed generations enter the means: exclude or include-as-zero
        #[arg(long, default_value = "exclude")]
        policy: FailurePolicy,
        /// Model name recorded in the summary
        #[arg(long, default_value = "model")]
        model: String,
        #[command(flatten)]
        common: Common,
    },
    /// Complexity histograms and means per corpus
    CorpusStats {
        /// One corpus per directory or .sql file; a directory's schema.sql is its DDL
        inputs: Vec<PathBuf>,
        /// CSV with columns query_id,path and optionally corpus
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        /// Comma-separated metric names
        #[arg(long, value_name = "LIST")]
        metrics: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Corpus means normalized by a baseline corpus
    Radar {
        inputs: Vec<PathBuf>,
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        #[arg(long, value_name = "LIST")]
        metrics: Option<String>,
        /// Corpus whose means become 1.0
        #[arg(long, value_name = "NAME")]
        baseline: String,
        /// Standard-output format when --out is not given: csv or json
        #[arg(long, default_value = "csv")]
        format: String,
        #[command(flatten)]
        common: Common,
    },
    /// Generate SQL with an LLM, validating and repairing each answer
    Generate {
        /// CSV with columns query_id,question
        #[arg(long, value_name = "PATH")]
        manifest: PathBuf,
        /// TOML harness configuration
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Repair attempts after the first answer; overrides the config file
        #[arg(long, value_name = "N")]
        max_retries: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Check statements against the configured engine
    Validate {
        inputs: Vec<PathBuf>,
        /// CSV with columns query_id,path
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Analyze { inputs, manifest, multiset, common } => {
            commands::analyze(&inputs, manifest.as_deref(), multiset, &common)
        }
        Command::Compare { generated, gold, manifest, multiset, policy, model, common } => commands::compare(
            generated.as_deref(),
            gold.as_deref(),
            manifest.as_deref(),
            multiset,
            policy,
            &model,
            &common,
        ),
        Command::CorpusStats { inputs, manifest, metrics, common } => {
            commands::corpus_stats(&inputs, manifest.as_deref(), metrics.as_deref(), &common)
        }
        Command::Radar { inputs, manifest, metrics, baseline, format, common } => {
            commands::radar(&inputs, manifest.as_deref(), metrics.as_deref(), &baseline, &format, &common)
        }
        Command::Generate { manifest, config, max_retries, common } => {
            commands::generate(&manifest, config.as_deref(), max_retries, &common)
        }
        Command::Validate { inputs, manifest, config, common } => {
            commands::validate(&inputs, manifest.as_deref(), config.as_deref(), &common)
        }
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
