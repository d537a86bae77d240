//! `wbidf`: keyword detection with IDF-filtered, engagement-weighted LDA.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;

use wbidf_lda::pipeline::{
    ingest_stats, run_comparison, run_pipeline, run_topic_sweep, PipelineConfig, PipelineError, Stage,
};
use wbidf_lda::Error;

#[derive(Parser)]
#[command(name = "wbidf", version, about, propagate_version = true)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print post, token, vocabulary and engagement counts of an input file.
    IngestStats {
        #[command(flatten)]
        opts: ConfigArgs,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Fit one model and write its model file, topic table and report.
    Run {
        #[command(flatten)]
        opts: ConfigArgs,
    },
    /// Fit LDA, IDF-LDA and WBIDF-LDA on the same posts and compare their
    /// keyword scores. Requires --labels.
    Compare {
        #[command(flatten)]
        opts: ConfigArgs,
    },
    /// Fit one model per topic count and write a topic table for each.
    Sweep {
        #[command(flatten)]
        opts: ConfigArgs,
        /// Topic counts, comma separated.
        #[arg(long = "k-values", value_delimiter = ',', required = true, num_args = 1..)]
        k_values: Vec<usize>,
    },
}

/// Configuration sources. Values from flags override the config file.
#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Input posts (.jsonl or .csv).
    #[arg(short, long, value_name = "FILE")]
    input: Option<String>,
    /// Input format: jsonl, csv or auto (from the extension).
    #[arg(long)]
    format: Option<String>,
    /// pretokenized or whitespace.
    #[arg(long)]
    tokenization: Option<String>,
    /// Lower IDF bound: a number, -inf or default.
    #[arg(long, allow_hyphen_values = true)]
    idf_min: Option<String>,
    /// Upper IDF bound: a number, inf or default.
    #[arg(long, allow_hyphen_values = true)]
    idf_max: Option<String>,
    /// Number of most popular posts to keep.
    #[arg(long)]
    top_k_posts: Option<String>,
    /// Engagement weighting: true or false.
    #[arg(long, value_name = "BOOL")]
    weighting_enabled: Option<String>,
    /// Number of topics.
    #[arg(short)]
    k: Option<String>,
    /// Document-topic prior (default 50/k).
    #[arg(long)]
    alpha: Option<String>,
    /// Topic-word prior.
    #[arg(long)]
    beta: Option<String>,
    /// Gibbs sweeps.
    #[arg(long)]
    iterations: Option<String>,
    /// Sweeps discarded before estimation.
    #[arg(long)]
    burn_in: Option<String>,
    /// Sampler seed.
    #[arg(long)]
    seed: Option<String>,
    /// Keywords taken from each topic.
    #[arg(long)]
    n_per_topic: Option<String>,
    /// Topics contributing keywords: all or top-M.
    #[arg(long)]
    score_topics: Option<String>,
    /// Labeled keywords (JSONL).
    #[arg(short, long, value_name = "FILE")]
    labels: Option<String>,
    /// Directory for run artifacts.
    #[arg(short, long, value_name = "DIR")]
    output_dir: Option<String>,
    /// Any config key, as KEY=VALUE. Applied after the named flags.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig, Error> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_kv_file(path)?,
            None => PipelineConfig::default(),
        };
        let flags = [
            ("input", &self.input),
            ("format", &self.format),
            ("tokenization", &self.tokenization),
            ("idf_min", &self.idf_min),
            ("idf_max", &self.idf_max),
            ("top_k_posts", &self.top_k_posts),
            ("weighting_enabled", &self.weighting_enabled),
            ("k", &self.k),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("iterations", &self.iterations),
            ("burn_in", &self.burn_in),
            ("seed", &self.seed),
            ("n_per_topic", &self.n_per_topic),
            ("score_topics", &self.score_topics),
            ("labels", &self.labels),
            ("output_dir", &self.output_dir),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            config.set(key, value)?;
        }
        if config.input.as_os_str().is_empty() {
            return Err(Error::Config(
                "no input file given (--input or `input` in the config file)".into(),
            ));
        }
        Ok(config)
    }
}

fn execute(command: Command) -> Result<(), PipelineError> {
    let config_error = |e| PipelineError::new(Stage::Config, e);
    match command {
        Command::IngestStats { opts, json } => {
            let config = opts.resolve().map_err(config_error)?;
            let stats = ingest_stats(&config)?;
            if json {
                let text = stats.to_json().map_err(|e| PipelineError::new(Stage::Write, e))?;
                println!("{text}");
            } else {
                println!("posts:            {}", stats.n_posts);
                println!("empty posts:      {}", stats.n_empty_posts);
                println!("tokens:           {}", stats.n_tokens);
                println!("vocabulary:       {}", stats.vocab_size);
                match stats.vocab_after_idf_filter {
                    Some(n) => println!("after IDF filter: {n} (idf in [{}, {}])", stats.idf_min, stats.idf_max),
                    None => println!(
                        "after IDF filter: none left (idf in [{}, {}])",
                        stats.idf_min, stats.idf_max
                    ),
                }
                println!("total popularity: {}", stats.total_popularity);
                println!("max popularity:   {}", stats.max_popularity);
            }
        }
        Command::Run { opts } => {
            let config = opts.resolve().map_err(config_error)?;
            let outcome = run_pipeline(&config)?;
            print!("{}", outcome.topics.to_text());
            if let Some(report) = &outcome.report {
                println!();
                print!("{}", report.to_text());
            }
            log::info!("wrote {}", config.output_dir.display());
        }
        Command::Compare { opts } => {
            let config = opts.resolve().map_err(config_error)?;
            let (_, table) = run_comparison(&config)?;
            print!("{}", table.to_text());
            log::info!("wrote {}", config.output_dir.display());
        }
        Command::Sweep { opts, k_values } => {
            let config = opts.resolve().map_err(config_error)?;
            let outcomes = run_topic_sweep(&config, &k_values)?;
            for (i, outcome) in outcomes.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{}", outcome.topics.to_text());
            }
            log::info!("wrote {}", config.output_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return if usage_error {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => LevelFilter::Error,
        (false, 0) => LevelFilter::Warn,
        (false, 1) => LevelFilter::Info,
        (false, _) => LevelFilter::Debug,
    };
    // Builder::new does not consult environment variables.
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .init();

    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
