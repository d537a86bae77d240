//! End-to-end runs: ingest → IDF filter → popularity selection → weighting →
//! fit → keyword extraction → scoring, plus the three-variant comparison and
//! topic-count sweeps.
//!
//! Every run directory gets a `manifest.json` echoing the configuration and
//! the corpus statistics of each fit. Outputs contain no timestamps or
//! absolute output paths, so a fixed configuration and seed reproduce every
//! byte.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::corpus::{build_vocabulary, ingest, InputFormat, Post, Tokenization, Vocabulary};
use crate::error::Error;
use crate::eval::{compare_models, detected_keywords, score, ComparisonTable, EvalReport, LabelSet, TopicSelection};
use crate::filter::{
    build_weighted_corpus, compute_idf, default_idf_max, filter_vocabulary, select_top_popular, WeightedCorpus,
    DEFAULT_IDF_MIN,
};
use crate::lda::{fit, top_words, topic_rank, topic_weights, LdaConfig, LdaModel, MODEL_FORMAT_VERSION, RNG_ALGORITHM};
use crate::table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Config,
    Ingest,
    Labels,
    Vocabulary,
    IdfFilter,
    Select,
    Weight,
    Fit,
    Extract,
    Score,
    Write,
}

impl Stage {
    /// Failures caused by bad input files or configuration rather than by
    /// the pipeline itself.
    pub fn is_input_error(self) -> bool {
        matches!(self, Stage::Config | Stage::Ingest | Stage::Labels)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Labels => "labels",
            Stage::Vocabulary => "vocabulary",
            Stage::IdfFilter => "idf-filter",
            Stage::Select => "select",
            Stage::Weight => "weight",
            Stage::Fit => "fit",
            Stage::Extract => "extract",
            Stage::Score => "score",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl PipelineError {
    pub fn new(stage: Stage, source: Error) -> Self {
        PipelineError { stage, source }
    }

    /// 1 for input/configuration errors, 2 for failures inside a stage.
    pub fn exit_code(&self) -> i32 {
        if self.stage.is_input_error() {
            1
        } else {
            2
        }
    }
}

trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> StageExt<T> for crate::error::Result<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::new(stage, e))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|e| PipelineError::new(Stage::Write, Error::io(path, e)))
}

/// Every knob of a run. `None` for the IDF bounds and alpha means "use the
/// default for this corpus / topic count".
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    /// Guessed from the input extension when unset.
    pub format: Option<InputFormat>,
    pub tokenization: Tokenization,
    pub idf_min: Option<f64>,
    pub idf_max: Option<f64>,
    pub top_k_posts: usize,
    pub weighting_enabled: bool,
    pub k: usize,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub n_per_topic: usize,
    pub score_topics: TopicSelection,
    pub labels: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let lda = LdaConfig::default();
        PipelineConfig {
            input: PathBuf::new(),
            format: None,
            tokenization: Tokenization::Whitespace,
            idf_min: None,
            idf_max: None,
            top_k_posts: 4000,
            weighting_enabled: true,
            k: lda.k,
            alpha: None,
            beta: lda.beta,
            iterations: lda.iterations,
            burn_in: lda.burn_in,
            seed: lda.seed,
            n_per_topic: 10,
            score_topics: TopicSelection::All,
            labels: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "input",
    "format",
    "tokenization",
    "idf_min",
    "idf_max",
    "top_k_posts",
    "weighting_enabled",
    "k",
    "alpha",
    "beta",
    "iterations",
    "burn_in",
    "seed",
    "n_per_topic",
    "score_topics",
    "labels",
    "output_dir",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> crate::error::Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> crate::error::Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

/// `default`/`auto` give `None`; `inf`, `-inf` and plain numbers parse as f64.
fn parse_optional_f64(key: &str, value: &str) -> crate::error::Result<Option<f64>> {
    match value.to_ascii_lowercase().as_str() {
        "default" | "auto" => Ok(None),
        _ => {
            let v: f64 = parse_value(key, value)?;
            if v.is_nan() {
                return Err(Error::Config(format!("`{key}` must not be NaN")));
            }
            Ok(Some(v))
        }
    }
}

impl PipelineConfig {
    /// Sets one key from its textual value, as found in a config file or on
    /// the command line.
    pub fn set(&mut self, key: &str, value: &str) -> crate::error::Result<()> {
        let value = value.trim();
        match key.trim() {
            "input" => self.input = PathBuf::from(value),
            "format" => {
                self.format = match value.to_ascii_lowercase().as_str() {
                    "auto" => None,
                    _ => Some(value.parse()?),
                }
            }
            "tokenization" => self.tokenization = value.parse()?,
            "idf_min" => self.idf_min = parse_optional_f64("idf_min", value)?,
            "idf_max" => self.idf_max = parse_optional_f64("idf_max", value)?,
            "top_k_posts" => self.top_k_posts = parse_value("top_k_posts", value)?,
            "weighting_enabled" => self.weighting_enabled = parse_bool("weighting_enabled", value)?,
            "k" => self.k = parse_value("k", value)?,
            "alpha" => self.alpha = parse_optional_f64("alpha", value)?,
            "beta" => self.beta = parse_value("beta", value)?,
            "iterations" => self.iterations = parse_value("iterations", value)?,
            "burn_in" => self.burn_in = parse_value("burn_in", value)?,
            "seed" => self.seed = parse_value("seed", value)?,
            "n_per_topic" => self.n_per_topic = parse_value("n_per_topic", value)?,
            "score_topics" => self.score_topics = value.parse()?,
            "labels" => {
                self.labels = match value {
                    "" | "none" => None,
                    _ => Some(PathBuf::from(value)),
                }
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => {
                return Err(Error::Config(format!(
                    "unknown key `{other}` (known keys: {})",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. `#` starts a comment; blank lines
    /// are ignored.
    pub fn apply_kv_text(&mut self, text: &str) -> crate::error::Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", idx + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(())
    }

    pub fn from_kv_file(path: &Path) -> crate::error::Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = PipelineConfig::default();
        config.apply_kv_text(&text)?;
        Ok(config)
    }

    pub fn input_format(&self) -> InputFormat {
        self.format.unwrap_or_else(|| InputFormat::from_path(&self.input))
    }

    pub fn lda_config(&self, k: usize) -> LdaConfig {
        LdaConfig {
            k,
            alpha: self.alpha.unwrap_or(50.0 / k.max(1) as f64),
            beta: self.beta,
            iterations: self.iterations,
            burn_in: self.burn_in,
            seed: self.seed,
        }
    }

    /// IDF bounds for a corpus of `n_docs` posts.
    pub fn idf_bounds(&self, n_docs: usize) -> (f64, f64) {
        (
            self.idf_min.unwrap_or(DEFAULT_IDF_MIN),
            self.idf_max.unwrap_or_else(|| default_idf_max(n_docs)),
        )
    }

    pub fn validate(&self) -> crate::error::Result<()> {
        if self.top_k_posts == 0 {
            return Err(Error::Config("top_k_posts must be at least 1".into()));
        }
        if self.n_per_topic == 0 {
            return Err(Error::Config("n_per_topic must be at least 1".into()));
        }
        if let (Some(lo), Some(hi)) = (self.idf_min, self.idf_max) {
            if lo >= hi {
                return Err(Error::Config(format!(
                    "idf_min ({lo}) must be smaller than idf_max ({hi})"
                )));
            }
        }
        self.lda_config(self.k).validate()
    }

    /// Variant described by this configuration on its own (`run`).
    pub fn variant(&self) -> Variant {
        let identity = self.idf_min == Some(f64::NEG_INFINITY) && self.idf_max == Some(f64::INFINITY);
        let name = match (self.weighting_enabled, identity) {
            (true, _) => "WBIDF-LDA",
            (false, false) => "IDF-LDA",
            (false, true) => "LDA",
        };
        Variant {
            name: name.to_string(),
            idf_filter: true,
            weighting: self.weighting_enabled,
        }
    }
}

/// Which method components a fit uses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Variant {
    pub name: String,
    pub idf_filter: bool,
    pub weighting: bool,
}

impl Variant {
    /// Baseline LDA, IDF-LDA and WBIDF-LDA, in that order.
    pub fn comparison_set() -> [Variant; 3] {
        [
            Variant {
                name: "LDA(Baseline)".into(),
                idf_filter: false,
                weighting: false,
            },
            Variant {
                name: "IDF-LDA".into(),
                idf_filter: true,
                weighting: false,
            },
            Variant {
                name: "WBIDF-LDA".into(),
                idf_filter: true,
                weighting: true,
            },
        ]
    }

    fn dir_name(&self) -> String {
        self.name
            .to_ascii_lowercase()
            .replace("(baseline)", "")
            .replace(|c: char| !c.is_ascii_alphanumeric(), "-")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    /// Posts read from the input (N for IDF).
    pub n_posts: usize,
    /// Posts kept by the popularity selection.
    pub n_selected: usize,
    /// Selected posts left with at least one in-vocabulary token.
    pub n_docs: usize,
    pub vocab_before: usize,
    pub vocab_after: usize,
    pub total_replicas: u64,
    pub total_tokens: u64,
}

/// Applies the IDF filter (when `idf_bounds` is set), popularity selection
/// and weighting.
pub fn prepare_corpus(
    posts: &[Post],
    vocab: &Vocabulary,
    idf_bounds: Option<(f64, f64)>,
    top_k: usize,
    weighting: bool,
) -> Result<(WeightedCorpus, CorpusStats), PipelineError> {
    let filtered = match idf_bounds {
        Some((lo, hi)) => {
            let idf = compute_idf(vocab).stage(Stage::IdfFilter)?;
            filter_vocabulary(vocab, &idf, lo, hi).stage(Stage::IdfFilter)?
        }
        None => vocab.clone(),
    };
    let selected = select_top_popular(posts, top_k);
    let corpus = build_weighted_corpus(&selected, &filtered, weighting).stage(Stage::Weight)?;
    let stats = CorpusStats {
        n_posts: posts.len(),
        n_selected: selected.len(),
        n_docs: corpus.docs.len(),
        vocab_before: vocab.len(),
        vocab_after: filtered.len(),
        total_replicas: corpus.total_replicas(),
        total_tokens: corpus.total_tokens(),
    };
    Ok((corpus, stats))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub term: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    /// 1-based position in the corpus-probability ranking.
    pub rank: usize,
    pub topic: usize,
    pub probability: f64,
    pub keywords: Vec<Keyword>,
}

/// Top words of every topic, topics ordered by corpus probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTable {
    pub model_name: String,
    pub k: usize,
    pub rows: Vec<TopicRow>,
}

impl TopicTable {
    pub fn from_model(model: &LdaModel, model_name: &str, n_per_topic: usize) -> Self {
        let weights = topic_weights(model);
        let rows = topic_rank(model)
            .into_iter()
            .enumerate()
            .map(|(i, topic)| TopicRow {
                rank: i + 1,
                topic,
                probability: weights[topic],
                keywords: top_words(model, topic, n_per_topic)
                    .expect("ranked topic is in range")
                    .into_iter()
                    .map(|(term, probability)| Keyword { term, probability })
                    .collect(),
            })
            .collect();
        TopicTable {
            model_name: model_name.to_string(),
            k: model.n_topics(),
            rows,
        }
    }

    pub fn to_text(&self) -> String {
        let header = vec!["Topic".to_string(), "Keywords".to_string()];
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                std::iter::once(r.rank.to_string())
                    .chain(r.keywords.iter().map(|k| k.term.clone()))
                    .collect()
            })
            .collect();
        format!(
            "{}: topic number K = {}\n\n{}",
            self.model_name,
            self.k,
            table::render(&header, &rows)
        )
    }

    pub fn to_json(&self) -> crate::error::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Everything one fit produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub variant: Variant,
    pub idf_bounds: Option<(f64, f64)>,
    pub stats: CorpusStats,
    pub model: LdaModel,
    pub topics: TopicTable,
    pub detected: BTreeSet<String>,
    pub report: Option<EvalReport>,
}

/// Runs one variant on already-ingested posts.
pub fn run_variant(
    posts: &[Post],
    vocab: &Vocabulary,
    config: &PipelineConfig,
    variant: &Variant,
    labels: Option<&LabelSet>,
) -> Result<RunOutcome, PipelineError> {
    run_variant_with_k(posts, vocab, config, variant, labels, config.k)
}

fn run_variant_with_k(
    posts: &[Post],
    vocab: &Vocabulary,
    config: &PipelineConfig,
    variant: &Variant,
    labels: Option<&LabelSet>,
    k: usize,
) -> Result<RunOutcome, PipelineError> {
    let lda = config.lda_config(k);
    lda.validate().stage(Stage::Config)?;
    let idf_bounds = variant.idf_filter.then(|| config.idf_bounds(vocab.n_docs()));
    let (corpus, stats) = prepare_corpus(posts, vocab, idf_bounds, config.top_k_posts, variant.weighting)?;
    let model = fit(&corpus, &lda).stage(Stage::Fit)?;
    let topics = TopicTable::from_model(&model, &variant.name, config.n_per_topic);
    let detected = detected_keywords(&model, config.score_topics, config.n_per_topic);
    let report = labels
        .map(|l| score(&detected, l).map(|r| r.named(variant.name.clone())))
        .transpose()
        .stage(Stage::Score)?;
    Ok(RunOutcome {
        variant: variant.clone(),
        idf_bounds,
        stats,
        model,
        topics,
        detected,
        report,
    })
}

/// Fits the three comparison variants (in parallel) on the same posts.
pub fn compare_variants(
    posts: &[Post],
    vocab: &Vocabulary,
    config: &PipelineConfig,
    labels: &LabelSet,
) -> Result<(Vec<RunOutcome>, ComparisonTable), PipelineError> {
    let variants = Variant::comparison_set();
    let results: Vec<Result<RunOutcome, PipelineError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = variants
            .iter()
            .map(|v| scope.spawn(move || run_variant(posts, vocab, config, v, Some(labels))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("variant fit panicked"))
            .collect()
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<EvalReport> = outcomes
        .iter()
        .map(|o| o.report.clone().expect("labels were supplied"))
        .collect();
    Ok((outcomes, compare_models(&reports)))
}

fn bound_json(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

#[derive(Serialize)]
struct ConfigEcho {
    input: String,
    format: InputFormat,
    tokenization: Tokenization,
    idf_min: Value,
    idf_max: Value,
    top_k_posts: usize,
    weighting_enabled: bool,
    k: usize,
    alpha: Value,
    beta: f64,
    iterations: usize,
    burn_in: usize,
    seed: u64,
    n_per_topic: usize,
    score_topics: String,
    labels: Option<String>,
}

impl ConfigEcho {
    fn new(c: &PipelineConfig) -> Self {
        let opt = |v: Option<f64>| v.map(bound_json).unwrap_or(Value::from("default"));
        ConfigEcho {
            input: c.input.display().to_string(),
            format: c.input_format(),
            tokenization: c.tokenization,
            idf_min: opt(c.idf_min),
            idf_max: opt(c.idf_max),
            top_k_posts: c.top_k_posts,
            weighting_enabled: c.weighting_enabled,
            k: c.k,
            alpha: opt(c.alpha),
            beta: c.beta,
            iterations: c.iterations,
            burn_in: c.burn_in,
            seed: c.seed,
            n_per_topic: c.n_per_topic,
            score_topics: c.score_topics.to_string(),
            labels: c.labels.as_ref().map(|p| p.display().to_string()),
        }
    }
}

#[derive(Serialize)]
struct FitManifest {
    name: String,
    directory: String,
    idf_filter: bool,
    idf_min: Value,
    idf_max: Value,
    weighting_enabled: bool,
    lda: LdaConfig,
    stats: CorpusStats,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest {
    format_version: u32,
    command: &'static str,
    rng: &'static str,
    seed: u64,
    config: ConfigEcho,
    notes: Vec<String>,
    fits: Vec<FitManifest>,
}

impl Manifest {
    fn new(command: &'static str, config: &PipelineConfig) -> Self {
        Manifest {
            format_version: MODEL_FORMAT_VERSION,
            command,
            rng: RNG_ALGORITHM,
            seed: config.seed,
            config: ConfigEcho::new(config),
            notes: Vec::new(),
            fits: Vec::new(),
        }
    }

    fn write(&self, dir: &Path) -> Result<(), PipelineError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(Error::from)
            .stage(Stage::Write)?;
        write_file(&dir.join("manifest.json"), &(json + "\n"))
    }
}

/// Writes model, topic table and (if scored) report files for one fit into
/// `dir`, returning the file names written.
fn write_outcome(dir: &Path, outcome: &RunOutcome, suffix: &str) -> Result<Vec<String>, PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::new(Stage::Write, Error::io(dir, e)))?;
    let mut files = Vec::new();
    let mut put = |name: String, contents: String| -> Result<(), PipelineError> {
        write_file(&dir.join(&name), &contents)?;
        files.push(name);
        Ok(())
    };
    let model = outcome.model.to_json().stage(Stage::Write)?;
    put(format!("model{suffix}.v{MODEL_FORMAT_VERSION}"), model + "\n")?;
    put(format!("topics{suffix}.txt"), outcome.topics.to_text())?;
    put(
        format!("topics{suffix}.json"),
        outcome.topics.to_json().stage(Stage::Write)? + "\n",
    )?;
    if let Some(report) = &outcome.report {
        put(format!("report{suffix}.txt"), report.to_text())?;
        let json = serde_json::to_string_pretty(report)
            .map_err(Error::from)
            .stage(Stage::Write)?;
        put(format!("report{suffix}.json"), json + "\n")?;
    }
    Ok(files)
}

fn fit_manifest(outcome: &RunOutcome, directory: &str, files: Vec<String>) -> FitManifest {
    let (lo, hi) = outcome.idf_bounds.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    FitManifest {
        name: outcome.variant.name.clone(),
        directory: directory.to_string(),
        idf_filter: outcome.variant.idf_filter,
        idf_min: bound_json(lo),
        idf_max: bound_json(hi),
        weighting_enabled: outcome.variant.weighting,
        lda: outcome.model.config.clone(),
        stats: outcome.stats.clone(),
        files,
    }
}

fn load_inputs(config: &PipelineConfig, need_labels: bool) -> Result<(Vec<Post>, Option<LabelSet>), PipelineError> {
    config.validate().stage(Stage::Config)?;
    let labels = match &config.labels {
        Some(path) => Some(LabelSet::load(path, config.tokenization).stage(Stage::Labels)?),
        None if need_labels => {
            return Err(PipelineError::new(
                Stage::Config,
                Error::Config("a labels file is required for this command".into()),
            ))
        }
        None => None,
    };
    if let Some(l) = &labels {
        if l.is_empty() {
            return Err(PipelineError::new(
                Stage::Labels,
                Error::Labels("empty label universe".into()),
            ));
        }
    }
    let posts = ingest(&config.input, config.input_format(), config.tokenization).stage(Stage::Ingest)?;
    Ok((posts, labels))
}

fn create_output_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::new(Stage::Write, Error::io(dir, e)))
}

/// Summary statistics of an input file, as printed by `ingest-stats`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestStats {
    pub n_posts: usize,
    pub n_empty_posts: usize,
    pub n_tokens: usize,
    pub vocab_size: usize,
    pub vocab_after_idf_filter: Option<usize>,
    pub idf_min: Value,
    pub idf_max: Value,
    pub total_popularity: u64,
    pub max_popularity: u64,
}

impl IngestStats {
    pub fn to_json(&self) -> crate::error::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn ingest_stats(config: &PipelineConfig) -> Result<IngestStats, PipelineError> {
    let posts = ingest(&config.input, config.input_format(), config.tokenization).stage(Stage::Ingest)?;
    let pops: Vec<u64> = posts.iter().map(crate::filter::popularity).collect();
    let vocab = build_vocabulary(&posts).ok();
    let (lo, hi) = config.idf_bounds(posts.len());
    let after = vocab.as_ref().and_then(|v| {
        let idf = compute_idf(v).ok()?;
        filter_vocabulary(v, &idf, lo, hi).ok().map(|f| f.len())
    });
    Ok(IngestStats {
        n_posts: posts.len(),
        n_empty_posts: posts.iter().filter(|p| p.tokens.is_empty()).count(),
        n_tokens: posts.iter().map(|p| p.tokens.len()).sum(),
        vocab_size: vocab.as_ref().map_or(0, Vocabulary::len),
        vocab_after_idf_filter: after,
        idf_min: bound_json(lo),
        idf_max: bound_json(hi),
        total_popularity: pops.iter().sum(),
        max_popularity: pops.iter().copied().max().unwrap_or(0),
    })
}

/// Runs the pipeline described by `config` and writes its artifacts.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    let (posts, labels) = load_inputs(config, false)?;
    let vocab = build_vocabulary(&posts).stage(Stage::Vocabulary)?;
    let outcome = run_variant(&posts, &vocab, config, &config.variant(), labels.as_ref())?;

    let dir = &config.output_dir;
    create_output_dir(dir)?;
    let files = write_outcome(dir, &outcome, "")?;
    let mut manifest = Manifest::new("run", config);
    manifest.fits.push(fit_manifest(&outcome, ".", files));
    manifest.write(dir)?;
    Ok(outcome)
}

/// Fits LDA, IDF-LDA and WBIDF-LDA on the same top-k posts and writes the
/// comparison table. Requires labels.
pub fn run_comparison(config: &PipelineConfig) -> Result<(Vec<RunOutcome>, ComparisonTable), PipelineError> {
    let (posts, labels) = load_inputs(config, true)?;
    let labels = labels.expect("checked by load_inputs");
    let vocab = build_vocabulary(&posts).stage(Stage::Vocabulary)?;
    let (outcomes, table) = compare_variants(&posts, &vocab, config, &labels)?;

    let dir = &config.output_dir;
    create_output_dir(dir)?;
    let mut manifest = Manifest::new("compare", config);
    manifest.notes.push(
        "all variants run on the top_k_posts popularity subset; the baseline uses the unfiltered vocabulary".into(),
    );
    for outcome in &outcomes {
        let sub = outcome.variant.dir_name();
        let files = write_outcome(&dir.join(&sub), outcome, "")?;
        manifest.fits.push(fit_manifest(outcome, &sub, files));
    }
    write_file(&dir.join("comparison.txt"), &table.to_text())?;
    write_file(
        &dir.join("comparison.json"),
        &(table.to_json().stage(Stage::Write)? + "\n"),
    )?;
    manifest.write(dir)?;
    Ok((outcomes, table))
}

/// Drops repeated values, keeping first occurrences in order.
pub fn dedup_k_values(k_values: &[usize]) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let unique: Vec<usize> = k_values.iter().copied().filter(|k| seen.insert(*k)).collect();
    if unique.len() != k_values.len() {
        log::warn!("duplicate topic counts in {k_values:?}; fitting each of {unique:?} once");
    }
    unique
}

/// One fit per topic count with a shared corpus and seed; writes
/// `topics_k<K>.txt` and `topics_k<K>.json` for each.
pub fn run_topic_sweep(config: &PipelineConfig, k_values: &[usize]) -> Result<Vec<RunOutcome>, PipelineError> {
    if k_values.is_empty() {
        return Err(PipelineError::new(
            Stage::Config,
            Error::Config("no topic counts given".into()),
        ));
    }
    let ks = dedup_k_values(k_values);
    for &k in &ks {
        config.lda_config(k).validate().stage(Stage::Config)?;
    }
    let (posts, labels) = load_inputs(config, false)?;
    let vocab = build_vocabulary(&posts).stage(Stage::Vocabulary)?;
    let variant = config.variant();

    let results: Vec<Result<RunOutcome, PipelineError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ks
            .iter()
            .map(|&k| {
                let (posts, vocab, variant, labels) = (&posts, &vocab, &variant, labels.as_ref());
                scope.spawn(move || run_variant_with_k(posts, vocab, config, variant, labels, k))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep fit panicked"))
            .collect()
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let dir = &config.output_dir;
    create_output_dir(dir)?;
    let mut manifest = Manifest::new("sweep", config);
    if ks.len() != k_values.len() {
        manifest
            .notes
            .push(format!("duplicate topic counts removed: {k_values:?} -> {ks:?}"));
    }
    for outcome in &outcomes {
        let k = outcome.model.n_topics();
        let mut files = Vec::new();
        for (name, body) in [
            (format!("topics_k{k}.txt"), outcome.topics.to_text()),
            (
                format!("topics_k{k}.json"),
                outcome.topics.to_json().stage(Stage::Write)? + "\n",
            ),
        ] {
            write_file(&dir.join(&name), &body)?;
            files.push(name);
        }
        if let Some(report) = &outcome.report {
            let name = format!("report_k{k}.txt");
            write_file(&dir.join(&name), &report.to_text())?;
            files.push(name);
        }
        manifest.fits.push(fit_manifest(outcome, ".", files));
    }
    manifest.write(dir)?;
    Ok(outcomes)
}
