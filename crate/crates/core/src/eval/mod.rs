//! Keyword extraction from fitted models and precision/recall/F1 scoring.

mod synthetic;

pub use synthetic::{generate_synthetic, PopularityModel, SyntheticSpec};

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::Tokenization;
use crate::error::{Error, Result};
use crate::lda::{top_words, topic_rank, LdaModel};
use crate::table;

/// Labeled keywords per post and their union.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelSet {
    pub labels: BTreeMap<String, BTreeSet<String>>,
    pub universe: BTreeSet<String>,
}

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the keywords of one post. Empty keyword sets are rejected;
    /// repeating a post id merges its keywords.
    pub fn insert<I, S>(&mut self, post_id: impl Into<String>, keywords: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let post_id = post_id.into();
        let set: BTreeSet<String> = keywords.into_iter().map(Into::into).filter(|k| !k.is_empty()).collect();
        if set.is_empty() {
            return Err(Error::Labels(format!("post `{post_id}` has no keywords")));
        }
        self.universe.extend(set.iter().cloned());
        self.labels.entry(post_id).or_default().extend(set);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    /// Reads a JSONL label file (`{"id": ..., "keywords": [...]}` per line).
    /// Keywords get the same normalization as the tokenizer in `tokenization`.
    pub fn load(path: &Path, tokenization: Tokenization) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(file), tokenization)
    }

    pub fn parse<R: BufRead>(reader: R, tokenization: Tokenization) -> Result<Self> {
        let mut set = LabelSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::record(line_no, "<line>", e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let value: Value = serde_json::from_str(&line)
                .map_err(|e| Error::record(line_no, "<record>", format!("invalid JSON: {e}")))?;
            let id = value
                .get("id")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::record(line_no, "id", "missing or not a string"))?;
            let keywords = value
                .get("keywords")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::record(line_no, "keywords", "missing or not an array"))?;
            let mut normalized = Vec::with_capacity(keywords.len());
            for kw in keywords {
                let kw = kw
                    .as_str()
                    .ok_or_else(|| Error::record(line_no, "keywords", "expected an array of strings"))?;
                normalized.push(normalize_keyword(kw, tokenization));
            }
            set.insert(id, normalized)
                .map_err(|e| Error::record(line_no, "keywords", e.to_string()))?;
        }
        Ok(set)
    }
}

fn normalize_keyword(keyword: &str, tokenization: Tokenization) -> String {
    match tokenization {
        Tokenization::Pretokenized => keyword.to_string(),
        Tokenization::Whitespace => crate::corpus::normalize_tokenize(keyword).join(" "),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub detected: BTreeSet<String>,
    pub labeled: BTreeSet<String>,
    pub hits: BTreeSet<String>,
}

impl EvalReport {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.model_name = name.into();
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "model: {}\ndetected: {}  labeled: {}  hits: {}\n\n",
            self.model_name,
            self.detected.len(),
            self.labeled.len(),
            self.hits.len()
        );
        out.push_str(&compare_models(std::slice::from_ref(self)).to_text());
        out
    }
}

/// `2pr / (p + r)`, zero when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Scores detected keywords against the union of all labeled keywords.
pub fn score(detected: &BTreeSet<String>, labels: &LabelSet) -> Result<EvalReport> {
    if labels.universe.is_empty() {
        return Err(Error::Labels("empty label universe".into()));
    }
    let hits: BTreeSet<String> = detected.intersection(&labels.universe).cloned().collect();
    let precision = if detected.is_empty() {
        0.0
    } else {
        hits.len() as f64 / detected.len() as f64
    };
    let recall = hits.len() as f64 / labels.universe.len() as f64;
    Ok(EvalReport {
        model_name: String::new(),
        precision,
        recall,
        f1: f1_score(precision, recall),
        detected: detected.clone(),
        labeled: labels.universe.clone(),
        hits,
    })
}

/// Which topics contribute keywords.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicSelection {
    #[default]
    All,
    /// The `m` highest-ranked topics by corpus probability.
    Top(usize),
}

impl FromStr for TopicSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(TopicSelection::All);
        }
        s.strip_prefix("top-")
            .or_else(|| s.strip_prefix("top"))
            .and_then(|m| m.parse().ok())
            .map(TopicSelection::Top)
            .ok_or_else(|| Error::Config(format!("invalid topic selection `{s}` (expected all or top-M)")))
    }
}

impl std::fmt::Display for TopicSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TopicSelection::All => f.write_str("all"),
            TopicSelection::Top(m) => write!(f, "top-{m}"),
        }
    }
}

/// Union of the top `n_per_topic` words over the selected topics.
pub fn detected_keywords(model: &LdaModel, topics: TopicSelection, n_per_topic: usize) -> BTreeSet<String> {
    let chosen: Vec<usize> = match topics {
        TopicSelection::All => (0..model.n_topics()).collect(),
        TopicSelection::Top(m) => topic_rank(model).into_iter().take(m).collect(),
    };
    chosen
        .into_iter()
        .flat_map(|t| top_words(model, t, n_per_topic).expect("topic id from model range"))
        .map(|(w, _)| w)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub best_precision: bool,
    pub best_recall: bool,
    pub best_f1: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    /// Aligned text table; `*` marks the best value in each column.
    pub fn to_text(&self) -> String {
        let header = ["Model", "Precision", "Recall", "F1-Score"].map(String::from);
        let cell = |v: f64, best: bool| format!("{v:.3}{}", if best { "*" } else { "" });
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.model_name.clone(),
                    cell(r.precision, r.best_precision),
                    cell(r.recall, r.best_recall),
                    cell(r.f1, r.best_f1),
                ]
            })
            .collect();
        let mut text = table::render(&header, &rows);
        text.push_str("(* best in column; larger is better)\n");
        text
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One row per report, in input order, with per-column maxima flagged.
/// Ties are all flagged.
pub fn compare_models(reports: &[EvalReport]) -> ComparisonTable {
    let max = |f: fn(&EvalReport) -> f64| reports.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let (best_p, best_r, best_f) = (max(|r| r.precision), max(|r| r.recall), max(|r| r.f1));
    ComparisonTable {
        rows: reports
            .iter()
            .map(|r| ComparisonRow {
                model_name: r.model_name.clone(),
                precision: r.precision,
                recall: r.recall,
                f1: r.f1,
                best_precision: r.precision == best_p,
                best_recall: r.recall == best_r,
                best_f1: r.f1 == best_f,
            })
            .collect(),
    }
}
