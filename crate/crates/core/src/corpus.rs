//! Post ingestion, tokenization and vocabulary statistics.
//!
//! Posts arrive either as JSONL (one object per line) or as CSV with a
//! `id,text,likes,comments,retweets[,timestamp]` header. Text is either taken
//! as already segmented (`tokens` array in JSONL, space-separated `text` in
//! CSV) or run through the whitespace tokenizer, which lowercases and replaces
//! everything that is not a letter, digit or whitespace with a space.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub type TermId = u32;

/// One social-media post with its engagement counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub tokens: Vec<String>,
    pub likes: u64,
    pub comments: u64,
    pub retweets: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl Post {
    pub fn new(id: impl Into<String>, tokens: Vec<String>, likes: u64, comments: u64, retweets: u64) -> Self {
        Post {
            id: id.into(),
            tokens,
            likes,
            comments,
            retweets,
            timestamp: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    /// Guesses the format from a file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Jsonl,
        }
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown input format `{other}` (expected jsonl or csv)"
            ))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Jsonl => "jsonl",
            InputFormat::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tokenization {
    /// Tokens are used exactly as given.
    Pretokenized,
    /// Lowercase, strip non-alphanumerics, split on whitespace.
    Whitespace,
}

impl FromStr for Tokenization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pretokenized" => Ok(Tokenization::Pretokenized),
            "whitespace" => Ok(Tokenization::Whitespace),
            other => Err(Error::Config(format!(
                "unknown tokenization `{other}` (expected pretokenized or whitespace)"
            ))),
        }
    }
}

impl fmt::Display for Tokenization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tokenization::Pretokenized => "pretokenized",
            Tokenization::Whitespace => "whitespace",
        })
    }
}

/// Lowercases `text`, replaces every character that is neither alphanumeric
/// nor whitespace with a space, and splits on whitespace.
///
/// CJK ideographs count as alphabetic and pass through unchanged.
pub fn normalize_tokenize(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

/// Reads every post from `path`, in file order.
pub fn ingest(path: &Path, format: InputFormat, tokenization: Tokenization) -> Result<Vec<Post>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        InputFormat::Jsonl => parse_jsonl(BufReader::new(file), tokenization),
        InputFormat::Csv => parse_csv(file, tokenization),
    }
}

pub fn parse_jsonl<R: BufRead>(reader: R, tokenization: Tokenization) -> Result<Vec<Post>> {
    let mut posts = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::record(line_no, "<line>", e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|e| Error::record(line_no, "<record>", format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::record(line_no, "<record>", "expected a JSON object"))?;

        let id = match obj.get("id") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(Error::record(line_no, "id", "expected a string")),
            None => return Err(Error::record(line_no, "id", "missing")),
        };
        let tokens = match tokenization {
            Tokenization::Pretokenized => match obj.get("tokens") {
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|t| {
                        t.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| Error::record(line_no, "tokens", "expected an array of strings"))
                    })
                    .collect::<Result<Vec<_>>>()?,
                Some(_) => return Err(Error::record(line_no, "tokens", "expected an array of strings")),
                None => {
                    return Err(Error::record(
                        line_no,
                        "tokens",
                        "missing (required for pretokenized input)",
                    ))
                }
            },
            Tokenization::Whitespace => match obj.get("text") {
                Some(Value::String(s)) => normalize_tokenize(s),
                Some(_) => return Err(Error::record(line_no, "text", "expected a string")),
                None => {
                    return Err(Error::record(
                        line_no,
                        "text",
                        "missing (required for whitespace tokenization)",
                    ))
                }
            },
        };
        let count = |field: &str| -> Result<u64> {
            match obj.get(field) {
                Some(Value::Number(n)) => {
                    if let Some(v) = n.as_u64() {
                        Ok(v)
                    } else if n.as_i64().is_some_and(|v| v < 0) {
                        Err(Error::record(line_no, field, format!("negative engagement count {n}")))
                    } else {
                        Err(Error::record(
                            line_no,
                            field,
                            format!("expected a non-negative integer, got {n}"),
                        ))
                    }
                }
                Some(other) => Err(Error::record(
                    line_no,
                    field,
                    format!("expected an integer, got {other}"),
                )),
                None => Err(Error::record(line_no, field, "missing")),
            }
        };
        let likes = count("likes")?;
        let comments = count("comments")?;
        let retweets = count("retweets")?;
        let timestamp = match obj.get("timestamp") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(Error::record(line_no, "timestamp", "expected a string")),
        };

        if !seen.insert(id.clone()) {
            return Err(Error::DuplicatePostId { line: line_no, id });
        }
        posts.push(Post {
            id,
            tokens,
            likes,
            comments,
            retweets,
            timestamp,
        });
    }
    Ok(posts)
}

/// Parses CSV with a header row. In pretokenized mode the `text` column is
/// split on whitespace without any normalization.
pub fn parse_csv<R: Read>(reader: R, tokenization: Tokenization) -> Result<Vec<Post>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::record(1, "<header>", e.to_string()))?
        .clone();
    // An empty file has no header and no records.
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(Vec::new());
    }
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = |name: &str| column(name).ok_or_else(|| Error::record(1, name, "missing column in header"));
    let id_col = required("id")?;
    let text_col = required("text")?;
    let likes_col = required("likes")?;
    let comments_col = required("comments")?;
    let retweets_col = required("retweets")?;
    let timestamp_col = column("timestamp");

    let mut posts = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::record(line, "<record>", e.to_string())
        })?;
        let line_no = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |col: usize, name: &str| record.get(col).ok_or_else(|| Error::record(line_no, name, "missing"));
        let count = |col: usize, name: &str| -> Result<u64> {
            let raw = field(col, name)?.trim();
            if let Ok(v) = raw.parse::<u64>() {
                Ok(v)
            } else if raw.parse::<i64>().is_ok_and(|v| v < 0) {
                Err(Error::record(line_no, name, format!("negative engagement count {raw}")))
            } else {
                Err(Error::record(
                    line_no,
                    name,
                    format!("expected a non-negative integer, got `{raw}`"),
                ))
            }
        };

        let id = field(id_col, "id")?.to_string();
        let text = field(text_col, "text")?;
        let tokens = match tokenization {
            Tokenization::Pretokenized => text.split_whitespace().map(str::to_string).collect(),
            Tokenization::Whitespace => normalize_tokenize(text),
        };
        let likes = count(likes_col, "likes")?;
        let comments = count(comments_col, "comments")?;
        let retweets = count(retweets_col, "retweets")?;
        let timestamp = timestamp_col
            .and_then(|c| record.get(c))
            .filter(|s| !s.is_empty())
            .map(str::to_string);

        if !seen.insert(id.clone()) {
            return Err(Error::DuplicatePostId { line: line_no, id });
        }
        posts.push(Post {
            id,
            tokens,
            likes,
            comments,
            retweets,
            timestamp,
        });
    }
    Ok(posts)
}

/// Share of `post`'s tokens equal to `term`.
pub fn term_frequency(term: &str, post: &Post) -> Result<f64> {
    if post.tokens.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let hits = post.tokens.iter().filter(|t| *t == term).count();
    Ok(hits as f64 / post.tokens.len() as f64)
}

/// Term <-> id mapping with document frequencies.
///
/// Ids are dense and follow first-occurrence order over the posts the
/// vocabulary was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    index: HashMap<String, TermId>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    n_docs: usize,
    terms: Vec<String>,
    doc_freq: Vec<usize>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(repr: VocabularyRepr) -> Self {
        Vocabulary::from_parts(repr.terms, repr.doc_freq, repr.n_docs)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            n_docs: v.n_docs,
            terms: v.terms,
            doc_freq: v.doc_freq,
        }
    }
}

impl Vocabulary {
    fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>, n_docs: usize) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();
        Vocabulary {
            terms,
            doc_freq,
            n_docs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total number of documents N the statistics were computed over.
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self, id: TermId) -> usize {
        self.doc_freq[id as usize]
    }

    pub fn doc_freqs(&self) -> &[usize] {
        &self.doc_freq
    }

    /// Keeps the terms for which `keep` returns true, renumbering densely in
    /// the original relative order. Statistics are carried over unchanged.
    pub fn retain<F: FnMut(TermId) -> bool>(&self, mut keep: F) -> Vocabulary {
        let mut terms = Vec::new();
        let mut doc_freq = Vec::new();
        for (i, term) in self.terms.iter().enumerate() {
            if keep(i as TermId) {
                terms.push(term.clone());
                doc_freq.push(self.doc_freq[i]);
            }
        }
        Vocabulary::from_parts(terms, doc_freq, self.n_docs)
    }

    /// Maps `post`'s tokens to ids, silently dropping out-of-vocabulary terms.
    pub fn encode(&self, post: &Post) -> EncodedDoc {
        EncodedDoc {
            post_id: post.id.clone(),
            term_ids: post.tokens.iter().filter_map(|t| self.id(t)).collect(),
        }
    }
}

/// Builds the vocabulary and document frequencies over `posts`.
///
/// `n_docs` counts every post, including posts without tokens.
pub fn build_vocabulary(posts: &[Post]) -> Result<Vocabulary> {
    if posts.iter().all(|p| p.tokens.is_empty()) {
        return Err(Error::NoTokens);
    }
    let mut terms: Vec<String> = Vec::new();
    let mut doc_freq: Vec<usize> = Vec::new();
    let mut index: HashMap<String, TermId> = HashMap::new();
    let mut last_seen: Vec<usize> = Vec::new();
    for (doc, post) in posts.iter().enumerate() {
        for token in &post.tokens {
            let id = match index.get(token.as_str()) {
                Some(&id) => id as usize,
                None => {
                    let id = terms.len();
                    index.insert(token.clone(), id as TermId);
                    terms.push(token.clone());
                    doc_freq.push(0);
                    last_seen.push(usize::MAX);
                    id
                }
            };
            if last_seen[id] != doc {
                last_seen[id] = doc;
                doc_freq[id] += 1;
            }
        }
    }
    Ok(Vocabulary {
        terms,
        doc_freq,
        n_docs: posts.len(),
        index,
    })
}

/// A post reduced to the ids of its in-vocabulary tokens, order preserved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedDoc {
    pub post_id: String,
    pub term_ids: Vec<TermId>,
}
