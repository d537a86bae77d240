//! IDF vocabulary filtering, popularity selection and engagement weighting.
//!
//! All logarithms are natural logarithms.

use serde::{Deserialize, Serialize};

use crate::corpus::{EncodedDoc, Post, TermId, Vocabulary};
use crate::error::{Error, Result};

/// `ln(N / (1 + df)) + 1`.
pub fn idf_value(n_docs: usize, doc_freq: usize) -> f64 {
    (n_docs as f64 / (1.0 + doc_freq as f64)).ln() + 1.0
}

/// Default upper IDF bound: the IDF of a term seen in exactly three
/// documents, so terms with document frequency below three are dropped.
pub fn default_idf_max(n_docs: usize) -> f64 {
    idf_value(n_docs, 3)
}

pub const DEFAULT_IDF_MIN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    pub idf: Vec<f64>,
    pub idf_min_threshold: f64,
    pub idf_max_threshold: f64,
}

impl IdfTable {
    pub fn with_thresholds(mut self, idf_min: f64, idf_max: f64) -> Self {
        self.idf_min_threshold = idf_min;
        self.idf_max_threshold = idf_max;
        self
    }
}

pub fn compute_idf(vocab: &Vocabulary) -> Result<IdfTable> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let n = vocab.n_docs();
    Ok(IdfTable {
        idf: vocab.doc_freqs().iter().map(|&df| idf_value(n, df)).collect(),
        idf_min_threshold: f64::NEG_INFINITY,
        idf_max_threshold: f64::INFINITY,
    })
}

/// Keeps the terms with `idf_min <= idf <= idf_max`.
pub fn filter_vocabulary(vocab: &Vocabulary, idf: &IdfTable, idf_min: f64, idf_max: f64) -> Result<Vocabulary> {
    if idf_min.is_nan() || idf_max.is_nan() || idf_min >= idf_max {
        return Err(Error::Config(format!(
            "idf_min ({idf_min}) must be smaller than idf_max ({idf_max})"
        )));
    }
    if idf.idf.len() != vocab.len() {
        return Err(Error::Config(format!(
            "IDF table has {} entries but vocabulary has {} terms",
            idf.idf.len(),
            vocab.len()
        )));
    }
    let filtered = vocab.retain(|id| {
        let v = idf.idf[id as usize];
        idf_min <= v && v <= idf_max
    });
    if filtered.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Ok(filtered)
}

/// Likes + comments + retweets.
pub fn popularity(post: &Post) -> u64 {
    post.likes.saturating_add(post.comments).saturating_add(post.retweets)
}

/// The `k` most popular posts, most popular first. Equal popularity keeps
/// input order.
pub fn select_top_popular(posts: &[Post], k: usize) -> Vec<Post> {
    let mut order: Vec<usize> = (0..posts.len()).collect();
    // stable sort: ties stay in input order
    order.sort_by_key(|&i| std::cmp::Reverse(popularity(&posts[i])));
    order.into_iter().take(k).map(|i| posts[i].clone()).collect()
}

/// `1 + ln(1 + likes) + 2 ln(1 + comments) + 4 ln(1 + retweets)`.
pub fn compute_weight(post: &Post) -> f64 {
    1.0 + (post.likes as f64).ln_1p() + 2.0 * (post.comments as f64).ln_1p() + 4.0 * (post.retweets as f64).ln_1p()
}

/// Number of copies of a post fed to the sampler: the weight rounded half
/// up, never below one.
pub fn replication_count(weight: f64) -> u32 {
    let r = (weight + 0.5).floor();
    if r < 1.0 {
        1
    } else if r >= u32::MAX as f64 {
        u32::MAX
    } else {
        r as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedDoc {
    pub doc: EncodedDoc,
    pub popularity: u64,
    pub raw_weight: f64,
    pub replication: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedCorpus {
    pub docs: Vec<WeightedDoc>,
    pub vocab: Vocabulary,
    pub weighting_enabled: bool,
}

impl WeightedCorpus {
    /// Number of documents after replication.
    pub fn total_replicas(&self) -> u64 {
        self.docs.iter().map(|d| d.replication as u64).sum()
    }

    /// Token count after replication.
    pub fn total_tokens(&self) -> u64 {
        self.docs
            .iter()
            .map(|d| d.replication as u64 * d.doc.term_ids.len() as u64)
            .sum()
    }

    /// Number of distinct term ids occurring in the documents.
    pub fn distinct_terms(&self) -> usize {
        let mut seen = vec![false; self.vocab.len()];
        for d in &self.docs {
            for &t in &d.doc.term_ids {
                seen[t as usize] = true;
            }
        }
        seen.into_iter().filter(|&s| s).count()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

/// Encodes `posts` against `vocab`, drops posts left without tokens and
/// attaches replication counts.
pub fn build_weighted_corpus(posts: &[Post], vocab: &Vocabulary, weighting_enabled: bool) -> Result<WeightedCorpus> {
    let docs: Vec<WeightedDoc> = posts
        .iter()
        .filter_map(|post| {
            let doc = vocab.encode(post);
            if doc.term_ids.is_empty() {
                return None;
            }
            let raw_weight = compute_weight(post);
            let replication = if weighting_enabled {
                replication_count(raw_weight)
            } else {
                1
            };
            Some(WeightedDoc {
                doc,
                popularity: popularity(post),
                raw_weight,
                replication,
            })
        })
        .collect();
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    debug_assert!(docs
        .iter()
        .all(|d| d.doc.term_ids.iter().all(|&t| (t as usize) < vocab.len())));
    Ok(WeightedCorpus {
        docs,
        vocab: vocab.clone(),
        weighting_enabled,
    })
}

/// Ids of terms whose IDF lies inside `[idf_min, idf_max]`, in id order.
pub fn retained_ids(idf: &IdfTable, idf_min: f64, idf_max: f64) -> Vec<TermId> {
    idf.idf
        .iter()
        .enumerate()
        .filter(|(_, &v)| idf_min <= v && v <= idf_max)
        .map(|(i, _)| i as TermId)
        .collect()
}
