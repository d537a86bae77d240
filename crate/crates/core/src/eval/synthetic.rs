//! Planted-topic corpora with known keyword sets.
//!
//! Every document belongs to one planted topic (round-robin) and draws its
//! on-topic tokens uniformly from that topic's signature terms. Documents are
//! either clean posts with little noise or chatter posts that are mostly
//! noise; the share of chatter posts is set so the mean noise fraction is
//! `noise_ratio`. Noise tokens come from three pools:
//!
//! * stopwords: four terms shared by most documents,
//! * background: a small pool of mid-frequency chatter,
//! * rare: near-unique terms (typos, names).
//!
//! Engagement falls off with the document's noise fraction, so popular
//! posts are cleaner.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabelSet;
use crate::corpus::Post;
use crate::error::{Error, Result};

const STOPWORDS: usize = 4;
const BACKGROUND: usize = 20;
/// Shares of noise tokens going to the stopword and background pools; the
/// rest is rare.
const STOPWORD_SHARE: f64 = 0.4;
const BACKGROUND_SHARE: f64 = 0.4;
/// Noise fraction of chatter posts is uniform on this range.
const CHATTER_NOISE: (f64, f64) = (0.5, 0.95);
/// Upper bound on the mean noise fraction of clean posts.
const CLEAN_NOISE_MEAN: f64 = 0.05;

/// Per-document noise fraction: returns `(clean_mean, chatter_range,
/// chatter_probability)` for a target mean of `noise_ratio`.
fn noise_mixture(noise_ratio: f64) -> (f64, (f64, f64), f64) {
    let clean = CLEAN_NOISE_MEAN.min(noise_ratio / 2.0);
    let lo = CHATTER_NOISE.0.max(noise_ratio);
    let hi = CHATTER_NOISE.1.max(lo);
    let chatter_mean = (lo + hi) / 2.0;
    let q = if chatter_mean > clean {
        ((noise_ratio - clean) / (chatter_mean - clean)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (clean, (lo, hi), q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PopularityModel {
    /// Engagement counts drawn uniformly up to `max * purity^sharpness`,
    /// where purity is the share of on-topic tokens.
    PurityCorrelated {
        max_likes: u64,
        max_comments: u64,
        max_retweets: u64,
        sharpness: f64,
    },
    /// Every post gets the same counts.
    Constant { likes: u64, comments: u64, retweets: u64 },
}

impl Default for PopularityModel {
    fn default() -> Self {
        PopularityModel::PurityCorrelated {
            max_likes: 200,
            max_comments: 40,
            max_retweets: 10,
            sharpness: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_topics: usize,
    pub vocab_per_topic: usize,
    pub docs: usize,
    pub doc_len: usize,
    pub noise_ratio: f64,
    pub popularity_model: PopularityModel,
    pub seed: u64,
}

impl SyntheticSpec {
    /// 10 topics of 8 signature terms, 2000 documents of 20 tokens, 30% noise.
    pub fn benchmark(seed: u64) -> Self {
        SyntheticSpec {
            n_topics: 10,
            vocab_per_topic: 8,
            docs: 2000,
            doc_len: 20,
            noise_ratio: 0.3,
            popularity_model: PopularityModel::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("synthetic spec: {msg}")));
        if self.n_topics == 0 || self.vocab_per_topic == 0 || self.doc_len == 0 {
            return bad("n_topics, vocab_per_topic and doc_len must be positive".into());
        }
        if self.docs < self.n_topics {
            return bad(format!(
                "need at least one document per topic ({} < {})",
                self.docs, self.n_topics
            ));
        }
        if !(0.0..1.0).contains(&self.noise_ratio) {
            return bad(format!("noise_ratio must lie in [0, 1), got {}", self.noise_ratio));
        }
        if let PopularityModel::PurityCorrelated { sharpness, .. } = self.popularity_model {
            if !(sharpness >= 0.0 && sharpness.is_finite()) {
                return bad(format!("sharpness must be non-negative, got {sharpness}"));
            }
        }
        Ok(())
    }

    pub fn signature_term(topic: usize, index: usize) -> String {
        format!("t{topic}w{index}")
    }
}

/// Generates posts and their planted labels. Each post is labeled with the
/// full signature set of its topic.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Vec<Post>, LabelSet)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let signatures: Vec<Vec<String>> = (0..spec.n_topics)
        .map(|t| {
            (0..spec.vocab_per_topic)
                .map(|i| SyntheticSpec::signature_term(t, i))
                .collect()
        })
        .collect();
    let rare_pool = spec.docs * spec.doc_len;
    let (clean_mean, (chatter_lo, chatter_hi), chatter_p) = noise_mixture(spec.noise_ratio);

    let mut posts = Vec::with_capacity(spec.docs);
    let mut labels = LabelSet::new();
    for d in 0..spec.docs {
        let topic = d % spec.n_topics;
        let chatter = rng.random::<f64>() < chatter_p;
        let u: f64 = rng.random();
        let fraction = if chatter {
            chatter_lo + (chatter_hi - chatter_lo) * u
        } else {
            2.0 * clean_mean * u
        };
        let n_noise = ((fraction * spec.doc_len as f64).round() as usize).min(spec.doc_len - 1);

        let mut tokens = Vec::with_capacity(spec.doc_len);
        for _ in 0..spec.doc_len - n_noise {
            let i = rng.random_range(0..spec.vocab_per_topic);
            tokens.push(signatures[topic][i].clone());
        }
        for _ in 0..n_noise {
            let pick: f64 = rng.random();
            let term = if pick < STOPWORD_SHARE {
                format!("stop{}", rng.random_range(0..STOPWORDS))
            } else if pick < STOPWORD_SHARE + BACKGROUND_SHARE {
                format!("bg{}", rng.random_range(0..BACKGROUND))
            } else {
                format!("rare{}", rng.random_range(0..rare_pool))
            };
            tokens.push(term);
        }
        tokens.shuffle(&mut rng);

        let purity = 1.0 - n_noise as f64 / spec.doc_len as f64;
        let (likes, comments, retweets) = match spec.popularity_model {
            PopularityModel::PurityCorrelated {
                max_likes,
                max_comments,
                max_retweets,
                sharpness,
            } => {
                let scale = purity.powf(sharpness);
                let mut draw = |max: u64| (rng.random::<f64>() * scale * (max + 1) as f64).floor() as u64;
                (draw(max_likes), draw(max_comments), draw(max_retweets))
            }
            PopularityModel::Constant {
                likes,
                comments,
                retweets,
            } => (likes, comments, retweets),
        };

        let id = format!("s{d}");
        labels.insert(id.clone(), signatures[topic].iter().cloned())?;
        posts.push(Post::new(id, tokens, likes, comments, retweets));
    }
    Ok((posts, labels))
}
