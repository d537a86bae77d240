//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use wbidf_lda::filter::build_weighted_corpus;
use wbidf_lda::{build_vocabulary, LdaConfig, Post, SamplerState, WeightedCorpus};

/// Working precision of the float oracles, in bits.
const PREC: usize = 256;

type F = FBig<HalfEven>;

fn big(x: u64) -> F {
    F::from(x).with_precision(PREC).value()
}

/// `ln(n / (1 + df)) + 1`, evaluated at 256 bits.
pub fn idf_oracle(n: u64, df: u64) -> f64 {
    let ratio = big(n) / big(df + 1);
    (ratio.ln() + big(1)).to_f64().value()
}

/// `1 + ln(1 + l) + 2 ln(1 + c) + 4 ln(1 + r)`, evaluated at 256 bits.
pub fn weight_oracle(l: u64, c: u64, r: u64) -> f64 {
    let ln1p = |x: u64| (big(x) + big(1)).ln();
    (big(1) + ln1p(l) + big(2) * ln1p(c) + big(4) * ln1p(r))
        .to_f64()
        .value()
}

pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact precision, recall and F1 as rationals.
pub fn prf_oracle(detected: usize, labeled: usize, hits: usize) -> (BigRational, BigRational, BigRational) {
    let zero = ratio(0, 1);
    let p = if detected == 0 {
        zero.clone()
    } else {
        ratio(hits as u64, detected as u64)
    };
    let r = ratio(hits as u64, labeled as u64);
    let f = if p == zero && r == zero {
        zero
    } else {
        ratio(2, 1) * &p * &r / (&p + &r)
    };
    (p, r, f)
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("finite rational")
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// `ln(a (a+1) ... (a+n-1))`, i.e. `ln Γ(a+n) - ln Γ(a)` without a gamma
/// function.
pub fn ln_rising(a: f64, n: u32) -> f64 {
    (0..n).map(|i| (a + i as f64).ln()).sum()
}

/// Collapsed joint log-probability from per-document terms and topics,
/// written with rising factorials.
pub fn log_joint_oracle(k: usize, v: usize, alpha: f64, beta: f64, docs: &[Vec<u32>], z: &[Vec<u32>]) -> f64 {
    let mut n_kw = vec![vec![0u32; v]; k];
    let mut n_k = vec![0u32; k];
    let mut total = 0.0;
    for (terms, topics) in docs.iter().zip(z) {
        let mut n_dk = vec![0u32; k];
        for (&w, &t) in terms.iter().zip(topics) {
            n_dk[t as usize] += 1;
            n_kw[t as usize][w as usize] += 1;
            n_k[t as usize] += 1;
        }
        total += n_dk.iter().map(|&c| ln_rising(alpha, c)).sum::<f64>();
        total -= ln_rising(k as f64 * alpha, terms.len() as u32);
    }
    for t in 0..k {
        total += n_kw[t].iter().map(|&c| ln_rising(beta, c)).sum::<f64>();
        total -= ln_rising(v as f64 * beta, n_k[t]);
    }
    total
}

/// Per-document terms of a sampler state.
pub fn state_docs(state: &SamplerState) -> Vec<Vec<u32>> {
    (0..state.n_docs()).map(|d| state.doc_terms(d).to_vec()).collect()
}

/// Splits a flat assignment vector by document lengths.
pub fn split(flat: &[u32], docs: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(docs.len());
    let mut at = 0;
    for d in docs {
        out.push(flat[at..at + d.len()].to_vec());
        at += d.len();
    }
    out
}

/// Index of a flat assignment vector in base `k`, first token most
/// significant.
pub fn encode_assignment(z: &[u32], k: usize) -> usize {
    z.iter().fold(0, |acc, &t| acc * k + t as usize)
}

/// Exact posterior over all `k^n` assignments, indexed by
/// [`encode_assignment`].
pub fn exact_posterior(k: usize, v: usize, alpha: f64, beta: f64, docs: &[Vec<u32>]) -> Vec<f64> {
    let n: usize = docs.iter().map(Vec::len).sum();
    let states = k.pow(n as u32);
    let mut logp = Vec::with_capacity(states);
    for idx in 0..states {
        let mut flat = vec![0u32; n];
        let mut rest = idx;
        for slot in flat.iter_mut().rev() {
            *slot = (rest % k) as u32;
            rest /= k;
        }
        logp.push(log_joint_oracle(k, v, alpha, beta, docs, &split(&flat, docs)));
    }
    let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logp.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn post(id: &str, tokens: &[&str], likes: u64, comments: u64, retweets: u64) -> Post {
    Post::new(
        id,
        tokens.iter().map(|t| t.to_string()).collect(),
        likes,
        comments,
        retweets,
    )
}

/// Unfiltered corpus over `posts`.
pub fn corpus(posts: &[Post], weighting: bool) -> WeightedCorpus {
    let vocab = build_vocabulary(posts).unwrap();
    build_weighted_corpus(posts, &vocab, weighting).unwrap()
}

pub fn config(k: usize, alpha: f64, beta: f64, iterations: usize, burn_in: usize, seed: u64) -> LdaConfig {
    LdaConfig {
        k,
        alpha,
        beta,
        iterations,
        burn_in,
        seed,
    }
}

/// Writes posts as JSONL with whitespace-joined text.
pub fn write_jsonl(posts: &[Post], path: &std::path::Path) {
    let mut out = String::new();
    for p in posts {
        let line = serde_json::json!({
            "id": p.id,
            "text": p.tokens.join(" "),
            "likes": p.likes,
            "comments": p.comments,
            "retweets": p.retweets,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}

pub fn write_labels(labels: &wbidf_lda::LabelSet, path: &std::path::Path) {
    let mut out = String::new();
    for (id, kws) in &labels.labels {
        out.push_str(&serde_json::json!({ "id": id, "keywords": kws }).to_string());
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}
