//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! Each [`WeightedDoc`](crate::filter::WeightedDoc) is expanded into
//! `replication` independent copies before sampling; the copies share no
//! state. Counts are stored in flat row-major arrays:
//!
//! * `n_dk[d * K + k]`: tokens of replicated document `d` assigned to topic `k`
//! * `n_wk[w * K + k]`: occurrences of term `w` assigned to topic `k`
//! * `n_k[k]`: tokens assigned to topic `k`
//!
//! A token at position `i` of document `d` with term `w` is resampled from
//!
//! ```text
//! p(z_i = k | rest) ∝ (n_dk + α) (n_wk + β) / (n_k + Vβ)
//! ```
//!
//! with the token's own assignment removed from the counts. After
//! `burn_in` sweeps the counts are summed over every remaining sweep and
//! the averages give
//!
//! ```text
//! φ[k][w] = (n̄_wk + β) / (n̄_k + Vβ)
//! θ[d][k] = mean over replicas of (n̄_dk + α) / (len_d + Kα)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{TermId, Vocabulary};
use crate::error::{Error, Result};
use crate::filter::WeightedCorpus;

/// Name of the random generator recorded alongside fitted models.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seeded with seed_from_u64";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// Conventional Gibbs-LDA defaults for `k` topics: α = 50/k, β = 0.01,
    /// 1000 sweeps of which 200 are burn-in.
    pub fn new(k: usize) -> Self {
        LdaConfig {
            k,
            alpha: 50.0 / k.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sweeps(mut self, iterations: usize, burn_in: usize) -> Self {
        self.iterations = iterations;
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.k > u32::MAX as usize {
            return Err(Error::Config("k is too large".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        Ok(())
    }
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig::new(30)
    }
}

/// Topic assignments and count matrices over the replicated corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerState {
    k: usize,
    v: usize,
    doc_offsets: Vec<usize>,
    words: Vec<TermId>,
    z: Vec<u32>,
    n_dk: Vec<u32>,
    n_wk: Vec<u32>,
    n_k: Vec<u32>,
}

impl SamplerState {
    /// Builds a state from explicit per-document terms and assignments,
    /// deriving all counts from them.
    pub fn from_assignments(k: usize, v: usize, docs: &[Vec<TermId>], z: &[Vec<u32>]) -> Result<Self> {
        if docs.len() != z.len() {
            return Err(Error::InconsistentState(
                "documents and assignments differ in length".into(),
            ));
        }
        let mut state = SamplerState::empty(k, v);
        for (terms, topics) in docs.iter().zip(z) {
            if terms.len() != topics.len() {
                return Err(Error::InconsistentState(
                    "document and assignment lengths differ".into(),
                ));
            }
            if let Some(&w) = terms.iter().find(|&&w| w as usize >= v) {
                return Err(Error::InconsistentState(format!("term id {w} out of range")));
            }
            if let Some(&t) = topics.iter().find(|&&t| t as usize >= k) {
                return Err(Error::InconsistentState(format!("topic {t} out of range")));
            }
            state.push_doc(terms, topics.iter().copied());
        }
        Ok(state)
    }

    fn empty(k: usize, v: usize) -> Self {
        SamplerState {
            k,
            v,
            doc_offsets: vec![0],
            words: Vec::new(),
            z: Vec::new(),
            n_dk: Vec::new(),
            n_wk: vec![0; v * k],
            n_k: vec![0; k],
        }
    }

    fn push_doc(&mut self, terms: &[TermId], topics: impl IntoIterator<Item = u32>) {
        let d = self.n_docs();
        self.n_dk.extend(std::iter::repeat_n(0, self.k));
        for (&w, t) in terms.iter().zip(topics) {
            let t = t as usize;
            self.words.push(w);
            self.z.push(t as u32);
            self.n_dk[d * self.k + t] += 1;
            self.n_wk[w as usize * self.k + t] += 1;
            self.n_k[t] += 1;
        }
        self.doc_offsets.push(self.words.len());
    }

    pub fn n_topics(&self) -> usize {
        self.k
    }

    pub fn n_terms(&self) -> usize {
        self.v
    }

    /// Number of replicated documents.
    pub fn n_docs(&self) -> usize {
        self.doc_offsets.len() - 1
    }

    pub fn n_tokens(&self) -> usize {
        self.words.len()
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.doc_offsets[d + 1] - self.doc_offsets[d]
    }

    /// Topic of every token, documents concatenated in order.
    pub fn assignments(&self) -> &[u32] {
        &self.z
    }

    pub fn doc_assignments(&self, d: usize) -> &[u32] {
        &self.z[self.doc_offsets[d]..self.doc_offsets[d + 1]]
    }

    pub fn doc_terms(&self, d: usize) -> &[TermId] {
        &self.words[self.doc_offsets[d]..self.doc_offsets[d + 1]]
    }

    pub fn n_dk(&self, d: usize, k: usize) -> u32 {
        self.n_dk[d * self.k + k]
    }

    pub fn n_kw(&self, k: usize, w: TermId) -> u32 {
        self.n_wk[w as usize * self.k + k]
    }

    pub fn n_k(&self, k: usize) -> u32 {
        self.n_k[k]
    }

    /// Checks the three count-conservation identities.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.k;
        let mut per_topic = vec![0u64; k];
        for row in self.n_wk.chunks_exact(k) {
            for (acc, &c) in per_topic.iter_mut().zip(row) {
                *acc += c as u64;
            }
        }
        for (t, (&sum, &nk)) in per_topic.iter().zip(&self.n_k).enumerate() {
            if sum != nk as u64 {
                return Err(Error::InconsistentState(format!(
                    "topic {t}: word counts sum to {sum} but n_k = {nk}"
                )));
            }
        }
        for d in 0..self.n_docs() {
            let sum: u64 = self.n_dk[d * k..(d + 1) * k].iter().map(|&c| c as u64).sum();
            if sum != self.doc_len(d) as u64 {
                return Err(Error::InconsistentState(format!(
                    "document {d}: topic counts sum to {sum} but length is {}",
                    self.doc_len(d)
                )));
            }
        }
        let total: u64 = self.n_k.iter().map(|&c| c as u64).sum();
        if total != self.words.len() as u64 {
            return Err(Error::InconsistentState(format!(
                "topic totals sum to {total} but corpus has {} tokens",
                self.words.len()
            )));
        }
        Ok(())
    }
}

/// Log of the collapsed joint `p(w, z | α, β)` with θ and φ integrated out.
pub fn log_joint(state: &SamplerState, config: &LdaConfig) -> Result<f64> {
    state.check_invariants()?;
    if state.k != config.k {
        return Err(Error::InconsistentState(format!(
            "state has {} topics but config has {}",
            state.k, config.k
        )));
    }
    let (k, v) = (state.k, state.v);
    let (alpha, beta) = (config.alpha, config.beta);
    let lg = libm::lgamma;

    let mut total = 0.0;
    // Document side: Π_d B(n_d + α) / B(α)
    let lg_alpha = lg(alpha);
    let lg_k_alpha = lg(k as f64 * alpha);
    for d in 0..state.n_docs() {
        for &c in &state.n_dk[d * k..(d + 1) * k] {
            if c > 0 {
                total += lg(c as f64 + alpha) - lg_alpha;
            }
        }
        total -= lg(state.doc_len(d) as f64 + k as f64 * alpha) - lg_k_alpha;
    }
    // Topic side: Π_k B(n_k + β) / B(β)
    let lg_beta = lg(beta);
    let lg_v_beta = lg(v as f64 * beta);
    for &c in &state.n_wk {
        if c > 0 {
            total += lg(c as f64 + beta) - lg_beta;
        }
    }
    for &nk in &state.n_k {
        total -= lg(nk as f64 + v as f64 * beta) - lg_v_beta;
    }
    Ok(total)
}

/// Collapsed Gibbs sampler over one replicated corpus.
pub struct GibbsSampler {
    config: LdaConfig,
    state: SamplerState,
    rng: ChaCha8Rng,
    /// Source document of every replicated document.
    replica_of: Vec<usize>,
    replication: Vec<u32>,
    doc_ids: Vec<String>,
    vocab: Vocabulary,
    sweeps: usize,
    retained: u64,
    sum_wk: Vec<u64>,
    sum_dk: Vec<u64>,
    // scratch
    cumulative: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl GibbsSampler {
    /// Expands the corpus and draws a uniformly random initial assignment.
    pub fn new(corpus: &WeightedCorpus, config: &LdaConfig) -> Result<Self> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let (k, v) = (config.k, corpus.vocab.len());
        let distinct = corpus.distinct_terms();
        if k > distinct {
            log::warn!("k = {k} exceeds the {distinct} distinct terms in the corpus; some topics will stay empty");
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut state = SamplerState::empty(k, v);
        let mut replica_of = Vec::new();
        for (orig, doc) in corpus.docs.iter().enumerate() {
            for _ in 0..doc.replication {
                let topics: Vec<u32> = (0..doc.doc.term_ids.len())
                    .map(|_| rng.random_range(0..k as u32))
                    .collect();
                state.push_doc(&doc.doc.term_ids, topics);
                replica_of.push(orig);
            }
        }
        state.check_invariants()?;

        let vbeta = v as f64 * config.beta;
        let inv_denom = state.n_k.iter().map(|&c| 1.0 / (c as f64 + vbeta)).collect();
        let n_rep = state.n_docs();
        Ok(GibbsSampler {
            config: config.clone(),
            rng,
            replica_of,
            replication: corpus.docs.iter().map(|d| d.replication).collect(),
            doc_ids: corpus.docs.iter().map(|d| d.doc.post_id.clone()).collect(),
            vocab: corpus.vocab.clone(),
            sweeps: 0,
            retained: 0,
            sum_wk: vec![0; v * k],
            sum_dk: vec![0; n_rep * k],
            cumulative: vec![0.0; k],
            inv_denom,
            state,
        })
    }

    pub fn state(&self) -> &SamplerState {
        &self.state
    }

    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    /// Sweeps completed so far.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Resamples every token once. Sweeps past `burn_in` are added to the
    /// running count sums.
    pub fn sweep(&mut self) {
        let k = self.config.k;
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let vbeta = self.state.v as f64 * beta;
        let SamplerState {
            doc_offsets,
            words,
            z,
            n_dk,
            n_wk,
            n_k,
            ..
        } = &mut self.state;
        let cumulative = &mut self.cumulative[..k];
        let inv_denom = &mut self.inv_denom[..k];

        for d in 0..doc_offsets.len() - 1 {
            let doc_counts = &mut n_dk[d * k..(d + 1) * k];
            for i in doc_offsets[d]..doc_offsets[d + 1] {
                let w = words[i] as usize;
                let old = z[i] as usize;
                let word_counts = &mut n_wk[w * k..(w + 1) * k];

                doc_counts[old] -= 1;
                word_counts[old] -= 1;
                n_k[old] -= 1;
                inv_denom[old] = 1.0 / (n_k[old] as f64 + vbeta);

                let mut total = 0.0;
                for t in 0..k {
                    total += (doc_counts[t] as f64 + alpha) * (word_counts[t] as f64 + beta) * inv_denom[t];
                    cumulative[t] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);

                z[i] = new as u32;
                doc_counts[new] += 1;
                word_counts[new] += 1;
                n_k[new] += 1;
                inv_denom[new] = 1.0 / (n_k[new] as f64 + vbeta);
            }
        }
        self.sweeps += 1;

        if cfg!(debug_assertions) {
            if let Err(e) = self.state.check_invariants() {
                panic!("count conservation violated after sweep {}: {e}", self.sweeps);
            }
        }
        if self.sweeps > self.config.burn_in {
            for (acc, &c) in self.sum_wk.iter_mut().zip(&self.state.n_wk) {
                *acc += c as u64;
            }
            for (acc, &c) in self.sum_dk.iter_mut().zip(&self.state.n_dk) {
                *acc += c as u64;
            }
            self.retained += 1;
        }
    }

    /// Runs the remaining sweeps up to `config.iterations`.
    pub fn run(&mut self) -> Result<()> {
        while self.sweeps < self.config.iterations {
            self.sweep();
        }
        self.state.check_invariants()
    }

    /// Builds φ and θ from the averaged post-burn-in counts.
    pub fn into_model(self) -> Result<LdaModel> {
        if self.retained == 0 {
            return Err(Error::Config("no post-burn-in sweeps were run".into()));
        }
        let (k, v) = (self.config.k, self.state.v);
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let s = self.retained as f64;

        let mut topic_sums = vec![0u64; k];
        for row in self.sum_wk.chunks_exact(k) {
            for (acc, &c) in topic_sums.iter_mut().zip(row) {
                *acc += c;
            }
        }
        let mut phi = vec![0.0; k * v];
        for t in 0..k {
            let denom = topic_sums[t] as f64 / s + v as f64 * beta;
            for w in 0..v {
                phi[t * v + w] = (self.sum_wk[w * k + t] as f64 / s + beta) / denom;
            }
        }

        let n_orig = self.replication.len();
        let mut theta = vec![0.0; n_orig * k];
        for (r, &orig) in self.replica_of.iter().enumerate() {
            let denom = self.state.doc_len(r) as f64 + k as f64 * alpha;
            let reps = self.replication[orig] as f64;
            for t in 0..k {
                theta[orig * k + t] += (self.sum_dk[r * k + t] as f64 / s + alpha) / denom / reps;
            }
        }

        Ok(LdaModel {
            config: self.config,
            vocab: self.vocab,
            doc_ids: self.doc_ids,
            replication: self.replication,
            phi,
            theta,
        })
    }
}

/// Runs the full chain on `corpus` and returns the fitted model.
pub fn fit(corpus: &WeightedCorpus, config: &LdaConfig) -> Result<LdaModel> {
    let mut sampler = GibbsSampler::new(corpus, config)?;
    sampler.run()?;
    sampler.into_model()
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Fitted topic-word and document-topic distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub config: LdaConfig,
    pub vocab: Vocabulary,
    /// Post id of each row of θ.
    pub doc_ids: Vec<String>,
    /// Replication count of each row of θ.
    pub replication: Vec<u32>,
    phi: Vec<f64>,
    theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    rng: String,
    config: LdaConfig,
    vocab: Vocabulary,
    doc_ids: Vec<String>,
    replication: Vec<u32>,
    phi: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
}

impl LdaModel {
    pub fn n_topics(&self) -> usize {
        self.config.k
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn phi_row(&self, topic: usize) -> &[f64] {
        let v = self.n_terms();
        &self.phi[topic * v..(topic + 1) * v]
    }

    pub fn theta_row(&self, doc: usize) -> &[f64] {
        let k = self.n_topics();
        &self.theta[doc * k..(doc + 1) * k]
    }

    /// Serializes the model as JSON. Floats are written in shortest
    /// round-trip form, so [`LdaModel::from_json`] restores them exactly.
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            rng: RNG_ALGORITHM.to_string(),
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            doc_ids: self.doc_ids.clone(),
            replication: self.replication.clone(),
            phi: (0..self.n_topics()).map(|t| self.phi_row(t).to_vec()).collect(),
            theta: (0..self.n_docs()).map(|d| self.theta_row(d).to_vec()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(json)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format version {} (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        let (k, v) = (file.config.k, file.vocab.len());
        if file.phi.len() != k || file.phi.iter().any(|r| r.len() != v) {
            return Err(Error::Model(format!("phi must be {k} x {v}")));
        }
        let n = file.doc_ids.len();
        if file.replication.len() != n || file.theta.len() != n || file.theta.iter().any(|r| r.len() != k) {
            return Err(Error::Model(format!("theta must be {n} x {k}")));
        }
        Ok(LdaModel {
            config: file.config,
            vocab: file.vocab,
            doc_ids: file.doc_ids,
            replication: file.replication,
            phi: file.phi.into_iter().flatten().collect(),
            theta: file.theta.into_iter().flatten().collect(),
        })
    }
}

/// The `n` most probable terms of `topic`, highest first; ties go to the
/// smaller term id. Asking for more terms than exist returns all of them.
pub fn top_words(model: &LdaModel, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
    if topic >= model.n_topics() {
        return Err(Error::Config(format!(
            "topic {topic} out of range (model has {} topics)",
            model.n_topics()
        )));
    }
    let row = model.phi_row(topic);
    let mut ids: Vec<usize> = (0..row.len()).collect();
    ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    Ok(ids
        .into_iter()
        .take(n)
        .map(|w| (model.vocab.term(w as TermId).to_string(), row[w]))
        .collect())
}

/// Corpus-level probability of each topic: the replication-weighted mean of
/// the θ rows.
pub fn topic_weights(model: &LdaModel) -> Vec<f64> {
    let k = model.n_topics();
    let mut weights = vec![0.0; k];
    let mut total = 0.0;
    for (d, &rep) in model.replication.iter().enumerate() {
        let r = rep as f64;
        total += r;
        for (acc, &p) in weights.iter_mut().zip(model.theta_row(d)) {
            *acc += r * p;
        }
    }
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    }
    weights
}

/// Topic ids ordered by corpus-level probability, highest first; ties keep
/// id order.
pub fn topic_rank(model: &LdaModel) -> Vec<usize> {
    let weights = topic_weights(model);
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, EncodedDoc, Post};
    use crate::filter::{build_weighted_corpus, WeightedDoc};

    fn corpus(docs: &[&[&str]]) -> WeightedCorpus {
        let posts: Vec<Post> = docs
            .iter()
            .enumerate()
            .map(|(i, words)| Post::new(i.to_string(), words.iter().map(|w| w.to_string()).collect(), 0, 0, 0))
            .collect();
        let vocab = build_vocabulary(&posts).unwrap();
        build_weighted_corpus(&posts, &vocab, false).unwrap()
    }

    fn model_from(phi: Vec<f64>, theta: Vec<f64>, k: usize, terms: &[&str], replication: Vec<u32>) -> LdaModel {
        let post = Post::new("v", terms.iter().map(|t| t.to_string()).collect(), 0, 0, 0);
        let vocab = build_vocabulary(&[post]).unwrap();
        let n = replication.len();
        LdaModel {
            config: LdaConfig::new(k),
            vocab,
            doc_ids: (0..n).map(|i| i.to_string()).collect(),
            replication,
            phi,
            theta,
        }
    }

    #[test]
    fn config_validation() {
        assert!(LdaConfig::default().validate().is_ok());
        assert_eq!(LdaConfig::default().k, 30);
        assert!((LdaConfig::new(10).alpha - 5.0).abs() < 1e-15);
        assert!(LdaConfig {
            k: 0,
            ..LdaConfig::new(1)
        }
        .validate()
        .is_err());
        assert!(LdaConfig {
            alpha: 0.0,
            ..LdaConfig::new(2)
        }
        .validate()
        .is_err());
        assert!(LdaConfig {
            beta: -1.0,
            ..LdaConfig::new(2)
        }
        .validate()
        .is_err());
        assert!(LdaConfig::new(2).with_sweeps(10, 10).validate().is_err());
    }

    #[test]
    fn single_topic_closed_form() {
        let c = corpus(&[&["a", "b", "a"], &["c", "a"], &["b"]]);
        let cfg = LdaConfig::new(1).with_sweeps(20, 5).with_seed(3);
        let m = fit(&c, &cfg).unwrap();
        let (t, v, beta) = (6.0, 3.0, cfg.beta);
        assert_eq!(
            m.phi_row(0),
            &[
                (3.0 + beta) / (t + v * beta),
                (2.0 + beta) / (t + v * beta),
                (1.0 + beta) / (t + v * beta)
            ]
        );
        for d in 0..3 {
            assert_eq!(m.theta_row(d), &[1.0]);
        }
        assert_eq!(topic_rank(&m), vec![0]);
    }

    #[test]
    fn replication_equals_literal_copies() {
        let base = corpus(&[&["a", "b", "c"], &["c", "d"]]);
        let mut replicated = base.clone();
        replicated.docs[0].replication = 3;
        let mut copies = base.clone();
        let x = copies.docs[0].clone();
        copies.docs.insert(1, x.clone());
        copies.docs.insert(1, x);

        let cfg = LdaConfig::new(3).with_sweeps(60, 10).with_seed(11);
        let mut a = GibbsSampler::new(&replicated, &cfg).unwrap();
        let mut b = GibbsSampler::new(&copies, &cfg).unwrap();
        for _ in 0..cfg.iterations {
            a.sweep();
            b.sweep();
            assert_eq!(a.state(), b.state());
        }
        let (ma, mb) = (a.into_model().unwrap(), b.into_model().unwrap());
        assert_eq!(ma.phi, mb.phi);
        // θ of the replicated doc is the mean of the three copies' rows
        for t in 0..3 {
            let mean = (mb.theta_row(0)[t] + mb.theta_row(1)[t] + mb.theta_row(2)[t]) / 3.0;
            assert!((ma.theta_row(0)[t] - mean).abs() < 1e-14);
        }
        assert_eq!(ma.theta_row(1), mb.theta_row(3));
    }

    #[test]
    fn seed_determinism_and_rows_normalized() {
        let c = corpus(&[&["a", "b", "a", "c"], &["c", "d", "e"], &["e", "a"], &["f"]]);
        let cfg = LdaConfig::new(4).with_sweeps(50, 10).with_seed(99);
        let m1 = fit(&c, &cfg).unwrap();
        let m2 = fit(&c, &cfg).unwrap();
        assert_eq!(m1, m2);
        for t in 0..4 {
            let row = m1.phi_row(t);
            assert!(row.iter().all(|&p| p > 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        for d in 0..m1.n_docs() {
            let row = m1.theta_row(d);
            assert!(row.iter().all(|&p| p > 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let other = fit(&c, &cfg.clone().with_seed(100)).unwrap();
        assert_ne!(m1.phi, other.phi);
    }

    #[test]
    fn more_topics_than_terms_still_valid() {
        let c = corpus(&[&["a"], &["b"]]);
        let m = fit(&c, &LdaConfig::new(5).with_sweeps(10, 2)).unwrap();
        for t in 0..5 {
            assert!((m.phi_row(t).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_corpus_rejected() {
        let mut c = corpus(&[&["a"]]);
        c.docs.clear();
        assert!(matches!(
            GibbsSampler::new(&c, &LdaConfig::new(2)),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn log_joint_forced_configuration_is_zero() {
        let state = SamplerState::from_assignments(1, 1, &[vec![0]], &[vec![0]]).unwrap();
        let cfg = LdaConfig::new(1);
        assert_eq!(log_joint(&state, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn log_joint_rejects_inconsistent_counts() {
        let mut state = SamplerState::from_assignments(2, 2, &[vec![0, 1]], &[vec![0, 1]]).unwrap();
        assert!(log_joint(&state, &LdaConfig::new(2)).is_ok());
        state.n_k[0] += 1;
        assert!(matches!(
            log_joint(&state, &LdaConfig::new(2)),
            Err(Error::InconsistentState(_))
        ));
        let mut state = SamplerState::from_assignments(2, 2, &[vec![0, 1]], &[vec![0, 1]]).unwrap();
        state.n_dk[0] += 1;
        assert!(state.check_invariants().is_err());
        assert!(SamplerState::from_assignments(2, 2, &[vec![0]], &[vec![2]]).is_err());
        assert!(SamplerState::from_assignments(2, 2, &[vec![5]], &[vec![0]]).is_err());
    }

    #[test]
    fn top_words_examples() {
        let m = model_from(vec![0.5, 0.3, 0.2], vec![1.0], 1, &["a", "b", "c"], vec![1]);
        assert_eq!(
            top_words(&m, 0, 2).unwrap(),
            vec![("a".to_string(), 0.5), ("b".to_string(), 0.3)]
        );
        assert_eq!(top_words(&m, 0, 10).unwrap().len(), 3);
        assert!(top_words(&m, 1, 1).is_err());

        let tie = model_from(vec![0.2, 0.4, 0.4], vec![1.0], 1, &["a", "b", "c"], vec![1]);
        let words: Vec<String> = top_words(&tie, 0, 3).unwrap().into_iter().map(|(w, _)| w).collect();
        assert_eq!(words, vec!["b", "c", "a"]);
    }

    #[test]
    fn topic_rank_examples() {
        let heavy_second = model_from(
            vec![0.5, 0.5, 0.5, 0.5],
            vec![0.1, 0.9, 0.1, 0.9],
            2,
            &["a", "b"],
            vec![1, 1],
        );
        assert_eq!(topic_rank(&heavy_second), vec![1, 0]);

        let uniform = model_from(vec![0.5; 6], vec![1.0 / 3.0; 6], 3, &["a", "b"], vec![1, 1]);
        assert_eq!(topic_rank(&uniform), vec![0, 1, 2]);

        // replication weighting: doc 1 (favoring topic 0) counts 4 times
        let weighted = model_from(vec![0.5; 4], vec![0.2, 0.8, 0.7, 0.3], 2, &["a", "b"], vec![1, 4]);
        assert_eq!(topic_rank(&weighted), vec![0, 1]);
    }

    #[test]
    fn model_json_round_trip_is_exact() {
        let c = corpus(&[&["a", "b", "a", "c"], &["c", "d", "e"], &["e", "a"]]);
        let m = fit(&c, &LdaConfig::new(3).with_sweeps(30, 5).with_seed(5)).unwrap();
        let json = m.to_json().unwrap();
        let back = LdaModel::from_json(&json).unwrap();
        assert_eq!(back, m);
        assert!(back.phi.iter().zip(&m.phi).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(back.to_json().unwrap(), json);

        let bumped = json.replacen("\"format_version\": 1", "\"format_version\": 9", 1);
        assert!(matches!(LdaModel::from_json(&bumped), Err(Error::Model(_))));
    }

    #[test]
    fn sampler_state_tracks_replicas() {
        let docs = vec![WeightedDoc {
            doc: EncodedDoc {
                post_id: "x".into(),
                term_ids: vec![0, 1],
            },
            popularity: 0,
            raw_weight: 2.0,
            replication: 2,
        }];
        let c = WeightedCorpus {
            docs,
            vocab: build_vocabulary(&[Post::new("x", vec!["a".into(), "b".into()], 0, 0, 0)]).unwrap(),
            weighting_enabled: true,
        };
        let s = GibbsSampler::new(&c, &LdaConfig::new(2)).unwrap();
        assert_eq!(s.state().n_docs(), 2);
        assert_eq!(s.state().n_tokens(), 4);
        assert_eq!(s.state().doc_terms(1), &[0, 1]);
    }
}
