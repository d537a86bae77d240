mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::*;
use wbidf_lda::eval::detected_keywords;
use wbidf_lda::pipeline::prepare_corpus;
use wbidf_lda::{
    build_vocabulary, fit, generate_synthetic, log_joint, score, GibbsSampler, LdaConfig, Post, SamplerState,
    SyntheticSpec, TopicSelection, WeightedCorpus,
};

/// Two single-token documents over disjoint terms. The exact posterior puts
/// the tokens in different topics with high probability, so a fitted model's
/// topics have different top words. Averaging over sweeps mixes the two
/// label-swapped modes, so the claim is checked per sample.
#[test]
fn disjoint_single_token_docs_split_across_topics() {
    let posts = vec![post("a", &["a"], 0, 0, 0), post("b", &["b"], 0, 0, 0)];
    let corpus = corpus(&posts, false);
    let base = LdaConfig::new(2);
    let exact = exact_posterior(2, 2, base.alpha, base.beta, &[vec![0], vec![1]]);
    // states 01 and 10
    let p_distinct = exact[1] + exact[2];
    assert!(p_distinct > 0.95, "{p_distinct}");

    let sweeps = 20_000;
    let mut sampler = GibbsSampler::new(&corpus, &base.clone().with_sweeps(sweeps + 1, 100)).unwrap();
    for _ in 0..100 {
        sampler.sweep();
    }
    let mut distinct = 0;
    for _ in 0..sweeps {
        sampler.sweep();
        let z = sampler.state().assignments();
        distinct += (z[0] != z[1]) as usize;
    }
    let freq = distinct as f64 / sweeps as f64;
    assert!((freq - p_distinct).abs() < 0.02, "sampled {freq}, exact {p_distinct}");

    // a model estimated from one retained sweep keeps the sampled labeling
    let seeds = 400;
    let split = (0..seeds)
        .filter(|&seed| {
            let model = fit(&corpus, &base.clone().with_sweeps(50, 49).with_seed(seed)).unwrap();
            let argmax = |t: usize| {
                if model.phi_row(t)[0] >= model.phi_row(t)[1] {
                    0
                } else {
                    1
                }
            };
            argmax(0) != argmax(1)
        })
        .count();
    let frac = split as f64 / seeds as f64;
    assert!(
        (frac - p_distinct).abs() < 0.04,
        "argmax differs in {frac} of fits, exact {p_distinct}"
    );
}

/// (k, v, alpha, beta, per-document terms, per-document topics)
type Instance = (usize, usize, f64, f64, Vec<Vec<u32>>, Vec<Vec<u32>>);

fn arb_instance() -> impl Strategy<Value = Instance> {
    (1usize..5, 1usize..7, 0.01f64..5.0, 0.001f64..2.0).prop_flat_map(|(k, v, alpha, beta)| {
        let doc = (1usize..8).prop_flat_map(move |len| {
            (
                proptest::collection::vec(0..v as u32, len),
                proptest::collection::vec(0..k as u32, len),
            )
        });
        proptest::collection::vec(doc, 1..5).prop_map(move |docs| {
            let (terms, topics): (Vec<_>, Vec<_>) = docs.into_iter().unzip();
            (k, v, alpha, beta, terms, topics)
        })
    })
}

proptest! {
    #[test]
    fn log_joint_matches_rising_factorial_oracle((k, v, alpha, beta, docs, z) in arb_instance()) {
        let state = SamplerState::from_assignments(k, v, &docs, &z).unwrap();
        let config = config(k, alpha, beta, 2, 1, 0);
        let ours = log_joint(&state, &config).unwrap();
        let oracle = log_joint_oracle(k, v, alpha, beta, &docs, &z);
        prop_assert!((ours - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), "{ours} vs {oracle}");
    }

    #[test]
    fn fitted_rows_are_positive_distributions(
        docs in proptest::collection::vec(proptest::collection::vec(0u8..6, 1..6), 1..5),
        replicate in proptest::collection::vec(0u64..20, 5),
        k in 1usize..5,
        seed in 0u64..1000,
    ) {
        let posts: Vec<Post> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| Post::new(format!("p{i}"), d.iter().map(|t| format!("t{t}")).collect(), replicate[i], 0, 0))
            .collect();
        let model = fit(&corpus(&posts, true), &LdaConfig::new(k).with_sweeps(20, 10).with_seed(seed)).unwrap();
        for t in 0..k {
            let row = model.phi_row(t);
            prop_assert!(row.iter().all(|&p| p > 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        for d in 0..model.n_docs() {
            let row = model.theta_row(d);
            prop_assert!(row.iter().all(|&p| p > 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

fn planted(spec: &SyntheticSpec, weighting: bool) -> (WeightedCorpus, wbidf_lda::LabelSet) {
    let (posts, labels) = generate_synthetic(spec).unwrap();
    let vocab = build_vocabulary(&posts).unwrap();
    let upper = wbidf_lda::filter::default_idf_max(vocab.n_docs());
    let (corpus, _) = prepare_corpus(&posts, &vocab, Some((2.5, upper)), usize::MAX, weighting).unwrap();
    (corpus, labels)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

#[test]
fn log_joint_trends_upward() {
    let spec = SyntheticSpec {
        docs: 600,
        ..SyntheticSpec::benchmark(4)
    };
    let (corpus, _) = planted(&spec, true);
    let config = LdaConfig::new(10).with_sweeps(200, 100).with_seed(4);
    let mut sampler = GibbsSampler::new(&corpus, &config).unwrap();
    let mut trace = Vec::new();
    for _ in 0..config.iterations {
        sampler.sweep();
        trace.push(log_joint(sampler.state(), &config).unwrap());
    }
    let tenth = trace.len() / 10;
    let (early, late) = (
        median(trace[..tenth].to_vec()),
        median(trace[trace.len() - tenth..].to_vec()),
    );
    assert!(late >= early, "early {early}, late {late}");
}

fn recall(corpus: &WeightedCorpus, labels: &wbidf_lda::LabelSet, seed: u64) -> f64 {
    let model = fit(corpus, &LdaConfig::new(10).with_sweeps(300, 100).with_seed(seed)).unwrap();
    let detected: BTreeSet<String> = detected_keywords(&model, TopicSelection::All, 8);
    score(&detected, labels).unwrap().recall
}

#[test]
fn doubling_replication_still_recovers_planted_keywords() {
    let spec = SyntheticSpec {
        docs: 1000,
        ..SyntheticSpec::benchmark(12)
    };
    let (corpus, labels) = planted(&spec, true);
    let mut doubled = corpus.clone();
    for doc in &mut doubled.docs {
        doc.replication *= 2;
    }
    assert_eq!(doubled.total_replicas(), 2 * corpus.total_replicas());
    let (once, twice) = (recall(&corpus, &labels, 1), recall(&doubled, &labels, 1));
    assert!(once >= 0.8 && twice >= 0.8, "recall {once} vs {twice} after doubling");
}

#[test]
fn noiseless_corpus_recovers_almost_every_keyword() {
    for seed in 0..3 {
        let spec = SyntheticSpec {
            docs: 1000,
            noise_ratio: 0.0,
            ..SyntheticSpec::benchmark(seed)
        };
        let (corpus, labels) = planted(&spec, true);
        let r = recall(&corpus, &labels, seed);
        assert!(r >= 0.9, "seed {seed}: recall {r}");
    }
}
