//! Runs LDA, IDF-LDA and WBIDF-LDA on planted-topic corpora and prints the
//! comparison table for each seed.
//!
//! cargo run --release -p wbidf-lda --example synthetic_comparison -- [seeds] [iterations] [idf_min]

use std::time::Instant;

use wbidf_lda::build_vocabulary;
use wbidf_lda::generate_synthetic;
use wbidf_lda::pipeline::{compare_variants, PipelineConfig};
use wbidf_lda::SyntheticSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.first().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let iterations: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(300);
    let idf_min: f64 = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(2.5);

    for seed in 0..seeds {
        let (posts, labels) = generate_synthetic(&SyntheticSpec::benchmark(seed))?;
        let vocab = build_vocabulary(&posts)?;
        let config = PipelineConfig {
            k: 10,
            n_per_topic: 8,
            idf_min: Some(idf_min),
            iterations,
            burn_in: iterations / 3,
            seed,
            ..PipelineConfig::default()
        };
        let start = Instant::now();
        let (outcomes, table) = compare_variants(&posts, &vocab, &config, &labels)?;
        println!("seed {seed} ({:.1}s)", start.elapsed().as_secs_f64());
        for o in &outcomes {
            println!(
                "  {:<14} V {:>6} -> {:>5}  replicas {:>6}  tokens {:>7}",
                o.variant.name, o.stats.vocab_before, o.stats.vocab_after, o.stats.total_replicas, o.stats.total_tokens
            );
        }
        if std::env::var_os("SHOW_TOPICS").is_some() {
            for o in &outcomes {
                print!("{}", o.topics.to_text());
            }
        }
        print!("{}", table.to_text());
    }
    Ok(())
}
