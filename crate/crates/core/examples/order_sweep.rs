//! Recognition rate against mixture order, for both frame layouts.
//!
//! ```bash
//! cargo run --release -p scriptid --example order_sweep
//! ```

use std::collections::BTreeMap;

use scriptid::classifier::{sweep_orders, sweep_table_csv, FrameModeling, TrainConfig};
use scriptid::features::extract_word_features;
use scriptid::imaging::normalize_to_square;
use scriptid::synth::{default_four_class, generate_corpus};
use scriptid::WordFeatures;

type Corpus = BTreeMap<String, Vec<WordFeatures>>;

fn split(side: usize) -> scriptid::Result<(Corpus, Corpus)> {
    let mut train = Corpus::new();
    let mut test = Corpus::new();
    for (label, images) in generate_corpus(&default_four_class(), side, 200, 42)? {
        for (i, img) in images.iter().enumerate() {
            let w = extract_word_features(&normalize_to_square(img, side)?)?;
            let bucket = if i % 2 == 0 { &mut train } else { &mut test };
            bucket.entry(label.clone()).or_default().push(w);
        }
    }
    Ok((train, test))
}

fn main() -> scriptid::Result<()> {
    let (train, test) = split(64)?;
    let orders = [1, 2, 4, 8, 16, 32, 64, 128];
    for frames in [FrameModeling::PerPosition, FrameModeling::Pooled] {
        let config = TrainConfig {
            frames,
            ..TrainConfig::default()
        };
        let results = sweep_orders(&train, &test, &orders, &config)?;
        println!("{frames:?}");
        for r in &results {
            let bar = "#".repeat((r.report.average_accuracy / 2.0) as usize);
            println!("  M={:<4} {:>6.2}% {bar}", r.order, r.report.average_accuracy);
        }
        if frames == FrameModeling::PerPosition {
            println!("\n{}", sweep_table_csv(&results));
        }
    }
    Ok(())
}
