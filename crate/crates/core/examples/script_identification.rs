//! End-to-end run on the synthetic four-class corpus: generate, split 50/50,
//! train one mixture per class and print the confusion table.
//!
//! ```bash
//! cargo run --release -p scriptid --example script_identification [order]
//! ```

use std::collections::BTreeMap;

use scriptid::classifier::{evaluate, train, TrainConfig};
use scriptid::features::extract_word_features;
use scriptid::imaging::normalize_to_square;
use scriptid::synth::{default_four_class, generate_corpus};
use scriptid::WordFeatures;

const SIDE: usize = 64;

fn run_example(order: usize) -> scriptid::Result<f64> {
    let corpus = generate_corpus(&default_four_class(), SIDE, 200, 42)?;
    let mut train_set: BTreeMap<String, Vec<WordFeatures>> = BTreeMap::new();
    let mut test_set: BTreeMap<String, Vec<WordFeatures>> = BTreeMap::new();
    for (label, images) in &corpus {
        for (i, img) in images.iter().enumerate() {
            let words = extract_word_features(&normalize_to_square(img, SIDE)?)?;
            let bucket = if i % 2 == 0 { &mut train_set } else { &mut test_set };
            bucket.entry(label.clone()).or_default().push(words);
        }
    }

    let config = TrainConfig {
        order,
        ..TrainConfig::default()
    };
    let (models, report) = train(&train_set, &config)?;
    for (label, fits) in &report.fits {
        let iterations: Vec<usize> = fits.iter().map(|f| f.iterations).collect();
        println!("{label:>15}: EM iterations per frame model {iterations:?}");
    }
    let eval = evaluate(&models, &test_set)?;
    println!("\n{}", eval.to_csv());
    print!("{}", eval.to_table());
    Ok(eval.average_accuracy)
}

fn main() -> scriptid::Result<()> {
    let order = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    run_example(order)?;
    Ok(())
}
