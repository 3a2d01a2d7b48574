//! Every two- and three-script subset of the synthetic classes, each reported
//! as a recognition table with an unweighted average.
//!
//! ```bash
//! cargo run --release -p scriptid --example bi_tri_script [order]
//! ```

use std::collections::BTreeMap;

use scriptid::classifier::{evaluate, train, TrainConfig};
use scriptid::features::extract_word_features;
use scriptid::imaging::normalize_to_square;
use scriptid::synth::{default_four_class, generate_corpus};
use scriptid::WordFeatures;

fn subsets(labels: &[String], k: usize) -> Vec<Vec<String>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..labels.len() {
        for mut rest in subsets(&labels[i + 1..], k - 1) {
            rest.insert(0, labels[i].clone());
            out.push(rest);
        }
    }
    out
}

fn main() -> scriptid::Result<()> {
    let order = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let mut train_set: BTreeMap<String, Vec<WordFeatures>> = BTreeMap::new();
    let mut test_set: BTreeMap<String, Vec<WordFeatures>> = BTreeMap::new();
    for (label, images) in generate_corpus(&default_four_class(), 64, 200, 42)? {
        for (i, img) in images.iter().enumerate() {
            let w = extract_word_features(&normalize_to_square(img, 64)?)?;
            let bucket = if i % 2 == 0 { &mut train_set } else { &mut test_set };
            bucket.entry(label.clone()).or_default().push(w);
        }
    }
    let labels: Vec<String> = train_set.keys().cloned().collect();
    let config = TrainConfig {
        order,
        ..TrainConfig::default()
    };

    for k in [2, 3] {
        println!("== {k} scripts ==");
        for subset in subsets(&labels, k) {
            let pick = |m: &BTreeMap<String, Vec<WordFeatures>>| -> BTreeMap<String, Vec<WordFeatures>> {
                subset.iter().map(|l| (l.clone(), m[l].clone())).collect()
            };
            let (models, _) = train(&pick(&train_set), &config)?;
            let report = evaluate(&models, &pick(&test_set))?;
            println!("{}", report.to_table());
        }
    }
    Ok(())
}
