//! Print the six directional-energy vectors of a word image.
//!
//! ```bash
//! cargo run -p scriptid --example word_features [word.pgm] [side]
//! ```
//!
//! With no image, a single synthetic vertical-stroke word is used.

use scriptid::features::extract_word_features;
use scriptid::imaging::{load_word_matrix, normalize_to_square};
use scriptid::synth::{default_four_class, generate};

const NAMES: [&str; 6] = [
    "f1 principal + upper diagonals",
    "f2 lower diagonals",
    "f3 mirrored principal + upper",
    "f4 mirrored lower",
    "f5 rows",
    "f6 columns",
];

fn main() -> scriptid::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next();
    let side = args.next().and_then(|s| s.parse().ok()).unwrap_or(16);
    let matrix = match path {
        Some(p) => load_word_matrix(p, side)?,
        None => {
            let spec = &default_four_class()[1];
            let img = generate(spec, 48, 1, 3)?.remove(0);
            normalize_to_square(&img, side)?
        }
    };
    let words = extract_word_features(&matrix)?;
    for (i, name) in NAMES.iter().enumerate() {
        let v = words.f(i + 1);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        println!("{name:<32} mean {mean:.4}");
    }
    println!();
    print!("{}", words.to_csv());
    Ok(())
}
