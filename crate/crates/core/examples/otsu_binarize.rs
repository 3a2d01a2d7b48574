//! Binarize a grayscale image with Otsu's threshold and write the ink mask.
//!
//! ```bash
//! cargo run -p scriptid --example otsu_binarize [input.pgm] [output.pgm]
//! ```
//!
//! Without arguments a noisy two-tone test card is generated in memory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scriptid::imaging::{binarize, load_gray, otsu_threshold, save_pgm};
use scriptid::GrayImage;

fn test_card() -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (rows, cols) = (24, 48);
    let pixels = (0..rows * cols)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            let ink = (8..16).contains(&r) && c % 6 < 3;
            let base: u8 = if ink { 40 } else { 210 };
            base.saturating_add(rng.gen_range(0..40))
        })
        .collect();
    GrayImage::new(rows, cols, pixels).unwrap()
}

fn main() -> scriptid::Result<()> {
    let mut args = std::env::args().skip(1);
    let img = match args.next() {
        Some(path) => load_gray(path)?,
        None => test_card(),
    };
    let t = otsu_threshold(&img)?;
    let mask = binarize(&img, t);
    println!(
        "{}x{} image, threshold {t}, {} of {} pixels are ink",
        img.rows(),
        img.cols(),
        mask.ink_count(),
        img.pixels().len()
    );
    if mask.cols() <= 80 {
        for r in 0..mask.rows() {
            let line: String = (0..mask.cols()).map(|c| if mask.get(r, c) == 1 { '#' } else { '.' }).collect();
            println!("{line}");
        }
    }
    if let Some(out) = args.next() {
        save_pgm(&mask.to_gray(), &out)?;
        println!("mask written to {out}");
    }
    Ok(())
}
