//! Generate the four-class stroke corpus on disk and preview one word per class.
//!
//! ```bash
//! cargo run -p scriptid --example synth_corpus [out_dir] [per_class]
//! ```

use scriptid::dataset::write_corpus;
use scriptid::synth::{default_four_class, generate_corpus};

fn main() -> scriptid::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "synth_corpus".into());
    let per_class = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let specs = default_four_class();
    let corpus = generate_corpus(&specs, 32, per_class, 42)?;

    for spec in &specs {
        let img = &corpus[&spec.label][0];
        println!("{} (mix {:?})", spec.label, spec.orientation_mix);
        for r in 0..img.rows() {
            let line: String = (0..img.cols()).map(|c| if img.get(r, c) == 1 { '#' } else { '.' }).collect();
            println!("  {line}");
        }
    }
    let written = write_corpus(out.as_ref(), &corpus)?;
    println!("wrote {} images under {out}", written.len());
    Ok(())
}
