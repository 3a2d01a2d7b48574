//! Seeded synthetic word images built from straight strokes.
//!
//! Each class draws its strokes from a weighted mix of four orientations, so
//! classes differ in exactly the directional statistics the features measure.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::BinaryImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
    /// `/`: rises to the right.
    RightDiagonal,
    /// `\`: falls to the right.
    LeftDiagonal,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::Horizontal,
        Orientation::Vertical,
        Orientation::RightDiagonal,
        Orientation::LeftDiagonal,
    ];

    /// Unit step `(d_row, d_col)` along the stroke.
    fn step(self) -> (i64, i64) {
        match self {
            Orientation::Horizontal => (0, 1),
            Orientation::Vertical => (1, 0),
            Orientation::RightDiagonal => (-1, 1),
            Orientation::LeftDiagonal => (1, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthClassSpec {
    pub label: String,
    /// Weights in [`Orientation::ALL`] order.
    pub orientation_mix: [f64; 4],
    /// Inclusive range of strokes per image.
    pub strokes_per_image: (usize, usize),
    /// Inclusive range of stroke length as a fraction of the side.
    pub stroke_length: (f64, f64),
    /// Square brush width in pixels.
    pub thickness: usize,
}

impl SynthClassSpec {
    /// A class with `dominant` at weight 0.7 and 0.1 for each other orientation.
    pub fn dominant(label: &str, dominant: Orientation) -> Self {
        let mut mix = [0.1; 4];
        let idx = Orientation::ALL.iter().position(|&o| o == dominant).unwrap();
        mix[idx] = 0.7;
        Self {
            label: label.to_string(),
            orientation_mix: mix,
            strokes_per_image: (5, 12),
            stroke_length: (0.4, 0.9),
            thickness: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(format!("{}: {msg}", self.label)));
        if self.label.is_empty() {
            return bad("empty label".into());
        }
        if self.orientation_mix.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return bad("orientation weights must be non-negative".into());
        }
        let sum: f64 = self.orientation_mix.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("orientation weights sum to {sum}"));
        }
        let (lo, hi) = self.strokes_per_image;
        if lo < 1 || lo > hi {
            return bad(format!("stroke count range {lo}..={hi}"));
        }
        let (lo, hi) = self.stroke_length;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return bad(format!("stroke length range {lo}..={hi}"));
        }
        if self.thickness == 0 {
            return bad("thickness must be at least 1".into());
        }
        Ok(())
    }

    fn pick_orientation(&self, rng: &mut impl Rng) -> Orientation {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (o, w) in Orientation::ALL.iter().zip(self.orientation_mix) {
            acc += w;
            if u < acc {
                return *o;
            }
        }
        // u landed in the rounding gap above the cumulative sum
        let last = self.orientation_mix.iter().rposition(|&w| w > 0.0).unwrap();
        Orientation::ALL[last]
    }
}

fn draw_stroke(img: &mut BinaryImage, spec: &SynthClassSpec, rng: &mut impl Rng) {
    let side = img.rows() as i64;
    let orientation = spec.pick_orientation(rng);
    let frac = rng.gen_range(spec.stroke_length.0..=spec.stroke_length.1);
    let len = ((side as f64) * frac).round().max(1.0) as i64;
    let (cr, cc) = (rng.gen_range(0..side), rng.gen_range(0..side));
    let (dr, dc) = orientation.step();
    let thick = spec.thickness as i64;
    for s in -(len / 2)..(len - len / 2) {
        let (r0, c0) = (cr + s * dr, cc + s * dc);
        for r in r0..r0 + thick {
            for c in c0..c0 + thick {
                if (0..side).contains(&r) && (0..side).contains(&c) {
                    img.set(r as usize, c as usize, true);
                }
            }
        }
    }
}

/// `count` square images of the given side; never blank, never solid.
pub fn generate(spec: &SynthClassSpec, side: usize, count: usize, seed: u64) -> Result<Vec<BinaryImage>> {
    spec.validate()?;
    if side < 8 {
        return Err(Error::InvalidSpec(format!("side {side} is below 8")));
    }
    if count == 0 {
        return Err(Error::InvalidSpec("count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut img = BinaryImage::zeros(side, side)?;
        let strokes = rng.gen_range(spec.strokes_per_image.0..=spec.strokes_per_image.1);
        for _ in 0..strokes {
            draw_stroke(&mut img, spec, &mut rng);
        }
        let ink = img.ink_count();
        if ink > 0 && ink < side * side {
            out.push(img);
        }
    }
    Ok(out)
}

/// Horizontal-, vertical-, right-diagonal- and left-diagonal-dominant classes.
pub fn default_four_class() -> Vec<SynthClassSpec> {
    vec![
        SynthClassSpec::dominant("horizontal", Orientation::Horizontal),
        SynthClassSpec::dominant("vertical", Orientation::Vertical),
        SynthClassSpec::dominant("right_diagonal", Orientation::RightDiagonal),
        SynthClassSpec::dominant("left_diagonal", Orientation::LeftDiagonal),
    ]
}

/// Generates every class with its own label-derived stream.
pub fn generate_corpus(
    specs: &[SynthClassSpec],
    side: usize,
    per_class: usize,
    seed: u64,
) -> Result<BTreeMap<String, Vec<BinaryImage>>> {
    let mut out = BTreeMap::new();
    for spec in specs {
        let images = generate(spec, side, per_class, crate::derive_seed(seed, &spec.label))?;
        if out.insert(spec.label.clone(), images).is_some() {
            return Err(Error::InvalidSpec(format!("duplicate label {}", spec.label)));
        }
    }
    Ok(out)
}
