//! Word-level handwritten script identification.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`imaging`]: decode a word image, binarize it with Otsu's threshold and
//!    normalize it to a fixed `N x N` binary matrix.
//! 2. [`features`]: compute six directional-energy vectors (standard
//!    deviations along principal/upper/lower diagonals of the matrix and of its
//!    left-right mirror, plus per-row and per-column deviations).
//! 3. [`gmm`]: fit diagonal-covariance Gaussian mixtures with EM, by default
//!    one per script and frame position.
//! 4. [`classifier`]: score a word against every script model by average
//!    log-likelihood over its six feature frames and pick the best.
//!
//! [`synth`] generates reproducible stroke images with controlled directional
//! statistics, [`dataset`] handles the on-disk corpus layout and [`cli`] wires
//! it all behind the `scriptid` binary.

pub mod classifier;
pub mod cli;
pub mod dataset;
mod error;
pub mod features;
pub mod gmm;
pub mod imaging;
pub mod synth;

pub use classifier::{EvalReport, FrameModeling, ScriptModel, ScriptModelSet, TrainConfig};
pub use error::{Error, Result};
pub use features::WordFeatures;
pub use gmm::{EmConfig, FitReport, GmmModel};
pub use imaging::{BinaryImage, GrayImage, SquareMatrix};

/// Mixes a base seed with a label so per-class streams are independent of
/// which other classes are present.
pub(crate) fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, then a splitmix64 finalizer
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
