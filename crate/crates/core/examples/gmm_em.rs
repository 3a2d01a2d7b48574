//! Fit a diagonal Gaussian mixture to a two-blob cloud and watch EM climb.
//!
//! ```bash
//! cargo run -p scriptid --example gmm_em [order]
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use scriptid::gmm::{fit, EmConfig};

fn main() -> scriptid::Result<()> {
    let order = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let blobs = [([-1.0, 0.5], 0.9), ([1.5, -0.5], 1.3)];
    let data: Vec<Vec<f64>> = (0..400)
        .map(|i| {
            let (centre, sd) = blobs[i % 2];
            let noise = Normal::new(0.0, sd).unwrap();
            centre.iter().map(|c| c + noise.sample(&mut rng)).collect()
        })
        .collect();

    let (model, report) = fit(&data, order, 5, &EmConfig::default())?;
    println!(
        "{} M-steps, converged: {}, rescues: {}",
        report.iterations, report.converged, report.rescues
    );
    for (i, ll) in report.log_likelihood_trace.iter().enumerate() {
        println!("  step {i:>3}: total log-likelihood {ll:.6}");
    }
    for i in 0..model.order() {
        println!(
            "component {i}: weight {:.3}, mean {:.3?}, variance {:.3?}",
            model.weights()[i],
            model.means()[i],
            model.variances()[i]
        );
    }
    println!("average log-likelihood {:.4}", model.avg_log_likelihood(&data)?);
    Ok(())
}
