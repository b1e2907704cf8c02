//! Calibration pilots. Ignored by default; run with
//! `cargo test --test pilot -- --ignored --nocapture` to re-derive the
//! frozen constants used by the acceptance suite.

use sigmin_core::ensembles::EntryDistribution;
use sigmin_core::nets::{
    structured_fraction_at, unstructured_fraction_experiment, LatticeSpec,
    UnstructuredOptions,
};
use sigmin_core::rng::SeedSpec;
use sigmin_core::sphere::SphereParams;

/// Structured-fraction scan over n: prints the observed fractions that the
/// acceptance thresholds were frozen against.
#[test]
#[ignore]
fn lattice_fraction_pilot() {
    let params = SphereParams::new(0.1, 0.2).unwrap();
    for (n, samples) in [(8usize, 600usize), (10, 400), (12, 600), (14, 200)] {
        let spec = LatticeSpec::uniform(0.01, n).unwrap();
        let laws = vec![EntryDistribution::signed_bernoulli(0.5).unwrap(); n];
        let opts = UnstructuredOptions {
            grid_points: 20_000,
            grid_span: 1e4,
            mc_samples: 0,
            // Ball-to-cube volume ratio drops below 1e-4 past n = 12.
            acceptance_floor: 1e-5,
        };
        let start = std::time::Instant::now();
        let report = unstructured_fraction_experiment(
            &spec,
            &params,
            &laws,
            0.03,
            0.05,
            samples,
            SeedSpec::new(900 + n as u64, 0),
            &opts,
        )
        .unwrap();
        let hits = report.rlcd_values.iter().filter(|v| v.is_finite()).count();
        println!(
            "n = {n:2}: fraction {:.5} ({hits}/{samples} structured), threshold {}, \
             hypothesis_ok {}, elapsed {:.1?}",
            report.fraction,
            report.threshold,
            report.hypothesis_ok,
            start.elapsed()
        );
        for (k, v) in report.rlcd_values.iter().enumerate() {
            if v.is_finite() {
                println!("    sample {k}: rlcd = {v:.4}");
            }
        }
        // Re-read the same values at a lower threshold.
        println!(
            "    fraction below 50: {:.5}",
            structured_fraction_at(&report.rlcd_values, 50.0)
        );
    }
}
