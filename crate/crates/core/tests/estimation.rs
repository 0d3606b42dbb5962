use proptest::prelude::*;

use cds_core::inference::{estimate_concurrence, sample_outcomes_on_stream};
use cds_core::io::parse_record_json;
use cds_core::observables::concurrence_vs_directionality;
use cds_core::{
    cesium_ratio, concurrence_from_couplings, emission_probabilities_analytic, error_scaling_study,
    max_directionality, peak_ratio, sample_outcomes, MeasurementRecord, SystemParams,
};

fn cs_at_ratio(r: f64) -> SystemParams {
    let g_a = 0.05;
    SystemParams::new(r * g_a, g_a, cesium_ratio() * g_a).unwrap()
}

#[test]
fn sampled_frequencies_match_probabilities() {
    let probs = emission_probabilities_analytic(&cs_at_ratio(0.3)).unwrap();
    let n = 2_000_000u64;
    let rec = sample_outcomes(&probs, n, 12).unwrap();
    assert_eq!(rec.n_a + rec.n_b + rec.n_dark, n);
    for (count, p) in [
        (rec.n_a, probs.p_a),
        (rec.n_b, probs.p_b),
        (rec.n_dark, probs.p_dark),
    ] {
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (count as f64 - n as f64 * p).abs() < 5.0 * sd,
            "{count} vs {p}"
        );
    }
}

#[test]
fn estimates_concentrate_on_the_true_concurrence() {
    let params = cs_at_ratio(0.5);
    let probs = emission_probabilities_analytic(&params).unwrap();
    let truth = concurrence_from_couplings(&params).value;
    let r_a = cesium_ratio();
    let reps = 40;
    let mean: f64 = (0..reps)
        .map(|j| {
            let rec = sample_outcomes_on_stream(&probs, 1_000_000, 3, j).unwrap();
            cds_core::estimate_from_record(&rec, r_a).unwrap().c_hat
        })
        .sum::<f64>()
        / reps as f64;
    assert!((mean - truth).abs() < 1e-3, "{mean} vs {truth}");
}

// At the C maximum the first-order term vanishes, so the spread of C_hat
// falls like sigma_D^2 ~ 1/n rather than 1/sqrt(n).
#[test]
fn spread_at_exact_peak_falls_like_one_over_n() {
    let params = cs_at_ratio(peak_ratio(cesium_ratio()));
    let res = error_scaling_study(&params, &[10_000, 100_000, 1_000_000], 100, 21).unwrap();
    let p = res.fit.unwrap().exponent;
    assert!((-1.2..-0.85).contains(&p), "exponent {p}");
}

#[test]
fn spread_away_from_peak_falls_like_inverse_sqrt_n() {
    let res = error_scaling_study(&cs_at_ratio(0.5), &[1_000, 10_000, 100_000], 200, 8).unwrap();
    let p = res.fit.unwrap().exponent;
    assert!((p + 0.5).abs() < 0.06, "exponent {p}");
}

proptest! {
    #[test]
    fn record_json_round_trips(n_a in 0u64..1_000_000_000, n_b in 0u64..1_000_000_000,
                               n_dark in 0u64..1_000_000, seed: u64, stream: u64) {
        let mut rec = MeasurementRecord::from_counts(n_a, n_b, n_dark).unwrap();
        rec.seed = seed;
        rec.stream = stream;
        let text = serde_json::to_string(&rec).unwrap();
        prop_assert_eq!(parse_record_json(&text).unwrap(), rec);
    }

    #[test]
    fn interval_brackets_point_estimate(frac in 0.01f64..1.0, sigma in 0.0f64..0.2) {
        let r_a = cesium_ratio();
        let d = frac * max_directionality(r_a);
        let e = estimate_concurrence(d, sigma, r_a).unwrap();
        prop_assert_eq!(e.c_hat, concurrence_vs_directionality(d, r_a).unwrap());
        prop_assert!(0.0 <= e.c_interval.0 && e.c_interval.0 <= e.c_hat);
        prop_assert!(e.c_hat <= e.c_interval.1 && e.c_interval.1 <= 1.0);
    }
}
