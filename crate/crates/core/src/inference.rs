//! Concurrence inference from photon counts.
//!
//! Each run of the protocol starts with the QD excited and ends with one
//! photon in mode a, one in mode b, or none (trapped in the dark state).
//! Runs are drawn from a counter-based ChaCha stream addressed by
//! `(seed, stream, run index)`, so a record depends only on those inputs and
//! never on how the runs are split across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ratios_of, SystemParams};
use crate::observables::{
    concurrence_from_couplings, concurrence_slope, concurrence_vs_directionality,
    emission_probabilities_analytic, max_directionality, peak_directionality,
    EmissionProbabilities,
};

const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord")]
pub struct MeasurementRecord {
    pub n_a: u64,
    pub n_b: u64,
    pub n_dark: u64,
    pub n_runs: u64,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Deserialize)]
struct RawRecord {
    n_a: u64,
    n_b: u64,
    #[serde(default)]
    n_dark: u64,
    n_runs: Option<u64>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    stream: u64,
}

impl TryFrom<RawRecord> for MeasurementRecord {
    type Error = Error;

    fn try_from(raw: RawRecord) -> Result<Self> {
        let mut rec = MeasurementRecord::from_counts(raw.n_a, raw.n_b, raw.n_dark)?;
        if let Some(n) = raw.n_runs {
            if n != rec.n_runs {
                return Err(Error::InvalidInput(format!(
                    "n_a + n_b + n_dark = {} but n_runs = {n}",
                    rec.n_runs
                )));
            }
        }
        rec.seed = raw.seed;
        rec.stream = raw.stream;
        Ok(rec)
    }
}

impl MeasurementRecord {
    /// Record from observed counts (seed and stream zero).
    pub fn from_counts(n_a: u64, n_b: u64, n_dark: u64) -> Result<Self> {
        let n_runs = n_a
            .checked_add(n_b)
            .and_then(|s| s.checked_add(n_dark))
            .ok_or_else(|| Error::InvalidInput("count overflow".into()))?;
        Ok(Self {
            n_a,
            n_b,
            n_dark,
            n_runs,
            seed: 0,
            stream: 0,
        })
    }

    pub fn n_emitting(&self) -> u64 {
        self.n_a + self.n_b
    }

    /// Independent estimate of the dark-state probability.
    pub fn dark_fraction(&self) -> Option<f64> {
        (self.n_runs > 0).then(|| self.n_dark as f64 / self.n_runs as f64)
    }
}

fn threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else {
        // saturating float-to-int cast; p in [0, 1)
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

pub fn sample_outcomes(
    probs: &EmissionProbabilities,
    n_runs: u64,
    seed: u64,
) -> Result<MeasurementRecord> {
    sample_outcomes_on_stream(probs, n_runs, seed, 0)
}

/// Like [`sample_outcomes`] on an independent stream of the same seed.
pub fn sample_outcomes_on_stream(
    probs: &EmissionProbabilities,
    n_runs: u64,
    seed: u64,
    stream: u64,
) -> Result<MeasurementRecord> {
    probs.check_normalized()?;
    if n_runs == 0 {
        return Err(Error::InvalidInput("n_runs must be at least 1".into()));
    }
    let thr_a = threshold(probs.p_a);
    let thr_ab = threshold(probs.p_a + probs.p_b);
    let never_dark = probs.p_dark == 0.0;

    let n_chunks = n_runs.div_ceil(CHUNK);
    let (n_a, n_b) = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(n_runs - start);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            // two 32-bit words per run
            rng.set_word_pos(u128::from(start) * 2);
            let (mut a, mut b) = (0u64, 0u64);
            for _ in 0..len {
                let x = rng.next_u64();
                if x < thr_a {
                    a += 1;
                } else if never_dark || x < thr_ab {
                    b += 1;
                }
            }
            (a, b)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));

    Ok(MeasurementRecord {
        n_a,
        n_b,
        n_dark: n_runs - n_a - n_b,
        n_runs,
        seed,
        stream,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalityEstimate {
    pub d_hat: f64,
    /// Standard error of the mean of the +-1 outcomes.
    pub sigma_d: f64,
    pub n_emitting: u64,
}

/// Mean of the per-photon outcomes (+1 for mode b, -1 for mode a) and its
/// standard error `s / sqrt(n)`, with `s` the sample standard deviation.
/// Dark runs are excluded.
pub fn estimate_directionality(record: &MeasurementRecord) -> Result<DirectionalityEstimate> {
    let n = record.n_emitting();
    if n < 2 {
        return Err(Error::InsufficientCounts { n_emitting: n });
    }
    let nf = n as f64;
    let d_hat = (record.n_b as f64 - record.n_a as f64) / nf;
    let ss = record.n_a as f64 * (-1.0 - d_hat).powi(2) + record.n_b as f64 * (1.0 - d_hat).powi(2);
    let sd = (ss / (nf - 1.0)).sqrt();
    Ok(DirectionalityEstimate {
        d_hat,
        sigma_d: sd / nf.sqrt(),
        n_emitting: n,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateDiagnostics {
    /// `D_hat - sigma_D <= 0`; the lower end was taken at the `D -> 0` limit.
    pub low_clipped: bool,
    /// `D_hat + sigma_D > D_max`; the upper end was clipped to `D_max`.
    pub high_clipped: bool,
    /// The interval straddles the C maximum, so its upper bound is the peak.
    pub fold_inside: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceEstimate {
    pub d_hat: f64,
    pub sigma_d: f64,
    pub c_hat: f64,
    /// Range of C over `[D_hat - sigma_D, D_hat + sigma_D]` (clipped).
    pub c_interval: (f64, f64),
    pub n_emitting: Option<u64>,
    pub dark_fraction: Option<f64>,
    pub diagnostics: EstimateDiagnostics,
}

impl ConcurrenceEstimate {
    pub fn covers(&self, c: f64) -> bool {
        self.c_interval.0 <= c && c <= self.c_interval.1
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.c_interval.1 - self.c_interval.0)
    }
}

/// Concurrence implied by `D_hat` and the image of `D_hat +- sigma_D` under
/// the (unimodal) C-D map.
pub fn estimate_concurrence(d_hat: f64, sigma_d: f64, r_a: f64) -> Result<ConcurrenceEstimate> {
    if !(r_a.is_finite() && r_a > 0.0 && r_a < 1.0) {
        return Err(Error::NonInvertibleConfiguration { r_a });
    }
    if !(sigma_d.is_finite() && sigma_d >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma_d",
            value: sigma_d,
            reason: "must be finite and non-negative",
        });
    }
    let d_max = max_directionality(r_a);
    if !(d_hat > 0.0 && d_hat <= d_max) {
        return Err(Error::NonInvertibleEstimate { d_hat, d_max });
    }
    let c_hat = concurrence_vs_directionality(d_hat, r_a)?;

    let mut diagnostics = EstimateDiagnostics::default();
    let lo = d_hat - sigma_d;
    let hi = d_hat + sigma_d;
    let c_lo = if lo <= 0.0 {
        diagnostics.low_clipped = true;
        0.0
    } else {
        concurrence_vs_directionality(lo, r_a)?
    };
    let hi = if hi > d_max {
        diagnostics.high_clipped = true;
        d_max
    } else {
        hi
    };
    let c_hi = concurrence_vs_directionality(hi, r_a)?;

    let mut low = c_lo.min(c_hi).min(c_hat);
    let mut high = c_lo.max(c_hi).max(c_hat);
    let d_peak = peak_directionality(r_a);
    if lo < d_peak && d_peak < hi {
        diagnostics.fold_inside = true;
        high = high.max(concurrence_vs_directionality(d_peak, r_a)?);
    }
    low = low.clamp(0.0, 1.0);
    high = high.clamp(0.0, 1.0);

    Ok(ConcurrenceEstimate {
        d_hat,
        sigma_d,
        c_hat,
        c_interval: (low, high),
        n_emitting: None,
        dark_fraction: None,
        diagnostics,
    })
}

/// First-order `|dC/dD| sigma_D`. Misleading near the peak (slope zero) and
/// near `D_max` (slope diverges); use for cross-checks only.
pub fn delta_method_sigma(d_hat: f64, sigma_d: f64, r_a: f64) -> Result<f64> {
    Ok(concurrence_slope(d_hat, r_a)?.abs() * sigma_d)
}

/// Directionality and concurrence estimates from one record.
pub fn estimate_from_record(record: &MeasurementRecord, r_a: f64) -> Result<ConcurrenceEstimate> {
    let d = estimate_directionality(record)?;
    let mut est = estimate_concurrence(d.d_hat, d.sigma_d, r_a)?;
    est.n_emitting = Some(d.n_emitting);
    est.dark_fraction = record.dark_fraction();
    Ok(est)
}

/// Simulated experiment: sample a record on `stream` and run the estimator.
pub fn simulate_estimate(
    probs: &EmissionProbabilities,
    r_a: f64,
    n_runs: u64,
    seed: u64,
    stream: u64,
) -> Result<ConcurrenceEstimate> {
    let rec = sample_outcomes_on_stream(probs, n_runs, seed, stream)?;
    estimate_from_record(&rec, r_a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_runs: u64,
    /// Sample standard deviation of `C_hat` over successful repetitions.
    pub sigma_c: Option<f64>,
    pub mean_c: Option<f64>,
    /// Mean interval half-width reported by the estimator.
    pub mean_half_width: Option<f64>,
    pub successes: u64,
    pub failures: u64,
    pub first_error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// `p` in `sigma_C = coefficient * n^p`.
    pub exponent: f64,
    pub coefficient: f64,
    /// RMS residual in `ln sigma_C`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub params: SystemParams,
    pub true_c: f64,
    pub r_a: f64,
    pub repetitions: u64,
    pub seed: u64,
    pub points: Vec<ScalingPoint>,
    pub fit: Option<PowerLawFit>,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_power_law(xy: &[(f64, f64)]) -> Option<PowerLawFit> {
    if xy.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = xy.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Some(PowerLawFit {
        exponent: slope,
        coefficient: intercept.exp(),
        residual: (rss / n).sqrt(),
    })
}

fn validate_grid(n_grid: &[u64]) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::InvalidInput("n_grid is empty".into()));
    }
    if let Some(&n) = n_grid.iter().find(|&&n| n < 100) {
        return Err(Error::InvalidInput(format!(
            "n_grid entry {n} is below 100"
        )));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "n_grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn stream_id(point: usize, rep: u64) -> u64 {
    ((point as u64) << 32) | rep
}

/// Spread of `C_hat` across seeded repetitions for each run count, with a
/// power-law fit of `sigma_C` against `n_runs`.
pub fn error_scaling_study(
    params: &SystemParams,
    n_grid: &[u64],
    repetitions: u64,
    seed: u64,
) -> Result<ScalingResult> {
    validate_grid(n_grid)?;
    if repetitions == 0 || repetitions > u64::from(u32::MAX) {
        return Err(Error::InvalidInput(
            "repetitions must be in 1..=2^32-1".into(),
        ));
    }
    let probs = emission_probabilities_analytic(params)?;
    let r_a = ratios_of(params)?.r_a;
    if !(r_a > 0.0 && r_a < 1.0) {
        return Err(Error::NonInvertibleConfiguration { r_a });
    }
    let true_c = concurrence_from_couplings(params).value;

    let tasks: Vec<(usize, u64)> = (0..n_grid.len())
        .flat_map(|i| (0..repetitions).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<Result<ConcurrenceEstimate>> = tasks
        .par_iter()
        .map(|&(i, j)| simulate_estimate(&probs, r_a, n_grid[i], seed, stream_id(i, j)))
        .collect();

    let mut points = Vec::with_capacity(n_grid.len());
    for (i, &n_runs) in n_grid.iter().enumerate() {
        let chunk = &outcomes[i * repetitions as usize..(i + 1) * repetitions as usize];
        let mut first_error = None;
        let mut estimates = Vec::new();
        for o in chunk {
            match o {
                Ok(e) => estimates.push(*e),
                Err(e) => {
                    if first_error.is_none() {
                        first_error = Some(e.to_string());
                    }
                }
            }
        }
        let k = estimates.len();
        let mean = |f: &dyn Fn(&ConcurrenceEstimate) -> f64| {
            (k > 0).then(|| estimates.iter().map(f).sum::<f64>() / k as f64)
        };
        let mean_c = mean(&|e| e.c_hat);
        let sigma_c = match (mean_c, k) {
            (Some(m), k) if k >= 2 => Some(
                (estimates.iter().map(|e| (e.c_hat - m).powi(2)).sum::<f64>() / (k - 1) as f64)
                    .sqrt(),
            ),
            _ => None,
        };
        points.push(ScalingPoint {
            n_runs,
            sigma_c,
            mean_c,
            mean_half_width: mean(&|e| e.half_width()),
            successes: k as u64,
            failures: repetitions - k as u64,
            first_error,
        });
    }

    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.sigma_c.filter(|&s| s > 0.0).map(|s| (p.n_runs as f64, s)))
        .collect();

    Ok(ScalingResult {
        params: *params,
        true_c,
        r_a,
        repetitions,
        seed,
        points,
        fit: fit_power_law(&xy),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub covered: u64,
    pub failed: u64,
    pub repetitions: u64,
    pub true_c: f64,
}

impl CoverageResult {
    pub fn fraction(&self) -> f64 {
        self.covered as f64 / self.repetitions as f64
    }
}

/// How often the estimator's C interval contains the true concurrence.
/// Failed estimates count as not covered.
pub fn interval_coverage(
    params: &SystemParams,
    n_runs: u64,
    repetitions: u64,
    seed: u64,
) -> Result<CoverageResult> {
    if repetitions == 0 {
        return Err(Error::InvalidInput("repetitions must be positive".into()));
    }
    let probs = emission_probabilities_analytic(params)?;
    let r_a = ratios_of(params)?.r_a;
    let true_c = concurrence_from_couplings(params).value;
    let (covered, failed) = (0..repetitions)
        .into_par_iter()
        .map(|j| match simulate_estimate(&probs, r_a, n_runs, seed, j) {
            Ok(e) => (u64::from(e.covers(true_c)), 0),
            Err(_) => (0, 1),
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    Ok(CoverageResult {
        covered,
        failed,
        repetitions,
        true_c,
    })
}
