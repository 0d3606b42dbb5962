//! Parameter sweeps that produce plot-ready data: the `(g_q, g_a)` plane, the
//! C-D curve with Monte Carlo error bars, and a side-by-side comparison of
//! the dynamics routes along one trajectory.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    closed_form_cavity, decaying_closed_form_qab, integrate_full, AmplitudeState,
    EmittedProbability, EmitterAmplitudes, ReducedGenerator, StepControl,
};
use crate::error::{Error, Result};
use crate::inference::{simulate_estimate, ConcurrenceEstimate};
use crate::model::SystemParams;
use crate::observables::{
    concurrence_from_couplings, directionality, directionality_from_ratios,
    emission_probabilities_analytic, near_peak_ratio,
};

/// Run counts for the error-scaling study.
pub const DEFAULT_SCALING_GRID: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];
pub const DEFAULT_SCALING_REPETITIONS: u64 = 200;
/// Concurrence of the default error-scaling working point. Just off the peak,
/// where `dC/dD` is nonzero and first-order propagation applies.
pub const DEFAULT_PEAK_TARGET: f64 = 0.995;

/// Couplings on the low-directionality side of the C peak with `C = target`.
pub fn near_peak_params(g_a: f64, r_a: f64, target: f64) -> Result<SystemParams> {
    let r = near_peak_ratio(r_a, target)?;
    SystemParams::new(r * g_a, g_a, r_a * g_a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneGrid {
    pub gq_max: f64,
    pub ga_max: f64,
    pub n_q: usize,
    pub n_a: usize,
}

impl Default for PlaneGrid {
    fn default() -> Self {
        Self {
            gq_max: 0.1,
            ga_max: 0.1,
            n_q: 100,
            n_a: 100,
        }
    }
}

impl PlaneGrid {
    /// `i`-th of `n` equally spaced points in `(0, max]`.
    pub fn node(max: f64, n: usize, i: usize) -> f64 {
        max * (i + 1) as f64 / n as f64
    }

    fn validate(&self) -> Result<()> {
        if self.n_q < 2 || self.n_a < 2 {
            return Err(Error::InvalidInput(
                "grid resolution must be at least 2".into(),
            ));
        }
        for (name, v) in [("gq_max", self.gq_max), ("ga_max", self.ga_max)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneCell {
    pub g_q: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub d: f64,
    pub c: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_dark: f64,
}

pub fn plane_cell(params: &SystemParams) -> Result<PlaneCell> {
    let probs = emission_probabilities_analytic(params)?;
    Ok(PlaneCell {
        g_q: params.g_q(),
        g_a: params.g_a(),
        g_b: params.g_b(),
        d: directionality(params)?,
        c: concurrence_from_couplings(params).value,
        p_a: probs.p_a,
        p_b: probs.p_b,
        p_dark: probs.p_dark,
    })
}

/// Directionality and concurrence over the `(g_q, g_a)` plane with
/// `g_b = r_a g_a` (`kappa = 1`). Rows are ordered `g_q`-major.
pub fn scan_plane(grid: &PlaneGrid, r_a: f64) -> Result<Vec<PlaneCell>> {
    grid.validate()?;
    if !(r_a.is_finite() && r_a >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "r_a",
            value: r_a,
            reason: "must be non-negative",
        });
    }
    (0..grid.n_q * grid.n_a)
        .into_par_iter()
        .map(|idx| {
            let g_q = PlaneGrid::node(grid.gq_max, grid.n_q, idx / grid.n_a);
            let g_a = PlaneGrid::node(grid.ga_max, grid.n_a, idx % grid.n_a);
            plane_cell(&SystemParams::new(g_q, g_a, r_a * g_a)?)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub r_a: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    /// Absolute atom coupling; D and C depend only on the ratios.
    pub g_a: f64,
    pub n_runs: u64,
    pub seed: u64,
}

impl Default for CurveSpec {
    fn default() -> Self {
        Self {
            r_a: crate::model::cesium_ratio(),
            r_min: 0.01,
            r_max: 3.0,
            points: 60,
            g_a: 0.05,
            n_runs: 5000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    pub d: f64,
    pub c: f64,
    pub p_dark: f64,
    pub estimate: Option<ConcurrenceEstimate>,
    pub error: Option<String>,
}

/// Log-spaced ratios `r` in `[r_min, r_max]`.
pub fn ratio_sweep(r_min: f64, r_max: f64, points: usize) -> Vec<f64> {
    let step = (r_max / r_min).ln() / (points - 1) as f64;
    (0..points)
        .map(|k| {
            if k + 1 == points {
                r_max
            } else {
                r_min * (step * k as f64).exp()
            }
        })
        .collect()
}

/// C against D at fixed `r_a` with one simulated measurement per point.
/// Sorted by D ascending; point `k` of the ratio sweep uses RNG stream `k`.
pub fn c_d_curve(spec: &CurveSpec) -> Result<Vec<CurvePoint>> {
    if spec.points < 2 {
        return Err(Error::InvalidInput("curve needs at least 2 points".into()));
    }
    if !(spec.r_min > 0.0 && spec.r_max > spec.r_min && spec.r_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "invalid ratio range [{}, {}]",
            spec.r_min, spec.r_max
        )));
    }
    if !(spec.r_a > 0.0 && spec.r_a < 1.0) {
        return Err(Error::NonInvertibleConfiguration { r_a: spec.r_a });
    }
    let rs = ratio_sweep(spec.r_min, spec.r_max, spec.points);
    let mut out: Vec<CurvePoint> = rs
        .par_iter()
        .enumerate()
        .map(|(k, &r)| {
            let params = SystemParams::new(r * spec.g_a, spec.g_a, spec.r_a * spec.g_a)?;
            let probs = emission_probabilities_analytic(&params)?;
            let (estimate, error) =
                match simulate_estimate(&probs, spec.r_a, spec.n_runs, spec.seed, k as u64) {
                    Ok(e) => (Some(e), None),
                    Err(e) => (None, Some(e.to_string())),
                };
            Ok(CurvePoint {
                r,
                d: directionality_from_ratios(r, spec.r_a),
                c: concurrence_from_couplings(&params).value,
                p_dark: probs.p_dark,
                estimate,
                error,
            })
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| a.d.total_cmp(&b.d));
    Ok(out)
}

/// One time sample of every dynamics route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteSample {
    pub full: AmplitudeState,
    pub emitted: EmittedProbability,
    /// Exact reduced dynamics; `None` when decay or detuning is present.
    pub reduced: Option<EmitterAmplitudes>,
    /// Two-exponential emitter closed form (audit).
    pub decaying: Option<EmitterAmplitudes>,
    /// Closed-form adiabatic cavity amplitudes.
    pub cavity: Option<(Complex64, Complex64)>,
}

/// Integrates the full system and evaluates the other routes at the same
/// sample times.
pub fn compare_routes(
    params: &SystemParams,
    horizon: f64,
    control: &StepControl,
) -> Result<Vec<RouteSample>> {
    let traj = integrate_full(params, &AmplitudeState::excited_qd(), horizon, control)?;
    let generator = params.is_ideal().then(|| ReducedGenerator::new(params));
    let start = EmitterAmplitudes::new(1.0, 0.0, 0.0);
    Ok(traj
        .samples
        .iter()
        .zip(&traj.emitted)
        .map(|(s, e)| RouteSample {
            full: *s,
            emitted: *e,
            reduced: generator.as_ref().map(|g| g.propagate(start, s.t)),
            decaying: decaying_closed_form_qab(params, s.t).ok(),
            cavity: closed_form_cavity(params, s.t).ok(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cesium_ratio;

    #[test]
    fn plane_nodes() {
        assert_eq!(PlaneGrid::node(0.1, 100, 9), 0.01);
        assert_eq!(PlaneGrid::node(0.1, 100, 49), 0.05);
        assert_eq!(PlaneGrid::node(0.1, 100, 99), 0.1);
    }

    #[test]
    fn small_plane() {
        let grid = PlaneGrid {
            gq_max: 0.1,
            ga_max: 0.1,
            n_q: 3,
            n_a: 4,
        };
        let cells = scan_plane(&grid, cesium_ratio()).unwrap();
        assert_eq!(cells.len(), 12);
        assert_eq!(cells[0].g_q, cells[3].g_q);
        assert!(cells[4].g_q > cells[3].g_q);
        for c in &cells {
            assert!((c.p_a + c.p_b + c.p_dark - 1.0).abs() < 1e-12);
        }
        let bad = PlaneGrid { n_q: 1, ..grid };
        assert!(scan_plane(&bad, cesium_ratio()).is_err());
    }

    #[test]
    fn curve_sorted_and_unique() {
        let spec = CurveSpec {
            points: 12,
            n_runs: 2000,
            seed: 4,
            ..CurveSpec::default()
        };
        let pts = c_d_curve(&spec).unwrap();
        assert_eq!(pts.len(), 12);
        for w in pts.windows(2) {
            assert!(w[0].d < w[1].d);
            assert!(w[0].r > w[1].r);
        }
        assert_eq!(pts, c_d_curve(&spec).unwrap());
    }

    #[test]
    fn near_peak_point() {
        let p = near_peak_params(0.05, cesium_ratio(), 0.995).unwrap();
        assert!((concurrence_from_couplings(&p).value - 0.995).abs() < 1e-12);
        assert!(
            directionality(&p).unwrap() < crate::observables::peak_directionality(cesium_ratio())
        );
    }

    #[test]
    fn ratio_sweep_endpoints() {
        let rs = ratio_sweep(0.01, 3.0, 7);
        assert_eq!(rs[0], 0.01);
        assert_eq!(rs[6], 3.0);
    }

    #[test]
    fn routes_line_up() {
        let p = SystemParams::cesium(0.02, 0.08).unwrap();
        let rows =
            compare_routes(&p, 20.0, &StepControl::fixed(0.01).recording_every(5.0)).unwrap();
        assert!(rows.len() >= 4);
        assert!(rows
            .iter()
            .all(|r| r.reduced.is_some() && r.decaying.is_some()));
        let leaky = p.with_decay(1e-3, 0.0, 0.0).unwrap();
        let rows = compare_routes(&leaky, 5.0, &StepControl::fixed(0.01)).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.reduced.is_none() && r.cavity.is_none()));
    }
}
