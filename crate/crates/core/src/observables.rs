//! Emission probabilities, directionality, the cavity dark state and its
//! entanglement, and the map between directionality and concurrence.

use nalgebra::{SMatrix, Vector6};
use serde::{Deserialize, Serialize};

use crate::dynamics::{cavity_coefficients, EmitterAmplitudes};
use crate::error::{Error, Result};
use crate::model::{derive_effective_rates, SystemParams};

/// Tolerance on `Q^2 + A^2 + B^2 = 1` for states passed to the entanglement
/// routines.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Both concurrence routes must agree to this.
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityRoute {
    /// Exact time integral of the adiabatic cavity amplitudes.
    Analytic,
    /// Closed rational expression with the `4/(lambda_+ lambda_-)` prefactor.
    /// Its a:b ratio is right but its normalization is not; audit only.
    RationalFormAudit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionProbabilities {
    pub p_a: f64,
    pub p_b: f64,
    /// Probability of ending in the cavity dark state (no photon).
    pub p_dark: f64,
    pub route: ProbabilityRoute,
}

impl EmissionProbabilities {
    /// Validated probabilities that must sum to one within `1e-9`.
    pub fn new(p_a: f64, p_b: f64, p_dark: f64) -> Result<Self> {
        let out = Self {
            p_a,
            p_b,
            p_dark,
            route: ProbabilityRoute::Analytic,
        };
        out.check_normalized()?;
        Ok(out)
    }

    pub fn sum(&self) -> f64 {
        self.p_a + self.p_b + self.p_dark
    }

    pub fn emitting(&self) -> f64 {
        self.p_a + self.p_b
    }

    /// `(P_b - P_a) / (P_b + P_a)`.
    pub fn directionality(&self) -> Result<f64> {
        let n = self.emitting();
        if n == 0.0 {
            return Err(Error::UndefinedProbability("no emission"));
        }
        Ok((self.p_b - self.p_a) / n)
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        let each_ok = [self.p_a, self.p_b, self.p_dark]
            .iter()
            .all(|p| p.is_finite() && (0.0..=1.0).contains(p));
        if !each_ok || (self.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "emission probabilities ({}, {}, {}) are not a distribution",
                self.p_a, self.p_b, self.p_dark
            )));
        }
        Ok(())
    }
}

/// `2 kappa int_0^inf |amp|^2 dt` for an amplitude with exponential weights `c`.
fn mode_integral(cavity_decay_q: f64, lambda_plus: f64, lambda_minus: f64, c: [f64; 2]) -> f64 {
    let mut acc = 0.0;
    if c[0] != 0.0 {
        acc += c[0] * c[0] / (2.0 * lambda_plus.abs());
    }
    if c[1] != 0.0 {
        acc += c[1] * c[1] / (2.0 * lambda_minus.abs());
    }
    if c[0] != 0.0 && c[1] != 0.0 {
        acc += 2.0 * c[0] * c[1] / (lambda_plus + lambda_minus).abs();
    }
    0.25 * cavity_decay_q * acc
}

/// Emission probabilities from exact integration of the adiabatic cavity
/// amplitudes, with the dark-state probability from the initial overlap.
///
/// With `g_q = 0` the initially excited QD never couples, so everything ends
/// up in `p_dark`.
pub fn emission_probabilities_analytic(params: &SystemParams) -> Result<EmissionProbabilities> {
    params.require_ideal("emission_probabilities_analytic")?;
    if params.max_coupling() == 0.0 {
        return Err(Error::UndefinedProbability("all couplings vanish"));
    }
    if params.g_q() == 0.0 {
        return Ok(EmissionProbabilities {
            p_a: 0.0,
            p_b: 0.0,
            p_dark: 1.0,
            route: ProbabilityRoute::Analytic,
        });
    }
    let r = derive_effective_rates(params);
    let c = cavity_coefficients(params);
    let p_dark = if params.g_a() * params.g_b() == 0.0 {
        0.0
    } else {
        dark_state_probability(params)?
    };
    Ok(EmissionProbabilities {
        p_a: mode_integral(r.cavity_decay_q, r.lambda_plus, r.lambda_minus, c.alpha),
        p_b: mode_integral(r.cavity_decay_q, r.lambda_plus, r.lambda_minus, c.beta),
        p_dark,
        route: ProbabilityRoute::Analytic,
    })
}

/// The rational closed form for `P_a`, `P_b` with the `4/(lambda_+ lambda_-)`
/// prefactor. Not normalized: at equal couplings it gives `P_a = 16/3`.
pub fn emission_probabilities_rational_form(
    params: &SystemParams,
) -> Result<EmissionProbabilities> {
    params.require_ideal("emission_probabilities_rational_form")?;
    let r = derive_effective_rates(params);
    let product = r.lambda_plus * r.lambda_minus;
    let total = r.total();
    if product == 0.0 || total == 0.0 {
        return Err(Error::UndefinedProbability("degenerate eigenvalues"));
    }
    let (gq, ga, gb) = (r.cavity_decay_q, r.cavity_decay_a, r.cavity_decay_b);
    let common = 4.0 / product * gq * (ga + gb) / total;
    Ok(EmissionProbabilities {
        p_a: common * (gq + 2.0 * gb),
        p_b: common * (gq + 2.0 * ga),
        p_dark: dark_state_probability(params)?,
        route: ProbabilityRoute::RationalFormAudit,
    })
}

/// `D = (g_a^2 - g_b^2) / (g_a^2 + g_b^2 + 2 g_q^2)`.
pub fn directionality(params: &SystemParams) -> Result<f64> {
    let (ga2, gb2, gq2) = (
        params.g_a() * params.g_a(),
        params.g_b() * params.g_b(),
        params.g_q() * params.g_q(),
    );
    let den = ga2 + gb2 + 2.0 * gq2;
    if den == 0.0 {
        return Err(Error::UndefinedProbability("all couplings vanish"));
    }
    Ok((ga2 - gb2) / den)
}

/// Normalized cavity dark state in the basis `(|E,g>, |G,+>, |G,->)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkState {
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub norm_constant: f64,
}

impl DarkState {
    pub fn amplitudes(&self) -> EmitterAmplitudes {
        EmitterAmplitudes::new(self.q, self.a, self.b)
    }

    /// `(c_10, c_01) = (Q, sqrt(A^2 + B^2))`: the two-qubit state with the same
    /// reduced density matrices.
    pub fn qubit_analogy(&self) -> (f64, f64) {
        (self.q, self.a.hypot(self.b))
    }
}

pub fn dark_state(params: &SystemParams) -> Result<DarkState> {
    for (name, g) in [
        ("g_q", params.g_q()),
        ("g_a", params.g_a()),
        ("g_b", params.g_b()),
    ] {
        if g == 0.0 {
            return Err(Error::NoDarkState { coupling: name });
        }
    }
    let (gq, ga, gb) = (params.g_q(), params.g_a(), params.g_b());
    let (ab, qb, qa) = (ga * gb, gq * gb, gq * ga);
    let norm_constant = 1.0 / (ab * ab + qb * qb + qa * qa).sqrt();
    Ok(DarkState {
        q: -ab * norm_constant,
        a: qb * norm_constant,
        b: qa * norm_constant,
        norm_constant,
    })
}

/// `|<CD|E,g>|^2 = (g_a g_b)^2 / ((g_a g_b)^2 + (g_q g_b)^2 + (g_q g_a)^2)`.
pub fn dark_state_probability(params: &SystemParams) -> Result<f64> {
    let (gq, ga, gb) = (params.g_q(), params.g_a(), params.g_b());
    let ab2 = (ga * gb).powi(2);
    let den = ab2 + (gq * gb).powi(2) + (gq * ga).powi(2);
    if den == 0.0 {
        return Err(Error::UndefinedProbability(
            "all pairwise coupling products vanish",
        ));
    }
    Ok(ab2 / den)
}

type Density6 = SMatrix<f64, 6, 6>;

/// `|psi><psi|` on QD x atom, basis index `3*qd + atom` with
/// `qd in (G, E)` and `atom in (g, +, -)`.
pub fn pure_state_density(state: &EmitterAmplitudes) -> Density6 {
    let psi = Vector6::new(0.0, state.a, state.b, state.q, 0.0, 0.0);
    psi * psi.transpose()
}

pub fn trace_out_atom(rho: &Density6) -> SMatrix<f64, 2, 2> {
    SMatrix::from_fn(|i, j| (0..3).map(|k| rho[(3 * i + k, 3 * j + k)]).sum())
}

pub fn trace_out_qd(rho: &Density6) -> SMatrix<f64, 3, 3> {
    SMatrix::from_fn(|k, l| (0..2).map(|i| rho[(3 * i + k, 3 * i + l)]).sum())
}

fn purity<const N: usize>(rho: &SMatrix<f64, N, N>) -> f64 {
    (rho * rho).trace()
}

/// `(tr rho)^2 - tr rho^2` as twice the sum of principal 2x2 minors; equals
/// `1 - tr rho^2` for unit trace without cancellation near purity one.
fn linear_entropy<const N: usize>(rho: &SMatrix<f64, N, N>) -> f64 {
    let mut minors = 0.0;
    for i in 0..N {
        for j in i + 1..N {
            minors += rho[(i, i)] * rho[(j, j)] - rho[(i, j)] * rho[(j, i)];
        }
    }
    2.0 * minors
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensityReport {
    /// Rows/columns ordered `(G, E)`: `diag(A^2 + B^2, Q^2)`.
    pub rho_qd: [[f64; 2]; 2],
    pub purity_qd: f64,
    pub purity_atom: f64,
}

fn require_normalized(state: &EmitterAmplitudes) -> Result<()> {
    let n = state.norm2();
    if !n.is_finite() || (n - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm2: n });
    }
    Ok(())
}

pub fn reduced_density(state: &EmitterAmplitudes) -> Result<ReducedDensityReport> {
    require_normalized(state)?;
    let rho = pure_state_density(state);
    let qd = trace_out_atom(&rho);
    let atom = trace_out_qd(&rho);
    Ok(ReducedDensityReport {
        rho_qd: [[qd[(0, 0)], qd[(0, 1)]], [qd[(1, 0)], qd[(1, 1)]]],
        purity_qd: purity(&qd),
        purity_atom: purity(&atom),
    })
}

/// `sqrt(2 (1 - tr rho_M^2))` from both partial traces of the full density
/// matrix; returns `(via QD reduction, via atom reduction)`.
pub fn concurrence_general(state: &EmitterAmplitudes) -> Result<(f64, f64)> {
    require_normalized(state)?;
    let rho = pure_state_density(state);
    let c = |s: f64| (2.0 * s.max(0.0)).sqrt();
    Ok((
        c(linear_entropy(&trace_out_atom(&rho))),
        c(linear_entropy(&trace_out_qd(&rho))),
    ))
}

/// `2 |Q| sqrt(A^2 + B^2)`.
pub fn concurrence_closed_form(state: &EmitterAmplitudes) -> f64 {
    2.0 * state.q.abs() * state.a.hypot(state.b)
}

/// Concurrence of a normalized emitter state, cross-checked between the
/// reduced-density route and the closed form.
pub fn concurrence_of_state(state: &EmitterAmplitudes) -> Result<f64> {
    let (via_qd, via_atom) = concurrence_general(state)?;
    let closed = concurrence_closed_form(state);
    for general in [via_qd, via_atom] {
        if (general - closed).abs() > ROUTE_AGREEMENT_TOL {
            return Err(Error::RouteMismatch { general, closed });
        }
    }
    Ok(closed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingConcurrence {
    pub value: f64,
    /// Set when a coupling vanishes and no dark state exists.
    pub warning: Option<String>,
}

/// `C = 2 g_q g_a g_b sqrt(g_a^2 + g_b^2) / ((g_a g_b)^2 + (g_q g_a)^2 + (g_q g_b)^2)`.
pub fn concurrence_from_couplings(params: &SystemParams) -> CouplingConcurrence {
    let (gq, ga, gb) = (params.g_q(), params.g_a(), params.g_b());
    for (name, g) in [("g_b", gb), ("g_a", ga), ("g_q", gq)] {
        if g == 0.0 {
            return CouplingConcurrence {
                value: 0.0,
                warning: Some(format!("no cavity dark state: {name} = 0")),
            };
        }
    }
    let den = (ga * gb).powi(2) + (gq * ga).powi(2) + (gq * gb).powi(2);
    CouplingConcurrence {
        value: 2.0 * gq * ga * gb * ga.hypot(gb) / den,
        warning: None,
    }
}

/// `C(r, r_a) = 2 sqrt(1 + r_a^2) / (r/r_a + r r_a + r_a/r)`.
pub fn concurrence_from_ratios(r: f64, r_a: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "must be positive",
        });
    }
    if !(r_a.is_finite() && r_a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r_a",
            value: r_a,
            reason: "must be positive",
        });
    }
    Ok(2.0 * (1.0 + r_a * r_a).sqrt() / (r / r_a + r * r_a + r_a / r))
}

/// `D(r, r_a) = (1 - r_a^2) / (1 + r_a^2 + 2 r^2)`.
pub fn directionality_from_ratios(r: f64, r_a: f64) -> f64 {
    (1.0 - r_a * r_a) / (1.0 + r_a * r_a + 2.0 * r * r)
}

/// Largest reachable directionality at fixed `r_a` (attained as `r -> 0`).
pub fn max_directionality(r_a: f64) -> f64 {
    (1.0 - r_a * r_a) / (1.0 + r_a * r_a)
}

fn require_invertible(r_a: f64) -> Result<()> {
    if !(r_a.is_finite() && r_a > 0.0 && r_a < 1.0) {
        return Err(Error::NonInvertibleConfiguration { r_a });
    }
    Ok(())
}

/// Inverse of [`directionality_from_ratios`] in `r`.
pub fn ratio_from_directionality(d: f64, r_a: f64) -> Result<f64> {
    require_invertible(r_a)?;
    let d_max = max_directionality(r_a);
    if !(d > 0.0 && d <= d_max) {
        return Err(Error::OutOfInvertibleRange { d, d_max });
    }
    let radicand = ((1.0 - r_a * r_a) - (1.0 + r_a * r_a) * d) / (2.0 * d);
    Ok(radicand.max(0.0).sqrt())
}

/// Dark-state concurrence implied by a directionality at fixed `r_a`.
/// Vanishes at `D = D_max` (no QD coupling, no dark state).
pub fn concurrence_vs_directionality(d: f64, r_a: f64) -> Result<f64> {
    let r = ratio_from_directionality(d, r_a)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    concurrence_from_ratios(r, r_a)
}

/// `r` maximising the concurrence (`C = 1` there).
pub fn peak_ratio(r_a: f64) -> f64 {
    r_a / (1.0 + r_a * r_a).sqrt()
}

/// Directionality at which the C-D curve folds over.
pub fn peak_directionality(r_a: f64) -> f64 {
    directionality_from_ratios(peak_ratio(r_a), r_a)
}

/// `r` on the low-directionality side of the peak where `C = target`.
pub fn near_peak_ratio(r_a: f64, target: f64) -> Result<f64> {
    if !(r_a.is_finite() && r_a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r_a",
            value: r_a,
            reason: "must be positive",
        });
    }
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "target",
            value: target,
            reason: "concurrence target must lie in (0, 1]",
        });
    }
    Ok(r_a * (1.0 + (1.0 - target * target).sqrt()) / (target * (1.0 + r_a * r_a).sqrt()))
}

/// `dC/dD` along the C-D curve at fixed `r_a`, for delta-method propagation.
pub fn concurrence_slope(d: f64, r_a: f64) -> Result<f64> {
    let r = ratio_from_directionality(d, r_a)?;
    if r == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let s = (1.0 + r_a * r_a).sqrt();
    let k = (1.0 + r_a * r_a) / r_a;
    let den = r * k + r_a / r;
    let dc_dr = -2.0 * s * (k - r_a / (r * r)) / (den * den);
    let dd = 1.0 + r_a * r_a + 2.0 * r * r;
    let dd_dr = -4.0 * r * (1.0 - r_a * r_a) / (dd * dd);
    Ok(dc_dr / dd_dr)
}
