//! Physical parameters of the QD + V-atom + two-mode ring cavity system.
//!
//! All rates are stored in the units they were given in; the library works
//! with `kappa = 1` by convention (time in units of `1/kappa`), and
//! [`SystemParams::normalized`] converts any parameter set to that convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default safety factor used for each "much less than" in `gamma << g << kappa`.
pub const DEFAULT_REGIME_MARGIN: f64 = 10.0;

/// `g_b / g_a` for the cesium D2 line, `1/sqrt(45)`.
pub fn cesium_ratio() -> f64 {
    1.0 / 45f64.sqrt()
}

/// Coupling, decay and detuning rates for one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SystemParams {
    g_q: f64,
    g_a: f64,
    g_b: f64,
    kappa: f64,
    gamma_q: f64,
    gamma_a: f64,
    gamma_b: f64,
    delta_q: f64,
    delta_a: f64,
    delta_b: f64,
}

#[derive(Deserialize)]
struct RawParams {
    g_q: f64,
    g_a: f64,
    g_b: f64,
    kappa: f64,
    #[serde(default)]
    gamma_q: f64,
    #[serde(default)]
    gamma_a: f64,
    #[serde(default)]
    gamma_b: f64,
    #[serde(default)]
    delta_q: f64,
    #[serde(default)]
    delta_a: f64,
    #[serde(default)]
    delta_b: f64,
}

impl TryFrom<RawParams> for SystemParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        SystemParams::new(raw.g_q, raw.g_a, raw.g_b)?
            .with_kappa(raw.kappa)?
            .with_decay(raw.gamma_q, raw.gamma_a, raw.gamma_b)?
            .with_detuning(raw.delta_q, raw.delta_a, raw.delta_b)
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    finite(name, value)?;
    if value < 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be non-negative",
        });
    }
    Ok(value)
}

fn finite(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    Ok(value)
}

impl SystemParams {
    /// Couplings in units of `kappa = 1`, no spontaneous emission, no detuning.
    pub fn new(g_q: f64, g_a: f64, g_b: f64) -> Result<Self> {
        Ok(Self {
            g_q: non_negative("g_q", g_q)?,
            g_a: non_negative("g_a", g_a)?,
            g_b: non_negative("g_b", g_b)?,
            kappa: 1.0,
            gamma_q: 0.0,
            gamma_a: 0.0,
            gamma_b: 0.0,
            delta_q: 0.0,
            delta_a: 0.0,
            delta_b: 0.0,
        })
    }

    /// Cesium configuration: `g_b = g_a / sqrt(45)`.
    pub fn cesium(g_q: f64, g_a: f64) -> Result<Self> {
        Self::new(g_q, g_a, g_a * cesium_ratio())
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        finite("kappa", kappa)?;
        if kappa <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                reason: "must be positive",
            });
        }
        self.kappa = kappa;
        Ok(self)
    }

    pub fn with_decay(mut self, gamma_q: f64, gamma_a: f64, gamma_b: f64) -> Result<Self> {
        self.gamma_q = non_negative("gamma_q", gamma_q)?;
        self.gamma_a = non_negative("gamma_a", gamma_a)?;
        self.gamma_b = non_negative("gamma_b", gamma_b)?;
        Ok(self)
    }

    pub fn with_detuning(mut self, delta_q: f64, delta_a: f64, delta_b: f64) -> Result<Self> {
        self.delta_q = finite("delta_q", delta_q)?;
        self.delta_a = finite("delta_a", delta_a)?;
        self.delta_b = finite("delta_b", delta_b)?;
        Ok(self)
    }

    pub fn g_q(&self) -> f64 {
        self.g_q
    }
    pub fn g_a(&self) -> f64 {
        self.g_a
    }
    pub fn g_b(&self) -> f64 {
        self.g_b
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn gamma_q(&self) -> f64 {
        self.gamma_q
    }
    pub fn gamma_a(&self) -> f64 {
        self.gamma_a
    }
    pub fn gamma_b(&self) -> f64 {
        self.gamma_b
    }
    pub fn delta_q(&self) -> f64 {
        self.delta_q
    }
    pub fn delta_a(&self) -> f64 {
        self.delta_a
    }
    pub fn delta_b(&self) -> f64 {
        self.delta_b
    }

    /// Every rate divided by `kappa`, so that `kappa = 1`.
    pub fn normalized(&self) -> Self {
        let k = self.kappa;
        Self {
            g_q: self.g_q / k,
            g_a: self.g_a / k,
            g_b: self.g_b / k,
            kappa: 1.0,
            gamma_q: self.gamma_q / k,
            gamma_a: self.gamma_a / k,
            gamma_b: self.gamma_b / k,
            delta_q: self.delta_q / k,
            delta_a: self.delta_a / k,
            delta_b: self.delta_b / k,
        }
    }

    /// No spontaneous emission and all transitions resonant.
    pub fn is_ideal(&self) -> bool {
        [
            self.gamma_q,
            self.gamma_a,
            self.gamma_b,
            self.delta_q,
            self.delta_a,
            self.delta_b,
        ]
        .iter()
        .all(|&x| x == 0.0)
    }

    /// Closed forms assume `gamma = Delta = 0`.
    pub(crate) fn require_ideal(&self, operation: &'static str) -> Result<()> {
        if self.is_ideal() {
            Ok(())
        } else {
            Err(Error::UnsupportedRegime {
                operation,
                reason: "requires all spontaneous-emission rates and detunings to be zero".into(),
            })
        }
    }

    pub fn max_coupling(&self) -> f64 {
        self.g_q.max(self.g_a).max(self.g_b)
    }
}

/// Dimensionless ratios `r = g_q / g_a` and `r_a = g_b / g_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingRatios {
    pub r: f64,
    pub r_a: f64,
}

impl CouplingRatios {
    /// `r_a = 0` is representable but has no dark state.
    pub fn has_dark_state(&self) -> bool {
        self.r > 0.0 && self.r_a > 0.0
    }
}

pub fn ratios_of(params: &SystemParams) -> Result<CouplingRatios> {
    if params.g_a == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(CouplingRatios {
        r: params.g_q / params.g_a,
        r_a: params.g_b / params.g_a,
    })
}

/// Cavity-induced decay rates and the two nonzero eigenvalues of the
/// adiabatically reduced emitter dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates {
    /// `2 g_q^2 / kappa` (the QD couples to both modes).
    pub cavity_decay_q: f64,
    /// `g_a^2 / kappa`.
    pub cavity_decay_a: f64,
    /// `g_b^2 / kappa`.
    pub cavity_decay_b: f64,
    /// `sqrt((Gamma_a - Gamma_b)^2 + Gamma_q^2)`, the eigenvalue splitting.
    pub splitting: f64,
    /// Slow decay eigenvalue, `lambda_minus <= lambda_plus <= 0`.
    pub lambda_plus: f64,
    /// Fast decay eigenvalue.
    pub lambda_minus: f64,
}

impl EffectiveRates {
    pub fn total(&self) -> f64 {
        self.cavity_decay_q + self.cavity_decay_a + self.cavity_decay_b
    }

    /// `lambda_plus * lambda_minus`, evaluated from the rates directly.
    pub fn eigen_product(&self) -> f64 {
        self.cavity_decay_a * self.cavity_decay_b
            + 0.5 * self.cavity_decay_q * (self.cavity_decay_a + self.cavity_decay_b)
    }
}

pub fn derive_effective_rates(params: &SystemParams) -> EffectiveRates {
    let k = params.kappa;
    let gq = 2.0 * params.g_q * params.g_q / k;
    let ga = params.g_a * params.g_a / k;
    let gb = params.g_b * params.g_b / k;
    let splitting = (ga - gb).hypot(gq);
    let lambda_minus = -0.5 * (ga + gb + gq + splitting);
    let mut rates = EffectiveRates {
        cavity_decay_q: gq,
        cavity_decay_a: ga,
        cavity_decay_b: gb,
        splitting,
        lambda_plus: 0.0,
        lambda_minus,
    };
    // The slow root via the product avoids cancellation in -(S - R)/2.
    if lambda_minus != 0.0 {
        rates.lambda_plus = rates.eigen_product() / lambda_minus;
    }
    rates
}

/// Outcome of checking the `gamma << g << kappa` hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub bad_cavity_ok: bool,
    pub purcell_ok: bool,
    /// Largest of `max(g)/kappa` and `max(gamma)/min(nonzero g)`; each should
    /// stay below `1/margin`.
    pub worst_ratio: f64,
    pub messages: Vec<String>,
}

pub fn check_regime(params: &SystemParams, margin: f64) -> Result<RegimeReport> {
    if !(margin.is_finite() && margin > 1.0) {
        return Err(Error::InvalidParameter {
            name: "margin",
            value: margin,
            reason: "must be a finite factor > 1",
        });
    }
    let mut messages = Vec::new();

    let g_max = params.max_coupling();
    let cavity_ratio = g_max / params.kappa;
    let bad_cavity_ok = g_max * margin <= params.kappa;
    if !bad_cavity_ok {
        messages.push(format!(
            "bad-cavity condition violated: max g / kappa = {cavity_ratio:.3e} > 1/{margin}"
        ));
    }

    let gamma_max = params.gamma_q.max(params.gamma_a).max(params.gamma_b);
    let g_min = [params.g_q, params.g_a, params.g_b]
        .into_iter()
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let (purcell_ok, purcell_ratio) = if gamma_max == 0.0 {
        (true, 0.0)
    } else if g_min.is_infinite() {
        (false, f64::INFINITY)
    } else {
        (gamma_max * margin <= g_min, gamma_max / g_min)
    };
    if !purcell_ok {
        messages.push(format!(
            "Purcell condition violated: max gamma / min g = {purcell_ratio:.3e} > 1/{margin}"
        ));
    }

    Ok(RegimeReport {
        bad_cavity_ok,
        purcell_ok,
        worst_ratio: cavity_ratio.max(purcell_ratio),
        messages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn equal_couplings_rates() {
        let r = derive_effective_rates(&SystemParams::new(0.1, 0.1, 0.1).unwrap());
        assert!(rel(r.cavity_decay_q, 0.02) < 1e-14);
        assert!(rel(r.cavity_decay_a, 0.01) < 1e-14);
        assert!(rel(r.cavity_decay_b, 0.01) < 1e-14);
        assert!(rel(r.splitting, 0.02) < 1e-14);
        assert!(rel(r.lambda_plus, -0.01) < 1e-14);
        assert!(rel(r.lambda_minus, -0.03) < 1e-14);
    }

    #[test]
    fn qd_decoupled_limit() {
        let r = derive_effective_rates(&SystemParams::new(0.0, 0.1, 0.0).unwrap());
        assert_eq!(r.cavity_decay_q, 0.0);
        assert!(rel(r.splitting, 0.01) < 1e-14);
        assert!(rel(r.cavity_decay_a, 0.01) < 1e-14);
        assert_eq!(r.lambda_plus, 0.0);
        assert!(rel(r.lambda_minus, -0.01) < 1e-14);
    }

    #[test]
    fn cesium_branching() {
        let r = derive_effective_rates(&SystemParams::cesium(0.01, 0.05).unwrap());
        assert!(rel(r.cavity_decay_b, r.cavity_decay_a / 45.0) < 1e-14);
    }

    #[test]
    fn ratios() {
        let p = SystemParams::cesium(0.01, 0.05).unwrap();
        let c = ratios_of(&p).unwrap();
        assert!(rel(c.r, 0.2) < 1e-15);
        assert!(rel(c.r_a, cesium_ratio()) < 1e-15);

        let c = ratios_of(&SystemParams::new(0.03, 0.03, 0.03).unwrap()).unwrap();
        assert_eq!((c.r, c.r_a), (1.0, 1.0));

        assert!(matches!(
            ratios_of(&SystemParams::new(0.1, 0.0, 0.1).unwrap()),
            Err(Error::UndefinedRatio)
        ));
    }

    #[test]
    fn zero_r_a_is_representable() {
        let c = ratios_of(&SystemParams::new(0.01, 0.05, 0.0).unwrap()).unwrap();
        assert_eq!(c.r_a, 0.0);
        assert!(!c.has_dark_state());
    }

    #[test]
    fn regime_flags() {
        let ok = check_regime(&SystemParams::new(0.05, 0.05, 0.05).unwrap(), 10.0).unwrap();
        assert!(ok.bad_cavity_ok && ok.purcell_ok);
        assert!(ok.messages.is_empty());

        let strong = check_regime(&SystemParams::new(0.2, 0.2, 0.2).unwrap(), 10.0).unwrap();
        assert!(!strong.bad_cavity_ok);
        assert!(rel(strong.worst_ratio, 0.2) < 1e-15);

        let leaky = SystemParams::new(0.05, 0.05, 0.05)
            .unwrap()
            .with_decay(0.05, 0.0, 0.0)
            .unwrap();
        let rep = check_regime(&leaky, 10.0).unwrap();
        assert!(rep.bad_cavity_ok);
        assert!(!rep.purcell_ok);
        assert_eq!(rep.messages.len(), 1);

        assert!(check_regime(&leaky, 1.0).is_err());
    }

    #[test]
    fn construction_rejects_bad_values() {
        assert!(SystemParams::new(f64::NAN, 0.1, 0.1).is_err());
        assert!(SystemParams::new(0.1, -0.1, 0.1).is_err());
        assert!(SystemParams::new(0.1, 0.1, f64::INFINITY).is_err());
        let p = SystemParams::new(0.1, 0.1, 0.1).unwrap();
        assert!(p.with_kappa(0.0).is_err());
        assert!(p.with_decay(0.0, -1e-3, 0.0).is_err());
        assert!(p.with_detuning(0.0, f64::NAN, 0.0).is_err());
        assert!(p.with_detuning(-0.3, 0.2, 0.0).is_ok());
    }

    #[test]
    fn normalization_divides_by_kappa() {
        let p = SystemParams::new(2.0, 4.0, 1.0)
            .unwrap()
            .with_kappa(40.0)
            .unwrap()
            .with_decay(0.4, 0.0, 0.0)
            .unwrap()
            .normalized();
        assert_eq!(p.kappa(), 1.0);
        assert_eq!(p.g_q(), 0.05);
        assert_eq!(p.g_a(), 0.1);
        assert_eq!(p.gamma_q(), 0.01);
    }

    #[test]
    fn json_deserialization_validates() {
        let ok: SystemParams =
            serde_json::from_str(r#"{"g_q":0.01,"g_a":0.05,"g_b":0.01,"kappa":1.0}"#).unwrap();
        assert_eq!(ok.gamma_q(), 0.0);
        let bad = serde_json::from_str::<SystemParams>(
            r#"{"g_q":0.01,"g_a":0.05,"g_b":0.01,"kappa":-1.0}"#,
        );
        assert!(bad.is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn eigenvalue_invariants(gq in 0.0..0.2f64, ga in 0.0..0.2f64, gb in 0.0..0.2f64) {
                let r = derive_effective_rates(&SystemParams::new(gq, ga, gb).unwrap());
                prop_assert!(r.lambda_minus <= r.lambda_plus);
                prop_assert!(r.lambda_plus <= 0.0);
                let s = r.total();
                if s > 0.0 {
                    prop_assert!(((r.lambda_plus + r.lambda_minus) + s).abs() <= 1e-14 * s);
                    let p = r.eigen_product();
                    prop_assert!((r.lambda_plus * r.lambda_minus - p).abs() <= 1e-14 * p.max(f64::MIN_POSITIVE));
                }
            }

            #[test]
            fn rates_invariant_under_g_s_kappa_s2(
                gq in 0.001..0.2f64, ga in 0.001..0.2f64, gb in 0.001..0.2f64, s in 0.1..10.0f64,
            ) {
                let base = derive_effective_rates(&SystemParams::new(gq, ga, gb).unwrap());
                let scaled = derive_effective_rates(
                    &SystemParams::new(s * gq, s * ga, s * gb).unwrap().with_kappa(s * s).unwrap(),
                );
                for (x, y) in [
                    (base.cavity_decay_q, scaled.cavity_decay_q),
                    (base.cavity_decay_a, scaled.cavity_decay_a),
                    (base.cavity_decay_b, scaled.cavity_decay_b),
                    (base.lambda_plus, scaled.lambda_plus),
                    (base.lambda_minus, scaled.lambda_minus),
                ] {
                    prop_assert!(rel(y, x) < 1e-13);
                }
            }
        }
    }
}
