//! Plain-text `key = value` parameter files.
//!
//! ```text
//! # cesium reference point
//! g_q = 0.01
//! g_a = 0.05
//! g_b = 0.0074535599249993
//! ```
//!
//! Keys: `g_q g_a g_b kappa gamma_q gamma_a gamma_b delta_q delta_a delta_b
//! units`. Missing decay and detuning keys are zero. `units` is `kappa`
//! (rates already divided by kappa, the default) or `absolute` (rates share
//! kappa's unit and are normalized on load).

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{cesium_ratio, SystemParams};

pub const DEFAULT_G_Q: f64 = 0.01;
pub const DEFAULT_G_A: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Kappa,
    Absolute,
}

impl FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "kappa" => Ok(Units::Kappa),
            "absolute" => Ok(Units::Absolute),
            other => Err(format!(
                "unknown units `{other}` (expected kappa or absolute)"
            )),
        }
    }
}

/// Partially specified parameters; `None` means "not given".
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub g_q: Option<f64>,
    pub g_a: Option<f64>,
    pub g_b: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma_q: Option<f64>,
    pub gamma_a: Option<f64>,
    pub gamma_b: Option<f64>,
    pub delta_q: Option<f64>,
    pub delta_a: Option<f64>,
    pub delta_b: Option<f64>,
    pub units: Option<Units>,
}

impl ParamOverrides {
    fn slot(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "g_q" => &mut self.g_q,
            "g_a" => &mut self.g_a,
            "g_b" => &mut self.g_b,
            "kappa" => &mut self.kappa,
            "gamma_q" => &mut self.gamma_q,
            "gamma_a" => &mut self.gamma_a,
            "gamma_b" => &mut self.gamma_b,
            "delta_q" => &mut self.delta_q,
            "delta_a" => &mut self.delta_a,
            "delta_b" => &mut self.delta_b,
            _ => return None,
        })
    }

    /// `self` (file values) overridden by `flags`.
    pub fn overridden_by(self, flags: ParamOverrides) -> Result<ParamOverrides> {
        if let (Some(f), Some(g)) = (self.units, flags.units) {
            if f != g {
                return Err(Error::InvalidInput(format!(
                    "config file declares units {f:?} but flags declare {g:?}"
                )));
            }
        }
        Ok(ParamOverrides {
            g_q: flags.g_q.or(self.g_q),
            g_a: flags.g_a.or(self.g_a),
            g_b: flags.g_b.or(self.g_b),
            kappa: flags.kappa.or(self.kappa),
            gamma_q: flags.gamma_q.or(self.gamma_q),
            gamma_a: flags.gamma_a.or(self.gamma_a),
            gamma_b: flags.gamma_b.or(self.gamma_b),
            delta_q: flags.delta_q.or(self.delta_q),
            delta_a: flags.delta_a.or(self.delta_a),
            delta_b: flags.delta_b.or(self.delta_b),
            units: flags.units.or(self.units),
        })
    }

    /// Fills defaults (`g_q = 0.01`, `g_a = 0.05`, `g_b = g_a/sqrt(45)`,
    /// `kappa = 1`, zero decay/detuning) and returns parameters with
    /// `kappa = 1`.
    pub fn resolve(&self) -> Result<SystemParams> {
        let units = self.units.unwrap_or(Units::Kappa);
        let kappa = self.kappa.unwrap_or(1.0);
        if units == Units::Kappa && kappa != 1.0 {
            return Err(Error::InvalidInput(format!(
                "rates are declared in units of kappa, but kappa = {kappa}"
            )));
        }
        let g_a = self.g_a.unwrap_or(DEFAULT_G_A);
        let params = SystemParams::new(
            self.g_q.unwrap_or(DEFAULT_G_Q),
            g_a,
            self.g_b.unwrap_or(g_a * cesium_ratio()),
        )?
        .with_kappa(kappa)?
        .with_decay(
            self.gamma_q.unwrap_or(0.0),
            self.gamma_a.unwrap_or(0.0),
            self.gamma_b.unwrap_or(0.0),
        )?
        .with_detuning(
            self.delta_q.unwrap_or(0.0),
            self.delta_a.unwrap_or(0.0),
            self.delta_b.unwrap_or(0.0),
        )?;
        Ok(params.normalized())
    }
}

pub fn parse_params(text: &str) -> Result<ParamOverrides> {
    let mut out = ParamOverrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Config {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "units" {
            if out.units.is_some() {
                return Err(err("duplicate key `units`".into()));
            }
            out.units = Some(value.parse().map_err(err)?);
            continue;
        }
        let slot = out
            .slot(key)
            .ok_or_else(|| err(format!("unknown key `{key}`")))?;
        if slot.is_some() {
            return Err(err(format!("duplicate key `{key}`")));
        }
        let v: f64 = value
            .parse()
            .map_err(|_| err(format!("`{key}`: cannot parse `{value}` as a number")))?;
        *slot = Some(v);
    }
    Ok(out)
}

pub fn read_params_file(path: &std::path::Path) -> Result<ParamOverrides> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_params(&text)
}
