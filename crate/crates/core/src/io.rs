//! CSV and JSON writers for the data products, plus measurement-record import.
//!
//! CSV cells are `{:.16e}` (17 significant digits, round-trip exact); missing
//! values are empty cells. Every JSON document carries `schema_version`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::inference::{ConcurrenceEstimate, MeasurementRecord, PowerLawFit, ScalingResult};
use crate::model::SystemParams;
use crate::sweeps::{CurvePoint, PlaneCell, RouteSample};

pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn trajectory_table(traj: &Trajectory) -> CsvTable {
    let mut t = CsvTable::new(vec![
        "t", "re_q", "im_q", "re_a", "im_a", "re_b", "im_b", "re_alpha", "im_alpha", "re_beta",
        "im_beta", "norm2",
    ]);
    for s in &traj.samples {
        let mut row = vec![fmt_f64(s.t)];
        for z in s.amplitudes() {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        row.push(fmt_f64(s.norm2()));
        t.push(row);
    }
    t
}

pub fn plane_table(cells: &[PlaneCell]) -> CsvTable {
    let mut t = CsvTable::new(vec![
        "g_q_over_kappa",
        "g_a_over_kappa",
        "g_b_over_kappa",
        "D",
        "C",
        "P_a",
        "P_b",
        "P_CD",
    ]);
    for c in cells {
        t.push(
            [c.g_q, c.g_a, c.g_b, c.d, c.c, c.p_a, c.p_b, c.p_dark]
                .into_iter()
                .map(fmt_f64)
                .collect(),
        );
    }
    t
}

pub fn curve_table(points: &[CurvePoint]) -> CsvTable {
    let mut t = CsvTable::new(vec![
        "r", "D", "C", "P_CD", "D_hat", "sigma_D", "C_hat", "C_low", "C_high", "error",
    ]);
    for p in points {
        let e = p.estimate.as_ref();
        t.push(vec![
            fmt_f64(p.r),
            fmt_f64(p.d),
            fmt_f64(p.c),
            fmt_f64(p.p_dark),
            fmt_opt(e.map(|e| e.d_hat)),
            fmt_opt(e.map(|e| e.sigma_d)),
            fmt_opt(e.map(|e| e.c_hat)),
            fmt_opt(e.map(|e| e.c_interval.0)),
            fmt_opt(e.map(|e| e.c_interval.1)),
            p.error.as_deref().map(csv_text).unwrap_or_default(),
        ]);
    }
    t
}

pub fn scaling_table(result: &ScalingResult) -> CsvTable {
    let mut t = CsvTable::new(vec!["n_runs", "sigma_C", "successes", "failures"]);
    for p in &result.points {
        t.push(vec![
            p.n_runs.to_string(),
            fmt_opt(p.sigma_c),
            p.successes.to_string(),
            p.failures.to_string(),
        ]);
    }
    t
}

pub fn routes_table(rows: &[RouteSample]) -> CsvTable {
    let mut t = CsvTable::new(vec![
        "t",
        "full_re_q",
        "full_im_q",
        "full_re_a",
        "full_im_a",
        "full_re_b",
        "full_im_b",
        "full_re_alpha",
        "full_im_alpha",
        "full_re_beta",
        "full_im_beta",
        "full_norm2",
        "emitted_a",
        "emitted_b",
        "reduced_q",
        "reduced_a",
        "reduced_b",
        "decaying_q",
        "decaying_a",
        "decaying_b",
        "cavity_re_alpha",
        "cavity_im_alpha",
        "cavity_re_beta",
        "cavity_im_beta",
    ]);
    for r in rows {
        let mut row = vec![fmt_f64(r.full.t)];
        for z in r.full.amplitudes() {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        row.push(fmt_f64(r.full.norm2()));
        row.push(fmt_f64(r.emitted.a));
        row.push(fmt_f64(r.emitted.b));
        for e in [r.reduced, r.decaying] {
            row.push(fmt_opt(e.map(|e| e.q)));
            row.push(fmt_opt(e.map(|e| e.a)));
            row.push(fmt_opt(e.map(|e| e.b)));
        }
        row.push(fmt_opt(r.cavity.map(|c| c.0.re)));
        row.push(fmt_opt(r.cavity.map(|c| c.0.im)));
        row.push(fmt_opt(r.cavity.map(|c| c.1.re)));
        row.push(fmt_opt(r.cavity.map(|c| c.1.im)));
        t.push(row);
    }
    t
}

// Quoted, with embedded quotes doubled.
fn csv_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        if ch == '"' {
            out.push('"');
        }
        out.push(ch);
    }
    out.push('"');
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub schema_version: u32,
    pub params: SystemParams,
    pub r_a: f64,
    pub true_c: f64,
    pub repetitions: u64,
    pub seed: u64,
    pub n_grid: Vec<u64>,
    pub fit: Option<PowerLawFit>,
}

impl ScalingSummary {
    pub fn of(result: &ScalingResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            params: result.params,
            r_a: result.r_a,
            true_c: result.true_c,
            repetitions: result.repetitions,
            seed: result.seed,
            n_grid: result.points.iter().map(|p| p.n_runs).collect(),
            fit: result.fit,
        }
    }
}

/// Output of the `estimate` command; `record` makes it re-importable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateDocument {
    pub schema_version: u32,
    pub r_a: f64,
    pub record: MeasurementRecord,
    pub estimate: ConcurrenceEstimate,
}

impl EstimateDocument {
    pub fn new(record: MeasurementRecord, r_a: f64, estimate: ConcurrenceEstimate) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            r_a,
            record,
            estimate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordDocument {
    pub schema_version: u32,
    pub record: MeasurementRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema_version: u32,
    pub data: T,
}

impl<T> Document<T> {
    pub fn new(data: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            data,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Reads a record from JSON: a bare record, or any document with a `record`
/// field (so `estimate` output can be fed back in).
pub fn parse_record_json(text: &str) -> Result<MeasurementRecord> {
    let value: Value = serde_json::from_str(text)?;
    if let Some(v) = value.get("schema_version") {
        if v.as_u64() != Some(u64::from(SCHEMA_VERSION)) {
            return Err(Error::InvalidInput(format!(
                "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
            )));
        }
    }
    let inner = match value.get("record") {
        Some(r) => r.clone(),
        None => {
            let mut v = value;
            if let Some(obj) = v.as_object_mut() {
                obj.remove("schema_version");
            }
            v
        }
    };
    Ok(serde_json::from_value(inner)?)
}

pub fn read_record(path: &Path) -> Result<MeasurementRecord> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_record_json(&text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Fails early if `path` could not be created: its parent directory must
/// exist and accept a new file.
pub fn check_writable(path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let meta = fs::metadata(dir).map_err(|e| Error::io(dir, e))?;
    if !meta.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
        ));
    }
    let mut probe_name = String::from(".cds-write-probe-");
    let _ = write!(probe_name, "{}", std::process::id());
    let probe = dir.join(probe_name);
    fs::write(&probe, b"").map_err(|e| Error::io(dir, e))?;
    let _ = fs::remove_file(&probe);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::estimate_from_record;
    use crate::model::cesium_ratio;

    #[test]
    fn full_precision_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(!s.contains(','));
        }
        assert_eq!(fmt_f64(0.01), "1.0000000000000000e-2");
    }

    #[test]
    fn estimate_document_round_trips() {
        let rec = MeasurementRecord::from_counts(100, 900, 17).unwrap();
        let est = estimate_from_record(&rec, cesium_ratio()).unwrap();
        let doc = EstimateDocument::new(rec, cesium_ratio(), est);
        let text = to_json(&doc).unwrap();
        assert_eq!(parse_record_json(&text).unwrap(), rec);
        let back: EstimateDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn bare_record_and_version_check() {
        let rec = parse_record_json(r#"{"n_a": 3, "n_b": 7}"#).unwrap();
        assert_eq!(rec.n_runs, 10);
        assert!(parse_record_json(r#"{"schema_version": 9, "n_a": 3, "n_b": 7}"#).is_err());
        assert!(parse_record_json(r#"{"n_a": 3, "n_b": 7, "n_runs": 11}"#).is_err());
    }

    #[test]
    fn csv_quotes_text() {
        assert_eq!(csv_text(r#"a "b", c"#), r#""a ""b"", c""#);
    }

    #[test]
    fn writability_probe() {
        let dir = tempfile::tempdir().unwrap();
        assert!(check_writable(&dir.path().join("x.csv")).is_ok());
        assert!(matches!(
            check_writable(&dir.path().join("missing/x.csv")),
            Err(Error::Io { .. })
        ));
    }
}
