//! `cds`: data products for the cavity dark-state model and a concurrence
//! estimator for recorded photon counts.
//!
//! Every number written is computed by `cds_core`; this binary only parses
//! flags, merges them over an optional config file, and serializes results.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cds_core::config::{read_params_file, ParamOverrides, Units};
use cds_core::dynamics::{default_horizon, StepControl};
use cds_core::inference::estimate_from_record;
use cds_core::io::{self as cio, CsvTable, Document, EstimateDocument, ScalingSummary};
use cds_core::model::ratios_of;
use cds_core::sweeps::{
    c_d_curve, compare_routes, near_peak_params, scan_plane, CurveSpec, PlaneGrid,
    DEFAULT_PEAK_TARGET, DEFAULT_SCALING_GRID, DEFAULT_SCALING_REPETITIONS,
};
use cds_core::{error_scaling_study, integrate_full, AmplitudeState, Error, MeasurementRecord};

#[derive(Parser, Debug)]
#[command(
    name = "cds",
    version,
    about = "Cavity dark-state directionality and concurrence"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// key = value parameter file; flags take precedence over its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; `-` writes to stdout
    #[arg(long, global = true, default_value = "-")]
    out: PathBuf,
    /// Output format [default: json for `estimate`, csv otherwise]
    #[arg(long, global = true)]
    format: Option<Format>,
    /// RNG seed for every simulated measurement
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Runs per simulated measurement [default: 5000 for `curve`]
    #[arg(long, global = true)]
    n_runs: Option<u64>,
    /// Atom coupling ratio g_b/g_a [default: g_b/g_a of the parameters, 1/sqrt(45)]
    #[arg(long, global = true)]
    r_a: Option<f64>,
    /// Grid resolution: `N` or `NQxNA` for `scan-plane`, point count for `curve`
    #[arg(long, global = true)]
    grid: Option<String>,
    #[command(flatten)]
    params: ParamFlags,
}

/// System parameters. Defaults: g_q = 0.01, g_a = 0.05, g_b = g_a/sqrt(45),
/// kappa = 1, all decay and detuning rates 0.
#[derive(Args, Debug)]
struct ParamFlags {
    #[arg(long, global = true)]
    g_q: Option<f64>,
    #[arg(long, global = true)]
    g_a: Option<f64>,
    #[arg(long, global = true)]
    g_b: Option<f64>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[arg(long, global = true)]
    gamma_q: Option<f64>,
    #[arg(long, global = true)]
    gamma_a: Option<f64>,
    #[arg(long, global = true)]
    gamma_b: Option<f64>,
    #[arg(long, global = true)]
    delta_q: Option<f64>,
    #[arg(long, global = true)]
    delta_a: Option<f64>,
    #[arg(long, global = true)]
    delta_b: Option<f64>,
    /// `kappa`: rates already divided by kappa; `absolute`: normalized on load
    #[arg(long, global = true)]
    units: Option<UnitsFlag>,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UnitsFlag {
    Kappa,
    Absolute,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// D, C and emission probabilities over the (g_q, g_a) plane with g_b = r_a g_a
    ScanPlane {
        #[arg(long, default_value_t = 0.1)]
        gq_max: f64,
        #[arg(long, default_value_t = 0.1)]
        ga_max: f64,
    },
    /// C against D for log-spaced r = g_q/g_a at fixed r_a, with simulated error bars
    Curve {
        #[arg(long, default_value_t = 0.01)]
        r_min: f64,
        #[arg(long, default_value_t = 3.0)]
        r_max: f64,
    },
    /// Spread of the concurrence estimate against the number of runs
    ErrorScaling {
        /// Run counts, strictly increasing
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SCALING_GRID)]
        n_grid: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_SCALING_REPETITIONS)]
        repetitions: u64,
        /// Without an explicit g_q, work at the low-D point where C equals this
        #[arg(long, default_value_t = DEFAULT_PEAK_TARGET)]
        peak_target: f64,
    },
    /// One trajectory from the excited QD, all dynamics routes side by side
    Simulate {
        /// Time span in 1/kappa [default: 40/|lambda_plus|]
        #[arg(long)]
        horizon: Option<f64>,
        /// Fixed RK4 step
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Use adaptive Dormand-Prince stepping at this tolerance instead of RK4
        #[arg(long)]
        adaptive: Option<f64>,
        /// Approximate number of recorded samples
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        /// Write only the full-ODE amplitudes and norm
        #[arg(long)]
        amplitudes_only: bool,
    },
    /// Concurrence estimate from photon counts
    Estimate {
        #[arg(long, requires = "n_b", conflicts_with = "record")]
        n_a: Option<u64>,
        #[arg(long, requires = "n_a", conflicts_with = "record")]
        n_b: Option<u64>,
        #[arg(long, default_value_t = 0, conflicts_with = "record")]
        n_dark: u64,
        /// JSON measurement record (or earlier `estimate` output)
        #[arg(long)]
        record: Option<PathBuf>,
    },
}

fn exit_code(category: &str) -> u8 {
    match category {
        "domain" => 10,
        "estimation" => 11,
        "integration" => 12,
        "internal" => 13,
        "config" => 14,
        "io" => 15,
        "usage" => 2,
        _ => 1,
    }
}

fn overrides(p: &ParamFlags) -> ParamOverrides {
    ParamOverrides {
        g_q: p.g_q,
        g_a: p.g_a,
        g_b: p.g_b,
        kappa: p.kappa,
        gamma_q: p.gamma_q,
        gamma_a: p.gamma_a,
        gamma_b: p.gamma_b,
        delta_q: p.delta_q,
        delta_a: p.delta_a,
        delta_b: p.delta_b,
        units: p.units.map(|u| match u {
            UnitsFlag::Kappa => Units::Kappa,
            UnitsFlag::Absolute => Units::Absolute,
        }),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::InvalidInput(format!("--grid `{s}`: expected N or NQxNA"));
    let (a, b) = match s.split_once(['x', 'X']) {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let n_q = a.trim().parse().map_err(|_| bad())?;
    let n_a = b.trim().parse().map_err(|_| bad())?;
    if n_q < 2 || n_a < 2 {
        return Err(Error::InvalidInput(format!(
            "--grid `{s}`: resolution must be at least 2"
        )));
    }
    Ok((n_q, n_a))
}

enum Output {
    Csv(CsvTable),
    Json(String),
}

fn emit(out: &Path, output: Output) -> Result<(), Error> {
    let text = match output {
        Output::Csv(t) => t.render(),
        Output::Json(s) => s,
    };
    if out == Path::new("-") {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            })
    } else {
        cio::write_text(out, &text)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let c = &cli.common;
    let file = match &c.config {
        Some(path) => read_params_file(path)?,
        None => ParamOverrides::default(),
    };
    let merged = file.overridden_by(overrides(&c.params))?;
    let params = merged.resolve()?;
    let r_a = match c.r_a {
        Some(r) => r,
        None => ratios_of(&params)?.r_a,
    };
    if c.out != Path::new("-") {
        cio::check_writable(&c.out)?;
    }
    let format = c.format.unwrap_or(match cli.command {
        Command::Estimate { .. } => Format::Json,
        _ => Format::Csv,
    });

    let output = match &cli.command {
        Command::ScanPlane { gq_max, ga_max } => {
            let (n_q, n_a) = match &c.grid {
                Some(g) => parse_grid(g)?,
                None => (100, 100),
            };
            let grid = PlaneGrid {
                gq_max: *gq_max,
                ga_max: *ga_max,
                n_q,
                n_a,
            };
            let cells = scan_plane(&grid, r_a)?;
            match format {
                Format::Csv => Output::Csv(cio::plane_table(&cells)),
                Format::Json => Output::Json(cio::to_json(&Document::new(cells))?),
            }
        }
        Command::Curve { r_min, r_max } => {
            let points = match &c.grid {
                Some(g) => g.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!("--grid `{g}`: expected a point count"))
                })?,
                None => CurveSpec::default().points,
            };
            let spec = CurveSpec {
                r_a,
                r_min: *r_min,
                r_max: *r_max,
                points,
                g_a: params.g_a(),
                n_runs: c.n_runs.unwrap_or(CurveSpec::default().n_runs),
                seed: c.seed,
            };
            let pts = c_d_curve(&spec)?;
            match format {
                Format::Csv => Output::Csv(cio::curve_table(&pts)),
                Format::Json => Output::Json(cio::to_json(&Document::new(pts))?),
            }
        }
        Command::ErrorScaling {
            n_grid,
            repetitions,
            peak_target,
        } => {
            let study_params = if merged.g_q.is_some() {
                params
            } else {
                near_peak_params(params.g_a(), r_a, *peak_target)?
            };
            let res = error_scaling_study(&study_params, n_grid, *repetitions, c.seed)?;
            match format {
                Format::Csv => Output::Csv(cio::scaling_table(&res)),
                Format::Json => Output::Json(cio::to_json(&ScalingSummary::of(&res))?),
            }
        }
        Command::Simulate {
            horizon,
            dt,
            adaptive,
            samples,
            amplitudes_only,
        } => {
            let horizon = match horizon {
                Some(h) => *h,
                None => default_horizon(&params)?,
            };
            let control = match adaptive {
                Some(tol) => StepControl::adaptive(*tol),
                None => StepControl::fixed(*dt),
            }
            .recording_samples(horizon, *samples);
            if *amplitudes_only {
                let traj =
                    integrate_full(&params, &AmplitudeState::excited_qd(), horizon, &control)?;
                match format {
                    Format::Csv => Output::Csv(cio::trajectory_table(&traj)),
                    Format::Json => Output::Json(cio::to_json(&Document::new(traj))?),
                }
            } else {
                let rows = compare_routes(&params, horizon, &control)?;
                match format {
                    Format::Csv => Output::Csv(cio::routes_table(&rows)),
                    Format::Json => Output::Json(cio::to_json(&Document::new(rows))?),
                }
            }
        }
        Command::Estimate {
            n_a,
            n_b,
            n_dark,
            record,
        } => {
            let rec = match (record, n_a, n_b) {
                (Some(path), _, _) => cio::read_record(path)?,
                (None, Some(a), Some(b)) => MeasurementRecord::from_counts(*a, *b, *n_dark)?,
                _ => {
                    return Err(Error::InvalidInput(
                        "estimate needs --n-a and --n-b, or --record".into(),
                    ))
                }
            };
            if format == Format::Csv {
                return Err(Error::InvalidInput("estimate writes JSON only".into()));
            }
            let est = estimate_from_record(&rec, r_a)?;
            Output::Json(cio::to_json(&EstimateDocument::new(rec, r_a, est))?)
        }
    };
    emit(&c.out, output)
}

fn report(category: &str, message: &str) {
    let report = serde_json::json!({
        "schema_version": cio::SCHEMA_VERSION,
        "error": { "category": category, "message": message },
    });
    eprintln!("{report}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("usage", e.render().to_string().trim_end());
            return ExitCode::from(exit_code("usage"));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.category(), &e.to_string());
            ExitCode::from(exit_code(e.category()))
        }
    }
}
