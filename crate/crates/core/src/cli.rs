//! The `qcontract` command line: JSON inputs in, JSON reports out.
//!
//! Exit codes: 0 success, 1 parse or usage error, 2 failed precondition,
//! 3 numerical failure or failed verification.

use std::fmt::Write as _;
use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::contraction::{contraction_coefficient_with, fixed_point, mixing_time_bound, ContractionReport, Metric, MixingBound};
use crate::correlation::{classical_mu, gm_schmidt_spectrum, mu_f, mu_lin_k, CorrelationReport};
use crate::error::{Error, Result};
use crate::io::{self, MatrixJson};
use crate::monotone::{MonotoneFn, MonotoneId};
use crate::suites::{self, SuiteReport};
use crate::tolerances::Tolerances;

pub const THREADS_ENV: &str = "QCONTRACT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qcontract", version, about = "Contraction coefficients, maximal correlations and mixing-time bounds")]
pub struct RunConfig {
    /// Override a numerical tolerance, e.g. `gs_tol=1e-8`. Repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VALUE", global = true)]
    pub tol_override: Vec<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// χ²_f contraction coefficients of a channel at a state.
    Contraction {
        channel: PathBuf,
        state: PathBuf,
        /// Monotone functions (am, gm, hm, lm, power:k); defaults to the four means.
        #[arg(long = "f", value_delimiter = ',')]
        f: Vec<String>,
    },
    /// Mixing-time bounds at the channel's fixed point.
    Mixing {
        channel: PathBuf,
        #[arg(long)]
        delta: f64,
        /// trace_distance or relative_entropy.
        #[arg(long, default_value = "trace_distance")]
        metric: String,
        #[arg(long = "f-set", value_delimiter = ',')]
        f_set: Vec<String>,
    },
    /// Maximal correlation coefficients of a bipartite state or joint table.
    Correlation {
        state: PathBuf,
        #[arg(long = "f", value_delimiter = ',')]
        f: Vec<String>,
        #[arg(long = "k", value_delimiter = ',')]
        k: Vec<f64>,
        /// Subsystem dimensions as `dA,dB`; inferred for tables.
        #[arg(long)]
        dims: Option<String>,
        /// Include the full GM Schmidt spectrum.
        #[arg(long)]
        spectrum: bool,
    },
    /// Seeded randomized invariant suites.
    Verify {
        /// dpi, ordering, identity, correspondence, tensorization, classical, saturation or all.
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => 1,
        Error::ConvergenceFailure(_)
        | Error::LinearDependence(_)
        | Error::ImagResidualTooLarge(_)
        | Error::LeadingEigenvalue(_)
        | Error::OutOfRange(_) => 3,
        _ => 2,
    }
}

#[derive(Debug, Serialize)]
struct MixingOutput {
    fixed_point: MatrixJson,
    metric: Metric,
    delta: f64,
    bounds: Vec<MixingBound>,
    min_steps: Option<u64>,
    min_f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Debug, Serialize)]
struct CorrelationOutput {
    reports: Vec<CorrelationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gm_schmidt_spectrum: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classical_mu: Option<f64>,
}

/// Result of a command: the JSON document, an optional table for terminals,
/// and the exit code.
struct Outcome {
    json: String,
    table: String,
    code: i32,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn parse_fs(names: &[String], default: Vec<MonotoneFn>) -> Result<Vec<MonotoneFn>> {
    if names.is_empty() {
        return Ok(default);
    }
    names.iter().map(|n| MonotoneFn::from_str(n.trim())).collect()
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("--dims expects dA,dB, got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn steps_text(steps: Option<u64>) -> String {
    steps.map(|n| n.to_string()).unwrap_or_else(|| "infinity".into())
}

fn cmd_contraction(channel: &PathBuf, state: &PathBuf, f: &[String], tol: &Tolerances) -> Result<Outcome> {
    let fs = parse_fs(f, MonotoneFn::means())?;
    let e = io::read_channel(channel)?;
    let sigma = io::read_state(state)?.density().clone();
    let reports = fs
        .iter()
        .map(|f| contraction_coefficient_with(f, &e, &sigma, tol))
        .collect::<Result<Vec<ContractionReport>>>()?;
    let mut table = format!("{:<12} {:>14} {:>14} {:>12} {:>12}\n", "f", "eta", "lambda1", "onb_cond", "imag_res");
    for r in &reports {
        let _ = writeln!(
            table,
            "{:<12} {:>14.10} {:>14.10} {:>12.3e} {:>12.3e}",
            r.f, r.eta, r.lambda1, r.onb_condition, r.imag_residual
        );
    }
    Ok(Outcome { json: to_json(&reports), table, code: 0 })
}

fn cmd_mixing(channel: &PathBuf, delta: f64, metric: &str, f_set: &[String], tol: &Tolerances) -> Result<Outcome> {
    let metric = Metric::from_str(metric)?;
    let default = match metric {
        Metric::TraceDistance => MonotoneFn::means(),
        Metric::RelativeEntropy => vec![MonotoneFn::hm(), MonotoneFn::gm(), MonotoneFn::lm()],
    };
    let fs = parse_fs(f_set, default)?;
    let e = io::read_channel(channel)?;
    let pi = fixed_point(&e, tol)?;
    let bounds = fs
        .iter()
        .map(|f| mixing_time_bound(f, &e, &pi, delta, metric, tol))
        .collect::<Result<Vec<MixingBound>>>()?;
    let best = bounds.iter().filter(|b| b.steps.is_some()).min_by_key(|b| b.steps);
    let gm_infinite = bounds.iter().any(|b| b.f == MonotoneFn::gm().name() && b.steps.is_none());
    let note = if gm_infinite {
        Some("the GM coefficient equals 1, so every χ²_f coefficient does and no finite bound exists".to_string())
    } else if best.is_none() {
        Some("no requested coefficient is below 1; a GM run decides whether any finite bound exists".to_string())
    } else {
        None
    };
    let out = MixingOutput {
        fixed_point: MatrixJson::from_matrix(pi.matrix()),
        metric,
        delta,
        min_steps: best.and_then(|b| b.steps),
        min_f: best.map(|b| b.f.clone()),
        bounds,
        note,
    };
    let mut table = format!("{:<12} {:>14} {:>12}\n", "f", "eta", "steps");
    for b in &out.bounds {
        let _ = writeln!(table, "{:<12} {:>14.10} {:>12}", b.f, b.eta, steps_text(b.steps));
    }
    let _ = writeln!(table, "minimum: {}", steps_text(out.min_steps));
    Ok(Outcome { json: to_json(&out), table, code: 0 })
}

fn cmd_correlation(
    state: &PathBuf,
    f: &[String],
    k: &[f64],
    dims: Option<&str>,
    spectrum: bool,
) -> Result<Outcome> {
    let input = io::read_state(state)?;
    let rho = input.density();
    let (da, db) = match (dims.map(parse_dims).transpose()?, input.table_dims()) {
        (Some(d), Some(t)) if d != t => {
            return Err(Error::DimensionMismatch(format!("--dims {d:?} disagree with the {t:?} table")));
        }
        (Some(d), _) | (None, Some(d)) => d,
        (None, None) => return Err(Error::Parse("--dims dA,dB is required for a matrix state".into())),
    };
    if da * db != rho.dim() {
        return Err(Error::DimensionMismatch(format!("{da}x{db} does not factor a {}-dimensional state", rho.dim())));
    }
    let fs = if f.is_empty() && k.is_empty() { vec![MonotoneFn::gm()] } else { parse_fs(f, vec![])? };
    let mut reports = Vec::new();
    for f in &fs {
        reports.push(match f.id() {
            MonotoneId::Power(kk) if !f.in_gm_am_band() && (kk - 0.5).abs() > 1e-12 => mu_lin_k(kk, rho, da, db)?,
            _ => mu_f(f, rho, da, db)?,
        });
    }
    for &kk in k {
        reports.push(mu_lin_k(kk, rho, da, db)?);
    }
    let classical = match &input {
        io::StateInput::Classical { table, .. } => Some(classical_mu(table)?),
        io::StateInput::Quantum(_) => None,
    };
    let out = CorrelationOutput {
        reports,
        gm_schmidt_spectrum: if spectrum { Some(gm_schmidt_spectrum(rho, da, db)?) } else { None },
        classical_mu: classical,
    };
    let mut table = format!("{:<14} {:>14} {:>14}\n", "f", "mu", "lambda1");
    for r in &out.reports {
        let _ = writeln!(table, "{:<14} {:>14.10} {:>14.10}", r.f, r.mu, r.lambda1);
    }
    if let Some(c) = out.classical_mu {
        let _ = writeln!(table, "classical mu: {c:.10}");
    }
    Ok(Outcome { json: to_json(&out), table, code: 0 })
}

fn cmd_verify(suite: &str, seed: u64, trials: usize, tol: &Tolerances) -> Result<Outcome> {
    let reports: Vec<SuiteReport> = suites::run(suite, seed, trials, tol)?;
    let mut table = format!("{:<16} {:>8} {:>8} {:>6}\n", "suite", "checks", "failed", "pass");
    for r in &reports {
        let _ = writeln!(table, "{:<16} {:>8} {:>8} {:>6}", r.suite, r.checks, r.failures, r.pass);
    }
    let code = if reports.iter().all(|r| r.pass) { 0 } else { 3 };
    Ok(Outcome { json: to_json(&reports), table, code })
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parse(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(config: &RunConfig) -> Result<Outcome> {
    let mut tol = Tolerances::default();
    for o in &config.tol_override {
        tol.apply_override(o).map_err(|e| Error::Parse(e.to_string()))?;
    }
    match &config.command {
        Command::Contraction { channel, state, f } => cmd_contraction(channel, state, f, &tol),
        Command::Mixing { channel, delta, metric, f_set } => cmd_mixing(channel, *delta, metric, f_set, &tol),
        Command::Correlation { state, f, k, dims, spectrum } => cmd_correlation(state, f, k, dims.as_deref(), *spectrum),
        Command::Verify { suite, seed, trials } => cmd_verify(suite, *seed, *trials, &tol),
    }
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            };
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    match execute(&config) {
        Ok(outcome) => {
            let written = match &config.output {
                Some(path) => std::fs::write(path, &outcome.json).map_err(|e| e.to_string()),
                None => stdout.write_all(outcome.json.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(msg) = written {
                let _ = writeln!(stderr, "error: cannot write report: {msg}");
                return 1;
            }
            if std::io::stderr().is_terminal() {
                let _ = write!(stderr, "{}", outcome.table);
            }
            outcome.code
        }
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(stderr, "error: {e}");
            code
        }
    }
}
