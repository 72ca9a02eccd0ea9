//! Command implementations for the `ccauchy` binary.
//!
//! Exit codes: 0 success, 1 verification failure, 2 malformed input,
//! 3 invalid parameter, 4 dimension mismatch.

use ccauchy::cauchy::interleaved_real;
use ccauchy::json::fmt_f64;
use ccauchy::stats::closure_experiment;
use ccauchy::verify::{run_suite, Scale, SuiteConfig, GROUPS};
use ccauchy::{ComplexCauchy, Error, MobiusMap, C64};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use thiserror::Error as ThisError;

#[derive(Debug, Parser)]
#[command(name = "ccauchy", version, about = "Cauchy family on complex p-space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples as CSV (columns re_z1,im_z1,...).
    Sample {
        #[command(flatten)]
        dist: DistArg,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Evaluate the log density at points given in sample CSV format.
    Density {
        #[command(flatten)]
        dist: DistArg,
        #[arg(long, value_name = "FILE")]
        points: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Print the parameters of the image of --dist under --map.
    Pushforward {
        #[command(flatten)]
        dist: DistArg,
        #[command(flatten)]
        map: MapArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Print the equivalent real t-distribution with 2 degrees of freedom.
    Embed {
        #[command(flatten)]
        dist: DistArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Compare mapped samples with samples of the computed image law.
    ClosureTest {
        #[command(flatten)]
        dist: DistArg,
        #[command(flatten)]
        map: MapArg,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the verification suite and print a CSV summary.
    Verify {
        /// Restrict to these check groups (repeatable).
        #[arg(long, value_name = "NAME")]
        only: Vec<String>,
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// Reduced trial counts.
        #[arg(long)]
        quick: bool,
        /// Also write every underlying test report as JSON lines.
        #[arg(long, value_name = "FILE")]
        reports: Option<PathBuf>,
        #[arg(long, hide = true, default_value_t = 1.0)]
        density_scale: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Args)]
pub struct DistArg {
    #[arg(long, value_name = "FILE")]
    pub dist: PathBuf,
}

#[derive(Debug, Args)]
pub struct MapArg {
    #[arg(long, value_name = "FILE")]
    pub map: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Write to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Core(#[from] Error),
    #[error("csv: {0}")]
    Csv(String),
    #[error("verification failed")]
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed => 1,
            CliError::Io { .. } | CliError::Csv(_) => 2,
            CliError::Core(e) => match e {
                Error::Parse(_) | Error::InvalidShape(_) | Error::NonFinite(_) => 2,
                Error::DimensionMismatch { .. } => 4,
                _ => 3,
            },
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load_dist(arg: &DistArg) -> Result<ComplexCauchy, CliError> {
    Ok(ComplexCauchy::from_json(&read(&arg.dist)?)?)
}

fn load_map(arg: &MapArg) -> Result<MobiusMap, CliError> {
    Ok(MobiusMap::from_json(&read(&arg.map)?)?)
}

fn emit(out: &OutArg, text: &str) -> Result<(), CliError> {
    match &out.output {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn check_same_p(d: &ComplexCauchy, m: &MobiusMap) -> Result<(), CliError> {
    if d.p() != m.p() {
        return Err(Error::DimensionMismatch { expected: d.p(), found: m.p() }.into());
    }
    Ok(())
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()).into());
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("--alpha must lie in (0, 1), got {alpha}")).into());
    }
    Ok(())
}

/// Header `re_z1,im_z1,...,re_zp,im_zp`.
pub fn sample_header(p: usize) -> Vec<String> {
    (1..=p).flat_map(|j| [format!("re_z{j}"), format!("im_z{j}")]).collect()
}

fn csv_text(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Csv(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r.iter().map(|&x| fmt_f64(x))).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ascii"))
}

/// Reads points in sample CSV layout.
pub fn read_points(text: &str, p: usize) -> Result<Vec<Vec<C64>>, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut pts = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Csv(e.to_string()))?;
        if rec.len() != 2 * p {
            return Err(Error::DimensionMismatch { expected: 2 * p, found: rec.len() }.into());
        }
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| CliError::Csv(format!("{f:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        pts.push(vals.chunks(2).map(|c| C64::new(c[0], c[1])).collect());
    }
    Ok(pts)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample { dist, n, seed, out } => {
            check_n(n)?;
            let d = load_dist(&dist)?;
            let draws = d.sample(n, seed)?;
            emit(&out, &csv_text(&sample_header(d.p()), draws.iter().map(|z| interleaved_real(z)))?)
        }
        Command::Density { dist, points, out } => {
            let d = load_dist(&dist)?;
            let pts = read_points(&read(&points)?, d.p())?;
            let mut header = sample_header(d.p());
            header.push("log_density".into());
            let rows = pts.iter().map(|z| {
                let mut r = interleaved_real(z);
                r.push(d.log_density(z));
                r
            });
            emit(&out, &csv_text(&header, rows)?)
        }
        Command::Pushforward { dist, map, out } => {
            let (d, m) = (load_dist(&dist)?, load_map(&map)?);
            check_same_p(&d, &m)?;
            emit(&out, &(d.pushforward(&m)?.to_json() + "\n"))
        }
        Command::Embed { dist, out } => emit(&out, &(load_dist(&dist)?.real_embedding().to_json() + "\n")),
        Command::ClosureTest { dist, map, n, seed, alpha, out } => {
            check_alpha(alpha)?;
            let (d, m) = (load_dist(&dist)?, load_map(&map)?);
            check_same_p(&d, &m)?;
            let report = closure_experiment(&d, &m, n, seed, alpha)?;
            emit(&out, &(report.to_json_line() + "\n"))?;
            if report.passed {
                Ok(())
            } else {
                Err(CliError::VerificationFailed)
            }
        }
        Command::Verify { only, seed, alpha, quick, reports, density_scale, out } => {
            check_alpha(alpha)?;
            if let Some(bad) = only.iter().find(|g| !GROUPS.contains(&g.as_str())) {
                return Err(Error::InvalidArgument(format!(
                    "unknown group '{bad}'; expected one of {}",
                    GROUPS.join(", ")
                ))
                .into());
            }
            let cfg = SuiteConfig {
                seed,
                alpha,
                scale: if quick { Scale::QUICK } else { Scale::FULL },
                density_scale,
            };
            let names: Vec<&str> = only.iter().map(String::as_str).collect();
            let outcome = run_suite(&cfg, &names)?;
            emit(&out, &outcome.summary_csv())?;
            if let Some(p) = reports {
                fs::write(&p, outcome.reports_jsonl())
                    .map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
            }
            if outcome.all_passed() {
                Ok(())
            } else {
                Err(CliError::VerificationFailed)
            }
        }
    }
}

/// Applies `CCAUCHY_THREADS` (0 = sequential) to the global rayon pool.
pub fn configure_threads() {
    if let Some(n) = std::env::var("CCAUCHY_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
