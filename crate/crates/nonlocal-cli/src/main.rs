//! Command-line front end for the `nonlocal` library: single-shot maximal
//! Bell-violation reports, frontier and GHZ sweeps, the Monte Carlo survey
//! of GHZ-diagonal states, and spin-chain correlator bounds.
//!
//! Exit codes (each error class is distinct):
//!   0  success
//!   2  command-line usage error (reported by the argument parser)
//!   3  I/O failure (missing file, unwritable output, ...)
//!   4  malformed input (JSON/CSV parse error or schema mismatch)
//!   5  invalid parameter (value out of range, bad spectrum, wrong dimension)
//!   6  invalid state (not a density matrix, or not diagonal where required)
//!   7  the settings optimizer failed to converge

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nonlocal::chain::{
    chsh_max_from_correlators, mermin_bound_from_correlators, read_correlators2_csv,
    read_correlators3_csv,
};
use nonlocal::chsh::{
    chsh_frontier_R, chsh_frontier_lambda_point, chsh_max_bell_diagonal, chsh_max_mems,
    mems_state, mnms_state, write_frontier_csv, BellDiagonalSpectrum, FamilyTag, FrontierMeasure,
    FrontierPoint, MnmsRegion,
};
use nonlocal::mabk::{
    ghz_sweep, ghz_violation_threshold, mabk_bound_diagonal, mabk_diagonal_ceiling, mabk_z_value,
    write_ghz_csv, Bell4DiagonalSpectrum,
};
use nonlocal::mermin::{
    classify, mermin_bound_diagonal, mermin_frontier_R, solve_mermin_angles, survey,
    werner3_spectrum, write_categories_csv, write_histogram_csv, Category, MerminDiagonalSpectrum,
};
use nonlocal::operators::{default_starts, maximize_violation, BellFamily};
use nonlocal::state::{change_basis, concurrence, mixedness, state_from_json, BasisSet, DensityMatrix};
use nonlocal::{Error, Result};

const DEFAULT_SEED: u64 = 0xB311;

/// Maximal Bell-inequality violations for small qubit registers.
#[derive(Parser)]
#[command(name = "nonlocal", version, about, long_about = None)]
struct Cli {
    /// RNG seed; every randomized command is bit-deterministic for a fixed seed
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Output file (output directory for `survey`); stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Closed form; requires a state diagonal in the magic basis
    Closed,
    /// Multi-start settings optimizer; works for any state
    Optimize,
}

/// Exactly one input: a density-matrix JSON file or an inline spectrum.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct StateInput {
    /// Density-matrix JSON file ({"dim": d, "re": [[...]], "im": [[...]]})
    #[arg(long)]
    state: Option<PathBuf>,

    /// Inline eigenvalues in the magic basis, e.g. "0.6,0.2,0.1,0.1"
    #[arg(long)]
    spectrum: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal CHSH violation of a two-qubit state
    Chsh {
        #[command(flatten)]
        input: StateInput,
        #[arg(long, value_enum, default_value_t = Method::Optimize)]
        method: Method,
        /// Random restarts for the optimizer (default 50)
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Maximal Mermin violation of a three-qubit state
    Mermin {
        #[command(flatten)]
        input: StateInput,
        #[arg(long, value_enum, default_value_t = Method::Optimize)]
        method: Method,
        /// Random restarts for the optimizer (default 200)
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Maximal four-party MABK violation of a four-qubit state
    Mabk {
        #[command(flatten)]
        input: StateInput,
        #[arg(long, value_enum, default_value_t = Method::Optimize)]
        method: Method,
        /// Random restarts for the optimizer (default 500)
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Sweep a maximal-violation frontier curve
    Frontier {
        #[arg(long, value_enum, ignore_case = true)]
        family: FrontierFamily,
        /// Lower end of the sweep (default: the family's domain start)
        #[arg(long)]
        from: Option<f64>,
        /// Upper end of the sweep (default: the family's domain end)
        #[arg(long)]
        to: Option<f64>,
        /// Number of intervals; emits steps+1 rows
        #[arg(long, default_value_t = 300)]
        steps: usize,
    },
    /// Maximally entangled mixed state at a given concurrence
    Mems {
        /// Concurrence in [0, 1]
        #[arg(long)]
        x: f64,
    },
    /// Maximally nonlocal mixed state at a given parameter
    Mnms {
        /// Family parameter (region I: [0, 1/2]; region II: [0, 1/4])
        #[arg(long)]
        x: f64,
        #[arg(long, value_enum, default_value_t = Region::I)]
        region: Region,
    },
    /// Three-qubit Werner state report
    Werner3 {
        /// Mixing weight in [0, 1]
        #[arg(long)]
        x: f64,
    },
    /// Monte Carlo survey of uniform GHZ-diagonal three-qubit states
    Survey {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Histogram bins on [0, 4]
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Worker threads (default: one per core); the result is identical
        /// for any worker count
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Generalized-GHZ violation sweep over the superposition weight p
    Ghz {
        /// Number of parties (>= 3)
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        /// Number of intervals; emits steps+1 rows
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Bell bounds from spin-chain correlator CSV files
    Chain {
        /// Correlator CSV (2-site: site_config,T_xx,T_yy,T_zz,T_xy;
        /// 3-site: site_config,T_zzz,T_zxx,T_xzx,T_xxz)
        #[arg(long)]
        input: PathBuf,
        /// Number of chain sites per row
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        sites: u8,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FrontierFamily {
    /// CHSH maximum vs participation ratio R on [1, 4]
    ChshR,
    /// CHSH maximum vs largest eigenvalue on [0.25, 1]
    ChshLambda,
    /// Mermin maximum vs participation ratio R on [1, 8]
    MerminR,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Region {
    I,
    Ii,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        Error::Parse(_) | Error::SchemaMismatch { .. } => 4,
        Error::OutOfRange { .. }
        | Error::BadSpectrum { .. }
        | Error::NotNormalized { .. }
        | Error::NotOrthogonal { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidDimension { .. }
        | Error::BadPartyIndex { .. }
        | Error::WrongPartyCount { .. }
        | Error::BadPartyCount { .. } => 5,
        Error::NotHermitian { .. }
        | Error::NotUnitTrace { .. }
        | Error::NotPSD { .. }
        | Error::NotBellDiagonal { .. }
        | Error::NotAState { .. } => 6,
        Error::NoConvergence { .. } => 7,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Chsh {
            input,
            method,
            starts,
        } => cmd_chsh(input, *method, *starts, cli.seed, cli.format, out),
        Command::Mermin {
            input,
            method,
            starts,
        } => cmd_mermin(input, *method, *starts, cli.seed, cli.format, out),
        Command::Mabk {
            input,
            method,
            starts,
        } => cmd_mabk(input, *method, *starts, cli.seed, cli.format, out),
        Command::Frontier {
            family,
            from,
            to,
            steps,
        } => cmd_frontier(*family, *from, *to, *steps, cli.format, out),
        Command::Mems { x } => cmd_mems(*x, cli.format, out),
        Command::Mnms { x, region } => cmd_mnms(*x, *region, cli.format, out),
        Command::Werner3 { x } => cmd_werner3(*x, cli.format, out),
        Command::Survey {
            samples,
            bins,
            workers,
        } => cmd_survey(*samples, cli.seed, *bins, *workers, out),
        Command::Ghz { n, from, to, steps } => cmd_ghz(*n, *from, *to, *steps, cli.format, out),
        Command::Chain { input, sites } => cmd_chain(input, *sites, cli.format, out),
    }
}

// ---------------------------------------------------------------------------
// output plumbing

/// Round to nine decimal places so emitted numbers are reproducible across
/// platforms and diff-friendly.
fn round9(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    // avoid "-0.0" in output
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn num(x: f64) -> Value {
    json!(round9(x))
}

fn write_output(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

/// Emit an ordered list of (key, value) pairs as a JSON object or a
/// two-line CSV (header row, value row).
fn emit_report(pairs: &[(&str, Value)], format: Format, out: Option<&Path>) -> Result<()> {
    let bytes = match format {
        Format::Json => {
            let map: serde_json::Map<String, Value> = pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect();
            let mut text = serde_json::to_string_pretty(&Value::Object(map))
                .expect("report serializes");
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(pairs.iter().map(|(k, _)| *k)).map_err(csv_err)?;
            w.write_record(pairs.iter().map(|(_, v)| match v {
                Value::String(s) => s.clone(),
                other => serde_json::to_string(other).expect("value serializes"),
            }))
            .map_err(csv_err)?;
            w.into_inner().expect("in-memory writer flushes")
        }
    };
    write_output(&bytes, out)
}

/// Emit uniform rows as CSV (one header + one line per row) or a JSON array.
fn emit_rows(header: &[&str], rows: &[Vec<Value>], format: Format, out: Option<&Path>) -> Result<()> {
    let bytes = match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header).map_err(csv_err)?;
            for row in rows {
                w.write_record(row.iter().map(|v| match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) if n.is_f64() => {
                        format!("{:.9}", n.as_f64().expect("checked f64"))
                    }
                    other => serde_json::to_string(other).expect("value serializes"),
                }))
                .map_err(csv_err)?;
            }
            w.into_inner().expect("in-memory writer flushes")
        }
        Format::Json => {
            let array: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let map: serde_json::Map<String, Value> = header
                        .iter()
                        .zip(row.iter())
                        .map(|(k, v)| (k.to_string(), v.clone()))
                        .collect();
                    Value::Object(map)
                })
                .collect();
            let mut text =
                serde_json::to_string_pretty(&Value::Array(array)).expect("rows serialize");
            text.push('\n');
            text.into_bytes()
        }
    };
    write_output(&bytes, out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

// ---------------------------------------------------------------------------
// state input

fn load_state(path: &Path, expected_dim: usize) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path)?;
    let rho = state_from_json(&text)?;
    if rho.dim() != expected_dim {
        return Err(Error::DimensionMismatch {
            expected: expected_dim,
            got: rho.dim(),
        });
    }
    Ok(rho)
}

fn parse_spectrum(s: &str, expected: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad spectrum entry {:?}", t.trim())))
        })
        .collect::<Result<_>>()?;
    if values.len() != expected {
        return Err(Error::Parse(format!(
            "spectrum must have {expected} comma-separated values, got {}",
            values.len()
        )));
    }
    Ok(values)
}

/// Diagonal of `rho` in `basis`; errors unless the off-diagonal Frobenius
/// norm is below 1e-8.
fn diagonal_in_basis(rho: &DensityMatrix, basis: &BasisSet) -> Result<Vec<f64>> {
    let in_basis = change_basis(rho, basis)?;
    let m = in_basis.matrix();
    let d = m.dim();
    let mut off_sq = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                off_sq += m.get(i, j).norm_sqr();
            }
        }
    }
    let norm = off_sq.sqrt();
    if norm >= 1e-8 {
        return Err(Error::NotBellDiagonal { norm });
    }
    Ok((0..d).map(|i| m.get(i, i).re.max(0.0)).collect())
}

fn settings_value(settings: &nonlocal::ObserverSettings) -> Value {
    serde_json::to_value(settings).expect("settings serialize")
}

// ---------------------------------------------------------------------------
// report commands

fn cmd_chsh(
    input: &StateInput,
    method: Method,
    starts: Option<usize>,
    seed: u64,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let rho = match (&input.state, &input.spectrum) {
        (Some(path), _) => load_state(path, 4)?,
        (None, Some(text)) => {
            let v = parse_spectrum(text, 4)?;
            BellDiagonalSpectrum::new([v[0], v[1], v[2], v[3]])?.state()
        }
        (None, None) => unreachable!("clap enforces the input group"),
    };
    let scalars = mixedness(&rho);
    let c = concurrence(&rho)?;
    let mut pairs: Vec<(&str, Value)> = Vec::new();
    match method {
        Method::Closed => {
            let diag = diagonal_in_basis(&rho, &BasisSet::bell(0.0))?;
            let spectrum = BellDiagonalSpectrum::new([diag[0], diag[1], diag[2], diag[3]])?;
            pairs.push(("value", num(chsh_max_bell_diagonal(&spectrum))));
            pairs.push(("method", json!("closed")));
        }
        Method::Optimize => {
            let report = maximize_violation(
                &rho,
                BellFamily::Chsh,
                starts.unwrap_or_else(|| default_starts(BellFamily::Chsh)),
                seed,
            )?;
            pairs.push(("value", num(report.value)));
            pairs.push(("method", json!("optimize")));
            pairs.push(("settings", settings_value(&report.settings)));
            pairs.push(("starts", json!(report.starts)));
        }
    }
    pairs.push(("R", num(scalars.participation_ratio)));
    pairs.push(("lambda_max", num(scalars.max_eigenvalue)));
    pairs.push(("concurrence", num(c)));
    emit_report(&pairs, format, out)
}

fn cmd_mermin(
    input: &StateInput,
    method: Method,
    starts: Option<usize>,
    seed: u64,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let rho = match (&input.state, &input.spectrum) {
        (Some(path), _) => load_state(path, 8)?,
        (None, Some(text)) => {
            let v = parse_spectrum(text, 8)?;
            let mut values = [0.0f64; 8];
            values.copy_from_slice(&v);
            MerminDiagonalSpectrum::from_values(values)?.state()
        }
        (None, None) => unreachable!("clap enforces the input group"),
    };
    let scalars = mixedness(&rho);
    let mut pairs: Vec<(&str, Value)> = Vec::new();
    match method {
        Method::Closed => {
            let diag = diagonal_in_basis(&rho, &BasisSet::ghz(3))?;
            let mut values = [0.0f64; 8];
            values.copy_from_slice(&diag);
            let spectrum = MerminDiagonalSpectrum::from_values(values)?;
            let solved = solve_mermin_angles(&spectrum);
            let report = classify(&spectrum);
            pairs.push(("value", num(solved.value)));
            pairs.push(("method", json!("closed")));
            pairs.push(("bound", num(mermin_bound_diagonal(&spectrum))));
            pairs.push(("a_phases", json!(solved.a_phases.map(round9))));
            pairs.push(("b_phases", json!(solved.b_phases.map(round9))));
            pairs.push(("category", json!(report.category.label())));
            pairs.push(("ppt_flags", json!(report.ppt_flags)));
        }
        Method::Optimize => {
            let report = maximize_violation(
                &rho,
                BellFamily::Mermin,
                starts.unwrap_or_else(|| default_starts(BellFamily::Mermin)),
                seed,
            )?;
            pairs.push(("value", num(report.value)));
            pairs.push(("method", json!("optimize")));
            pairs.push(("settings", settings_value(&report.settings)));
            pairs.push(("starts", json!(report.starts)));
        }
    }
    pairs.push(("R", num(scalars.participation_ratio)));
    pairs.push(("lambda_max", num(scalars.max_eigenvalue)));
    emit_report(&pairs, format, out)
}

fn cmd_mabk(
    input: &StateInput,
    method: Method,
    starts: Option<usize>,
    seed: u64,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let rho = match (&input.state, &input.spectrum) {
        (Some(path), _) => load_state(path, 16)?,
        (None, Some(text)) => {
            let v = parse_spectrum(text, 16)?;
            let mut values = [0.0f64; 16];
            values.copy_from_slice(&v);
            Bell4DiagonalSpectrum::from_values(values)?.state()
        }
        (None, None) => unreachable!("clap enforces the input group"),
    };
    let scalars = mixedness(&rho);
    let mut pairs: Vec<(&str, Value)> = Vec::new();
    match method {
        Method::Closed => {
            let diag = diagonal_in_basis(&rho, &BasisSet::ghz(4))?;
            let mut values = [0.0f64; 16];
            values.copy_from_slice(&diag);
            let spectrum = Bell4DiagonalSpectrum::from_values(values)?;
            pairs.push(("value", num(mabk_diagonal_ceiling(&spectrum))));
            pairs.push(("method", json!("closed")));
            pairs.push(("transverse_bound", num(mabk_bound_diagonal(&spectrum))));
            pairs.push(("z_value", num(mabk_z_value(&spectrum))));
        }
        Method::Optimize => {
            let report = maximize_violation(
                &rho,
                BellFamily::Mabk4,
                starts.unwrap_or_else(|| default_starts(BellFamily::Mabk4)),
                seed,
            )?;
            pairs.push(("value", num(report.value)));
            pairs.push(("method", json!("optimize")));
            pairs.push(("settings", settings_value(&report.settings)));
            pairs.push(("starts", json!(report.starts)));
        }
    }
    pairs.push(("lvm_bound", num(BellFamily::Mabk4.lvm_bound())));
    pairs.push(("quantum_max", num(BellFamily::Mabk4.quantum_max())));
    pairs.push(("R", num(scalars.participation_ratio)));
    pairs.push(("lambda_max", num(scalars.max_eigenvalue)));
    emit_report(&pairs, format, out)
}

fn cmd_mems(x: f64, format: Format, out: Option<&Path>) -> Result<()> {
    let rho = mems_state(x)?;
    let scalars = mixedness(&rho);
    emit_report(
        &[
            ("x", num(x)),
            ("chsh_max", num(chsh_max_mems(x)?)),
            ("concurrence", num(concurrence(&rho)?)),
            ("R", num(scalars.participation_ratio)),
            ("lambda_max", num(scalars.max_eigenvalue)),
            ("purity", num(scalars.purity)),
        ],
        format,
        out,
    )
}

fn cmd_mnms(x: f64, region: Region, format: Format, out: Option<&Path>) -> Result<()> {
    let (lib_region, label) = match region {
        Region::I => (MnmsRegion::I, "I"),
        Region::Ii => (MnmsRegion::II, "II"),
    };
    let rho = mnms_state(x, lib_region)?;
    let diag = diagonal_in_basis(&rho, &BasisSet::bell(0.0))?;
    let spectrum = BellDiagonalSpectrum::new([diag[0], diag[1], diag[2], diag[3]])?;
    let scalars = mixedness(&rho);
    emit_report(
        &[
            ("x", num(x)),
            ("region", json!(label)),
            ("chsh_max", num(chsh_max_bell_diagonal(&spectrum))),
            ("concurrence", num(concurrence(&rho)?)),
            ("R", num(scalars.participation_ratio)),
            ("lambda_max", num(scalars.max_eigenvalue)),
            ("purity", num(scalars.purity)),
        ],
        format,
        out,
    )
}

fn cmd_werner3(x: f64, format: Format, out: Option<&Path>) -> Result<()> {
    let spectrum = werner3_spectrum(x)?;
    let report = classify(&spectrum);
    let r = spectrum.participation_ratio();
    emit_report(
        &[
            ("x", num(x)),
            ("mermin_bound", num(mermin_bound_diagonal(&spectrum))),
            ("R", num(r)),
            ("frontier_b_max", num(mermin_frontier_R(r)?)),
            ("category", json!(report.category.label())),
            ("ppt_flags", json!(report.ppt_flags)),
            ("distillable", json!(report.distillable)),
        ],
        format,
        out,
    )
}

// ---------------------------------------------------------------------------
// sweep commands

fn cmd_frontier(
    family: FrontierFamily,
    from: Option<f64>,
    to: Option<f64>,
    steps: usize,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let (lo, hi) = match family {
        FrontierFamily::ChshR => (1.0, 4.0),
        FrontierFamily::ChshLambda => (0.25, 1.0),
        FrontierFamily::MerminR => (1.0, 8.0),
    };
    let from = from.unwrap_or(lo);
    let to = to.unwrap_or(hi);
    let steps = steps.max(1);
    let mut points = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let x = from + (to - from) * k as f64 / steps as f64;
        points.push(match family {
            FrontierFamily::ChshR => chsh_frontier_R(x)?,
            FrontierFamily::ChshLambda => chsh_frontier_lambda_point(x)?,
            FrontierFamily::MerminR => FrontierPoint {
                measure: FrontierMeasure::R,
                x,
                b_max: mermin_frontier_R(x)?,
                family_state: FamilyTag::Werner3,
            },
        });
    }
    match format {
        Format::Csv => {
            let mut bytes = Vec::new();
            write_frontier_csv(&points, &mut bytes)?;
            write_output(&bytes, out)
        }
        Format::Json => {
            let rows: Vec<Vec<Value>> = points
                .iter()
                .map(|p| {
                    vec![
                        json!(p.measure.label()),
                        num(p.x),
                        num(p.b_max),
                        json!(p.family_state.label()),
                    ]
                })
                .collect();
            emit_rows(&["measure", "x", "b_max", "family_state"], &rows, format, out)
        }
    }
}

fn cmd_survey(
    samples: u64,
    seed: u64,
    bins: usize,
    workers: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    if samples < 1 {
        return Err(Error::OutOfRange {
            what: "samples",
            value: samples as f64,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    if bins < 1 {
        return Err(Error::OutOfRange {
            what: "bins",
            value: bins as f64,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let stats = match workers {
        // the survey merges fixed-size chunks associatively, so the result
        // is byte-identical for any thread count
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Parse(format!("thread pool: {e}")))?
            .install(|| survey(samples, seed, bins)),
        None => survey(samples, seed, bins),
    };
    let dir = out.unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;

    let mut categories = Vec::new();
    write_categories_csv(&stats, &mut categories)?;
    fs::write(dir.join("categories.csv"), categories)?;

    let mut histogram = Vec::new();
    write_histogram_csv(&stats, &mut histogram)?;
    fs::write(dir.join("histogram.csv"), histogram)?;

    let category_map: serde_json::Map<String, Value> = Category::ALL
        .iter()
        .map(|c| {
            (
                c.label().to_string(),
                json!({
                    "count": stats.category_counts[c.index()],
                    "probability": num(stats.category_probs[c.index()]),
                }),
            )
        })
        .collect();
    let summary = json!({
        "n_samples": stats.n_samples,
        "seed": stats.seed,
        "bins": stats.histogram.len(),
        "categories": Value::Object(category_map),
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(())
}

fn cmd_ghz(
    n: usize,
    from: f64,
    to: f64,
    steps: usize,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    ghz_violation_threshold(n)?;
    let rows = ghz_sweep(n, from, to, steps)?;
    match format {
        Format::Csv => {
            let mut bytes = Vec::new();
            write_ghz_csv(&rows, &mut bytes)?;
            write_output(&bytes, out)
        }
        Format::Json => {
            let table: Vec<Vec<Value>> = rows
                .iter()
                .map(|r| {
                    vec![
                        json!(r.n),
                        num(r.p),
                        num(r.sin2alpha),
                        num(r.leading_violation),
                        num(r.lvm_bound),
                        json!(r.violates),
                    ]
                })
                .collect();
            emit_rows(
                &["n", "p", "sin2alpha", "leading_violation", "lvm_bound", "violates"],
                &table,
                format,
                out,
            )
        }
    }
}

fn cmd_chain(input: &Path, sites: u8, format: Format, out: Option<&Path>) -> Result<()> {
    let file = fs::File::open(input)?;
    match sites {
        2 => {
            let rows = read_correlators2_csv(file)?;
            let table: Vec<Vec<Value>> = rows
                .iter()
                .map(|row| {
                    let b_max = chsh_max_from_correlators(&row.tensor);
                    vec![
                        json!(row.site_config),
                        num(row.tensor.t_xx),
                        num(row.tensor.t_yy),
                        num(row.tensor.t_zz),
                        num(row.tensor.t_xy),
                        num(b_max),
                        json!(b_max > 2.0),
                    ]
                })
                .collect();
            emit_rows(
                &["site_config", "T_xx", "T_yy", "T_zz", "T_xy", "b_max", "violates"],
                &table,
                format,
                out,
            )
        }
        3 => {
            let rows = read_correlators3_csv(file)?;
            let table: Vec<Vec<Value>> = rows
                .iter()
                .map(|row| {
                    let bound = mermin_bound_from_correlators(&row.tensor);
                    vec![
                        json!(row.site_config),
                        num(row.tensor.t_zzz),
                        num(row.tensor.t_zxx),
                        num(row.tensor.t_xzx),
                        num(row.tensor.t_xxz),
                        num(bound),
                        json!(bound > 2.0),
                    ]
                })
                .collect();
            emit_rows(
                &["site_config", "T_zzz", "T_zxx", "T_xzx", "T_xxz", "mermin_bound", "violates"],
                &table,
                format,
                out,
            )
        }
        _ => unreachable!("clap restricts --sites to 2 or 3"),
    }
}
