//! Command-line front end.
//!
//! Exit codes: 0 ok, 2 parse or input error, 3 numerical failure, 4 I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::criteria::blows_up;
use crate::decisive::{build_q, coefficients, GradientPair};
use crate::dynamics::{integrate_extended_oracle_with, radon_derivatives, solve_characteristic, OracleOptions};
use crate::dynamics::OracleOutcome;
use crate::epmodels::{model_matrix, sample_region, EPModel, GridSpec};
use crate::error::Error;
use crate::linalg2::{jordanize, Matrix2, DEFAULT_EPS};

/// `|inf q| ≤ MARGIN` marks a verdict as too close to the boundary to compare.
pub const MARGIN: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "gradcat", version, about = "Gradient blow-up criteria for 2x2 systems V_t + V1 V_x = QV")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral class, Jordan form and transition matrix of Q.
    Classify(Source),
    /// Blow-up verdict for initial gradients v0.
    Blowup {
        #[command(flatten)]
        source: Source,
        /// Initial gradients v1,v2
        #[arg(long = "v0", value_parser = parse_pair, allow_hyphen_values = true)]
        v0: (f64, f64),
        /// Also locate the first blow-up time
        #[arg(long)]
        time: bool,
    },
    /// Verdicts on a grid of initial gradients.
    Region {
        #[command(flatten)]
        source: Source,
        /// v1 range lo,hi
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        xr: (f64, f64),
        /// v2 range lo,hi
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        yr: (f64, f64),
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        /// Also locate blow-up times
        #[arg(long)]
        times: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// CSV trace t,x,V1,V2,v1,v2,status along one characteristic.
    Trace {
        #[command(flatten)]
        source: Source,
        /// Solution state V1,V2 at the foot of the characteristic
        #[arg(long = "V0", value_parser = parse_pair, allow_hyphen_values = true)]
        big_v0: (f64, f64),
        /// Initial gradients v1,v2
        #[arg(long = "v0", value_parser = parse_pair, allow_hyphen_values = true)]
        v0: (f64, f64),
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long = "t-max", default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Criterion verdict against direct integration.
    Oracle {
        #[command(flatten)]
        source: Source,
        /// Initial gradients v1,v2 (single comparison)
        #[arg(long = "v0", value_parser = parse_pair, allow_hyphen_values = true, required_unless_present = "batch")]
        v0: Option<(f64, f64)>,
        /// Number of random v0 drawn uniformly from [-box, box]^2
        #[arg(long, conflicts_with = "v0")]
        batch: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "box", default_value_t = 5.0)]
        half_width: f64,
        #[arg(long = "t-max", default_value_t = 50.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e8)]
        threshold: f64,
    },
}

/// Exactly one of `--Q` (row-major a,b,c,d) or `--model` (k,N,gamma).
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Matrix entries in row-major order: a,b,c,d
    #[arg(long = "Q", value_parser = parse_matrix, allow_hyphen_values = true)]
    q: Option<Matrix2>,
    /// Euler-Poisson model k,N,gamma giving Q = [[-gamma, k], [N, 0]]
    #[arg(long, value_parser = parse_model, allow_hyphen_values = true)]
    model: Option<EPModel>,
}

impl Source {
    fn matrix(&self) -> Matrix2 {
        match (&self.q, &self.model) {
            (Some(q), _) => *q,
            (None, Some(m)) => model_matrix(m),
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_reals(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", parts.len()));
    }
    parts
        .iter()
        .map(|p| {
            let v: f64 = p.parse().map_err(|_| format!("not a number: {p:?}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("not finite: {p:?}"))
            }
        })
        .collect()
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_reals(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_matrix(s: &str) -> Result<Matrix2, String> {
    let v = parse_reals(s, 4)?;
    Ok(Matrix2::new(v[0], v[1], v[2], v[3]))
}

fn parse_model(s: &str) -> Result<EPModel, String> {
    let v = parse_reals(s, 3)?;
    let int = |x: f64| if x.fract() == 0.0 { Ok(x as i32) } else { Err(format!("expected an integer, got {x}")) };
    EPModel::new(int(v[0])?, int(v[1])?, v[2]).map_err(|e| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical error: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// One criterion-versus-oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub v0: [f64; 2],
    pub criterion_verdict: bool,
    pub clause: String,
    pub oracle_verdict: OracleOutcome,
    /// `None` when the oracle is undecided.
    pub agree: Option<bool>,
    /// The analytic minimum of `q` is within `MARGIN` of zero.
    pub margin: bool,
    pub t_star: Option<f64>,
    pub t_blow: Option<f64>,
}

/// Runs the dispatcher (with blow-up time) and the direct oracle on one input.
pub fn compare_with_oracle(q: &Matrix2, v0: GradientPair, opts: &OracleOptions) -> Result<OracleComparison, Error> {
    let jd = jordanize(q, DEFAULT_EPS)?;
    let inf = build_q(&coefficients(&jd, v0)).infimum();
    let verdict = blows_up(q, v0, true)?;
    let oracle = integrate_extended_oracle_with(q, v0, opts)?;
    Ok(OracleComparison {
        v0: v0.as_array(),
        criterion_verdict: verdict.blows_up,
        clause: verdict.clause,
        oracle_verdict: oracle.outcome,
        agree: oracle.blew_up().map(|b| b == verdict.blows_up),
        margin: inf.abs() <= MARGIN,
        t_star: verdict.t_star,
        t_blow: oracle.t_blow,
    })
}

fn write_json(out: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    serde_json::to_writer(&mut *out, v).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn rows(m: &Matrix2) -> Value {
    json!([m.row1(), m.row2()])
}

fn cmd_classify(q: &Matrix2, out: &mut dyn Write) -> Result<(), CliError> {
    let jd = jordanize(q, DEFAULT_EPS)?;
    let mut v = serde_json::to_value(jd.class).expect("spectral class serializes");
    let obj = v.as_object_mut().expect("tagged enum is an object");
    let eig: Vec<[f64; 2]> = jd.class.eigenvalues().iter().map(|&(re, im)| [re, im]).collect();
    obj.insert("eigenvalues".into(), json!(eig));
    obj.insert("J".into(), rows(&jd.j));
    obj.insert("A".into(), rows(&jd.a));
    obj.insert("detA".into(), json!(jd.det_a));
    write_json(out, &v)
}

fn cmd_blowup(q: &Matrix2, v0: GradientPair, time: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let v = blows_up(q, v0, time)?;
    write_json(out, &serde_json::to_value(v).expect("verdict serializes"))
}

fn cmd_trace(
    q: &Matrix2,
    big_v0: [f64; 2],
    v0: GradientPair,
    x0: f64,
    t_max: f64,
    dt: f64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if !(t_max >= 0.0 && t_max.is_finite() && dt > 0.0 && dt.is_finite()) {
        return Err(CliError::Input(format!("need t-max >= 0 and dt > 0, got {t_max} and {dt}")));
    }
    writeln!(out, "t,x,V1,V2,v1,v2,status")?;
    let steps = (t_max / dt).round() as usize;
    for i in 0..=steps {
        let t = if i == steps { t_max } else { i as f64 * dt };
        match radon_derivatives(q, v0, t) {
            Ok(d) => {
                let s = solve_characteristic(q, big_v0, x0, t)?;
                writeln!(out, "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},ok", s.x, s.v1, s.v2, d.v1, d.v2)?;
            }
            Err(Error::BlowupCrossed { t_star }) => {
                let s = solve_characteristic(q, big_v0, x0, t_star)?;
                writeln!(out, "{t_star:.16e},{:.16e},{:.16e},{:.16e},,,blow-up", s.x, s.v1, s.v2)?;
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    q: &Matrix2,
    v0: Option<(f64, f64)>,
    batch: Option<usize>,
    seed: u64,
    half_width: f64,
    opts: &OracleOptions,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if let Some((a, b)) = v0 {
        let c = compare_with_oracle(q, GradientPair::checked(a, b)?, opts)?;
        return write_json(out, &serde_json::to_value(c).expect("comparison serializes"));
    }
    let n = batch.expect("clap requires v0 or batch");
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(CliError::Input(format!("box half-width must be positive, got {half_width}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<GradientPair> = (0..n)
        .map(|_| GradientPair::new(rng.random_range(-half_width..=half_width), rng.random_range(-half_width..=half_width)))
        .collect();
    let results: Vec<OracleComparison> = inputs
        .par_iter()
        .map(|v| compare_with_oracle(q, *v, opts))
        .collect::<Result<_, Error>>()?;
    let margin = results.iter().filter(|c| c.margin).count();
    let counted: Vec<&OracleComparison> = results.iter().filter(|c| !c.margin && c.agree.is_some()).collect();
    let undecided = results.iter().filter(|c| !c.margin && c.agree.is_none()).count();
    let agreed = counted.iter().filter(|c| c.agree == Some(true)).count();
    let disagreements: Vec<&&OracleComparison> = counted.iter().filter(|c| c.agree == Some(false)).take(20).collect();
    let rate = if counted.is_empty() { 1.0 } else { agreed as f64 / counted.len() as f64 };
    write_json(
        out,
        &json!({
            "samples": n,
            "seed": seed,
            "margin": margin,
            "undecided": undecided,
            "decided": counted.len(),
            "agreed": agreed,
            "agreement_rate": rate,
            "disagreements": disagreements,
        }),
    )
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Classify(source) => cmd_classify(&source.matrix(), out),
        Command::Blowup { source, v0, time } => cmd_blowup(&source.matrix(), GradientPair::checked(v0.0, v0.1)?, time, out),
        Command::Region { source, xr, yr, nx, ny, times, out: path, format } => {
            let spec = GridSpec { x_range: [xr.0, xr.1], y_range: [yr.0, yr.1], nx, ny };
            let grid = sample_region(&source.matrix(), spec, times)?;
            let mut w = BufWriter::new(File::create(&path)?);
            match format {
                Format::Csv => grid.write_csv(&mut w)?,
                Format::Json => {
                    serde_json::to_writer(&mut w, &grid).map_err(|e| CliError::Io(e.into()))?;
                    writeln!(w)?;
                    w.flush()?;
                }
            }
            Ok(())
        }
        Command::Trace { source, big_v0, v0, x0, t_max, dt, out: path } => {
            let (q, v0) = (source.matrix(), GradientPair::checked(v0.0, v0.1)?);
            match path {
                Some(p) => cmd_trace(&q, [big_v0.0, big_v0.1], v0, x0, t_max, dt, &mut BufWriter::new(File::create(p)?)),
                None => cmd_trace(&q, [big_v0.0, big_v0.1], v0, x0, t_max, dt, out),
            }
        }
        Command::Oracle { source, v0, batch, seed, half_width, t_max, threshold } => {
            let opts = OracleOptions { t_max, blow_threshold: threshold, ..Default::default() };
            cmd_oracle(&source.matrix(), v0, batch, seed, half_width, &opts, out)
        }
    }
}

/// Parses `args` (including the program name), runs the subcommand writing
/// its primary output to `out`, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gradcat: {e}");
            e.exit_code()
        }
    }
}
