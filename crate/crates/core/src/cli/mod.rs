//! The `crypto-metric` command line.
//!
//! Exit codes:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | other numerical failure                   |
//! | 2    | unreadable input, bad flags or empty grid |
//! | 3    | defective Hamiltonian                     |
//! | 4    | observables admit no positive metric      |
//! | 5    | observables leave the metric ambiguous    |
//! | 6    | perturbation solvability violated         |
//!
//! Machine-readable output goes to `--out` when given (and a one-line
//! summary to standard output), otherwise straight to standard output.

mod matrix_file;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

pub use matrix_file::{read_matrix, write_matrix, MatrixFile};

use crate::dyson::{dyson_map, hermitize};
use crate::error::Error;
use crate::matrix::ComplexMatrix;
use crate::metric::{
    assemble_metric, fix_ambiguity, kg_hamiltonian, kg_metric, quasi_hermiticity_residual,
    MetricFamily, MetricOperator,
};
use crate::perturbation::{
    dyson_from_metric, hidden_hermiticity_test, metric_series, PerturbationProblem,
};
use crate::spectra;
use crate::stability::{self, Direction, FamilySpec, LinearFamily, ScanReport};

/// Environment variable capping scan parallelism (0 = automatic).
pub const THREADS_ENV: &str = "CRYPTO_METRIC_THREADS";

/// Exact scan CSV header.
pub const SCAN_HEADER: [&str; 8] = [
    "lambda",
    "tau",
    "spectrum_real",
    "max_imag",
    "min_gap",
    "eigvec_cond",
    "metric_exists",
    "theta_min_eig",
];

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEFECTIVE: i32 = 3;
pub const EXIT_NO_POSITIVE: i32 = 4;
pub const EXIT_UNDERDETERMINED: i32 = 5;
pub const EXIT_SOLVABILITY: i32 = 6;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::InvalidGrid(_) | Error::InvalidTolerance(_) => EXIT_USAGE,
        Error::Defective { .. } => EXIT_DEFECTIVE,
        Error::NoPositiveSolution => EXIT_NO_POSITIVE,
        Error::Underdetermined { .. } => EXIT_UNDERDETERMINED,
        Error::SolvabilityViolated { .. } => EXIT_SOLVABILITY,
        _ => EXIT_FAILURE,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "crypto-metric",
    version,
    about = "Metrics and perturbation series for quasi-Hermitian Hamiltonians"
)]
pub struct Cli {
    /// Numerical tolerance, in (0, 1e-2).
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    /// Write the machine-readable result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Report)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Structured JSON report.
    #[value(alias = "structured-report", alias = "json")]
    Report,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues, reality and exceptional-point diagnostics.
    Diag(HamiltonianArgs),
    /// Metric family, or the unique metric fixed by observables.
    Metric {
        #[command(flatten)]
        hamiltonian: HamiltonianArgs,
        /// Observable matrix file; repeat for several.
        #[arg(long = "obs")]
        observables: Vec<PathBuf>,
    },
    /// Dyson map and the Hermitian partner Hamiltonian.
    Hermitize {
        #[command(flatten)]
        hamiltonian: HamiltonianArgs,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Perturbative metric and Dyson corrections for H + λW_λ.
    Perturb {
        #[command(flatten)]
        hamiltonian: HamiltonianArgs,
        #[command(flatten)]
        metric: MetricArgs,
        /// Taylor coefficient files W_0, W^(1), ... in order.
        #[arg(long = "w")]
        w: Vec<PathBuf>,
        /// Highest metric order K.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Coupling at which the hidden-Hermiticity test runs.
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
    },
    /// Reality/metric-existence table over a parameter grid.
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Args)]
pub struct HamiltonianArgs {
    /// Hamiltonian matrix file.
    #[arg(long = "h", conflicts_with = "family")]
    pub h: Option<PathBuf>,
    /// Builtin family instead of a file.
    #[arg(long, value_enum)]
    pub family: Option<Builtin>,
    /// Parameter of the builtin family.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Kg,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// Metric matrix file; defaults to the all-ones representative.
    #[arg(long, conflicts_with = "beta")]
    pub theta: Option<PathBuf>,
    /// Klein-Gordon metric parameter (builtin family only).
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub family: ScanFamily,
    /// τ grid for the kg family: `min:max:count`, a comma list, or a value.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub tau: String,
    /// λ grid: `min:max:count`, a comma list, or a value.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: String,
    /// Base Hamiltonian of the linear family.
    #[arg(long = "h")]
    pub h: Option<PathBuf>,
    /// Perturbation of the family (defaults to σ_x for kg).
    #[arg(long = "w")]
    pub w: Option<PathBuf>,
    /// Append the reality boundary found by bisection in `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub find_boundary: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanFamily {
    Kg,
    Linear,
}

/// Output of a successful command.
struct Output {
    summary: String,
    artifact: String,
}

/// A failed command that still has something to report.
struct Failure {
    error: Error,
    report: Option<Value>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Self {
            error,
            report: None,
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> i32 {
    if !(cli.tol > 0.0 && cli.tol < 1e-2) {
        eprintln!("error: --tol must lie in (0, 1e-2)");
        return EXIT_USAGE;
    }
    let result = match &cli.command {
        Command::Diag(h) => cmd_diag(cli, h),
        Command::Metric {
            hamiltonian,
            observables,
        } => cmd_metric(cli, hamiltonian, observables),
        Command::Hermitize {
            hamiltonian,
            metric,
        } => cmd_hermitize(cli, hamiltonian, metric),
        Command::Perturb {
            hamiltonian,
            metric,
            w,
            order,
            lambda,
        } => cmd_perturb(cli, hamiltonian, metric, w, *order, *lambda),
        Command::Scan(args) => cmd_scan(cli, args),
    };
    match result {
        Ok(out) => match emit(cli, &out.artifact) {
            Ok(()) => {
                if cli.out.is_some() {
                    println!("{}", out.summary);
                }
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: cannot write output: {e}");
                EXIT_FAILURE
            }
        },
        Err(failure) => {
            if let Some(report) = failure.report {
                let _ = emit(cli, &pretty(&report));
            }
            eprintln!("error: {}", failure.error);
            exit_code(&failure.error)
        }
    }
}

fn emit(cli: &Cli, artifact: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, artifact),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(artifact.as_bytes())?;
            if !artifact.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("reports always serialize")
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix_value(m: &ComplexMatrix, name: &str) -> Value {
    serde_json::to_value(MatrixFile::from_matrix(m, Some(name))).expect("matrix files serialize")
}

fn load_hamiltonian(args: &HamiltonianArgs) -> Result<ComplexMatrix, Error> {
    match (&args.h, args.family) {
        (Some(path), _) => read_matrix(path),
        (None, Some(Builtin::Kg)) => {
            if !args.tau.is_finite() {
                return Err(Error::Parse("tau must be finite".into()));
            }
            Ok(kg_hamiltonian(args.tau))
        }
        (None, None) => Err(Error::Parse(
            "give a Hamiltonian with --h or --family".into(),
        )),
    }
}

fn load_metric(
    args: &MetricArgs,
    ham: &HamiltonianArgs,
    h: &ComplexMatrix,
    tol: f64,
) -> Result<MetricOperator, Error> {
    if let Some(path) = &args.theta {
        let theta = read_matrix(path)?;
        theta
            .ensure_dim(h.dim())
            .map_err(|e| Error::Parse(e.to_string()))?;
        return MetricOperator::new(theta, h, tol);
    }
    if let Some(beta) = args.beta {
        if ham.family != Some(Builtin::Kg) || ham.h.is_some() {
            return Err(Error::Parse("--beta requires --family kg".into()));
        }
        return kg_metric(ham.tau, beta);
    }
    let family = MetricFamily::new(h, tol)?;
    assemble_metric(&family, &vec![1.0; family.dim()])
}

fn cmd_diag(cli: &Cli, args: &HamiltonianArgs) -> Result<Output, Failure> {
    let h = load_hamiltonian(args)?;
    let sys = spectra::diagonalize(&h, cli.tol)?;
    let (real, max_imag) = spectra::spectrum_is_real(&sys, cli.tol);
    let (gap, cond) = spectra::ep_proximity(&sys);
    let artifact = match cli.format {
        Format::Report => {
            let right = ComplexMatrix::from_matrix(sys.right_vectors().clone())?;
            let left = ComplexMatrix::from_matrix(sys.left_vectors().clone())?;
            pretty(&json!({
                "eigenvalues": sys.eigenvalues().iter().map(|&z| pair(z)).collect::<Vec<_>>(),
                "spectrum_real": real,
                "max_imag": max_imag,
                "min_gap": gap,
                "eigvec_cond": cond,
                "right_vectors": matrix_value(&right, "right_vectors"),
                "left_vectors": matrix_value(&left, "left_vectors"),
            }))
        }
        Format::Csv => {
            let mut s = String::from("index,re,im\n");
            for (i, z) in sys.eigenvalues().iter().enumerate() {
                let _ = writeln!(s, "{i},{},{}", z.re, z.im);
            }
            s
        }
    };
    let summary = format!(
        "{} eigenvalues, spectrum {}, min gap {gap:e}, eigenvector condition {cond:e}",
        sys.dim(),
        if real { "real" } else { "not real" }
    );
    Ok(Output { summary, artifact })
}

fn cmd_metric(
    cli: &Cli,
    args: &HamiltonianArgs,
    observable_paths: &[PathBuf],
) -> Result<Output, Failure> {
    let h = load_hamiltonian(args)?;
    let observables = observable_paths
        .iter()
        .map(|p| read_matrix(p))
        .collect::<Result<Vec<_>, _>>()?;
    for obs in &observables {
        obs.ensure_dim(h.dim())
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let family = MetricFamily::new(&h, cli.tol)?;
    let n = family.dim();
    let (kappa, warning) = if observables.is_empty() {
        (
            vec![1.0; n],
            Some(format!("family has {} free ratios", n - 1)),
        )
    } else {
        (fix_ambiguity(&family, &observables, cli.tol)?, None)
    };
    let theta = assemble_metric(&family, &kappa)?;
    let residual = quasi_hermiticity_residual(&h, theta.theta())?;
    let artifact = match cli.format {
        Format::Report => pretty(&json!({
            "kappa": kappa,
            "theta": matrix_value(theta.theta(), "theta"),
            "quasi_hermiticity_residual": residual,
            "smallest_eigenvalue": theta.smallest_eigenvalue(),
            "unique": warning.is_none(),
            "warning": warning,
        })),
        Format::Csv => {
            let mut s = String::from("index,kappa\n");
            for (i, k) in kappa.iter().enumerate() {
                let _ = writeln!(s, "{i},{k}");
            }
            s
        }
    };
    let summary = match &warning {
        Some(w) => format!("representative metric (all-ones weights); {w}"),
        None => format!("unique metric, quasi-Hermiticity residual {residual:e}"),
    };
    Ok(Output { summary, artifact })
}

fn cmd_hermitize(cli: &Cli, ham: &HamiltonianArgs, metric: &MetricArgs) -> Result<Output, Failure> {
    let h = load_hamiltonian(ham)?;
    let theta = load_metric(metric, ham, &h, cli.tol)?;
    let map = dyson_map(&theta)?;
    let small_h = hermitize(&h, &map, cli.tol)?;
    let defect = small_h.hermitian_defect();
    let artifact = match cli.format {
        Format::Report => pretty(&json!({
            "hermitian_hamiltonian": matrix_value(&small_h, "h"),
            "omega": matrix_value(map.omega(), "omega"),
            "hermiticity_defect": defect,
            "metric_cond": map.metric_cond(),
            "ill_conditioned": map.ill_conditioned(),
        })),
        Format::Csv => MatrixFile::from_matrix(&small_h, Some("h")).to_json(),
    };
    Ok(Output {
        summary: format!("hermitized, relative ‖h − h†‖ = {defect:e}"),
        artifact,
    })
}

fn cmd_perturb(
    cli: &Cli,
    ham: &HamiltonianArgs,
    metric: &MetricArgs,
    w_paths: &[PathBuf],
    order: usize,
    lambda: f64,
) -> Result<Output, Failure> {
    let h = load_hamiltonian(ham)?;
    let theta = load_metric(metric, ham, &h, cli.tol)?;
    let w_coeffs = w_paths
        .iter()
        .map(|p| read_matrix(p))
        .collect::<Result<Vec<_>, _>>()?;
    for w in &w_coeffs {
        w.ensure_dim(h.dim())
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    let problem = PerturbationProblem::new(&h, theta.clone(), w_coeffs, cli.tol)?;
    let series = metric_series(&problem, order).map_err(|error| {
        let report = match &error {
            Error::SolvabilityViolated { order, residual } => Some(json!({
                "error": "solvability_violated",
                "order": order,
                "residual": residual,
            })),
            _ => None,
        };
        Failure { error, report }
    })?;
    let dyson = dyson_from_metric(&series, &theta)?;
    let delta = ComplexMatrix::from_matrix(dyson.evaluate(lambda).resize(
        h.dim(),
        h.dim(),
        Complex64::ZERO,
    ))?;
    let w_lambda = ComplexMatrix::from_matrix(problem.w_at(lambda))?;
    let (admissible, adm_residual) =
        hidden_hermiticity_test(&w_lambda, &delta, &h, &theta, lambda, cli.tol)?;

    let corrections: Vec<Value> = series.coeffs()[1..]
        .iter()
        .enumerate()
        .map(|(k, t)| matrix_value(t, &format!("T{}", k + 1)))
        .collect();
    let deltas: Vec<Value> = dyson
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, d)| matrix_value(d, &format!("Delta{k}")))
        .collect();
    let artifact = match cli.format {
        Format::Report => pretty(&json!({
            "order": order,
            "gauge": series.gauge(),
            "metric_corrections": corrections,
            "residuals": series.residuals()[1..].to_vec(),
            "delta": deltas,
            "lambda": lambda,
            "admissible": admissible,
            "admissibility_residual": adm_residual,
        })),
        Format::Csv => {
            let mut s = String::from("order,residual,norm\n");
            for (k, (t, r)) in series
                .coeffs()
                .iter()
                .zip(series.residuals())
                .enumerate()
                .skip(1)
            {
                let _ = writeln!(s, "{k},{r},{}", t.frobenius_norm());
            }
            s
        }
    };
    Ok(Output {
        summary: format!(
            "metric corrections to order {order}; {} at lambda = {lambda}",
            if admissible {
                "admissible"
            } else {
                "not admissible"
            }
        ),
        artifact,
    })
}

/// Parses `min:max:count`, a comma-separated list, or a single value.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    let bad = |what: &str| Error::InvalidGrid(format!("{what} in '{text}'"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("bad number"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [min, max, count] => {
            let (min, max) = (num(min)?, num(max)?);
            let count: usize = count.trim().parse().map_err(|_| bad("bad count"))?;
            match count {
                0 => Vec::new(),
                1 => vec![min],
                _ => (0..count)
                    .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
                    .collect(),
            }
        }
        [single] if single.trim().is_empty() => Vec::new(),
        [single] => single.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(bad("expected min:max:count")),
    };
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("empty grid '{text}'")));
    }
    Ok(grid)
}

fn parse_bracket(text: &str) -> Result<(f64, f64), Error> {
    let bad = || Error::InvalidGrid(format!("bracket must be lo:hi, got '{text}'"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

fn scan_threads() -> Result<usize, Error> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{THREADS_ENV} must be a non-negative integer"))),
        Err(_) => Ok(0),
    }
}

/// Scan table with the fixed header; `tau` is empty for linear families.
pub fn scan_csv(report: &ScanReport) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(SCAN_HEADER).expect("in-memory write");
    for p in &report.points {
        wtr.write_record([
            p.lambda.to_string(),
            p.tau.map(|t| t.to_string()).unwrap_or_default(),
            p.spectrum_real.to_string(),
            p.max_imag.to_string(),
            p.min_gap.to_string(),
            p.eigvec_cond.to_string(),
            p.metric_exists.to_string(),
            p.theta_min_eig.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn cmd_scan(cli: &Cli, args: &ScanArgs) -> Result<Output, Failure> {
    let lambdas = parse_grid(&args.lambda)?;
    let spec = match args.family {
        ScanFamily::Kg => {
            let taus = parse_grid(&args.tau)?;
            match &args.w {
                Some(path) => FamilySpec::kg_with_perturbation(taus, lambdas, read_matrix(path)?)
                    .map_err(|e| Error::Parse(e.to_string()))?,
                None => FamilySpec::kg(taus, lambdas)?,
            }
        }
        ScanFamily::Linear => {
            let (Some(h), Some(w)) = (&args.h, &args.w) else {
                return Err(Error::Parse("linear family needs --h and --w".into()).into());
            };
            let family = LinearFamily::new(read_matrix(h)?, read_matrix(w)?)
                .map_err(|e| Error::Parse(e.to_string()))?;
            FamilySpec::linear(family, lambdas)?
        }
    };
    let bracket = args
        .find_boundary
        .as_deref()
        .map(parse_bracket)
        .transpose()?;
    let report = stability::reality_scan_with_threads(&spec, cli.tol, scan_threads()?);

    let boundaries: Vec<(f64, Option<f64>)> = match bracket {
        None => Vec::new(),
        Some(br) => {
            let families: Vec<(LinearFamily, Option<f64>)> = match spec.family() {
                stability::Family::Linear(f) => vec![(f.clone(), None)],
                stability::Family::Kg { taus, perturbation } => taus
                    .iter()
                    .map(|&t| {
                        LinearFamily::new(kg_hamiltonian(t), perturbation.clone())
                            .map(|f| (f, Some(t)))
                    })
                    .collect::<Result<_, _>>()?,
            };
            families
                .iter()
                .map(|(f, tau)| {
                    let width = (cli.tol * 100.0).max(1e-12);
                    let value = stability::lambda_max(f, Direction::Forward, br, width, cli.tol)
                        .unwrap_or(f64::NAN);
                    (value, *tau)
                })
                .collect()
        }
    };

    let artifact = match cli.format {
        Format::Csv => {
            let mut s = scan_csv(&report);
            for (value, tau) in &boundaries {
                match tau {
                    Some(t) => {
                        let _ = writeln!(s, "lambda_max,{value},{t}");
                    }
                    None => {
                        let _ = writeln!(s, "lambda_max,{value}");
                    }
                }
            }
            s
        }
        Format::Report => {
            let points: Vec<Value> = report
                .points
                .iter()
                .map(|p| {
                    json!({
                        "lambda": p.lambda,
                        "tau": p.tau,
                        "spectrum_real": p.spectrum_real,
                        "max_imag": finite_or_null(p.max_imag),
                        "min_gap": finite_or_null(p.min_gap),
                        "eigvec_cond": finite_or_null(p.eigvec_cond),
                        "metric_exists": p.metric_exists,
                        "theta_min_eig": finite_or_null(p.theta_min_eig),
                        "failure": p.failure,
                    })
                })
                .collect();
            let bounds: Vec<Value> = boundaries
                .iter()
                .map(|(v, t)| json!({"lambda_max": finite_or_null(*v), "tau": t}))
                .collect();
            pretty(&json!({"points": points, "boundaries": bounds}))
        }
    };
    let real = report.points.iter().filter(|p| p.spectrum_real).count();
    Ok(Output {
        summary: format!(
            "{} grid points, {real} with real spectrum",
            report.points.len()
        ),
        artifact,
    })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
