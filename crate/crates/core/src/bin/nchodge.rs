use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use nchodge::algebra::Algebra;
use nchodge::forms::{FormsWindow, DEFAULT_DIM_CAP};
use nchodge::hodge::load_complex;
use nchodge::report::{self, GvOutput, MorseOutput, WittenOutput, SCHEMA};
use nchodge::selftest::{self, SelftestConfig};
use nchodge::spectral::SpectralConfig;
use nchodge::tangential::{godbillon_vey, morse_scan, witten_betti_sweep, ModelFile, MorseFunction, OmegaSpec, PhiSpec, ScanGrid};
use nchodge::{Error, GaussianRational, Scalar, ScalarMode};

#[derive(Parser)]
#[command(name = "nchodge", version, about = "Hodge theory on noncommutative differential forms and finite cochain complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Write the JSON report here (a `.csv` table goes alongside when the command has one).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "rational")]
    scalar: ScalarMode,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct Tolerances {
    /// Distance from 1 within which an eigenvalue of k counts as 1.
    #[arg(long, default_value_t = 1e-8)]
    eig_tol: f64,
    /// Distance from an admissible root of unity that is still accepted.
    #[arg(long, default_value_t = 1e-6)]
    root_tol: f64,
    /// Float-mode residual threshold.
    #[arg(long, default_value_t = 1e-10)]
    rank_tol: f64,
}

impl Tolerances {
    fn config(&self) -> Result<SpectralConfig, Error> {
        for (name, v) in [("--eig-tol", self.eig_tol), ("--root-tol", self.root_tol), ("--rank-tol", self.rank_tol)] {
            if !(v > 0.0) {
                return Err(Error::Parse(format!("{name} must be positive")));
            }
        }
        Ok(SpectralConfig { cluster_tol: self.eig_tol, root_tol: self.root_tol, float_residual_tol: self.rank_tol })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Operators d, b, k on the forms window and the DGA identities.
    NcReport {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, default_value_t = 4)]
        nmax: usize,
        /// Random instances per product identity.
        #[arg(long, default_value_t = 200)]
        checks: usize,
        /// Include the operator matrices in the report.
        #[arg(long)]
        matrices: bool,
    },
    /// Spectral decomposition of the Karoubi operator, Green operator and Hodge splitting.
    Spectral {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, default_value_t = 4)]
        nmax: usize,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Laplacians, harmonic spaces and Betti numbers of a finite complex.
    Hodge {
        #[arg(long)]
        complex: PathBuf,
    },
    /// Zeta-regularized determinants and Ray–Singer torsion.
    Torsion {
        #[arg(long)]
        complex: PathBuf,
    },
    /// Abelian Chern–Simons partition function of a length-one complex.
    CsPartition {
        #[arg(long)]
        complex: PathBuf,
    },
    /// Tangential Betti numbers of the Witten-deformed complexes over a τ grid.
    WittenSweep {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated τ values (overrides the model file).
        #[arg(long, value_delimiter = ',')]
        tau: Option<Vec<f64>>,
    },
    /// Tangential singularities of a leafwise function on the (h, v) strip.
    MorseScan {
        /// cos-h, cubic-bd, tilted-cos or constant.
        #[arg(long, conflicts_with = "model")]
        function: Option<String>,
        /// Model file whose `phi` names a built-in function.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        nh: usize,
        #[arg(long, default_value_t = 16)]
        nv: usize,
    },
    /// Godbillon–Vey integral of a plane field on T³.
    Gv {
        /// Built-in defining form, e.g. "dz+sin(2piz)dx".
        #[arg(long, conflicts_with = "model")]
        omega: Option<String>,
        /// File with a sampled or named defining form.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Largest accepted change of GV under grid doubling.
        #[arg(long, default_value_t = 1e-6)]
        gv_tol: f64,
    },
    /// Runs the full acceptance suite.
    Selftest,
}

struct Outcome {
    json: String,
    csv: Option<String>,
    passed: bool,
}

impl Outcome {
    fn new<T: Serialize>(value: &T, csv: Option<String>, passed: bool) -> Self {
        Self { json: report::to_json(value), csv, passed }
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    schema: u32,
    error: ErrorEntry<'a>,
    passed: bool,
}

#[derive(Serialize)]
struct ErrorEntry<'a> {
    code: &'a str,
    message: String,
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Io(_)
            | Error::Parse(_)
            | Error::ShapeMismatch(_)
            | Error::DimMismatch { .. }
            | Error::AssociativityViolation { .. }
            | Error::UnitViolation { .. }
            | Error::NotAComplex { .. }
            | Error::BadGram { .. }
            | Error::BadWeights(_)
            | Error::LeafTooSmall(_)
            | Error::GridTooCoarse(_)
            | Error::WindowTooLarge { .. }
            | Error::DegreeOutOfWindow { .. }
    )
}

fn dim_cap() -> Result<usize, Error> {
    match std::env::var("NCHODGE_CAP") {
        Ok(v) => v.parse().map_err(|_| Error::Parse(format!("NCHODGE_CAP={v} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_DIM_CAP),
    }
}

fn algebra_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "algebra".into(), |s| s.to_string_lossy().into_owned())
}

fn window<S: Scalar>(path: &Path, nmax: usize) -> Result<FormsWindow<S>, Error> {
    FormsWindow::with_cap(Arc::new(Algebra::<S>::load(path)?), nmax, dim_cap()?)
}

fn nc_report<S: Scalar>(path: &Path, nmax: usize, seed: u64, checks: usize, matrices: bool) -> Result<Outcome, Error> {
    let r = report::nc_report(&algebra_name(path), &window::<S>(path, nmax)?, seed, checks, matrices)?;
    Ok(Outcome::new(&r, None, r.passed))
}

fn spectral<S: Scalar>(path: &Path, nmax: usize, cfg: SpectralConfig) -> Result<Outcome, Error> {
    let r = report::spectral_report(&algebra_name(path), &window::<S>(path, nmax)?, cfg)?;
    Ok(Outcome::new(&r, None, r.passed))
}

macro_rules! by_scalar {
    ($mode:expr, $f:ident ( $($arg:expr),* )) => {
        match $mode {
            ScalarMode::Rational => $f::<BigRational>($($arg),*),
            ScalarMode::Gaussian => $f::<GaussianRational>($($arg),*),
            ScalarMode::Float => $f::<Complex64>($($arg),*),
        }
    };
}

fn run(command: &Command, common: &Common) -> Result<Outcome, Error> {
    match command {
        Command::NcReport { algebra, nmax, checks, matrices } => {
            by_scalar!(common.scalar, nc_report(algebra, *nmax, common.seed, *checks, *matrices))
        }
        Command::Spectral { algebra, nmax, tol } => {
            let cfg = tol.config()?;
            by_scalar!(common.scalar, spectral(algebra, *nmax, cfg))
        }
        Command::Hodge { complex } => {
            let c = load_complex(complex)?;
            let r = report::hodge_report(&c)?;
            Ok(Outcome::new(&r, Some(report::spectra_csv(&c)), r.passed))
        }
        Command::Torsion { complex } => {
            let c = load_complex(complex)?;
            Ok(Outcome::new(&report::torsion_output(&c)?, Some(report::spectra_csv(&c)), true))
        }
        Command::CsPartition { complex } => {
            let c = load_complex(complex)?;
            Ok(Outcome::new(&report::cs_output(&c)?, Some(report::spectra_csv(&c)), true))
        }
        Command::WittenSweep { model, tau } => {
            let file = ModelFile::load(model)?;
            let m = file.build()?;
            let phi = m.sample_phi(file.phi.as_ref().unwrap_or(&PhiSpec::Builtin("cos-h".into())))?;
            let taus = tau.clone().or(file.tau).unwrap_or_else(|| selftest::TAUS.to_vec());
            let sweep = witten_betti_sweep(&m, &phi, &taus)?;
            let passed = sweep.constant() && sweep.intertwiners_ok;
            let csv = report::witten_csv(&sweep);
            Ok(Outcome::new(&WittenOutput { schema: SCHEMA, sweep, passed }, Some(csv), passed))
        }
        Command::MorseScan { function, model, nh, nv } => {
            let name = match (function, model) {
                (Some(f), _) => f.clone(),
                (None, Some(path)) => match ModelFile::load(path)?.phi {
                    Some(PhiSpec::Builtin(name)) => name,
                    _ => return Err(Error::Parse("morse-scan needs a model whose phi names a built-in function".into())),
                },
                (None, None) => return Err(Error::Parse("morse-scan needs --function or --model".into())),
            };
            let f = MorseFunction::from_name(&name)?;
            let scan = morse_scan(&f, &ScanGrid { nh: *nh, nv: *nv, ..ScanGrid::default() })?;
            let csv = report::morse_csv(&scan);
            Ok(Outcome::new(&MorseOutput { schema: SCHEMA, scan }, Some(csv), true))
        }
        Command::Gv { omega, model, n, gv_tol } => {
            let spec = match (omega, model) {
                (Some(name), _) => OmegaSpec::builtin(name),
                (None, Some(path)) => OmegaSpec::load(path)?,
                (None, None) => return Err(Error::Parse("gv needs --omega or --model".into())),
            };
            let n = spec.native_n().unwrap_or(*n);
            let gv = godbillon_vey(&spec, n)?;
            let gv_doubled = if spec.native_n().is_some() { gv.gv } else { godbillon_vey(&spec, 2 * n)?.gv };
            let doubling_residual = (gv.gv - gv_doubled).abs();
            let passed = doubling_residual < *gv_tol;
            Ok(Outcome::new(&GvOutput { schema: SCHEMA, gv, gv_doubled, doubling_residual, passed }, None, passed))
        }
        Command::Selftest => {
            let r = selftest::run(&SelftestConfig { scalar: common.scalar, seed: common.seed });
            print!("{}", r.table());
            Ok(Outcome::new(&r, None, r.passed))
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(outcome: &Outcome, common: &Common, to_stdout: bool) -> Result<(), Error> {
    match &common.out {
        Some(path) => {
            write(path, &outcome.json)?;
            if let Some(csv) = &outcome.csv {
                write(&path.with_extension("csv"), csv)?;
            }
        }
        None if to_stdout => print!("{}", outcome.json),
        None => {}
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("nchodge: cannot start {jobs} workers: {e}");
            return ExitCode::from(1);
        }
    }
    let is_selftest = matches!(cli.command, Command::Selftest);
    match run(&cli.command, &cli.common) {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome, &cli.common, !is_selftest) {
                eprintln!("nchodge: {} ({})", e, e.code());
                return ExitCode::from(1);
            }
            ExitCode::from(if outcome.passed { 0 } else { 2 })
        }
        Err(e) if is_input_error(&e) => {
            eprintln!("nchodge: {} ({})", e, e.code());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("nchodge: {} ({})", e, e.code());
            let r = ErrorReport { schema: SCHEMA, error: ErrorEntry { code: e.code(), message: e.to_string() }, passed: false };
            if let Err(io) = emit(&Outcome::new(&r, None, false), &cli.common, true) {
                eprintln!("nchodge: {io}");
            }
            ExitCode::from(2)
        }
    }
}
