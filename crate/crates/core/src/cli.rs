//! Command-line driver. Exit codes: 0 success, 1 usage, I/O or convergence
//! failure, 2 invariant violation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::approx::{rational_sequence, single_pole_approx, LineFunction, Schedule};
use crate::cayley::BoundarySamples;
use crate::corpus::{lookup, Member};
use crate::error::{Error, Result};
use crate::quadrature::{lp_quasinorm_line, QuadOptions};
use crate::rational::{certify_hardy, HalfPlane, LaurentRational, PoleCertificate};
use crate::report::to_json;
use crate::spectral::{
    build_f, fprofile_csv, growth_bound_check, spectrum_support_test, FProfile, GrowthCheck, SupportTest, DEFAULT_HALF_WIDTH,
    DEFAULT_POINTS,
};
use crate::split::{decompose, split_atom, DEFAULT_PHI_GRID};
use crate::verify::{verify, Check};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "hardy-split", version, about = "Split rational L^p functions (0 < p < 1) into upper and lower Hardy parts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Built-in corpus member
    #[arg(long, conflicts_with = "input")]
    pub corpus: Option<String>,
    /// Laurent atom in JSON (`n`, `coeffs_re`, `coeffs_im`)
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Approximate by rational atoms and split every atom
    Decompose {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long = "phi-grid", default_value_t = DEFAULT_PHI_GRID)]
        phi_grid: usize,
        /// Number of approximation stages
        #[arg(long, default_value_t = 5)]
        stages: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Split a single atom into upper and lower pieces
    Split {
        /// Laurent atom in JSON
        #[arg(long, conflicts_with = "corpus")]
        atom: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<String>,
        #[arg(long)]
        p: f64,
        #[arg(long = "phi-grid", default_value_t = DEFAULT_PHI_GRID)]
        phi_grid: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Rational approximation, either by atoms or with a single pole at -i
    Approx {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0.75)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 5)]
        stages: usize,
        /// Fit an element of R_N(i) instead of an atom sequence
        #[arg(long = "single-pole")]
        single_pole: bool,
        #[arg(long = "N", default_value_t = 2)]
        big_n: usize,
        /// Line samples for the single-pole fit
        #[arg(long, default_value_t = 4096)]
        n: usize,
        /// Fejer degree for the single-pole fit
        #[arg(long, default_value_t = 64)]
        degree: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Spectral support test and the delta-invariant function F
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0.75)]
        p: f64,
        /// Spatial half-width
        #[arg(long = "L", default_value_t = DEFAULT_HALF_WIDTH)]
        l: f64,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0")]
        deltas: Vec<f64>,
        /// Bound on the cross-delta deviation of F
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        /// Write `t,abs_F,bound` rows here
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Run the invariant battery on a corpus member
    Verify {
        #[arg(long)]
        corpus: String,
        #[arg(long, default_value_t = 0.75)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Check::All)]
        check: Check,
        #[command(flatten)]
        output: Output,
    },
}

/// A corpus member or a user-supplied atom.
enum Target {
    Member(Member),
    Atom(LaurentRational),
}

impl Target {
    fn resolve(corpus: Option<&str>, input: Option<&Path>) -> Result<Self> {
        match (corpus, input) {
            (Some(name), None) => Ok(Target::Member(lookup(name)?)),
            (None, Some(path)) => Ok(Target::Atom(read_atom(path)?)),
            _ => Err(Error::InvalidParameter("exactly one of --corpus and --input is required".into())),
        }
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Target::Member(m) => m.eval(z),
            Target::Atom(r) => r.eval(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        }
    }

    /// Corpus members run the full pipeline; atoms take the exact path.
    fn line_function(&self) -> LineFunction {
        match self {
            Target::Member(m) => m.line_function(),
            Target::Atom(r) => LineFunction::from_laurent(r.clone()),
        }
    }

    fn laurent(&self) -> Result<LaurentRational> {
        match self {
            Target::Member(m) => {
                m.laurent().ok_or_else(|| Error::InvalidParameter(format!("{} is not a Laurent atom", m.name())))
            }
            Target::Atom(r) => Ok(r.clone()),
        }
    }

    fn certificate(&self) -> PoleCertificate {
        match self {
            Target::Member(m) => m.certificate(),
            Target::Atom(r) => r.certificate(),
        }
    }
}

fn read_atom(path: &Path) -> Result<LaurentRational> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn check_p(p: f64, open_unit: bool) -> Result<()> {
    let ok = if open_unit { p > 0.0 && p < 1.0 } else { p > 0.0 && p <= 2.0 };
    if ok {
        Ok(())
    } else {
        let range = if open_unit { "(0, 1)" } else { "(0, 2]" };
        Err(Error::InvalidParameter(format!("--p {p} outside {range}")))
    }
}

#[derive(Serialize)]
struct SpectrumReport {
    p: f64,
    support: SupportTest,
    /// Present for upper Hardy inputs.
    f_profile: Option<FProfile>,
    hp_norm: Option<f64>,
    growth: Option<GrowthCheck>,
}

fn emit(output: &Output, json: &str, stdout: &mut dyn Write) -> Result<()> {
    match &output.output {
        Some(path) => fs::write(path, json)?,
        None => stdout.write_all(json.as_bytes())?,
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BoundNotMet { .. } | Error::BoundViolated { .. } => EXIT_INVARIANT,
        _ => EXIT_FAILURE,
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Decompose { source, p, eps, phi_grid, stages, output } => {
            check_p(p, true)?;
            let target = Target::resolve(source.corpus.as_deref(), source.input.as_deref())?;
            let d = decompose(&target.line_function(), p, eps, &Schedule::with_stages(stages), phi_grid)?;
            emit(&output, &to_json(&d)?, stdout)?;
            let decreasing = d.residuals.windows(2).all(|w| w[1] <= w[0]);
            if !decreasing || d.budget > d.budget_bound {
                writeln!(stderr, "invariant violated: budget {:e} (bound {:e}), residuals {:?}", d.budget, d.budget_bound, d.residuals)?;
                return Ok(EXIT_INVARIANT);
            }
            Ok(EXIT_OK)
        }
        Command::Split { atom, corpus, p, phi_grid, output } => {
            check_p(p, true)?;
            let r = Target::resolve(corpus.as_deref(), atom.as_deref())?.laurent()?;
            let s = split_atom(&r, p, phi_grid)?;
            emit(&output, &to_json(&s)?, stdout)?;
            for w in &s.warnings {
                writeln!(stderr, "warning: {w}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Approx { source, p, eps, stages, single_pole, big_n, n, degree, output } => {
            check_p(p, !single_pole)?;
            let target = Target::resolve(source.corpus.as_deref(), source.input.as_deref())?;
            let json = if single_pole {
                let samples = BoundarySamples::sample_line(|x| target.eval(Complex64::new(x, 0.0)), p, n)?;
                to_json(&single_pole_approx(&samples, big_n, degree)?)?
            } else {
                to_json(&rational_sequence(&target.line_function(), p, eps, &Schedule::with_stages(stages))?)?
            };
            emit(&output, &json, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Spectrum { source, p, l, n, deltas, tol, csv, output } => {
            check_p(p, false)?;
            let target = Target::resolve(source.corpus.as_deref(), source.input.as_deref())?;
            let support = spectrum_support_test(|x| target.eval(Complex64::new(x, 0.0)), tol, l, n)?;
            let upper = p <= 1.0 && certify_hardy(&target.certificate(), p, HalfPlane::Upper).member;
            let mut report = SpectrumReport { p, support, f_profile: None, hp_norm: None, growth: None };
            let mut code = EXIT_OK;
            if upper {
                let fp = build_f(|z| target.eval(z), p, &deltas, l, n)?;
                let norm_p = lp_quasinorm_line(|x| target.eval(Complex64::new(x, 0.0)), p, &[], &QuadOptions::default())?;
                let hp_norm = norm_p.value.powf(1.0 / p);
                let growth = growth_bound_check(&fp, hp_norm);
                if let Some(path) = &csv {
                    fs::write(path, fprofile_csv(&fp, hp_norm, growth.fitted_c))?;
                }
                if fp.max_cross_delta_dev > tol || !growth.ok {
                    writeln!(stderr, "invariant violated: cross-delta deviation {:e} > {tol:e}", fp.max_cross_delta_dev)?;
                    code = EXIT_INVARIANT;
                }
                report.f_profile = Some(fp);
                report.hp_norm = Some(hp_norm);
                report.growth = Some(growth);
            } else if csv.is_some() {
                writeln!(stderr, "warning: no F profile for an input outside the upper Hardy space; CSV not written")?;
            }
            emit(&output, &to_json(&report)?, stdout)?;
            Ok(code)
        }
        Command::Verify { corpus, p, check, output } => {
            check_p(p, false)?;
            let report = verify(lookup(&corpus)?, p, check);
            emit(&output, &to_json(&report)?, stdout)?;
            for c in report.checks.iter().filter(|c| !c.pass) {
                writeln!(stderr, "check {:?} failed: {}", c.name, c.detail)?;
            }
            Ok(if report.all_pass { EXIT_OK } else { EXIT_INVARIANT })
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
