//! Command implementations behind the `dyadic-approx` binary.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::best_approx::{
    antiderivative_symbol_closed_form, approx_error, best_convolution_symbol,
    difference_symbol_closed_form, gamma_symbol, symmetric_difference_symbol_closed_form,
    translation_symbol_closed_form, ConvolutionSymbol, GammaFamily,
};
use crate::dyadic::PaleyIndex;
use crate::operators::{
    compressed_antiderivative, difference_operator, symmetric_difference_operator,
    translation_operator, DenseOperator, Orientation,
};
use crate::verify::{self, ClosedForm, Perturbation, VerifyConfig, VerifyReport};
use crate::walsh::{fwht_forward, fwht_inverse, sequency, GridFunction, WalshSpectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dyadic-approx", version, about = "Best approximation of cyclic difference operators by dyadic convolution operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,

    /// Tolerance for floating-point checks.
    #[arg(long, global = true, default_value_t = verify::DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexOrdering {
    Paley,
    Sequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorKind {
    Translation,
    Difference,
    SymmetricDifference,
    Antiderivative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    #[value(name = "backward_quotient")]
    BackwardQuotient,
    #[value(name = "shift_minus_identity")]
    ShiftMinusIdentity,
}

impl From<OrientationArg> for Orientation {
    fn from(value: OrientationArg) -> Self {
        match value {
            OrientationArg::BackwardQuotient => Orientation::BackwardQuotient,
            OrientationArg::ShiftMinusIdentity => Orientation::ShiftMinusIdentity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClosedFormArg {
    Translation,
    OptimalGamma,
    SymmetricDifference,
    Antiderivative,
}

impl From<ClosedFormArg> for ClosedForm {
    fn from(value: ClosedFormArg) -> Self {
        match value {
            ClosedFormArg::Translation => ClosedForm::Translation,
            ClosedFormArg::OptimalGamma => ClosedForm::OptimalGamma,
            ClosedFormArg::SymmetricDifference => ClosedForm::SymmetricDifference,
            ClosedFormArg::Antiderivative => ClosedForm::Antiderivative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derivative coefficients γ(k) for the optimal, Butzer–Wagner and Onneweer families.
    Gamma {
        #[arg(short, long, value_parser = clap::value_parser!(u32).range(1..=16))]
        n: u32,
        #[arg(long, value_enum, default_value_t = IndexOrdering::Paley)]
        ordering: IndexOrdering,
    },
    /// Best convolution symbol of a classical operator, by projection and in closed form.
    Approx {
        #[arg(long, value_enum)]
        operator: OperatorKind,
        #[arg(short, long, value_parser = clap::value_parser!(u32).range(1..=12))]
        n: u32,
        #[arg(long, value_enum, default_value_t = OrientationArg::BackwardQuotient)]
        orientation: OrientationArg,
    },
    /// Hilbert–Schmidt distance from Δ_n to each derivative family.
    Compare {
        #[arg(short, long, value_parser = clap::value_parser!(u32).range(2..=10))]
        n: u32,
    },
    /// Run the invariant suite and emit a report.
    Verify {
        #[arg(long, default_value_t = verify::DEFAULT_N_MAX, value_parser = clap::value_parser!(u32).range(1..=verify::MAX_N_MAX as i64))]
        n_max: u32,
        /// Offset one closed-form symbol (failure-path testing).
        #[arg(long, value_enum, hide = true)]
        perturb_closed_form: Option<ClosedFormArg>,
        #[arg(long, default_value_t = 1e-6, hide = true)]
        perturb_delta: f64,
    },
    /// Normalized Walsh transform of a vector read from a file (`-` for stdin).
    Transform {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Direction::Forward)]
        direction: Direction,
    },
    /// Sign-change counts of the Gray-reindexed Walsh functions.
    Sequency {
        #[arg(short, long, value_parser = clap::value_parser!(u32).range(1..=14))]
        n: u32,
    },
}

/// Formats with 15 significant digits in plain decimal, trailing zeros trimmed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).clamp(0, 340) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Output of one command: the text to emit and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self {
            text,
            exit_code: EXIT_OK,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Math(#[from] crate::Error),
    #[error("{0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Serialize)]
struct GammaRow {
    k: usize,
    gray_k: usize,
    gamma_optimal: f64,
    gamma_bw: f64,
    gamma_onneweer: f64,
    sequency: usize,
}

/// Rows of the γ table.
///
/// In Paley order row `k` is the Paley index and `gray_k` its sequency label
/// `G^-1 k`. In sequency order row `k` is the sequency label and `gray_k` the
/// Paley index `G k`. γ columns are evaluated at the Paley index.
pub fn cmd_gamma(n: u32, ordering: IndexOrdering, format: Format) -> Result<String, CliError> {
    let mut rows = Vec::with_capacity(1 << n);
    for k in (0..1usize << n).map(PaleyIndex) {
        let (paley, companion) = match ordering {
            IndexOrdering::Paley => (k, k.gray_inverse()),
            IndexOrdering::Sequency => (k.gray(), k.gray()),
        };
        rows.push(GammaRow {
            k: k.value(),
            gray_k: companion.value(),
            gamma_optimal: GammaFamily::Optimal.gamma(paley),
            gamma_bw: GammaFamily::ButzerWagner.gamma(paley),
            gamma_onneweer: GammaFamily::Onneweer.gamma(paley),
            sequency: sequency(paley, n)?,
        });
    }
    Ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                n: u32,
                ordering: &'a str,
                rows: Vec<GammaRow>,
            }
            let ordering = match ordering {
                IndexOrdering::Paley => "paley",
                IndexOrdering::Sequency => "sequency",
            };
            to_json(&Out { n, ordering, rows })
        }
        Format::Csv => {
            let mut s = String::from("k,gray_k,gamma_optimal,gamma_bw,gamma_onneweer,sequency\n");
            for r in rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.k,
                    r.gray_k,
                    format_number(r.gamma_optimal),
                    format_number(r.gamma_bw),
                    format_number(r.gamma_onneweer),
                    r.sequency
                );
            }
            s
        }
    })
}

/// The operator and its closed-form best symbol.
pub fn operator_with_closed_form(
    kind: OperatorKind,
    n: u32,
    orientation: Orientation,
) -> crate::Result<(DenseOperator, ConvolutionSymbol)> {
    Ok(match kind {
        OperatorKind::Translation => (translation_operator(n, 1)?, translation_symbol_closed_form(n)?),
        OperatorKind::Difference => (
            difference_operator(n, orientation)?,
            difference_symbol_closed_form(n, orientation)?,
        ),
        OperatorKind::SymmetricDifference => (
            symmetric_difference_operator(n)?,
            symmetric_difference_symbol_closed_form(n)?,
        ),
        OperatorKind::Antiderivative => {
            (compressed_antiderivative(n)?, antiderivative_symbol_closed_form(n)?)
        }
    })
}

#[derive(Serialize)]
struct ApproxRow {
    k: usize,
    oracle: f64,
    closed_form: f64,
    abs_diff: f64,
}

pub fn cmd_approx(
    kind: OperatorKind,
    n: u32,
    orientation: Orientation,
    format: Format,
) -> Result<String, CliError> {
    let (a, closed) = operator_with_closed_form(kind, n, orientation)?;
    let oracle = best_convolution_symbol(&a);
    let rows: Vec<ApproxRow> = oracle
        .coeffs()
        .iter()
        .zip(closed.coeffs())
        .enumerate()
        .map(|(k, (&o, &c))| ApproxRow {
            k,
            oracle: o,
            closed_form: c,
            abs_diff: (o - c).abs(),
        })
        .collect();
    let max_abs_diff = oracle.max_abs_diff(&closed)?;
    let residual = approx_error(&a, &oracle)?;
    let operator = kind
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    Ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                operator: String,
                n: u32,
                orientation: &'static str,
                rows: Vec<ApproxRow>,
                max_abs_diff: f64,
                residual_hs_error: f64,
            }
            to_json(&Out {
                operator,
                n,
                orientation: orientation.name(),
                rows,
                max_abs_diff,
                residual_hs_error: residual,
            })
        }
        Format::Csv => {
            let mut s = String::from("k,oracle,closed_form,abs_diff\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    r.k,
                    format_number(r.oracle),
                    format_number(r.closed_form),
                    format_number(r.abs_diff)
                );
            }
            let _ = writeln!(s, "\nmetric,value");
            let _ = writeln!(s, "max_abs_diff,{}", format_number(max_abs_diff));
            let _ = writeln!(s, "residual_hs_error,{}", format_number(residual));
            s
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub symbol: &'static str,
    pub hs_error: f64,
}

/// `‖C_s - Δ_n‖_HS` for the derivative families and the zero symbol.
pub fn compare_rows(n: u32) -> crate::Result<Vec<CompareRow>> {
    let delta = difference_operator(n, Orientation::BackwardQuotient)?;
    let mut rows = Vec::new();
    for family in [GammaFamily::Optimal, GammaFamily::ButzerWagner, GammaFamily::Onneweer] {
        rows.push(CompareRow {
            symbol: family.name(),
            hs_error: approx_error(&delta, &gamma_symbol(family, n)?)?,
        });
    }
    rows.push(CompareRow {
        symbol: "zero",
        hs_error: approx_error(&delta, &ConvolutionSymbol::constant(n, 0.0)?)?,
    });
    Ok(rows)
}

pub fn cmd_compare(n: u32, format: Format) -> Result<String, CliError> {
    let rows = compare_rows(n)?;
    Ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                n: u32,
                orientation: &'static str,
                rows: Vec<CompareRow>,
            }
            to_json(&Out {
                n,
                orientation: Orientation::BackwardQuotient.name(),
                rows,
            })
        }
        Format::Csv => {
            let mut s = String::from("symbol,hs_error\n");
            for r in rows {
                let _ = writeln!(s, "{},{}", r.symbol, format_number(r.hs_error));
            }
            s
        }
    })
}

pub fn render_report(report: &VerifyReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut s = String::from("name,n,max_abs_error,tolerance,pass\n");
            for c in &report.checks {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    c.name,
                    c.n,
                    format_number(c.max_abs_error),
                    format_number(c.tolerance),
                    c.pass
                );
            }
            let _ = writeln!(s, "overall_pass,{},,,{}", report.n_max, report.overall_pass);
            s
        }
    }
}

pub fn cmd_verify(config: &VerifyConfig, format: Format) -> Result<Outcome, CliError> {
    let report = verify::run(config)?;
    Ok(Outcome {
        text: render_report(&report, format),
        exit_code: if report.overall_pass {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        },
    })
}

/// Parses one number per line; a single-column CSV with a header also works.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    let mut header_allowed = true;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.split(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if header_allowed => {}
            Err(_) => {
                return Err(CliError::Input(format!(
                    "line {}: not a number: {field:?}",
                    line_no + 1
                )))
            }
        }
        header_allowed = false;
    }
    Ok(values)
}

pub fn cmd_transform(values: Vec<f64>, direction: Direction, format: Format) -> Result<String, CliError> {
    let (n, out) = match direction {
        Direction::Forward => {
            let f = GridFunction::new(values)?;
            (f.resolution(), fwht_forward(&f).into_coeffs())
        }
        Direction::Inverse => {
            let s = WalshSpectrum::new(values)?;
            (s.resolution(), fwht_inverse(&s).into_values())
        }
    };
    Ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                direction: &'static str,
                n: u32,
                values: Vec<f64>,
            }
            let direction = match direction {
                Direction::Forward => "forward",
                Direction::Inverse => "inverse",
            };
            to_json(&Out {
                direction,
                n,
                values: out,
            })
        }
        Format::Csv => {
            let mut s = String::from("k,value\n");
            for (k, v) in out.iter().enumerate() {
                let _ = writeln!(s, "{k},{}", format_number(*v));
            }
            s
        }
    })
}

pub fn cmd_sequency(n: u32, format: Format) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Row {
        k: usize,
        gray_k: usize,
        sequency: usize,
    }
    let rows = (0..1usize << n)
        .map(|k| {
            let g = PaleyIndex(k).gray();
            Ok(Row {
                k,
                gray_k: g.value(),
                sequency: sequency(g, n)?,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                n: u32,
                rows: Vec<Row>,
            }
            to_json(&Out { n, rows })
        }
        Format::Csv => {
            let mut s = String::from("k,gray_k,sequency\n");
            for r in rows {
                let _ = writeln!(s, "{},{},{}", r.k, r.gray_k, r.sequency);
            }
            s
        }
    })
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let format = cli.format;
    match &cli.command {
        Command::Gamma { n, ordering } => cmd_gamma(*n, *ordering, format).map(Outcome::ok),
        Command::Approx {
            operator,
            n,
            orientation,
        } => cmd_approx(*operator, *n, (*orientation).into(), format).map(Outcome::ok),
        Command::Compare { n } => cmd_compare(*n, format).map(Outcome::ok),
        Command::Verify {
            n_max,
            perturb_closed_form,
            perturb_delta,
        } => {
            let config = VerifyConfig {
                n_max: *n_max,
                tolerance: cli.tol,
                seed: cli.seed,
                perturbation: perturb_closed_form.map(|t| Perturbation {
                    target: t.into(),
                    delta: *perturb_delta,
                }),
            };
            cmd_verify(&config, format)
        }
        Command::Transform { input, direction } => {
            let values = parse_vector(&read_input(input)?)?;
            cmd_transform(values, *direction, format).map(Outcome::ok)
        }
        Command::Sequency { n } => cmd_sequency(*n, format).map(Outcome::ok),
    }
}

/// Parses `args`, runs the command, writes its output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match execute(&cli) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &outcome.text),
        None => io::stdout().lock().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    outcome.exit_code
}
