//! Command-line front end.
//!
//! Exit codes: 0 success, 1 locate failure (or a sweep with failed cases),
//! 2 invalid input, 3 precondition or evaluation failure.
//!
//! JSON numbers are written with 17 significant digits.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expression, ParseError};
use crate::harness::{run_sweep, FunctionFamily, HarnessError};
use crate::hyperdual::{eval_hyperdual, finite_difference_oracle, max_relative_error, HyperDual};
use crate::locator::{locate, locate_interval, verify_at, verify_at_interval, LocateConfig, LocateError, Outcome};
use crate::theorems::{
    boggio1d_residual, pompeiu1d_residual, Decomposition, Instance, Rectangle, TheoremCase, TheoremError, TheoremTag,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Input(_) => 2,
            CliError::Precondition(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<TheoremError> for CliError {
    fn from(e: TheoremError) -> Self {
        match e {
            TheoremError::InvalidRectangle { .. }
            | TheoremError::InvalidInterval { .. }
            | TheoremError::NotUnivariate { .. }
            | TheoremError::CaseShape { .. } => CliError::Input(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<LocateError> for CliError {
    fn from(e: LocateError) -> Self {
        match e {
            LocateError::InvalidConfig { .. } => CliError::Input(e.to_string()),
            LocateError::SignContract { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Theorem(t) => t.into(),
            HarnessError::Locate(l) => l.into(),
            HarnessError::EmptySweep | HarnessError::UnknownFamily(_) => CliError::Input(e.to_string()),
            HarnessError::Generation { .. } | HarnessError::MissingDomain => CliError::Precondition(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mvt2d",
    version,
    about = "Locate and verify mean-value points of two-dimensional mean value theorems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find a mean-value point of a theorem instance.
    Locate(LocateArgs),
    /// Evaluate the residual at a given point.
    Verify(VerifyArgs),
    /// Locate points for many random instances.
    Sweep(SweepArgs),
    /// Compare automatic derivatives with finite differences.
    GradCheck(GradArgs),
    /// Print the syntax tree of an expression.
    Parse(ParseArgs),
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// rrt, rmvt, rcmvt, pompeiu2d, boggio2d, pompeiu1d or boggio1d
    #[arg(long, value_parser = parse_theorem)]
    theorem: TheoremTag,
    #[arg(long)]
    f: String,
    /// Second function, for the Cauchy and Boggio forms.
    #[arg(long)]
    g: Option<String>,
    /// `x1,x2,y1,y2`, or `x1,x2` for one-dimensional theorems.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_list)]
    rect: NumList,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Residual tolerance relative to the identity's scale.
    #[arg(long, default_value_t = 1e-9)]
    tau: f64,
    /// Grid cells per axis.
    #[arg(long, default_value_t = 33)]
    grid: usize,
    #[arg(long, default_value_t = 4)]
    max_refinements: u32,
    #[arg(long, default_value_t = 1e-12)]
    bisection_tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

impl SearchArgs {
    fn config(&self) -> LocateConfig {
        LocateConfig {
            grid: self.grid,
            max_refinements: self.max_refinements,
            tau: self.tau,
            bisection_tol: self.bisection_tol,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Args)]
struct LocateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// `xi1,xi2`, or `xi` for one-dimensional theorems.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_list)]
    point: NumList,
    #[arg(long, default_value_t = 1e-9)]
    tau: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_parser = parse_theorem, default_value = "rmvt")]
    theorem: TheoremTag,
    /// polyN, bilinear, separable, exp-poly or rational
    #[arg(long, value_parser = parse_family, default_value = "poly4")]
    family: FunctionFamily,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write one row per case to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Debug, Args)]
struct GradArgs {
    #[arg(long)]
    f: String,
    /// `x,y`
    #[arg(long, allow_hyphen_values = true, value_parser = parse_list)]
    at: NumList,
}

#[derive(Debug, Args)]
struct ParseArgs {
    #[arg(long)]
    f: String,
}

fn parse_theorem(s: &str) -> Result<TheoremTag, String> {
    s.parse().map_err(|e: crate::theorems::UnknownTheorem| e.to_string())
}

fn parse_family(s: &str) -> Result<FunctionFamily, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

/// A comma-separated list of finite numbers.
#[derive(Debug, Clone)]
struct NumList(Vec<f64>);

fn parse_list(s: &str) -> Result<NumList, String> {
    s.split(',')
        .map(|part| {
            part.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{part}` is not a finite number"))
        })
        .collect::<Result<_, _>>()
        .map(NumList)
}

#[derive(Debug, Clone, Copy)]
enum Domain {
    Planar(Rectangle),
    Interval(f64, f64),
}

#[derive(Debug, Serialize)]
struct DomainOut {
    x1: f64,
    x2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    y1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y2: Option<f64>,
}

impl Domain {
    fn out(&self) -> DomainOut {
        match *self {
            Domain::Planar(r) => DomainOut {
                x1: r.x1,
                x2: r.x2,
                y1: Some(r.y1),
                y2: Some(r.y2),
            },
            Domain::Interval(x1, x2) => DomainOut {
                x1,
                x2,
                y1: None,
                y2: None,
            },
        }
    }
}

#[derive(Debug, Serialize)]
struct PointOut {
    xi1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi2: Option<f64>,
}

fn build_instance(args: &InstanceArgs) -> Result<(Instance, Domain), CliError> {
    let f = Expression::parse(&args.f)?;
    let g = args.g.as_deref().map(Expression::parse).transpose()?;
    let case = TheoremCase::new(args.theorem, f, g)?;
    match (args.theorem.is_interval(), args.rect.0.as_slice()) {
        (false, &[x1, x2, y1, y2]) => {
            let r = Rectangle::new(x1, x2, y1, y2)?;
            Ok((case.build(&r)?, Domain::Planar(r)))
        }
        (true, &[x1, x2]) => {
            let map = match &case.g {
                None => pompeiu1d_residual(&case.f, x1, x2)?,
                Some(g) => boggio1d_residual(&case.f, g, x1, x2)?,
            };
            Ok((Instance::Interval(map), Domain::Interval(x1, x2)))
        }
        (false, _) => Err(CliError::Input(format!("{} needs --rect x1,x2,y1,y2", args.theorem))),
        (true, _) => Err(CliError::Input(format!("{} needs --rect x1,x2", args.theorem))),
    }
}

#[derive(Debug, Serialize)]
struct LocateOut {
    theorem: TheoremTag,
    rect: DomainOut,
    outcome: Outcome,
    point: Option<PointOut>,
    residual: Option<f64>,
    scale: f64,
    method: Option<crate::locator::Method>,
    decomposition: Decomposition,
    evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

fn run_locate(args: &LocateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.search.config();
    cfg.validate()?;
    let (instance, domain) = build_instance(&args.instance)?;
    let doc = match instance {
        Instance::Planar(field) => {
            let report = locate(&field, &cfg)?;
            LocateOut {
                theorem: field.tag,
                rect: domain.out(),
                outcome: report.outcome,
                point: report.point.map(|p| PointOut {
                    xi1: p.xi1,
                    xi2: Some(p.xi2),
                }),
                residual: report.point.map(|p| p.residual),
                scale: field.scale,
                method: report.point.map(|p| p.method),
                decomposition: field.decomposition,
                evaluations: report.diagnostics.evaluations,
                message: report.diagnostics.message,
            }
        }
        Instance::Interval(map) => {
            let report = locate_interval(&map, &cfg)?;
            LocateOut {
                theorem: map.tag,
                rect: domain.out(),
                outcome: report.outcome,
                point: report.point.map(|p| PointOut { xi1: p.xi, xi2: None }),
                residual: report.point.map(|p| p.residual),
                scale: map.scale,
                method: report.point.map(|p| p.method),
                decomposition: Decomposition {
                    rhs: Some(map.rhs),
                    ..Decomposition::default()
                },
                evaluations: report.diagnostics.evaluations,
                message: report.diagnostics.message,
            }
        }
    };
    write_json(out, &doc)?;
    if doc.outcome == Outcome::Failed {
        return Err(CliError::Failure(
            doc.message.unwrap_or_else(|| "no mean-value point found".into()),
        ));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifyOut {
    theorem: TheoremTag,
    point: PointOut,
    residual: f64,
    scale: f64,
    tau: f64,
    within_tolerance: bool,
}

fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(args.tau.is_finite() && args.tau > 0.0) {
        return Err(CliError::Input("--tau must be a positive number".into()));
    }
    let (instance, _) = build_instance(&args.instance)?;
    let (point, residual, scale) = match (&instance, args.point.0.as_slice()) {
        (Instance::Planar(field), &[a, b]) => (PointOut { xi1: a, xi2: Some(b) }, verify_at(field, a, b)?, field.scale),
        (Instance::Interval(map), &[a]) => (PointOut { xi1: a, xi2: None }, verify_at_interval(map, a)?, map.scale),
        (Instance::Planar(_), _) => return Err(CliError::Input("--point needs xi1,xi2".into())),
        (Instance::Interval(_), _) => return Err(CliError::Input("--point needs a single xi".into())),
    };
    write_json(
        out,
        &VerifyOut {
            theorem: args.instance.theorem,
            point,
            residual,
            scale,
            tau: args.tau,
            within_tolerance: residual.abs() <= args.tau * scale,
        },
    )?;
    Ok(())
}

fn run_sweep_cmd(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = args.search.config();
    let summary = run_sweep(args.theorem, &args.family, args.count as usize, args.seed, &cfg)?;
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Precondition(e.to_string()))?;
        for case in &summary.cases {
            w.serialize(case).map_err(|e| CliError::Precondition(e.to_string()))?;
        }
        w.flush()?;
    }
    write_json(out, &summary)?;
    if summary.failed > 0 {
        return Err(CliError::Failure(format!(
            "{} of {} cases failed",
            summary.failed, summary.total
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct GradOut {
    hyperdual: HyperDual,
    finite_difference: HyperDual,
    max_rel_error: f64,
}

fn run_gradcheck(args: &GradArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let f = Expression::parse(&args.f)?;
    let &[x, y] = args.at.0.as_slice() else {
        return Err(CliError::Input("--at needs x,y".into()));
    };
    let eval_failed =
        |e: crate::expr::EvalError| CliError::Precondition(format!("evaluation failed at ({x}, {y}): {e}"));
    let hd = eval_hyperdual(&f, x, y).map_err(eval_failed)?;
    let fd = finite_difference_oracle(&f, x, y).map_err(eval_failed)?;
    write_json(
        out,
        &GradOut {
            max_rel_error: max_relative_error(&hd, &fd),
            hyperdual: hd,
            finite_difference: fd,
        },
    )?;
    Ok(())
}

/// JSON formatter printing every float with 17 significant digits.
struct RoundTrip;

impl serde_json::ser::Formatter for RoundTrip {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize `value` as a single line of JSON with 17-digit numbers.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTrip);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    writeln!(out, "{}", to_json(value))
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Locate(a) => run_locate(a, out),
        Command::Verify(a) => run_verify(a, out),
        Command::Sweep(a) => run_sweep_cmd(a, out),
        Command::GradCheck(a) => run_gradcheck(a, out),
        Command::Parse(a) => {
            let e = Expression::parse(&a.f)?;
            write!(out, "{}", e.dump_tree())?;
            Ok(())
        }
    }
}

/// Run the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
