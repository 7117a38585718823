//! Command-line surface for the qseries library.
//!
//! Four commands: `eval` computes one implemented function at one point,
//! `check` runs a single identity sweep over its built-in grid, `sweep` runs
//! a sweep described by a json config file, and `verify-all` runs every
//! identity sweep and writes one report per identity.
//!
//! Exit codes are a stable contract: 0 success, 1 usage or math-domain
//! error, 2 convergence failure. `eval` prints one value line in a fixed
//! "re i im" format followed by key=value diagnostic lines; warnings go to
//! standard error so stdout stays parseable.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use num_complex::Complex;
use qseries::{
    borel_image_2psi2, corollary_2psi2_rhs, default_config, main_theorem_rhs, phi_series,
    psi_series, qpochhammer_multi, ramanujan_product, resum_2psi1, run_sweep, slater_rhs, theta,
    v_solution, watson_rhs, write_report, Dd, Error, Identity, Psi1Params, QContext, QReal,
    RecordStatus, ReportFormat, Result, SeriesSpec, SlaterParams, SpiralSpec, SweepConfig,
    SweepReport, TruncatedValue, DEFAULT_WINDOW,
};

/// Evaluate q-series special functions and verify their identities.
#[derive(Parser)]
#[command(name = "qseries", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one function at one point.
    Eval(EvalArgs),
    /// Run one identity sweep over its built-in grid.
    Check(CheckArgs),
    /// Run a sweep described by a json config file.
    Sweep(SweepArgs),
    /// Run every identity sweep and write one report per identity.
    VerifyAll(VerifyAllArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Function name: theta, pochhammer, phi, psi, ramanujan, watson,
    /// slater, corollary2psi2, borel2psi2, v1, v2, resum2psi1, main2psi1.
    function: String,
    /// Base q.
    #[arg(long, allow_hyphen_values = true, value_name = "RE[,IM]")]
    q: Option<String>,
    /// First numerator parameter.
    #[arg(long, allow_hyphen_values = true, value_name = "RE[,IM]")]
    a1: Option<String>,
    /// Second numerator parameter.
    #[arg(long, allow_hyphen_values = true, value_name = "RE[,IM]")]
    a2: Option<String>,
    /// Denominator parameter.
    #[arg(long, allow_hyphen_values = true, value_name = "RE[,IM]")]
    b1: Option<String>,
    /// Laplace spiral direction.
    #[arg(long, allow_hyphen_values = true, value_name = "RE[,IM]")]
    lambda: Option<String>,
    /// Evaluation point.
    #[arg(long, allow_hyphen_values = true, value_name = "RE[,IM]")]
    x: Option<String>,
    /// Expansion order cross-check for slater (must equal the list lengths).
    #[arg(long)]
    r: Option<usize>,
    /// Numerator list entry; repeat the flag once per parameter.
    #[arg(long = "a", action = ArgAction::Append, allow_hyphen_values = true, value_name = "RE[,IM]")]
    a_list: Vec<String>,
    /// Denominator list entry; repeat the flag once per parameter.
    #[arg(long = "b", action = ArgAction::Append, allow_hyphen_values = true, value_name = "RE[,IM]")]
    b_list: Vec<String>,
    /// Working precision in bits (53 or 106).
    #[arg(long, default_value_t = 53)]
    precision: u32,
}

#[derive(Args)]
struct CheckArgs {
    /// Identity name, e.g. triple_product or main_theorem.
    identity: String,
    /// Pass tolerance override for every grid point.
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
    /// Seed override for randomized points.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the full report to this path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report format for --output.
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args)]
struct SweepArgs {
    /// Path to a json sweep config.
    config: PathBuf,
    /// Write the full report to this path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report format for --output.
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args)]
struct VerifyAllArgs {
    /// Directory receiving one report file per identity.
    #[arg(long, default_value = "qseries-reports")]
    output_dir: PathBuf,
    /// Report file format.
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,
    /// Pass tolerance override for every identity.
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
    /// Seed override for randomized points.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_format(raw: &str) -> std::result::Result<ReportFormat, String> {
    match raw {
        "json" => Ok(ReportFormat::Json),
        "csv" => Ok(ReportFormat::Csv),
        other => Err(format!("unknown format \"{other}\"; expected json or csv")),
    }
}

fn main() -> ExitCode {
    // Die on SIGPIPE like other unix filters instead of panicking when a
    // downstream pipe closes early.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::Eval(args) => cmd_eval(&args),
        Command::Check(args) => cmd_check(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::VerifyAll(args) => cmd_verify_all(&args),
    };
    ExitCode::from(code)
}

fn usage(message: impl AsRef<str>) -> u8 {
    eprintln!("error: {}", message.as_ref());
    1
}

fn report_error(err: &Error) -> u8 {
    eprintln!("error: {err}");
    match err {
        Error::MaxTermsExceeded { .. } => 2,
        _ => 1,
    }
}

fn check_tolerance(tolerance: f64) -> std::result::Result<(), String> {
    if tolerance > 0.0 && tolerance.is_finite() {
        Ok(())
    } else {
        Err(format!(
            "tolerance must be positive and finite, got {tolerance}"
        ))
    }
}

/// Parses a decimal or "re,im" literal into a rectangular pair.
fn parse_complex(raw: &str) -> std::result::Result<(f64, f64), String> {
    let bad = || format!("malformed complex literal \"{raw}\"; expected a decimal or a \"re,im\" pair");
    let part = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(bad)
    };
    match raw.split_once(',') {
        None => Ok((part(raw)?, 0.0)),
        Some((re, im)) if !im.contains(',') => Ok((part(re)?, part(im)?)),
        Some(_) => Err(bad()),
    }
}

/// Every parameter an eval invocation supplied, parsed before any
/// computation starts.
struct Provided {
    q: Option<(f64, f64)>,
    a1: Option<(f64, f64)>,
    a2: Option<(f64, f64)>,
    b1: Option<(f64, f64)>,
    lambda: Option<(f64, f64)>,
    x: Option<(f64, f64)>,
    r: Option<usize>,
    a_list: Option<Vec<(f64, f64)>>,
    b_list: Option<Vec<(f64, f64)>>,
}

impl Provided {
    fn parse(args: &EvalArgs) -> std::result::Result<Provided, String> {
        let scalar = |name: &str, value: &Option<String>| {
            value
                .as_deref()
                .map(|raw| parse_complex(raw).map_err(|e| format!("--{name}: {e}")))
                .transpose()
        };
        let list = |name: &str, values: &[String]| {
            if values.is_empty() {
                return Ok(None);
            }
            values
                .iter()
                .map(|raw| parse_complex(raw).map_err(|e| format!("--{name}: {e}")))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some)
        };
        Ok(Provided {
            q: scalar("q", &args.q)?,
            a1: scalar("a1", &args.a1)?,
            a2: scalar("a2", &args.a2)?,
            b1: scalar("b1", &args.b1)?,
            lambda: scalar("lambda", &args.lambda)?,
            x: scalar("x", &args.x)?,
            r: args.r,
            a_list: list("a", &args.a_list)?,
            b_list: list("b", &args.b_list)?,
        })
    }

    fn names(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        if self.q.is_some() {
            names.push("q");
        }
        if self.a1.is_some() {
            names.push("a1");
        }
        if self.a2.is_some() {
            names.push("a2");
        }
        if self.b1.is_some() {
            names.push("b1");
        }
        if self.lambda.is_some() {
            names.push("lambda");
        }
        if self.x.is_some() {
            names.push("x");
        }
        if self.r.is_some() {
            names.push("r");
        }
        if self.a_list.is_some() {
            names.push("a");
        }
        if self.b_list.is_some() {
            names.push("b");
        }
        names
    }

    /// Fetches a scalar the usage table has already guaranteed present.
    fn scalar(&self, name: &str) -> (f64, f64) {
        match name {
            "q" => self.q,
            "a1" => self.a1,
            "a2" => self.a2,
            "b1" => self.b1,
            "lambda" => self.lambda,
            "x" => self.x,
            _ => None,
        }
        .expect("required parameters are checked against the function table before evaluation")
    }
}

/// Parameter contract for each eval function: required names, then optional.
const FUNCTIONS: &[(&str, &[&str], &[&str])] = &[
    ("theta", &["q", "x"], &[]),
    ("pochhammer", &["q", "a"], &[]),
    ("phi", &["q", "x"], &["a", "b"]),
    ("psi", &["q", "x"], &["a", "b"]),
    ("ramanujan", &["q", "a1", "b1", "x"], &[]),
    ("watson", &["q", "a1", "a2", "b1", "x"], &[]),
    ("slater", &["q", "a", "b", "x"], &["r"]),
    ("corollary2psi2", &["q", "a1", "a2", "b1", "x"], &[]),
    ("borel2psi2", &["q", "a1", "a2", "b1", "x"], &[]),
    ("v1", &["q", "a1", "a2", "b1", "x"], &[]),
    ("v2", &["q", "a1", "a2", "b1", "x"], &[]),
    ("resum2psi1", &["q", "a1", "a2", "b1", "lambda", "x"], &[]),
    ("main2psi1", &["q", "a1", "a2", "b1", "lambda", "x"], &[]),
];

fn cmd_eval(args: &EvalArgs) -> u8 {
    if args.function == "psi2x1" {
        return usage(
            "psi2x1 is the divergent (2, 1) bilateral series, which diverges around the \
             origin for every x; resum2psi1 evaluates its Borel-Laplace sum on |x| > |b1/(a1 a2)|",
        );
    }
    let Some(&(name, required, optional)) =
        FUNCTIONS.iter().find(|(name, _, _)| *name == args.function)
    else {
        let known: Vec<&str> = FUNCTIONS.iter().map(|&(name, _, _)| name).collect();
        return usage(format!(
            "unknown function \"{}\"; expected one of: {}, psi2x1",
            args.function,
            known.join(", ")
        ));
    };
    let provided = match Provided::parse(args) {
        Ok(provided) => provided,
        Err(message) => return usage(message),
    };
    let supplied = provided.names();
    for want in required {
        if !supplied.contains(want) {
            return usage(format!("{name} requires --{want}"));
        }
    }
    for have in &supplied {
        if !required.contains(have) && !optional.contains(have) {
            return usage(format!("{name} does not take --{have}"));
        }
    }
    if let (Some(r), Some(a_list)) = (provided.r, &provided.a_list) {
        if r != a_list.len() {
            return usage(format!(
                "--r {r} does not match the {} numerator parameters",
                a_list.len()
            ));
        }
    }
    match args.precision {
        53 => run_eval::<f64>(name, &provided),
        106 => run_eval::<Dd>(name, &provided),
        other => usage(format!("unsupported precision {other}; expected 53 or 106")),
    }
}

/// Formats one scalar for the value line at the type's native precision.
trait ValueDigits: QReal {
    fn digits(self) -> String;
}

impl ValueDigits for f64 {
    fn digits(self) -> String {
        format!("{self:.16e}")
    }
}

impl ValueDigits for Dd {
    fn digits(self) -> String {
        self.to_string()
    }
}

fn run_eval<T: ValueDigits>(name: &str, provided: &Provided) -> u8 {
    match evaluate::<T>(name, provided) {
        Ok(value) => {
            println!("{} i {}", value.value.re.digits(), value.value.im.digits());
            println!("converged={}", value.converged);
            println!("terms_pos={}", value.terms_used_pos);
            println!("terms_neg={}", value.terms_used_neg);
            println!("last_term_mag={:.3e}", value.last_term_mag);
            println!("precision_bits={}", T::PRECISION_BITS);
            if value.converged {
                0
            } else {
                2
            }
        }
        Err(err) => report_error(&err),
    }
}

fn evaluate<T: ValueDigits>(name: &str, p: &Provided) -> Result<TruncatedValue<T>> {
    let cx = |(re, im): (f64, f64)| Complex::new(T::from_f64(re), T::from_f64(im));
    let list = |entries: &Option<Vec<(f64, f64)>>| -> Vec<Complex<T>> {
        entries
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(|&pair| cx(pair))
            .collect()
    };
    let psi1 = || Psi1Params::new(cx(p.scalar("a1")), cx(p.scalar("a2")), cx(p.scalar("b1")));
    let ctx = QContext::new(cx(p.scalar("q")))?;
    match name {
        "theta" => {
            let value = theta(cx(p.scalar("x")), &ctx)?;
            let mag = value.value.re.to_f64().hypot(value.value.im.to_f64());
            if mag <= ctx.eps {
                eprintln!("note: value at rounding scale; x may lie on the theta zero lattice -q^Z");
            }
            Ok(value)
        }
        "pochhammer" => qpochhammer_multi(&list(&p.a_list), &ctx),
        "phi" => phi_series(
            &SeriesSpec::phi(list(&p.a_list), list(&p.b_list)),
            &ctx,
            cx(p.scalar("x")),
        ),
        "psi" => psi_series(
            &SeriesSpec::psi(list(&p.a_list), list(&p.b_list)),
            &ctx,
            cx(p.scalar("x")),
        ),
        "ramanujan" => ramanujan_product(
            cx(p.scalar("a1")),
            cx(p.scalar("b1")),
            &ctx,
            cx(p.scalar("x")),
        ),
        "watson" => watson_rhs(
            cx(p.scalar("a1")),
            cx(p.scalar("a2")),
            cx(p.scalar("b1")),
            &ctx,
            cx(p.scalar("x")),
        ),
        "slater" => slater_rhs(
            &SlaterParams::new(list(&p.a_list), list(&p.b_list)),
            &ctx,
            cx(p.scalar("x")),
        ),
        "corollary2psi2" => corollary_2psi2_rhs(&psi1(), &ctx, cx(p.scalar("x"))),
        "borel2psi2" => borel_image_2psi2(&psi1(), &ctx, cx(p.scalar("x"))),
        "v1" => v_solution(&psi1(), &ctx, 1, cx(p.scalar("x"))),
        "v2" => v_solution(&psi1(), &ctx, 2, cx(p.scalar("x"))),
        "resum2psi1" => {
            warn_below_certified_radius(p);
            let spiral = spiral::<T>(cx(p.scalar("lambda")), ctx)?;
            resum_2psi1(&psi1(), &spiral, cx(p.scalar("x")))
        }
        "main2psi1" => {
            let spiral = spiral::<T>(cx(p.scalar("lambda")), ctx)?;
            main_theorem_rhs(&psi1(), &spiral, cx(p.scalar("x")))
        }
        _ => unreachable!("the function table and evaluate cover the same names"),
    }
}

/// The default Laplace window is a term budget sized for the 53-bit stopping
/// rule; the tighter rule of a wider scalar needs proportionally more terms
/// to fire at the same geometric tail ratio.
fn spiral<T: QReal>(lambda: Complex<T>, ctx: QContext<T>) -> Result<SpiralSpec<T>> {
    let window = DEFAULT_WINDOW * T::PRECISION_BITS as usize / 53;
    SpiralSpec::new(lambda, ctx)?.with_window(window)
}

/// The Laplace sum is certified on |x| > |b1/(a1 a2)|; below that radius it
/// usually fails to converge, so say so up front on standard error.
fn warn_below_certified_radius(p: &Provided) {
    let mag = |(re, im): (f64, f64)| re.hypot(im);
    let radius = mag(p.scalar("b1")) / (mag(p.scalar("a1")) * mag(p.scalar("a2")));
    let xm = mag(p.scalar("x"));
    if radius.is_finite() && xm <= radius {
        eprintln!(
            "warning: |x| = {xm:.6} does not exceed |b1/(a1 a2)| = {radius:.6}; the \
             resummation is certified only on |x| > |b1/(a1 a2)| and may not converge here"
        );
    }
}

fn cmd_check(args: &CheckArgs) -> u8 {
    if let Some(tolerance) = args.tolerance {
        if let Err(message) = check_tolerance(tolerance) {
            return usage(message);
        }
    }
    let report = match run_check(args) {
        Ok(report) => report,
        Err(err) => return report_error(&err),
    };
    print_report_lines(&report);
    if report.summary.fail == 0 {
        0
    } else {
        1
    }
}

fn run_check(args: &CheckArgs) -> Result<SweepReport> {
    let identity = Identity::parse(&args.identity)?;
    let mut config = default_config(identity);
    if let Some(tolerance) = args.tolerance {
        config.tolerance = tolerance;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let report = run_sweep(&config)?;
    if let Some(path) = &args.output {
        write_report(&report, args.format, path)?;
    }
    Ok(report)
}

fn cmd_sweep(args: &SweepArgs) -> u8 {
    let report = match run_sweep_file(args) {
        Ok(report) => report,
        Err(err) => return report_error(&err),
    };
    print_report_lines(&report);
    if report.summary.fail == 0 {
        0
    } else {
        1
    }
}

fn run_sweep_file(args: &SweepArgs) -> Result<SweepReport> {
    let text = std::fs::read_to_string(&args.config)?;
    let config = SweepConfig::from_json_str(&text)?;
    let report = run_sweep(&config)?;
    if let Some(path) = &args.output {
        write_report(&report, args.format, path)?;
    }
    Ok(report)
}

fn cmd_verify_all(args: &VerifyAllArgs) -> u8 {
    if let Some(tolerance) = args.tolerance {
        if let Err(message) = check_tolerance(tolerance) {
            return usage(message);
        }
    }
    if let Err(err) = std::fs::create_dir_all(&args.output_dir) {
        eprintln!(
            "error: cannot create {}: {err}",
            args.output_dir.display()
        );
        return 1;
    }
    let extension = match args.format {
        ReportFormat::Json => "json",
        ReportFormat::Csv => "csv",
    };
    let mut failures = 0;
    for identity in Identity::ALL {
        let mut config = default_config(identity);
        if let Some(tolerance) = args.tolerance {
            config.tolerance = tolerance;
        }
        if let Some(seed) = args.seed {
            config.seed = seed;
        }
        let report = match run_sweep(&config) {
            Ok(report) => report,
            Err(err) => return report_error(&err),
        };
        let path = args.output_dir.join(format!("{identity}.{extension}"));
        if let Err(err) = write_report(&report, args.format, &path) {
            return report_error(&err);
        }
        print_report_lines(&report);
        failures += report.summary.fail;
    }
    if failures == 0 {
        println!("all identities pass");
        0
    } else {
        println!("{failures} failing points across the identity suite");
        1
    }
}

fn print_report_lines(report: &SweepReport) {
    let summary = &report.summary;
    println!(
        "{}: {} pass, {} fail, {} skip, max relative residual {:.3e}",
        report.identity, summary.pass, summary.fail, summary.skip, summary.max_rel_residual
    );
    for record in &report.records {
        if record.status != RecordStatus::Pass {
            let reason = if record.reason.is_empty() {
                "no reason recorded"
            } else {
                &record.reason
            };
            println!(
                "  record {}: {} ({reason})",
                record.index,
                record.status.as_str()
            );
        }
    }
}
