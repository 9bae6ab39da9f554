//! `gammasd` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or domain errors, 2 when a fit does
//! not converge or the validation sweep fails inside the cut-off region.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gammasd_core::{
    fit_prior, precision_pdf, run_grid_with, sd_moments, sd_pdf, summarize, write_csv,
    CutoffRegion, Execution, GammaParams, GridSpec, GridSummary, OptimOptions, SdSummary,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gammasd",
    version,
    about = "Convert between Gamma precision priors and noise SD summaries"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean and SD of s = 1/sqrt(p) for p ~ Gamma(a, b).
    #[command(allow_negative_numbers = true)]
    Forward {
        #[arg(long, value_parser = positive)]
        a: f64,
        #[arg(long, value_parser = positive)]
        b: f64,
    },
    /// Gamma(a0, b0) whose induced SD distribution has the given mean and SD.
    #[command(allow_negative_numbers = true)]
    Inverse {
        #[arg(long, value_parser = positive)]
        mu: f64,
        #[arg(long, value_parser = positive)]
        sigma: f64,
        #[command(flatten)]
        optim: OptimArgs,
    },
    /// Tabulate a density on an evenly spaced grid.
    #[command(allow_negative_numbers = true)]
    Pdf {
        #[arg(long, value_enum)]
        dist: Dist,
        #[arg(long, value_parser = positive)]
        a: f64,
        #[arg(long, value_parser = positive)]
        b: f64,
        #[arg(long, value_parser = finite)]
        from: f64,
        #[arg(long, value_parser = finite)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Round-trip validation sweep over a log-spaced (mu, sigma/mu) grid.
    #[command(allow_negative_numbers = true)]
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Precision,
    Sd,
}

#[derive(Debug, Args)]
pub struct OptimArgs {
    #[arg(long, value_parser = positive, default_value_t = OptimOptions::default().x_tol)]
    pub x_tol: f64,
    #[arg(long, default_value_t = OptimOptions::default().max_iter)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1000)]
    pub mu_points: usize,
    #[arg(long, default_value_t = 1000)]
    pub sigma_points: usize,
    #[arg(long, value_parser = positive, default_value_t = 1e-4)]
    pub mu_lo: f64,
    #[arg(long, value_parser = positive, default_value_t = 1e4)]
    pub mu_hi: f64,
    #[arg(long, value_parser = positive, default_value_t = 1e-4)]
    pub ratio_lo: f64,
    #[arg(long, value_parser = positive, default_value_t = 1e2)]
    pub ratio_hi: f64,
    #[arg(long, value_parser = positive, default_value_t = 1e-2)]
    pub pass_threshold: f64,
    #[command(flatten)]
    pub optim: OptimArgs,
    /// CSV destination; without it the CSV goes to stdout and the summary to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluate cells on a single thread.
    #[arg(long)]
    pub serial: bool,
}

fn finite(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, got {s}"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

/// Rounds to 12 significant digits for plain/JSON output.
fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// 12 significant digits, switching to exponent notation for very small or large values.
fn plain(x: f64) -> String {
    let r = sig12(x);
    if r == 0.0 || !r.is_finite() || (1e-4..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Plain or JSON number; JSON has no NaN, so those become `null`.
fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(sig12(x))
        .map_or(serde_json::Value::Null, serde_json::Value::Number)
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Parses `argv` (including the program name) and executes the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let mut io = Io { out, err };
    match execute(&cli, &mut io) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(io.err, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn numerical(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e)
    }
}

fn execute(cli: &Cli, io: &mut Io<'_>) -> Result<i32, Failure> {
    match &cli.command {
        Command::Forward { a, b } => forward(*a, *b, cli.format, io),
        Command::Inverse { mu, sigma, optim } => inverse(*mu, *sigma, optim, cli.format, io),
        Command::Pdf {
            dist,
            a,
            b,
            from,
            to,
            points,
        } => pdf(*dist, *a, *b, *from, *to, *points, cli.format, io),
        Command::Validate(args) => validate(args, cli.format, io),
    }
}

fn optim_options(args: &OptimArgs) -> Result<OptimOptions, Failure> {
    OptimOptions::new(args.x_tol, args.max_iter).map_err(Failure::usage)
}

fn forward(a: f64, b: f64, format: Format, io: &mut Io<'_>) -> Result<i32, Failure> {
    let params = GammaParams::new(a, b).map_err(Failure::usage)?;
    let summary = sd_moments(&params).map_err(|e| match e {
        gammasd_core::Error::Domain(_) => Failure::usage(e),
        other => Failure::numerical(other),
    })?;
    match format {
        Format::Plain => {
            writeln!(io.out, "mu = {}", plain(summary.mu()))?;
            writeln!(io.out, "sigma = {}", plain(summary.sigma()))?;
        }
        Format::Json => {
            let v = json!({ "a": a, "b": b, "mu": json_num(summary.mu()), "sigma": json_num(summary.sigma()) });
            writeln!(io.out, "{v}")?;
        }
        Format::Csv => {
            writeln!(io.out, "a,b,mu,sigma")?;
            writeln!(
                io.out,
                "{},{},{},{}",
                sig17(a),
                sig17(b),
                sig17(summary.mu()),
                sig17(summary.sigma())
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn inverse(
    mu: f64,
    sigma: f64,
    optim: &OptimArgs,
    format: Format,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let target = SdSummary::new(mu, sigma).map_err(Failure::usage)?;
    let opts = optim_options(optim)?;
    let fit = fit_prior(&target, &opts).map_err(Failure::numerical)?;
    let (rel_mu, rel_sigma) = fit.round_trip_rel_err;
    match format {
        Format::Plain => {
            let rows = [
                ("a0", plain(fit.params.a())),
                ("b0", plain(fit.params.b())),
                ("mu_rt", plain(fit.round_trip.mu())),
                ("sigma_rt", plain(fit.round_trip.sigma())),
                ("rel_err_mu", plain(rel_mu)),
                ("rel_err_sigma", plain(rel_sigma)),
                ("objective", plain(fit.objective_at_min)),
            ];
            for (name, value) in rows {
                writeln!(io.out, "{name} = {value}")?;
            }
            writeln!(io.out, "iterations = {}", fit.iterations)?;
            writeln!(io.out, "converged = {}", fit.converged)?;
        }
        Format::Json => {
            let v = json!({
                "mu": mu,
                "sigma": sigma,
                "a0": json_num(fit.params.a()),
                "b0": json_num(fit.params.b()),
                "mu_rt": json_num(fit.round_trip.mu()),
                "sigma_rt": json_num(fit.round_trip.sigma()),
                "rel_err_mu": json_num(rel_mu),
                "rel_err_sigma": json_num(rel_sigma),
                "objective": json_num(fit.objective_at_min),
                "upper_bound": json_num(fit.upper_bound),
                "iterations": fit.iterations,
                "converged": fit.converged,
            });
            writeln!(io.out, "{v}")?;
        }
        Format::Csv => {
            writeln!(
                io.out,
                "mu,sigma,a0,b0,mu_rt,sigma_rt,rel_err_mu,rel_err_sigma,converged"
            )?;
            writeln!(
                io.out,
                "{},{},{},{},{},{},{},{},{}",
                sig17(mu),
                sig17(sigma),
                sig17(fit.params.a()),
                sig17(fit.params.b()),
                sig17(fit.round_trip.mu()),
                sig17(fit.round_trip.sigma()),
                sig17(rel_mu),
                sig17(rel_sigma),
                fit.converged
            )?;
        }
    }
    if !fit.converged {
        writeln!(
            io.err,
            "warning: fit did not converge (max relative error {:e})",
            fit.max_rel_err()
        )?;
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn pdf(
    dist: Dist,
    a: f64,
    b: f64,
    from: f64,
    to: f64,
    points: usize,
    format: Format,
    io: &mut Io<'_>,
) -> Result<i32, Failure> {
    let params = GammaParams::new(a, b).map_err(Failure::usage)?;
    if points < 2 {
        return Err(Failure::usage("--points must be at least 2"));
    }
    if from >= to {
        return Err(Failure::usage(format!(
            "--from ({from}) must be below --to ({to})"
        )));
    }
    let density = |x: f64| match dist {
        Dist::Precision => precision_pdf(x, &params),
        Dist::Sd => sd_pdf(x, &params),
    };
    let step = (to - from) / (points - 1) as f64;
    let xs = (0..points).map(|i| {
        if i == points - 1 {
            to
        } else {
            from + step * i as f64
        }
    });
    match format {
        Format::Json => {
            let rows: Vec<_> = xs
                .map(|x| json!({ "x": json_num(x), "density": json_num(density(x)) }))
                .collect();
            writeln!(io.out, "{}", serde_json::Value::Array(rows))?;
        }
        Format::Plain | Format::Csv => {
            writeln!(io.out, "x,density")?;
            for x in xs {
                writeln!(io.out, "{},{}", sig17(x), sig17(density(x)))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn validate(args: &ValidateArgs, format: Format, io: &mut Io<'_>) -> Result<i32, Failure> {
    let spec = GridSpec {
        mu_points: args.mu_points,
        sigma_points: args.sigma_points,
        mu_lo: args.mu_lo,
        mu_hi: args.mu_hi,
        sigma_ratio_lo: args.ratio_lo,
        sigma_ratio_hi: args.ratio_hi,
        pass_threshold: args.pass_threshold,
        optim: optim_options(&args.optim)?,
    };
    let execution = if args.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    let cells = run_grid_with(&spec, execution).map_err(Failure::usage)?;
    let summary = summarize(&cells, &CutoffRegion::default()).map_err(Failure::usage)?;

    let summary_sink: &mut dyn Write = match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            write_csv(&cells, file).map_err(Failure::usage)?;
            &mut *io.out
        }
        None => {
            write_csv(&cells, &mut *io.out).map_err(Failure::usage)?;
            &mut *io.err
        }
    };
    write_summary(&summary, format, summary_sink)?;

    Ok(if summary.cutoff_passes() {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}

fn write_summary(s: &GridSummary, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let v = serde_json::to_value(s).unwrap_or(serde_json::Value::Null);
            writeln!(out, "{v}")
        }
        Format::Csv => {
            writeln!(
                out,
                "total,passed,pass_fraction,cutoff_cells,cutoff_failures"
            )?;
            writeln!(
                out,
                "{},{},{},{},{}",
                s.total,
                s.passed,
                sig17(s.pass_fraction),
                s.cutoff_cells,
                s.cutoff_failures
            )
        }
        Format::Plain => {
            writeln!(out, "cells = {}", s.total)?;
            writeln!(
                out,
                "passed = {} ({:.4} %)",
                s.passed,
                100.0 * s.pass_fraction
            )?;
            writeln!(out, "not_converged = {}", s.not_converged)?;
            writeln!(
                out,
                "cutoff {:e} < mu < {:e}, {:e} < sigma/mu < {:e}: {} cells, {} failed",
                s.cutoff.mu_lo,
                s.cutoff.mu_hi,
                s.cutoff.ratio_lo,
                s.cutoff.ratio_hi,
                s.cutoff_cells,
                s.cutoff_failures
            )?;
            match &s.pass_rectangle {
                Some(r) => writeln!(
                    out,
                    "largest passing block: mu in [{}, {}], sigma/mu in [{}, {}] ({} x {} cells, encloses cutoff: {})",
                    plain(r.mu_min),
                    plain(r.mu_max),
                    plain(r.ratio_min),
                    plain(r.ratio_max),
                    r.rows,
                    r.cols,
                    r.encloses_cutoff
                ),
                None => writeln!(out, "largest passing block: none"),
            }
        }
    }
}
