//! Command line driver: `validate`, `simulate`, `fit`, `converge`, `sweep`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use dampwave_core::fit::{fit_decay, DecayFit};
use dampwave_core::output::{self, ReportParts};
use dampwave_core::study::{self, RowStatus};
use dampwave_core::{Error, RunConfig};

/// Process exit statuses; every outcome maps to exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Config = 1,
    Validation = 2,
    CheckFailed = 3,
    Blowup = 4,
    Io = 5,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_error(err: &Error) -> Status {
        match err {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::GridMismatch { .. }
            | Error::Fit(_)
            | Error::AntiderivativeDisabled => Status::Config,
            Error::Validation(_) => Status::Validation,
            Error::Blowup { .. } => Status::Blowup,
            Error::Io { .. } | Error::Csv(_) => Status::Io,
            Error::Provenance(_) | Error::Internal(_) => Status::CheckFailed,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dampwave", version, about = "Damped wave equation with rotational inertia: runs, bounds and decay fits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Run configuration (`section.key = value` lines).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the potential against the decay hypotheses.
    Validate(ConfigArg),
    /// Run, verify every inequality and write the trace and report.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Append the operator-level checks to the report.
        #[arg(long)]
        with_appendix_checks: bool,
    },
    /// Fit log E against log(1+t) from a trace CSV.
    Fit {
        #[command(flatten)]
        config: ConfigArg,
        /// Trace CSV; defaults to `output.csv_path`.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Space, time and domain refinement study.
    Converge(ConfigArg),
    /// Run every combination of the `sweep.*` lists.
    Sweep(ConfigArg),
}

/// Runs one command, writing human output to `out` and diagnostics to `err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Status {
    let result = match &cli.command {
        Command::Validate(c) => validate(&c.config, out),
        Command::Simulate {
            config,
            with_appendix_checks,
        } => simulate(&config.config, *with_appendix_checks, out),
        Command::Fit {
            config,
            trace,
            t_min,
            t_max,
        } => fit(&config.config, trace.as_deref(), *t_min, *t_max, out),
        Command::Converge(c) => converge(&c.config, out),
        Command::Sweep(c) => sweep(&c.config, out),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            Status::of_error(&e)
        }
    }
}

type CmdResult = Result<Status, Error>;

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn validate(path: &Path, out: &mut dyn Write) -> CmdResult {
    let config = RunConfig::load(path)?;
    let result = config.potential.validate(&config.grid()?);
    writeln!(out, "{result}").map_err(io_err)?;
    Ok(if result.ok { Status::Ok } else { Status::Validation })
}

fn simulate(path: &Path, with_appendix: bool, out: &mut dyn Write) -> CmdResult {
    let config = RunConfig::load(path)?;
    let validation = config.potential.validate(&config.grid()?);
    if !validation.ok {
        writeln!(out, "{validation}").map_err(io_err)?;
        return Ok(Status::Validation);
    }
    let outcome = study::run_case(&config, with_appendix)?;
    let report = output::render_report(&ReportParts {
        trace: &outcome.trace,
        ledger: outcome.ledger.as_ref(),
        verification: outcome.verification.as_ref(),
        balance: outcome.balance,
        antiderivative: outcome.antiderivative,
        fit: outcome.fit.as_ref(),
        fit_note: outcome.fit_note.as_deref(),
        appendix: outcome.appendix.as_ref(),
    });
    if let Some(p) = &config.output.csv_path {
        output::write_trace_csv(p, &outcome.trace)?;
    }
    if let Some(p) = &config.output.report_path {
        output::write_bytes(p, report.as_bytes())?;
    }
    if let Some(p) = &config.output.svg_path {
        output::write_bytes(p, output::render_svg(&outcome.trace, outcome.fit.as_ref()).as_bytes())?;
    }
    if let (Some(p), Some(v)) = (&config.output.verification_csv_path, &outcome.verification) {
        output::write_bytes(p, &output::verification_csv(v)?)?;
    }
    write!(out, "{report}").map_err(io_err)?;

    let appendix_ok = outcome.appendix.as_ref().is_none_or(|a| a.passed());
    Ok(if outcome.all_passed() && appendix_ok {
        Status::Ok
    } else {
        Status::CheckFailed
    })
}

fn fit(path: &Path, trace: Option<&Path>, t_min: Option<f64>, t_max: Option<f64>, out: &mut dyn Write) -> CmdResult {
    let mut config = RunConfig::load(path)?;
    let trace = match trace.or(config.output.csv_path.as_deref()) {
        Some(p) => p.to_path_buf(),
        None => return Err(Error::Config("no trace CSV: pass --trace or set output.csv_path".into())),
    };
    if t_min.is_some() {
        config.fit.t_min = t_min;
    }
    if t_max.is_some() {
        config.fit.t_max = t_max;
    }
    let series = output::read_energy_series(&trace)?;
    let (a, b) = study::fit_window(&config)
        .ok_or_else(|| Error::Fit("fit window is empty; pass --t-min/--t-max".into()))?;
    let result: DecayFit = fit_decay(&series, a, b)?;
    writeln!(out, "{result}").map_err(io_err)?;
    Ok(Status::Ok)
}

fn converge(path: &Path, out: &mut dyn Write) -> CmdResult {
    let config = RunConfig::load(path)?;
    let result = study::converge(&config)?;
    writeln!(out, "{result}").map_err(io_err)?;
    Ok(if result.passed() { Status::Ok } else { Status::CheckFailed })
}

fn sweep(path: &Path, out: &mut dyn Write) -> CmdResult {
    let config = RunConfig::load(path)?;
    let rows = study::sweep(&config)?;
    let csv = study::sweep_csv(&rows)?;
    match &config.output.sweep_csv_path {
        Some(p) => output::write_bytes(p, &csv)?,
        None => out.write_all(&csv).map_err(io_err)?,
    }
    for row in &rows {
        writeln!(
            out,
            "row {:>3}  V0 = {:<8} alpha = {:<6} {:<10} {}",
            row.index,
            row.v0,
            row.alpha,
            row.status,
            row.message
        )
        .map_err(io_err)?;
    }
    let failed = rows.iter().any(|r| r.status == RowStatus::Failed);
    Ok(if failed { Status::Blowup } else { Status::Ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_statuses() {
        assert_eq!(Status::of_error(&Error::Config("x".into())).code(), 1);
        assert_eq!(Status::of_error(&Error::AntiderivativeDisabled).code(), 1);
        assert_eq!(Status::of_error(&Error::Validation("x".into())).code(), 2);
        assert_eq!(Status::of_error(&Error::Provenance("x".into())).code(), 3);
        assert_eq!(Status::of_error(&Error::Blowup { t: 1.0 }).code(), 4);
    }

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["dampwave", "simulate", "--config", "a.cfg", "--with-appendix-checks"]).unwrap();
        assert!(matches!(cli.command, Command::Simulate { with_appendix_checks: true, .. }));
        assert!(Cli::try_parse_from(["dampwave", "validate"]).is_err());
        let cli = Cli::try_parse_from(["dampwave", "fit", "--config", "a", "--t-min", "3"]).unwrap();
        assert!(matches!(cli.command, Command::Fit { t_min: Some(t), .. } if t == 3.0));
    }
}
