//! `caqi` command-line front end.

mod args;
mod figure;
mod output;
mod report;
mod sweep;
mod verify;

use std::path::Path;
use std::process::ExitCode;

use caqi_core::optimize::{minimize_sensitivity, OptimizerSettings};
use caqi_core::{evaluate, noise_breakdown, OptimizeMode};
use clap::Parser;

use args::{Cli, Command, FigureArgs, PointArgs, Settings, VerifyArgs};
use output::{emit, json_text, output_dir, write_file, Format};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Eval(caqi_core::Error),
    Io(String),
    VerifyFailed(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Eval(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Eval(e) => write!(f, "evaluation error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::VerifyFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl From<caqi_core::Error> for CliError {
    fn from(e: caqi_core::Error) -> Self {
        CliError::Eval(e)
    }
}

fn point(a: &PointArgs) -> Result<(), CliError> {
    let s = Settings::from_args(&a.params, Format::Json)?;
    let config = s.scheme_config()?;
    let m = evaluate(&config)?;
    let text = match s.format {
        Format::Json => json_text(&report::metrics_json(&config, &m)),
        Format::Csv => report::metrics_series(&config, &m).to_csv(),
    };
    emit(&text, s.out.as_deref())
}

fn optimize(a: &PointArgs) -> Result<(), CliError> {
    let s = Settings::from_args(&a.params, Format::Json)?;
    if s.gain.is_some() || s.split.is_some() {
        return Err(CliError::Usage(
            "optimize chooses the split and gain; drop --gain/--split".into(),
        ));
    }
    let p = s.params()?;
    let mode = if s.constrained {
        OptimizeMode::ConstrainedPhotonNumber
    } else {
        OptimizeMode::Free
    };
    let outcome = minimize_sensitivity(p.l, p.r, p.n, mode, &OptimizerSettings::default())?;
    let text = match s.format {
        Format::Json => json_text(&report::outcome_json(&outcome)),
        Format::Csv => report::outcome_series(&outcome).to_csv(),
    };
    emit(&text, s.out.as_deref())
}

fn decompose(a: &PointArgs) -> Result<(), CliError> {
    let s = Settings::from_args(&a.params, Format::Json)?;
    let config = s.scheme_config()?;
    let b = noise_breakdown(&config)?;
    let text = match s.format {
        Format::Json => json_text(&report::breakdown_json(&config, &b)),
        Format::Csv => report::breakdown_series(&config, &b).to_csv(),
    };
    emit(&text, s.out.as_deref())
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn figure(a: &FigureArgs) -> Result<(), CliError> {
    let format = a.format.unwrap_or(Format::Csv);
    if a.gnuplot && format != Format::Csv {
        return Err(CliError::Usage("--gnuplot needs csv output".into()));
    }
    if a.id == "all" {
        let dir = output_dir(a.out.as_deref());
        for id in figure::IDS {
            let series = figure::build(id)?;
            let path = dir.join(format!("{id}.{}", extension(format)));
            write_file(&path, &series.render(format))?;
            if a.gnuplot {
                write_file(&path.with_extension("gp"), &figure::gnuplot_script(id, &series, &path))?;
            }
        }
        return Ok(());
    }
    let series = figure::build(&a.id)?;
    if a.gnuplot {
        let out = a
            .out
            .as_deref()
            .ok_or_else(|| CliError::Usage("--gnuplot needs --out".into()))?;
        let path = output::resolve_path(out);
        write_file(
            &path.with_extension("gp"),
            &figure::gnuplot_script(&a.id, &series, &path),
        )?;
    }
    emit(&series.render(format), a.out.as_deref())
}

fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let checks = verify::run(a.suite);
    emit(
        &verify::render(a.suite, &checks, a.format.unwrap_or(Format::Csv)),
        a.out.as_deref(),
    )?;
    match checks.iter().filter(|c| !c.passed).count() {
        0 => Ok(()),
        n => Err(CliError::VerifyFailed(n)),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Point(a) => point(a),
        Command::Sweep(a) => {
            let (series, format, settings) = sweep::run(a)?;
            emit(&series.render(format), settings.out.as_deref().map(Path::new))
        }
        Command::Optimize(a) => optimize(a),
        Command::Figure(a) => figure(a),
        Command::Decompose(a) => decompose(a),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("caqi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
