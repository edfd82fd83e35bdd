//! `rank1sft` command-line front end.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for an
//! invalid configuration or an I/O problem.

mod checks;
mod commands;
mod config;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{Format, RunConfig, Space, Suite};
use report::{write_checks_csv, write_csv, write_json, CheckResult, Row, SpaceSummary};

#[derive(Parser, Debug)]
#[command(name = "rank1sft", version, about = "Spherical Fourier analysis on split-rank-one symmetric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for randomized check points.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derived data of the space: rho, gamma_r, pole sets, polynomial roots, strip.
    Describe(Common),
    /// CSV sweep of an eigenfunction object over the lambda and t grids.
    Eval(Common),
    /// Forward transform of the configured function.
    Transform(Common),
    /// Reconstruction of the configured function from its transform.
    Invert(Common),
    /// Run verification suites.
    Check {
        #[command(flatten)]
        common: Common,
        /// Suite to run (repeatable); overrides the configuration.
        #[arg(long, value_enum)]
        suite: Vec<Suite>,
    },
    /// Fit the Plancherel constant on the reference bump.
    Calibrate(Common),
    /// Print the preset catalogue as JSON.
    Presets {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    #[serde(flatten)]
    body: T,
    pass: bool,
}

#[derive(Serialize)]
struct RowsReport {
    space: SpaceSummary,
    rows: Vec<Row>,
}

#[derive(Serialize)]
struct CheckReport {
    space: SpaceSummary,
    r: f64,
    seed: u64,
    suites: Vec<&'static str>,
    checks: Vec<CheckResult>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("RANK1SFT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("RANK1SFT_THREADS = {v:?} is not a thread count"))?;
        rank1sft::parallel::set_threads(n);
    }
    Ok(())
}

fn open(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(common: &Common) -> anyhow::Result<(RunConfig, Space)> {
    let cfg = RunConfig::load(&common.config)?;
    let space = cfg.validate().context("invalid configuration")?;
    for w in &space.warnings {
        eprintln!("warning: {w}");
    }
    Ok((cfg, space))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    configure_threads()?;
    if let Command::Presets { out } = &cli.command {
        let mut w = open(out.as_ref())?;
        write_json(&mut w, &rank1sft::spaces::preset_catalogue())?;
        w.flush()?;
        return Ok(true);
    }
    let (common, suites) = match &cli.command {
        Command::Describe(c) | Command::Eval(c) | Command::Transform(c) | Command::Invert(c) | Command::Calibrate(c) => (c, None),
        Command::Check { common, suite } => (common, Some(suite.clone())),
        Command::Presets { .. } => unreachable!(),
    };
    let (cfg, space) = load(common)?;
    let format = common.format.or(cfg.output.format);
    let out_path = common.out.clone().or_else(|| cfg.output.path.clone());
    let json_only = |verb: &str| -> anyhow::Result<()> {
        if format == Some(Format::Csv) {
            bail!("{verb} reports are JSON only");
        }
        Ok(())
    };

    // compute everything before opening the output so a failure leaves no partial file
    let (pass, emit): (bool, Box<dyn FnOnce(&mut dyn Write) -> anyhow::Result<()>>) = match &cli.command {
        Command::Describe(_) => {
            json_only("describe")?;
            let d = commands::describe(&cfg, &space)?;
            (true, Box::new(move |w| write_json(w, &envelope("describe", d, true))))
        }
        Command::Eval(_) => {
            let rows = commands::eval(&cfg, &space)?;
            // per-point failures are data, not check failures
            (true, rows_writer("eval", &space, rows, format.unwrap_or(Format::Csv), true))
        }
        Command::Transform(_) => {
            let rows = commands::transform(&cfg, &space)?;
            let pass = rows.iter().all(Row::ok);
            (pass, rows_writer("transform", &space, rows, format.unwrap_or(Format::Json), pass))
        }
        Command::Invert(_) => {
            let r = commands::invert(&cfg, &space)?;
            let pass = r.checks.iter().all(|c| c.pass) && r.rows.iter().all(|row| row.status == "ok");
            match format.unwrap_or(Format::Json) {
                Format::Json => (pass, Box::new(move |w| write_json(w, &envelope("invert", r, pass)))),
                Format::Csv => (pass, Box::new(move |w| write_csv(w, &r.rows))),
            }
        }
        Command::Calibrate(_) => {
            json_only("calibrate")?;
            let r = commands::calibrate(&cfg, &space)?;
            let pass = r.checks.iter().all(|c| c.pass);
            (pass, Box::new(move |w| write_json(w, &envelope("calibrate", r, pass))))
        }
        Command::Check { common, .. } => {
            let mut chosen = suites.filter(|s| !s.is_empty()).unwrap_or_else(|| cfg.check.suites.clone());
            if chosen.is_empty() {
                chosen = Suite::ALL.to_vec();
            }
            chosen.sort();
            chosen.dedup();
            let seed = common.seed.unwrap_or(cfg.check.seed);
            let checks = checks::run(&cfg, &space, &chosen, seed);
            let pass = checks.iter().all(|c| c.pass);
            let body = CheckReport {
                space: SpaceSummary::new(&space),
                r: cfg.r,
                seed,
                suites: chosen.iter().map(Suite::name).collect(),
                checks,
            };
            match format.unwrap_or(Format::Json) {
                Format::Json => (pass, Box::new(move |w| write_json(w, &envelope("check", body, pass)))),
                Format::Csv => (pass, Box::new(move |w| write_checks_csv(w, &body.checks))),
            }
        }
        Command::Presets { .. } => unreachable!(),
    };
    let mut w = open(out_path.as_ref())?;
    emit(&mut w)?;
    w.flush()?;
    Ok(pass)
}

fn envelope<T: Serialize>(command: &str, body: T, pass: bool) -> Envelope<'_, T> {
    Envelope { command, body, pass }
}

fn rows_writer(
    command: &'static str,
    space: &Space,
    rows: Vec<Row>,
    format: Format,
    pass: bool,
) -> Box<dyn FnOnce(&mut dyn Write) -> anyhow::Result<()>> {
    let space = SpaceSummary::new(space);
    match format {
        Format::Csv => Box::new(move |w| write_csv(w, &rows)),
        Format::Json => Box::new(move |w| write_json(w, &envelope(command, RowsReport { space, rows }, pass))),
    }
}
