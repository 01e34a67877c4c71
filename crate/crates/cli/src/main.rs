use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sasaki_monopole::commands::{run, Command};
use sasaki_monopole::config::{FieldChoice, FrameChoice, ToolConfig};
use sasaki_monopole::report::EXIT_ERROR;
use sasaki_monopole::Result;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Calibrate,
    VerifyGeometry,
    VerifyCone,
    FieldCheck,
    SolvePotential,
    Obstruction,
    Equivalence,
    Holonomy,
    Regularity,
    CheckTheorem,
    DumpSamples,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Calibrate => Command::Calibrate,
            Cmd::VerifyGeometry => Command::VerifyGeometry,
            Cmd::VerifyCone => Command::VerifyCone,
            Cmd::FieldCheck => Command::FieldCheck,
            Cmd::SolvePotential => Command::SolvePotential,
            Cmd::Obstruction => Command::Obstruction,
            Cmd::Equivalence => Command::Equivalence,
            Cmd::Holonomy => Command::Holonomy,
            Cmd::Regularity => Command::Regularity,
            Cmd::CheckTheorem => Command::CheckTheorem,
            Cmd::DumpSamples => Command::DumpSamples,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Frame {
    LeftInvariant,
    FlowLift,
}

/// Numerical checks for monopoles on the round 3-sphere and their Kähler cone.
///
/// Exit codes: 0 all suites pass, 2 some suite fails, 3 inconclusive, 1 error.
#[derive(Parser, Debug)]
#[command(name = "smlab", version)]
struct Cli {
    command: Cmd,
    /// JSON config; keys not given keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin field name or path to a JSON field spec.
    #[arg(long)]
    field: Option<String>,
    #[arg(long, value_enum)]
    frame: Option<Frame>,
    #[arg(long)]
    fd_step: Option<f64>,
    /// Random sample points for the geometry suites.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for CSV dumps.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    corollary_mode: bool,
}

fn configure(cli: &Cli) -> Result<ToolConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ToolConfig::load(p)?,
        None => ToolConfig::default(),
    };
    if let Some(f) = &cli.field {
        cfg.field = FieldChoice::Named(f.clone());
    }
    if let Some(f) = cli.frame {
        cfg.frame = match f {
            Frame::LeftInvariant => FrameChoice::LeftInvariant,
            Frame::FlowLift => FrameChoice::FlowLift,
        };
    }
    if let Some(h) = cli.fd_step {
        cfg.fd_step = h;
    }
    if let Some(n) = cli.grid {
        cfg.samples = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.out.is_some() {
        cfg.output.report = cli.out.clone();
    }
    if cli.csv.is_some() {
        cfg.output.csv_dir = cli.csv.clone();
    }
    cfg.corollary_mode |= cli.corollary_mode;
    cfg.validate()?;
    Ok(cfg)
}

fn main_inner(cli: &Cli) -> Result<i32> {
    let cfg = configure(cli)?;
    let outcome = run(cli.command.into(), &cfg)?;
    print!("{}", outcome.report.summary());
    if let Some(path) = &cfg.output.report {
        outcome.report.write(path)?;
    }
    if let Some(dir) = &cfg.output.csv_dir {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &outcome.csv {
            std::fs::write(dir.join(name), body)?;
        }
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    // usage errors exit 1, not clap's 2
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let code = main_inner(&cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    });
    ExitCode::from(code as u8)
}
