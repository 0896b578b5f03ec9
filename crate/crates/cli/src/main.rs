use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abscvx::report::Report;
use clap::{Parser, Subcommand};

mod commands;
mod error;
mod selftest;
mod spec;

use error::{code, CliError};
use spec::Resolved;

#[derive(Parser)]
#[command(
    name = "abscvx",
    version,
    about = "Quadratic-minorant convexity checks on sampled functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem file (TOML).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Write `<command>.txt` (and `<command>.csv` with --csv) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Absolute tolerance for nodewise inequalities.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Emit per-node CSV (hull and envelope).
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Φ_lsc hull, gap and Moreau envelope.
    Hull,
    /// Moreau envelopes for several λ.
    Envelope,
    /// Search for or check a subgradient witness.
    Subgrad,
    /// Turn a local witness into a global one.
    Globalize,
    /// Paraconvexity constant and γ-inequalities.
    Paraconvex,
    /// Intersection property of two minorants.
    Intersect,
    /// Zero-subgradient condition for two functions.
    Zs,
    /// Saddle values and minimax certificate.
    Minimax,
    /// Seeded randomized self-checks.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Hull => "hull",
            Command::Envelope => "envelope",
            Command::Subgrad => "subgrad",
            Command::Globalize => "globalize",
            Command::Paraconvex => "paraconvex",
            Command::Intersect => "intersect",
            Command::Zs => "zs",
            Command::Minimax => "minimax",
            Command::Selftest => "selftest",
        }
    }
}

/// Appends the resolved configuration as `config` sections.
fn config_sections(r: &mut Report, cfg: &Resolved) {
    let Ok(toml::Value::Table(t)) = toml::Value::try_from(cfg) else {
        return;
    };
    r.section("config");
    for (k, v) in t.iter().filter(|(_, v)| !v.is_table()) {
        r.text(k, v);
    }
    for (k, v) in t.iter() {
        if let toml::Value::Table(sub) = v {
            r.section(&format!("config.{k}"));
            for (kk, vv) in sub {
                r.text(kk, vv);
            }
        }
    }
}

fn load(cli: &Cli, cmd: Command) -> Result<Resolved, CliError> {
    let file = match &cli.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            spec::parse(&text)?
        }
        None if matches!(cmd, Command::Selftest) => spec::SpecFile::default(),
        None => return Err(CliError::Spec("--spec <file> is required".into())),
    };
    spec::resolve(&file, cmd.name(), cli.seed, cli.tol)
}

fn dispatch(cmd: Command, cfg: &mut Resolved) -> Result<commands::Outcome, CliError> {
    match cmd {
        Command::Hull => commands::hull(cfg),
        Command::Envelope => commands::envelope(cfg),
        Command::Subgrad => commands::subgrad(cfg),
        Command::Globalize => commands::globalize_cmd(cfg),
        Command::Paraconvex => commands::paraconvex(cfg),
        Command::Intersect => commands::intersect(cfg),
        Command::Zs => commands::zs(cfg),
        Command::Minimax => commands::minimax(cfg),
        Command::Selftest => selftest::run(cfg),
    }
}

fn error_section(r: &mut Report, e: &CliError) {
    r.section("error")
        .text("exit_code", e.exit_code())
        .text("message", e);
    if let CliError::Core(abscvx::Error::VerificationFailed(w)) = e {
        r.witness("witness.", w);
    }
}

fn write_out(dir: &Path, name: &str, report: &str, csv: Option<&str>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(format!("{name}.txt")), report).map_err(io)?;
    if let Some(c) = csv {
        std::fs::write(dir.join(format!("{name}.csv")), c).map_err(io)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = cli.command;
    let mut cfg = match load(&cli, cmd) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let mut report = Report::new();
    let (body, csv, status) = match dispatch(cmd, &mut cfg) {
        Ok(o) => (Some(o.report), o.csv, o.code),
        Err(e) => {
            eprintln!("error: {e}");
            let mut r = Report::new();
            error_section(&mut r, &e);
            (Some(r), None, e.exit_code())
        }
    };
    config_sections(&mut report, &cfg);
    let mut text = report.render();
    if let Some(b) = body {
        text.push('\n');
        text.push_str(&b.render());
    }
    let csv = csv.filter(|_| cli.csv);
    let written = match &cli.out {
        Some(dir) => write_out(dir, cmd.name(), &text, csv.as_deref()),
        None => {
            // Without --out, --csv replaces the report on stdout.
            print!("{}", csv.as_deref().unwrap_or(&text));
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(code::IO as u8);
    }
    ExitCode::from(status as u8)
}
