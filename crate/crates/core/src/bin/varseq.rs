use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varseq::cli::{run_file, Command, Overrides};

#[derive(Parser)]
#[command(name = "varseq", version, about = "Variational sequences on jet spaces: Helmholtz, Tonti, Noether and gluing obstructions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Helmholtz conditions per chart and the global obstruction class.
    CheckVariational(Common),
    /// Euler-Lagrange expressions, or local Lagrangians from source forms.
    Derive(Common),
    /// Symmetry classification and Noether-type currents.
    Noether(Common),
    /// Local presentation, transition differences and obstruction classes.
    Glue(Common),
    /// Section-dependent obstructions and the global existence verdict.
    Obstruction(Common),
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON, schema vjp-schema-1).
    #[arg(long)]
    problem: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Human-readable report.
    #[arg(long, conflicts_with = "json")]
    text: bool,
    /// JSON report (default).
    #[arg(long)]
    json: bool,
    /// Override a tolerance: tau_eq, tau_quad, tau_class or tau_crit.
    #[arg(long = "tolerance", value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value: {e}"))?;
    Ok((name.trim().to_string(), value))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::CheckVariational(a) => (Command::CheckVariational, a),
        Cmd::Derive(a) => (Command::Derive, a),
        Cmd::Noether(a) => (Command::Noether, a),
        Cmd::Glue(a) => (Command::Glue, a),
        Cmd::Obstruction(a) => (Command::Obstruction, a),
    };
    let overrides = Overrides { seed: args.seed, tolerances: args.tolerances };
    let report = run_file(command, &args.problem, &overrides);
    let rendered = if args.text { report.to_text() } else { report.to_json() };
    match &args.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("varseq: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            eprintln!("{}", report.verdict);
        }
        None => print!("{rendered}"),
    }
    ExitCode::from(report.exit_code as u8)
}
