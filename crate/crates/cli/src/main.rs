use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gendarboux_cli::output::{artifacts, resolve_out_dir, write_all, Format};
use gendarboux_cli::{load_config, presets, run_scenario, verify_report, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "gendarboux", version, about = "Darboux transformations of the generalized Schrödinger equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        /// Config file or preset name.
        config: String,
        /// Output directory; a subdirectory per scenario is created.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the grid node count.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a scenario's checks and print the report.
    Verify {
        config: String,
        /// Also fail on singular or duplicate-state flags.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        n: Option<usize>,
        /// Add a constant to every partner potential in the residual checks.
        #[arg(long)]
        perturb: Option<f64>,
    },
    /// List the built-in scenarios.
    ListScenarios,
    /// Run a scenario and write one output format.
    Export {
        config: String,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Csv,
    Json,
}

fn prepare(config: &str, n: Option<usize>) -> Result<ScenarioConfig, CliError> {
    let mut cfg = load_config(config)?;
    if let Some(n) = n {
        cfg.grid.n = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(cfg: &ScenarioConfig, out: Option<PathBuf>, formats: &[Format]) -> Result<bool, CliError> {
    let result = run_scenario(cfg)?;
    let dir = resolve_out_dir(out.as_deref(), cfg.output.dir.as_deref()).join(&cfg.name);
    let files = artifacts(&result, formats);
    write_all(&dir, &files)?;
    let failed = result.report.failures().count();
    println!(
        "{}: {} checks, {} failed; {} files in {}",
        cfg.name,
        result.report.checks.len(),
        failed,
        files.len(),
        dir.display()
    );
    for c in result.report.failures() {
        println!("FAIL {} = {:e} (threshold {:e})", c.name, c.value, c.threshold);
    }
    Ok(failed == 0)
}

fn main_inner(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { config, out, n } => {
            let cfg = prepare(&config, n)?;
            let formats: Vec<Format> = cfg.output.formats.iter().filter_map(|f| Format::parse(f)).collect();
            let ok = write(&cfg, out, &formats)?;
            Ok(if ok || !cfg.verify.strict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Verify {
            config,
            strict,
            n,
            perturb,
        } => {
            let mut cfg = prepare(&config, n)?;
            if let Some(p) = perturb {
                cfg.verify.perturb = p;
            }
            let result = run_scenario(&cfg)?;
            let report = verify_report(&result, strict || cfg.verify.strict);
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::ListScenarios => {
            for p in presets::presets() {
                println!("{}\t{}", p.name, p.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Export { config, format, out, n } => {
            let cfg = prepare(&config, n)?;
            let f = match format {
                ExportFormat::Csv => Format::Csv,
                ExportFormat::Json => Format::Json,
            };
            write(&cfg, out, &[f])?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
