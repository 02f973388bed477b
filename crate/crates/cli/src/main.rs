use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use singauss_cli::builtins;
use singauss_cli::config::ScenarioConfig;
use singauss_cli::fuzz::{fuzz, FuzzOutcome};
use singauss_cli::report;
use singauss_cli::runner::{batch_status, run_batch, Overrides, ScenarioRun, Status};

#[derive(Parser)]
#[command(name = "singauss", version, about = "Check Gauss-Bonnet type identities for maps between surfaces with folds and cusps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Write an SVG picture of each scenario (suffixed by name when several run).
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Override the identity tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the grid resolution used to seed the tracing.
    #[arg(long, global = true)]
    resolution: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or a built-in scenario (`all` runs every fixed one).
    Run {
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        config: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        /// Seed for the randomized built-in.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the built-in scenarios.
    List,
    /// Check GB2 on seeded random maps.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(Status::ConfigurationError.exit_code() as u8)
}

fn svg_path(base: &Path, name: &str, many: bool) -> PathBuf {
    if !many {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    base.with_file_name(format!("{stem}-{name}.svg"))
}

fn write_outputs(runs: &[ScenarioRun], common: &Common) -> std::io::Result<()> {
    for run in runs {
        let svg = common.svg.as_ref().map(|p| svg_path(p, run.name(), runs.len() > 1)).or_else(|| run.config.output.svg.clone());
        if let (Some(path), Some(s), Some(a)) = (svg, &run.scenario, &run.analysis) {
            singauss_cli::svg::write(s, a, &path)?;
        }
    }
    let json = common.json.clone().or_else(|| match runs {
        [one] => one.config.output.json.clone(),
        _ => None,
    });
    if let Some(path) = json {
        std::fs::write(path, report::json(runs))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(Status::ConfigurationError.exit_code() as u8);
        }
    };
    let overrides = Overrides { tolerance: cli.common.tol, resolution: cli.common.resolution };
    match cli.command {
        Command::List => {
            for b in builtins::list() {
                let ids: Vec<String> = b.theorems.iter().map(|t| t.to_string()).collect();
                println!("{:<26} {:<22} {}", b.name, ids.join(","), b.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, builtin, seed } => {
            let configs = match (config, builtin) {
                (Some(path), _) => match ScenarioConfig::load(&path) {
                    Ok(c) => vec![c],
                    Err(e) => return config_error(e),
                },
                (None, Some(name)) if name == "all" => builtins::list()
                    .into_iter()
                    .filter(|b| b.name != builtins::FUZZ)
                    .filter_map(|b| builtins::get(&b.name, seed))
                    .collect(),
                (None, Some(name)) => match builtins::get(&name, seed) {
                    Some(c) => vec![c],
                    None => return config_error(format!("unknown built-in scenario `{name}` (see `singauss list`)")),
                },
                (None, None) => return config_error("give a scenario file or --builtin"),
            };
            let runs = run_batch(configs, overrides);
            for run in &runs {
                print!("{}", report::table(run));
            }
            if let Err(e) = write_outputs(&runs, &cli.common) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(Status::IdentityFailure.exit_code() as u8);
            }
            ExitCode::from(batch_status(&runs).exit_code() as u8)
        }
        Command::Fuzz { count, seed } => {
            let (summary, runs) = fuzz(count, seed, overrides);
            for e in &summary.entries {
                match &e.outcome {
                    FuzzOutcome::Pass { residual } => println!("seed {:<6} pass  residual {residual:.3e}", e.seed),
                    FuzzOutcome::Fail { reason } => println!("seed {:<6} FAIL  {reason}", e.seed),
                    FuzzOutcome::Rejected { reason } => eprintln!("seed {:<6} rejected: {reason}", e.seed),
                }
            }
            println!(
                "{} maps: {} passed, {} failed, {} rejected (rejection rate {:.1}%)",
                summary.count,
                summary.passed,
                summary.failed,
                summary.rejected,
                100.0 * summary.rejection_rate
            );
            if let Some(path) = &cli.common.json {
                let text = serde_json::to_string_pretty(&summary).expect("fuzz summary serializes") + "\n";
                if let Err(e) = std::fs::write(path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                }
            }
            if let Some(base) = &cli.common.svg {
                for run in &runs {
                    if let (Some(s), Some(a)) = (&run.scenario, &run.analysis) {
                        let _ = singauss_cli::svg::write(s, a, &svg_path(base, run.name(), true));
                    }
                }
            }
            ExitCode::from(summary.status().exit_code() as u8)
        }
    }
}
