use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qlink_core::scenario::{self, parse_override, ResultTable, Scenario, ScenarioBuilder, ScenarioKind};
use qlink_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qlink",
    version,
    about = "Satellite quantum-link budgets, repeater times and MA-QKD key rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (flat `section.key = value` lines).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Bundled preset applied underneath the scenario file.
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Override a single key, e.g. `--set beam.divergence_urad=10`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for sweep evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Channel loss of single hops.
    LinkBudget,
    /// Entanglement-distribution times of repeater chains.
    Repeater,
    /// Secret-key rates of E91 and memory-assisted QKD.
    Maqkd,
    /// Regenerate the table behind a figure (fig3a..fig6b).
    Reproduce { figure: String },
    /// Load and validate a scenario without running it.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn build(cli: &Cli, kind: Option<ScenarioKind>, preset: Option<&str>) -> Result<Scenario> {
    let mut builder = ScenarioBuilder::new();
    if let Some(kind) = kind {
        builder.set("scenario.kind", kind.name())?;
    }
    if let Some(preset) = preset {
        builder.apply_preset(preset)?;
    }
    if let Some(path) = &cli.scenario {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        builder.apply_text(&text)?;
    }
    for raw in &cli.overrides {
        let (key, value) = parse_override(raw)?;
        builder.set(&key, &value)?;
    }
    let scenario = builder.build()?;
    if let Some(kind) = kind {
        if scenario.kind != kind {
            return Err(Error::Validation {
                key: "scenario.kind".into(),
                message: format!(
                    "`{}` scenario given to the `{}` command",
                    scenario.kind.name(),
                    kind.name()
                ),
            });
        }
    }
    Ok(scenario)
}

fn emit(cli: &Cli, table: &ResultTable) -> Result<()> {
    let text = match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let kind = match cli.command {
        Command::LinkBudget => Some(ScenarioKind::LinkBudget),
        Command::Repeater => Some(ScenarioKind::Repeater),
        Command::Maqkd => Some(ScenarioKind::Maqkd),
        Command::Reproduce { .. } | Command::Validate => None,
    };
    match &cli.command {
        Command::Reproduce { figure } => {
            if !scenario::FIGURES.contains(&figure.as_str()) {
                return Err(Error::UnknownFigure(figure.clone()));
            }
            let s = build(cli, None, Some(figure))?;
            emit(cli, &scenario::run(&s))
        }
        Command::Validate => {
            let s = build(cli, None, cli.preset.as_deref())?;
            println!(
                "ok: {} ({}), {} sweep points over {}, sha256 {}",
                s.name,
                s.kind.name(),
                s.sweep.points,
                s.sweep.variable,
                s.hash()
            );
            Ok(())
        }
        _ => {
            let s = build(cli, kind, cli.preset.as_deref())?;
            emit(cli, &scenario::run(&s))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build();
    let result = match pool {
        Ok(pool) => pool.install(|| execute(&cli)),
        Err(e) => Err(Error::Io(format!("thread pool: {e}"))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("qlink: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
