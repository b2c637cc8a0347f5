use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mmnoma_cli::presets::{self, PRESETS};
use mmnoma_cli::{run, validate, ConfigError, ExperimentConfig, Mode, Overrides};

#[derive(Parser)]
#[command(name = "mmnoma", version, about = "Random-beamforming mmWave NOMA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an experiment and write its CSV table.
    Run(Source),
    /// Check an experiment and report derived quantities.
    Validate(Source),
    /// List the bundled presets.
    ListPresets,
}

#[derive(Args)]
struct Source {
    /// Configuration file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Name of a bundled preset.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Output CSV path; standard output when neither this nor the
    /// configuration names one.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path).map_err(|e| e.to_string())?,
            (None, Some(name)) => presets::find(name)
                .ok_or_else(|| format!("unknown preset {name:?}; see list-presets"))?
                .config()
                .map_err(|e| e.to_string())?,
            (None, None) => unreachable!("clap requires a source"),
        };
        cfg.apply(&Overrides { seed: self.seed, trials: self.trials, mode: self.mode, out: self.out.clone() });
        Ok(cfg)
    }
}

fn run_command(source: &Source) -> Result<(), String> {
    let cfg = source.load()?;
    let plan = cfg.plan().map_err(|e| e.to_string())?;
    let start = std::time::Instant::now();
    let table = run(&plan).map_err(|e| e.to_string())?;
    let written = match &plan.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
            table.write_csv(BufWriter::new(file)).map_err(|e| e.to_string())?;
            path.display().to_string()
        }
        None => {
            table.write_csv(io::stdout().lock()).map_err(|e| e.to_string())?;
            "standard output".to_string()
        }
    };
    eprintln!("{}: {} rows to {written} in {:.1?}", plan.name, table.rows.len(), start.elapsed());
    Ok(())
}

fn validate_command(source: &Source) -> Result<(), String> {
    let cfg = source.load()?;
    match validate::validate(&cfg) {
        Ok(lines) => {
            let mut err = io::stderr().lock();
            for line in lines {
                let _ = writeln!(err, "{line}");
            }
            let _ = writeln!(err, "ok");
            Ok(())
        }
        Err(ConfigError::Invalid(issues)) => {
            Err(issues.iter().map(|i| format!("error: {i}")).collect::<Vec<_>>().join("\n"))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(source) => run_command(source),
        Command::Validate(source) => validate_command(source),
        Command::ListPresets => {
            for preset in PRESETS {
                println!("{:<6} {}", preset.name, preset.description());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
