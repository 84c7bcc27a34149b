use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use esqpt_cli::config::{build, entries, override_entry, ConfigError, Entry};
use esqpt_cli::presets::{preset_text, NAMES};
use esqpt_cli::{run_to, RunConfig};
use esqpt_core::Error;

/// Spectra, level flows, thermodynamics and level densities of the cusp and
/// collective models.
#[derive(Parser, Debug)]
#[command(name = "esqpt", version)]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, short)]
    config: Option<PathBuf>,

    /// Start from a built-in figure configuration.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(NAMES))]
    preset: Option<String>,

    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory; overrides `output_dir`.
    #[arg(long, short)]
    output: Option<PathBuf>,

    /// Command to run (spectrum, flow, density, classical, thermo, wavefunction, report).
    command: Option<String>,

    /// Figure for `report`; selects the matching preset when no other
    /// configuration is given.
    figure: Option<String>,
}

fn collect(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut list: Vec<Entry> = Vec::new();
    let preset = cli.preset.clone().or_else(|| match (&cli.config, cli.command.as_deref(), &cli.figure) {
        (None, Some("report"), Some(f)) if preset_text(f).is_some() => Some(f.clone()),
        _ => None,
    });
    if let Some(p) = &preset {
        list.extend(entries(preset_text(p).expect("validated by clap"), &format!("preset {p}"))?);
    }
    if let Some(path) = &cli.config {
        let origin = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| ConfigError { origin: origin.clone(), line: None, message: e.to_string() })?;
        list.extend(entries(&text, &origin)?);
    }
    let positional = [("command", &cli.command), ("figure", &cli.figure)];
    for (key, value) in positional {
        if let Some(v) = value {
            let mut e = override_entry(&format!("{key}={v}"), 0)?;
            e.origin = "command line".into();
            list.push(e);
        }
    }
    for (i, s) in cli.set.iter().enumerate() {
        list.push(override_entry(s, i)?);
    }
    if let Some(dir) = &cli.output {
        let mut e = override_entry(&format!("output_dir={}", dir.display()), 0)?;
        e.origin = "--output".into();
        list.push(e);
    }
    build(&list)
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    match err.downcast_ref::<Error>() {
        Some(Error::Unconverged { .. }) | Some(Error::UnconvergedAt { .. }) => "unconverged",
        Some(Error::Domain(_)) => "domain",
        Some(Error::InvalidArgument(_)) => "invalid_argument",
        Some(Error::ModelMismatch(_)) => "model_mismatch",
        Some(Error::LogSingularity { .. }) => "log_singularity",
        Some(Error::ParityUndefined(_)) => "parity_undefined",
        Some(Error::SingleWell(_)) => "single_well",
        Some(Error::Empty(_)) => "empty",
        Some(Error::GridTooCoarse(_)) => "grid_too_coarse",
        Some(Error::Numerical(_)) => "numerical",
        None if err.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some()) => "io",
        None => "runtime",
    }
}

/// `key: value` lines, one record per failure.
fn error_record(kind: &str, message: &str) -> String {
    format!("kind: {kind}\nmessage: {}\n", message.replace('\n', " "))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match collect(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{}", error_record("config", &e.to_string()));
            return ExitCode::from(2);
        }
    };
    match run_to(&cfg, &cfg.output_dir) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            // core errors already carry their cause in the message
            let message = if e.downcast_ref::<Error>().is_some() { e.to_string() } else { format!("{e:#}") };
            let record = error_record(error_kind(&e), &message);
            eprint!("{record}");
            if fs::create_dir_all(&cfg.output_dir).is_ok() {
                let _ = fs::write(cfg.output_dir.join("error.txt"), &record);
            }
            ExitCode::FAILURE
        }
    }
}
