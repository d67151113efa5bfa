use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rbnoise::suites::{has_errors, run, Diagnostic, Experiment, ExperimentConfig, RunManifest, Severity, MANIFEST_FILE};
use rbnoise::Error;

/// Randomized-benchmarking noise suites: simulate, fit and export plot data.
#[derive(Parser, Debug)]
#[command(name = "rbnoise", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory; overrides the configuration (default results/<experiment>).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the Monte-Carlo trials (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Raise trial counts tenfold.
    #[arg(long)]
    paper_scale: bool,
    /// Suite to run; overrides the configuration.
    #[arg(long, value_name = "NAME")]
    experiment: Option<String>,
    /// Check the configuration and exit without running.
    #[arg(long)]
    validate_only: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the suites with their figure mapping.
    ListExperiments,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 1;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(Command::ListExperiments) = cli.command {
        // a closed pipe (e.g. `| head`) is not an error
        let _ = write!(std::io::stdout(), "{}", Experiment::table());
        return ExitCode::SUCCESS;
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn print_diagnostics(source: &str, d: &[Diagnostic]) {
    for x in d {
        eprintln!("{source}: {x}");
    }
}

/// Loads the configuration and applies the command-line overrides.
fn load(cli: &Cli) -> Result<(ExperimentConfig, String), u8> {
    let experiment = match cli.experiment.as_deref().map(str::parse::<Experiment>) {
        Some(Ok(e)) => Some(e),
        Some(Err(msg)) => {
            eprintln!("error: {msg}");
            return Err(EXIT_CONFIG);
        }
        None => None,
    };
    let (mut config, text, source) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                eprintln!("error: cannot read {}: {e}", path.display());
                EXIT_CONFIG
            })?;
            let source = path.display().to_string();
            let config = ExperimentConfig::from_toml(&text).map_err(|d| {
                print_diagnostics(&source, &d);
                EXIT_CONFIG
            })?;
            (config, text, source)
        }
        None => match experiment {
            Some(e) => (ExperimentConfig::new(e), String::new(), "command line".to_string()),
            None => {
                eprintln!("error: give --config PATH or --experiment NAME (see `rbnoise list-experiments`)");
                return Err(EXIT_CONFIG);
            }
        },
    };
    if let Some(e) = experiment {
        config.experiment = e;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(o) = &cli.out {
        config.out = Some(o.clone());
    }
    config.paper_scale |= cli.paper_scale;
    let d = config.diagnostics_in(&text);
    print_diagnostics(&source, &d);
    if has_errors(&d) {
        return Err(EXIT_CONFIG);
    }
    let warnings = d.iter().filter(|x| x.severity == Severity::Warning).count();
    let status = format!("{source}: {} ok ({warnings} warnings)", config.experiment.name());
    Ok((config, status))
}

fn execute(cli: &Cli) -> Result<(), u8> {
    let (config, status) = load(cli)?;
    if cli.validate_only {
        let _ = writeln!(std::io::stdout(), "{status}");
        return Ok(());
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return Err(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    let result = run(&config).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            Error::Config(_) | Error::Parse(_) => EXIT_CONFIG,
            Error::Io(_) => EXIT_IO,
            _ => EXIT_NUMERIC,
        }
    })?;
    let dir = config.out.clone().unwrap_or_else(|| Path::new("results").join(config.experiment.name()));
    let manifest = RunManifest::new(&config, &result.outputs);
    let write = || -> rbnoise::Result<()> {
        result.outputs.write_to(&dir)?;
        std::fs::write(dir.join(MANIFEST_FILE), manifest.to_json()?)?;
        Ok(())
    };
    if let Err(e) = write() {
        eprintln!("error: writing {}: {e}", dir.display());
        return Err(EXIT_IO);
    }
    let mut stdout = std::io::stdout();
    let _ = write!(stdout, "{}", result.summary);
    let _ = writeln!(stdout, "wrote {} files and {MANIFEST_FILE} to {}", manifest.checksums.len(), dir.display());
    Ok(())
}
