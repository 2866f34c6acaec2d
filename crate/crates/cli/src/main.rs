use std::path::PathBuf;
use std::process::ExitCode;

use bridgesmc::config::{preset, RawConfig};
use bridgesmc::experiment::{run_experiment, tune_blocking};
use bridgesmc::plot::emit_plots;
use bridgesmc::selftest::run_selftest;
use bridgesmc::{io, CliError, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bridgesmc", version, about = "Conditional particle filter experiments with bridge backward sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the chains of a configuration and write traces and diagnostics.
    Run(ConfigArgs),
    /// Choose blocking sequences only and write chosen_blocking.csv.
    Tune {
        #[command(flatten)]
        config: ConfigArgs,
        /// Particles per tuning filter run (N0).
        #[arg(long)]
        pool: Option<usize>,
        /// Number of tuning filter runs (n).
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Draw SVG charts from the CSV files in a result directory.
    Plot { dir: PathBuf },
    /// Quick checks of the resampling schemes and models.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print a preset configuration.
    Preset { name: String },
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file.
    #[arg(long, short, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration: ctcrwp, cprbm or ctcrwt.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    particles: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    /// multinomial, killing or systematic_mp (comma-separated to sweep).
    #[arg(long)]
    resampling: Option<String>,
    /// at, bs or bbs.
    #[arg(long)]
    kernel: Option<String>,
    /// dense, blocktime(x) or auto(N0, n).
    #[arg(long)]
    blocking: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    #[arg(long)]
    output: Option<String>,
    /// Any `section.key=value` override.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RawConfig> {
        let mut raw = match (&self.config, &self.preset) {
            (Some(path), _) => RawConfig::parse(&io::read_to_string(path)?)?,
            (None, Some(name)) => RawConfig::parse(
                preset(name).ok_or_else(|| CliError::config("--preset", format!("unknown preset `{name}`")))?,
            )?,
            (None, None) => RawConfig::default(),
        };
        let flags = [
            ("model", &self.model),
            ("particles", &self.particles),
            ("iterations", &self.iterations),
            ("burn_in", &self.burn_in),
            ("resampling", &self.resampling),
            ("kernel", &self.kernel),
            ("blocking", &self.blocking),
            ("seed", &self.seed),
            ("replicates", &self.replicates),
            ("output", &self.output),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(&format!("experiment.{key}={v}"))?;
            }
        }
        for s in &self.set {
            raw.set(s)?;
        }
        Ok(raw)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let (dir, outputs) = run_experiment(&args.load()?)?;
            println!("{} runs written to {}", outputs.len(), dir.display());
        }
        Command::Tune { config, pool, runs } => {
            let (dir, tuned) = tune_blocking(&config.load()?, pool, runs)?;
            for t in &tuned {
                println!("{:?}", t.blocking.boundaries());
            }
            println!("chosen blockings written to {}", dir.join("chosen_blocking.csv").display());
        }
        Command::Plot { dir } => {
            for path in emit_plots(&dir)? {
                println!("{}", path.display());
            }
        }
        Command::Selftest { seed } => {
            let checks = run_selftest(seed)?;
            let mut failed = Vec::new();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                if !c.passed {
                    failed.push(c.name);
                }
            }
            if !failed.is_empty() {
                return Err(CliError::SelfTest(failed.join(", ")));
            }
        }
        Command::Preset { name } => {
            print!("{}", preset(&name).ok_or_else(|| CliError::config("preset", format!("unknown preset `{name}`")))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
