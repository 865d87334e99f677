use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use opatomo::experiment::ExperimentConfig;
use opatomo::workflow;

/// Wigner-function tomography through phase-sensitive amplification.
#[derive(Debug, Parser)]
#[command(name = "opatomo", version, about)]
struct Cli {
    /// Output directory (created if absent).
    #[arg(long, global = true, env = "OPATOMO_OUT", default_value = "out")]
    out: PathBuf,
    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// More log output (repeat for debug).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration; the built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Override `run.shots_per_phase`.
    #[arg(long)]
    shots: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the measurement and write shot records.
    Simulate(RunArgs),
    /// Reconstruct the Wigner function from a shot file.
    Reconstruct {
        /// Shot file; defaults to `shots.csv` in the output directory.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Compute figures of merit from a shot file.
    Analyze {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also report bootstrap intervals from this many resamples.
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// simulate, reconstruct and analyze in one go.
    Pipeline {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Render Wigner grids, sinograms or tables as SVG.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Amplification of a squeezed single photon, step by step.
    #[command(name = "demo-fig1")]
    DemoFig1,
}

/// Errors caused by the invocation rather than by the computation.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn load_config(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::reference(),
    };
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(shots) = args.shots {
        cfg.run.shots_per_phase = shots;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn say(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        println!("{}", msg.as_ref());
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let out = &cli.out;
    let shots_default = || out.join(workflow::SHOTS_FILE);
    match &cli.command {
        Command::Simulate(args) => {
            let cfg = load_config(args)?;
            let set = workflow::simulate(&cfg, out)?;
            say(
                cli.quiet,
                format!("wrote {} records to {}", set.record_count(), shots_default().display()),
            );
        }
        Command::Reconstruct { input } => {
            let input = input.clone().unwrap_or_else(shots_default);
            require(&input)?;
            let (_, rec) = workflow::reconstruct_file(&input, out)?;
            say(
                cli.quiet,
                format!(
                    "reconstructed {}x{} grid into {}",
                    rec.wigner.nx(),
                    rec.wigner.np(),
                    out.display()
                ),
            );
        }
        Command::Analyze { input, bootstrap } => {
            let input = input.clone().unwrap_or_else(shots_default);
            require(&input)?;
            let report = workflow::analyze_file(&input, out, *bootstrap)?;
            say(cli.quiet, report.metrics.to_report().trim_end());
        }
        Command::Pipeline { run, bootstrap } => {
            let cfg = load_config(run)?;
            let report = workflow::pipeline(&cfg, out, *bootstrap)?;
            say(cli.quiet, report.metrics.to_report().trim_end());
        }
        Command::Plot { inputs } => {
            for input in inputs {
                require(input)?;
                let path = workflow::plot_file(input, Some(out))?;
                say(cli.quiet, format!("wrote {}", path.display()));
            }
        }
        Command::DemoFig1 => {
            let fig = workflow::demo_fig1(out)?;
            say(
                cli.quiet,
                format!(
                    "recovered variance {:.5} vs marginal {:.5}; outputs in {}",
                    fig.recovered_variance,
                    fig.marginal_variance,
                    out.display()
                ),
            );
        }
    }
    Ok(())
}

fn require(path: &Path) -> anyhow::Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(UsageError(format!("no such file: {}", path.display())).into())
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<opatomo::Error>() {
        Some(e) if e.is_usage() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("cannot create {}", cli.out.display()))
        .and_then(|_| run(&cli))
    {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
