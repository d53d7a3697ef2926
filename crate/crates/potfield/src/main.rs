use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use potfield::commands::{self, *};
use potfield::{Error, Result, RunConfig};

#[derive(Parser)]
#[command(
    name = "potfield",
    version,
    about = "Potential-field trajectory prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and summarize trajectories; optionally normalize or create a split file.
    Ingest(Common),
    /// Label every sample and write its potential field.
    Label(Common),
    /// Fit an estimator bundle.
    Fit(Common),
    /// Predict future trajectories.
    Predict(Common),
    /// Run the evaluation protocol.
    Eval(Common),
    /// Render a field file to PNG.
    Render(Common),
}

type Handler = fn(&RunConfig) -> Result<String>;

fn run(cli: Cli) -> Result<String> {
    let (common, required, f): (&Common, &[&str], Handler) = match &cli.command {
        Command::Ingest(c) => (c, REQUIRED_INGEST, commands::cmd_ingest),
        Command::Label(c) => (c, REQUIRED_LABEL, commands::cmd_label),
        Command::Fit(c) => (c, REQUIRED_FIT, commands::cmd_fit),
        Command::Predict(c) => (c, REQUIRED_PREDICT, commands::cmd_predict),
        Command::Eval(c) => (c, REQUIRED_EVAL, commands::cmd_eval),
        Command::Render(c) => (c, REQUIRED_RENDER, commands::cmd_render),
    };
    let cfg = RunConfig::load(common.config.as_deref(), &common.set, required)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.jobs {
        if n == 0 {
            return Err(Error::Config(vec!["--jobs must be >= 1".into()]));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Internal(e.to_string()))?;
    pool.install(|| f(&cfg))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
