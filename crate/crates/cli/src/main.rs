use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multipolar_cli::{cmd_pathlen, cmd_regress, cmd_shuffle, cmd_simulate, cmd_synth, CliError, RunConfig};

/// Multipolar opinion dynamics on small-world graphs.
#[derive(Parser, Debug)]
#[command(name = "multipolar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the clustered-bias pipeline and write the regional report
    Simulate(Common),
    /// Compare clustered biases against the same labels shuffled over the graph
    Shuffle(Common),
    /// Fit the least-squares baseline on a seeded train/evaluation split
    Regress {
        #[command(flatten)]
        common: Common,
        /// number of training points
        #[arg(long)]
        train_size: Option<usize>,
    },
    /// Measure the average path length of the configured graph
    Pathlen {
        #[command(flatten)]
        common: Common,
        /// number of BFS sources
        #[arg(long)]
        sources: Option<usize>,
    },
    /// Write a synthetic region table
    Synth(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// flat key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// worker threads (output does not depend on it)
    #[arg(long)]
    threads: Option<usize>,
    /// output directory
    #[arg(long)]
    output: Option<PathBuf>,
    /// write the opinion state every N iterations
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// use the synthetic region generator instead of a regions file
    #[arg(long)]
    synthetic: bool,
    /// region CSV
    #[arg(long)]
    regions: Option<PathBuf>,
    /// override any configuration key, e.g. --set n_agents=10000
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k, v)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
        if let Some(o) = &self.output {
            cfg.output_dir = o.clone();
        }
        if let Some(n) = self.snapshot_every {
            cfg.snapshot_every = Some(n);
        }
        if self.synthetic {
            cfg.synthetic = true;
        }
        if let Some(r) = &self.regions {
            cfg.regions_path = Some(r.clone());
        }
        Ok(cfg)
    }
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    let metrics = match cli.command {
        Command::Simulate(c) => cmd_simulate(&c.resolve()?)?,
        Command::Shuffle(c) => cmd_shuffle(&c.resolve()?)?,
        Command::Regress { common, train_size } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = train_size {
                cfg.train_size = n;
            }
            cmd_regress(&cfg)?
        }
        Command::Pathlen { common, sources } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = sources {
                cfg.n_sources = n;
            }
            cmd_pathlen(&cfg)?
        }
        Command::Synth(c) => cmd_synth(&c.resolve()?)?,
    };
    Ok(metrics.to_text())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
