use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rmabm::commands::{self, Context};
use rmabm::{run, RunConfig};

#[derive(Parser)]
#[command(name = "rmabm", version, about = "Macro agent-based economy with Q-learning firms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the RL firms and save their tables.
    Train(Common),
    /// Run greedy test episodes with trained tables.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Policy file; defaults to the cell's own `policy/policy.bin`.
        policy: Option<PathBuf>,
    },
    /// Train and evaluate every cell of the `[sweep]` grid.
    Sweep(Common),
    /// Impulse response to a demand shock.
    Irf {
        #[command(flatten)]
        common: Common,
        /// Policy file; defaults to the cell's own `policy/policy.bin`.
        policy: Option<PathBuf>,
        /// Relative increase of both consumption propensities.
        #[arg(long)]
        shock_size: Option<f64>,
        /// Number of shocked steps.
        #[arg(long)]
        shock_duration: Option<u64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "configs/default.toml")]
    config: PathBuf,
    /// Override a config key, e.g. `--set N=5` or `--set model.wage=1.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Base seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output root.
    #[arg(long, env = "RMABM_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, rmabm::Error> {
        let mut overrides = self.set.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("base_seed={seed}"));
        }
        RunConfig::load(&self.config, &overrides)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Train(c) | Command::Sweep(c) => c,
        Command::Evaluate { common, .. } | Command::Irf { common, .. } => common,
    };
    let result = (|| -> Result<Vec<PathBuf>, rmabm::Error> {
        let mut cfg = common.load()?;
        let pool = run::pool(common.jobs)?;
        let ctx = Context {
            out_root: common.out.clone(),
            jobs: pool.current_num_threads(),
            argv: std::env::args().collect(),
        };
        pool.install(|| {
            let manifests = match &cli.command {
                Command::Train(_) => vec![commands::train(&ctx, &cfg)?],
                Command::Evaluate { policy, .. } => vec![commands::evaluate(&ctx, &cfg, policy.as_deref())?],
                Command::Sweep(_) => commands::sweep(&ctx, &cfg)?,
                Command::Irf { policy, shock_size, shock_duration, .. } => {
                    if let Some(s) = shock_size {
                        cfg.irf.shock_size = *s;
                    }
                    if let Some(d) = shock_duration {
                        cfg.irf.shock_duration = *d;
                    }
                    vec![commands::irf(&ctx, &cfg, policy.as_deref())?]
                }
            };
            Ok(manifests.into_iter().map(|m| m.output_dir.join(format!("manifest/{}.json", m.command))).collect())
        })
    })();
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
