use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use paramstate::cli::{cmd_analyze, cmd_collect, cmd_simulate, cmd_synthesize, ConfigOverrides, PipelineConfig};

#[derive(Parser)]
#[command(name = "paramstate", version, about = "Data-driven stabilization with the parameterizer as state")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Transfer-matrix JSON (default: built-in 2x2 benchmark).
    #[arg(long, global = true)]
    plant: Option<PathBuf>,
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[arg(long, global = true)]
    controller: Option<PathBuf>,
    /// Window lag L.
    #[arg(short = 'L', global = true)]
    lag: Option<usize>,
    /// Data length T.
    #[arg(short = 'T', global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    amplitude: Option<f64>,
    /// Relative rank tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the plant open loop and write trajectory data.
    Collect,
    /// Rank, spectrum and stabilizability of the data's behavior.
    Analyze,
    /// Build a stabilizing controller from data.
    Synthesize,
    /// Run the stored controller against the plant.
    Simulate,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = ConfigOverrides {
        plant_file: args.plant,
        data_file: args.data,
        controller_file: args.controller,
        lag: args.lag,
        samples: args.samples,
        seed: args.seed,
        amplitude: args.amplitude,
        tol_rel: args.tol,
        eps: args.eps,
        horizon: args.horizon,
        output_dir: args.out,
    };
    let result = PipelineConfig::load(args.config.as_deref(), &overrides).and_then(|cfg| {
        let out = match args.command {
            Command::Collect => cmd_collect(&cfg),
            Command::Analyze => cmd_analyze(&cfg),
            Command::Synthesize => cmd_synthesize(&cfg),
            Command::Simulate => cmd_simulate(&cfg),
        }?;
        out.commit()?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("{w}");
            }
            for line in &out.report {
                println!("{line}");
            }
            for (path, _) in &out.files {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
