use clap::{Parser, Subcommand};
use olpinn::deeponet::PretrainConfig;
use olpinn::error::Error;
use olpinn::harness::{
    self, save_checkpoint, CheckpointPayload, ExperimentConfig, PretrainCommandConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "olpinn", about = "Operator-learning enhanced PINN experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pretrain a DeepONet on a benchmark's smooth problem family and save
    /// the checkpoint.
    Pretrain {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one experiment (train per seed, evaluate on the test grid, write
    /// reports).
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed list, e.g. --seed-list 0,1,2
        #[arg(long, value_delimiter = ',')]
        seed_list: Option<Vec<u64>>,
        /// Drop the boundary-condition loss (ill-posed mode).
        #[arg(long)]
        no_bc: bool,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the reference oracle on the benchmark's test grid.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute and print the summary of a written report directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Contract(_) => 2,
        Error::Diverged { .. } => 3,
        Error::Io(_) | Error::Checkpoint(_) => 4,
        _ => 1,
    }
}

fn run() -> olpinn::Result<()> {
    match Cli::parse().command {
        Command::Pretrain { config } => {
            let cfg = PretrainCommandConfig::from_file(&config)?;
            let mut pc = PretrainConfig { seed: cfg.seed, ..PretrainConfig::default() };
            if let Some(e) = cfg.epochs {
                pc.epochs = e;
            }
            if let Some(lr) = cfg.learning_rate {
                pc.learning_rate = lr;
            }
            eprintln!(
                "pretraining operator model for benchmark {} ({} epochs max)",
                cfg.benchmark.name(),
                pc.epochs
            );
            let (model, history) =
                harness::run_pretrain(cfg.benchmark, &pc, cfg.export_dataset.as_deref())?;
            save_checkpoint(&CheckpointPayload::DeepONet(model), &cfg.checkpoint)?;
            println!(
                "pretrained in {} epochs, final mse {:.3e}, checkpoint: {}",
                history.len(),
                history.last().copied().unwrap_or(f64::NAN),
                cfg.checkpoint.display()
            );
            Ok(())
        }
        Command::Run { config, seed_list, no_bc, out } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(seeds) = seed_list {
                if seeds.is_empty() {
                    return Err(Error::Config("--seed-list must not be empty".into()));
                }
                cfg.seeds = seeds;
            }
            if no_bc {
                cfg.include_bc = false;
            }
            if let Some(dir) = out {
                cfg.out_dir = Some(dir);
            }
            let report = harness::run_experiment(&cfg)?;
            if let Some((m, s)) = report.pinn_stats {
                println!("u_pinn rel L2: {m:.2}% +- {s:.2}%");
            }
            if let Some((m, s)) = report.op_stats {
                println!("u_op rel L2: {m:.2}% +- {s:.2}%");
            }
            for seed in &report.seeds {
                if let Some(reason) = &seed.diverged {
                    eprintln!("seed {}: {reason}", seed.seed);
                }
            }
            if let Some(dir) = &cfg.out_dir {
                println!("reports written to {}", dir.display());
            }
            Ok(())
        }
        Command::Oracle { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let (grid, values) = harness::test_reference(&cfg)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("oracle_{}.csv", cfg.benchmark.name()));
            let mut body = String::new();
            for (row, v) in grid.rows().into_iter().zip(&values) {
                let coords: Vec<String> = row.iter().map(|c| format!("{c:.17e}")).collect();
                body.push_str(&coords.join(","));
                body.push(',');
                body.push_str(&format!("{v:.17e}\n"));
            }
            std::fs::write(&path, body)?;
            println!("oracle values written to {}", path.display());
            Ok(())
        }
        Command::Report { dir } => {
            let path = dir.join("report.csv");
            let text = std::fs::read_to_string(&path)?;
            let mut pinn = Vec::new();
            let mut op = Vec::new();
            for line in text.lines().skip(1) {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() < 7 {
                    continue;
                }
                if let Ok(v) = cols[6].parse::<f64>() {
                    match cols[4] {
                        "u_pinn" => pinn.push(v),
                        "u_op" => op.push(v),
                        _ => {}
                    }
                }
            }
            for (name, vals) in [("u_pinn", pinn), ("u_op", op)] {
                if !vals.is_empty() {
                    let (m, s) = harness::mean_std(&vals);
                    println!("{name}: {m:.2}% +- {s:.2}% over {} seeds", vals.len());
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
