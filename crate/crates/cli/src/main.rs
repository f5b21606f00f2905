use clap::{Parser, Subcommand};
use rhobench::pipeline::{self, PipelineError, TrainConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rhobench", version, about = "Learned charge-density initialization benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the split suite, atomic tables and ground-truth SCF runs.
    Gen {
        #[arg(long, default_value_t = 8)]
        pool: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the density predictor on the training splits.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 6.0)]
        rcut: f64,
        #[arg(long, default_value_t = 24)]
        nradial: usize,
        #[arg(long, default_value_t = 1e-6)]
        lambda: f64,
        #[arg(long, default_value_t = 4096)]
        nper: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Predict a solver-ready density (RHR1) for one structure file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 32.0)]
        ecutrho: f64,
    },
    /// Run ACS-vs-learned SCF on every held-out structure.
    Bench {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check energy bias, gaps and file round trips of a benchmark run.
    Validate {
        #[arg(long)]
        run: PathBuf,
        /// Data directory; enables the density round-trip restart checks.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Project a density file along its third axis to CSV and PNG.
    Project {
        #[arg(long)]
        density: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Gen { pool, seed, out } => {
            let m = pipeline::gen(&out, pool, seed, &pipeline::pipeline_params())?;
            let converged = m.structures.iter().filter(|s| s.converged).count();
            println!("gen ok structures={} converged={converged} out={}", m.structures.len(), out.display());
        }
        Command::Train {
            data,
            out,
            rcut,
            nradial,
            lambda,
            nper,
            seed,
        } => {
            let cfg = TrainConfig {
                r_cut: rcut,
                n_radial: nradial,
                ridge_lambda: lambda,
                n_per_structure: nper,
                seed,
            };
            let m = pipeline::train(&data, &out, &cfg)?;
            println!("train ok train_mae={:.6e} weights={} out={}", m.train_mae, m.weights.len(), out.display());
        }
        Command::Predict {
            model,
            structure,
            out,
            ecutrho,
        } => {
            pipeline::predict(&model, &structure, &out, ecutrho)?;
            println!("predict ok out={}", out.display());
        }
        Command::Bench { data, model, out } => {
            let r = pipeline::bench(&data, &model, &out)?;
            for s in &r.summaries {
                println!(
                    "bench split={} n={} n_plus={} pct_positive={:.1} mean_s_auc={:.4} mean_savings_pct={:.2}",
                    s.s_auc.split, s.s_auc.n, s.s_auc.n_plus, s.s_auc.pct_positive, s.s_auc.mean, s.savings.mean
                );
            }
            println!("bench ok pairs={} excluded={} out={}", r.pairs.len(), r.excluded.len(), out.display());
        }
        Command::Validate { run, data } => {
            let r = pipeline::validate(&run, data.as_deref())?;
            println!(
                "validate energy_max_rel={:.3e} gap_max={:.3e} traces_round_trip={} round_trips={}",
                r.energy_max_rel_diff,
                r.gap_max_diff,
                r.traces_round_trip,
                r.round_trips.len()
            );
            if !r.passed {
                return Err(PipelineError::Failed {
                    stage: "validate",
                    message: "one or more checks failed, see validation.json".into(),
                });
            }
            println!("validate ok");
        }
        Command::Project { density, out } => {
            let (csv, png) = pipeline::project(&density, &out)?;
            println!("project ok csv={} png={}", csv.display(), png.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = if e.is_usage() { "usage" } else { "pipeline" };
            eprintln!("error kind={kind} message={:?}", e.to_string());
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
