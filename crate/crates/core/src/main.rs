use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stereotrust::config;
use stereotrust::error::Error;
use stereotrust::eval::{self, ExperimentConfig, ExperimentReport, ModelKind};
use stereotrust::world::{IngestConfig, World};

#[derive(Parser)]
#[command(name = "stereotrust", version, about = "Stereotype-based trust experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "STEREOTRUST_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated model names.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    top_k_features: Option<usize>,
    #[arg(long)]
    sson_k: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the world of the first repetition and write its dump.
    Generate(Common),
    /// Compare every configured model against ground truth.
    Run(Common),
    /// Inexperienced trustors with and without shared stereotypes.
    Sson(Common),
    /// Eager, U-A and U-B(tau) model maintenance.
    UpdateStrategies(Common),
    /// Convert a JSONL rating dataset into a world dump.
    Ingest {
        input: PathBuf,
        #[arg(long, default_value = "out/world.jsonl")]
        out: PathBuf,
        /// Ratings a review needs before it counts towards ground truth.
        #[arg(long)]
        min_ratings: Option<usize>,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            config::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(models) = &common.models {
        cfg.models = models
            .iter()
            .map(|m| m.parse::<ModelKind>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(tau) = common.tau {
        cfg.update.tau = tau;
    }
    if let Some(k) = common.top_k_features {
        cfg.top_k_features = k;
    }
    if let Some(k) = common.sson_k {
        cfg.sson.k = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish(report: ExperimentReport, out: &Path) -> Result<(), Error> {
    let files = report.write(out)?;
    print!("{}", report.render_table());
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate(common) => {
            let cfg = load_config(&common)?;
            let world = World::generate(&cfg.world_for(0))?;
            fs::create_dir_all(&common.out)?;
            let path = common.out.join(format!("world_seed{}.jsonl", cfg.seed));
            let mut w = BufWriter::new(File::create(&path)?);
            world.dump(&mut w)?;
            w.flush()?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Run(common) => {
            let cfg = load_config(&common)?;
            finish(eval::run_experiment(&cfg, common.jobs)?, &common.out)
        }
        Command::Sson(common) => {
            let cfg = load_config(&common)?;
            finish(eval::sson::run_sson_experiment(&cfg, common.jobs)?, &common.out)
        }
        Command::UpdateStrategies(common) => {
            let cfg = load_config(&common)?;
            finish(
                eval::update::run_update_strategy_comparison(&cfg, common.jobs)?,
                &common.out,
            )
        }
        Command::Ingest {
            input,
            out,
            min_ratings,
        } => {
            let mut ingest = IngestConfig::default();
            if let Some(m) = min_ratings {
                ingest.min_ratings = m;
            }
            let world = World::ingest(BufReader::new(File::open(&input)?), &ingest)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let mut w = BufWriter::new(File::create(&out)?);
            world.dump(&mut w)?;
            w.flush()?;
            eprintln!(
                "ingested {} agents, {} reviews, {} ratings into {}",
                world.n_agents(),
                world.reviews.len(),
                world.ratings.len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
