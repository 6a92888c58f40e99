use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qlbe::{parse_config, run, Kind, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "qlbe", version, about = "Quantum linear Boltzmann equation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relaxation of a momentum eigenstate ensemble to equilibrium.
    Thermalize(Common),
    /// Moment relaxation compared with the diffusive solutions.
    RelaxMoments(Common),
    /// Decay of coherence between two momentum eigenstates.
    DecohereMomentum(Common),
    /// Position coherence decay and the decoherence function.
    DecoherePosition(Common),
    /// Interferometer visibility against gas pressure.
    Visibility(Common),
    /// Thermal forward amplitudes and the index of refraction.
    Refraction(Common),
    /// Dynamic structure factors and detailed balance.
    StructureFactor(Common),
    /// Frictionless Brownian-limit solution and its coefficients.
    BrownianCheck(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (Kind, Common) {
        match self {
            Command::Thermalize(c) => (Kind::Thermalize, c),
            Command::RelaxMoments(c) => (Kind::RelaxMoments, c),
            Command::DecohereMomentum(c) => (Kind::DecohereMomentum, c),
            Command::DecoherePosition(c) => (Kind::DecoherePosition, c),
            Command::Visibility(c) => (Kind::Visibility, c),
            Command::Refraction(c) => (Kind::Refraction, c),
            Command::StructureFactor(c) => (Kind::StructureFactor, c),
            Command::BrownianCheck(c) => (Kind::BrownianCheck, c),
        }
    }
}

fn execute(kind: Kind, args: Common) -> Result<String, RunError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| RunError::Io {
        path: args.config.display().to_string(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    if config.kind != kind {
        return Err(RunError::Config(vec![format!(
            "configuration is for experiment {}, but subcommand {} was given",
            config.kind.name(),
            kind.name()
        )]));
    }
    if let Some(seed) = args.seed {
        config = config.with_seed(seed);
    }
    let opts = RunOptions {
        threads: args.threads,
        out_dir: args.out,
    };
    let artifacts = run(&config, &opts)?;
    Ok(artifacts.csv_path.display().to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match execute(kind, args) {
        Ok(path) => {
            println!("{path}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = e.record();
            eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
            ExitCode::from(2)
        }
    }
}
