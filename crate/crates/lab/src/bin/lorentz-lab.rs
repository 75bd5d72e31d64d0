use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use lorentz_lab::{Experiment, ExperimentConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    NoDenseConjugacy,
    DenseConjugacy,
    Steinhaus,
    Compactification,
    Decompositions,
    WeakContinuity,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::NoDenseConjugacy => Experiment::NoDenseConjugacy,
            Command::DenseConjugacy => Experiment::DenseConjugacy,
            Command::Steinhaus => Experiment::Steinhaus,
            Command::Compactification => Experiment::Compactification,
            Command::Decompositions => Experiment::Decompositions,
            Command::WeakContinuity => Experiment::WeakContinuity,
        }
    }
}

/// Run an experiment and print its JSON report.
#[derive(Debug, Parser)]
#[command(name = "lorentz-lab", version)]
struct Cli {
    #[arg(value_enum)]
    experiment: Command,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Also write one CSV row per trial here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match ExperimentConfig::load(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("lorentz-lab: {e}");
            return ExitCode::from(2);
        }
    };
    let report = Experiment::from(cli.experiment).run(&cfg);
    println!("{}", report.to_json());
    if let Some(path) = &cli.csv {
        let written = File::create(path)
            .map_err(csv::Error::from)
            .and_then(|f| report.write_csv(BufWriter::new(f)));
        if let Err(e) = written {
            eprintln!("lorentz-lab: cannot write {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    if report.aggregate.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
