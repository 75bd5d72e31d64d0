use std::time::Instant;

use hyperlab_core::lorentz::{set_tolerance, tolerance};
use hyperlab_core::Tolerance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::report::{Report, TrialRecord};

pub mod compactification;
pub mod decompositions;
pub mod dense;
pub mod no_dense;
pub mod steinhaus;
pub mod weak;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    NoDenseConjugacy,
    DenseConjugacy,
    Steinhaus,
    Compactification,
    Decompositions,
    WeakContinuity,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::NoDenseConjugacy,
        Experiment::DenseConjugacy,
        Experiment::Steinhaus,
        Experiment::Compactification,
        Experiment::Decompositions,
        Experiment::WeakContinuity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::NoDenseConjugacy => "no-dense-conjugacy",
            Experiment::DenseConjugacy => "dense-conjugacy",
            Experiment::Steinhaus => "steinhaus",
            Experiment::Compactification => "compactification",
            Experiment::Decompositions => "decompositions",
            Experiment::WeakContinuity => "weak-continuity",
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Report {
        if let Some(t) = &cfg.tolerances {
            let current = tolerance();
            set_tolerance(Tolerance {
                abs: t.abs.unwrap_or(current.abs),
                rel: t.rel.unwrap_or(current.rel),
            });
        }
        let start = Instant::now();
        let trials = match self {
            Experiment::NoDenseConjugacy => no_dense::run(cfg),
            Experiment::DenseConjugacy => dense::run(cfg),
            Experiment::Steinhaus => steinhaus::run(cfg),
            Experiment::Compactification => compactification::run(cfg),
            Experiment::Decompositions => decompositions::run(cfg),
            Experiment::WeakContinuity => weak::run(cfg),
        };
        let wall_ms = start.elapsed().as_millis() as u64;
        Report::new(self.name(), cfg.digest(), trials, wall_ms)
    }
}

/// Generator owned by one trial: stream `trial` of the configured seed.
pub fn trial_rng(seed: u64, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Runs trials in parallel, each with its own generator, collected in index order.
pub(crate) fn run_trials<F>(cfg: &ExperimentConfig, trial: F) -> Vec<TrialRecord>
where
    F: Fn(u32, &mut ChaCha8Rng) -> TrialRecord + Sync,
{
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| trial(i, &mut trial_rng(cfg.seed, i)))
        .collect()
}
