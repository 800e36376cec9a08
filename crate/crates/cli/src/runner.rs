//! Parallel experiment execution.

use rayon::prelude::*;
use trustvote_core::simulation::{aggregate, Experiment, ExperimentConfig, ExperimentResult};
use trustvote_core::{Error, TrustNetwork};

/// Runs every trial on the rayon pool. Outcomes are collected in trial order
/// before reduction, so the result is bit-identical to
/// [`Experiment::run`] for the same configuration.
pub fn run_parallel(experiment: &Experiment) -> Result<ExperimentResult, Error> {
    let config = experiment.config();
    let mut rows = Vec::new();
    for size in config.sorted_sizes() {
        let outcomes = (0..config.trials)
            .into_par_iter()
            .map(|t| experiment.run_trial(size, t))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(aggregate(size, &outcomes));
    }
    Ok(ExperimentResult { config: config.clone(), rows })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, Error> {
    run_parallel(&Experiment::new(config.clone())?)
}

pub fn run_on_network(config: &ExperimentConfig, network: TrustNetwork) -> Result<ExperimentResult, Error> {
    run_parallel(&Experiment::with_network(config.clone(), network)?)
}
