//! Monte Carlo comparison of unweighted and trust-weighted group decisions
//! as the number of representatives varies.
//!
//! Every trial draws its randomness from its own ChaCha8 stream keyed by
//! `(master_seed, active_size, trial_index)`, and statistics are reduced
//! over outcomes in trial-index order. A result therefore depends only on
//! the configuration, never on which trials ran first or on which thread.
//! This module runs trials sequentially; the `trustvote` crate fans the same
//! trials out over a thread pool.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decision;
use crate::delegation::{self, PropagationConfig, StrandedPolicy};
use crate::network::{self, ActiveSet, TrustNetwork};
use crate::Error;

const STREAM_TRIAL: u64 = 0;
const STREAM_FIXED_NETWORK: u64 = 1;

/// Which delegation route computes the weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    Iterative,
    /// Default for experiments: near-zero trust on the only exit from a
    /// group of nodes can stretch the iterative route to millions of sweeps.
    #[default]
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub active_sizes: Vec<usize>,
    pub master_seed: u64,
    pub propagation: PropagationConfig,
    pub solver: Solver,
    /// Draw a new network for every trial, or reuse one network drawn from
    /// the master seed.
    pub fresh_network_per_trial: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 100,
            k: 3,
            trials: 10_000,
            active_sizes: alloc::vec![1, 2, 5, 10, 20, 50, 100],
            master_seed: 0,
            propagation: PropagationConfig {
                stranded_policy: StrandedPolicy::UniformToActive,
                ..PropagationConfig::default()
            },
            solver: Solver::Exact,
            fresh_network_per_trial: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("population must be at least 2, got {}", self.n)));
        }
        if self.k == 0 || self.k > self.n - 1 {
            return Err(Error::InvalidConfig(format!("out-degree {} must be within 1..={}", self.k, self.n - 1)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.active_sizes.is_empty() {
            return Err(Error::InvalidConfig("no active sizes requested".into()));
        }
        if let Some(&bad) = self.active_sizes.iter().find(|&&a| a == 0 || a > self.n) {
            return Err(Error::InvalidConfig(format!("active size {bad} must be within 1..={}", self.n)));
        }
        self.propagation.validate()
    }

    /// Requested sizes, ascending and without repeats.
    pub fn sorted_sizes(&self) -> Vec<usize> {
        let mut sizes = self.active_sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub err_traditional: f64,
    pub err_weighted: f64,
    /// Some trust could not reach an active node and was redistributed.
    pub stranded: bool,
}

/// Aggregate over all trials of one active-set size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeStats {
    pub active_size: usize,
    pub trials: usize,
    pub mean_err_traditional: f64,
    pub stderr_traditional: f64,
    pub mean_err_weighted: f64,
    pub stderr_weighted: f64,
    pub stranded_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// One row per requested size, ascending.
    pub rows: Vec<SizeStats>,
}

/// Random stream for one trial.
pub fn trial_rng(master_seed: u64, active_size: usize, trial_index: usize) -> ChaCha8Rng {
    stream(master_seed, active_size as u64, trial_index as u64, STREAM_TRIAL)
}

fn stream(seed: u64, a: u64, b: u64, tag: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([seed, a, b, tag]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Errors of both methods for one network and active set.
pub fn evaluate_trial(
    network: &TrustNetwork,
    active: &ActiveSet,
    propagation: &PropagationConfig,
    solver: Solver,
) -> Result<TrialOutcome, Error> {
    let weights = match solver {
        Solver::Iterative => delegation::compute_weights_iterative(network, active, propagation)?,
        Solver::Exact => delegation::compute_weights_exact(network, active, propagation.stranded_policy)?,
    };
    let report = decision::evaluate(network, active, Some(&weights))?;
    Ok(TrialOutcome {
        err_traditional: report.error_traditional,
        err_weighted: report.error_weighted.unwrap_or_default(),
        stranded: weights.stranded_mass > 0.0,
    })
}

/// A validated experiment, holding the shared network in fixed-network mode.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    fixed: Option<TrustNetwork>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, Error> {
        config.validate()?;
        let fixed = if config.fresh_network_per_trial {
            None
        } else {
            let mut rng = stream(config.master_seed, 0, 0, STREAM_FIXED_NETWORK);
            Some(network::generate_network(config.n, config.k, &mut rng)?)
        };
        Ok(Experiment { config, fixed })
    }

    /// Runs every trial on `network` instead of generated ones. `n` must
    /// match the network; `k` is ignored.
    pub fn with_network(mut config: ExperimentConfig, network: TrustNetwork) -> Result<Self, Error> {
        if network.len() != config.n {
            return Err(Error::InvalidConfig(format!(
                "network has {} nodes but the experiment expects {}",
                network.len(),
                config.n
            )));
        }
        config.k = config.k.clamp(1, config.n.saturating_sub(1).max(1));
        config.fresh_network_per_trial = false;
        config.validate()?;
        Ok(Experiment { config, fixed: Some(network) })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn run_trial(&self, active_size: usize, trial_index: usize) -> Result<TrialOutcome, Error> {
        let n = self.config.n;
        if active_size == 0 || active_size > n {
            return Err(Error::InvalidConfig(format!("active size {active_size} must be within 1..={n}")));
        }
        let mut rng = trial_rng(self.config.master_seed, active_size, trial_index);
        let generated;
        let net = match &self.fixed {
            Some(net) => net,
            None => {
                generated = network::generate_network(n, self.config.k, &mut rng)?;
                &generated
            }
        };
        let active = ActiveSet::sample(&mut rng, n, active_size)?;
        evaluate_trial(net, &active, &self.config.propagation, self.config.solver)
    }

    /// Runs all trials one after another.
    pub fn run(&self) -> Result<ExperimentResult, Error> {
        let mut rows = Vec::new();
        for size in self.config.sorted_sizes() {
            let outcomes = (0..self.config.trials)
                .map(|t| self.run_trial(size, t))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(aggregate(size, &outcomes));
        }
        Ok(ExperimentResult { config: self.config.clone(), rows })
    }
}

pub fn run_trial(config: &ExperimentConfig, active_size: usize, trial_index: usize) -> Result<TrialOutcome, Error> {
    Experiment::new(config.clone())?.run_trial(active_size, trial_index)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, Error> {
    Experiment::new(config.clone())?.run()
}

/// Reduces outcomes listed in trial-index order. Standard errors are the
/// sample standard deviation over `sqrt(trials)`, zero for a single trial.
pub fn aggregate(active_size: usize, outcomes: &[TrialOutcome]) -> SizeStats {
    let trials = outcomes.len();
    let (mean_t, se_t) = mean_and_stderr(outcomes.iter().map(|o| o.err_traditional));
    let (mean_w, se_w) = mean_and_stderr(outcomes.iter().map(|o| o.err_weighted));
    let stranded = outcomes.iter().filter(|o| o.stranded).count();
    SizeStats {
        active_size,
        trials,
        mean_err_traditional: mean_t,
        stderr_traditional: se_t,
        mean_err_weighted: mean_w,
        stderr_weighted: se_w,
        stranded_fraction: if trials == 0 { 0.0 } else { stranded as f64 / trials as f64 },
    }
}

fn mean_and_stderr<I: Iterator<Item = f64> + Clone>(values: I) -> (f64, f64) {
    let count = values.clone().count();
    if count == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / count as f64;
    if count == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    let sd = libm::sqrt(ss / (count - 1) as f64);
    (mean, sd / libm::sqrt(count as f64))
}

/// Normal approximation of the expected unweighted decision error when
/// opinions are i.i.d. uniform on `[0, 1]` and `active_size` of `n`
/// individuals are chosen without replacement:
/// `sqrt(2/pi) * sqrt((1/12) * (1/active_size - 1/n))`.
pub fn analytic_traditional_error(active_size: usize, n: usize) -> Result<f64, Error> {
    if active_size == 0 || active_size > n {
        return Err(Error::InvalidConfig(format!("active size {active_size} must be within 1..={n}")));
    }
    if active_size == n {
        return Ok(0.0);
    }
    let variance = (1.0 / 12.0) * (1.0 / active_size as f64 - 1.0 / n as f64);
    Ok(libm::sqrt(2.0 / PI) * libm::sqrt(variance))
}
