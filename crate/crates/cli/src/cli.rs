//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse or validation error,
//! 3 trust that cannot be absorbed (stranded trust or no convergence).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trustvote_core::delegation::{compute_weights_exact, compute_weights_iterative};
use trustvote_core::network::{generate_network, validate_network};
use trustvote_core::simulation::{ExperimentConfig, Solver};
use trustvote_core::{decision, Error, PropagationConfig, StrandedPolicy, TrustNetwork, WeightVector};

use crate::io::{self, IoError};
use crate::runner;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNABSORBED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "trustvote", version, about = "Trust-network proxy decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random k-out trust network.
    Generate(GenerateArgs),
    /// Compute delegation weights for an active set.
    Weights(DecisionArgs),
    /// Report unweighted and weighted decisions and their errors.
    Decide(DecisionArgs),
    /// Run the Monte Carlo comparison and write a results CSV.
    Simulate(SimulateArgs),
    /// List structural problems in a network.
    Validate(NetworkArgs),
}

#[derive(Debug, Args)]
struct NetworkArgs {
    #[arg(long)]
    nodes: PathBuf,
    #[arg(long)]
    edges: PathBuf,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long = "n", default_value_t = 100)]
    n: usize,
    #[arg(long = "k", default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the nodes file.
    #[arg(long)]
    nodes: PathBuf,
    /// Output path for the edges file.
    #[arg(long)]
    edges: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Reject,
    Uniform,
}

impl From<PolicyArg> for StrandedPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Reject => StrandedPolicy::Reject,
            PolicyArg::Uniform => StrandedPolicy::UniformToActive,
        }
    }
}

#[derive(Debug, Args)]
struct PropagationArgs {
    /// Use the closed-form linear solve instead of iterating.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long, value_enum)]
    stranded_policy: Option<PolicyArg>,
}

#[derive(Debug, Args)]
struct DecisionArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Comma-separated active node ids.
    #[arg(long, conflicts_with = "active_file")]
    active: Option<String>,
    /// File with one active node id per line.
    #[arg(long)]
    active_file: Option<PathBuf>,
    #[command(flatten)]
    propagation: PropagationArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long = "n")]
    n: Option<usize>,
    #[arg(long = "k")]
    k: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated active-set sizes.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reuse one network for every trial.
    #[arg(long)]
    fixed_network: bool,
    /// Iterate sweeps instead of the default closed-form solve.
    #[arg(long, conflicts_with = "exact")]
    iterative: bool,
    /// Run on this network (with --edges) instead of generated ones.
    #[arg(long, requires = "edges")]
    nodes: Option<PathBuf>,
    #[arg(long, requires = "nodes")]
    edges: Option<PathBuf>,
    #[command(flatten)]
    propagation: PropagationArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    /// File of key=value lines supplying defaults for the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0} validation problem(s)")]
    Violations(usize),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(IoError::Core(e)) | CliError::Core(e) => core_exit_code(e),
            CliError::Io(_) | CliError::Violations(_) => EXIT_INVALID,
        }
    }
}

fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::StrandedTrust { .. } | Error::NoConvergence { .. } => EXIT_UNABSORBED,
        Error::EmptyActiveSet => EXIT_USAGE,
        _ => EXIT_INVALID,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a, err),
        Command::Weights(a) => weights(a, out, err),
        Command::Decide(a) => decide(a, out, err),
        Command::Simulate(a) => simulate(a, out, err),
        Command::Validate(a) => validate(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn generate(a: GenerateArgs, err: &mut dyn Write) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let net = generate_network(a.n, a.k, &mut rng)?;
    io::save_network(&net, &a.nodes, &a.edges)?;
    let _ = writeln!(err, "wrote {} nodes and {} edges", net.len(), net.edges().len());
    Ok(())
}

fn load(args: &NetworkArgs, err: &mut dyn Write) -> Result<TrustNetwork, CliError> {
    let net = io::load_network(&args.nodes, &args.edges)?;
    report_dangling(&net, err);
    Ok(net)
}

fn report_dangling(net: &TrustNetwork, err: &mut dyn Write) {
    let dangling = net.dangling();
    if dangling.is_empty() {
        return;
    }
    let shown: Vec<String> = dangling.iter().take(20).map(|d| d.to_string()).collect();
    let more = if dangling.len() > 20 { ",..." } else { "" };
    let _ = writeln!(err, "note: {} dangling node(s): {}{more}", dangling.len(), shown.join(","));
}

fn propagation_config(a: &PropagationArgs, default_policy: StrandedPolicy) -> PropagationConfig {
    let defaults = PropagationConfig::default();
    PropagationConfig {
        tolerance: a.tolerance.unwrap_or(defaults.tolerance),
        max_iterations: a.max_iterations.unwrap_or(defaults.max_iterations),
        stranded_policy: a.stranded_policy.map_or(default_policy, Into::into),
    }
}

fn compute(
    a: &DecisionArgs,
    err: &mut dyn Write,
) -> Result<(TrustNetwork, trustvote_core::ActiveSet, WeightVector), CliError> {
    let ids = match (&a.active, &a.active_file) {
        (Some(list), None) => io::parse_id_list(list)?,
        (None, Some(path)) => io::read_active_file(path)?,
        _ => return Err(CliError::Usage("one of --active or --active-file is required".into())),
    };
    let net = load(&a.network, err)?;
    let active = io::active_set(ids, net.len())?;
    let config = propagation_config(&a.propagation, StrandedPolicy::Reject);
    config.validate()?;
    let weights = if a.propagation.exact {
        compute_weights_exact(&net, &active, config.stranded_policy)?
    } else {
        compute_weights_iterative(&net, &active, &config)?
    };
    if weights.stranded_mass > 0.0 {
        let _ = writeln!(err, "note: redistributed {} unit(s) of stranded trust", weights.stranded_mass);
    }
    Ok((net, active, weights))
}

fn open_output(path: &Option<PathBuf>) -> Result<Option<BufWriter<File>>, CliError> {
    path.as_ref()
        .map(|p| {
            File::create(p)
                .map(BufWriter::new)
                .map_err(|source| CliError::Io(IoError::Io { path: p.clone(), source }))
        })
        .transpose()
}

fn write_out<F>(path: &Option<PathBuf>, out: &mut dyn Write, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let result = match open_output(path)? {
        Some(mut file) => f(&mut file).and_then(|_| file.flush()),
        None => f(out),
    };
    result.map_err(|source| {
        CliError::Io(IoError::Io { path: path.clone().unwrap_or_else(|| "<stdout>".into()), source })
    })
}

fn weights(a: DecisionArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (_, _, w) = compute(&a, err)?;
    if !a.propagation.exact {
        let _ = writeln!(err, "converged after {} sweep(s), residual {:e}", w.iterations_used, w.residual);
    }
    write_out(&a.output, out, |o| io::write_weights(&w, o))
}

fn decide(a: DecisionArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (net, active, w) = compute(&a, err)?;
    let r = decision::evaluate(&net, &active, Some(&w))?;
    write_out(&a.output, out, |o| {
        writeln!(o, "active_size={}", active.len())?;
        writeln!(o, "group_decision={}", r.group_decision)?;
        writeln!(o, "expected_decision={}", r.expected_decision)?;
        writeln!(o, "weighted_group_decision={}", r.weighted_group_decision.unwrap_or(f64::NAN))?;
        writeln!(o, "error_traditional={}", r.error_traditional)?;
        writeln!(o, "error_weighted={}", r.error_weighted.unwrap_or(f64::NAN))
    })
}

fn validate(a: NetworkArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let net = io::load_network_unchecked(&a.nodes, &a.edges)?;
    let violations = validate_network(&net);
    let written = if violations.is_empty() {
        writeln!(out, "valid: {} nodes, {} edges", net.len(), net.edges().len())
    } else {
        violations.iter().try_for_each(|v| writeln!(out, "{v}"))
    };
    written.map_err(|source| CliError::Io(IoError::Io { path: "<stdout>".into(), source }))?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violations(violations.len()))
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Io(IoError::Parse { file: "--config".into(), line: 0, msg: format!("bad value `{value}` for {key}") }))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => parse_value::<bool>(key, value),
    }
}

fn parse_sizes(list: &str) -> Result<Vec<usize>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value("sizes", s))
        .collect()
}

/// Builds the experiment configuration: defaults, then the `--config`
/// file, then explicit flags.
fn experiment_config(a: &SimulateArgs) -> Result<ExperimentConfig, CliError> {
    let mut c = ExperimentConfig::default();
    if let Some(path) = &a.config {
        for (key, value) in io::read_key_values(path)? {
            match key.as_str() {
                "n" => c.n = parse_value(&key, &value)?,
                "k" => c.k = parse_value(&key, &value)?,
                "trials" => c.trials = parse_value(&key, &value)?,
                "sizes" => c.active_sizes = parse_sizes(&value)?,
                "seed" => c.master_seed = parse_value(&key, &value)?,
                "tolerance" => c.propagation.tolerance = parse_value(&key, &value)?,
                "max-iterations" => c.propagation.max_iterations = parse_value(&key, &value)?,
                "stranded-policy" => {
                    c.propagation.stranded_policy = match value.as_str() {
                        "reject" => StrandedPolicy::Reject,
                        "uniform" => StrandedPolicy::UniformToActive,
                        _ => return Err(parse_value::<f64>(&key, &value).unwrap_err()),
                    }
                }
                "fixed-network" => c.fresh_network_per_trial = !parse_bool(&key, &value)?,
                "exact" => {
                    c.solver = if parse_bool(&key, &value)? { Solver::Exact } else { Solver::Iterative }
                }
                _ => {
                    return Err(CliError::Io(IoError::Parse {
                        file: path.display().to_string(),
                        line: 0,
                        msg: format!("unknown key `{key}`"),
                    }))
                }
            }
        }
    }
    if let Some(n) = a.n {
        c.n = n;
    }
    if let Some(k) = a.k {
        c.k = k;
    }
    if let Some(t) = a.trials {
        c.trials = t;
    }
    if let Some(s) = &a.sizes {
        c.active_sizes = parse_sizes(s)?;
    }
    if let Some(seed) = a.seed {
        c.master_seed = seed;
    }
    if let Some(t) = a.propagation.tolerance {
        c.propagation.tolerance = t;
    }
    if let Some(m) = a.propagation.max_iterations {
        c.propagation.max_iterations = m;
    }
    if let Some(p) = a.propagation.stranded_policy {
        c.propagation.stranded_policy = p.into();
    }
    if a.fixed_network {
        c.fresh_network_per_trial = false;
    }
    if a.propagation.exact {
        c.solver = Solver::Exact;
    }
    if a.iterative {
        c.solver = Solver::Iterative;
    }
    Ok(c)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut config = experiment_config(&a)?;
    let result = match (&a.nodes, &a.edges) {
        (Some(nodes), Some(edges)) => {
            let net = load(&NetworkArgs { nodes: nodes.clone(), edges: edges.clone() }, err)?;
            if a.n.is_none() {
                config.n = net.len();
            }
            runner::run_on_network(&config, net)?
        }
        _ => runner::run_experiment(&config)?,
    };
    let stranded: f64 = result.rows.iter().map(|r| r.stranded_fraction).fold(0.0, f64::max);
    let _ = writeln!(
        err,
        "ran {} trial(s) for each of {} size(s); max stranded fraction {}",
        config.trials,
        result.rows.len(),
        stranded
    );
    write_out(&a.output, out, |o| io::write_results(&result.rows, o))
}
