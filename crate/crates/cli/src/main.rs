use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cqpt::analysis::sorted_spectrum_with;
use cqpt::exec::Exec;
use cqpt::measurement::{full_config_set, normalize_counts, select_configs, Dataset, Selection};
use cqpt::process::{process_fidelity, purity, unitary_fidelity, OperatorBasis, ProcessMatrix, UnitaryGate};
use cqpt::scenarios::{convergence_experiment, ScenarioConfig, DEFAULT_EPSILON_FACTOR};
use cqpt::solver::{
    calibrate_epsilon, solve_constrained_ls, solve_cqpt, RecoveryProblem, ResultFile, SolverOptions,
};
use cqpt::{json, Error};

#[derive(Parser)]
#[command(name = "cqpt", version, about = "Compressive quantum process tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset over the full configuration set.
    Simulate(SimulateArgs),
    /// Reconstruct a process matrix from a dataset.
    Reconstruct(ReconstructArgs),
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario's shot count.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Cqpt,
    Ls,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    data: PathBuf,
    /// `all`, `random:<m>:<seed>` or `table1:<id>`.
    #[arg(long, default_value = "all")]
    select: String,
    /// `pauli` or `gate:<label>`; defaults to the dataset's basis.
    #[arg(long)]
    basis: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Cqpt)]
    method: Method,
    /// Residual bound in outcome units; calibrated from the full data when absent.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON_FACTOR)]
    epsilon_factor: f64,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    allow_unconverged: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Sorted relative magnitudes of χ as CSV.
    Spectrum {
        #[arg(long)]
        chi: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.02])]
        thresholds: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prints the fidelity against an ideal gate or another result, and the purity.
    Fidelity {
        #[arg(long)]
        chi: PathBuf,
        /// `ideal:<gate>` or a result file.
        #[arg(long)]
        against: String,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Mean fidelity of m-configuration reconstructions with the full-data fit.
    Convergence {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::NotConverged { .. } | Error::Infeasible(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(err) = init_threads() {
        eprintln!("error: {err}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Caps the worker pool at `QPT_THREADS` when set.
fn init_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("QPT_THREADS") else { return Ok(()) };
    let n: usize = value.parse().map_err(|_| format!("QPT_THREADS must be a positive integer, got `{value}`"))?;
    if n == 0 {
        return Err("QPT_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(command: Command) -> cqpt::Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Reconstruct(args) => reconstruct(args),
        Command::Analyze(AnalyzeCommand::Spectrum { chi, thresholds, out }) => spectrum(&chi, &thresholds, &out),
        Command::Analyze(AnalyzeCommand::Fidelity { chi, against }) => fidelity(&chi, &against),
        Command::Report(ReportCommand::Convergence { scenario, m, trials, seed, out }) => {
            let scenario: ScenarioConfig = json::read_file(scenario)?;
            let report = convergence_experiment(&scenario, &m, trials, seed, Exec::Parallel)?;
            json::write_file(out, &report)
        }
    }
}

fn simulate(args: SimulateArgs) -> cqpt::Result<()> {
    let mut scenario: ScenarioConfig = json::read_file(&args.scenario)?;
    if args.shots.is_some() {
        scenario.shots = args.shots;
    }
    let chi = scenario.channel()?;
    let (_, data) = scenario.simulate(&chi, args.seed)?;
    std::fs::write(&args.out, data.to_json()?)?;
    Ok(())
}

fn read_dataset(path: &Path) -> cqpt::Result<Dataset> {
    Dataset::from_json(&std::fs::read_to_string(path)?)
}

fn qubits_of(data: &Dataset) -> cqpt::Result<usize> {
    let n = data.records.first().map(|r| r.input.chars().count()).unwrap_or(0);
    if n == 0 {
        return Err(Error::InvalidArgument("dataset has no records".into()));
    }
    Ok(n)
}

fn reconstruct(args: ReconstructArgs) -> cqpt::Result<()> {
    let data = normalize_counts(&read_dataset(&args.data)?)?;
    let n = qubits_of(&data)?;
    let basis = OperatorBasis::from_tag_str(args.basis.as_deref().unwrap_or(&data.basis), 1 << n)?;
    let full = full_config_set(n)?;
    let selection: Selection = args.select.parse()?;
    let set = select_configs(&full, &selection)?;

    let mut opts = SolverOptions::default();
    if let Some(iters) = args.max_iters {
        opts.max_iters = iters;
    }

    let result = match args.method {
        Method::Ls => {
            let problem = RecoveryProblem::from_dataset(&data, &set, basis, 0.0, Exec::Parallel)?;
            solve_constrained_ls(&problem, &opts)?
        }
        Method::Cqpt => {
            let epsilon = match args.epsilon {
                Some(e) => e,
                None => {
                    let all = RecoveryProblem::from_dataset(&data, &full, basis.clone(), 0.0, Exec::Parallel)?;
                    let fit = solve_constrained_ls(&all, &opts)?;
                    calibrate_epsilon(&fit, set.len(), args.epsilon_factor)
                }
            };
            let problem = RecoveryProblem::from_dataset(&data, &set, basis, epsilon, Exec::Parallel)?;
            solve_cqpt(&problem, &opts)?
        }
    };
    if !result.converged && !args.allow_unconverged {
        return Err(Error::NotConverged { iterations: result.iterations });
    }
    json::write_file(&args.out, &result.to_file())
}

fn read_chi(path: &Path) -> cqpt::Result<ProcessMatrix> {
    json::read_file::<ResultFile>(path)?.process_matrix()
}

fn spectrum(chi: &Path, thresholds: &[f64], out: &Path) -> cqpt::Result<()> {
    let spec = sorted_spectrum_with(&read_chi(chi)?, thresholds)?;
    std::fs::write(out, spec.to_csv())?;
    for t in &spec.threshold_counts {
        println!("above {}: {}", t.threshold, t.count);
    }
    Ok(())
}

fn fidelity(chi: &Path, against: &str) -> cqpt::Result<()> {
    let chi = read_chi(chi)?;
    let f = match against.strip_prefix("ideal:") {
        Some(label) => unitary_fidelity(&UnitaryGate::from_label(label)?, &chi)?,
        None => process_fidelity(&read_chi(Path::new(against))?, &chi)?,
    };
    println!("fidelity {f:.10}");
    println!("purity {:.10}", purity(&chi));
    Ok(())
}
