use clap::{Parser, Subcommand, ValueEnum};
use d2dpush_cli::error::CliError;
use d2dpush_cli::instance::{load_instance, parse_strategy};
use d2dpush_cli::output;
use d2dpush_cli::sweep::{run_sweep, RunOutcome, SweepSolver, SweepSpec};
use d2dpush_cli::{run_comparison, CompareSpec};
use d2dpush_core::mcsim::{run_dissemination, SimSpec};
use d2dpush_core::model::ValidConfig;
use d2dpush_core::oracle::{self, GridSpec};
use d2dpush_core::{ago_solve, analytic, AgoConfig, InitMode};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Optimal content pushing for D2D-assisted offloading: evaluate, solve,
/// verify against brute force, and simulate instances described by a JSON
/// document (see the README for the schema).
#[derive(Debug, Parser)]
#[command(name = "d2dpush", version)]
struct ExperimentSpec {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitArg {
    /// Start from the all-zero strategy
    Zeros,
    /// Start from the group-independent optimum under cross-group sharing
    Cout,
    /// Start from the group-independent optimum under in-group sharing
    Cin,
    /// Start from uniform random pushing probabilities (uses --seed)
    Random,
}

impl InitArg {
    fn to_mode(self, seed: u64) -> InitMode {
        match self {
            InitArg::Zeros => InitMode::Zeros,
            InitArg::Cout => InitMode::GroupIndependentInter,
            InitArg::Cin => InitMode::GroupIndependentIntra,
            InitArg::Random => InitMode::Random { seed },
        }
    }

    fn label(self) -> &'static str {
        match self {
            InitArg::Zeros => "zeros",
            InitArg::Cout => "cout",
            InitArg::Cin => "cin",
            InitArg::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Analytic,
    Ago,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the offloading gain of a given pushing strategy
    Gain {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated pushing probabilities, e.g. 0.3,1,0
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value = "-")]
        output: String,
        #[arg(long)]
        allow_unusual_sharing: bool,
    },
    /// Closed-form optimal strategy (requires share_intra == share_inter)
    SolveAnalytic {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "-")]
        output: String,
        #[arg(long)]
        allow_unusual_sharing: bool,
    },
    /// Block-coordinate optimal strategy for general sharing
    SolveAgo {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "-")]
        output: String,
        #[arg(long)]
        allow_unusual_sharing: bool,
        /// Outer sweeps over all groups
        #[arg(long, default_value_t = 2)]
        iters: usize,
        #[arg(long, value_enum, default_value_t = InitArg::Cout)]
        init: InitArg,
        /// Seed for --init random
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the per-update gain trace as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exhaustive lattice search (ground truth for small instances)
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "-")]
        output: String,
        #[arg(long)]
        allow_unusual_sharing: bool,
        /// Lattice spacing per axis
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Evaluation budget (points_per_axis ^ groups must stay below it)
        #[arg(long, default_value_t = 1_000_000_000)]
        max_evals: u64,
        /// Also dump every lattice point and its gain as CSV
        #[arg(long)]
        lattice_csv: Option<PathBuf>,
    },
    /// Monte-Carlo dissemination run against the closed-form model
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated pushing probabilities, e.g. 0.3,1,0
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value = "-")]
        output: String,
        #[arg(long)]
        allow_unusual_sharing: bool,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Simulation window side, meters
        #[arg(long, default_value_t = 200.0)]
        region_side: f64,
        /// Requester-scoring inset margin, meters (default: the D2D radius)
        #[arg(long)]
        guard_margin: Option<f64>,
        /// Also write per-trial role tallies as CSV
        #[arg(long)]
        tallies_csv: Option<PathBuf>,
    },
    /// Solve the instance at evenly spaced values of one parameter
    Sweep {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "-")]
        output: String,
        #[arg(long)]
        allow_unusual_sharing: bool,
        /// Parameter path: d2d_radius or groups[i].<field> where field is
        /// density|request_prob|share_intra|share_inter|share
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = SolverArg::Analytic)]
        solver: SolverArg,
        #[arg(long, default_value_t = 2)]
        iters: usize,
        #[arg(long, value_enum, default_value_t = InitArg::Cout)]
        init: InitArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the block-coordinate solver against exhaustive search on
    /// randomly generated instances
    Compare {
        #[arg(long, default_value = "-")]
        output: String,
        /// Seed for instance generation (required: no wall-clock seeding)
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        instances: usize,
        #[arg(long, default_value_t = 3)]
        groups: usize,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 1_000_000_000)]
        max_evals: u64,
        #[arg(long, default_value_t = 2)]
        iters: usize,
        #[arg(long, value_enum, default_value_t = InitArg::Cout)]
        init: InitArg,
        #[arg(long, default_value_t = 0.05)]
        density: f64,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
    },
}

fn open_output(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == "-" {
        Ok(Box::new(std::io::stdout().lock()))
    } else {
        let file = std::fs::File::create(path).map_err(|source| CliError::Write {
            path: path.to_string(),
            source,
        })?;
        Ok(Box::new(std::io::BufWriter::new(file)))
    }
}

fn create_file(path: &Path) -> Result<Box<dyn Write>, CliError> {
    let file = std::fs::File::create(path).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })?;
    Ok(Box::new(std::io::BufWriter::new(file)))
}

fn load_valid(path: &Path, allow_unusual_sharing: bool) -> Result<ValidConfig, CliError> {
    Ok(load_instance(path)?.validate_with(allow_unusual_sharing)?)
}

fn ago_config(iters: usize, init: InitArg, seed: u64) -> AgoConfig {
    AgoConfig {
        max_iterations: iters,
        init: init.to_mode(seed),
        ..AgoConfig::default()
    }
}

fn run(spec: ExperimentSpec) -> Result<RunOutcome, CliError> {
    let none = RunOutcome {
        rows: 0,
        error_rows: 0,
    };
    match spec.command {
        Command::Gain {
            instance,
            strategy,
            output,
            allow_unusual_sharing,
        } => {
            let config = load_valid(&instance, allow_unusual_sharing)?;
            let strategy = parse_strategy(&strategy)?;
            output::write_gain_csv(&config, &strategy, &mut open_output(&output)?)?;
            Ok(none)
        }
        Command::SolveAnalytic {
            instance,
            output,
            allow_unusual_sharing,
        } => {
            let config = load_valid(&instance, allow_unusual_sharing)?;
            let solution = analytic::solve_group_independent(&config)?;
            output::write_analytic_csv(&config, &solution, &mut open_output(&output)?)?;
            Ok(none)
        }
        Command::SolveAgo {
            instance,
            output,
            allow_unusual_sharing,
            iters,
            init,
            seed,
            trace,
        } => {
            let config = load_valid(&instance, allow_unusual_sharing)?;
            let (strategy, ago_trace) = ago_solve(&config, &ago_config(iters, init, seed))?;
            output::write_ago_csv(
                &config,
                &strategy,
                &ago_trace,
                init.label(),
                &mut open_output(&output)?,
            )?;
            if let Some(path) = trace {
                output::write_trace_csv(&ago_trace, &mut create_file(&path)?)?;
            }
            Ok(none)
        }
        Command::Oracle {
            instance,
            output,
            allow_unusual_sharing,
            step,
            max_evals,
            lattice_csv,
        } => {
            let config = load_valid(&instance, allow_unusual_sharing)?;
            let grid = GridSpec {
                step,
                max_evaluations: max_evals,
            };
            let result = oracle::grid_search(&config, &grid)?;
            output::write_oracle_csv(&config, &result, &mut open_output(&output)?)?;
            if let Some(path) = lattice_csv {
                oracle::dump_lattice_csv(&config, &grid, &mut create_file(&path)?)?;
            }
            Ok(none)
        }
        Command::Simulate {
            instance,
            strategy,
            output,
            allow_unusual_sharing,
            trials,
            seed,
            region_side,
            guard_margin,
            tallies_csv,
        } => {
            let config = load_valid(&instance, allow_unusual_sharing)?;
            let strategy = parse_strategy(&strategy)?;
            let sim = SimSpec {
                region_side,
                trials,
                seed,
                guard_margin: guard_margin.unwrap_or(config.d2d_radius()),
            };
            let result = run_dissemination(&config, &strategy, &sim)?;
            output::write_simulate_csv(&config, &strategy, &result, &mut open_output(&output)?)?;
            if let Some(path) = tallies_csv {
                output::write_tallies_csv(&result, &mut create_file(&path)?)?;
            }
            Ok(none)
        }
        Command::Sweep {
            instance,
            output,
            allow_unusual_sharing,
            param,
            from,
            to,
            steps,
            solver,
            iters,
            init,
            seed,
        } => {
            let base = load_instance(&instance)?;
            let sweep = SweepSpec {
                param: param.parse()?,
                from,
                to,
                steps,
            };
            let solver = match solver {
                SolverArg::Analytic => SweepSolver::Analytic,
                SolverArg::Ago => SweepSolver::Ago(ago_config(iters, init, seed)),
            };
            run_sweep(
                &base,
                &sweep,
                &solver,
                allow_unusual_sharing,
                &mut open_output(&output)?,
            )
        }
        Command::Compare {
            output,
            seed,
            instances,
            groups,
            step,
            max_evals,
            iters,
            init,
            density,
            radius,
        } => {
            let spec = CompareSpec {
                instances,
                groups,
                seed,
                density,
                radius,
                grid: GridSpec {
                    step,
                    max_evaluations: max_evals,
                },
                ago: ago_config(iters, init, seed),
            };
            run_comparison(&spec, &mut open_output(&output)?)
        }
    }
}

fn main() -> ExitCode {
    let spec = ExperimentSpec::parse();
    match run(spec) {
        Ok(outcome) if outcome.error_rows > 0 => {
            eprintln!(
                "d2dpush: {} of {} rows carry errors",
                outcome.error_rows, outcome.rows
            );
            ExitCode::FAILURE
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("d2dpush: {e}");
            ExitCode::FAILURE
        }
    }
}
