use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use ctapf::bench::{run_benchmark, run_solver, BenchConfig, Budget, Reference, SolverKind};
use ctapf::scenario::{gen_scenario, problem_from_json, problem_to_json, solution_from_json, solution_to_json, ScenarioSpec};
use ctapf::{parse_map, validate_solution, Problem, ValidationMode};

#[derive(Parser)]
#[command(name = "ctapf", version, about = "Task allocation and path finding solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BudgetArgs {
    /// Maximum high-level expansions per run.
    #[arg(long, default_value_t = 2_000_000)]
    node_budget: u64,
    /// Wall-clock limit per run in seconds (0 disables it).
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            node_budget: self.node_budget,
            time_limit: (self.time_limit > 0.0).then(|| Duration::from_secs_f64(self.time_limit)),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write the solution JSON.
    Solve {
        #[arg(long, default_value = "tcbs")]
        solver: SolverKind,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Map text file overriding the scenario's embedded map.
        #[arg(long)]
        map_file: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Write a random scenario JSON.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        width: u16,
        #[arg(long, default_value_t = 8)]
        height: u16,
        #[arg(long, default_value_t = 0.2)]
        density: f64,
        #[arg(long, default_value_t = 3)]
        agents: usize,
        #[arg(long, default_value_t = 2)]
        tasks: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the regret / planning-time benchmark and write a CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3])]
        tasks: Vec<usize>,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        width: u16,
        #[arg(long, default_value_t = 8)]
        height: u16,
        #[arg(long, default_value_t = 0.2)]
        density: f64,
        #[arg(long, default_value_t = 3)]
        agents: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "tcbs,tcbs-nn2,greedy,decoupled")]
        solvers: Vec<SolverKind>,
        /// Use the exhaustive solver as the optimal reference.
        #[arg(long)]
        oracle_reference: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Check a solution JSON against a scenario JSON.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        map_file: Option<PathBuf>,
        /// Derive task fulfilment from the paths alone.
        #[arg(long)]
        strict: bool,
    },
}

fn load_problem(path: &Path, map_file: Option<&Path>) -> ctapf::Result<Problem> {
    let map = match map_file {
        Some(p) => Some(parse_map(&fs::read_to_string(p)?)?),
        None => None,
    };
    problem_from_json(&fs::read_to_string(path)?, map)
}

fn run(cli: Cli) -> ctapf::Result<ExitCode> {
    match cli.command {
        Command::Solve { solver, input, out, map_file, budget } => {
            let problem = load_problem(&input, map_file.as_deref())?;
            let outcome = run_solver(&problem, solver, budget.budget())?;
            fs::write(&out, solution_to_json(&outcome.solution))?;
            eprintln!(
                "{solver}: total cost {} ({} expansions, {:.3} ms)",
                outcome.solution.total_cost,
                outcome.stats.nodes_expanded,
                outcome.stats.wall_time.as_secs_f64() * 1e3
            );
        }
        Command::Gen { seed, width, height, density, agents, tasks, out } => {
            let spec = ScenarioSpec { seed, width, height, obstacle_density: density, n_agents: agents, m_tasks: tasks };
            fs::write(&out, problem_to_json(&gen_scenario(&spec)?))?;
        }
        Command::Bench {
            tasks, trials, width, height, density, agents, seed, solvers, oracle_reference, out, budget,
        } => {
            let config = BenchConfig {
                width,
                height,
                density,
                n_agents: agents,
                task_counts: tasks,
                trials,
                seed,
                solvers,
                reference: if oracle_reference { Reference::Oracle } else { Reference::Tcbs },
                budget: budget.budget(),
            };
            print!("{}", run_benchmark(&config, &out)?);
        }
        Command::Validate { scenario, solution, map_file, strict } => {
            let problem = load_problem(&scenario, map_file.as_deref())?;
            let solution = solution_from_json(&fs::read_to_string(&solution)?)?;
            let mode = if strict { ValidationMode::Strict } else { ValidationMode::Relaxed };
            let report = validate_solution(&problem, &solution, mode);
            if report.is_valid() {
                println!("valid");
            } else {
                for v in &report.violations {
                    println!("{:?}: {v}", v.class());
                }
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_no_solution() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
