use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iimhhl::hamsim::EvolutionMode;
use iimhhl::hhl::{ReadoutMode, ShotBudget};
use iimhhl::refine::ShiftStrategy;
use iimhhl::statevector::PostSelection;

#[derive(Debug, Parser)]
#[command(name = "iimhhl", version, about = "HHL linear solver with shifted iterative refinement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one system and write trace.csv and solution.json.
    Solve(SolveArgs),
    /// Reproduce one of the convergence figures as CSV and SVG.
    Figure(FigureArgs),
    /// Run the Cartesian product described by a JSON spec file.
    Sweep(SweepArgs),
    /// Write a benchmark problem as JSON.
    GenProblem(GenProblemArgs),
}

fn parse_shift(s: &str) -> Result<ShiftStrategy, String> {
    s.parse().map_err(|e: iimhhl::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Statevector,
    Sampled,
}

impl From<ModeArg> for ReadoutMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Statevector => ReadoutMode::Statevector,
            ModeArg::Sampled => ReadoutMode::Sampled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvolutionArg {
    Exact,
    Trotter,
}

impl From<EvolutionArg> for EvolutionMode {
    fn from(m: EvolutionArg) -> Self {
        match m {
            EvolutionArg::Exact => EvolutionMode::Exact,
            EvolutionArg::Trotter => EvolutionMode::Trotter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PostSelectArg {
    /// Keep shots whose ancilla reads 1.
    Ancilla,
    /// Keep shots whose ancilla reads 1 and clock reads 0.
    AncillaClock,
}

impl From<PostSelectArg> for PostSelection {
    fn from(p: PostSelectArg) -> Self {
        match p {
            PostSelectArg::Ancilla => PostSelection::Ancilla,
            PostSelectArg::AncillaClock => PostSelection::AncillaAndClockZero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BudgetArg {
    Accepted,
    Total,
}

impl From<BudgetArg> for ShotBudget {
    fn from(b: BudgetArg) -> Self {
        match b {
            BudgetArg::Accepted => ShotBudget::Accepted,
            BudgetArg::Total => ShotBudget::Total,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Condition number of the benchmark matrix.
    #[arg(long, default_value_t = 10.0)]
    pub kappa: f64,
    /// Benchmark solution: 1 is all positive, 2 has a negative first entry.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub solution: u8,
    /// Seed for the random orthogonal basis and for sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the 4x4 identity with b = [1, 2, 3, 4].
    #[arg(long, conflicts_with = "problem")]
    pub identity: bool,
    /// Load the system from a problem JSON file.
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Clock qubits.
    #[arg(long, default_value_t = 4)]
    pub p: usize,
    /// Accepted measurements per HHL run.
    #[arg(long, default_value_t = 1000)]
    pub shots: u64,
    #[arg(long, default_value = "none", value_parser = parse_shift)]
    pub shift: ShiftStrategy,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    /// Trotter slices (only used with --evolution trotter).
    #[arg(long, default_value_t = 6)]
    pub slices: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Sampled)]
    pub mode: ModeArg,
    /// Shorthand for --mode statevector.
    #[arg(long)]
    pub statevector: bool,
    #[arg(long, value_enum, default_value_t = EvolutionArg::Exact)]
    pub evolution: EvolutionArg,
    /// Evolution time [default: 2*pi*(1 - 2^-p)].
    #[arg(long)]
    pub t: Option<f64>,
    /// Rotation constant [default: (2*pi/t) * 2^-p].
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Solve for x + s instead, e.g. "2,2,2,2", and subtract s at the end.
    #[arg(long, value_name = "V1,V2,...")]
    pub pre_shift: Option<String>,
    #[arg(long, value_enum, default_value_t = PostSelectArg::AncillaClock)]
    pub postselect: PostSelectArg,
    #[arg(long, value_enum, default_value_t = BudgetArg::Accepted)]
    pub shot_budget: BudgetArg,
}

impl SolverArgs {
    pub fn readout(&self) -> ReadoutMode {
        if self.statevector {
            ReadoutMode::Statevector
        } else {
            self.mode.into()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Single HHL solve without refinement.
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub id: FigureId,
    /// Number of seeds.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// First seed; seeds are consecutive from here.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    #[arg(long, value_enum, default_value_t = EvolutionArg::Exact)]
    pub evolution: EvolutionArg,
    #[arg(long, default_value_t = 6)]
    pub slices: usize,
    #[arg(long, default_value = "figures")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// JSON sweep specification.
    pub spec: PathBuf,
    /// Output CSV file.
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenProblemArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
