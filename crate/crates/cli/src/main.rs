//! `hgon`: file-based runs of the hypergraphon pipeline.

mod commands;
mod error;
mod input;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use manifest::Run;

#[derive(Debug, Parser)]
#[command(name = "hgon", version, about = "Maximum-entropy hypergraphons under density constraints")]
pub struct Cli {
    /// Seed overriding any seed in the config files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the constrained problem at a fixed m (writes report.json).
    Solve(SolveArgs),
    /// Solve at m_from..=m_to seeding each level with splits (writes escalation.json).
    Escalate(EscalateArgs),
    /// Density of a graph or quantum graph in a step function (writes density.json).
    Eval {
        #[arg(long)]
        stepfn: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Analytic gradients against central finite differences (writes grad_check.json).
    GradCheck {
        #[arg(long, requires = "graphs")]
        stepfn: Option<PathBuf>,
        #[arg(long, requires = "stepfn")]
        graphs: Option<PathBuf>,
        /// Number of random fixtures when no step function is given.
        #[arg(long, default_value_t = 100)]
        random: usize,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
    },
    /// Draw a W-random hypergraph (writes graph.json).
    Sample {
        #[arg(long)]
        stepfn: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Empirical densities of W-random samples against t(F, W) (writes table.json).
    Convergence {
        #[arg(long)]
        stepfn: PathBuf,
        #[arg(long)]
        graphs: PathBuf,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
    },
    /// Cut distance over block permutations (writes cut_distance.json).
    CutDistance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Compile a formula to a quantum graph (writes quantum_graph.json).
    Compile {
        #[arg(long)]
        formula: String,
        #[command(flatten)]
        sig: SignatureArgs,
    },
    /// Probability of a formula averaged over solutions (writes query.json).
    Query {
        #[arg(long)]
        formula: String,
        /// Step function, array of step functions, or a solve/escalation report.
        #[arg(long)]
        solutions: PathBuf,
        #[command(flatten)]
        sig: SignatureArgs,
    },
    /// Least-squares Lagrange multipliers at a step function (writes beta.json).
    FitBeta {
        #[arg(long)]
        stepfn: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long)]
        objective: Option<PathBuf>,
    },
    /// Smallest m attaining the targets (writes m0.json).
    M0 {
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        m_max: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub constraints: PathBuf,
    /// Solver config JSON; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Objective config JSON (scalar function and relation weights).
    #[arg(long)]
    pub objective: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EscalateArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long)]
    pub m_from: usize,
    #[arg(long)]
    pub m_to: usize,
}

#[derive(Debug, Args)]
pub struct SignatureArgs {
    /// Named relations, e.g. `Friends:2,Sm:1`.
    #[arg(long, conflicts_with = "signature")]
    pub relations: Option<String>,
    /// Signature JSON file.
    #[arg(long)]
    pub signature: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Escalate(_) => "escalate",
            Command::Eval { .. } => "eval",
            Command::GradCheck { .. } => "grad-check",
            Command::Sample { .. } => "sample",
            Command::Convergence { .. } => "convergence",
            Command::CutDistance { .. } => "cut-distance",
            Command::Compile { .. } => "compile",
            Command::Query { .. } => "query",
            Command::FitBeta { .. } => "fit-beta",
            Command::M0 { .. } => "m0",
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail(&CliError::Usage(e.to_string()));
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(&CliError::Usage("--threads must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&CliError::Usage(e.to_string()));
        }
    }
    let mut run = Run::new(cli.command.name(), cli.out_dir.clone(), cli.seed);
    let result = commands::dispatch(&cli.command, &mut run);
    let code = match &result {
        Ok(c) => *c,
        Err(e) => e.exit_code(),
    };
    if let Err(e) = run.finish(code) {
        return fail(&e);
    }
    match result {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => fail(&e),
    }
}
