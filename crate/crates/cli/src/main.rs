use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod params;

use params::Params;

pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_TIMEOUT: u8 = 4;
pub const EXIT_SCHEMA: u8 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] trigraph::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("timed out: {0}")]
    Timeout(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use trigraph::Error as E;
        match self {
            CliError::Core(
                E::ConstraintInfeasible(_)
                | E::BranchInfeasible { .. }
                | E::ParameterInfeasible(_)
                | E::NoFeasiblePoint { .. }
                | E::NotBracketed { .. },
            ) => EXIT_INFEASIBLE,
            CliError::Core(E::Parse { .. }) | CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Timeout(_) => EXIT_TIMEOUT,
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Edge/triangle constrained random graph experiments.
#[derive(Debug, Parser)]
#[command(name = "trigraph", version)]
struct Cli {
    /// Flat key=value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Targets {
    /// Number of nodes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge density; E = round(e * C(n,2)).
    #[arg(long, conflicts_with = "edges")]
    pub e: Option<f64>,
    /// Exact edge count.
    #[arg(long)]
    pub edges: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct ChainOpts {
    /// Proposal: global (variant 1) or vertex (variant 2).
    #[arg(long)]
    pub proposal: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SamplingOpts {
    /// Independent chains per cell.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Accepted steps of equilibration per chain.
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Accepted steps between samples of one chain.
    #[arg(long)]
    pub spacing: Option<u64>,
    /// Worker threads for independent cells or runs.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibrate one graph at exact (E, T) and write its diagnostics.
    Equilibrate {
        #[command(flatten)]
        targets: Targets,
        /// Triangle density; T = round(t * C(n,3)).
        #[arg(long, conflicts_with = "triangles")]
        t: Option<f64>,
        #[arg(long)]
        triangles: Option<u64>,
        /// Accepted steps before the state is inspected.
        #[arg(long)]
        steps: Option<u64>,
        /// Attempt cap; exceeding it without landing on (E, T) is a timeout.
        #[arg(long)]
        max_attempts: Option<u64>,
        /// Podes for the empirical graphon.
        #[arg(long)]
        podes: Option<usize>,
        #[command(flatten)]
        chain: ChainOpts,
    },
    /// λ₂ samples over a grid of node counts and triangle densities.
    SweepLambda2 {
        /// Comma-separated node counts.
        #[arg(long)]
        ns: Option<String>,
        #[arg(long)]
        e: Option<f64>,
        /// Comma-separated triangle densities.
        #[arg(long)]
        ts: Option<String>,
        /// Samples per cell.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        sampling: SamplingOpts,
        #[command(flatten)]
        chain: ChainOpts,
    },
    /// Mean λ₂ over an (e, t) grid.
    EtGrid {
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated edge densities.
        #[arg(long)]
        es: Option<String>,
        /// Comma-separated triangle densities.
        #[arg(long)]
        ts: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        sampling: SamplingOpts,
        #[command(flatten)]
        chain: ChainOpts,
    },
    /// Quench ensemble from t_source to t_target with stage segmentation.
    Quench {
        #[command(flatten)]
        targets: Targets,
        #[arg(long)]
        t_source: Option<f64>,
        #[arg(long)]
        t_target: Option<f64>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// Steps per run on the chosen clock.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        record_every: Option<u64>,
        /// Embedding snapshot cadence (0 = none).
        #[arg(long)]
        embed_every: Option<u64>,
        /// Block-smoothing window for the stage-2 fit (default 1 up, 100 down).
        #[arg(long)]
        smooth: Option<usize>,
        /// Last step of the stage-2 fit window (default: steps).
        #[arg(long)]
        horizon: Option<u64>,
        /// Step clock: accepted (default) or attempted proposals.
        #[arg(long)]
        clock: Option<String>,
        #[command(flatten)]
        sampling: SamplingOpts,
        #[command(flatten)]
        chain: ChainOpts,
    },
    /// Gamma fit and histogram of a stage-length CSV.
    Analyze {
        /// Input CSV (stage_lengths.csv or a single numeric column).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Column to analyze.
        #[arg(long)]
        column: Option<String>,
        /// mle or moments.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Graphon computations; prints JSON.
    #[command(subcommand)]
    Graphon(GraphonCmd),
}

#[derive(Debug, Subcommand)]
enum GraphonCmd {
    /// Symmetric tripodal (a, b) for (e, t).
    SolveA30 {
        #[arg(long)]
        e: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Entropy-maximizing bipodal graphon at (e, t).
    MaximizeBipodal {
        #[arg(long)]
        e: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Triangle density where the tripodal and bipodal entropies cross.
    LocateTransition {
        #[arg(long)]
        e: Option<f64>,
    },
    /// Smallest triangle density reachable by a bipodal graphon at e.
    MinTBipodal {
        #[arg(long)]
        e: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut p = match &cli.config {
        Some(path) => Params::from_file(path)?,
        None => Params::default(),
    };
    match cli.command {
        Command::Equilibrate { targets, t, triangles, steps, max_attempts, podes, chain } => {
            set_targets(&mut p, &targets);
            p.set("t", t);
            p.set("triangles", triangles);
            p.set("steps", steps);
            p.set("max_attempts", max_attempts);
            p.set("podes", podes);
            set_chain(&mut p, &chain);
            commands::equilibrate(p)
        }
        Command::SweepLambda2 { ns, e, ts, samples, sampling, chain } => {
            p.set("ns", ns);
            p.set("e", e);
            p.set("ts", ts);
            p.set("samples", samples);
            set_sampling(&mut p, &sampling);
            set_chain(&mut p, &chain);
            commands::sweep_lambda2(p)
        }
        Command::EtGrid { n, es, ts, samples, sampling, chain } => {
            p.set("n", n);
            p.set("es", es);
            p.set("ts", ts);
            p.set("samples", samples);
            set_sampling(&mut p, &sampling);
            set_chain(&mut p, &chain);
            commands::et_grid(p)
        }
        Command::Quench {
            targets,
            t_source,
            t_target,
            repetitions,
            steps,
            record_every,
            embed_every,
            smooth,
            horizon,
            clock,
            sampling,
            chain,
        } => {
            p.set("clock", clock);
            set_targets(&mut p, &targets);
            p.set("t_source", t_source);
            p.set("t_target", t_target);
            p.set("repetitions", repetitions);
            p.set("steps", steps);
            p.set("record_every", record_every);
            p.set("embed_every", embed_every);
            p.set("smooth", smooth);
            p.set("horizon", horizon);
            set_sampling(&mut p, &sampling);
            set_chain(&mut p, &chain);
            commands::quench(p)
        }
        Command::Analyze { input, column, method, bins, out } => {
            p.set("input", input.map(|x| x.display().to_string()));
            p.set("column", column);
            p.set("method", method);
            p.set("bins", bins);
            p.set("out", out.map(|x| x.display().to_string()));
            commands::analyze(p)
        }
        Command::Graphon(g) => {
            let (name, e, t) = match g {
                GraphonCmd::SolveA30 { e, t } => ("solve-a30", e, t),
                GraphonCmd::MaximizeBipodal { e, t } => ("maximize-bipodal", e, t),
                GraphonCmd::LocateTransition { e } => ("locate-transition", e, None),
                GraphonCmd::MinTBipodal { e } => ("min-t-bipodal", e, None),
            };
            p.set("e", e);
            p.set("t", t);
            commands::graphon(name, p)
        }
    }
}

fn set_targets(p: &mut Params, t: &Targets) {
    p.set("n", t.n);
    p.set("e", t.e);
    p.set("edges", t.edges);
}

fn set_chain(p: &mut Params, c: &ChainOpts) {
    p.set("proposal", c.proposal.clone());
    p.set("seed", c.seed);
    p.set("out", c.out.as_ref().map(|x| x.display().to_string()));
}

fn set_sampling(p: &mut Params, s: &SamplingOpts) {
    p.set("chains", s.chains);
    p.set("burn_in", s.burn_in);
    p.set("spacing", s.spacing);
    p.set("workers", s.workers);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
