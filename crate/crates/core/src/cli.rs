//! The `rolesim` command line.
//!
//! Exit codes: 0 success, 1 I/O or malformed input file, 2 invalid
//! arguments, 3 numerical failure (including non-convergence, in which case
//! outputs are still written and flagged).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{nmi, nmi_grid, rank_sweep, GridConfig};
use crate::benchgen::{generate, load_role_graph, preset_role_graph, RoleModel, RolePreset};
use crate::error::Error;
use crate::exact::{full_similarity, Beta, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::graph::DirectedGraph;
use crate::io;
use crate::lowrank::lowrank_similarity;
use crate::roles::{extract_roles, RoleOptions, DEFAULT_RANK};

const MATERIALIZE_MAX_DIM: usize = 5000;
const DEFAULT_ROLE_SIZE: usize = 50;

#[derive(Debug, Parser)]
#[command(
    name = "rolesim",
    version,
    about = "Node similarity and role extraction for directed graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random graph with planted roles.
    Generate(GenerateArgs),
    /// Compute the full or low-rank similarity of a graph.
    Similarity(SimilarityArgs),
    /// Extract a role hierarchy from a graph.
    Roles(RolesArgs),
    /// Compare low-rank similarities of increasing rank with the full one.
    Ranksweep(RanksweepArgs),
    /// Print the NMI between two partition files.
    Evaluate(EvaluateArgs),
    /// Mean NMI of both pipelines over a (p_in, p_out) grid.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// `community:K`, `cycle:K`, or a role-graph edge-list file.
    #[arg(long)]
    pub model: String,
    /// Nodes per role, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub p_in: f64,
    #[arg(long)]
    pub p_out: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Writes `<prefix>.edges.tsv` and `<prefix>.truth.tsv`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BetaArgs {
    /// `auto` (0.9 / ρ(A + A^T)) or a positive value.
    #[arg(long, default_value = "auto")]
    pub beta: String,
    /// Accept a β above the convergence bound.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, conflicts_with = "full", required_unless_present = "full")]
    pub rank: Option<usize>,
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub beta: BetaArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Matrix (full) or factor (low rank) CSV; the residual trace goes to
    /// `<out>.convergence.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the dense `X X^T` to `<out>.dense.csv` (low rank only).
    #[arg(long, requires = "rank")]
    pub materialize: bool,
}

#[derive(Debug, Args)]
pub struct RolesArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, conflicts_with = "full")]
    pub rank: Option<usize>,
    #[arg(long)]
    pub full: bool,
    /// `auto` or a value within the convergence bound.
    #[arg(long, default_value = "auto")]
    pub beta: String,
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct RanksweepArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Largest rank reported; defaults to min(10, n - 1).
    #[arg(long)]
    pub rmax: Option<usize>,
    #[command(flatten)]
    pub beta: BetaArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub model: String,
    /// Nodes per role; defaults to 50 for every role.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long, default_value_t = 20)]
    pub realizations: usize,
    #[arg(long, default_value_t = DEFAULT_RANK)]
    pub rank: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
    /// Worker threads; output is identical for any value.
    #[arg(long, env = "ROLESIM_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::Parse { .. } => 1,
            Error::Domain(_) | Error::Capability(_) => 2,
            Error::Numerical(_) => 3,
        };
        Self {
            code,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        msg: msg.into(),
    }
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn parse_model(spec: &str) -> Result<DirectedGraph, CliError> {
    let preset = |name: &str, kind: RolePreset| -> Option<Result<DirectedGraph, CliError>> {
        let k = spec.strip_prefix(name)?.strip_prefix(':')?;
        Some(match k.parse::<usize>() {
            Ok(k) => preset_role_graph(kind, k).map_err(CliError::from),
            Err(_) => Err(usage(format!("invalid role count in model {spec:?}"))),
        })
    };
    preset("community", RolePreset::Community)
        .or_else(|| preset("cycle", RolePreset::Cycle))
        .unwrap_or_else(|| load_role_graph(spec).map_err(CliError::from))
}

fn resolve_beta(args: &BetaArgs, g: &DirectedGraph) -> Result<Beta, CliError> {
    let beta = if args.beta == "auto" {
        let b = Beta::auto(g);
        log::info!("β resolved to {}", b.value());
        b
    } else {
        let value: f64 = args
            .beta
            .parse()
            .map_err(|_| usage(format!("invalid --beta {:?}", args.beta)))?;
        if args.force {
            Beta::with_override(value, g)?
        } else {
            Beta::checked(value, g).map_err(|e| usage(format!("{e} (use --force to override)")))?
        }
    };
    Ok(beta)
}

fn not_converged(iterations: usize) -> CliError {
    CliError {
        code: 3,
        msg: format!(
            "iteration did not converge in {iterations} steps; outputs are flagged partial"
        ),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let model = RoleModel::new(parse_model(&args.model)?, args.sizes)?;
    let inst = generate(&model, args.p_in, args.p_out, args.seed)?;
    io::save_edge_list(&inst.graph, suffixed(&args.out_prefix, ".edges.tsv"))?;
    io::save_partition(&inst.truth, suffixed(&args.out_prefix, ".truth.tsv"))?;
    println!("{}", inst.graph.edge_count());
    Ok(())
}

fn cmd_similarity(args: SimilarityArgs) -> Result<(), CliError> {
    let g = io::load_edge_list(&args.graph)?;
    let beta = resolve_beta(&args.beta, &g)?;
    let report = match args.rank {
        None => {
            let (s, rep) = full_similarity(&g, beta, args.tol, args.max_iter)?;
            io::save_dense(&s, &args.out)?;
            rep
        }
        Some(r) => {
            let (x, rep) = lowrank_similarity(&g, r, beta, args.tol, args.max_iter)?;
            io::save_factor(&x, &args.out)?;
            if args.materialize {
                if x.dim() > MATERIALIZE_MAX_DIM {
                    return Err(usage(format!(
                        "refusing to materialize a {0}x{0} matrix (limit {MATERIALIZE_MAX_DIM})",
                        x.dim()
                    )));
                }
                io::save_dense(&x.materialize(), suffixed(&args.out, ".dense.csv"))?;
            }
            rep
        }
    };
    io::save_convergence(&report, suffixed(&args.out, ".convergence.csv"))?;
    println!("{}", report.iterations);
    if !report.converged {
        return Err(not_converged(report.iterations));
    }
    Ok(())
}

fn cmd_roles(args: RolesArgs) -> Result<(), CliError> {
    let g = io::load_edge_list(&args.graph)?;
    let beta = match args.beta.as_str() {
        "auto" => None,
        v => Some(
            v.parse::<f64>()
                .map_err(|_| usage(format!("invalid --beta {v:?}")))?,
        ),
    };
    let opts = RoleOptions {
        rank: if args.full {
            None
        } else {
            Some(args.rank.unwrap_or(DEFAULT_RANK))
        },
        beta,
        resolution: args.resolution,
        seed: args.seed,
        tol: args.tol,
        max_iter: DEFAULT_MAX_ITER,
    };
    let found = extract_roles(&g, &opts)?;
    log::info!("β = {}", found.beta);
    io::save_hierarchy(&found.hierarchy, &args.out_prefix)?;
    for (i, level) in found.hierarchy.levels().iter().enumerate() {
        println!("{i}\t{}", level.cluster_count());
    }
    if !found.convergence.converged {
        return Err(not_converged(found.convergence.iterations));
    }
    Ok(())
}

fn cmd_ranksweep(args: RanksweepArgs) -> Result<(), CliError> {
    let g = io::load_edge_list(&args.graph)?;
    let beta = resolve_beta(&args.beta, &g)?;
    let n = g.node_count();
    if n < 2 {
        return Err(usage("rank sweep needs at least two nodes"));
    }
    let r_max = args.rmax.unwrap_or(DEFAULT_RANK.min(n - 1));
    let rep = rank_sweep(&g, r_max, beta, args.tol)?;
    io::save_rank_sweep(&rep, &args.out)?;
    match rep.knee {
        Some(k) => println!("{k}"),
        None => println!("none"),
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let a = io::load_partition(&args.a)?;
    let b = io::load_partition(&args.b)?;
    println!("{:.6}", nmi(&a, &b)?);
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let rg = parse_model(&args.model)?;
    let sizes = args
        .sizes
        .unwrap_or_else(|| vec![DEFAULT_ROLE_SIZE; rg.node_count()]);
    let model = RoleModel::new(rg, sizes)?;
    let cfg = GridConfig {
        step: args.step,
        realizations: args.realizations,
        rank: args.rank,
        seed_base: args.seed,
        resolution: args.resolution,
        ..GridConfig::default()
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| usage(format!("cannot start worker pool: {e}")))?;
    let grid = pool.install(|| nmi_grid(&model, &cfg))?;
    io::save_nmi_grid(&grid, &args.out)?;
    println!("{}", grid.cells.len());
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Similarity(a) => cmd_similarity(a),
        Command::Roles(a) => cmd_roles(a),
        Command::Ranksweep(a) => cmd_ranksweep(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

/// Parses `args`, runs the subcommand and maps the outcome to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses 2 for usage errors and 0 for --help / --version
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
