//! `netctl` command implementations. Each `cmd_*` function returns its
//! artifact; [`run`] writes it out and maps failures to exit codes.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use netctl_core::audit::{audit_asymptotics, audit_cutset, audit_theorem1, audit_theorem2};
use netctl_core::io::{fmt_f64, read_vector_csv, write_rows_csv, NetworkFile};
use netctl_core::metrics::{metrics_report, optimal_target_input, target_control_energy};
use netctl_core::netgraph::{min_separating_cutset, random_geometric};
use netctl_core::{AuditReport, ConsensusSystem, Error, InputSequence, NodeSet};

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const GENERATION: i32 = 2;
    pub const NOT_CONTROLLABLE: i32 = 3;
    pub const NOT_ERGODIC: i32 = 4;
    pub const AUDIT_VIOLATION: i32 = 5;
    pub const NOT_A_CUTSET: i32 = 6;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ConnectivityFailure { .. } => exit::GENERATION,
            Error::NotControllable { .. } => exit::NOT_CONTROLLABLE,
            Error::NotErgodic { .. } => exit::NOT_ERGODIC,
            Error::NotACutset => exit::NOT_A_CUTSET,
            _ => exit::FAILURE,
        };
        Self { code, error: e.into() }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        Self { code: exit::FAILURE, error }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "netctl", version, about = "Gramian-based target-control analysis of network consensus models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random geometric network on the unit square.
    Gen(GenArgs),
    /// Controllability and security metrics of the target set.
    Metrics(MetricsArgs),
    /// Audit the structural Gramian properties on a network.
    Audit(AuditArgs),
    /// Per-node control energy `1 / W_cc`.
    NodeEnergies(NodeEnergiesArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.25)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Source nodes (default: node 0).
    #[arg(long, value_delimiter = ',')]
    pub sources: Option<Vec<usize>>,
    /// Target nodes (default: every node).
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<usize>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub kf: usize,
    /// Single-column CSV goal vector for the target nodes.
    #[arg(long)]
    pub goal: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where the optimal input CSV goes when a goal is given.
    #[arg(long, default_value = "optimal_input.csv")]
    pub input_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub kf: usize,
    /// Check groups to run.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub theorems: Vec<u8>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Separating cutset for check groups 3 and 4.
    #[arg(long, value_delimiter = ',', conflicts_with = "min_cutset")]
    pub cutset: Option<Vec<usize>>,
    /// Use the minimum separating cutset between sources and targets.
    #[arg(long)]
    pub min_cutset: bool,
    /// Horizons for check group 5 (default: kf, 2kf, 4kf).
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    /// Node set for the Gramian-submatrix checks of groups 1 and 5
    /// (default: the targets).
    #[arg(long, value_delimiter = ',')]
    pub bset: Option<Vec<usize>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NodeEnergiesArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub kf: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn require_horizon(kf: usize) -> CliResult<()> {
    if kf == 0 {
        return Err(anyhow::anyhow!("--kf must be at least 1").into());
    }
    Ok(())
}

pub fn load_system(path: &Path) -> CliResult<ConsensusSystem> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (g, sources, targets) = NetworkFile::read(BufReader::new(file))?.into_parts()?;
    Ok(ConsensusSystem::new(g, sources, targets)?)
}

pub fn cmd_gen(args: &GenArgs) -> CliResult<NetworkFile> {
    let g = random_geometric(args.n, args.radius, args.seed)?;
    let sources = NodeSet::new(args.sources.clone().unwrap_or_else(|| vec![0]));
    let targets = args.targets.clone().map_or_else(|| NodeSet::all(args.n), NodeSet::new);
    sources.validate(args.n)?;
    targets.validate(args.n)?;
    Ok(NetworkFile::from_graph(&g, &sources, &targets))
}

pub struct MetricsOutput {
    pub report: serde_json::Value,
    pub input: Option<InputSequence>,
}

pub fn cmd_metrics(args: &MetricsArgs) -> CliResult<MetricsOutput> {
    require_horizon(args.kf)?;
    let sys = load_system(&args.net)?;
    let report = metrics_report(&sys, args.kf)?;
    if !report.controllable {
        return Err(Error::NotControllable { lambda_min: report.lambda_min, lambda_max: report.lambda_max }.into());
    }
    let mut json = serde_json::to_value(&report).context("serializing metrics")?;
    let input = match &args.goal {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let goal = read_vector_csv(BufReader::new(file))?;
            let energy = target_control_energy(&sys, args.kf, &goal)?;
            json["E"] = serde_json::json!(energy);
            Some(optimal_target_input(&sys, args.kf, &goal)?)
        }
        None => None,
    };
    Ok(MetricsOutput { report: json, input })
}

pub fn cmd_audit(args: &AuditArgs) -> CliResult<AuditReport> {
    require_horizon(args.kf)?;
    let sys = load_system(&args.net)?;
    let bset = match &args.bset {
        Some(ids) => NodeSet::new(ids.iter().copied()),
        None => sys.targets().clone(),
    };
    let wants = |t: u8| args.theorems.contains(&t);
    let mut report = AuditReport::default();
    if wants(1) {
        report.merge(audit_theorem1(&sys, &bset, args.kf)?);
    }
    if wants(2) {
        report.merge(audit_theorem2(&sys, args.kf, args.samples, args.seed)?);
    }
    if wants(3) || wants(4) {
        let cutset = match (&args.cutset, args.min_cutset) {
            (Some(ids), _) => NodeSet::new(ids.iter().copied()),
            (None, true) => min_separating_cutset(sys.graph(), sys.sources(), sys.targets()),
            (None, false) => return Err(anyhow::anyhow!("check groups 3 and 4 need --cutset or --min-cutset").into()),
        };
        let mut cut = audit_cutset(&sys, args.kf, &cutset, args.samples, args.seed)?;
        cut.checks.retain(|c| (wants(3) && c.id.starts_with("T3")) || (wants(4) && c.id.starts_with("T4")));
        report.merge(cut);
    }
    if wants(5) {
        let horizons = args.horizons.clone().unwrap_or_else(|| vec![args.kf, 2 * args.kf, 4 * args.kf]);
        report.merge(audit_asymptotics(&sys, &bset, &horizons)?);
    }
    Ok(report)
}

/// Headerless CSV rows `node_id,x,y,energy`; blank coordinates for
/// non-geometric networks and `inf` for nodes not reached by the horizon.
pub fn cmd_node_energies(args: &NodeEnergiesArgs) -> CliResult<String> {
    require_horizon(args.kf)?;
    let sys = load_system(&args.net)?;
    let report = netctl_core::gramian::compute_gramian(&sys, args.kf)?;
    let positions = sys.graph().positions();
    let mut out = String::new();
    for c in 0..sys.n() {
        let (x, y) = positions.map_or((String::new(), String::new()), |p| (fmt_f64(p[c][0]), fmt_f64(p[c][1])));
        let energy = netctl_core::metrics::node_energy_on(&report.w, c).map_or_else(|_| "inf".to_owned(), fmt_f64);
        out.push_str(&format!("{c},{x},{y},{energy}\n"));
    }
    Ok(out)
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => stdout.write_all(bytes).context("writing stdout")?,
    }
    Ok(())
}

/// Pretty JSON with keys in sorted order.
pub fn to_sorted_json(value: &serde_json::Value) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value).context("serializing")? + "\n")
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Gen(args) => {
            let file = cmd_gen(args)?;
            let mut buf = Vec::new();
            file.write(&mut buf)?;
            emit(args.out.as_deref(), stdout, &buf)?;
        }
        Command::Metrics(args) => {
            let out = cmd_metrics(args)?;
            if let Some(input) = &out.input {
                let mut buf = Vec::new();
                write_rows_csv(&mut buf, &input.inputs)?;
                std::fs::write(&args.input_out, buf).with_context(|| format!("writing {}", args.input_out.display()))?;
            }
            emit(args.out.as_deref(), stdout, to_sorted_json(&out.report)?.as_bytes())?;
        }
        Command::Audit(args) => {
            let report = cmd_audit(args)?;
            let json = serde_json::to_value(&report).context("serializing audit")?;
            emit(args.out.as_deref(), stdout, to_sorted_json(&json)?.as_bytes())?;
            let violations: Vec<_> = report.violations().collect();
            if !violations.is_empty() {
                for v in violations {
                    eprintln!("violation {}: {:?}", v.id, v.witness);
                }
                return Ok(exit::AUDIT_VIOLATION);
            }
        }
        Command::NodeEnergies(args) => {
            let csv = cmd_node_energies(args)?;
            emit(args.out.as_deref(), stdout, csv.as_bytes())?;
        }
    }
    Ok(exit::OK)
}
