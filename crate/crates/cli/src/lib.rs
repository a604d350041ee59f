//! `whiteboard` command-line front end.
//!
//! Exit codes: 0 success, 1 property violated, 2 deadlock, 3 usage or I/O
//! error. Data goes to stdout, diagnostics to stderr.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use whiteboard::adversary::{make_scheduler, sweep, SchedulerKind, SweepError, SweepLimits, SweepOptions, SweepReport};
use whiteboard::engine::{lift_to, run, BudgetConfig, Model, Output, Protocol, RunError};
use whiteboard::graph::{
    bfs_layers, generate, has_square, is_connected, is_two_cliques, GadgetKind, GadgetSpec, LabeledGraph, NodeId,
    ProblemInstance,
};
use whiteboard::protocols;
use whiteboard::verify::{check_output, lemma1_audit, Family, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_DEADLOCK: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "whiteboard", version, about = "Shared-whiteboard model simulator and checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a gadget or simple graph and write it to a graph file.
    Gen(GenArgs),
    /// Execute one run under a single scheduler.
    Run(RunArgs),
    /// Explore every schedule and check each outcome against the oracle.
    Sweep(SweepArgs),
    /// Count a graph family and compare with the board capacity.
    Audit(AuditArgs),
    /// Print the ground truth for a problem on a graph.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    MisGadget,
    ClassC,
    BfsGadget,
    TwoCliques,
    Cycle,
    Path,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    kind: GenKind,
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long)]
    i: Option<NodeId>,
    #[arg(long)]
    j: Option<NodeId>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolName {
    Mis,
    TwoCliques,
    SquareC,
    SpanningTree,
    Bfs,
    BfsBipartite,
    NumEdges,
}

#[derive(Debug, Args)]
struct ProtocolArgs {
    #[arg(long)]
    protocol: ProtocolName,
    #[arg(long)]
    x: Option<NodeId>,
    #[arg(long)]
    root: Option<NodeId>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, value_parser = parse_model)]
    model: Model,
    /// fixed:ORDER | min-id | max-id | random:SEED
    #[arg(long, value_parser = parse_scheduler)]
    scheduler: SchedulerKind,
    /// Payload budget constant c_msg.
    #[arg(long, default_value_t = 8)]
    budget: u32,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, value_parser = parse_model)]
    model: Model,
    #[arg(long, default_value_t = 8)]
    budget: u32,
    #[arg(long, default_value_t = 10_000_000)]
    max_states: u64,
    /// Seconds.
    #[arg(long, default_value_t = 60)]
    max_time: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Disable state memoization.
    #[arg(long)]
    no_memo: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    budget: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemName {
    Mis,
    TwoCliques,
    Square,
    SpanningTree,
    Bfs,
    Connectivity,
    NumEdges,
    Build,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    problem: ProblemName,
    #[arg(long)]
    x: Option<NodeId>,
    #[arg(long)]
    root: Option<NodeId>,
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse()
}

fn parse_scheduler(s: &str) -> Result<SchedulerKind, String> {
    s.parse().map_err(|e: whiteboard::adversary::AdversaryError| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

/// Failure carrying its exit code.
struct Exit {
    code: i32,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Exit {
    Exit {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

fn read_graph(path: &Path) -> Result<LabeledGraph, Exit> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Exit> {
    fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn io_err(e: std::io::Error) -> Exit {
    usage(format!("output: {e}"))
}

/// Checks that exactly the parameters `want` were given, within `1..=n`.
fn params(
    name: &str,
    x: Option<NodeId>,
    root: Option<NodeId>,
    want_x: bool,
    want_root: bool,
    n: usize,
) -> Result<(), Exit> {
    for (flag, value, wanted) in [("--x", x, want_x), ("--root", root, want_root)] {
        match (value, wanted) {
            (None, true) => return Err(usage(format!("{name} requires {flag}"))),
            (Some(_), false) => return Err(usage(format!("{name} does not take {flag}"))),
            (Some(v), true) if !(1..=n).contains(&v) => {
                return Err(usage(format!("{flag} {v} is not a node of the {n}-node graph")))
            }
            _ => {}
        }
    }
    Ok(())
}

fn build_protocol(args: &ProtocolArgs, n: usize) -> Result<(Arc<dyn Protocol>, ProblemInstance), Exit> {
    use ProtocolName::*;
    let name = format!("{:?}", args.protocol).to_lowercase();
    let (want_x, want_root) = match args.protocol {
        Mis => (true, false),
        SpanningTree | Bfs | BfsBipartite => (false, true),
        TwoCliques | SquareC | NumEdges => (false, false),
    };
    params(&name, args.x, args.root, want_x, want_root, n)?;
    let x = args.x.unwrap_or(0);
    let root = args.root.unwrap_or(0);
    Ok(match args.protocol {
        Mis => (Arc::new(protocols::mis_simsync(x)), ProblemInstance::Mis { x }),
        TwoCliques => (Arc::new(protocols::two_cliques_simsync()), ProblemInstance::TwoCliques),
        SquareC => (Arc::new(protocols::square_class_c_freeasync()), ProblemInstance::Square),
        SpanningTree => (
            Arc::new(protocols::spanning_tree_freeasync(root)),
            ProblemInstance::SpanningTree { root },
        ),
        Bfs => (Arc::new(protocols::bfs_freesync(root)), ProblemInstance::Bfs { root }),
        BfsBipartite => (Arc::new(protocols::bfs_bipartite_freeasync(root)), ProblemInstance::Bfs { root }),
        NumEdges => (Arc::new(protocols::num_edges_simasync()), ProblemInstance::NumEdges),
    })
}

/// Protocol lifted to `model` when the model sits above its own.
fn protocol_for_model(args: &ProtocolArgs, n: usize, model: Model) -> Result<(Arc<dyn Protocol>, ProblemInstance), Exit> {
    let (p, problem) = build_protocol(args, n)?;
    let p = lift_to(p, model).map_err(|e| usage(e.to_string()))?;
    Ok((p, problem))
}

fn cmd_gen(a: &GenArgs) -> Result<i32, Exit> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("--kind {:?} requires {flag}", a.kind)));
    let kind = match a.kind {
        GenKind::MisGadget => GadgetKind::MisGadget { i: need(a.i, "--i")?, j: need(a.j, "--j")? },
        GenKind::ClassC => GadgetKind::ClassC { i: need(a.i, "--i")?, j: need(a.j, "--j")? },
        GenKind::BfsGadget => GadgetKind::BfsGadget { i: need(a.i, "--i")? },
        GenKind::TwoCliques => GadgetKind::TwoCliques { n: need(a.n, "--n")? },
        GenKind::Cycle => GadgetKind::Cycle { n: need(a.n, "--n")? },
        GenKind::Path => GadgetKind::Path { n: need(a.n, "--n")? },
    };
    let uses_base = matches!(a.kind, GenKind::MisGadget | GenKind::ClassC | GenKind::BfsGadget);
    let spec = match (&a.base, uses_base) {
        (Some(path), true) => GadgetSpec::with_base(kind, read_graph(path)?),
        (None, true) => return Err(usage("this gadget requires --base")),
        (Some(_), false) => return Err(usage("this kind does not take --base")),
        (None, false) => GadgetSpec::new(kind),
    };
    let g = generate(&spec).map_err(|e| usage(e.to_string()))?;
    write_file(&a.out, g.to_file_string().as_bytes())?;
    Ok(EXIT_OK)
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Exit> {
    let g = read_graph(&a.graph)?;
    let (p, problem) = protocol_for_model(&a.protocol, g.n(), a.model)?;
    if let SchedulerKind::FixedOrder(order) = &a.scheduler {
        if order.len() != g.n() {
            return Err(usage(format!("fixed order lists {} ids for a {}-node graph", order.len(), g.n())));
        }
    }
    let sched = make_scheduler(a.scheduler.clone()).map_err(|e| usage(e.to_string()))?;
    match run(&g, p.as_ref(), a.model, &sched, BudgetConfig::new(a.budget)) {
        Ok(res) => {
            if let Some(path) = &a.trace {
                write_file(path, res.trace_jsonl().as_bytes())?;
            }
            writeln!(out, "{}", res.output).map_err(io_err)?;
            match check_output(&problem, &g, &res.output) {
                Ok(Verdict::Correct) => Ok(EXIT_OK),
                Ok(Verdict::Incorrect(reason)) => {
                    writeln!(err, "output incorrect: {reason}").map_err(io_err)?;
                    Ok(EXIT_VIOLATED)
                }
                Err(e) => Err(usage(format!("cannot verify output: {e}"))),
            }
        }
        Err(e @ RunError::Deadlock { .. }) => {
            if let Some(path) = &a.trace {
                let mut buf = Vec::new();
                e.write_partial_trace(&mut buf).map_err(io_err)?;
                write_file(path, &buf)?;
            }
            writeln!(err, "{e}").map_err(io_err)?;
            Ok(EXIT_DEADLOCK)
        }
        Err(e @ (RunError::Budget { .. } | RunError::Decide(_))) => {
            writeln!(err, "{e}").map_err(io_err)?;
            Ok(EXIT_VIOLATED)
        }
        Err(e) => Err(usage(e.to_string())),
    }
}

fn summarize(r: &SweepReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "exhaustive: {}", r.exhaustive)?;
    writeln!(out, "schedules_explored: {}", r.schedules_explored)?;
    writeln!(out, "distinct_states: {}", r.distinct_states)?;
    writeln!(out, "failures: {}", r.failures.len())?;
    writeln!(out, "deadlocks: {}", r.deadlocks.len())?;
    writeln!(out, "budget_violations: {}", r.budget_violations.len())?;
    let outputs: Vec<String> = r.distinct_outputs.iter().map(Output::to_string).collect();
    writeln!(out, "distinct_outputs: {}", outputs.join(" | "))
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Exit> {
    let g = read_graph(&a.graph)?;
    let (p, problem) = protocol_for_model(&a.protocol, g.n(), a.model)?;
    // The oracle must accept the instance before any exploration starts.
    if let ProblemInstance::TwoCliques = problem {
        is_two_cliques(&g).map_err(|e| usage(e.to_string()))?;
    }
    let check = |o: &Output, _: &whiteboard::engine::Whiteboard| {
        check_output(&problem, &g, o).unwrap_or_else(|e| Verdict::Incorrect(e.to_string()))
    };
    let opts = SweepOptions {
        limits: SweepLimits {
            max_states: a.max_states,
            max_time: Duration::from_secs(a.max_time),
        },
        budget: BudgetConfig::new(a.budget),
        memoize: !a.no_memo,
        check_timing: true,
        jobs: a.jobs.max(1),
    };
    let (report, complete) = match sweep(&g, p.as_ref(), a.model, &check, opts) {
        Ok(r) => (r, true),
        Err(SweepError::LimitExceeded(r)) => (*r, false),
        Err(SweepError::Run(e)) => return Err(usage(e.to_string())),
    };
    summarize(&report, out).map_err(io_err)?;
    if let Some(path) = &a.report {
        let json = serde_json::to_string_pretty(&report).map_err(|e| usage(e.to_string()))?;
        write_file(path, json.as_bytes())?;
    }
    for f in report.failures.iter().take(5) {
        writeln!(err, "failure {:?}: {}", f.schedule, f.verdict).map_err(io_err)?;
    }
    for d in report.deadlocks.iter().take(5) {
        writeln!(err, "deadlock after {:?}", d).map_err(io_err)?;
    }
    if !report.failures.is_empty() || !report.budget_violations.is_empty() {
        Ok(EXIT_VIOLATED)
    } else if !report.deadlocks.is_empty() {
        Ok(EXIT_DEADLOCK)
    } else if !complete {
        Err(usage("sweep limits reached before the schedule tree was exhausted"))
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_audit(a: &AuditArgs, out: &mut dyn Write) -> Result<i32, Exit> {
    let report = lemma1_audit(a.family, a.n, BudgetConfig::new(a.budget)).map_err(|e| usage(e.to_string()))?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| usage(e.to_string()))?;
    writeln!(out, "{json}").map_err(io_err)?;
    Ok(EXIT_OK)
}

/// Every maximal independent set containing `x`, in lexicographic order.
fn all_mis_containing(g: &LabeledGraph, x: NodeId) -> Vec<BTreeSet<NodeId>> {
    fn extend(g: &LabeledGraph, v: NodeId, cur: &mut BTreeSet<NodeId>, acc: &mut Vec<BTreeSet<NodeId>>, x: NodeId) {
        if v > g.n() {
            if whiteboard::graph::mis_valid(g, x, cur) {
                acc.push(cur.clone());
            }
            return;
        }
        if cur.iter().all(|&u| !g.has_edge(u, v)) {
            cur.insert(v);
            extend(g, v + 1, cur, acc, x);
            cur.remove(&v);
        }
        if v != x {
            extend(g, v + 1, cur, acc, x);
        }
    }
    let mut acc = Vec::new();
    extend(g, 1, &mut BTreeSet::new(), &mut acc, x);
    acc
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32, Exit> {
    let g = read_graph(&a.graph)?;
    let name = format!("{:?}", a.problem).to_lowercase();
    let (want_x, want_root) = match a.problem {
        ProblemName::Mis => (true, false),
        ProblemName::Bfs | ProblemName::SpanningTree => (false, true),
        _ => (false, false),
    };
    params(&name, a.x, a.root, want_x, want_root, g.n())?;
    let text = match a.problem {
        ProblemName::Square => has_square(&g).to_string(),
        ProblemName::Connectivity => is_connected(&g).to_string(),
        ProblemName::TwoCliques => is_two_cliques(&g).map_err(|e| usage(e.to_string()))?.to_string(),
        ProblemName::NumEdges => g.edge_count().to_string(),
        ProblemName::Build => Output::AdjacencyMatrix(g.adjacency_matrix()).to_string(),
        ProblemName::Mis => {
            let x = a.x.expect("validated");
            all_mis_containing(&g, x)
                .into_iter()
                .map(|s| Output::VertexSet(s).to_string())
                .collect::<Vec<_>>()
                .join("\n")
        }
        ProblemName::Bfs => {
            let items: Vec<String> = bfs_layers(&g, a.root.expect("validated"))
                .into_iter()
                .map(|(v, d)| match d {
                    Some(d) => format!("{v}:{d}"),
                    None => format!("{v}:unreachable"),
                })
                .collect();
            format!("{{{}}}", items.join(", "))
        }
        ProblemName::SpanningTree => {
            let layers = bfs_layers(&g, a.root.expect("validated"));
            if layers.values().any(Option::is_none) {
                Output::NotConnected.to_string()
            } else {
                let parents = layers
                    .iter()
                    .filter_map(|(&v, &d)| {
                        let d = d?;
                        let p = g.neighbors(v).iter().copied().find(|u| layers[u] == Some(d.wrapping_sub(1)))?;
                        (d > 0).then_some((v, p))
                    })
                    .collect();
                Output::ParentMap(parents).to_string()
            }
        }
    };
    writeln!(out, "{text}").map_err(io_err)?;
    Ok(EXIT_OK)
}

/// Parses `argv` (including the program name) and runs the command, writing
/// data to `out` and diagnostics to `err`.
pub fn dispatch_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Audit(a) => cmd_audit(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Exit { code, msg }) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
