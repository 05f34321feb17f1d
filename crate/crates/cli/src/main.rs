//! `tspkern`: kernelize, solve, compare and generate instances.
//!
//! Exit codes: 0 success or equivalent, 1 infeasible or not equivalent,
//! 2 usage or parse error, 3 oracle or enumeration scale exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tspkern::gadgets::{self, HpGraph, MccInstance, Planted};
use tspkern::oracle::{self, Engine, OracleCaps, OracleError, OptResult};
use tspkern::pipeline::{kernelize, KernelConfig, Pipeline};
use tspkern::report::KernelError;
use tspkern::{parse_instance, Instance, KernelOutcome, Kind};

#[derive(Parser)]
#[command(name = "tspkern", version, about = "Kernelization toolkit for TSP, Subset TSP and Waypoint Routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a kernelization pipeline and write the kernel and its report.
    Kernelize(KernelizeArgs),
    /// Solve an instance exactly.
    Solve(SolveArgs),
    /// Check that two instances have the same answer.
    Verify(VerifyArgs),
    /// Write a generated instance.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct OracleArgs {
    /// Oracle caps such as `edges=14,waypoints=18,frontier=14`; overrides
    /// the TSPKERN_ORACLE_CAPS variable.
    #[arg(long)]
    caps: Option<String>,
}

impl OracleArgs {
    fn caps(&self) -> Result<OracleCaps, Failure> {
        match &self.caps {
            Some(spec) => OracleCaps::parse(spec),
            None => OracleCaps::from_env(),
        }
        .map_err(Failure::Usage)
    }
}

#[derive(Args)]
struct KernelizeArgs {
    /// Pipeline: fes, vc-tsp, vc-wrp, components or paths.
    #[arg(long)]
    regime: Pipeline,
    /// Component size bound for components and paths.
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Largest modulator searched for when the input has no hint.
    #[arg(long, default_value_t = 8)]
    k_max: usize,
    /// Limit on behavior candidates per component.
    #[arg(long, default_value_t = tspkern::modulator::DEFAULT_GUARD)]
    guard: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    input: PathBuf,
    /// Where the kernel goes; nothing is written when the input was decided.
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Multiplicity,
    Heldkarp,
    Frontier,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Auto => Engine::Auto,
            EngineArg::Multiplicity => Engine::Multiplicity,
            EngineArg::Heldkarp => Engine::HeldKarp,
            EngineArg::Frontier => Engine::Frontier,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "auto")]
    engine: EngineArg,
    /// Run every applicable engine and compare the optima.
    #[arg(long)]
    cross_check: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    oracle: OracleArgs,
    input: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    oracle: OracleArgs,
    first: PathBuf,
    second: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    what: Generator,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Tsp,
    Stsp,
    Wrp,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Tsp => Kind::Tsp,
            KindArg::Stsp => Kind::SubTsp,
            KindArg::Wrp => Kind::Wrp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Fes,
    Vc,
    Components,
    Paths,
}

impl From<RegimeArg> for Planted {
    fn from(r: RegimeArg) -> Planted {
        match r {
            RegimeArg::Fes => Planted::FeedbackEdges,
            RegimeArg::Vc => Planted::VertexCover,
            RegimeArg::Components => Planted::Components,
            RegimeArg::Paths => Planted::Paths,
        }
    }
}

#[derive(Subcommand)]
enum Generator {
    /// Cyclic chain of `l` cherries.
    Selection {
        #[arg(long)]
        l: usize,
    },
    /// Cycle of `3 l` waypoints.
    Cycle {
        #[arg(long)]
        l: usize,
    },
    /// Random multicolored clique instance reduced to Subset TSP.
    Mcc {
        #[arg(long)]
        k: usize,
        /// Vertices per color class before padding.
        #[arg(long)]
        n: usize,
        /// Probability of each edge between different classes.
        #[arg(long, default_value_t = 0.7)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random graphs joined through an apex.
    ComposeFn(ComposeArgs),
    /// Random graphs joined through cyclic connectors.
    ComposeDegtw(ComposeArgs),
    /// Random instance with a planted modulator or feedback edge set.
    Planted {
        #[arg(long, value_enum, default_value = "tsp")]
        kind: KindArg,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        wmin: u64,
        #[arg(long, default_value_t = 20)]
        wmax: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ComposeArgs {
    /// Number of graphs.
    #[arg(long)]
    t: usize,
    /// Vertices per graph.
    #[arg(long)]
    k: usize,
    /// Edge probability of the random graphs.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Why a command stopped, mapped to the exit code contract.
#[derive(Debug)]
enum Failure {
    Negative,
    Usage(String),
    Scale(String),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Negative => 1,
            Failure::Other(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Scale(_) => 3,
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::ScaleExceeded { .. } => Failure::Scale(e.to_string()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(Failure::Other),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn kernel_failure(e: KernelError) -> Failure {
    let msg = e.to_string();
    match e {
        KernelError::GuardExceeded(_) => Failure::Scale(msg),
        KernelError::KindMismatch { ref pipeline, kind } if pipeline == "paths" && kind == Kind::Wrp => Failure::Usage(
            format!("{msg}: no kernel is known for waypoint routing parameterized by a path modulator (open problem)"),
        ),
        KernelError::Rule(_) | KernelError::BlendNotFound => Failure::Other(e.into()),
        _ => Failure::Usage(msg),
    }
}

fn cmd_kernelize(args: &KernelizeArgs) -> Result<(), Failure> {
    let inst = read_instance(&args.input)?;
    let config = KernelConfig {
        pipeline: args.regime,
        r: args.r,
        k_max: args.k_max,
        guard: args.guard,
    };
    let result = kernelize(&inst, &config).map_err(kernel_failure)?;
    let report = match args.format {
        Format::Text => result.report.to_text(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&result.report).map_err(anyhow::Error::from)?;
            s.push('\n');
            s
        }
    };
    if let (KernelOutcome::Kernel(kernel), Some(out)) = (&result.outcome, &args.output) {
        let comments = vec![format!("kernel of {} by pipeline {}", args.input.display(), args.regime)];
        write_text(Some(out), &kernel.render_with_comments(&comments))?;
    }
    write_text(args.report.as_deref(), &report)
}

fn solve_line(res: &OptResult) -> String {
    match (res.feasible, res.opt_weight) {
        (true, Some(w)) => format!("yes {w}"),
        (false, Some(w)) => format!("no {w}"),
        _ => "no".to_string(),
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<(), Failure> {
    let inst = read_instance(&args.input)?;
    let caps = args.oracle.caps()?;
    let res = oracle::solve(&inst, &caps, args.engine.into())?;
    let mut checks = Vec::new();
    if args.cross_check {
        for (name, engine) in [
            ("multiplicity", Engine::Multiplicity),
            ("heldkarp", Engine::HeldKarp),
            ("frontier", Engine::Frontier),
        ] {
            if let Ok(other) = oracle::solve(&inst, &caps, engine) {
                checks.push((name, other.opt_weight));
            }
        }
    }
    let agree = checks.iter().all(|(_, w)| *w == res.opt_weight);
    match args.format {
        Format::Text => {
            println!("{}", solve_line(&res));
            if let Some(w) = &res.witness {
                let ks: Vec<String> = w.multiplicity.iter().map(|k| k.to_string()).collect();
                println!("witness {}", ks.join(" "));
            }
            for (name, w) in &checks {
                let shown = w.map_or("none".to_string(), |w| w.to_string());
                println!("engine {name} {shown}");
            }
        }
        Format::Json => {
            let engines: serde_json::Map<String, serde_json::Value> =
                checks.iter().map(|(n, w)| (n.to_string(), json!(w))).collect();
            let value = json!({
                "feasible": res.feasible,
                "opt_weight": res.opt_weight,
                "witness": res.witness.as_ref().map(|w| &w.multiplicity),
                "engines": engines,
            });
            println!("{}", serde_json::to_string_pretty(&value).map_err(anyhow::Error::from)?);
        }
    }
    if !agree {
        return Err(Failure::Other(anyhow!("engines disagree on the optimum")));
    }
    if res.feasible {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let a = read_instance(&args.first)?;
    let b = read_instance(&args.second)?;
    let caps = args.oracle.caps()?;
    let va = oracle::verdict(&a, &caps)?;
    let vb = oracle::verdict(&b, &caps)?;
    let word = |v: bool| if v { "yes" } else { "no" };
    println!("{} {}", args.first.display(), word(va));
    println!("{} {}", args.second.display(), word(vb));
    if va == vb {
        println!("equivalent");
        Ok(())
    } else {
        println!("not equivalent");
        Err(Failure::Negative)
    }
}

fn random_graphs(args: &ComposeArgs) -> Result<Vec<HpGraph>, Failure> {
    if !(0.0..=1.0).contains(&args.density) {
        return Err(Failure::Usage("density must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    Ok((0..args.t)
        .map(|_| HpGraph {
            n: args.k,
            edges: (0..args.k)
                .flat_map(|u| (u + 1..args.k).map(move |v| (u, v)))
                .filter(|_| rng.gen_bool(args.density))
                .collect(),
        })
        .collect())
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), Failure> {
    let usage = |e: gadgets::GadgetError| Failure::Usage(e.to_string());
    let (inst, comments) = match &args.what {
        Generator::Selection { l } => (gadgets::selection_gadget(*l).map_err(usage)?, vec![format!("selection l={l}")]),
        Generator::Cycle { l } => (gadgets::cycle_gadget(*l).map_err(usage)?, vec![format!("cycle l={l}")]),
        Generator::Mcc { k, n, density, seed } => {
            if !(0.0..=1.0).contains(density) {
                return Err(Failure::Usage("density must lie in [0, 1]".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut edges = Vec::new();
            for i in 0..*k {
                for j in i + 1..*k {
                    for a in 0..*n {
                        for b in 0..*n {
                            if rng.gen_bool(*density) {
                                edges.push(((i, a), (j, b)));
                            }
                        }
                    }
                }
            }
            let mcc = MccInstance::padded(*k, *n, &edges).map_err(usage)?;
            let inst = gadgets::mcc_to_subtsp(&mcc).map_err(usage)?;
            let clique = if mcc.has_multicolored_clique() { "yes" } else { "no" };
            (
                inst,
                vec![
                    format!("mcc k={k} n={n} density={density} seed={seed}"),
                    format!("multicolored clique: {clique}"),
                ],
            )
        }
        Generator::ComposeFn(c) | Generator::ComposeDegtw(c) => {
            let graphs = random_graphs(c)?;
            let (name, inst) = match &args.what {
                Generator::ComposeFn(_) => ("compose-fn", gadgets::compose_fn(&graphs)),
                _ => ("compose-degtw", gadgets::compose_degtw(&graphs)),
            };
            let all_hp = graphs.iter().all(HpGraph::has_hamiltonian_path);
            (
                inst.map_err(usage)?,
                vec![
                    format!("{name} t={} k={} density={} seed={}", c.t, c.k, c.density, c.seed),
                    format!("all graphs have a Hamiltonian path: {}", if all_hp { "yes" } else { "no" }),
                ],
            )
        }
        Generator::Planted {
            kind,
            regime,
            k,
            r,
            n,
            wmin,
            wmax,
            seed,
        } => {
            let kind = Kind::from(*kind);
            let inst =
                gadgets::gen_planted(kind, (*regime).into(), *k, *r, *n, (*wmin, *wmax), *seed).map_err(usage)?;
            let regime = regime.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
            (
                inst,
                vec![format!(
                    "planted kind={kind} regime={regime} k={k} r={r} n={n} weights={wmin}..{wmax} seed={seed}"
                )],
            )
        }
    };
    write_text(args.out.as_deref(), &inst.render_with_comments(&comments))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Kernelize(a) => cmd_kernelize(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Negative => {}
                Failure::Usage(m) | Failure::Scale(m) => eprintln!("tspkern: {m}"),
                Failure::Other(e) => eprintln!("tspkern: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
