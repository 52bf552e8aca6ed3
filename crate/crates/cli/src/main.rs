//! `vaxnet`: generate, solve, validate, benchmark and export vaccine
//! distribution network instances.
//!
//! Exit codes: 0 success, 1 validation found violations, 2 usage or
//! invalid input, 3 infeasible, 4 time/node/guard limit hit, 5 I/O.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mipcore::{export_mps, BnbStatus, SolveConfig};
use vaxnet::bench::{run_bench, BenchOptions};
use vaxnet::cyclic::{CyclicError, DEFAULT_EPSILON};
use vaxnet::generator::{ArcPolicy, GeneratorError};
use vaxnet::instance::InstanceError;
use vaxnet::oracle::{has_errors, oracle_enumerate_with_guard, OracleError, Severity, DEFAULT_GUARD};
use vaxnet::solution::SolutionFileError;
use vaxnet::{
    build_program1, cyclic_solve, generate_instance, read_instance, solve_exact, validate_solution, write_instance,
    CyclicOptions, Density, GeneratorConfig, Instance, NetworkSolution,
};

const EXIT_VIOLATIONS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_LIMIT: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "vaxnet", version, about = "Vaccine distribution network design")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// LP workers for branch-and-bound and concurrent cyclic replicas.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
    /// Wall-clock limit per solve, in seconds.
    #[arg(long, global = true)]
    time_limit_s: Option<f64>,
    #[arg(long, global = true)]
    node_limit: Option<usize>,
    /// Absolute improvement below which the cyclic heuristic stops.
    #[arg(long, global = true, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Independent cyclic replicas; the cheapest result is kept.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    multistart: u64,
    /// Let hubs closed by an earlier step reopen.
    #[arg(long, global = true)]
    allow_reopen: bool,
    /// Generator seed, or cyclic seed for `solve` (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic instance.
    Generate(GenerateArgs),
    /// Solve an instance and write the solution.
    Solve(SolveArgs),
    /// Check a solution against an instance.
    Validate {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Compare exact and cyclic solves over a set of instances.
    Bench(BenchArgs),
    /// Write the model in another format.
    Export {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Mps)]
        format: ExportFormat,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// JSON file with generator fields; flags given explicitly override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    hubs: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    clinics: Option<u64>,
    #[arg(long)]
    density: Option<Density>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    devices: Option<usize>,
    #[arg(long)]
    region_side: Option<f64>,
    #[arg(long)]
    volume_scale: Option<f64>,
    #[arg(long)]
    per_km_cost: Option<f64>,
    #[arg(long)]
    fixed_trip_cost: Option<f64>,
    #[arg(long)]
    device_cost_scale: Option<f64>,
    /// Keep only arcs no longer than this radius.
    #[arg(long)]
    cutoff_radius: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Cyclic,
    Oracle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportFormat {
    Mps,
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    /// Initial frequency vector for the cyclic method, e.g. `1,2,0`.
    #[arg(long, value_delimiter = ',')]
    seed_freq: Option<Vec<u8>>,
    /// Oracle enumeration guard.
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    guard: f64,
    /// Solution file; defaults to `<instance stem>.solution.json`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the cyclic objective trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of instance files (`*.json`); otherwise a generator sweep.
    #[arg(long, conflicts_with_all = ["hubs", "clinics", "densities", "seeds"])]
    dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    hubs: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    clinics: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "sparse,moderate,dense")]
    densities: Vec<Density>,
    /// Generator seeds `0..seeds` per size and density.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Skip the oracle cross-check.
    #[arg(long)]
    no_oracle: bool,
    /// Print an aligned table instead of CSV on stdout.
    #[arg(long)]
    pretty: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Self { code, message: message.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(&cli.global, args),
        Command::Solve(args) => cmd_solve(&cli.global, args),
        Command::Validate { instance, solution } => cmd_validate(&instance, &solution),
        Command::Bench(args) => cmd_bench(&cli.global, args),
        Command::Export { instance, format, output } => cmd_export(&instance, format, &output),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn solve_config(g: &Global) -> SolveConfig {
    let mut cfg = SolveConfig::default().with_threads(g.threads as usize);
    if let Some(s) = g.time_limit_s {
        cfg = cfg.with_time_limit(Duration::from_secs_f64(s));
    }
    if let Some(n) = g.node_limit {
        cfg = cfg.with_node_limit(n);
    }
    cfg
}

fn check_global(g: &Global) -> Result<(), Failure> {
    if !(g.epsilon > 0.0) {
        return Err(Failure::new(EXIT_USAGE, "--epsilon must be positive"));
    }
    if g.time_limit_s.is_some_and(|s| !(s >= 0.0) || !s.is_finite()) {
        return Err(Failure::new(EXIT_USAGE, "--time-limit-s must be a finite non-negative number"));
    }
    Ok(())
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    read_instance(path).map_err(|e| match e {
        InstanceError::Invalid(_) => Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())),
        InstanceError::Parse { .. } => Failure::new(EXIT_IO, format!("{}: {e}", path.display())),
        InstanceError::Io { .. } => Failure::new(EXIT_IO, e),
    })
}

fn io_failure(e: impl Display) -> Failure {
    Failure::new(EXIT_IO, e)
}

fn cmd_generate(g: &Global, a: GenerateArgs) -> CmdResult {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<GeneratorConfig>(&text)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?
        }
        None => GeneratorConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(v) = a.hubs {
        cfg.n_hubs = v;
    }
    if let Some(v) = a.clinics {
        cfg.n_clinics = v as usize;
    }
    if let Some(v) = a.density {
        cfg.density = v;
    }
    if let Some(v) = a.modes {
        cfg.n_modes = v;
    }
    if let Some(v) = a.devices {
        cfg.n_devices = v;
    }
    if let Some(v) = a.region_side {
        cfg.region_side = v;
    }
    if let Some(v) = a.volume_scale {
        cfg.volume_scale = v;
    }
    if let Some(v) = a.per_km_cost {
        cfg.per_km_cost = v;
    }
    if let Some(v) = a.fixed_trip_cost {
        cfg.fixed_trip_cost = v;
    }
    if let Some(v) = a.device_cost_scale {
        cfg.device_cost_scale = v;
    }
    if let Some(r) = a.cutoff_radius {
        cfg.arc_policy = ArcPolicy::DistanceCutoff(r);
    }
    let inst = generate_instance(&cfg).map_err(|e| match e {
        GeneratorError::InvalidConfig(_) => Failure::new(EXIT_USAGE, e),
        GeneratorError::UnreachableClinic(_) => Failure::new(EXIT_INFEASIBLE, e),
    })?;
    write_instance(&inst, &a.output).map_err(io_failure)?;
    println!(
        "{}: {} hubs, {} clinics, {} modes, {} devices, {} arcs",
        a.output.display(),
        inst.hubs.len(),
        inst.clinics.len(),
        inst.modes.len(),
        inst.devices.len(),
        inst.arcs.len()
    );
    Ok(0)
}

fn default_solution_path(instance: &Path) -> PathBuf {
    let stem = instance.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
    instance.with_file_name(format!("{stem}.solution.json"))
}

fn write_solution(sol: &NetworkSolution, path: &Path) -> Result<(), Failure> {
    sol.write(path).map_err(io_failure)
}

fn cmd_solve(g: &Global, a: SolveArgs) -> CmdResult {
    check_global(g)?;
    let inst = load_instance(&a.instance)?;
    let out = a.output.clone().unwrap_or_else(|| default_solution_path(&a.instance));
    let cfg = solve_config(g);
    match a.method {
        Method::Exact => {
            let r = solve_exact(&inst, &cfg).map_err(|e| Failure::new(EXIT_USAGE, e))?;
            let ms = r.wall_time.as_secs_f64() * 1e3;
            let Some(sol) = &r.solution else {
                return if r.status == BnbStatus::Infeasible {
                    Err(Failure::new(EXIT_INFEASIBLE, format!("infeasible (exact, {ms:.1} ms)")))
                } else {
                    Err(Failure::new(EXIT_LIMIT, format!("limit reached without a solution ({:?}, {ms:.1} ms)", r.status)))
                };
            };
            write_solution(sol, &out)?;
            println!(
                "objective {:.6} method exact status {} bound {:.6} nodes {} wall_ms {ms:.1}",
                sol.objective,
                status_label(r.status),
                r.best_bound,
                r.nodes
            );
            if r.is_optimal() {
                Ok(0)
            } else {
                eprintln!("warning: {} reached; wrote the best solution found", status_label(r.status));
                Ok(EXIT_LIMIT)
            }
        }
        Method::Cyclic => {
            let opts = CyclicOptions {
                seed: g.seed.unwrap_or(0),
                epsilon: g.epsilon,
                multistart: g.multistart as usize,
                allow_reopen: g.allow_reopen,
                initial_frequencies: a.seed_freq.clone(),
                solve: cfg,
            };
            let (sol, state) = cyclic_solve(&inst, &opts).map_err(|e| match e {
                CyclicError::RestrictedInfeasible { .. } => Failure::new(EXIT_INFEASIBLE, e),
                CyclicError::BadEpsilon | CyclicError::Restriction(_) | CyclicError::InvalidInstance(_) => {
                    Failure::new(EXIT_USAGE, e)
                }
                CyclicError::Decode(_) => Failure::new(EXIT_INFEASIBLE, e),
            })?;
            write_solution(&sol, &out)?;
            if let Some(path) = &a.trace {
                fs::write(path, state.trace_csv()).map_err(|e| io_failure(format!("{}: {e}", path.display())))?;
            }
            println!(
                "objective {:.6} method cyclic iterations {} seed {} wall_ms {:.1}",
                sol.objective,
                state.iterations(),
                state.seed,
                state.wall_time.as_secs_f64() * 1e3
            );
            if state.complete {
                Ok(0)
            } else {
                eprintln!("warning: a restricted solve hit a limit; wrote the best solution found");
                Ok(EXIT_LIMIT)
            }
        }
        Method::Oracle => {
            let start = Instant::now();
            let r = oracle_enumerate_with_guard(&inst, a.guard).map_err(|e| match e {
                OracleError::GuardExceeded { .. } => Failure::new(EXIT_LIMIT, e),
                OracleError::Infeasible => Failure::new(EXIT_INFEASIBLE, e),
                OracleError::InvalidInstance(_) => Failure::new(EXIT_USAGE, e),
            })?;
            write_solution(&r.solution, &out)?;
            println!(
                "objective {:.6} method oracle examined {} wall_ms {:.1}",
                r.objective,
                r.examined,
                start.elapsed().as_secs_f64() * 1e3
            );
            Ok(0)
        }
    }
}

fn status_label(s: BnbStatus) -> &'static str {
    match s {
        BnbStatus::Optimal => "optimal",
        BnbStatus::Infeasible => "infeasible",
        BnbStatus::TimeLimit => "time-limit",
        BnbStatus::NodeLimit => "node-limit",
        BnbStatus::Unbounded => "unbounded",
    }
}

/// Issue codes meaning the solution names things the instance lacks.
const MISMATCH_CODES: [&str; 3] = ["UnknownNode", "UnknownMode", "UnknownDevice"];

fn cmd_validate(instance: &Path, solution: &Path) -> CmdResult {
    let inst = load_instance(instance)?;
    let sol = NetworkSolution::read(solution).map_err(|e| match e {
        SolutionFileError::Io { .. } => io_failure(e),
        SolutionFileError::Parse { .. } => io_failure(format!("{}: {e}", solution.display())),
    })?;
    let issues = validate_solution(&inst, &sol);
    for issue in &issues {
        println!("{issue}");
    }
    if issues.iter().any(|i| MISMATCH_CODES.contains(&i.code)) {
        return Err(Failure::new(EXIT_USAGE, "solution does not belong to this instance"));
    }
    if has_errors(&issues) {
        let n = issues.iter().filter(|i| i.severity == Severity::Error).count();
        eprintln!("{n} violation(s)");
        Ok(EXIT_VIOLATIONS)
    } else {
        println!("valid, objective {:.6}", sol.objective);
        Ok(0)
    }
}

fn bench_set(a: &BenchArgs) -> Result<Vec<(String, Instance, String)>, Failure> {
    if let Some(dir) = &a.dir {
        let entries = fs::read_dir(dir).map_err(|e| io_failure(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        return paths
            .iter()
            .map(|p| {
                let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                let density = Density::ALL.iter().find(|d| id.contains(d.label())).map_or("-", |d| d.label());
                Ok((id.clone(), load_instance(p)?, density.to_string()))
            })
            .collect();
    }
    let mut set = Vec::new();
    for &h in &a.hubs {
        for &c in &a.clinics {
            for &d in &a.densities {
                for seed in 0..a.seeds {
                    let cfg = GeneratorConfig { seed, n_hubs: h, n_clinics: c, density: d, ..GeneratorConfig::default() };
                    let inst = generate_instance(&cfg).map_err(|e| Failure::new(EXIT_USAGE, e))?;
                    set.push((format!("{}-h{h}-c{c}-s{seed}", d.label()), inst, d.label().to_string()));
                }
            }
        }
    }
    Ok(set)
}

fn cmd_bench(g: &Global, a: BenchArgs) -> CmdResult {
    check_global(g)?;
    let set = bench_set(&a)?;
    let mut exact = solve_config(g).with_threads(1);
    if g.time_limit_s.is_none() {
        exact = exact.with_time_limit(Duration::from_secs(600));
    }
    let opts = BenchOptions {
        cyclic: exact.clone(),
        exact,
        epsilon: g.epsilon,
        multistart: g.multistart as usize,
        allow_reopen: g.allow_reopen,
        oracle_check: !a.no_oracle,
    };
    let report = run_bench(&set, &opts).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let csv = report.to_csv();
    if let Some(path) = &a.output {
        fs::write(path, &csv).map_err(|e| io_failure(format!("{}: {e}", path.display())))?;
    }
    if a.pretty {
        print!("{}", report.pretty());
    } else if a.output.is_none() {
        print!("{csv}");
    }
    println!("{}", report.summary());
    Ok(0)
}

fn cmd_export(instance: &Path, format: ExportFormat, output: &Path) -> CmdResult {
    let inst = load_instance(instance)?;
    let (model, _) = build_program1(&inst).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    match format {
        ExportFormat::Mps => export_mps(&model, output).map_err(io_failure)?,
    }
    println!(
        "{}: {} columns, {} rows",
        output.display(),
        model.variables().len(),
        model.constraints().len()
    );
    Ok(0)
}
