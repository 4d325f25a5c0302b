//! Command line front end: generate instances, run the solver pipeline,
//! compare against the exact oracle and benchmark instance directories.
//!
//! Exit codes: 0 ok, 2 infeasible, 3 metric violation, 4 bad parameter,
//! 5 internal invariant violated (including the alpha abort).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use lbubfl::generator::{self, GenParams, Geometry};
use lbubfl::json::{self, InstanceJson};
use lbubfl::pipeline::solve_instance;
use lbubfl::{lp, oracle, solution, Instance, PipelineError, PipelineParams, PipelineReport, TriParams};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_METRIC: u8 = 3;
const EXIT_PARAMETER: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser)]
#[command(name = "lbubfl", version, about = "Load-bounded facility location solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    UnitSquare,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances.
    Gen {
        /// Number of instances (seeds seed, seed+1, ...).
        #[arg(long, default_value_t = 1)]
        count: u32,
        #[arg(long)]
        facilities: usize,
        #[arg(long)]
        clients: usize,
        #[arg(long)]
        lower: u32,
        #[arg(long)]
        upper: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = GeometryArg::UnitSquare)]
        geometry: GeometryArg,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve one instance and write the solution plus a report.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = 2.01)]
        ell: f64,
        #[arg(long, default_value_t = 0.5)]
        dense_threshold: f64,
        /// Override the opening-cost scale of the capacitated instance.
        #[arg(long)]
        delta: Option<f64>,
        /// Re-run the assignment flow over the final open set.
        #[arg(long)]
        post_flow: bool,
        /// Fail (exit 5) if any structural invariant is violated.
        #[arg(long)]
        check_invariants: bool,
        /// Directory for intermediate stage dumps.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also compute the exact optimum (small instances only).
        #[arg(long)]
        oracle: bool,
        /// Write the LP relaxation as text.
        #[arg(long)]
        export_lp: Option<PathBuf>,
        /// Solution output path (defaults to <instance>.solution.json).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report output path (defaults to stdout).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve every instance in a directory and emit a CSV summary.
    Bench {
        dir: PathBuf,
        /// CSV output path (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2.01)]
        ell: f64,
        #[arg(long, default_value_t = 0.5)]
        dense_threshold: f64,
        /// Run the exact oracle when the facility count is at most this.
        #[arg(long, default_value_t = 6)]
        oracle_limit: usize,
        /// Worker threads (defaults to the core count).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { count, facilities, clients, lower, upper, seed, geometry, out } => {
            cmd_gen(count, facilities, clients, lower, upper, seed, geometry, &out)
        }
        Command::Solve {
            instance,
            ell,
            dense_threshold,
            delta,
            post_flow,
            check_invariants,
            trace,
            oracle,
            export_lp,
            out,
            report,
        } => cmd_solve(SolveArgs {
            instance,
            ell,
            dense_threshold,
            delta,
            post_flow,
            check_invariants,
            trace,
            oracle,
            export_lp,
            out,
            report,
        }),
        Command::Bench { dir, out, ell, dense_threshold, oracle_limit, jobs } => {
            cmd_bench(&dir, out.as_deref(), ell, dense_threshold, oracle_limit, jobs)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    count: u32,
    facilities: usize,
    clients: usize,
    lower: u32,
    upper: u32,
    seed: u64,
    _geometry: GeometryArg,
    out: &Path,
) -> ExitCode {
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return ExitCode::from(EXIT_PARAMETER);
    }
    for k in 0..u64::from(count) {
        let params = GenParams {
            num_facilities: facilities,
            num_clients: clients,
            lower,
            upper,
            seed: seed + k,
            geometry: Geometry::UnitSquare,
        };
        let json = match generator::generate_json(&params) {
            Ok(j) => j,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_PARAMETER);
            }
        };
        let name = format!("inst-{facilities}x{clients}-L{lower}U{upper}-s{}.json", seed + k);
        let path = out.join(name);
        let text = serde_json::to_string_pretty(&json).expect("serializable");
        if let Err(e) = std::fs::write(&path, text + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_PARAMETER);
        }
        println!("{}", path.display());
    }
    ExitCode::SUCCESS
}

struct SolveArgs {
    instance: PathBuf,
    ell: f64,
    dense_threshold: f64,
    delta: Option<f64>,
    post_flow: bool,
    check_invariants: bool,
    trace: Option<PathBuf>,
    oracle: bool,
    export_lp: Option<PathBuf>,
    out: Option<PathBuf>,
    report: Option<PathBuf>,
}

fn exit_for(error: &PipelineError) -> u8 {
    match error {
        PipelineError::Metric { .. } => EXIT_METRIC,
        PipelineError::Infeasible(_) => EXIT_INFEASIBLE,
        PipelineError::Parameter(_) => EXIT_PARAMETER,
        PipelineError::AlphaAbort { .. } | PipelineError::Internal(_) => EXIT_INTERNAL,
    }
}

fn load_instance(path: &Path) -> Result<Instance, (u8, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (EXIT_PARAMETER, format!("cannot read {}: {e}", path.display())))?;
    let parsed = InstanceJson::from_str(&text)
        .map_err(|e| (EXIT_PARAMETER, format!("{}: {e}", path.display())))?;
    parsed
        .to_instance()
        .map_err(|e| (EXIT_PARAMETER, format!("{}: {e}", path.display())))
}

fn cmd_solve(args: SolveArgs) -> ExitCode {
    let inst = match load_instance(&args.instance) {
        Ok(i) => i,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(code);
        }
    };

    if let Some(path) = &args.export_lp {
        match lp::build_relaxation(&inst) {
            Ok(problem) => {
                let mut buf = Vec::new();
                problem.export_text(&mut buf).expect("in-memory write");
                if let Err(e) = std::fs::write(path, buf) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_PARAMETER);
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INFEASIBLE);
            }
        }
    }

    let params = PipelineParams {
        tri: TriParams { ell: args.ell, dense_threshold: args.dense_threshold },
        delta_override: args.delta,
        post_flow: args.post_flow,
        check_invariants: args.check_invariants,
        collect_trace: args.trace.is_some(),
    };
    let started = std::time::Instant::now();
    let report = match solve_instance(&inst, &params) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_for(&e));
        }
    };
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;

    let oracle_opt = if args.oracle {
        match oracle::exact_lbubfl(&inst) {
            Ok(opt) => opt.map(|(_, cost)| cost),
            Err(e) => {
                eprintln!("warning: oracle skipped: {e}");
                None
            }
        }
    } else {
        None
    };

    if let Some(dir) = &args.trace {
        if let Err(e) = write_trace(dir, &inst, &report) {
            eprintln!("error: trace: {e}");
            return ExitCode::from(EXIT_PARAMETER);
        }
    }

    let solution_json = json::solution_to_json(&inst, &report.solution, report.cost);
    let out_path = args
        .out
        .unwrap_or_else(|| args.instance.with_extension("solution.json"));
    let text = serde_json::to_string_pretty(&solution_json).expect("serializable");
    if let Err(e) = std::fs::write(&out_path, text + "\n") {
        eprintln!("error: cannot write {}: {e}", out_path.display());
        return ExitCode::from(EXIT_PARAMETER);
    }

    let report_value = report_to_json(&inst, &report, oracle_opt, runtime_ms, &params);
    let report_text = serde_json::to_string_pretty(&report_value).expect("serializable");
    match &args.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, report_text + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_PARAMETER);
            }
        }
        None => println!("{report_text}"),
    }
    ExitCode::SUCCESS
}

fn report_to_json(
    inst: &Instance,
    report: &PipelineReport,
    oracle_opt: Option<f64>,
    runtime_ms: f64,
    params: &PipelineParams,
) -> serde_json::Value {
    let bounds = solution::check_bounds(inst, &report.solution, 1.0, 1.0);
    serde_json::json!({
        "cost": report.cost,
        "lp_opt": report.lp_objective,
        "oracle_opt": oracle_opt,
        "ratio_to_oracle": oracle_opt.map(|o| if o > 0.0 { report.cost / o } else { f64::NAN }),
        "stages": {
            "tricriteria": {
                "cost": report.tri_cost,
                "open": report.tri_open,
                "alpha": report.tri_factors.alpha,
                "beta": report.tri_factors.beta,
            },
            "final": {
                "alpha": report.final_factors.alpha,
                "beta": report.final_factors.beta,
                "min_load": bounds.loads.iter().map(|&(_, l)| l).min(),
                "max_load": bounds.loads.iter().map(|&(_, l)| l).max(),
            },
        },
        "delta": report.delta,
        "cfl_solver": report.cfl_solver,
        "repair_skipped": report.repair_skipped,
        "invariants": report.invariants.records.iter().map(|r| {
            serde_json::json!({
                "name": r.name,
                "checked": r.checked,
                "violations": r.violations,
            })
        }).collect::<Vec<_>>(),
        "timings_ms": report.timings.iter().map(|(name, t)| {
            serde_json::json!({ "stage": name, "ms": t })
        }).collect::<Vec<_>>(),
        "runtime_ms": runtime_ms,
        "params": {
            "ell": params.tri.ell,
            "dense_threshold": params.tri.dense_threshold,
            "delta_override": params.delta_override,
            "post_flow": params.post_flow,
            "check_invariants": params.check_invariants,
        },
    })
}

fn write_trace(
    dir: &Path,
    inst: &Instance,
    report: &PipelineReport,
) -> Result<(), std::io::Error> {
    std::fs::create_dir_all(dir)?;
    let dump = |name: &str, value: serde_json::Value| -> Result<(), std::io::Error> {
        let text = serde_json::to_string_pretty(&value).expect("serializable");
        std::fs::write(dir.join(name), text + "\n")
    };
    if let Some(tri) = &report.trace.tri {
        dump(
            "tri.json",
            serde_json::json!({
                "stage": "tricriteria",
                "open": tri.open.iter().map(|&i| inst.facility_id(i)).collect::<Vec<_>>(),
                "loads": tri.loads,
                "alpha": tri.measured_alpha,
                "beta": tri.measured_beta,
                "cost": tri.cost,
            }),
        )?;
    }
    if let Some(i1) = &report.trace.i1 {
        dump("i1.json", serde_json::to_value(json::i1_to_json(inst, i1)).unwrap())?;
    }
    if let Some(i2) = &report.trace.i2 {
        dump("i2.json", serde_json::to_value(json::i2_to_json(inst, i2)).unwrap())?;
    }
    if let Some(icap) = &report.trace.icap {
        dump("icap.json", serde_json::to_value(json::icap_to_json(inst, icap)).unwrap())?;
    }
    if let Some(ascap) = &report.trace.ascap {
        dump(
            "ascap.json",
            serde_json::json!({
                "stage": "ascap",
                "open": ascap.open.iter().collect::<Vec<_>>(),
                "ship": ascap.ship,
                "cost": ascap.cost,
            }),
        )?;
    }
    if let Some(repair) = &report.trace.repair {
        dump(
            "treefix.json",
            serde_json::json!({
                "stage": "treefix",
                "edges": repair.edges,
                "roots": repair.roots,
                "steps": repair.steps,
            }),
        )?;
    }
    Ok(())
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn cmd_bench(
    dir: &Path,
    out: Option<&Path>,
    ell: f64,
    dense_threshold: f64,
    oracle_limit: usize,
    jobs: Option<usize>,
) -> ExitCode {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
            .collect(),
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", dir.display());
            return ExitCode::from(EXIT_PARAMETER);
        }
    };
    files.sort();

    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .ok();
    }

    let params = PipelineParams {
        tri: TriParams { ell, dense_threshold },
        ..PipelineParams::default()
    };

    let rows: Vec<String> = files
        .par_iter()
        .map(|path| bench_row(path, &params, oracle_limit))
        .collect();

    let mut csv = String::from(
        "id,|F|,|C|,L,U,lp_opt,opt,cost,ratio,alpha,beta_final,runtime_ms,error\n",
    );
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_PARAMETER);
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}

fn bench_row(path: &Path, params: &PipelineParams, oracle_limit: usize) -> String {
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let started = std::time::Instant::now();
    let inst = match load_instance(path) {
        Ok(i) => i,
        Err((_, msg)) => {
            return format!(
                "{},,,,,,,,,,,{:.3},{}",
                csv_escape(&id),
                started.elapsed().as_secs_f64() * 1e3,
                csv_escape(&msg)
            );
        }
    };
    let shape = format!(
        "{},{},{},{},{}",
        csv_escape(&id),
        inst.num_facilities(),
        inst.num_clients(),
        inst.lower(),
        inst.upper()
    );
    match solve_instance(&inst, params) {
        Ok(report) => {
            let runtime = started.elapsed().as_secs_f64() * 1e3;
            let opt = if inst.num_facilities() <= oracle_limit {
                oracle::exact_lbubfl(&inst).ok().flatten().map(|(_, c)| c)
            } else {
                None
            };
            let (opt_s, ratio_s) = match opt {
                Some(o) if o > 0.0 => (format!("{o:.9}"), format!("{:.6}", report.cost / o)),
                Some(o) => (format!("{o:.9}"), String::new()),
                None => (String::new(), String::new()),
            };
            format!(
                "{shape},{:.9},{opt_s},{:.9},{ratio_s},{:.6},{:.6},{runtime:.3},",
                report.lp_objective,
                report.cost,
                report.final_factors.alpha,
                report.final_factors.beta
            )
        }
        Err(e) => {
            let runtime = started.elapsed().as_secs_f64() * 1e3;
            format!("{shape},,,,,,,{runtime:.3},{}", csv_escape(&e.to_string()))
        }
    }
}
