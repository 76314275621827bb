//! Benchmark sweeps. Each test expands into (sweep value, seed) points,
//! points run in parallel, and every (point, solver) pair becomes one CSV
//! row. A failed solve is recorded in its row and the sweep carries on.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use avpark_core::{
    format, generate_instance, objective, rescale_time, run_distributed, solve_exact,
    solve_greedy, CoordinatorParams, Error, GeneratorConfig, Instance, OracleLimits, Verdict,
};
use rayon::prelude::*;

use crate::{ExperimentArgs, Method, TestId};

const COMM_LOSS_SWEEP: [f64; 7] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8];
const TIME_SCALING_SWEEP: [u32; 7] = [10, 20, 30, 40, 50, 80, 100];
const SCALE_AVS_SWEEP: [u32; 5] = [10, 20, 50, 100, 200];
const SCALE_FACILITIES_SWEEP: [u32; 5] = [1, 2, 3, 4, 5];

const CSV_HEADER: &str =
    "test,sweep,seed,solver,objective,pct_of_exact,iterations,simulated_delay_ms,feasible,error,wallclock_s\n";

#[derive(Clone, Copy)]
enum Sweep {
    Prob(f64),
    Count(u32),
}

impl Sweep {
    fn label(self) -> String {
        match self {
            Sweep::Prob(p) => p.to_string(),
            Sweep::Count(n) => n.to_string(),
        }
    }
}

fn test_name(t: TestId) -> &'static str {
    match t {
        TestId::CommLoss => "comm-loss",
        TestId::TimeScaling => "time-scaling",
        TestId::ScaleAvs => "scale-avs",
        TestId::ScaleFacilities => "scale-facilities",
        TestId::Convergence => "convergence",
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Exact => "exact",
        Method::Distributed => "distributed",
        Method::Greedy => "greedy",
    }
}

fn default_solvers(t: TestId) -> Vec<Method> {
    match t {
        TestId::CommLoss | TestId::Convergence => vec![Method::Distributed],
        TestId::TimeScaling => vec![Method::Exact],
        TestId::ScaleAvs | TestId::ScaleFacilities => {
            vec![Method::Exact, Method::Distributed, Method::Greedy]
        }
    }
}

fn sweep_values(t: TestId) -> Vec<Sweep> {
    match t {
        TestId::CommLoss => COMM_LOSS_SWEEP.iter().map(|&p| Sweep::Prob(p)).collect(),
        TestId::TimeScaling => TIME_SCALING_SWEEP.iter().map(|&n| Sweep::Count(n)).collect(),
        TestId::ScaleAvs => SCALE_AVS_SWEEP.iter().map(|&n| Sweep::Count(n)).collect(),
        TestId::ScaleFacilities => SCALE_FACILITIES_SWEEP
            .iter()
            .map(|&n| Sweep::Count(n))
            .collect(),
        TestId::Convergence => vec![Sweep::Prob(0.0)],
    }
}

/// Generator settings for one point. The sweep reshapes the instance for
/// the scale tests; comm-loss reuses the same instance across its sweep.
fn point_config(test: TestId, base: &GeneratorConfig, sweep: Sweep, seed: u64) -> GeneratorConfig {
    let mut cfg = base.clone();
    cfg.seed = seed;
    match (test, sweep) {
        (TestId::ScaleAvs, Sweep::Count(n)) => cfg.n_avs = n as usize,
        (TestId::ScaleFacilities, Sweep::Count(n)) => cfg.n_facilities = n as usize,
        (TestId::TimeScaling, _) => {
            cfg.slots = *TIME_SCALING_SWEEP.iter().max().unwrap();
        }
        _ => {}
    }
    cfg
}

fn build_instance(test: TestId, base: &GeneratorConfig, sweep: Sweep, seed: u64) -> Result<Instance, Error> {
    let cfg = point_config(test, base, sweep, seed);
    let inst = generate_instance(&cfg)?;
    if let (TestId::TimeScaling, Sweep::Count(n)) = (test, sweep) {
        return rescale_time(&inst, n);
    }
    Ok(inst)
}

/// Key under which a point's instance (and thus its exact optimum) is
/// shared. Comm-loss instances do not depend on the sweep value.
fn instance_key(test: TestId, sweep: Sweep, seed: u64) -> (String, u64) {
    match test {
        TestId::CommLoss | TestId::Convergence => (String::new(), seed),
        _ => (sweep.label(), seed),
    }
}

enum ExactOutcome {
    Optimal(u64),
    Infeasible(String),
    Failed(String),
}

/// Cached exact solve plus how long it took; the exact CSV row reports the
/// solve time, not the cache lookup.
struct ExactEntry {
    outcome: ExactOutcome,
    secs: f64,
}

struct Row {
    sweep: String,
    seed: u64,
    solver: &'static str,
    objective: String,
    pct_of_exact: String,
    iterations: String,
    simulated_delay_ms: String,
    feasible: String,
    error: String,
    wallclock_s: String,
}

impl Row {
    fn render(&self, test: &str, out: &mut String) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            test,
            self.sweep,
            self.seed,
            self.solver,
            self.objective,
            self.pct_of_exact,
            self.iterations,
            self.simulated_delay_ms,
            self.feasible,
            self.error,
            self.wallclock_s,
        );
    }
}

fn clean(msg: &str) -> String {
    msg.replace(['\n', ','], ";")
}

fn pct(obj: u64, exact: &ExactEntry) -> String {
    match exact.outcome {
        ExactOutcome::Optimal(opt) if opt > 0 => (obj as f64 * 100.0 / opt as f64).to_string(),
        _ => String::new(),
    }
}

fn solver_row(
    solver: Method,
    inst: &Instance,
    exact: &ExactEntry,
    seed: u64,
    sweep: Sweep,
    args: &ExperimentArgs,
) -> Row {
    let started = Instant::now();
    let mut row = Row {
        sweep: sweep.label(),
        seed,
        solver: method_name(solver),
        objective: String::new(),
        pct_of_exact: String::new(),
        iterations: String::new(),
        simulated_delay_ms: String::new(),
        feasible: String::new(),
        error: String::new(),
        wallclock_s: String::new(),
    };
    match solver {
        Method::Exact => {
            match &exact.outcome {
                ExactOutcome::Optimal(obj) => {
                    row.objective = obj.to_string();
                    row.pct_of_exact = "100".into();
                    row.feasible = "true".into();
                }
                ExactOutcome::Infeasible(reason) => {
                    row.feasible = "false".into();
                    row.error = clean(&format!("infeasible: {reason}"));
                }
                ExactOutcome::Failed(msg) => {
                    row.error = clean(msg);
                }
            }
            row.wallclock_s = exact.secs.to_string();
            return row;
        }
        Method::Distributed => {
            let drop_prob = match (sweep, args.test) {
                (Sweep::Prob(p), TestId::CommLoss) => p,
                _ => args.drop_prob,
            };
            let params = CoordinatorParams {
                drop_prob,
                max_iters: args.max_iters,
                ..CoordinatorParams::default()
            };
            match run_distributed(inst, &params, seed) {
                Ok(report) => {
                    row.objective = report.objective.to_string();
                    row.pct_of_exact = pct(report.objective, exact);
                    row.iterations = report.iterations.to_string();
                    row.simulated_delay_ms = report.simulated_delay_ms.to_string();
                    row.feasible = "true".into();
                }
                Err(e) => {
                    row.feasible = "false".into();
                    row.error = clean(&e.to_string());
                }
            }
        }
        Method::Greedy => match solve_greedy(inst) {
            Ok(a) => {
                let obj = objective(&a);
                row.objective = obj.to_string();
                row.pct_of_exact = pct(obj, exact);
                row.feasible = "true".into();
            }
            Err(e) => {
                row.feasible = "false".into();
                row.error = clean(&e.to_string());
            }
        },
    }
    row.wallclock_s = started.elapsed().as_secs_f64().to_string();
    row
}

fn base_config(args: &ExperimentArgs) -> Result<GeneratorConfig, Error> {
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)?;
        return format::parse_generator_config(&text);
    }
    let Some(seed) = args.seed else {
        return Err(Error::InvalidConfig(
            "--seed is required; every run must be reproducible".into(),
        ));
    };
    Ok(GeneratorConfig::new(
        args.avs,
        args.facilities,
        args.slots,
        seed,
    ))
}

fn write_plot(path: &Path, series: &[(String, f64)]) -> Result<(), Error> {
    let mut out = String::new();
    for (x, y) in series {
        let _ = writeln!(out, "{x} {y}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Mean of a column over the rows of one (sweep value, solver) cell,
/// skipping rows where the column is empty.
fn mean_series(
    rows: &[Row],
    sweeps: &[Sweep],
    solver: &'static str,
    col: impl Fn(&Row) -> &str,
) -> Vec<(String, f64)> {
    let mut series = Vec::new();
    for sweep in sweeps {
        let label = sweep.label();
        let vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.solver == solver && r.sweep == label)
            .filter_map(|r| col(r).parse::<f64>().ok())
            .collect();
        if !vals.is_empty() {
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            series.push((label, mean));
        }
    }
    series
}

pub fn run(args: ExperimentArgs) -> Result<ExitCode, Error> {
    let base = base_config(&args)?;
    fs::create_dir_all(&args.out_dir)?;
    if args.seeds < 1 {
        return Err(Error::InvalidConfig("--seeds must be at least 1".into()));
    }
    if args.test == TestId::Convergence {
        return convergence(&args, &base);
    }

    let solvers = args.solvers.clone().unwrap_or_else(|| default_solvers(args.test));
    if solvers.is_empty() {
        return Err(Error::InvalidConfig("--solvers must name at least one solver".into()));
    }
    let sweeps = sweep_values(args.test);
    let seeds: Vec<u64> = (0..args.seeds).map(|j| base.seed + j as u64).collect();
    let limits = OracleLimits {
        max_nodes: args.max_nodes,
    };

    // One exact solve per distinct instance, shared by every row that
    // compares against it.
    let mut keys: Vec<(String, u64, Sweep)> = Vec::new();
    for &sweep in &sweeps {
        for &seed in &seeds {
            let (k, s) = instance_key(args.test, sweep, seed);
            if !keys.iter().any(|(ek, es, _)| *ek == k && *es == s) {
                keys.push((k, s, sweep));
            }
        }
    }
    let exact_entries: Vec<((String, u64), ExactEntry)> = keys
        .par_iter()
        .map(|(k, seed, sweep)| {
            let started = Instant::now();
            let outcome = match build_instance(args.test, &base, *sweep, *seed) {
                Ok(inst) => match solve_exact(&inst, &limits) {
                    Ok(Verdict::Optimal { objective, .. }) => ExactOutcome::Optimal(objective),
                    Ok(Verdict::Infeasible { reason }) => ExactOutcome::Infeasible(reason),
                    Err(e) => ExactOutcome::Failed(e.to_string()),
                },
                Err(e) => ExactOutcome::Failed(e.to_string()),
            };
            let entry = ExactEntry {
                outcome,
                secs: started.elapsed().as_secs_f64(),
            };
            ((k.clone(), *seed), entry)
        })
        .collect();
    let exact_cache: HashMap<(String, u64), ExactEntry> = exact_entries.into_iter().collect();

    let points: Vec<(Sweep, u64)> = sweeps
        .iter()
        .flat_map(|&sweep| seeds.iter().map(move |&seed| (sweep, seed)))
        .collect();
    let rows: Vec<Row> = points
        .par_iter()
        .map(|&(sweep, seed)| {
            let exact = &exact_cache[&instance_key(args.test, sweep, seed)];
            match build_instance(args.test, &base, sweep, seed) {
                Ok(inst) => solvers
                    .iter()
                    .map(|&solver| solver_row(solver, &inst, exact, seed, sweep, &args))
                    .collect::<Vec<_>>(),
                Err(e) => vec![Row {
                    sweep: sweep.label(),
                    seed,
                    solver: "-",
                    objective: String::new(),
                    pct_of_exact: String::new(),
                    iterations: String::new(),
                    simulated_delay_ms: String::new(),
                    feasible: String::new(),
                    error: clean(&e.to_string()),
                    wallclock_s: String::new(),
                }],
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let name = test_name(args.test);
    let mut csv = String::from(CSV_HEADER);
    for row in &rows {
        row.render(name, &mut csv);
    }
    let csv_path = args.out_dir.join(format!("{name}.csv"));
    fs::write(&csv_path, &csv)?;

    for &solver in &solvers {
        let sname = method_name(solver);
        let obj = mean_series(&rows, &sweeps, sname, |r| &r.objective);
        if !obj.is_empty() {
            write_plot(
                &args.out_dir.join(format!("plot_{name}_{sname}_objective.txt")),
                &obj,
            )?;
        }
        let p = mean_series(&rows, &sweeps, sname, |r| &r.pct_of_exact);
        if !p.is_empty() {
            write_plot(
                &args.out_dir.join(format!("plot_{name}_{sname}_pct_of_exact.txt")),
                &p,
            )?;
        }
        if solver == Method::Distributed {
            let iters = mean_series(&rows, &sweeps, sname, |r| &r.iterations);
            if !iters.is_empty() {
                write_plot(
                    &args.out_dir.join(format!("plot_{name}_{sname}_iterations.txt")),
                    &iters,
                )?;
            }
        }
    }

    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    println!(
        "wrote {} ({} rows, {} with errors)",
        csv_path.display(),
        rows.len(),
        failed,
    );
    Ok(ExitCode::SUCCESS)
}

/// Single traced run; its CSV has one row per iteration.
fn convergence(args: &ExperimentArgs, base: &GeneratorConfig) -> Result<ExitCode, Error> {
    let inst = generate_instance(base)?;
    let params = CoordinatorParams {
        drop_prob: args.drop_prob,
        max_iters: args.max_iters,
        trace_primal: true,
        ..CoordinatorParams::default()
    };
    let report = run_distributed(&inst, &params, base.seed)?;
    let csv_path = args.out_dir.join("convergence.csv");
    fs::write(&csv_path, report.csv())?;

    let dual: Vec<(String, f64)> = report
        .dual_series
        .iter()
        .enumerate()
        .map(|(i, &v)| (i.to_string(), v))
        .collect();
    write_plot(&args.out_dir.join("plot_convergence_dual.txt"), &dual)?;
    let primal: Vec<(String, f64)> = report
        .primal_series
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|v| (i.to_string(), v as f64)))
        .collect();
    write_plot(&args.out_dir.join("plot_convergence_primal.txt"), &primal)?;

    println!("wrote {} ({})", csv_path.display(), report.summary_line());
    Ok(ExitCode::SUCCESS)
}
