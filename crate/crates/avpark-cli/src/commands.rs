use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use avpark_core::{
    check_feasibility, export_lp as lp_text, format, generate_instance, objective,
    run_distributed, solve_exact, solve_greedy, CapacityRule, CoordinatorParams, Error,
    GeneratorConfig, Instance, OracleLimits, Verdict,
};

use crate::{CheckArgs, ExportLpArgs, GenerateArgs, Method, SolveArgs};

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn load_instance(path: &Path) -> Result<Instance, Error> {
    format::parse_instance(&read(path)?)
}

pub fn resolve_generator_config(args: &GenerateArgs) -> Result<GeneratorConfig, Error> {
    if let Some(path) = &args.config {
        return format::parse_generator_config(&read(path)?);
    }
    let Some(seed) = args.seed else {
        return Err(Error::InvalidConfig(
            "--seed is required; every run must be reproducible".into(),
        ));
    };
    let mut cfg = GeneratorConfig::new(args.avs, args.facilities, args.slots, seed);
    if let Some(v) = args.horizon_minutes {
        cfg.horizon_minutes = v;
    }
    if let Some(v) = args.area_km {
        cfg.area_km = v;
    }
    if let Some(v) = args.speed_kmh {
        cfg.speed_kmh = v;
    }
    if let Some(v) = args.dmax_min {
        cfg.dmax_range_km.0 = v;
    }
    if let Some(v) = args.dmax_max {
        cfg.dmax_range_km.1 = v;
    }
    if let Some(s) = &args.capacity {
        cfg.capacity = parse_capacity(s)?;
    }
    Ok(cfg)
}

fn parse_capacity(s: &str) -> Result<CapacityRule, Error> {
    if s == "half" {
        return Ok(CapacityRule::HalfOfAvs);
    }
    s.parse::<u32>().map(CapacityRule::Fixed).map_err(|_| {
        Error::InvalidConfig(format!("capacity must be \"half\" or a count, got {s:?}"))
    })
}

pub fn generate(args: GenerateArgs) -> Result<ExitCode, Error> {
    let cfg = resolve_generator_config(&args)?;
    let inst = generate_instance(&cfg)?;
    fs::write(&args.out, format::write_instance(&inst))?;
    println!(
        "wrote {} (avs={} facilities={} slots={} seed={})",
        args.out.display(),
        inst.n_avs(),
        inst.n_facilities(),
        inst.slots(),
        cfg.seed,
    );
    Ok(ExitCode::SUCCESS)
}

pub fn solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let inst = load_instance(&args.instance)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.instance.with_extension("assignment"));
    let started = Instant::now();

    match args.method {
        Method::Exact => {
            let limits = OracleLimits {
                max_nodes: args.max_nodes,
            };
            match solve_exact(&inst, &limits)? {
                Verdict::Optimal {
                    assignment,
                    objective: obj,
                } => {
                    fs::write(&out, format::write_assignment(&assignment))?;
                    println!(
                        "method=exact objective={} feasible=true iterations=- wallclock_s={}",
                        obj,
                        started.elapsed().as_secs_f64(),
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Verdict::Infeasible { reason } => {
                    eprintln!("infeasible: {reason}");
                    Ok(ExitCode::from(2))
                }
            }
        }
        Method::Distributed => {
            let Some(seed) = args.seed else {
                return Err(Error::InvalidConfig(
                    "--seed is required for the distributed method".into(),
                ));
            };
            let params = CoordinatorParams {
                delta: args.delta,
                gamma_init: args.gamma0,
                epsilon: args.epsilon,
                max_iters: args.max_iters,
                drop_prob: args.drop_prob,
                per_round_delay_ms: args.per_round_delay_ms,
                trace_primal: args.trace.is_some(),
            };
            let report = run_distributed(&inst, &params, seed)?;
            fs::write(&out, format::write_assignment(&report.assignment))?;
            if let Some(trace) = &args.trace {
                fs::write(trace, report.csv())?;
            }
            println!(
                "method=distributed feasible=true {} wallclock_s={}",
                report.summary_line(),
                started.elapsed().as_secs_f64(),
            );
            Ok(ExitCode::SUCCESS)
        }
        Method::Greedy => {
            let assignment = solve_greedy(&inst)?;
            fs::write(&out, format::write_assignment(&assignment))?;
            println!(
                "method=greedy objective={} feasible=true iterations=- wallclock_s={}",
                objective(&assignment),
                started.elapsed().as_secs_f64(),
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

pub fn export_lp(args: ExportLpArgs) -> Result<ExitCode, Error> {
    let inst = load_instance(&args.instance)?;
    let name = args
        .instance
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    let text = lp_text(&inst, &name);
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn check(args: CheckArgs) -> Result<ExitCode, Error> {
    let inst = load_instance(&args.instance)?;
    let a = format::parse_assignment(&read(&args.assignment)?)?;
    if a.n_avs() != inst.n_avs() {
        return Err(Error::InvalidInstance(format!(
            "assignment covers {} vehicles but the instance has {}",
            a.n_avs(),
            inst.n_avs(),
        )));
    }
    let violations = check_feasibility(&inst, &a);
    for v in &violations {
        println!("{v}");
    }
    println!(
        "feasible={} violations={} objective={}",
        violations.is_empty(),
        violations.len(),
        objective(&a),
    );
    if violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}
