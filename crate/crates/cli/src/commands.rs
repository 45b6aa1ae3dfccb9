use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use stepopt::optimizer::OptimizedSchedule;
use stepopt::simulator::ModelFile;
use stepopt::{
    evaluate_candidates, objective_value, optimize_steps, weight_table, BaselineScheme, Candidate,
    Config, Grid, Initialization, Model, OrderSchedule, PolynomialKind, Schedule, Spec,
};

use crate::schedule_file::{RunInfo, ScheduleFile};
use crate::{
    BaselineArgs, CliError, DumpWeightsArgs, InitArg, KindArg, OptimizeArgs, SchemeArg,
    SimulateArgs, SpecArgs,
};

/// Environment variable capping the number of simulation workers.
pub const THREADS_ENV: &str = "STEPOPT_THREADS";

impl From<KindArg> for PolynomialKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lagrange => PolynomialKind::Lagrange,
            KindArg::Taylor => PolynomialKind::Taylor,
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text
}

pub fn read_schedule_file(path: &Path) -> Result<ScheduleFile, CliError> {
    ScheduleFile::from_json(&read_text(path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn build_schedule(args: &SpecArgs) -> Result<Schedule, CliError> {
    let base = Schedule::from_name(&args.schedule).map_err(CliError::usage)?;
    let schedule = match base {
        Schedule::VpLinear { beta_min, beta_max } => Schedule::vp_linear(
            args.beta_min.unwrap_or(beta_min),
            args.beta_max.unwrap_or(beta_max),
        )
        .map_err(CliError::usage)?,
        Schedule::VpCosine { s } => {
            Schedule::vp_cosine(args.cosine_s.unwrap_or(s)).map_err(CliError::usage)?
        }
        Schedule::VeEdm => Schedule::VeEdm,
    };
    let linear_flags = args.beta_min.is_some() || args.beta_max.is_some();
    if (linear_flags && !matches!(schedule, Schedule::VpLinear { .. }))
        || (args.cosine_s.is_some() && !matches!(schedule, Schedule::VpCosine { .. }))
    {
        return Err(CliError::Usage(format!(
            "schedule parameters do not apply to {}",
            args.schedule
        )));
    }
    Ok(schedule)
}

/// Validates the shared flags and assembles the objective.
pub fn build_spec(args: &SpecArgs) -> Result<Spec, CliError> {
    let schedule = build_schedule(args)?;
    if args.steps == 0 {
        return Err(CliError::Usage("--N must be at least 1".into()));
    }
    let (t_default, eps_default) = schedule.default_endpoints();
    let t_start = args.t_start.unwrap_or(t_default);
    let t_end = args.eps.unwrap_or(eps_default);
    let orders = OrderSchedule::parse(&args.order, args.steps).map_err(CliError::usage)?;
    Spec::new(schedule, t_start, t_end, orders, args.p, args.kind.into()).map_err(CliError::usage)
}

fn dump_weights_for(grid: &Grid, spec: &Spec, path: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = path {
        let table = weight_table(
            spec.kind(),
            grid.lambdas(),
            spec.orders(),
            grid.lambda_end(),
        )
        .map_err(CliError::numeric)?;
        write_text(Some(path), &to_json(&table.to_dump()))?;
    }
    Ok(())
}

pub fn cmd_baseline(args: &BaselineArgs) -> Result<ScheduleFile, CliError> {
    let spec = build_spec(&args.spec)?;
    let scheme = match args.scheme {
        SchemeArg::UniformT => BaselineScheme::UniformT,
        SchemeArg::UniformLambda => BaselineScheme::UniformLambda,
        SchemeArg::Edm => BaselineScheme::Edm { rho: args.spec.rho },
    };
    let grid = scheme
        .build(spec.schedule(), spec.steps(), spec.t_start(), spec.t_end())
        .map_err(CliError::numeric)?;
    let objective = objective_value(&spec, grid.interior()).map_err(CliError::numeric)?;
    let file = ScheduleFile::new(
        spec.schedule(),
        &grid,
        spec.orders().as_slice(),
        spec.kind(),
        spec.p(),
        objective,
        scheme.label(),
        None,
    );
    write_text(args.spec.out.as_deref(), &file.to_json())?;
    dump_weights_for(&grid, &spec, args.spec.dump_weights.as_deref())?;
    Ok(file)
}

fn init_for(arg: InitArg, rho: u32) -> Initialization<f64> {
    match arg {
        InitArg::UniformT => Initialization::UniformT,
        InitArg::UniformLambda | InitArg::BestOf3 => Initialization::UniformLambda,
        InitArg::Edm => Initialization::Edm { rho },
    }
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<ScheduleFile, CliError> {
    let spec = build_spec(&args.spec)?;
    if let Some(m) = args.margin {
        if !(m > 0.0) {
            return Err(CliError::Usage(format!(
                "--margin must be positive, got {m}"
            )));
        }
    }
    if !(args.grad_tol > 0.0) || !(args.step_tol > 0.0) {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    let init = args.init.unwrap_or(if spec.p() >= 2 {
        InitArg::UniformT
    } else {
        InitArg::UniformLambda
    });
    let inits: Vec<Initialization<f64>> = match init {
        InitArg::BestOf3 => vec![
            Initialization::UniformT,
            Initialization::UniformLambda,
            Initialization::Edm { rho: args.spec.rho },
        ],
        other => vec![init_for(other, args.spec.rho)],
    };

    let clock = Instant::now();
    let mut best: Option<(Initialization<f64>, OptimizedSchedule<f64>)> = None;
    for start in inits {
        let config = Config {
            init: start.clone(),
            margin: args.margin,
            max_iters: args.max_iters,
            grad_tol: args.grad_tol,
            step_tol: args.step_tol,
            tr_radius0: None,
        };
        let result = optimize_steps(&spec, &config).map_err(CliError::numeric)?;
        eprintln!(
            "init {:<15} objective {:.6e} -> {:.6e}  iterations {}  converged {}",
            start.label(),
            result.initial_objective,
            result.objective,
            result.iterations,
            result.converged
        );
        if best
            .as_ref()
            .is_none_or(|(_, b)| result.objective < b.objective)
        {
            best = Some((start, result));
        }
    }
    let (start, result) = best.expect("at least one initialization");
    let wall = clock.elapsed().as_secs_f64();
    let label = if init == InitArg::BestOf3 {
        format!("best-of-3:{}", start.label())
    } else {
        start.label()
    };
    eprintln!("wall time {wall:.3} s");
    let file = ScheduleFile::new(
        spec.schedule(),
        &result.grid,
        spec.orders().as_slice(),
        spec.kind(),
        spec.p(),
        result.objective,
        label,
        Some(RunInfo {
            initial_objective: result.initial_objective,
            iterations: result.iterations,
            converged: result.converged,
            wall_time_seconds: wall,
        }),
    );
    write_text(args.spec.out.as_deref(), &file.to_json())?;
    dump_weights_for(&result.grid, &spec, args.spec.dump_weights.as_deref())?;
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub label: String,
    #[serde(rename = "N")]
    pub steps: usize,
    pub mean_l2: f64,
    pub median_l2: f64,
    pub per_seed_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationOutput {
    pub schedule_family: String,
    #[serde(rename = "T")]
    pub t_start: f64,
    pub eps: f64,
    pub seeds: usize,
    pub rng_seed: u64,
    pub model: ModelFile,
    pub reports: Vec<ReportRow>,
}

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{THREADS_ENV} must be a positive integer, got `{value}`"
                ))
            })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(CliError::numeric)
}

fn label_for(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulationOutput, CliError> {
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let model = match &args.model {
        Some(path) => {
            let file: ModelFile = serde_json::from_str(&read_text(path)?).map_err(|e| {
                CliError::Usage(format!("invalid model file {}: {e}", path.display()))
            })?;
            Model::from_file(&file).map_err(CliError::usage)?
        }
        None => Model::standard_mixture(),
    };

    let mut schedule: Option<Schedule> = None;
    let mut candidates = Vec::with_capacity(args.steps.len());
    for path in &args.steps {
        let file = read_schedule_file(path)?;
        let this = file.schedule()?;
        let grid = file.grid()?;
        if let Some(first) = &schedule {
            let reference: &Candidate<f64> = &candidates[0];
            if this != *first
                || grid.t_start() != reference.grid.t_start()
                || grid.t_end() != reference.grid.t_end()
            {
                return Err(CliError::Usage(format!(
                    "{} does not share the schedule family and endpoints of {}",
                    path.display(),
                    args.steps[0].display()
                )));
            }
        } else {
            schedule = Some(this);
        }
        candidates.push(Candidate {
            label: label_for(path),
            grid,
            orders: file.orders()?,
            kind: file.kind()?,
        });
    }
    let schedule = schedule.expect("clap requires at least one --steps");
    let pool = worker_pool()?;
    let reports = pool
        .install(|| evaluate_candidates(&model, &schedule, &candidates, args.seeds, args.rng_seed))
        .map_err(CliError::numeric)?;

    let first = &candidates[0].grid;
    let output = SimulationOutput {
        schedule_family: schedule.family().as_str().to_string(),
        t_start: first.t_start(),
        eps: first.t_end(),
        seeds: args.seeds,
        rng_seed: args.rng_seed,
        model: model.to_file(),
        reports: reports
            .into_iter()
            .map(|r| ReportRow {
                label: r.schedule_label,
                steps: r.steps,
                mean_l2: r.mean_l2_error,
                median_l2: r.median_l2_error,
                per_seed_errors: r.per_seed_errors,
            })
            .collect(),
    };
    for row in &output.reports {
        eprintln!(
            "{:<24} N={:<3} mean_l2 {:.6e}  median_l2 {:.6e}",
            row.label, row.steps, row.mean_l2, row.median_l2
        );
    }
    write_text(args.out.as_deref(), &to_json(&output))?;
    if let Some(path) = &args.csv {
        write_csv(path, &output.reports)?;
    }
    Ok(output)
}

fn write_csv(path: &Path, rows: &[ReportRow]) -> Result<(), CliError> {
    let io_err = |e: csv::Error| CliError::Numeric(format!("cannot write {}: {e}", path.display()));
    let mut writer = csv::Writer::from_path(path).map_err(io_err)?;
    writer
        .write_record(["label", "N", "mean_l2", "median_l2"])
        .map_err(io_err)?;
    for row in rows {
        writer
            .write_record([
                row.label.clone(),
                row.steps.to_string(),
                row.mean_l2.to_string(),
                row.median_l2.to_string(),
            ])
            .map_err(io_err)?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_dump_weights(args: &DumpWeightsArgs) -> Result<(), CliError> {
    let file = read_schedule_file(&args.steps)?;
    let grid = file.grid()?;
    let orders = file.orders()?;
    if orders.steps() != grid.steps() {
        return Err(CliError::Usage("orders length does not match N".into()));
    }
    let table = weight_table(file.kind()?, grid.lambdas(), &orders, grid.lambda_end())
        .map_err(CliError::numeric)?;
    write_text(args.out.as_deref(), &to_json(&table.to_dump()))
}
