//! `ridgegap`: computes the uniform approximation error of two-direction
//! shallow networks on finite domains and cross-certifies the independent
//! routes (closed-path supremum, Chebyshev LP, corner rule, constructed
//! network). See `ridgegap --help` and the JSON schemas under `docs/`.

mod error;
mod problem;
mod report;

use clap::{Args, Parser, Subcommand};
use error::{CliError, EXIT_BLOWUP, EXIT_DISAGREEMENT, EXIT_OK};
use problem::{resolve, BoxSpecJson, OptionsJson, ProblemSpec, ResolvedProblem};
use report::{duality_agrees, Agreement, BestRidgeReport, NetworkReport, ProblemEcho, Report};
use ridgegap::closed_form::{
    closed_form_report, mixed_partial_integral, transformed_function, ClosedFormReport,
    DEFAULT_CHECK_GRID, DEFAULT_QUAD_ORDER,
};
use ridgegap::extremal::{enumerate_closed_paths, sup_closed_path, DEFAULT_ENUMERATION_CAP};
use ridgegap::geometry::sample_box;
use ridgegap::network::{build_network, Activation, NetworkError, NonMeanPeriodicReason};
use ridgegap::paths::path_functional;
use ridgegap::ridge::best_ridge_linf;
use ridgegap::verify::run_verification;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
enum LogLevel {
    Quiet,
    Info,
    Debug,
}

fn log_level() -> LogLevel {
    match std::env::var("RIDGEGAP_LOG").as_deref() {
        Ok("quiet") => LogLevel::Quiet,
        Ok("debug") => LogLevel::Debug,
        _ => LogLevel::Info,
    }
}

macro_rules! log_info {
    ($($arg:tt)*) => {
        if log_level() >= LogLevel::Info { eprintln!("[info] {}", format!($($arg)*)); }
    };
}

macro_rules! log_debug {
    ($($arg:tt)*) => {
        if log_level() >= LogLevel::Debug { eprintln!("[debug] {}", format!($($arg)*)); }
    };
}

#[derive(Parser)]
#[command(
    name = "ridgegap",
    version,
    about = "Uniform approximation error of two-direction shallow networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Function expression over x1..xd, e.g. "x1*x2".
    #[arg(long = "f", allow_hyphen_values = true)]
    f: Option<String>,
    /// Direction a, comma separated, e.g. --a 1,0.
    #[arg(long = "a", value_delimiter = ',', allow_hyphen_values = true)]
    a: Option<Vec<f64>>,
    /// Direction b, comma separated.
    #[arg(long = "b", value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    /// JSON file: a problem object or a bare array of points.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Projection box c1 d1 c2 d2 (requires independent 2-D directions).
    #[arg(long = "box", num_args = 4, allow_hyphen_values = true)]
    box_bounds: Option<Vec<f64>>,
    /// Grid resolution per box axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Absolute level-grouping tolerance (default: 1e-9 of the span).
    #[arg(long)]
    tol: Option<f64>,
    /// Seed echoed into the report; reports are byte-identical for an
    /// identical problem and seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report file (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ProblemArgs {
    fn to_spec(&self) -> Result<ProblemSpec, CliError> {
        let file_spec = match &self.points {
            Some(path) => ProblemSpec::from_file(path)?,
            None => ProblemSpec::default(),
        };
        let box_spec = match &self.box_bounds {
            Some(v) if v.len() == 4 => Some(BoxSpecJson {
                c1: v[0],
                d1: v[1],
                c2: v[2],
                d2: v[3],
            }),
            Some(_) => return Err(CliError::input("--box needs exactly c1 d1 c2 d2")),
            None => None,
        };
        let overrides = ProblemSpec {
            dims: None,
            a: self.a.clone(),
            b: self.b.clone(),
            points: None,
            box_spec,
            grid: self.grid,
            f: self.f.clone(),
            activation: None,
            epsilon: None,
            options: OptionsJson {
                tol: self.tol,
                ..OptionsJson::default()
            },
        };
        Ok(file_spec.merge(overrides))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the approximation error by every applicable route and check
    /// agreement (exit 3 on disagreement).
    Error {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Write a (m, lowerBound, bestRidge) refinement curve as CSV
        /// (box domains only).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Worker threads for the refinement sweep.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Construct a network within epsilon of the best possible error.
    FitNetwork {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Activation name: sigmoid, tanh, gaussian, relu.
        #[arg(long)]
        activation: Option<String>,
        /// Error budget above the best possible error.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Cap on shifted terms per direction (exit 4 when unreachable).
        #[arg(long, default_value_t = 129)]
        fit_term_cap: usize,
    },
    /// List every closed path up to a length cap, best first.
    EnumeratePaths {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Maximum path length, even (default 8, or the problem file's
        /// options.maxLen).
        #[arg(long)]
        max_len: Option<usize>,
        /// Cap on the number of canonical paths (exit 5 when exceeded).
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Run the randomized cross-check suites.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            err.emit();
            err.code
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Error { problem, csv, jobs } => cmd_error(problem, csv, jobs),
        Command::FitNetwork {
            problem,
            activation,
            epsilon,
            fit_term_cap,
        } => cmd_fit_network(problem, activation, epsilon, fit_term_cap),
        Command::EnumeratePaths {
            problem,
            max_len,
            cap,
        } => cmd_enumerate_paths(problem, max_len, cap),
        Command::Verify { seed, trials } => cmd_verify(seed, trials),
    }
}

fn write_output(path: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, contents)
            .map_err(|e| CliError::computation(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{contents}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::computation(format!("stdout: {e}")))
        }
    }
}

fn problem_echo(resolved: &ResolvedProblem, seed: Option<u64>) -> ProblemEcho {
    let domain_kind = if resolved.box_spec.is_some() {
        "box"
    } else {
        "points"
    };
    ProblemEcho {
        dims: resolved.domain.dim(),
        a: resolved.domain.dirs().a().to_vec(),
        b: resolved.domain.dirs().b().to_vec(),
        domain: domain_kind,
        grid: resolved.box_spec.as_ref().map(|_| resolved.grid),
        point_count: resolved.domain.len(),
        f: resolved.spec.f.clone(),
        activation: resolved.spec.activation.clone(),
        epsilon: resolved.spec.epsilon,
        seed,
    }
}

#[derive(Default)]
struct ClosedFormLeg {
    report: Option<ClosedFormReport>,
    corner_ok: Option<bool>,
    fubini_ok: Option<bool>,
}

/// Runs the closed-form pipeline when the domain is a box over independent
/// 2-D directions and `f` parsed; returns the report and the agreement pair.
fn closed_form_leg(
    resolved: &ResolvedProblem,
    lp_error: f64,
    notes: &mut Vec<String>,
) -> Result<ClosedFormLeg, CliError> {
    let (Some(box_spec), Some(fexpr)) = (&resolved.box_spec, &resolved.fexpr) else {
        return Ok(ClosedFormLeg::default());
    };
    let smooth = ridgegap::closed_form::SmoothFunction2D::new(fexpr.clone());
    let quad = resolved
        .spec
        .options
        .quad_order
        .unwrap_or(DEFAULT_QUAD_ORDER);
    let cf = closed_form_report(&smooth, box_spec, DEFAULT_CHECK_GRID, quad)
        .map_err(CliError::computation_from)?;

    // The corner rule claims the error only when the curvature condition is
    // certified; otherwise the comparison is not applicable.
    let corner_ok = cf
        .certified
        .then(|| (cf.corner_value - lp_error).abs() <= report::AGREEMENT_TOL * lp_error.max(1.0));
    // Quadrature tolerance from a two-resolution error estimate, so a
    // resolution-limited integrand does not read as a disagreement.
    let g = transformed_function(&smooth, box_spec.dirs()).map_err(CliError::computation_from)?;
    let coarse = mixed_partial_integral(&g, box_spec, (quad / 2).max(2))
        .map_err(CliError::computation_from)?
        / 4.0;
    let quad_tol =
        5.0 * (cf.quadrature_value - coarse).abs() + 1e-8 * cf.corner_value.abs().max(1.0);
    let fubini_ok = (cf.corner_value - cf.quadrature_value).abs() <= quad_tol;

    notes.push(cf.note.clone());
    if !cf.certified {
        notes.push(
            "closed-form values are not certified: the curvature condition failed on samples"
                .to_string(),
        );
    }
    Ok(ClosedFormLeg {
        report: Some(cf),
        corner_ok,
        fubini_ok: Some(fubini_ok),
    })
}

fn cmd_error(args: ProblemArgs, csv: Option<PathBuf>, jobs: usize) -> Result<i32, CliError> {
    let started = Instant::now();
    let resolved = resolve(args.to_spec()?)?;
    let fvals = resolved
        .fvals
        .clone()
        .ok_or_else(|| CliError::input("--f is required for the error command"))?;

    let lower = sup_closed_path(&resolved.domain, &fvals);
    log_debug!(
        "lower bound {} on {} points",
        lower.value,
        resolved.domain.len()
    );
    let best = best_ridge_linf(&resolved.domain, &fvals).map_err(CliError::computation_from)?;

    let mut notes = Vec::new();
    let leg = closed_form_leg(&resolved, best.error, &mut notes)?;
    if resolved.box_spec.is_none() && resolved.spec.f.is_some() {
        if !resolved.domain.dirs().independent2() {
            notes.push(
                "closed-form route skipped: directions are parallel, the box change of variables is undefined"
                    .to_string(),
            );
        } else {
            notes.push("closed-form route runs only for box domains".to_string());
        }
    }

    let agreement = Agreement {
        duality_equality: duality_agrees(&lower, &best),
        corner_formula: leg.corner_ok,
        fubini: leg.fubini_ok,
    };
    let agreed = agreement.duality_equality
        && agreement.corner_formula.unwrap_or(true)
        && agreement.fubini.unwrap_or(true);

    let rep = Report {
        problem: problem_echo(&resolved, args.seed),
        lower_bound: lower,
        best_ridge: BestRidgeReport::new(&resolved.domain, &best),
        closed_form: leg.report,
        network: None,
        agreement,
        notes,
    };
    write_output(&args.output, &rep.to_json())?;

    if let Some(csv_path) = csv {
        refinement_sweep(&resolved, &csv_path, jobs)?;
    }
    log_info!("error command finished in {:.1?}", started.elapsed());
    Ok(if agreed { EXIT_OK } else { EXIT_DISAGREEMENT })
}

/// Grid ladder for refinement curves: standard resolutions up to the
/// requested grid, always including the grid itself.
fn sweep_resolutions(grid: usize) -> Vec<usize> {
    let mut ms: Vec<usize> = [2usize, 3, 5, 9, 17, 33]
        .into_iter()
        .filter(|&m| m <= grid)
        .collect();
    if !ms.contains(&grid) && grid >= 2 {
        ms.push(grid);
    }
    ms.sort_unstable();
    ms
}

fn refinement_sweep(
    resolved: &ResolvedProblem,
    csv_path: &PathBuf,
    jobs: usize,
) -> Result<(), CliError> {
    let box_spec = resolved
        .box_spec
        .as_ref()
        .ok_or_else(|| CliError::input("--csv refinement needs a box domain"))?;
    let fexpr = resolved
        .fexpr
        .as_ref()
        .ok_or_else(|| CliError::input("--csv refinement needs --f"))?;
    let resolutions = sweep_resolutions(resolved.grid.max(2));
    let jobs = jobs.max(1).min(resolutions.len());
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<(f64, f64)>>> = Mutex::new(vec![None; resolutions.len()]);
    let failure: Mutex<Option<String>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= resolutions.len() {
                    return;
                }
                let m = resolutions[k];
                let outcome = (|| -> Result<(f64, f64), String> {
                    let domain = sample_box(box_spec, m).map_err(|e| e.to_string())?;
                    let fvals = domain
                        .tabulate(|p| ridgegap::expr::eval(fexpr, p))
                        .map_err(|e| e.to_string())?;
                    let lower = sup_closed_path(&domain, &fvals).value;
                    let best = best_ridge_linf(&domain, &fvals).map_err(|e| e.to_string())?;
                    Ok((lower, best.error))
                })();
                match outcome {
                    Ok(pair) => rows.lock().unwrap()[k] = Some(pair),
                    Err(message) => {
                        failure.lock().unwrap().get_or_insert(message);
                        return;
                    }
                }
            });
        }
    });

    if let Some(message) = failure.into_inner().unwrap() {
        return Err(CliError::computation(message));
    }
    let mut csv = String::from("m,lowerBound,bestRidge\n");
    for (m, row) in resolutions.iter().zip(rows.into_inner().unwrap()) {
        let (lower, best) = row.expect("all resolutions computed");
        csv.push_str(&format!("{m},{lower},{best}\n"));
    }
    std::fs::write(csv_path, csv)
        .map_err(|e| CliError::computation(format!("cannot write {}: {e}", csv_path.display())))?;
    log_info!("refinement curve written to {}", csv_path.display());
    Ok(())
}

fn cmd_fit_network(
    args: ProblemArgs,
    activation: Option<String>,
    epsilon: Option<f64>,
    fit_term_cap: usize,
) -> Result<i32, CliError> {
    let started = Instant::now();
    let mut spec = args.to_spec()?;
    if activation.is_some() {
        spec.activation = activation;
    }
    if epsilon.is_some() {
        spec.epsilon = epsilon;
    }
    if spec.options.fit_term_cap.is_none() {
        spec.options.fit_term_cap = Some(fit_term_cap);
    }
    let resolved = resolve(spec)?;
    let fvals = resolved
        .fvals
        .clone()
        .ok_or_else(|| CliError::input("--f is required for fit-network"))?;
    let name = resolved
        .spec
        .activation
        .clone()
        .ok_or_else(|| CliError::input("--activation is required for fit-network"))?;
    let sigma = Activation::lookup(&name).map_err(CliError::input_from)?;
    let epsilon = resolved.spec.epsilon.unwrap_or(0.1);
    if epsilon <= 0.0 {
        return Err(CliError::input("epsilon must be positive"));
    }
    let cap = resolved.spec.options.fit_term_cap.unwrap_or(129);

    let mut notes = Vec::new();
    if sigma.reason == NonMeanPeriodicReason::Unknown {
        let warning = format!(
            "activation `{name}` has no recorded density justification; the error formula is unverified for it"
        );
        log_info!("{warning}");
        notes.push(warning);
    }

    let lower = sup_closed_path(&resolved.domain, &fvals);
    let build =
        build_network(&resolved.domain, &fvals, sigma, epsilon, cap).map_err(|e| match e {
            NetworkError::EpsilonUnreachable { .. } => CliError::epsilon_unreachable(e),
            other => CliError::computation_from(other),
        })?;
    log_debug!(
        "network of {} terms, grid error {}",
        build.network.terms.len(),
        build.error
    );

    let leg = closed_form_leg(&resolved, build.best.error, &mut notes)?;
    let agreement = Agreement {
        duality_equality: duality_agrees(&lower, &build.best),
        corner_formula: leg.corner_ok,
        fubini: leg.fubini_ok,
    };
    let agreed = agreement.duality_equality
        && agreement.corner_formula.unwrap_or(true)
        && agreement.fubini.unwrap_or(true);

    let rep = Report {
        problem: problem_echo(&resolved, args.seed),
        lower_bound: lower,
        best_ridge: BestRidgeReport::new(&resolved.domain, &build.best),
        closed_form: leg.report,
        network: Some(NetworkReport {
            network: build.network,
            error: build.error,
            g_sup_error: build.g_fit.sup_error,
            h_sup_error: build.h_fit.sup_error,
        }),
        agreement,
        notes,
    };
    write_output(&args.output, &rep.to_json())?;
    log_info!("fit-network finished in {:.1?}", started.elapsed());
    Ok(if agreed { EXIT_OK } else { EXIT_DISAGREEMENT })
}

fn cmd_enumerate_paths(
    args: ProblemArgs,
    max_len: Option<usize>,
    cap: usize,
) -> Result<i32, CliError> {
    let resolved = resolve(args.to_spec()?)?;
    let max_len = max_len.or(resolved.spec.options.max_len).unwrap_or(8);
    if max_len < 2 {
        return Err(CliError::input("--max-len must be at least 2"));
    }
    let fvals = resolved
        .fvals
        .clone()
        .ok_or_else(|| CliError::input("--f is required for enumerate-paths"))?;
    let enumerated = enumerate_closed_paths(&resolved.domain, max_len, cap);

    let mut lines: Vec<(f64, &ridgegap::ClosedPath)> = enumerated
        .paths
        .iter()
        .map(|cp| (path_functional(cp, &fvals), cp))
        .collect();
    lines.sort_by(|(g1, p1), (g2, p2)| {
        g2.abs()
            .total_cmp(&g1.abs())
            .then_with(|| p1.len().cmp(&p2.len()))
            .then_with(|| p1.pts().cmp(p2.pts()))
    });

    let mut out = String::new();
    for (g, cp) in &lines {
        let mut value = serde_json::to_value(cp).expect("paths serialize");
        value
            .as_object_mut()
            .expect("path is an object")
            .insert("g".to_string(), serde_json::json!(g));
        out.push_str(&serde_json::to_string(&value).expect("line serializes"));
        out.push('\n');
    }
    write_output(&args.output, &out)?;

    if enumerated.truncated {
        eprintln!(
            "{}",
            serde_json::json!({"truncated": true, "cap": cap, "emitted": lines.len()})
        );
        return Ok(EXIT_BLOWUP);
    }
    Ok(EXIT_OK)
}

fn cmd_verify(seed: u64, trials: usize) -> Result<i32, CliError> {
    if trials == 0 {
        return Err(CliError::input("--trials must be at least 1"));
    }
    let started = Instant::now();
    let summary = run_verification(seed, trials);
    for suite in &summary.suites {
        println!(
            "{}: {}/{} passed",
            suite.name,
            suite.passed,
            suite.passed + suite.failed
        );
        if let Some(counterexample) = &suite.counterexample {
            eprintln!("{counterexample}");
        }
    }
    let all = summary.all_passed();
    println!(
        "{} (seed {seed}, {trials} trials)",
        if all {
            "all suites passed"
        } else {
            "FAILURES detected"
        }
    );
    log_info!("verify finished in {:.1?}", started.elapsed());
    Ok(if all { EXIT_OK } else { EXIT_DISAGREEMENT })
}
