use std::fs;
use std::io::Write as _;
use std::path::Path;

use lpoa_core::analysis::{
    deviation_pairs, duplicate_cut_normals, fit_rate, monotone_envelope, verify_hyperplane_lemma,
    verify_separation_levels, LemmaReport, RateFit,
};
use lpoa_core::driver::{hausdorff_series, run as run_algorithm, RunConfig, RunTrace, Termination};
use lpoa_core::lp_geometry::{lp_norm, sampled_property_checks, LemmaConstants, NormExponent, PropertyCheck};
use lpoa_core::problems::PROBLEM_KEYS;
use lpoa_core::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::svg::{self, Curve};
use crate::trace_file::{write_atomic, TraceDocument};
use crate::{
    RunArgs, SolverArgs, SweepArgs, VerifyArgs, EXIT_DATA, EXIT_FAILED, EXIT_IO, EXIT_MAX_ITERATIONS, EXIT_NO_INPUT,
    EXIT_SOLVER_FAILURE, EXIT_USAGE,
};

const SELF_TEST_PS: [f64; 6] = [1.25, 1.5, 2.0, 3.0, 4.0, 8.0];

/// Tolerance used for each problem's published table.
fn default_epsilon(key: &str) -> f64 {
    match key {
        "example1-q3" => 0.01,
        "example1-q2" => 1e-4,
        "ellipse" => 1e-3,
        _ => 0.05,
    }
}

fn usage_error(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    eprintln!("usage: lpoa run --problem KEY --p REAL --eps REAL [--max-iters N] [--out FILE] [--svg FILE] [--seed N]");
    eprintln!("       lpoa sweep --problem KEY [--p-list P,...] [--eps REAL] [--out-dir DIR] [--jobs N]");
    eprintln!("       lpoa verify (--trace FILE [--eta REAL] | --self-test)");
    eprintln!("problem keys: {}", PROBLEM_KEYS.join(", "));
    EXIT_USAGE
}

fn check_problem(key: &str) -> Result<(), u8> {
    if PROBLEM_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(usage_error(&format!("unknown problem key {key:?}")))
    }
}

fn seed(arg: Option<u64>) -> Result<u64, u8> {
    match (arg, std::env::var("LPOA_SEED")) {
        (Some(s), _) => Ok(s),
        (None, Ok(v)) => v.trim().parse().map_err(|_| usage_error(&format!("LPOA_SEED={v:?} is not an integer"))),
        (None, Err(_)) => Ok(42),
    }
}

fn config(key: &str, p: f64, eps: f64, solver: &SolverArgs, seed: u64) -> RunConfig {
    let mut c = RunConfig::new(key, p, eps);
    c.max_iterations = solver.max_iters;
    c.tolerances.objective = solver.objective_tol;
    c.tolerances.vi = solver.vi_tol;
    c.seed = seed;
    c
}

fn fit(trace: &RunTrace) -> RateFit {
    fit_rate(&monotone_envelope(&hausdorff_series(trace)), trace.final_polytope.dim(), trace.config.epsilon)
}

fn curve(label: String, trace: &RunTrace, f: &RateFit) -> Curve {
    Curve {
        label,
        envelope: monotone_envelope(&hausdorff_series(trace)),
        fit: Some((f.lambda_hat, f.c_hat, trace.final_polytope.dim())),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), u8> {
    write_atomic(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_IO
    })
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIterations => "max_iterations",
        Termination::SolverFailure => "solver_failure",
    }
}

pub fn run(a: RunArgs) -> u8 {
    match try_run(a) {
        Ok(c) | Err(c) => c,
    }
}

fn try_run(a: RunArgs) -> Result<u8, u8> {
    check_problem(&a.problem)?;
    let cfg = config(&a.problem, a.p, a.eps, &a.solver, seed(a.solver.seed)?);
    let trace = match run_algorithm(&cfg) {
        Ok(t) => t,
        Err(e @ (Error::InvalidInput(_) | Error::Config(_))) => return Err(usage_error(&e.to_string())),
        Err(e) => {
            eprintln!("error: {e}");
            return Err(EXIT_SOLVER_FAILURE);
        }
    };
    let f = fit(&trace);
    let doc = TraceDocument::new(trace);
    let json = doc.to_json();
    match &a.out {
        Some(path) => write_file(path, json.as_bytes())?,
        None => println!("{json}"),
    }
    let trace = &doc.trace;
    if let Some(path) = &a.svg {
        let title = format!("{}, eps = {}", a.problem, a.eps);
        write_file(path, svg::render(&title, &[curve(format!("p = {}", a.p), trace, &f)]).as_bytes())?;
    }
    eprintln!(
        "{}: {} iterations, final residual {:.3e}, c_hat {:.3}, r2 {:.3}",
        termination_name(trace.termination),
        trace.iterations.len(),
        trace.iterations.last().map_or(f64::NAN, |r| r.residual_norm),
        f.c_hat,
        f.r_squared
    );
    if let Some(msg) = &trace.failure {
        eprintln!("failure: {msg}");
    }
    Ok(match trace.termination {
        Termination::Converged => 0,
        Termination::MaxIterations => EXIT_MAX_ITERATIONS,
        Termination::SolverFailure => EXIT_SOLVER_FAILURE,
    })
}

struct SweepRow {
    p: f64,
    p_star: f64,
    fit: Option<RateFit>,
    iterations: usize,
    status: String,
}

pub fn sweep(a: SweepArgs) -> u8 {
    match try_sweep(a) {
        Ok(c) | Err(c) => c,
    }
}

fn try_sweep(a: SweepArgs) -> Result<u8, u8> {
    check_problem(&a.problem)?;
    if a.p_list.is_empty() {
        return Err(usage_error("empty --p-list"));
    }
    for &p in &a.p_list {
        NormExponent::new(p).map_err(|e| usage_error(&e.to_string()))?;
    }
    let eps = a.eps.unwrap_or_else(|| default_epsilon(&a.problem));
    let seed = seed(a.solver.seed)?;
    let mut ps = a.p_list.clone();
    ps.sort_by(f64::total_cmp);
    ps.dedup();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.unwrap_or(0))
        .build()
        .map_err(|e| usage_error(&e.to_string()))?;
    let results: Vec<(f64, lpoa_core::Result<RunTrace>)> = pool
        .install(|| ps.par_iter().map(|&p| (p, run_algorithm(&config(&a.problem, p, eps, &a.solver, seed)))).collect());

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for (p, res) in results {
        let p_star = p / (p - 1.0);
        match res {
            Ok(trace) => {
                let f = fit(&trace);
                let path = a.out_dir.join(format!("trace-p{p}.json"));
                write_file(&path, TraceDocument::new(trace.clone()).to_json().as_bytes())?;
                curves.push(curve(format!("p = {p}"), &trace, &f));
                rows.push(SweepRow {
                    p,
                    p_star,
                    fit: Some(f),
                    iterations: trace.iterations.len(),
                    status: termination_name(trace.termination).into(),
                });
            }
            Err(e) => rows.push(SweepRow { p, p_star, fit: None, iterations: 0, status: format!("error: {e}") }),
        }
    }

    let failed = rows.iter().any(|r| r.status != "converged");
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["p", "p_star", "c_hat", "r_squared", "iterations"];
    if failed {
        header.push("status");
    }
    w.write_record(&header).map_err(|_| EXIT_IO)?;
    for r in &rows {
        let (c, r2) =
            r.fit.as_ref().map_or((String::new(), String::new()), |f| (f.c_hat.to_string(), f.r_squared.to_string()));
        let mut rec = vec![r.p.to_string(), r.p_star.to_string(), c, r2, r.iterations.to_string()];
        if failed {
            rec.push(r.status.clone());
        }
        w.write_record(&rec).map_err(|_| EXIT_IO)?;
    }
    let bytes = w.into_inner().map_err(|_| EXIT_IO)?;
    write_file(&a.out_dir.join("summary.csv"), &bytes)?;
    if let Some(path) = &a.svg {
        let title = format!("{}, eps = {eps}", a.problem);
        write_file(path, svg::render(&title, &curves).as_bytes())?;
    }
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(&bytes);
    Ok(if failed { EXIT_FAILED } else { 0 })
}

#[derive(Serialize)]
struct DualNormCheck {
    normals: usize,
    violations: usize,
    worst_deviation: f64,
}

#[derive(Serialize)]
struct TraceReport {
    problem: String,
    p: f64,
    eta: f64,
    cuts: usize,
    pairs: usize,
    lemmas: Vec<LemmaReport>,
    dual_norm: DualNormCheck,
    duplicate_normals: Vec<(usize, usize)>,
    passed: bool,
}

#[derive(Serialize)]
struct SelfTestReport {
    checks: Vec<PropertyCheck>,
    passed: bool,
}

pub fn verify(a: VerifyArgs) -> u8 {
    match try_verify(a) {
        Ok(c) | Err(c) => c,
    }
}

fn emit(out: &Option<std::path::PathBuf>, json: String) -> Result<(), u8> {
    match out {
        Some(path) => write_file(path, json.as_bytes()),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn try_verify(a: VerifyArgs) -> Result<u8, u8> {
    if !(a.eta.is_finite() && a.eta > 0.0) {
        return Err(usage_error("--eta must be positive"));
    }
    if a.self_test {
        let mut checks = Vec::new();
        for &p in &SELF_TEST_PS {
            let ne = NormExponent::new(p).expect("valid exponent");
            for q in [2, 3, 4] {
                checks.extend(sampled_property_checks(&ne, q, 1000, 42));
            }
        }
        let passed = checks.iter().all(PropertyCheck::passed);
        emit(&a.out, serde_json::to_string_pretty(&SelfTestReport { checks, passed }).expect("report serializes"))?;
        return Ok(if passed { 0 } else { EXIT_FAILED });
    }

    let path = a.trace.as_ref().expect("clap enforces --trace or --self-test");
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_NO_INPUT
    })?;
    let malformed = |msg: String| {
        eprintln!("error: malformed trace {}: {msg}", path.display());
        EXIT_DATA
    };
    let trace = TraceDocument::parse(&text).map_err(malformed)?.trace;
    let ne = NormExponent::new(trace.config.p).map_err(|e| malformed(e.to_string()))?;
    let q = trace.final_polytope.dim();
    let shape_ok = trace.iterations.iter().all(|r| {
        r.support_point.len() == q
            && r.cut_normal.as_ref().is_none_or(|w| w.len() == q && w.iter().all(|x| x.is_finite()))
    });
    if !shape_ok {
        return Err(malformed("support points and normals must match the polytope dimension".into()));
    }
    let lc = LemmaConstants::new(&ne, q, a.eta).map_err(|e| malformed(e.to_string()))?;

    let pairs = deviation_pairs(&trace, a.eta, trace.config.seed);
    let lemmas = vec![verify_hyperplane_lemma(&pairs, &lc), verify_separation_levels(&pairs, &lc)];
    let dual = ne.dual();
    let mut dn = DualNormCheck { normals: 0, violations: 0, worst_deviation: 0.0 };
    for w in trace.cuts().filter_map(|r| r.cut_normal.as_ref()) {
        let dev = lp_norm(w, &dual).map_or(f64::INFINITY, |n| (n - 1.0).abs());
        dn.normals += 1;
        dn.worst_deviation = dn.worst_deviation.max(dev);
        if dev > 1e-6 {
            dn.violations += 1;
        }
    }
    let duplicate_normals = duplicate_cut_normals(&trace, 1e-8);
    let passed = lemmas.iter().all(LemmaReport::passed) && dn.violations == 0 && duplicate_normals.is_empty();
    let report = TraceReport {
        problem: trace.config.problem_key.clone(),
        p: trace.config.p,
        eta: a.eta,
        cuts: trace.cut_count(),
        pairs: pairs.len(),
        lemmas,
        dual_norm: dn,
        duplicate_normals,
        passed,
    };
    emit(&a.out, serde_json::to_string_pretty(&report).expect("report serializes"))?;
    Ok(if passed { 0 } else { EXIT_FAILED })
}
