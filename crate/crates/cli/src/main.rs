//! `spectragraph`: spectra, surgery checks and bounds for quantum graphs.
//!
//! Exit codes: 0 success, 1 input error, 2 solver failure, 3 a check ran and
//! found violations or failed examples.

mod ops;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use spectragraph::analysis::{central_difference, dlambda_dalpha, dlambda_dbeta, dlambda_dinverse_beta, BoundReport};
use spectragraph::fem::eigenvalues_fem;
use spectragraph::gallery::run_examples;
use spectragraph::io::{read_problem, to_json};
use spectragraph::shrinkage::{check_hypothesis, convergence_test_with, ShrinkPlan};
use spectragraph::surgery::{self, InequalityReport, Theorem, Verdict};
use spectragraph::{
    eigenfunctions_of, eigenvalues_with, from_family, Error, Exec, Family, SchrodingerProblem, Spectrum, SpectrumRequest,
};

use output::{emit, num, opt, Table};

#[derive(Parser)]
#[command(name = "spectragraph", version, about = "Spectra of Schrödinger operators on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Secular,
    Fem,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Parameter {
    Alpha,
    Beta,
    InverseBeta,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues with multiplicities and residuals.
    Spectrum {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "secular")]
        backend: BackendArg,
        /// Number of eigenvalues, counted with multiplicity.
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Target FEM mesh width.
        #[arg(long, default_value_t = 1.0 / 128.0)]
        mesh: f64,
        /// Lower end of an eigenvalue window (secular backend).
        #[arg(long, requires = "window_max")]
        window_min: Option<f64>,
        #[arg(long, requires = "window_min")]
        window_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Samples of an orthonormal basis of the eigenspace of λ_k.
    Eigenfunction {
        graph: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Sample points per edge, endpoints included.
        #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply one surgery and compare the first k eigenvalues.
    Surgery {
        graph: PathBuf,
        /// Operation, e.g. `attach-edge:e2:v1:v2:0.1` or `scale:2`.
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Where to write the modified graph as JSON.
        #[arg(long)]
        graph_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random trials of an eigenvalue inequality.
    Verify {
        theorem: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shrink a set of edges to zero length and track spectral convergence.
    Shrink {
        graph: PathBuf,
        /// Comma-separated ids of the shrinking edges.
        #[arg(long, value_delimiter = ',', required = true)]
        edges: Vec<String>,
        /// Strictly decreasing edge lengths.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.2,0.1,0.05,0.02,0.01")]
        schedule: Vec<f64>,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower and upper bounds on λ_1 for all-δ graphs.
    Bounds {
        #[arg(required = true)]
        graphs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derivative of λ_k in a coupling strength, with a finite-difference check.
    Derivative {
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long, value_enum)]
        param: Parameter,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the reference examples and report pass/fail per example.
    PaperExamples {
        /// Also write the report as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Solver(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Graph(_)
            | Error::Condition(_)
            | Error::Input(_)
            | Error::Precondition(_)
            | Error::HypothesisViolated => Failure::Input(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(format!("output: {e}"))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load(path: &Path) -> std::result::Result<SchrodingerProblem, Failure> {
    read_problem(path).map_err(|e| Failure::Input(e.to_string()))
}

fn exec_from_env() -> std::result::Result<Exec, Failure> {
    let Ok(text) = std::env::var("SPECTRAGRAPH_THREADS") else {
        return Ok(Exec::Parallel);
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Failure::Input(format!("SPECTRAGRAPH_THREADS must be a positive integer, got '{text}'")))?;
    if n == 1 {
        return Ok(Exec::Sequential);
    }
    // a second initialization in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Exec::Parallel)
}

fn spectrum_table(s: &Spectrum) -> Table {
    let mut t = Table::new(&["index", "eigenvalue", "multiplicity", "residual"]);
    let mut index = 1;
    for v in &s.values {
        t.row([index.to_string(), num(v.value), v.multiplicity.to_string(), num(v.residual)]);
        index += v.multiplicity;
    }
    t
}

fn cmd_spectrum(
    p: &SchrodingerProblem,
    backend: BackendArg,
    k: usize,
    mesh: f64,
    window: Option<(f64, f64)>,
    exec: Exec,
) -> std::result::Result<Vec<u8>, Failure> {
    if !(mesh > 0.0 && mesh.is_finite()) {
        return Err(Failure::Input("--mesh must be positive".into()));
    }
    let request = match window {
        Some((lo, hi)) if lo < hi => SpectrumRequest::window(lo, hi),
        Some(_) => return Err(Failure::Input("--window-min must be below --window-max".into())),
        None => SpectrumRequest::first(k),
    };
    if window.is_some() && backend != BackendArg::Secular {
        return Err(Failure::Input("eigenvalue windows need the secular backend".into()));
    }
    let s = match backend {
        BackendArg::Fem => eigenvalues_fem(p, k, mesh)?,
        BackendArg::Secular => eigenvalues_with(p, request, exec)?,
        BackendArg::Both => {
            let s = eigenvalues_with(p, request, exec)?;
            let f = eigenvalues_fem(p, k, mesh)?;
            let worst = s
                .first(k)
                .iter()
                .zip(f.first(k))
                .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
                .fold(0.0, f64::max);
            eprintln!("max relative disagreement (secular vs fem, h = {}): {}", num(mesh), num(worst));
            s
        }
    };
    Ok(spectrum_table(&s).into_bytes())
}

fn cmd_eigenfunction(p: &SchrodingerProblem, k: usize, samples: usize, exec: Exec) -> std::result::Result<Vec<u8>, Failure> {
    let s = eigenvalues_with(p, SpectrumRequest::first(k), exec)?;
    let mut seen = 0;
    let value = s
        .values
        .iter()
        .find(|v| {
            seen += v.multiplicity;
            seen >= k
        })
        .ok_or_else(|| Failure::Solver(format!("fewer than {k} eigenvalues found")))?;
    let funcs = eigenfunctions_of(p, value)?;
    let g = p.graph();
    let mut t = Table::new(&["function", "eigenvalue", "edge", "x", "value", "derivative"]);
    for (i, f) in funcs.iter().enumerate() {
        for (e, edge) in g.edges().iter().enumerate() {
            for j in 0..samples {
                let x = edge.length * j as f64 / (samples - 1) as f64;
                let (v, d) = f.eval(p, e, x);
                t.row([(i + 1).to_string(), num(f.eigenvalue), edge.id.clone(), num(x), num(v), num(d)]);
            }
        }
    }
    Ok(t.into_bytes())
}

fn report_rows(t: &mut Table, r: &InequalityReport, with_trial: bool) {
    for (j, &k) in r.indices.iter().enumerate() {
        let mut row = Vec::new();
        if with_trial {
            row.extend([r.theorem.clone(), r.seed.to_string(), r.trial.to_string()]);
        }
        row.extend([
            k.to_string(),
            num(r.before[j]),
            num(r.after[j]),
            r.slack.get(j).map(|&s| num(s)).unwrap_or_default(),
            r.verdict.as_str().to_string(),
        ]);
        t.row(row);
    }
    if r.indices.is_empty() {
        let mut row = Vec::new();
        if with_trial {
            row.extend([r.theorem.clone(), r.seed.to_string(), r.trial.to_string()]);
        }
        row.extend([String::new(), String::new(), String::new(), String::new(), r.verdict.as_str().to_string()]);
        t.row(row);
    }
}

fn cmd_surgery(
    p: &SchrodingerProblem,
    op: &str,
    k: usize,
    graph_out: Option<&Path>,
) -> std::result::Result<(Vec<u8>, Verdict), Failure> {
    let spec = ops::parse_op(op)?;
    let (after, report) = surgery::check(p, &spec, k)?;
    if let Some(path) = graph_out {
        emit(to_json(&after).as_bytes(), Some(path))?;
    }
    if !report.note.is_empty() {
        eprintln!("{}: {}", spec.tag(), report.note);
    }
    let mut t = Table::new(&["k", "lambda_before", "lambda_after", "slack", "verdict"]);
    report_rows(&mut t, &report, false);
    Ok((t.into_bytes(), report.verdict))
}

fn cmd_verify(id: &str, seed: u64, trials: usize, k: usize, exec: Exec) -> std::result::Result<(Vec<u8>, usize), Failure> {
    let theorem = Theorem::from_id(id)
        .ok_or_else(|| Failure::Input(format!("unknown theorem '{id}'; valid ids: {}", Theorem::ids().join(", "))))?;
    let reports = surgery::verify_with(theorem, seed, trials, k, exec)?;
    let mut t = Table::new(&["theorem", "seed", "trial", "k", "lambda_before", "lambda_after", "slack", "verdict"]);
    let mut bad = 0;
    for r in &reports {
        report_rows(&mut t, r, true);
        if matches!(r.verdict, Verdict::Violated | Verdict::SolverError) {
            bad += 1;
            eprintln!("trial {}: {} {}", r.trial, r.verdict.as_str(), r.note);
        }
    }
    Ok((t.into_bytes(), bad))
}

fn cmd_shrink(
    p: &SchrodingerProblem,
    edges: &[String],
    schedule: &[f64],
    k: usize,
    exec: Exec,
) -> std::result::Result<Vec<u8>, Failure> {
    let ids: Vec<&str> = edges.iter().map(String::as_str).collect();
    let plan = ShrinkPlan::new(p, &ids)?;
    let hyp = check_hypothesis(p, &plan);
    if !hyp.holds {
        if let Some((f, fp)) = &hyp.witness {
            let show = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ");
            eprintln!("boundary mode F = [{}], F' = [{}]", show(f), show(fp));
        }
        return Err(Error::HypothesisViolated.into());
    }
    let r = convergence_test_with(p, &plan, schedule, k, exec)?;
    let mut t = Table::new(&["step", "shrinking_length", "hausdorff_distance"]);
    for s in &r.steps {
        t.row([s.step.to_string(), num(s.length), num(s.distance)]);
    }
    Ok(t.into_bytes())
}

fn cmd_bounds(graphs: &[PathBuf], exec: Exec) -> std::result::Result<Vec<u8>, Failure> {
    let problems = graphs.iter().map(|g| load(g)).collect::<std::result::Result<Vec<_>, _>>()?;
    let reports = spectragraph::par::map(exec, &problems, BoundReport::of);
    let mut t = Table::new(&["graph_id", "lower", "lambda1", "upper_constant", "upper_flower"]);
    for (path, r) in graphs.iter().zip(reports) {
        let r = r?;
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        t.row([id, opt(r.lower), num(r.lambda1), opt(r.upper_constant), opt(r.upper_flower)]);
    }
    Ok(t.into_bytes())
}

fn with_family(p: &SchrodingerProblem, v: usize, family: Family) -> spectragraph::Result<SchrodingerProblem> {
    let mut conditions = p.conditions().to_vec();
    conditions[v] = from_family(family, p.condition(v).degree)?;
    SchrodingerProblem::new(p.graph().clone(), conditions)
}

fn cmd_derivative(
    p: &SchrodingerProblem,
    vertex: &str,
    param: Parameter,
    k: usize,
    step: f64,
) -> std::result::Result<Vec<u8>, Failure> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Failure::Input("--step must be positive".into()));
    }
    let v = p.vertex(vertex)?;
    let family = p.condition(v).family;
    let (name, formula, fd) = match (param, family) {
        (Parameter::Alpha, Family::Delta(a)) => {
            ("alpha", dlambda_dalpha(p, k, v)?, central_difference(k, a, step, |x| with_family(p, v, Family::Delta(x)))?)
        }
        (Parameter::Beta, Family::DeltaPrime(b)) => (
            "beta",
            dlambda_dbeta(p, k, v)?,
            central_difference(k, b, step, |x| with_family(p, v, Family::DeltaPrime(x)))?,
        ),
        (Parameter::InverseBeta, Family::DeltaPrime(b)) => (
            "inverse_beta",
            dlambda_dinverse_beta(p, k, v)?,
            central_difference(k, 1.0 / b, step, |s| with_family(p, v, Family::DeltaPrime(1.0 / s)))?,
        ),
        _ => {
            return Err(Failure::Input(format!(
                "vertex '{vertex}' carries a {} condition, which has no such parameter",
                family.name()
            )))
        }
    };
    let err = (formula - fd.coarse).abs() / formula.abs().max(1.0);
    let mut t = Table::new(&["vertex", "parameter", "k", "formula", "finite_difference", "richardson", "relative_error"]);
    t.row([vertex.to_string(), name.to_string(), k.to_string(), num(formula), num(fd.coarse), num(fd.richardson), num(err)]);
    Ok(t.into_bytes())
}

fn cmd_examples(out: Option<&Path>, exec: Exec) -> Outcome {
    let checks = run_examples(exec);
    let mut t = Table::new(&["id", "passed", "expected", "observed"]);
    for c in &checks {
        println!("{} {}: expected {}; observed {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.expected, c.observed);
        t.row([c.id, if c.passed { "true" } else { "false" }, &c.expected, &c.observed]);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} examples passed", checks.len() - failed, checks.len());
    if let Some(path) = out {
        emit(&t.into_bytes(), Some(path))?;
    }
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} examples failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let exec = exec_from_env()?;
    match cli.command {
        Command::Spectrum { graph, backend, k, mesh, window_min, window_max, out } => {
            let p = load(&graph)?;
            let window = window_min.zip(window_max);
            let bytes = cmd_spectrum(&p, backend, k as usize, mesh, window, exec)?;
            emit(&bytes, out.as_deref())?;
        }
        Command::Eigenfunction { graph, k, samples, out } => {
            let p = load(&graph)?;
            emit(&cmd_eigenfunction(&p, k as usize, samples as usize, exec)?, out.as_deref())?;
        }
        Command::Surgery { graph, op, k, graph_out, out } => {
            let p = load(&graph)?;
            let (bytes, verdict) = cmd_surgery(&p, &op, k as usize, graph_out.as_deref())?;
            emit(&bytes, out.as_deref())?;
            match verdict {
                Verdict::Violated => return Err(Failure::Check("claimed inequality violated".into())),
                Verdict::SolverError => return Err(Failure::Solver("eigenvalue comparison failed".into())),
                _ => {}
            }
        }
        Command::Verify { theorem, seed, trials, k, out } => {
            let (bytes, bad) = cmd_verify(&theorem, seed, trials as usize, k as usize, exec)?;
            emit(&bytes, out.as_deref())?;
            if bad > 0 {
                return Err(Failure::Check(format!("{bad} of {trials} trials violated or failed")));
            }
        }
        Command::Shrink { graph, edges, schedule, k, out } => {
            let p = load(&graph)?;
            emit(&cmd_shrink(&p, &edges, &schedule, k as usize, exec)?, out.as_deref())?;
        }
        Command::Bounds { graphs, out } => emit(&cmd_bounds(&graphs, exec)?, out.as_deref())?,
        Command::Derivative { graph, vertex, param, k, step, out } => {
            let p = load(&graph)?;
            emit(&cmd_derivative(&p, &vertex, param, k as usize, step)?, out.as_deref())?;
        }
        Command::PaperExamples { out } => cmd_examples(out.as_deref(), exec)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let ids = Theorem::ids().join("\n  ");
    let command = Cli::command().mut_subcommand("verify", |c| c.after_help(format!("Theorem ids:\n  {ids}")));
    let cli = match Cli::from_arg_matches(&command.get_matches()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(3)
        }
    }
}
