//! Reference examples with known eigenvalues, multiplicities or inequality
//! directions, and the bundled problem corpus.

use std::f64::consts::PI;

use crate::analysis::{
    ground_state, locate_alpha_c, lower_bound_interval, negativity_certificate_delta,
    negativity_certificate_deltaprime, star_limit_check, upper_bound_constant,
};
use crate::condition::{from_family, Family, Kind};
use crate::error::{Error, Result};
use crate::fem::{convergence_study, eigenvalues_fem};
use crate::graph::{EdgeSpec, Potential};
use crate::io::parse_problem;
use crate::linalg::{self, Mat};
use crate::par::{self, Exec};
use crate::problem::{ProblemBuilder, SchrodingerProblem};
use crate::secular::{eigenfunctions_of, eigenvalues, first_eigenvalues, secular_value, SpectrumRequest};
use crate::shrinkage::{check_hypothesis, convergence_test, limit_problem, ShrinkPlan};
use crate::surgery::{self, Fragment, StrengthTarget};

/// Named corpus problems shipped with the crate.
pub const CORPUS: [(&str, &str); 12] = [
    ("robin1-neumann", include_str!("../corpus/robin1-neumann.json")),
    ("robin1-pumpkin", include_str!("../corpus/robin1-pumpkin.json")),
    ("neumann-interval", include_str!("../corpus/neumann-interval.json")),
    ("kirchhoff-pumpkin", include_str!("../corpus/kirchhoff-pumpkin.json")),
    ("three-star-deltaprime", include_str!("../corpus/three-star-deltaprime.json")),
    ("lasso", include_str!("../corpus/lasso.json")),
    ("antikirchhoff-circle", include_str!("../corpus/antikirchhoff-circle.json")),
    ("delta-loop", include_str!("../corpus/delta-loop.json")),
    ("star-three-delta", include_str!("../corpus/star-three-delta.json")),
    ("triangle-deltaprime", include_str!("../corpus/triangle-deltaprime.json")),
    ("pumpkin-deltaprime", include_str!("../corpus/pumpkin-deltaprime.json")),
    ("potential-tree", include_str!("../corpus/potential-tree.json")),
];

/// Corpus problems whose FEM eigenvalues are refined to measure the order.
pub const CONVERGENCE_PROBLEMS: [&str; 3] = ["neumann-interval", "lasso", "robin1-pumpkin"];

pub fn corpus_problem(name: &str) -> Result<SchrodingerProblem> {
    let text = CORPUS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Input(format!("no corpus problem '{name}'")))?;
    parse_problem(text)
}

pub fn corpus() -> Vec<(&'static str, SchrodingerProblem)> {
    CORPUS.iter().map(|(n, t)| (*n, parse_problem(t).expect("bundled corpus parses"))).collect()
}

/// One replayed example.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleCheck {
    pub id: &'static str,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

fn check(id: &'static str, expected: impl Into<String>, observed: impl Into<String>, passed: bool) -> ExampleCheck {
    ExampleCheck { id, expected: expected.into(), observed: observed.into(), passed }
}

fn interval(a: Family, b: Family, len: f64) -> Result<SchrodingerProblem> {
    ProblemBuilder::new().vertex("a", a).vertex("b", b).edge("e", "a", "b", len).build()
}

fn three_star(center: Family, lengths: [f64; 3]) -> Result<SchrodingerProblem> {
    let mut b = ProblemBuilder::new().vertex("c", center);
    for (i, l) in lengths.iter().enumerate() {
        let leaf = format!("l{}", i + 1);
        b = b.vertex(&leaf, Family::Neumann).edge(&format!("e{}", i + 1), "c", &leaf, *l);
    }
    b.build()
}

fn lam(p: &SchrodingerProblem, k: usize) -> Result<Vec<f64>> {
    first_eigenvalues(p, k)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn same_subspace(a: &crate::condition::VertexCondition, b: &crate::condition::VertexCondition) -> f64 {
    linalg::max_principal_angle(&a.admissible_subspace(), &b.admissible_subspace(), 1e-10)
}

type Example = fn() -> Result<ExampleCheck>;

const EXAMPLES: [(&str, Example); 33] = [
    ("three-star-degrees", three_star_degrees),
    ("kirchhoff-projections", kirchhoff_projections),
    ("deltaprime-robin-block", deltaprime_robin_block),
    ("neumann-interval-secular-zero", neumann_interval_secular_zero),
    ("robin-interval-ground-state", robin_interval_ground_state),
    ("robin-pumpkin-ground-state", robin_pumpkin_ground_state),
    ("three-star-double-zero", three_star_double_zero),
    ("three-star-eigenfunctions", three_star_eigenfunctions),
    ("fem-neumann-interval", fem_neumann_interval),
    ("fem-robin-interval", fem_robin_interval),
    ("fem-three-star-zero", fem_three_star_zero),
    ("delta-loop-secular-root", delta_loop_secular_root),
    ("scale-neumann-interval", scale_neumann_interval),
    ("lengthen-neumann-interval", lengthen_neumann_interval),
    ("lengthen-delta-loop", lengthen_delta_loop),
    ("lengthen-three-star-deltaprime", lengthen_three_star),
    ("attach-edge-delta-increase", attach_edge_delta),
    ("attach-edge-kirchhoff-second", attach_edge_kirchhoff),
    ("pumpkin-circle-law", pumpkin_circle_law),
    ("pendant-dirichlet-increase", pendant_dirichlet),
    ("set-strength-robin-to-neumann", set_strength_robin),
    ("kirchhoff-to-antikirchhoff-star", antikirchhoff_star),
    ("kirchhoff-to-antikirchhoff-interval", antikirchhoff_interval),
    ("unfold-parallel-antikirchhoff", unfold_parallel_antikirchhoff),
    ("unfold-pendant-antikirchhoff", unfold_pendant_antikirchhoff),
    ("lasso-limits", lasso_limits),
    ("circle-limit-kirchhoff", circle_limit),
    ("pumpkin-hypothesis-violated", pumpkin_violation),
    ("three-star-ground-state", three_star_ground_state),
    ("negativity-certificates", negativity_certificates),
    ("interval-and-constant-bounds", interval_and_constant_bounds),
    ("star-limit", star_limit),
    ("alpha-c-localization", alpha_c_localization),
];

/// Identifiers of all examples in replay order.
pub fn example_ids() -> Vec<&'static str> {
    EXAMPLES.iter().map(|(id, _)| *id).collect()
}

/// Replay one example by id.
pub fn run_example(id: &str) -> Option<ExampleCheck> {
    let (id, f) = EXAMPLES.iter().find(|(i, _)| *i == id)?;
    Some(f().unwrap_or_else(|e| check(id, "success", format!("error: {e}"), false)))
}

/// Replay every example. Solver failures become failed checks.
pub fn run_examples(exec: Exec) -> Vec<ExampleCheck> {
    par::map(exec, &EXAMPLES, |(id, f)| f().unwrap_or_else(|e| check(id, "success", format!("error: {e}"), false)))
}

fn three_star_degrees() -> Result<ExampleCheck> {
    let p = three_star(Family::kirchhoff(), [1.0; 3])?;
    let g = p.graph();
    let deg: Vec<usize> = (0..g.vertex_count()).map(|v| g.degree(v)).collect();
    Ok(check("three-star-degrees", "[3, 1, 1, 1]", format!("{deg:?}"), deg == [3, 1, 1, 1]))
}

fn kirchhoff_projections() -> Result<ExampleCheck> {
    let c = crate::condition::make_condition(Kind::Delta, 2, Some(0.0))?;
    let k = crate::condition::make_condition(Kind::Kirchhoff, 2, None)?;
    let q = Mat::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
    let err = (&c.pd - &q).amax();
    Ok(check(
        "kirchhoff-projections",
        "P_D = [[1/2, -1/2], [-1/2, 1/2]], identical to kirchhoff",
        format!("max deviation {err:.1e}"),
        err < 1e-15 && c == k,
    ))
}

fn deltaprime_robin_block() -> Result<ExampleCheck> {
    let c = crate::condition::make_condition(Kind::DeltaPrime, 3, Some(2.0))?;
    let ones = nalgebra::DVector::from_element(3, 1.0 / 3f64.sqrt());
    let value = (ones.transpose() * &c.lambda * &ones)[(0, 0)];
    let off = (&c.lambda - &c.pr * value).amax();
    Ok(check("deltaprime-robin-block", "1.5 on span{(1,1,1)}", format!("{value:.12}"), (value - 1.5).abs() < 1e-14 && off < 1e-14))
}

fn neumann_interval_secular_zero() -> Result<ExampleCheck> {
    let p = interval(Family::Neumann, Family::Neumann, 1.0)?;
    let at = secular_value(&p, PI * PI);
    let off = secular_value(&p, 1.0);
    Ok(check(
        "neumann-interval-secular-zero",
        "sigma_min(pi^2) < 1e-10, sigma_min(1) > 0",
        format!("{at:.2e}, {off:.3e}"),
        at < 1e-10 && off > 1e-3,
    ))
}

fn robin_interval_ground_state() -> Result<ExampleCheck> {
    let l = lam(&corpus_problem("robin1-neumann")?, 1)?[0];
    Ok(check("robin-interval-ground-state", "0.74017 +- 5e-5", format!("{l:.8}"), (l - 0.74017).abs() < 5e-5))
}

fn robin_pumpkin_ground_state() -> Result<ExampleCheck> {
    let l = lam(&corpus_problem("robin1-pumpkin")?, 1)?[0];
    Ok(check("robin-pumpkin-ground-state", "0.83156 +- 5e-5", format!("{l:.8}"), (l - 0.83156).abs() < 5e-5))
}

fn three_star_double_zero() -> Result<ExampleCheck> {
    let s = eigenvalues(&corpus_problem("three-star-deltaprime")?, SpectrumRequest::first(3))?;
    let first = s.values[0];
    Ok(check(
        "three-star-double-zero",
        "eigenvalue 0 with multiplicity 2",
        format!("{:.2e} x{}", first.value, first.multiplicity),
        first.value.abs() < 1e-8 && first.multiplicity == 2,
    ))
}

fn three_star_eigenfunctions() -> Result<ExampleCheck> {
    let p = corpus_problem("three-star-deltaprime")?;
    let s = eigenvalues(&p, SpectrumRequest::first(2))?;
    let funcs = eigenfunctions_of(&p, &s.values[0])?;
    // every eigenfunction is constant on each edge with edge values summing
    // to zero; the span then contains (1, -1, 0)
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for f in &funcs {
        let vals: Vec<f64> = (0..3).map(|e| f.eval(&p, e, 0.5).0).collect();
        for e in 0..3 {
            for x in [0.0, 0.3, 1.0] {
                let (v, d) = f.eval(&p, e, x);
                worst = worst.max((v - vals[e]).abs()).max(d.abs());
            }
        }
        worst = worst.max(vals.iter().sum::<f64>().abs());
        rows.push(vals);
    }
    let target = nalgebra::DVector::from_vec(vec![1.0, -1.0, 0.0]) / 2f64.sqrt();
    let basis = Mat::from_fn(3, rows.len(), |i, j| rows[j][i]);
    let proj = &basis * basis.transpose() * &target;
    let miss = (proj - &target).norm();
    Ok(check(
        "three-star-eigenfunctions",
        "two functions, constant per edge, span contains (1,-1,0)",
        format!("{} functions, deviation {:.1e}, span miss {:.1e}", funcs.len(), worst, miss),
        funcs.len() == 2 && worst < 1e-8 && miss < 1e-8,
    ))
}

fn fem_neumann_interval() -> Result<ExampleCheck> {
    let f = eigenvalues_fem(&corpus_problem("neumann-interval")?, 3, 1.0 / 64.0)?.first(3);
    let exact = [0.0, PI * PI, 4.0 * PI * PI];
    let err = f.iter().zip(exact).map(|(a, b)| (a - b).abs() / b.max(1.0)).fold(0.0, f64::max);
    Ok(check("fem-neumann-interval", "{0, pi^2, 4 pi^2} within 1e-3", format!("max rel {err:.2e}"), err < 1e-3))
}

fn fem_robin_interval() -> Result<ExampleCheck> {
    let f = eigenvalues_fem(&corpus_problem("robin1-neumann")?, 1, 1.0 / 128.0)?.first(1)[0];
    Ok(check("fem-robin-interval", "0.74017 within 1e-3 relative", format!("{f:.8}"), rel(f, 0.74017) < 1e-3))
}

fn fem_three_star_zero() -> Result<ExampleCheck> {
    let t = convergence_study(&corpus_problem("three-star-deltaprime")?, 2, 1.0 / 16.0, 3)?;
    let worst = t.rows.iter().flat_map(|r| r.values.iter().take(2)).fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(check("fem-three-star-zero", "|lambda_1,2(h)| < 1e-10 at all levels", format!("{worst:.2e}"), worst < 1e-10))
}

fn delta_loop_secular_root() -> Result<ExampleCheck> {
    let (alpha, len) = (-1.0, 1.0);
    let g = |k: f64| 2.0 * k - alpha * (k * len).sinh() - 2.0 * k * (k * len).cosh();
    // g > 0 just above 0 when α < 0 and g → −∞
    let (mut lo, mut hi) = (1e-6, 1.0);
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if g(m) > 0.0 {
            lo = m
        } else {
            hi = m
        }
    }
    let k = 0.5 * (lo + hi);
    let ev = lam(&corpus_problem("delta-loop")?, 2)?;
    Ok(check(
        "delta-loop-secular-root",
        format!("lambda_1 = {:.10}, only negative eigenvalue", -k * k),
        format!("{:.10}, lambda_2 = {:.4}", ev[0], ev[1]),
        (ev[0] + k * k).abs() < 1e-9 && ev[1] >= 0.0,
    ))
}

fn scale_neumann_interval() -> Result<ExampleCheck> {
    let q = surgery::scale(&corpus_problem("neumann-interval")?, 2.0)?;
    let l2 = lam(&q, 2)?[1];
    Ok(check("scale-neumann-interval", "lambda_2 = pi^2/4", format!("{l2:.10}"), rel(l2, PI * PI / 4.0) < 1e-9))
}

fn lengthen_neumann_interval() -> Result<ExampleCheck> {
    let p = corpus_problem("neumann-interval")?;
    let q = surgery::lengthen_edge(&p, "e", 2.0)?;
    let (a, b) = (lam(&p, 2)?[1], lam(&q, 2)?[1]);
    Ok(check(
        "lengthen-neumann-interval",
        "lambda_2: pi^2 -> pi^2/4",
        format!("{a:.8} -> {b:.8}"),
        rel(a, PI * PI) < 1e-9 && rel(b, PI * PI / 4.0) < 1e-9,
    ))
}

fn lengthen_delta_loop() -> Result<ExampleCheck> {
    let p = corpus_problem("delta-loop")?;
    let q = surgery::lengthen_edge(&p, "e", 2.0)?;
    let (a, b) = (lam(&p, 1)?[0], lam(&q, 1)?[0]);
    Ok(check("lengthen-delta-loop", "negative lambda_1 increases", format!("{a:.8} -> {b:.8}"), a < b && b < 0.0))
}

fn lengthen_three_star() -> Result<ExampleCheck> {
    let p = corpus_problem("three-star-deltaprime")?;
    let q = surgery::lengthen_edge(&p, "e2", 1.7)?;
    let b = lam(&q, 1)?[0];
    Ok(check("lengthen-three-star-deltaprime", "lambda_1 stays 0", format!("{b:.2e}"), b.abs() < 1e-8))
}

fn attach_edge_delta() -> Result<ExampleCheck> {
    let p = corpus_problem("robin1-neumann")?;
    let q = surgery::attach_edge(&p, "e2", "v1", "v2", 0.1, Potential::zero())?;
    let (a, b) = (lam(&p, 1)?[0], lam(&q, 1)?[0]);
    Ok(check(
        "attach-edge-delta-increase",
        "0.74017 -> 0.83156 (increase)",
        format!("{a:.5} -> {b:.5}"),
        (a - 0.74017).abs() < 5e-5 && (b - 0.83156).abs() < 5e-5 && b > a,
    ))
}

fn attach_edge_kirchhoff() -> Result<ExampleCheck> {
    let p = interval(Family::kirchhoff(), Family::kirchhoff(), 1.0)?;
    let q = surgery::attach_edge(&p, "f", "a", "b", 0.5, Potential::zero())?;
    let (a, b) = (lam(&p, 2)?[1], lam(&q, 2)?[1]);
    Ok(check("attach-edge-kirchhoff-second", "lambda_2 increases for l < 1", format!("{a:.6} -> {b:.6}"), b > a + 1e-6))
}

/// `λ₁ = 0` and `λ_{2k} = λ_{2k+1} = 4π²k²/(1+ℓ)²` on the interval with its
/// ends joined (`ℓ = 0`) or an extra edge of length `ℓ` attached.
pub fn pumpkin_circle_deviation(l: f64, kmax: usize) -> Result<f64> {
    let p = interval(Family::kirchhoff(), Family::kirchhoff(), 1.0)?;
    let q = if l == 0.0 {
        surgery::join_vertices(&p, "a", "b")?
    } else {
        surgery::attach_edge(&p, "f", "a", "b", l, Potential::zero())?
    };
    let ev = lam(&q, 2 * kmax + 1)?;
    let mut worst = ev[0].abs();
    for k in 1..=kmax {
        let exact = 4.0 * PI * PI * (k * k) as f64 / ((1.0 + l) * (1.0 + l));
        worst = worst.max(rel(ev[2 * k - 1], exact)).max(rel(ev[2 * k], exact));
    }
    Ok(worst)
}

fn pumpkin_circle_law() -> Result<ExampleCheck> {
    let worst = [0.0, 0.5, 1.0].iter().map(|&l| pumpkin_circle_deviation(l, 3)).collect::<Result<Vec<_>>>()?;
    let w = worst.iter().cloned().fold(0.0, f64::max);
    Ok(check("pumpkin-circle-law", "doubled 4 pi^2 k^2/(1+l)^2 to 1e-9", format!("max rel {w:.2e}"), w < 1e-9))
}

fn pendant_dirichlet() -> Result<ExampleCheck> {
    let p = interval(Family::kirchhoff(), Family::kirchhoff(), 1.0)?;
    let fragment = Fragment {
        vertices: vec![("w".into(), Family::kirchhoff().into()), ("v2".into(), Family::Dirichlet.into())],
        edges: vec![EdgeSpec::new("f", "w", "v2", 1.0)],
    };
    let q = surgery::attach_pendant(&p, "b", &fragment, "w")?;
    let (a, b) = (lam(&p, 1)?[0], lam(&q, 1)?[0]);
    Ok(check(
        "pendant-dirichlet-increase",
        "lambda_1: 0 -> pi^2/16 > 0",
        format!("{a:.2e} -> {b:.8}"),
        a.abs() < 1e-9 && rel(b, PI * PI / 16.0) < 1e-9,
    ))
}

fn set_strength_robin() -> Result<ExampleCheck> {
    let p = corpus_problem("robin1-neumann")?;
    let q = surgery::set_strength(&p, "v1", &StrengthTarget::Family(Family::Delta(0.0)))?;
    let (a, b) = (lam(&p, 1)?[0], lam(&q, 1)?[0]);
    Ok(check("set-strength-robin-to-neumann", "0.74017 -> 0", format!("{a:.5} -> {b:.2e}"), (a - 0.74017).abs() < 5e-5 && b.abs() < 1e-9))
}

fn antikirchhoff_star() -> Result<ExampleCheck> {
    let p = three_star(Family::kirchhoff(), [1.0, 0.7, 1.3])?;
    let q = surgery::delta_to_deltaprime(&p, "c", 0.0)?;
    let (a, b) = (lam(&p, 2)?[1], lam(&q, 2)?[1]);
    Ok(check("kirchhoff-to-antikirchhoff-star", "lambda_2 drops to 0", format!("{a:.6} -> {b:.2e}"), b.abs() < 1e-8 && a > 0.1))
}

fn antikirchhoff_interval() -> Result<ExampleCheck> {
    let len = 1.3;
    let p = interval(Family::Neumann, Family::kirchhoff(), len)?;
    let q = surgery::delta_to_deltaprime(&p, "b", 0.0)?;
    let (a, b) = (lam(&p, 1)?[0], lam(&q, 1)?[0]);
    let exact = PI * PI / (4.0 * len * len);
    Ok(check("kirchhoff-to-antikirchhoff-interval", "0 -> pi^2/(4L^2)", format!("{a:.2e} -> {b:.10}"), a.abs() < 1e-9 && rel(b, exact) < 1e-9))
}

fn unfold_parallel_antikirchhoff() -> Result<ExampleCheck> {
    let (l1, l2) = (1.0, 0.6);
    let p = ProblemBuilder::new()
        .vertex("v1", Family::AntiKirchhoff)
        .vertex("v2", Family::AntiKirchhoff)
        .edge("e1", "v1", "v2", l1)
        .edge("e2", "v1", "v2", l2)
        .build()?;
    let q = surgery::unfold_parallel(&p, &["e1", "e2"])?;
    let (a, b) = (lam(&p, 1)?[0], lam(&q, 1)?[0]);
    let exact = PI * PI / ((l1 + l2) * (l1 + l2));
    Ok(check(
        "unfold-parallel-antikirchhoff",
        "lambda_1: 0 -> pi^2/(l1+l2)^2 (Dirichlet interval)",
        format!("{a:.2e} -> {b:.10}"),
        a.abs() < 1e-9 && rel(b, exact) < 1e-9,
    ))
}

fn unfold_pendant_antikirchhoff() -> Result<ExampleCheck> {
    let (l1, l2) = (0.7, 0.5);
    let p = ProblemBuilder::new()
        .vertex("c", Family::AntiKirchhoff)
        .vertex("x", Family::Neumann)
        .vertex("y", Family::Neumann)
        .edge("e1", "c", "x", l1)
        .edge("e2", "c", "y", l2)
        .build()?;
    let q = surgery::unfold_pendant(&p, "c", &["e1", "e2"])?;
    let (a, b) = (lam(&p, 1)?[0], lam(&q, 1)?[0]);
    let exact = PI * PI / (4.0 * (l1 + l2) * (l1 + l2));
    Ok(check(
        "unfold-pendant-antikirchhoff",
        "lambda_1: 0 -> pi^2/(4(l1+l2)^2)",
        format!("{a:.2e} -> {b:.10}"),
        a.abs() < 1e-9 && (b - exact).abs() < 1e-6,
    ))
}

fn lasso_limits() -> Result<ExampleCheck> {
    let p = corpus_problem("lasso")?;
    let loop_plan = ShrinkPlan::new(&p, &["e2"])?;
    let stem_plan = ShrinkPlan::new(&p, &["e1"])?;
    let holds = check_hypothesis(&p, &loop_plan).holds && check_hypothesis(&p, &stem_plan).holds;
    let a = limit_problem(&p, &loop_plan)?;
    let angle_a = same_subspace(a.condition(0), &from_family(Family::Dirichlet, 1)?)
        .max(same_subspace(a.condition(1), &from_family(Family::Neumann, 1)?));
    let b = limit_problem(&p, &stem_plan)?;
    let angle_b = if b.graph().vertex_count() == 1 {
        same_subspace(b.condition(0), &from_family(Family::AntiKirchhoff, 2)?)
    } else {
        f64::INFINITY
    };
    let r = convergence_test(&p, &loop_plan, &[0.5, 0.25, 0.1, 0.02], 4)?;
    Ok(check(
        "lasso-limits",
        "hypothesis holds; Dirichlet-Neumann interval and antikirchhoff loop; distance < 5e-2",
        format!("angles {angle_a:.1e}, {angle_b:.1e}; final distance {:.2e}", r.final_distance()),
        holds && angle_a < 1e-9 && angle_b < 1e-9 && r.final_distance() < 5e-2,
    ))
}

fn circle_limit() -> Result<ExampleCheck> {
    let p = corpus_problem("antikirchhoff-circle")?;
    let plan = ShrinkPlan::new(&p, &["e0"])?;
    let holds = check_hypothesis(&p, &plan).holds;
    let q = limit_problem(&p, &plan)?;
    let angle = same_subspace(q.condition(0), &from_family(Family::kirchhoff(), 2)?);
    Ok(check(
        "circle-limit-kirchhoff",
        "hypothesis holds; kirchhoff at the merged vertex",
        format!("holds={holds}, angle {angle:.1e}"),
        holds && angle < 1e-9,
    ))
}

fn pumpkin_violation() -> Result<ExampleCheck> {
    let p = corpus_problem("pumpkin-deltaprime")?;
    let plan = ShrinkPlan::new(&p, &["e1", "e2"])?;
    let c = check_hypothesis(&p, &plan);
    let ok = match &c.witness {
        Some((f, fp)) => {
            let expected = [1.0, 1.0, -1.0, -1.0, 0.0, 0.0];
            let s = if f[0] < 0.0 { -1.0 } else { 1.0 };
            f.iter().zip(expected).all(|(a, b)| (s * a - b).abs() < 1e-9) && fp.iter().all(|v| v.abs() < 1e-9)
        }
        None => false,
    };
    Ok(check(
        "pumpkin-hypothesis-violated",
        "violated with witness 1 on e1, -1 on e2, 0 on e3",
        format!("holds={}, witness={:?}", c.holds, c.witness.as_ref().map(|w| &w.0)),
        !c.holds && ok,
    ))
}

fn three_star_ground_state() -> Result<ExampleCheck> {
    let r = ground_state(&corpus_problem("three-star-deltaprime")?)?;
    Ok(check(
        "three-star-ground-state",
        "multiplicity 2, sign-changing, vanishing on an edge",
        format!("multiplicity {}, sign_changing {}, vanishing {:?}", r.multiplicity, r.sign_changing, r.vanishing_edges),
        r.multiplicity == 2 && r.sign_changing && !r.vanishing_edges.is_empty(),
    ))
}

fn negativity_certificates() -> Result<ExampleCheck> {
    let tri = corpus_problem("triangle-deltaprime")?;
    let witness = negativity_certificate_deltaprime(&tri)?;
    let tri_l = lam(&tri, 1)?[0];
    let v0_edge = witness.map(|e| {
        let edge = tri.graph().edge(e);
        edge.origin == 0 || edge.terminus == 0
    });
    // one slightly negative coupling among positive ones: no certificate, λ₁ > 0
    let mixed = ProblemBuilder::new()
        .vertex("a", Family::Delta(-0.05))
        .vertex("b", Family::Delta(1.0))
        .vertex("c", Family::Delta(1.0))
        .edge("e1", "a", "b", 1.0)
        .edge("e2", "a", "c", 1.0)
        .build()?;
    let claimed = negativity_certificate_delta(&mixed)?;
    let mixed_l = lam(&mixed, 1)?[0];
    Ok(check(
        "negativity-certificates",
        "deltaprime witness at v0 with lambda_1 < 0; delta no claim with lambda_1 > 0",
        format!("witness {witness:?} ({tri_l:.5}); claim {claimed} ({mixed_l:.5})"),
        v0_edge == Some(true) && tri_l < 0.0 && !claimed && mixed_l > 0.0,
    ))
}

fn interval_and_constant_bounds() -> Result<ExampleCheck> {
    let p = corpus_problem("robin1-neumann")?;
    let l = lam(&p, 1)?[0];
    let lower = lower_bound_interval(&p)?;
    let upper = upper_bound_constant(&p)?;
    let flat = corpus_problem("kirchhoff-pumpkin")?;
    let (flat_upper, flat_l) = (upper_bound_constant(&flat)?, lam(&flat, 1)?[0]);
    Ok(check(
        "interval-and-constant-bounds",
        "lower = lambda_1 = 0.74017 <= 1 = upper; kirchhoff: upper = lambda_1 = 0",
        format!("{lower:.8} <= {l:.8} <= {upper}; {flat_upper} = {flat_l:.1e}"),
        (lower - l).abs() < 1e-9 && upper == 1.0 && flat_upper == 0.0 && flat_l.abs() < 1e-9,
    ))
}

fn star_limit() -> Result<ExampleCheck> {
    let k = star_limit_check(10_000);
    let mono = (0..14).all(|j| star_limit_check(1 << j) < star_limit_check(1 << (j + 1)));
    Ok(check("star-limit", "k(E) increasing, |k(1e4) - 1| < 1e-3", format!("k(1e4) = {k:.8}"), mono && (k - 1.0).abs() < 1e-3))
}

fn alpha_c_localization() -> Result<ExampleCheck> {
    let r = locate_alpha_c(-1.5, -0.5, 1e-7)?;
    let a = r.alpha_c.abs();
    Ok(check(
        "alpha-c-localization",
        "|alpha_c| in [1.07, 1.11], sign reported",
        format!("alpha_c = {:.7} (sign {})", r.alpha_c, if r.alpha_c < 0.0 { "-" } else { "+" }),
        (1.07..=1.11).contains(&a),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_parses() {
        for (name, p) in corpus() {
            assert!(p.graph().edge_count() >= 1, "{name}");
        }
    }

    #[test]
    fn examples_have_unique_ids() {
        let mut ids = example_ids();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), EXAMPLES.len());
    }

    #[test]
    fn all_examples_pass() {
        let checks = run_examples(Exec::Parallel);
        for c in &checks {
            println!("{} {}: expected {}, observed {}", if c.passed { "ok" } else { "FAIL" }, c.id, c.expected, c.observed);
        }
        assert!(checks.iter().all(|c| c.passed));
    }
}
