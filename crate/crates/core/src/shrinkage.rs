//! Limits of problems when a set of edges shrinks to zero length.
//!
//! Everything here is linear algebra on boundary data `(F, F')` in slot
//! coordinates: slot `2e` is the origin of edge `e`, slot `2e + 1` its
//! terminus, and `F'` holds inward derivatives.

use crate::condition::{condition_from_subspace, VertexCondition};
use crate::error::{Error, Result};
use crate::graph::EdgeSpec;
use crate::linalg::{self, Mat};
use crate::par::{self, Exec};
use crate::problem::{SchrodingerProblem, VertexSpec};
use crate::secular::first_eigenvalues;

/// Rank tolerance for all null spaces in this module.
pub const NULL_TOL: f64 = 1e-10;

/// Partition of the edges into kept (`E+`) and shrinking (`E0`) edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShrinkPlan {
    pub zero: Vec<usize>,
    pub plus: Vec<usize>,
    edge_count: usize,
}

impl ShrinkPlan {
    pub fn new(p: &SchrodingerProblem, shrink: &[&str]) -> Result<Self> {
        let ne = p.graph().edge_count();
        let mut flag = vec![false; ne];
        for id in shrink {
            let e = p.edge(id)?;
            if flag[e] {
                return Err(Error::Input(format!("edge '{id}' listed twice")));
            }
            flag[e] = true;
        }
        Ok(Self::from_flags(&flag))
    }

    pub fn from_flags(flag: &[bool]) -> Self {
        ShrinkPlan {
            zero: (0..flag.len()).filter(|&e| flag[e]).collect(),
            plus: (0..flag.len()).filter(|&e| !flag[e]).collect(),
            edge_count: flag.len(),
        }
    }

    /// Slots of `∂Γ+`, ascending.
    pub fn plus_slots(&self) -> Vec<usize> {
        self.plus.iter().flat_map(|&e| [2 * e, 2 * e + 1]).collect()
    }

    /// Rows of `F_l(e) − F_r(e) = 0`, `e ∈ E0`, as an `|E0| × 2E` matrix.
    pub fn d0(&self) -> Mat {
        let mut m = Mat::zeros(self.zero.len(), 2 * self.edge_count);
        for (i, &e) in self.zero.iter().enumerate() {
            m[(i, 2 * e)] = 1.0;
            m[(i, 2 * e + 1)] = -1.0;
        }
        m
    }

    /// Rows of `F'_l(e) + F'_r(e) = 0`, `e ∈ E0`.
    pub fn n0(&self) -> Mat {
        let mut m = Mat::zeros(self.zero.len(), 2 * self.edge_count);
        for (i, &e) in self.zero.iter().enumerate() {
            m[(i, 2 * e)] = 1.0;
            m[(i, 2 * e + 1)] = 1.0;
        }
        m
    }
}

/// Outcome of the hypothesis check. A witness is a boundary pair satisfying
/// every constraint, vanishing on `∂Γ+`, with `F ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub holds: bool,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

/// Vertex rows, then `D0`, then `N0`, over unknowns `(F, F')` of length `4E`.
fn constraints(p: &SchrodingerProblem, plan: &ShrinkPlan) -> Mat {
    let g = p.graph();
    let n = 2 * g.edge_count();
    let nz = plan.zero.len();
    let mut m = Mat::zeros(n + 2 * nz, 2 * n);
    let mut row = 0;
    for v in 0..g.vertex_count() {
        let slots: Vec<usize> = g.incidence(v).iter().map(|i| i.slot()).collect();
        let (a, b) = p.condition(v).rows();
        for i in 0..slots.len() {
            let norm = (a.row(i).norm_squared() + b.row(i).norm_squared()).sqrt();
            for (j, &s) in slots.iter().enumerate() {
                m[(row, s)] = a[(i, j)] / norm;
                m[(row, n + s)] = b[(i, j)] / norm;
            }
            row += 1;
        }
    }
    let (d0, n0) = (plan.d0(), plan.n0());
    for i in 0..nz {
        for s in 0..n {
            m[(row + i, s)] = d0[(i, s)] / 2f64.sqrt();
            m[(row + nz + i, n + s)] = n0[(i, s)] / 2f64.sqrt();
        }
    }
    m
}

pub fn check_hypothesis(p: &SchrodingerProblem, plan: &ShrinkPlan) -> HypothesisCheck {
    let n = 2 * p.graph().edge_count();
    let base = constraints(p, plan);
    let plus = plan.plus_slots();
    let mut m = Mat::zeros(base.nrows() + 2 * plus.len(), 2 * n);
    m.rows_mut(0, base.nrows()).copy_from(&base);
    for (i, &s) in plus.iter().enumerate() {
        m[(base.nrows() + 2 * i, s)] = 1.0;
        m[(base.nrows() + 2 * i + 1, n + s)] = 1.0;
    }
    let z = linalg::null_space(&m, NULL_TOL);
    if z.ncols() == 0 {
        return HypothesisCheck { holds: true, witness: None };
    }
    let zf = z.rows(0, n).into_owned();
    let (sv, v) = linalg::full_svd(&zf);
    if sv.first().copied().unwrap_or(0.0) <= NULL_TOL {
        return HypothesisCheck { holds: true, witness: None };
    }
    let x = &z * v.column(0);
    let mut f: Vec<f64> = x.rows(0, n).iter().copied().collect();
    let mut fp: Vec<f64> = x.rows(n, n).iter().copied().collect();
    let top = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lead = f.iter().copied().find(|v| v.abs() > 1e-8 * top).unwrap_or(1.0);
    let scale = lead.signum() / top;
    for v in f.iter_mut().chain(fp.iter_mut()) {
        *v *= scale;
        if v.abs() < 1e-14 {
            *v = 0.0;
        }
    }
    HypothesisCheck { holds: false, witness: Some((f, fp)) }
}

/// Groups of vertices joined through shrinking edges, in order of their
/// smallest member.
fn merged_groups(p: &SchrodingerProblem, plan: &ShrinkPlan) -> Vec<Vec<usize>> {
    let nv = p.graph().vertex_count();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &e in &plan.zero {
        let edge = p.graph().edge(e);
        let (a, b) = (find(&mut parent, edge.origin), find(&mut parent, edge.terminus));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot_of = vec![usize::MAX; nv];
    for v in 0..nv {
        let r = find(&mut parent, v);
        if slot_of[r] == usize::MAX {
            slot_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot_of[r]].push(v);
    }
    groups
}

/// The limit problem on `Γ+`. Vertices joined through shrinking edges are
/// merged and named by joining their ids with `+`.
pub fn limit_problem(p: &SchrodingerProblem, plan: &ShrinkPlan) -> Result<SchrodingerProblem> {
    if plan.zero.is_empty() {
        return Ok(p.clone());
    }
    let check = check_hypothesis(p, plan);
    if !check.holds {
        return Err(Error::HypothesisViolated);
    }
    let g = p.graph();
    let n = 2 * g.edge_count();
    let full = linalg::null_space(&constraints(p, plan), NULL_TOL);
    let owners = g.slot_owners();
    let mut vertices: Vec<(String, VertexSpec)> = Vec::new();
    let mut rename = vec![String::new(); g.vertex_count()];
    for group in merged_groups(p, plan) {
        let id = group.iter().map(|&v| g.vertex_id(v).to_string()).collect::<Vec<_>>().join("+");
        for &v in &group {
            rename[v] = id.clone();
        }
        let slots: Vec<usize> = plan.plus_slots().into_iter().filter(|s| group.contains(&owners[*s].0)).collect();
        if slots.is_empty() {
            continue;
        }
        let d = slots.len();
        let mut s = Mat::zeros(2 * d, full.ncols());
        for (i, &slot) in slots.iter().enumerate() {
            s.row_mut(i).copy_from(&full.row(slot));
            s.row_mut(d + i).copy_from(&full.row(n + slot));
        }
        let cond: VertexCondition = condition_from_subspace(&s).map_err(|e| {
            Error::Solver(format!("limit boundary space at '{id}' is inconsistent: {e}"))
        })?;
        vertices.push((id, VertexSpec::Explicit(cond)));
    }
    let edges: Vec<EdgeSpec> = plan
        .plus
        .iter()
        .map(|&e| {
            let edge = g.edge(e);
            EdgeSpec::new(&edge.id, &rename[edge.origin], &rename[edge.terminus], edge.length)
                .with_potential(edge.potential.clone())
        })
        .collect();
    SchrodingerProblem::from_parts(&vertices, &edges)
}

/// Distance between two ascending eigenvalue lists of equal length, matched
/// index by index, relative to `1 + |μ|`.
pub fn hausdorff_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / (1.0 + y.abs())).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStep {
    pub step: usize,
    pub length: f64,
    pub distance: f64,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub limit: SchrodingerProblem,
    pub limit_eigenvalues: Vec<f64>,
    pub steps: Vec<ConvergenceStep>,
}

impl ConvergenceReport {
    pub fn final_distance(&self) -> f64 {
        self.steps.last().map(|s| s.distance).unwrap_or(0.0)
    }

    /// Monotone decrease, allowing `slack` non-monotone steps.
    pub fn eventually_decreasing(&self, slack: usize) -> bool {
        let bad = self.steps.windows(2).filter(|w| w[1].distance > w[0].distance * (1.0 + 1e-9) + 1e-12).count();
        bad <= slack
    }
}

/// The problem with every shrinking edge set to `length` (potentials stretched).
pub fn with_shrunk_length(p: &SchrodingerProblem, plan: &ShrinkPlan, length: f64) -> Result<SchrodingerProblem> {
    let mut edges = p.edge_specs();
    for &e in &plan.zero {
        let old = edges[e].length;
        edges[e].potential = edges[e].potential.stretched(old, length);
        edges[e].length = length;
    }
    SchrodingerProblem::from_parts(&p.vertex_specs(), &edges)
}

pub fn convergence_test(p: &SchrodingerProblem, plan: &ShrinkPlan, schedule: &[f64], k: usize) -> Result<ConvergenceReport> {
    convergence_test_with(p, plan, schedule, k, Exec::default())
}

pub fn convergence_test_with(
    p: &SchrodingerProblem,
    plan: &ShrinkPlan,
    schedule: &[f64],
    k: usize,
    exec: Exec,
) -> Result<ConvergenceReport> {
    if schedule.is_empty() || schedule.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Input("schedule must be nonempty with positive lengths".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Input("schedule must be strictly decreasing".into()));
    }
    let limit = limit_problem(p, plan)?;
    let limit_eigenvalues = first_eigenvalues(&limit, k)?;
    let steps: Vec<Result<ConvergenceStep>> = par::map(exec, schedule, |&len| {
        let q = if plan.zero.is_empty() { p.clone() } else { with_shrunk_length(p, plan, len)? };
        let ev = first_eigenvalues(&q, k)?;
        Ok(ConvergenceStep { step: 0, length: len, distance: hausdorff_distance(&ev, &limit_eigenvalues), eigenvalues: ev })
    });
    let mut out = Vec::with_capacity(steps.len());
    for (i, s) in steps.into_iter().enumerate() {
        let mut s = s?;
        s.step = i;
        out.push(s);
    }
    Ok(ConvergenceReport { limit, limit_eigenvalues, steps: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::{from_family, Family};
    use crate::problem::ProblemBuilder;
    use std::f64::consts::PI;

    fn lasso() -> SchrodingerProblem {
        ProblemBuilder::new()
            .vertex("u", Family::Dirichlet)
            .vertex("v", Family::AntiKirchhoff)
            .edge("e1", "u", "v", 1.0)
            .edge("e2", "v", "v", 1.0)
            .build()
            .unwrap()
    }

    fn same_condition(a: &VertexCondition, b: &VertexCondition) -> bool {
        linalg::max_principal_angle(&a.admissible_subspace(), &b.admissible_subspace(), 1e-10) < 1e-9
    }

    #[test]
    fn lasso_shrink_loop_gives_dirichlet_neumann() {
        let p = lasso();
        let plan = ShrinkPlan::new(&p, &["e2"]).unwrap();
        assert!(check_hypothesis(&p, &plan).holds);
        let q = limit_problem(&p, &plan).unwrap();
        assert_eq!(q.graph().vertex_ids(), &["u".to_string(), "v".to_string()]);
        assert!(same_condition(q.condition(0), &from_family(Family::Dirichlet, 1).unwrap()));
        assert!(same_condition(q.condition(1), &from_family(Family::Neumann, 1).unwrap()));
        let ev = first_eigenvalues(&q, 2).unwrap();
        assert!((ev[0] - PI * PI / 4.0).abs() < 1e-9);
    }

    #[test]
    fn lasso_shrink_stem_gives_antikirchhoff_loop() {
        let p = lasso();
        let plan = ShrinkPlan::new(&p, &["e1"]).unwrap();
        assert!(check_hypothesis(&p, &plan).holds);
        let q = limit_problem(&p, &plan).unwrap();
        assert_eq!(q.graph().vertex_count(), 1);
        assert_eq!(q.condition(0).family, Family::AntiKirchhoff);
    }

    #[test]
    fn pumpkin_violation_witness() {
        let p = ProblemBuilder::new()
            .vertex("v1", Family::AntiKirchhoff)
            .vertex("v2", Family::DeltaPrime(0.7))
            .edge("e1", "v1", "v2", 1.0)
            .edge("e2", "v1", "v2", 1.3)
            .edge("e3", "v1", "v2", 0.8)
            .build()
            .unwrap();
        let plan = ShrinkPlan::new(&p, &["e1", "e2"]).unwrap();
        let c = check_hypothesis(&p, &plan);
        assert!(!c.holds);
        let (f, fp) = c.witness.unwrap();
        let expected = [1.0, 1.0, -1.0, -1.0, 0.0, 0.0];
        assert!(f.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12), "{f:?}");
        assert!(fp.iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(limit_problem(&p, &plan), Err(Error::HypothesisViolated)));
    }

    #[test]
    fn antikirchhoff_circle_merges_to_kirchhoff() {
        let p = ProblemBuilder::new()
            .vertex("a", Family::AntiKirchhoff)
            .vertex("b", Family::AntiKirchhoff)
            .vertex("c", Family::AntiKirchhoff)
            .edge("e0", "a", "b", 0.5)
            .edge("e1", "b", "c", 1.0)
            .edge("e2", "c", "a", 1.5)
            .build()
            .unwrap();
        let plan = ShrinkPlan::new(&p, &["e0"]).unwrap();
        let q = limit_problem(&p, &plan).unwrap();
        assert_eq!(q.graph().vertex_ids(), &["a+b".to_string(), "c".to_string()]);
        assert_eq!(q.condition(0).family, Family::kirchhoff());
        assert_eq!(q.condition(1).family, Family::AntiKirchhoff);
    }

    #[test]
    fn empty_plan_is_identity() {
        let p = lasso();
        let plan = ShrinkPlan::new(&p, &[]).unwrap();
        let r = convergence_test(&p, &plan, &[0.5, 0.1], 3).unwrap();
        assert!(r.steps.iter().all(|s| s.distance == 0.0));
    }

    #[test]
    fn lasso_spectra_converge() {
        let p = lasso();
        let plan = ShrinkPlan::new(&p, &["e2"]).unwrap();
        let r = convergence_test(&p, &plan, &[0.5, 0.25, 0.1, 0.02], 4).unwrap();
        for (k, mu) in r.limit_eigenvalues.iter().enumerate() {
            let exact = ((k as f64 + 0.5) * PI).powi(2);
            assert!((mu - exact).abs() < 1e-8 * exact);
        }
        assert!(r.final_distance() < 5e-2, "{:?}", r.steps);
        assert!(r.eventually_decreasing(1));
    }
}
