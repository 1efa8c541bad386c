//! Graph surgery: pure problem-to-problem transformations, the eigenvalue
//! inequality each transformation is known to satisfy, and a seeded harness
//! that checks those inequalities on random instances.
//!
//! The edits are total. Whether an inequality is claimed for a particular edit
//! is decided separately by [`claim`], so edits outside the hypotheses (the
//! counterexamples) can still be performed and inspected.

mod random;
pub mod verify;

pub use random::{random_custom_condition, Generator};
pub use verify::{check, compare, verify, verify_with, InequalityReport, Theorem, Verdict, SCALE_TOL, SLACK_TOL};

use crate::condition::{Family, VertexCondition};
use crate::error::{Error, Result};
use crate::graph::{End, EdgeSpec, Potential};
use crate::linalg::{self, Mat};
use crate::problem::{SchrodingerProblem, VertexSpec};

/// A set of vertices and edges that is glued into a problem. Unlike a
/// [`SchrodingerProblem`] it may contain vertices without edges, since they
/// receive edges from the host graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fragment {
    pub vertices: Vec<(String, VertexSpec)>,
    pub edges: Vec<EdgeSpec>,
}

impl Fragment {
    pub fn from_problem(p: &SchrodingerProblem) -> Self {
        Fragment { vertices: p.vertex_specs(), edges: p.edge_specs() }
    }

    pub fn spec(&self, id: &str) -> Option<&VertexSpec> {
        self.vertices.iter().find(|(v, _)| v == id).map(|(_, s)| s)
    }

    pub fn potential_integral(&self) -> f64 {
        self.edges.iter().map(|e| e.potential.integral(e.length)).sum()
    }

    fn check(&self) -> Result<()> {
        for e in &self.edges {
            for end in [&e.from, &e.to] {
                if self.spec(end).is_none() {
                    return Err(Error::Input(format!("fragment edge '{}' references unknown vertex '{end}'", e.id)));
                }
            }
        }
        Ok(())
    }
}

/// Replacement for the condition at one vertex.
#[derive(Debug, Clone, PartialEq)]
pub enum StrengthTarget {
    Family(Family),
    /// A new Robin operator on the same `ran P_R`.
    Lambda(Mat),
}

/// One surgery operation with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SurgerySpec {
    Scale { t: f64 },
    LengthenEdge { edge: String, length: f64 },
    AttachEdge { id: String, from: String, to: String, length: f64, potential: Potential },
    AttachPendant { vertex: String, fragment: Fragment, port: String },
    /// `assignment[i]` is the fragment vertex receiving the `i`-th incidence
    /// entry of `vertex`.
    InsertGraph { vertex: String, fragment: Fragment, assignment: Vec<String> },
    JoinVertices { first: String, second: String },
    SetStrength { vertex: String, target: StrengthTarget },
    DeltaToDeltaPrime { vertex: String, beta: f64 },
    UnfoldParallel { edges: Vec<String> },
    UnfoldPendant { vertex: String, edges: Vec<String> },
}

impl SurgerySpec {
    pub fn tag(&self) -> &'static str {
        match self {
            SurgerySpec::Scale { .. } => "scale",
            SurgerySpec::LengthenEdge { .. } => "lengthen-edge",
            SurgerySpec::AttachEdge { .. } => "attach-edge",
            SurgerySpec::AttachPendant { .. } => "attach-pendant-graph",
            SurgerySpec::InsertGraph { .. } => "insert-graph",
            SurgerySpec::JoinVertices { .. } => "join-vertices",
            SurgerySpec::SetStrength { .. } => "set-strength",
            SurgerySpec::DeltaToDeltaPrime { .. } => "delta-to-deltaprime",
            SurgerySpec::UnfoldParallel { .. } => "unfold-parallel",
            SurgerySpec::UnfoldPendant { .. } => "unfold-pendant",
        }
    }
}

/// Which eigenvalues an inequality speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Indices {
    All,
    /// Only `k` with `λ_k(H) ≥ 0`.
    NonNegative,
    /// Only `λ_1`.
    First,
}

/// The eigenvalue relation between a problem `H` and its surgery `H̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Claim {
    /// `λ_k(H̃) ≤ λ_k(H)`.
    Decrease(Indices),
    /// `λ_k(H) ≤ λ_k(H̃)`.
    Increase(Indices),
    /// `λ_k(H̃) = λ_k(H)/t²`.
    Scaled(f64),
}

pub fn apply(p: &SchrodingerProblem, spec: &SurgerySpec) -> Result<SchrodingerProblem> {
    match spec {
        SurgerySpec::Scale { t } => scale(p, *t),
        SurgerySpec::LengthenEdge { edge, length } => lengthen_edge(p, edge, *length),
        SurgerySpec::AttachEdge { id, from, to, length, potential } => {
            attach_edge(p, id, from, to, *length, potential.clone())
        }
        SurgerySpec::AttachPendant { vertex, fragment, port } => attach_pendant(p, vertex, fragment, port),
        SurgerySpec::InsertGraph { vertex, fragment, assignment } => insert_graph(p, vertex, fragment, assignment),
        SurgerySpec::JoinVertices { first, second } => join_vertices(p, first, second),
        SurgerySpec::SetStrength { vertex, target } => set_strength(p, vertex, target),
        SurgerySpec::DeltaToDeltaPrime { vertex, beta } => delta_to_deltaprime(p, vertex, *beta),
        SurgerySpec::UnfoldParallel { edges } => {
            let ids: Vec<&str> = edges.iter().map(String::as_str).collect();
            unfold_parallel(p, &ids)
        }
        SurgerySpec::UnfoldPendant { vertex, edges } => {
            let ids: Vec<&str> = edges.iter().map(String::as_str).collect();
            unfold_pendant(p, vertex, &ids)
        }
    }
}

/// Scale every length by `t`: `q ↦ q(·/t)/t²`, `Λ ↦ Λ/t`.
pub fn scale(p: &SchrodingerProblem, t: f64) -> Result<SchrodingerProblem> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Input(format!("scale factor must be positive, got {t}")));
    }
    let edges: Vec<EdgeSpec> = p
        .edge_specs()
        .into_iter()
        .map(|mut e| {
            e.potential = e.potential.scaled(t);
            e.length *= t;
            e
        })
        .collect();
    let vertices: Vec<(String, VertexSpec)> = p
        .graph()
        .vertex_ids()
        .iter()
        .zip(p.conditions())
        .map(|(id, c)| (id.clone(), VertexSpec::Explicit(c.scaled(t))))
        .collect();
    SchrodingerProblem::from_parts(&vertices, &edges)
}

/// Stretch one edge to a larger length; its potential profile is stretched along.
pub fn lengthen_edge(p: &SchrodingerProblem, edge: &str, length: f64) -> Result<SchrodingerProblem> {
    let e = p.edge(edge)?;
    let old = p.graph().edge(e).length;
    if !(length > old && length.is_finite()) {
        return Err(Error::Input(format!("new length {length} must exceed the current length {old}")));
    }
    let mut edges = p.edge_specs();
    edges[e].potential = edges[e].potential.stretched(old, length);
    edges[e].length = length;
    SchrodingerProblem::from_parts(&p.vertex_specs(), &edges)
}

/// Add an edge between two existing vertices; family conditions keep their
/// strength at the increased degree.
pub fn attach_edge(
    p: &SchrodingerProblem,
    id: &str,
    from: &str,
    to: &str,
    length: f64,
    potential: Potential,
) -> Result<SchrodingerProblem> {
    p.vertex(from)?;
    p.vertex(to)?;
    let mut edges = p.edge_specs();
    edges.push(EdgeSpec::new(id, from, to, length).with_potential(potential));
    SchrodingerProblem::from_parts(&p.vertex_specs(), &edges)
}

fn prefixed(prefix: &str, id: &str) -> String {
    format!("{prefix}.{id}")
}

/// Glue `fragment` to the host by identifying its vertex `port` with `vertex`.
/// The host condition at `vertex` keeps its family; the port's own condition is
/// discarded. Fragment ids are prefixed with `vertex.`.
pub fn attach_pendant(p: &SchrodingerProblem, vertex: &str, fragment: &Fragment, port: &str) -> Result<SchrodingerProblem> {
    p.vertex(vertex)?;
    fragment.check()?;
    if fragment.spec(port).is_none() {
        return Err(Error::Input(format!("fragment has no vertex '{port}'")));
    }
    let rename = |w: &str| if w == port { vertex.to_string() } else { prefixed(vertex, w) };
    let mut vertices = p.vertex_specs();
    for (w, s) in &fragment.vertices {
        if w != port {
            vertices.push((rename(w), s.clone()));
        }
    }
    let mut edges = p.edge_specs();
    for e in &fragment.edges {
        edges.push(EdgeSpec {
            id: prefixed(vertex, &e.id),
            from: rename(&e.from),
            to: rename(&e.to),
            length: e.length,
            potential: e.potential.clone(),
        });
    }
    SchrodingerProblem::from_parts(&vertices, &edges)
}

/// Remove `vertex` and reconnect each of its edge ends to the assigned
/// fragment vertex. Fragment ids are prefixed with `vertex.`.
pub fn insert_graph(
    p: &SchrodingerProblem,
    vertex: &str,
    fragment: &Fragment,
    assignment: &[String],
) -> Result<SchrodingerProblem> {
    let v0 = p.vertex(vertex)?;
    fragment.check()?;
    let g = p.graph();
    let inc = g.incidence(v0);
    if assignment.len() != inc.len() {
        return Err(Error::Input(format!(
            "assignment has {} entries but '{vertex}' has degree {}",
            assignment.len(),
            inc.len()
        )));
    }
    for a in assignment {
        if fragment.spec(a).is_none() {
            return Err(Error::Input(format!("fragment has no vertex '{a}'")));
        }
    }
    let mut edges = p.edge_specs();
    for (i, entry) in inc.iter().enumerate() {
        let target = prefixed(vertex, &assignment[i]);
        match entry.end {
            End::Origin => edges[entry.edge].from = target,
            End::Terminus => edges[entry.edge].to = target,
        }
    }
    for e in &fragment.edges {
        edges.push(EdgeSpec {
            id: prefixed(vertex, &e.id),
            from: prefixed(vertex, &e.from),
            to: prefixed(vertex, &e.to),
            length: e.length,
            potential: e.potential.clone(),
        });
    }
    let mut vertices: Vec<(String, VertexSpec)> =
        p.vertex_specs().into_iter().enumerate().filter(|(v, _)| *v != v0).map(|(_, s)| s).collect();
    for (w, s) in &fragment.vertices {
        vertices.push((prefixed(vertex, w), s.clone()));
    }
    SchrodingerProblem::from_parts(&vertices, &edges)
}

/// Condition at a vertex formed by joining two vertices: δ strengths add, δ′
/// strengths add (a zero sum gives anti-Kirchhoff).
fn joined_family(a: Family, b: Family) -> Result<Family> {
    if let (Some(x), Some(y)) = (a.delta_strength(), b.delta_strength()) {
        return Ok(Family::Delta(x + y));
    }
    if let (Some(x), Some(y)) = (a.deltaprime_strength(), b.deltaprime_strength()) {
        return Ok(Family::deltaprime_or_anti(x + y));
    }
    Err(Error::Precondition(format!(
        "joining needs two delta or two deltaprime vertices, got {} and {}",
        a.name(),
        b.name()
    )))
}

/// Identify two vertices. The merged vertex is named `first+second` and takes
/// the position of `first`.
pub fn join_vertices(p: &SchrodingerProblem, first: &str, second: &str) -> Result<SchrodingerProblem> {
    let v1 = p.vertex(first)?;
    let v2 = p.vertex(second)?;
    if v1 == v2 {
        return Err(Error::Input("cannot join a vertex with itself".into()));
    }
    let family = joined_family(p.condition(v1).family, p.condition(v2).family)?;
    let merged = format!("{first}+{second}");
    let mut vertices = Vec::new();
    for (v, spec) in p.vertex_specs().into_iter().enumerate() {
        if v == v1 {
            vertices.push((merged.clone(), VertexSpec::Family(family)));
        } else if v != v2 {
            vertices.push(spec);
        }
    }
    let edges: Vec<EdgeSpec> = p
        .edge_specs()
        .into_iter()
        .map(|mut e| {
            if e.from == first || e.from == second {
                e.from = merged.clone();
            }
            if e.to == first || e.to == second {
                e.to = merged.clone();
            }
            e
        })
        .collect();
    SchrodingerProblem::from_parts(&vertices, &edges)
}

/// Replace the condition at one vertex, either by another family member or by
/// a new Robin operator on the same Robin subspace.
pub fn set_strength(p: &SchrodingerProblem, vertex: &str, target: &StrengthTarget) -> Result<SchrodingerProblem> {
    let v = p.vertex(vertex)?;
    let mut vertices = p.vertex_specs();
    vertices[v].1 = match target {
        StrengthTarget::Family(f) => VertexSpec::Family(*f),
        StrengthTarget::Lambda(l) => {
            let c = p.condition(v);
            if c.pr.trace() < 0.5 {
                return Err(Error::Precondition(format!("'{vertex}' has no Robin part")));
            }
            VertexSpec::Explicit(c.with_lambda(l.clone())?)
        }
    };
    SchrodingerProblem::from_parts(&vertices, &p.edge_specs())
}

/// Replace the δ condition at `vertex` by δ′ of strength `beta` (anti-Kirchhoff
/// for `beta = 0`).
pub fn delta_to_deltaprime(p: &SchrodingerProblem, vertex: &str, beta: f64) -> Result<SchrodingerProblem> {
    let v = p.vertex(vertex)?;
    if p.condition(v).family.delta_strength().is_none() {
        return Err(Error::Precondition(format!("'{vertex}' does not carry a delta condition")));
    }
    set_strength(p, vertex, &StrengthTarget::Family(Family::deltaprime_or_anti(beta)))
}

fn edge_indices(p: &SchrodingerProblem, ids: &[&str]) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = ids.iter().map(|id| p.edge(id)).collect::<Result<_>>()?;
    out.sort_unstable();
    if out.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Input("edge listed twice".into()));
    }
    Ok(out)
}

/// Replace parallel edges by one edge of the summed length and zero potential,
/// oriented like the first listed edge and placed at its position.
pub fn unfold_parallel(p: &SchrodingerProblem, ids: &[&str]) -> Result<SchrodingerProblem> {
    if ids.len() < 2 {
        return Err(Error::Input("unfolding needs at least two edges".into()));
    }
    let idx = edge_indices(p, ids)?;
    let g = p.graph();
    let first = g.edge(p.edge(ids[0])?);
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let k0 = key(first.origin, first.terminus);
    for &e in &idx {
        let edge = g.edge(e);
        if key(edge.origin, edge.terminus) != k0 {
            return Err(Error::Precondition(format!("edge '{}' is not parallel to '{}'", edge.id, first.id)));
        }
    }
    let length: f64 = idx.iter().map(|&e| g.edge(e).length).sum();
    let replacement = EdgeSpec::new(
        &ids.join("+"),
        g.vertex_id(first.origin),
        g.vertex_id(first.terminus),
        length,
    );
    let mut edges = Vec::new();
    for (e, spec) in p.edge_specs().into_iter().enumerate() {
        if e == idx[0] {
            edges.push(replacement.clone());
        } else if !idx.contains(&e) {
            edges.push(spec);
        }
    }
    SchrodingerProblem::from_parts(&p.vertex_specs(), &edges)
}

/// Replace pendant edges at `vertex` by one pendant edge of the summed length,
/// zero potential and a Neumann leaf named by joining the old leaf ids.
pub fn unfold_pendant(p: &SchrodingerProblem, vertex: &str, ids: &[&str]) -> Result<SchrodingerProblem> {
    if ids.len() < 2 {
        return Err(Error::Input("unfolding needs at least two edges".into()));
    }
    let v0 = p.vertex(vertex)?;
    let idx = edge_indices(p, ids)?;
    let g = p.graph();
    let mut leaves = Vec::new();
    for id in ids {
        let edge = g.edge(p.edge(id)?);
        let leaf = if edge.origin == v0 {
            edge.terminus
        } else if edge.terminus == v0 {
            edge.origin
        } else {
            return Err(Error::Precondition(format!("edge '{id}' is not incident to '{vertex}'")));
        };
        if leaf == v0 || g.degree(leaf) != 1 {
            return Err(Error::Precondition(format!("edge '{id}' is not pendant")));
        }
        leaves.push(leaf);
    }
    let length: f64 = idx.iter().map(|&e| g.edge(e).length).sum();
    let leaf_id: Vec<&str> = leaves.iter().map(|&l| g.vertex_id(l)).collect();
    let leaf_id = leaf_id.join("+");
    let mut vertices: Vec<(String, VertexSpec)> = p
        .vertex_specs()
        .into_iter()
        .enumerate()
        .filter(|(v, _)| !leaves.contains(v))
        .map(|(_, s)| s)
        .collect();
    vertices.push((leaf_id.clone(), VertexSpec::Family(Family::Neumann)));
    let mut edges = Vec::new();
    for (e, spec) in p.edge_specs().into_iter().enumerate() {
        if e == idx[0] {
            edges.push(EdgeSpec::new(&ids.join("+"), vertex, &leaf_id, length));
        } else if !idx.contains(&e) {
            edges.push(spec);
        }
    }
    SchrodingerProblem::from_parts(&vertices, &edges)
}

fn delta_at(p: &SchrodingerProblem, v: usize) -> Option<f64> {
    p.condition(v).family.delta_strength()
}

fn deltaprime_at(p: &SchrodingerProblem, v: usize) -> Option<f64> {
    p.condition(v).family.deltaprime_strength()
}

fn spec_family(s: &VertexSpec) -> Family {
    match s {
        VertexSpec::Family(f) => *f,
        VertexSpec::Explicit(c) => c.family,
    }
}

fn nonneg_potential(p: &SchrodingerProblem, e: usize) -> bool {
    p.graph().edge(e).potential.min_value() >= 0.0
}

/// Robin operator restricted to `ran P_R`, in an orthonormal basis of it.
fn robin_block(c: &VertexCondition, lambda: &Mat) -> Mat {
    let basis = linalg::range_basis(&c.pr, 1e-6);
    basis.transpose() * lambda * &basis
}

/// The inequality the surgery principles guarantee for `spec` applied to `p`,
/// or the reason no inequality is claimed.
pub fn claim(p: &SchrodingerProblem, spec: &SurgerySpec) -> std::result::Result<Claim, String> {
    let vid = |id: &str| p.vertex(id).map_err(|e| e.to_string());
    match spec {
        SurgerySpec::Scale { t } => {
            if *t > 0.0 {
                Ok(Claim::Scaled(*t))
            } else {
                Err("scale factor must be positive".into())
            }
        }
        SurgerySpec::LengthenEdge { edge, length } => {
            let e = p.edge(edge).map_err(|e| e.to_string())?;
            let edge = p.graph().edge(e);
            // Stretching a potential changes its integral; the estimate only
            // survives when it is a nonpositive constant on the edge.
            let flat = edge.potential.values.iter().all(|&q| q == edge.potential.values[0]);
            if !flat || edge.potential.min_value() > 0.0 {
                return Err(format!("potential on '{edge}' is not a nonpositive constant", edge = edge.id));
            }
            if *length > edge.length {
                Ok(Claim::Decrease(Indices::NonNegative))
            } else {
                Err("edge is not lengthened".into())
            }
        }
        SurgerySpec::AttachEdge { from, to, .. } => {
            let (a, b) = (vid(from)?, vid(to)?);
            if a == b {
                return Err("endpoints coincide".into());
            }
            if deltaprime_at(p, a).is_some() && deltaprime_at(p, b).is_some() {
                Ok(Claim::Decrease(Indices::All))
            } else {
                Err("both endpoints need deltaprime or anti-Kirchhoff conditions".into())
            }
        }
        SurgerySpec::AttachPendant { vertex, fragment, port } => {
            let v = vid(vertex)?;
            if deltaprime_at(p, v).is_some() {
                return Ok(Claim::Decrease(Indices::All));
            }
            if delta_at(p, v).is_none() {
                return Err("gluing vertex carries neither delta nor deltaprime".into());
            }
            for (w, s) in &fragment.vertices {
                if w == port {
                    continue;
                }
                match spec_family(s).delta_strength() {
                    Some(a) if a <= 0.0 => {}
                    _ => return Err(format!("fragment vertex '{w}' needs a delta condition of strength <= 0")),
                }
            }
            if fragment.potential_integral() > 0.0 {
                return Err("fragment potential has positive integral".into());
            }
            // Constant extension enlarges the norm, which raises negative
            // Rayleigh quotients; only the nonnegative part is monotone.
            Ok(Claim::Decrease(Indices::NonNegative))
        }
        SurgerySpec::InsertGraph { vertex, fragment, assignment } => {
            let v = vid(vertex)?;
            if let Some(alpha) = delta_at(p, v) {
                let mut sum = 0.0;
                for (w, s) in &fragment.vertices {
                    match spec_family(s).delta_strength() {
                        Some(a) => sum += a,
                        None => return Err(format!("inserted vertex '{w}' needs a delta condition")),
                    }
                }
                if sum > alpha + 1e-12 * (1.0 + alpha.abs()) {
                    return Err(format!("inserted strengths sum to {sum} > {alpha}"));
                }
                if fragment.potential_integral() > 0.0 {
                    return Err("inserted potential has positive integral".into());
                }
                return Ok(Claim::Decrease(Indices::NonNegative));
            }
            let beta = match deltaprime_at(p, v) {
                Some(b) if b < 0.0 => b,
                _ => return Err("insertion vertex needs delta or deltaprime with negative strength".into()),
            };
            let mut hat: Vec<&String> = assignment.iter().collect();
            hat.sort();
            hat.dedup();
            let mut sum = 0.0;
            for w in hat {
                match fragment.spec(w).map(|s| spec_family(s).deltaprime_strength()) {
                    Some(Some(b)) if b < 0.0 => sum += b,
                    _ => return Err(format!("vertex '{w}' needs deltaprime with negative strength")),
                }
            }
            if (sum - beta).abs() > 1e-9 * (1.0 + beta.abs()) {
                return Err(format!("strengths sum to {sum}, not {beta}"));
            }
            Ok(Claim::Decrease(Indices::All))
        }
        SurgerySpec::JoinVertices { first, second } => {
            let (a, b) = (vid(first)?, vid(second)?);
            if a == b {
                return Err("vertices coincide".into());
            }
            if delta_at(p, a).is_some() && delta_at(p, b).is_some() {
                return Ok(Claim::Increase(Indices::All));
            }
            match (deltaprime_at(p, a), deltaprime_at(p, b)) {
                (Some(b1), Some(b2)) => {
                    let b0 = b1 + b2;
                    if (b1 >= 0.0 && b2 >= 0.0) || (b1 * b2 < 0.0 && b0 < 0.0) {
                        Ok(Claim::Decrease(Indices::All))
                    } else {
                        Ok(Claim::Increase(Indices::All))
                    }
                }
                _ => Err("joining needs two delta or two deltaprime vertices".into()),
            }
        }
        SurgerySpec::SetStrength { vertex, target } => {
            let v = vid(vertex)?;
            let c = p.condition(v);
            match target {
                StrengthTarget::Lambda(l) => {
                    if c.pr.trace() < 0.5 {
                        return Err("no Robin part".into());
                    }
                    let diff = robin_block(c, &(l - &c.lambda));
                    let top = linalg::sym_eigen(&diff).0.last().copied().unwrap_or(0.0);
                    if top <= 1e-12 * (1.0 + linalg::max_abs(&c.lambda)) {
                        Ok(Claim::Decrease(Indices::All))
                    } else {
                        Err("new Robin operator is not below the old one".into())
                    }
                }
                StrengthTarget::Family(f) => {
                    if let (Some(a), Some(b)) = (c.family.delta_strength(), f.delta_strength()) {
                        return if b <= a {
                            Ok(Claim::Decrease(Indices::All))
                        } else {
                            Err("delta strength increases".into())
                        };
                    }
                    if let (Some(b), Some(bt)) = (c.family.deltaprime_strength(), f.deltaprime_strength()) {
                        let ok = (0.0 < b && b < bt) || (b < bt && bt < 0.0) || (bt < 0.0 && 0.0 < b) || (bt < b && b == 0.0);
                        return if ok || b == bt {
                            Ok(Claim::Decrease(Indices::All))
                        } else {
                            Err("deltaprime strength change outside the monotone cases".into())
                        };
                    }
                    Err("strength change needs matching families".into())
                }
            }
        }
        SurgerySpec::DeltaToDeltaPrime { vertex, beta } => {
            let v = vid(vertex)?;
            let alpha = delta_at(p, v).ok_or("vertex does not carry delta")?;
            if *beta == 0.0 {
                return Err("anti-Kirchhoff replacement carries no inequality".into());
            }
            let d = p.graph().degree(v) as f64;
            if d * d / beta <= alpha {
                Ok(Claim::Decrease(Indices::All))
            } else {
                Err(format!("deg^2/beta = {} exceeds alpha = {alpha}", d * d / beta))
            }
        }
        SurgerySpec::UnfoldParallel { edges } => {
            if p.delta_strengths().is_none() {
                return Err("all vertices need delta conditions".into());
            }
            for id in edges {
                let e = p.edge(id).map_err(|e| e.to_string())?;
                if !nonneg_potential(p, e) {
                    return Err(format!("potential on '{id}' is not nonnegative"));
                }
            }
            Ok(Claim::Decrease(Indices::First))
        }
        SurgerySpec::UnfoldPendant { vertex, edges } => {
            let v0 = vid(vertex)?;
            if p.delta_strengths().is_none() {
                return Err("all vertices need delta conditions".into());
            }
            for id in edges {
                let e = p.edge(id).map_err(|e| e.to_string())?;
                if !nonneg_potential(p, e) {
                    return Err(format!("potential on '{id}' is not nonnegative"));
                }
                let edge = p.graph().edge(e);
                let leaf = if edge.origin == v0 { edge.terminus } else { edge.origin };
                if delta_at(p, leaf).unwrap_or(-1.0) < 0.0 {
                    return Err("leaf strengths must be nonnegative".into());
                }
            }
            Ok(Claim::Decrease(Indices::First))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemBuilder;
    use crate::secular::first_eigenvalues;
    use std::f64::consts::PI;

    fn interval(a: Family, b: Family, l: f64) -> SchrodingerProblem {
        ProblemBuilder::new().vertex("a", a).vertex("b", b).edge("e", "a", "b", l).build().unwrap()
    }

    #[test]
    fn scale_interval() {
        let p = interval(Family::Neumann, Family::Neumann, 1.0);
        let q = scale(&p, 2.0).unwrap();
        let ev = first_eigenvalues(&q, 2).unwrap();
        assert!((ev[1] - PI * PI / 4.0).abs() < 1e-9);
        assert_eq!(scale(&p, 1.0).unwrap(), p);
    }

    #[test]
    fn stretching_a_positive_potential_can_raise_eigenvalues() {
        let p = ProblemBuilder::new()
            .vertex("a", Family::Neumann)
            .vertex("m", Family::kirchhoff())
            .vertex("b", Family::Neumann)
            .edge("e1", "a", "m", 1.0)
            .edge_spec(EdgeSpec::new("e2", "m", "b", 0.1).with_potential(Potential::constant(1.0)))
            .build()
            .unwrap();
        let spec = SurgerySpec::LengthenEdge { edge: "e2".into(), length: 2.0 };
        let q = apply(&p, &spec).unwrap();
        let (before, after) = (first_eigenvalues(&p, 1).unwrap()[0], first_eigenvalues(&q, 1).unwrap()[0]);
        assert!(before > 0.0 && after > before + 0.1, "{before} {after}");
        assert!(claim(&p, &spec).is_err());
        let spec = SurgerySpec::LengthenEdge { edge: "e1".into(), length: 2.0 };
        assert_eq!(claim(&p, &spec), Ok(Claim::Decrease(Indices::NonNegative)));
    }

    #[test]
    fn delta_pendant_can_raise_negative_eigenvalues() {
        let p = interval(Family::Delta(-2.0), Family::Neumann, 3.0);
        let fragment = Fragment {
            vertices: vec![("w0".into(), Family::kirchhoff().into()), ("w1".into(), Family::Delta(0.0).into())],
            edges: vec![EdgeSpec::new("f", "w0", "w1", 3.0)],
        };
        let spec = SurgerySpec::AttachPendant { vertex: "a".into(), fragment, port: "w0".into() };
        let q = apply(&p, &spec).unwrap();
        let (before, after) = (first_eigenvalues(&p, 1).unwrap()[0], first_eigenvalues(&q, 1).unwrap()[0]);
        assert!(before < -3.9 && after > -1.1 && after < 0.0, "{before} {after}");
        assert_eq!(claim(&p, &spec), Ok(Claim::Decrease(Indices::NonNegative)));
    }

    #[test]
    fn join_interval_ends_gives_circle() {
        let p = interval(Family::kirchhoff(), Family::kirchhoff(), 1.0);
        let q = join_vertices(&p, "a", "b").unwrap();
        assert_eq!(q.graph().vertex_count(), 1);
        assert!(q.graph().edge(0).is_loop());
        let ev = first_eigenvalues(&q, 3).unwrap();
        assert!(ev[0].abs() < 1e-9);
        assert!((ev[1] - 4.0 * PI * PI).abs() < 1e-8 && (ev[2] - 4.0 * PI * PI).abs() < 1e-8);
        assert_eq!(claim(&p, &SurgerySpec::JoinVertices { first: "a".into(), second: "b".into() }), Ok(Claim::Increase(Indices::All)));
    }

    #[test]
    fn join_deltaprime_sign_cases() {
        let p = interval(Family::DeltaPrime(-1.0), Family::DeltaPrime(2.0), 1.0);
        let s = SurgerySpec::JoinVertices { first: "a".into(), second: "b".into() };
        assert_eq!(claim(&p, &s), Ok(Claim::Increase(Indices::All)));
        let p = interval(Family::DeltaPrime(-3.0), Family::DeltaPrime(2.0), 1.0);
        assert_eq!(claim(&p, &s), Ok(Claim::Decrease(Indices::All)));
        let p = interval(Family::DeltaPrime(-2.0), Family::DeltaPrime(2.0), 1.0);
        let q = join_vertices(&p, "a", "b").unwrap();
        assert_eq!(q.condition(0).family, Family::AntiKirchhoff);
    }

    #[test]
    fn attach_edge_rebuilds_degree() {
        let p = interval(Family::Delta(1.0), Family::kirchhoff(), 1.0);
        let q = attach_edge(&p, "f", "a", "b", 0.1, Potential::zero()).unwrap();
        assert_eq!(q.graph().degree(0), 2);
        assert_eq!(q.condition(0).family, Family::Delta(1.0));
        assert!(claim(&p, &SurgerySpec::AttachEdge {
            id: "f".into(),
            from: "a".into(),
            to: "b".into(),
            length: 0.1,
            potential: Potential::zero()
        })
        .is_err());
    }

    #[test]
    fn insert_single_vertex_is_relabeling() {
        let p = ProblemBuilder::new()
            .vertex("c", Family::Delta(0.7))
            .vertex("x", Family::Neumann)
            .vertex("y", Family::Dirichlet)
            .edge("e1", "c", "x", 1.0)
            .edge("e2", "y", "c", 0.6)
            .build()
            .unwrap();
        let frag = Fragment { vertices: vec![("m".into(), Family::Delta(0.7).into())], edges: vec![] };
        let q = insert_graph(&p, "c", &frag, &["m".to_string(), "m".to_string()]).unwrap();
        assert!(q.graph().vertex_index("c.m").is_some());
        let a = first_eigenvalues(&p, 4).unwrap();
        let b = first_eigenvalues(&q, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn unfold_pendant_antikirchhoff_counterexample() {
        let p = ProblemBuilder::new()
            .vertex("c", Family::AntiKirchhoff)
            .vertex("x", Family::Neumann)
            .vertex("y", Family::Neumann)
            .edge("e1", "c", "x", 0.7)
            .edge("e2", "c", "y", 0.5)
            .build()
            .unwrap();
        let q = unfold_pendant(&p, "c", &["e1", "e2"]).unwrap();
        assert_eq!(q.graph().vertex_count(), 2);
        let l = first_eigenvalues(&q, 1).unwrap()[0];
        assert!((l - PI * PI / (4.0 * 1.44)).abs() < 1e-9);
        assert!(claim(&p, &SurgerySpec::UnfoldPendant { vertex: "c".into(), edges: vec!["e1".into(), "e2".into()] }).is_err());
    }

    #[test]
    fn unfold_parallel_requires_parallel_edges() {
        let p = ProblemBuilder::new()
            .vertex("a", Family::kirchhoff())
            .vertex("b", Family::kirchhoff())
            .vertex("c", Family::kirchhoff())
            .edge("e1", "a", "b", 1.0)
            .edge("e2", "b", "a", 0.5)
            .edge("e3", "b", "c", 0.5)
            .build()
            .unwrap();
        let q = unfold_parallel(&p, &["e1", "e2"]).unwrap();
        assert_eq!(q.graph().edge_count(), 2);
        assert!((q.graph().edge(0).length - 1.5).abs() < 1e-15);
        assert!(unfold_parallel(&p, &["e1", "e3"]).is_err());
    }

    #[test]
    fn lengthen_stretches_potential() {
        let p = ProblemBuilder::new()
            .vertex("a", Family::Neumann)
            .vertex("b", Family::Neumann)
            .edge_spec(EdgeSpec::new("e", "a", "b", 1.0).with_potential(Potential::piecewise(vec![0.25], vec![1.0, 2.0])))
            .build()
            .unwrap();
        let q = lengthen_edge(&p, "e", 2.0).unwrap();
        assert_eq!(q.graph().edge(0).potential.breaks, vec![0.5]);
        assert!(lengthen_edge(&p, "e", 0.5).is_err());
    }
}
