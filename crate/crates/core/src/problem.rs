//! Schrödinger problems: a metric graph with potentials and vertex conditions.

use crate::condition::{from_family, Family, VertexCondition};
use crate::error::{Error, Result};
use crate::graph::{EdgeSpec, MetricGraph};

/// How a vertex condition is specified before degrees are known.
#[derive(Debug, Clone, PartialEq)]
pub enum VertexSpec {
    Family(Family),
    Explicit(VertexCondition),
}

impl From<Family> for VertexSpec {
    fn from(f: Family) -> Self {
        VertexSpec::Family(f)
    }
}

impl From<VertexCondition> for VertexSpec {
    fn from(c: VertexCondition) -> Self {
        VertexSpec::Explicit(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerProblem {
    graph: MetricGraph,
    conditions: Vec<VertexCondition>,
}

impl SchrodingerProblem {
    pub fn new(graph: MetricGraph, conditions: Vec<VertexCondition>) -> Result<Self> {
        if conditions.len() != graph.vertex_count() {
            return Err(Error::Input("one condition per vertex required".into()));
        }
        for (v, c) in conditions.iter().enumerate() {
            if c.degree != graph.degree(v) {
                return Err(Error::Input(format!(
                    "condition at '{}' has degree {} but the vertex has degree {}",
                    graph.vertex_id(v),
                    c.degree,
                    graph.degree(v)
                )));
            }
            c.validate()?;
        }
        Ok(SchrodingerProblem { graph, conditions })
    }

    /// Build from vertex specifications and edges; family conditions take the
    /// degree of their vertex.
    pub fn from_parts(vertices: &[(String, VertexSpec)], edges: &[EdgeSpec]) -> Result<Self> {
        let ids: Vec<String> = vertices.iter().map(|(id, _)| id.clone()).collect();
        let graph = MetricGraph::build(&ids, edges)?;
        let mut conditions = Vec::with_capacity(vertices.len());
        for (v, (_, spec)) in vertices.iter().enumerate() {
            let d = graph.degree(v);
            conditions.push(match spec {
                VertexSpec::Family(f) => from_family(*f, d)?,
                VertexSpec::Explicit(c) => c.clone(),
            });
        }
        Self::new(graph, conditions)
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn conditions(&self) -> &[VertexCondition] {
        &self.conditions
    }

    pub fn condition(&self, v: usize) -> &VertexCondition {
        &self.conditions[v]
    }

    /// Vertex specifications that rebuild this problem (families where known).
    pub fn vertex_specs(&self) -> Vec<(String, VertexSpec)> {
        self.graph
            .vertex_ids()
            .iter()
            .zip(&self.conditions)
            .map(|(id, c)| {
                let spec = match c.family {
                    Family::Custom => VertexSpec::Explicit(c.clone()),
                    f => VertexSpec::Family(f),
                };
                (id.clone(), spec)
            })
            .collect()
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.graph.edge_specs()
    }

    pub fn vertex(&self, id: &str) -> Result<usize> {
        self.graph.vertex_index(id).ok_or_else(|| Error::Input(format!("unknown vertex '{id}'")))
    }

    pub fn edge(&self, id: &str) -> Result<usize> {
        self.graph.edge_index(id).ok_or_else(|| Error::Input(format!("unknown edge '{id}'")))
    }

    /// δ strengths of all vertices, if every condition is of δ type.
    pub fn delta_strengths(&self) -> Option<Vec<f64>> {
        self.conditions.iter().map(|c| c.family.delta_strength()).collect()
    }

    /// δ′ strengths (anti-Kirchhoff as zero), if every condition is δ′-type.
    pub fn deltaprime_strengths(&self) -> Option<Vec<f64>> {
        self.conditions.iter().map(|c| c.family.deltaprime_strength()).collect()
    }

    pub fn potential_integral(&self) -> f64 {
        self.graph.edges().iter().map(|e| e.potential.integral(e.length)).sum()
    }

    pub fn potential_sup(&self) -> f64 {
        self.graph.edges().iter().fold(0.0f64, |m, e| m.max(e.potential.sup_norm()))
    }

    pub fn potential_min(&self) -> f64 {
        self.graph.edges().iter().fold(f64::INFINITY, |m, e| m.min(e.potential.min_value()))
    }

    /// Sum of spectral norms of the Robin operators.
    pub fn robin_norm_sum(&self) -> f64 {
        self.conditions
            .iter()
            .map(|c| crate::linalg::singular_values(&c.lambda).first().copied().unwrap_or(0.0))
            .sum()
    }
}

/// Fluent builder, convenient in tests and examples.
#[derive(Debug, Clone, Default)]
pub struct ProblemBuilder {
    vertices: Vec<(String, VertexSpec)>,
    edges: Vec<EdgeSpec>,
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: &str, spec: impl Into<VertexSpec>) -> Self {
        self.vertices.push((id.to_string(), spec.into()));
        self
    }

    pub fn edge(mut self, id: &str, from: &str, to: &str, length: f64) -> Self {
        self.edges.push(EdgeSpec::new(id, from, to, length));
        self
    }

    pub fn edge_spec(mut self, spec: EdgeSpec) -> Self {
        self.edges.push(spec);
        self
    }

    pub fn build(self) -> Result<SchrodingerProblem> {
        SchrodingerProblem::from_parts(&self.vertices, &self.edges)
    }
}
