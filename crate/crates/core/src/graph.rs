//! Metric graphs: vertices, edges parametrized over `[0, L(e)]`, potentials and
//! incidence bookkeeping.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Which end of an edge sits at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum End {
    /// `x = 0`, the origin `o(e)`.
    Origin,
    /// `x = L(e)`, the terminus `t(e)`.
    Terminus,
}

impl End {
    /// Index of this endpoint in the flattened `2E` boundary vector.
    pub fn slot(self, edge: usize) -> usize {
        match self {
            End::Origin => 2 * edge,
            End::Terminus => 2 * edge + 1,
        }
    }
}

/// Piecewise-constant potential on one edge.
///
/// `values[i]` holds on `[breaks[i-1], breaks[i])` with implicit outer breaks
/// `0` and `L(e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl Potential {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Potential { breaks: Vec::new(), values: vec![value] }
    }

    pub fn piecewise(breaks: Vec<f64>, values: Vec<f64>) -> Self {
        Potential { breaks, values }
    }

    pub fn is_constant(&self) -> bool {
        self.breaks.is_empty()
    }

    fn validate(&self, length: f64) -> Result<()> {
        if self.values.len() != self.breaks.len() + 1 {
            return Err(Error::Graph(format!(
                "potential needs {} values for {} breaks, got {}",
                self.breaks.len() + 1,
                self.breaks.len(),
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Graph("potential values must be finite".into()));
        }
        let mut prev = 0.0;
        for &b in &self.breaks {
            if !(b > prev && b < length) {
                return Err(Error::Graph(format!(
                    "potential breaks must increase strictly inside (0, {length})"
                )));
            }
            prev = b;
        }
        Ok(())
    }

    /// Constant pieces as `(length, value)` in order of increasing `x`.
    pub fn pieces(&self, length: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut start = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let end = if i < self.breaks.len() { self.breaks[i] } else { length };
            out.push((end - start, v));
            start = end;
        }
        out
    }

    /// `(start, end, value)` triples.
    pub fn segments(&self, length: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut start = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let end = if i < self.breaks.len() { self.breaks[i] } else { length };
            out.push((start, end, v));
            start = end;
        }
        out
    }

    pub fn integral(&self, length: f64) -> f64 {
        self.pieces(length).iter().map(|(l, v)| l * v).sum()
    }

    pub fn positive_part_integral(&self, length: f64) -> f64 {
        self.pieces(length).iter().map(|(l, v)| l * v.max(0.0)).sum()
    }

    pub fn negative_part_integral(&self, length: f64) -> f64 {
        self.pieces(length).iter().map(|(l, v)| l * (-v).max(0.0)).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Value at `x` (right-continuous at breaks).
    pub fn at(&self, x: f64) -> f64 {
        let i = self.breaks.iter().take_while(|&&b| b <= x).count();
        self.values[i]
    }

    /// Stretch the profile from length `old` to length `new`: `q(old/new * x)`.
    pub fn stretched(&self, old: f64, new: f64) -> Self {
        let r = new / old;
        Potential { breaks: self.breaks.iter().map(|b| b * r).collect(), values: self.values.clone() }
    }

    /// The profile `q(x/t)/t^2` on an edge scaled by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Potential {
            breaks: self.breaks.iter().map(|b| b * t).collect(),
            values: self.values.iter().map(|v| v / (t * t)).collect(),
        }
    }

    /// The profile read backwards, for an edge with reversed orientation.
    pub fn reversed(&self, length: f64) -> Self {
        Potential {
            breaks: self.breaks.iter().rev().map(|b| length - b).collect(),
            values: self.values.iter().rev().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub origin: usize,
    pub terminus: usize,
    pub length: f64,
    pub potential: Potential,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.origin == self.terminus
    }

    pub fn vertex_at(&self, end: End) -> usize {
        match end {
            End::Origin => self.origin,
            End::Terminus => self.terminus,
        }
    }
}

/// One incident edge endpoint at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub end: End,
}

impl Incidence {
    pub fn slot(&self) -> usize {
        self.end.slot(self.edge)
    }
}

/// Edge description used when building a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    pub potential: Potential,
}

impl EdgeSpec {
    pub fn new(id: &str, from: &str, to: &str, length: f64) -> Self {
        EdgeSpec { id: id.into(), from: from.into(), to: to.into(), length, potential: Potential::zero() }
    }

    pub fn with_potential(mut self, potential: Potential) -> Self {
        self.potential = potential;
        self
    }
}

/// A compact metric graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<Incidence>>,
}

impl MetricGraph {
    /// Validate and build a graph. Incidence lists follow edge declaration order;
    /// a loop contributes its origin slot before its terminus slot.
    pub fn build(vertices: &[String], edges: &[EdgeSpec]) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.as_str(), i).is_some() {
                return Err(Error::Graph(format!("duplicate vertex id '{v}'")));
            }
        }
        let mut seen = HashMap::new();
        let mut built = Vec::with_capacity(edges.len());
        for spec in edges {
            if seen.insert(spec.id.as_str(), ()).is_some() {
                return Err(Error::Graph(format!("duplicate edge id '{}'", spec.id)));
            }
            if !(spec.length.is_finite() && spec.length > 0.0) {
                return Err(Error::Graph(format!("edge '{}' has nonpositive length {}", spec.id, spec.length)));
            }
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::Graph(format!("edge '{}' references unknown vertex '{name}'", spec.id)))
            };
            let origin = lookup(&spec.from)?;
            let terminus = lookup(&spec.to)?;
            spec.potential
                .validate(spec.length)
                .map_err(|e| Error::Graph(format!("edge '{}': {e}", spec.id)))?;
            built.push(Edge {
                id: spec.id.clone(),
                origin,
                terminus,
                length: spec.length,
                potential: spec.potential.clone(),
            });
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (e, edge) in built.iter().enumerate() {
            incidence[edge.origin].push(Incidence { edge: e, end: End::Origin });
            incidence[edge.terminus].push(Incidence { edge: e, end: End::Terminus });
        }
        for (v, inc) in incidence.iter().enumerate() {
            if inc.is_empty() {
                return Err(Error::Graph(format!("vertex '{}' is isolated", vertices[v])));
            }
        }
        Ok(MetricGraph { vertices: vertices.to_vec(), edges: built, incidence })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn incidence(&self, v: usize) -> &[Incidence] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Vertex and position within its incidence list for each flattened slot.
    pub fn slot_owners(&self) -> Vec<(usize, usize)> {
        let mut owners = vec![(0, 0); 2 * self.edges.len()];
        for (v, inc) in self.incidence.iter().enumerate() {
            for (j, i) in inc.iter().enumerate() {
                owners[i.slot()] = (v, j);
            }
        }
        owners
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for i in &self.incidence[v] {
                let e = &self.edges[i.edge];
                for w in [e.origin, e.terminus] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Edge descriptions that rebuild this graph.
    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                from: self.vertices[e.origin].clone(),
                to: self.vertices[e.terminus].clone(),
                length: e.length,
                potential: e.potential.clone(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_edge_degrees() {
        let g = MetricGraph::build(&ids(&["v0", "v1"]), &[EdgeSpec::new("e", "v0", "v1", 1.0)]).unwrap();
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(1), 1);
    }

    #[test]
    fn loop_counts_twice_origin_first() {
        let g = MetricGraph::build(&ids(&["v"]), &[EdgeSpec::new("e", "v", "v", 1.0)]).unwrap();
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.incidence(0)[0].end, End::Origin);
        assert_eq!(g.incidence(0)[1].end, End::Terminus);
    }

    #[test]
    fn three_star_degrees() {
        let edges: Vec<_> = (0..3).map(|i| EdgeSpec::new(&format!("e{i}"), "c", &format!("l{i}"), 1.0)).collect();
        let g = MetricGraph::build(&ids(&["c", "l0", "l1", "l2"]), &edges).unwrap();
        assert_eq!(g.degree(0), 3);
        assert!((1..4).all(|v| g.degree(v) == 1));
    }

    #[test]
    fn rejects_bad_input() {
        let v = ids(&["a", "b"]);
        assert!(MetricGraph::build(&ids(&["a", "a"]), &[]).is_err());
        assert!(MetricGraph::build(&v, &[EdgeSpec::new("e", "a", "b", 0.0)]).is_err());
        assert!(MetricGraph::build(&v, &[EdgeSpec::new("e", "a", "c", 1.0)]).is_err());
        assert!(MetricGraph::build(&ids(&["a", "b", "c"]), &[EdgeSpec::new("e", "a", "b", 1.0)]).is_err());
        let dup = [EdgeSpec::new("e", "a", "b", 1.0), EdgeSpec::new("e", "a", "b", 2.0)];
        assert!(MetricGraph::build(&v, &dup).is_err());
        let bad_q = EdgeSpec::new("e", "a", "b", 1.0).with_potential(Potential::piecewise(vec![1.5], vec![0.0, 1.0]));
        assert!(MetricGraph::build(&v, &[bad_q]).is_err());
    }

    #[test]
    fn potential_pieces_and_transforms() {
        let q = Potential::piecewise(vec![0.25, 0.5], vec![1.0, -2.0, 3.0]);
        let p = q.pieces(1.0);
        assert_eq!(p, vec![(0.25, 1.0), (0.25, -2.0), (0.5, 3.0)]);
        assert!((q.integral(1.0) - (0.25 - 0.5 + 1.5)).abs() < 1e-15);
        assert_eq!(q.at(0.3), -2.0);
        let s = q.scaled(2.0);
        assert_eq!(s.breaks, vec![0.5, 1.0]);
        assert_eq!(s.values, vec![0.25, -0.5, 0.75]);
        let r = q.reversed(1.0);
        assert_eq!(r.breaks, vec![0.5, 0.75]);
        assert_eq!(r.values, vec![3.0, -2.0, 1.0]);
    }
}
