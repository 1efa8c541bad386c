//! JSON graph files.
//!
//! ```json
//! {
//!   "vertices": [{"id": "a", "condition": {"type": "delta", "strength": 1.0}},
//!                {"id": "b", "condition": {"type": "neumann"}}],
//!   "edges": [{"id": "e", "from": "a", "to": "b", "length": 1.0,
//!              "potential": {"type": "constant", "value": 0.0}}]
//! }
//! ```
//!
//! Unknown keys are rejected. `custom` conditions carry `PD`, `PN`, `PR` and
//! `Lambda` as row-major arrays of length `d²`. A missing `potential` means
//! zero potential.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::condition::{Family, VertexCondition};
use crate::error::{Error, Result};
use crate::graph::{EdgeSpec, Potential};
use crate::linalg::Mat;
use crate::problem::{SchrodingerProblem, VertexSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub condition: ConditionEntry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionType {
    Delta,
    Deltaprime,
    Kirchhoff,
    Antikirchhoff,
    Dirichlet,
    Neumann,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionEntry {
    #[serde(rename = "type")]
    pub kind: ConditionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(rename = "PD", default, skip_serializing_if = "Option::is_none")]
    pub pd: Option<Vec<f64>>,
    #[serde(rename = "PN", default, skip_serializing_if = "Option::is_none")]
    pub pn: Option<Vec<f64>>,
    #[serde(rename = "PR", default, skip_serializing_if = "Option::is_none")]
    pub pr: Option<Vec<f64>>,
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialEntry {
    Constant { value: f64 },
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
}

impl ConditionEntry {
    fn named(kind: ConditionType, strength: Option<f64>) -> Self {
        ConditionEntry { kind, strength, pd: None, pn: None, pr: None, lambda: None }
    }

    fn no_matrices(&self) -> Result<()> {
        if self.pd.is_some() || self.pn.is_some() || self.pr.is_some() || self.lambda.is_some() {
            return Err(Error::Input("matrices are only allowed for custom conditions".into()));
        }
        Ok(())
    }

    fn no_strength(&self) -> Result<()> {
        match self.strength {
            Some(_) => Err(Error::Input(format!("{:?} conditions take no strength", self.kind).to_lowercase())),
            None => Ok(()),
        }
    }

    pub fn to_spec(&self) -> Result<VertexSpec> {
        use ConditionType::*;
        if self.kind != Custom {
            self.no_matrices()?;
        }
        let need = |what: &str| self.strength.ok_or_else(|| Error::Input(format!("{what} condition needs a strength")));
        let family = match self.kind {
            Delta => Family::Delta(need("delta")?),
            Deltaprime => {
                let b = need("deltaprime")?;
                if b == 0.0 {
                    return Err(Error::Input("deltaprime strength must be nonzero; use antikirchhoff".into()));
                }
                Family::DeltaPrime(b)
            }
            Kirchhoff => {
                self.no_strength()?;
                Family::Delta(0.0)
            }
            Antikirchhoff => {
                self.no_strength()?;
                Family::AntiKirchhoff
            }
            Dirichlet => {
                self.no_strength()?;
                Family::Dirichlet
            }
            Neumann => {
                self.no_strength()?;
                Family::Neumann
            }
            Custom => {
                self.no_strength()?;
                fn get<'a>(m: &'a Option<Vec<f64>>, name: &str) -> Result<&'a [f64]> {
                    m.as_deref().ok_or_else(|| Error::Input(format!("custom condition needs {name}")))
                }
                let pd = get(&self.pd, "PD")?;
                let d = (pd.len() as f64).sqrt().round() as usize;
                let mat = |v: &[f64], name: &str| -> Result<Mat> {
                    if d == 0 || v.len() != d * d {
                        return Err(Error::Input(format!("{name} must have {} entries", d * d)));
                    }
                    Ok(Mat::from_row_slice(d, d, v))
                };
                let c = VertexCondition::custom(
                    mat(pd, "PD")?,
                    mat(get(&self.pn, "PN")?, "PN")?,
                    mat(get(&self.pr, "PR")?, "PR")?,
                    mat(get(&self.lambda, "Lambda")?, "Lambda")?,
                )?;
                return Ok(VertexSpec::Explicit(c));
            }
        };
        Ok(VertexSpec::Family(family))
    }

    pub fn from_condition(c: &VertexCondition) -> Self {
        use ConditionType::*;
        match c.family {
            Family::Delta(a) if a == 0.0 => Self::named(Kirchhoff, None),
            Family::Delta(a) => Self::named(Delta, Some(a)),
            Family::DeltaPrime(b) => Self::named(Deltaprime, Some(b)),
            Family::AntiKirchhoff => Self::named(Antikirchhoff, None),
            Family::Dirichlet => Self::named(Dirichlet, None),
            Family::Neumann => Self::named(Neumann, None),
            Family::Custom => {
                let flat = |m: &Mat| m.transpose().iter().copied().collect::<Vec<f64>>();
                ConditionEntry {
                    kind: Custom,
                    strength: None,
                    pd: Some(flat(&c.pd)),
                    pn: Some(flat(&c.pn)),
                    pr: Some(flat(&c.pr)),
                    lambda: Some(flat(&c.lambda)),
                }
            }
        }
    }
}

impl PotentialEntry {
    pub fn to_potential(&self) -> Potential {
        match self {
            PotentialEntry::Constant { value } => Potential::constant(*value),
            PotentialEntry::Piecewise { breaks, values } => Potential::piecewise(breaks.clone(), values.clone()),
        }
    }

    pub fn from_potential(p: &Potential) -> Self {
        if p.is_constant() {
            PotentialEntry::Constant { value: p.values[0] }
        } else {
            PotentialEntry::Piecewise { breaks: p.breaks.clone(), values: p.values.clone() }
        }
    }
}

impl GraphFile {
    pub fn to_problem(&self) -> Result<SchrodingerProblem> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let spec = v.condition.to_spec().map_err(|e| Error::Input(format!("vertex '{}': {e}", v.id)))?;
                Ok((v.id.clone(), spec))
            })
            .collect::<Result<Vec<_>>>()?;
        let edges: Vec<EdgeSpec> = self
            .edges
            .iter()
            .map(|e| {
                let spec = EdgeSpec::new(&e.id, &e.from, &e.to, e.length);
                match &e.potential {
                    Some(p) => spec.with_potential(p.to_potential()),
                    None => spec,
                }
            })
            .collect();
        SchrodingerProblem::from_parts(&vertices, &edges)
    }

    pub fn from_problem(p: &SchrodingerProblem) -> Self {
        let g = p.graph();
        let vertices = g
            .vertex_ids()
            .iter()
            .zip(p.conditions())
            .map(|(id, c)| VertexEntry { id: id.clone(), condition: ConditionEntry::from_condition(c) })
            .collect();
        let edges = g
            .edge_specs()
            .into_iter()
            .map(|e| {
                let zero = e.potential.is_constant() && e.potential.values[0] == 0.0;
                EdgeEntry {
                    potential: (!zero).then(|| PotentialEntry::from_potential(&e.potential)),
                    id: e.id,
                    from: e.from,
                    to: e.to,
                    length: e.length,
                }
            })
            .collect();
        GraphFile { vertices, edges }
    }
}

/// Parse a graph description. Syntax errors report line and column.
pub fn parse_problem(text: &str) -> Result<SchrodingerProblem> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
    file.to_problem()
}

pub fn read_problem(path: &Path) -> Result<SchrodingerProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn to_json(p: &SchrodingerProblem) -> String {
    serde_json::to_string_pretty(&GraphFile::from_problem(p)).expect("graph files always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secular::first_eigenvalues;

    const ROBIN: &str = r#"{
        "vertices": [{"id": "a", "condition": {"type": "delta", "strength": 1.0}},
                     {"id": "b", "condition": {"type": "neumann"}}],
        "edges": [{"id": "e", "from": "a", "to": "b", "length": 1.0,
                   "potential": {"type": "constant", "value": 0.0}}]
    }"#;

    #[test]
    fn parses_and_solves() {
        let p = parse_problem(ROBIN).unwrap();
        let lam = first_eigenvalues(&p, 1).unwrap()[0];
        assert!((lam - 0.74017).abs() < 5e-5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = ROBIN.replace("\"length\"", "\"colour\": 1, \"length\"");
        let err = parse_problem(&bad).unwrap_err().to_string();
        assert!(err.contains("unknown field") && err.contains("line"), "{err}");
        let bad = ROBIN.replace("\"type\": \"neumann\"", "\"type\": \"neumann\", \"strength\": 2");
        assert!(parse_problem(&bad).is_err());
    }

    #[test]
    fn round_trip_keeps_problem() {
        let text = r#"{
            "vertices": [{"id": "v", "condition": {"type": "deltaprime", "strength": -0.5}},
                         {"id": "w", "condition": {"type": "custom",
                            "PD": [0, 0, 0, 0], "PN": [0.5, -0.5, -0.5, 0.5],
                            "PR": [0.5, 0.5, 0.5, 0.5], "Lambda": [1.5, 1.5, 1.5, 1.5]}}],
            "edges": [{"id": "e1", "from": "v", "to": "w", "length": 1.0,
                       "potential": {"type": "piecewise", "breaks": [0.4], "values": [1.0, -2.0]}},
                      {"id": "e2", "from": "w", "to": "v", "length": 0.7}]
        }"#;
        let p = parse_problem(text).unwrap();
        let back = parse_problem(&to_json(&p)).unwrap();
        assert_eq!(p, back);
    }
}
