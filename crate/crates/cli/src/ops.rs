//! Parsing of `--op` surgery descriptions.
//!
//! Fields are separated by `:` and lists by `,`:
//!
//! ```text
//! scale:T
//! lengthen-edge:EDGE:LENGTH
//! attach-edge:ID:FROM:TO:LENGTH
//! attach-pendant:VERTEX:FRAGMENT.json:PORT
//! insert-graph:VERTEX:FRAGMENT.json:W1,W2,...
//! join-vertices:A:B
//! set-strength:VERTEX:FAMILY[:STRENGTH]
//! delta-to-deltaprime:VERTEX:BETA
//! unfold-parallel:E1,E2,...
//! unfold-pendant:VERTEX:E1,E2,...
//! ```

use std::path::Path;

use spectragraph::io::read_problem;
use spectragraph::surgery::{Fragment, StrengthTarget, SurgerySpec};
use spectragraph::{Error, Family, Potential, Result};

fn number(s: &str, what: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Input(format!("{what} '{s}' is not a number")))
}

fn list(s: &str) -> Vec<String> {
    s.split(',').filter(|x| !x.is_empty()).map(str::to_string).collect()
}

fn fragment(path: &str) -> Result<Fragment> {
    Ok(Fragment::from_problem(&read_problem(Path::new(path))?))
}

pub fn parse_family(name: &str, strength: Option<&str>) -> Result<Family> {
    let need = || -> Result<f64> {
        let s = strength.ok_or_else(|| Error::Input(format!("{name} needs a strength")))?;
        number(s, "strength")
    };
    let f = match name {
        "delta" => Family::Delta(need()?),
        "deltaprime" => Family::deltaprime_or_anti(need()?),
        "kirchhoff" => Family::kirchhoff(),
        "antikirchhoff" => Family::AntiKirchhoff,
        "dirichlet" => Family::Dirichlet,
        "neumann" => Family::Neumann,
        other => return Err(Error::Input(format!("unknown condition family '{other}'"))),
    };
    if strength.is_some() && !matches!(name, "delta" | "deltaprime") {
        return Err(Error::Input(format!("{name} takes no strength")));
    }
    Ok(f)
}

pub fn parse_op(text: &str) -> Result<SurgerySpec> {
    let parts: Vec<&str> = text.split(':').collect();
    let arity = |n: usize| -> Result<()> {
        if parts.len() == n + 1 {
            Ok(())
        } else {
            Err(Error::Input(format!("'{}' takes {n} fields, got {}", parts[0], parts.len() - 1)))
        }
    };
    let s = |i: usize| parts[i].to_string();
    let spec = match parts[0] {
        "scale" => {
            arity(1)?;
            SurgerySpec::Scale { t: number(parts[1], "factor")? }
        }
        "lengthen-edge" => {
            arity(2)?;
            SurgerySpec::LengthenEdge { edge: s(1), length: number(parts[2], "length")? }
        }
        "attach-edge" => {
            arity(4)?;
            SurgerySpec::AttachEdge {
                id: s(1),
                from: s(2),
                to: s(3),
                length: number(parts[4], "length")?,
                potential: Potential::zero(),
            }
        }
        "attach-pendant" => {
            arity(3)?;
            SurgerySpec::AttachPendant { vertex: s(1), fragment: fragment(parts[2])?, port: s(3) }
        }
        "insert-graph" => {
            arity(3)?;
            SurgerySpec::InsertGraph { vertex: s(1), fragment: fragment(parts[2])?, assignment: list(parts[3]) }
        }
        "join-vertices" => {
            arity(2)?;
            SurgerySpec::JoinVertices { first: s(1), second: s(2) }
        }
        "set-strength" => {
            if parts.len() != 3 && parts.len() != 4 {
                return Err(Error::Input("set-strength takes VERTEX:FAMILY[:STRENGTH]".into()));
            }
            let family = parse_family(parts[2], parts.get(3).copied())?;
            SurgerySpec::SetStrength { vertex: s(1), target: StrengthTarget::Family(family) }
        }
        "delta-to-deltaprime" => {
            arity(2)?;
            SurgerySpec::DeltaToDeltaPrime { vertex: s(1), beta: number(parts[2], "beta")? }
        }
        "unfold-parallel" => {
            arity(1)?;
            SurgerySpec::UnfoldParallel { edges: list(parts[1]) }
        }
        "unfold-pendant" => {
            arity(2)?;
            SurgerySpec::UnfoldPendant { vertex: s(1), edges: list(parts[2]) }
        }
        other => return Err(Error::Input(format!("unknown surgery '{other}'"))),
    };
    Ok(spec)
}
