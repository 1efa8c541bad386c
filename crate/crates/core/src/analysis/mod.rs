//! Ground-state diagnostics, eigenvalue derivatives with respect to vertex
//! couplings, and bounds for the lowest eigenvalue.

mod bounds;
mod hadamard;
mod star;
pub mod trials;

pub use bounds::{
    flower_bound, flower_problem, interval_count_below, lower_bound_interval, robin_interval_ground_state,
    upper_bound_constant, BoundReport, InteractionStrengths,
};
pub use hadamard::{
    central_difference, delta_direction, dlambda_dalpha, dlambda_dbeta, dlambda_dinverse_beta, hadamard_derivative,
    inverse_beta_direction, perturbed_condition, with_robin_perturbation, FiniteDifference, SIMPLICITY_GAP,
};
pub use star::{alpha_c_closed_form, locate_alpha_c, star_example, star_limit_check, AlphaCReport};

use crate::condition::{Family, VertexCondition};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::problem::SchrodingerProblem;
use crate::secular::{eigenfunctions_of, eigenvalues, Eigenfunction, SpectrumRequest};

/// Sample points per edge for the redundant positivity guard.
pub const SAMPLES_PER_EDGE: usize = 100;

/// δ strength of a condition, treating degree-one Neumann as `δ(0)`.
pub fn delta_strength(c: &VertexCondition) -> Option<f64> {
    match c.family {
        Family::Delta(a) => Some(a),
        Family::Neumann if c.degree == 1 => Some(0.0),
        _ => None,
    }
}

/// δ strengths of every vertex, or `None` if some vertex is not of δ type.
pub fn all_delta(p: &SchrodingerProblem) -> Option<Vec<f64>> {
    p.conditions().iter().map(delta_strength).collect()
}

pub(crate) fn require_delta(p: &SchrodingerProblem) -> Result<Vec<f64>> {
    all_delta(p).ok_or_else(|| Error::Precondition("every vertex must carry a delta condition".into()))
}

#[derive(Debug, Clone)]
pub struct GroundStateReport {
    pub lambda1: f64,
    /// Numerical multiplicity of `λ₁`.
    pub multiplicity: usize,
    /// Orthonormal basis of the ground eigenspace. A simple ground state is
    /// signed so that its largest-modulus value is positive.
    pub eigenfunctions: Vec<Eigenfunction>,
    /// Minimum and maximum of the first basis function (closed-form edge
    /// extrema together with sampling).
    pub min_value: f64,
    pub max_value: f64,
    /// Simple ground state with a strictly positive minimum.
    pub positive: bool,
    /// Some basis function takes both signs.
    pub sign_changing: bool,
    /// Edges on which a nonzero member of the eigenspace vanishes identically.
    pub vanishing_edges: Vec<usize>,
    /// The problem is a connected all-δ problem, so simplicity and
    /// positivity are guaranteed.
    pub guaranteed: bool,
}

impl GroundStateReport {
    /// `false` only when a guaranteed property failed.
    pub fn consistent(&self) -> bool {
        !self.guaranteed || (self.multiplicity == 1 && self.positive)
    }
}

/// Extremes of an eigenfunction over the whole graph.
pub fn extrema(p: &SchrodingerProblem, f: &Eigenfunction) -> (f64, f64) {
    let g = p.graph();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for e in 0..g.edge_count() {
        let (a, b) = f.edge_extrema(p, e);
        lo = lo.min(a);
        hi = hi.max(b);
        let len = g.edge(e).length;
        for i in 0..=SAMPLES_PER_EDGE {
            let (u, _) = f.eval(p, e, len * i as f64 / SAMPLES_PER_EDGE as f64);
            lo = lo.min(u);
            hi = hi.max(u);
        }
    }
    (lo, hi)
}

pub fn ground_state(p: &SchrodingerProblem) -> Result<GroundStateReport> {
    let spectrum = eigenvalues(p, SpectrumRequest::first(3))?;
    let first = *spectrum.values.first().ok_or_else(|| Error::Solver("empty spectrum".into()))?;
    let mut funcs = eigenfunctions_of(p, &first)?;
    let g = p.graph();
    let mut min_value = f64::INFINITY;
    let mut max_value = f64::NEG_INFINITY;
    let mut sign_changing = false;
    for (i, f) in funcs.iter_mut().enumerate() {
        let (mut lo, mut hi) = extrema(p, f);
        if hi.abs() < lo.abs() {
            *f = f.scaled(-1.0);
            (lo, hi) = (-hi, -lo);
        }
        let tol = 1e-10 * hi.abs().max(lo.abs());
        if lo < -tol && hi > tol {
            sign_changing = true;
        }
        if i == 0 {
            min_value = lo;
            max_value = hi;
        }
    }
    // eigenspace members vanishing on edge e: kernel of the (a_e, b_e) map
    let m = funcs.len();
    let vanishing_edges = (0..g.edge_count())
        .filter(|&e| {
            let coeff = Mat::from_fn(2, m, |r, c| {
                let (a, b) = funcs[c].coefficients[e];
                if r == 0 {
                    a
                } else {
                    b
                }
            });
            let scale = linalg::max_abs(&coeff).max(1.0);
            m > 2 || linalg::singular_values(&coeff).get(m - 1).map_or(true, |&s| s < 1e-9 * scale)
        })
        .collect();
    let guaranteed = all_delta(p).is_some() && g.is_connected();
    Ok(GroundStateReport {
        lambda1: first.value,
        multiplicity: first.multiplicity,
        positive: first.multiplicity == 1 && min_value > 0.0,
        eigenfunctions: funcs,
        min_value,
        max_value,
        sign_changing,
        vanishing_edges,
        guaranteed,
    })
}

/// `∫_Γ q + Σ_v α_v`; negative means the constant test function certifies
/// `λ₁ < 0`.
pub fn delta_certificate_value(p: &SchrodingerProblem) -> Result<f64> {
    let alphas = require_delta(p)?;
    Ok(p.potential_integral() + alphas.iter().sum::<f64>())
}

/// Sufficient test for a negative ground state under δ conditions.
pub fn negativity_certificate_delta(p: &SchrodingerProblem) -> Result<bool> {
    Ok(delta_certificate_value(p)? < 0.0)
}

/// Rayleigh numerator of the indicator of edge `e` under δ′ conditions:
/// `∫_e q + Σ_v n_v(e)²/β_v`, where `n_v(e)` is the number of ends of `e`
/// at `v`. For a non-loop edge this is `∫_e q + 1/β_o + 1/β_t`.
pub fn deltaprime_edge_value(p: &SchrodingerProblem, betas: &[f64], e: usize) -> f64 {
    let edge = p.graph().edge(e);
    let q = edge.potential.integral(edge.length);
    if edge.origin == edge.terminus {
        q + 4.0 / betas[edge.origin]
    } else {
        q + 1.0 / betas[edge.origin] + 1.0 / betas[edge.terminus]
    }
}

/// Sufficient test for a negative ground state under δ′ conditions: returns
/// the edge with the most negative localized sum, if any is negative.
pub fn negativity_certificate_deltaprime(p: &SchrodingerProblem) -> Result<Option<usize>> {
    let mut betas = Vec::with_capacity(p.graph().vertex_count());
    for c in p.conditions() {
        match c.family {
            Family::DeltaPrime(b) => betas.push(b),
            Family::AntiKirchhoff => {
                return Err(Error::Precondition("anti-Kirchhoff vertex: 1/beta is undefined".into()))
            }
            _ => return Err(Error::Precondition("every vertex must carry a deltaprime condition".into())),
        }
    }
    let best = (0..p.graph().edge_count())
        .map(|e| (e, deltaprime_edge_value(p, &betas, e)))
        .filter(|&(_, v)| v < 0.0)
        .min_by(|a, b| a.1.total_cmp(&b.1));
    Ok(best.map(|(e, _)| e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::Family;
    use crate::problem::ProblemBuilder;
    use crate::secular::first_eigenvalues;

    fn three_star_deltaprime() -> SchrodingerProblem {
        ProblemBuilder::new()
            .vertex("c", Family::DeltaPrime(1.0))
            .vertex("a", Family::Neumann)
            .vertex("b", Family::Neumann)
            .vertex("d", Family::Neumann)
            .edge("ea", "c", "a", 1.0)
            .edge("eb", "c", "b", 1.0)
            .edge("ed", "c", "d", 1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn neumann_interval_ground_state_is_constant() {
        let p = ProblemBuilder::new()
            .vertex("a", Family::Neumann)
            .vertex("b", Family::Neumann)
            .edge("e", "a", "b", 2.0)
            .build()
            .unwrap();
        let r = ground_state(&p).unwrap();
        assert_eq!(r.multiplicity, 1);
        assert!(r.positive && r.guaranteed);
        let c = 1.0 / 2f64.sqrt();
        assert!((r.min_value - c).abs() < 1e-9 && (r.max_value - c).abs() < 1e-9);
    }

    #[test]
    fn three_star_deltaprime_has_double_zero() {
        let p = three_star_deltaprime();
        let r = ground_state(&p).unwrap();
        assert!(r.lambda1.abs() < 1e-8);
        assert_eq!(r.multiplicity, 2);
        assert!(r.sign_changing && !r.positive && !r.guaranteed);
        assert_eq!(r.vanishing_edges, vec![0, 1, 2]);
    }

    #[test]
    fn delta_certificate_examples() {
        let loop_neg = ProblemBuilder::new().vertex("v", Family::Delta(-1.0)).edge("e", "v", "v", 1.0).build().unwrap();
        assert!(negativity_certificate_delta(&loop_neg).unwrap());
        assert!(first_eigenvalues(&loop_neg, 1).unwrap()[0] < -1e-12);

        let flat = ProblemBuilder::new()
            .vertex("a", Family::kirchhoff())
            .vertex("b", Family::Neumann)
            .edge("e", "a", "b", 1.0)
            .build()
            .unwrap();
        assert!(!negativity_certificate_delta(&flat).unwrap());

        // a small negative coupling next to large positive ones keeps λ₁ > 0
        let mixed = ProblemBuilder::new()
            .vertex("a", Family::Delta(-0.05))
            .vertex("b", Family::Delta(1.0))
            .vertex("c", Family::Delta(1.0))
            .edge("e1", "a", "b", 1.0)
            .edge("e2", "a", "c", 1.0)
            .build()
            .unwrap();
        assert!(!negativity_certificate_delta(&mixed).unwrap());
        assert!(first_eigenvalues(&mixed, 1).unwrap()[0] > 0.0);

        let dp = three_star_deltaprime();
        assert!(negativity_certificate_delta(&dp).is_err());
    }

    fn triangle_deltaprime(betas: [f64; 3], q: f64) -> SchrodingerProblem {
        ProblemBuilder::new()
            .vertex("a", Family::DeltaPrime(betas[0]))
            .vertex("b", Family::DeltaPrime(betas[1]))
            .vertex("c", Family::DeltaPrime(betas[2]))
            .edge_spec(crate::graph::EdgeSpec::new("ab", "a", "b", 1.0).with_potential(crate::graph::Potential::constant(q)))
            .edge("bc", "b", "c", 1.0)
            .edge("ca", "c", "a", 1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn deltaprime_certificate_examples() {
        let p = triangle_deltaprime([-0.5, 1.0, 1.0], 0.0);
        let w = negativity_certificate_deltaprime(&p).unwrap();
        assert!(matches!(w, Some(0) | Some(2)));
        assert!(first_eigenvalues(&p, 1).unwrap()[0] < 0.0);

        let p = triangle_deltaprime([1.0, 1.0, 1.0], 0.0);
        assert_eq!(negativity_certificate_deltaprime(&p).unwrap(), None);

        let p = triangle_deltaprime([1.0, 1.0, 1.0], -3.0);
        assert_eq!(negativity_certificate_deltaprime(&p).unwrap(), Some(0));
        assert!(first_eigenvalues(&p, 1).unwrap()[0] < 0.0);

        let anti = ProblemBuilder::new()
            .vertex("a", Family::AntiKirchhoff)
            .vertex("b", Family::DeltaPrime(1.0))
            .edge("e", "a", "b", 1.0)
            .edge("f", "a", "b", 1.0)
            .build()
            .unwrap();
        assert!(negativity_certificate_deltaprime(&anti).is_err());
    }

    #[test]
    fn loop_indicator_counts_both_ends() {
        // q = −3 on a loop with β = 1: the two-endpoint formula gives −1, the
        // indicator's actual numerator is −3 + 4 = 1
        let p = ProblemBuilder::new()
            .vertex("v", Family::DeltaPrime(1.0))
            .edge_spec(crate::graph::EdgeSpec::new("e", "v", "v", 1.0).with_potential(crate::graph::Potential::constant(-3.0)))
            .build()
            .unwrap();
        assert_eq!(negativity_certificate_deltaprime(&p).unwrap(), None);
    }
}
