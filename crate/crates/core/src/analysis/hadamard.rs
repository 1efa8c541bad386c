//! First-order dependence of a simple eigenvalue on one vertex's Robin part.

use crate::condition::{Family, VertexCondition};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::problem::SchrodingerProblem;
use crate::secular::{eigenfunctions_of, first_eigenvalues, SpectralValue};

/// Minimal distance to neighbouring eigenvalues before differentiating.
pub const SIMPLICITY_GAP: f64 = 1e-6;

/// Robin-block direction of `dΛ/dα` for a δ condition of degree `d`.
pub fn delta_direction(d: usize) -> Mat {
    Mat::from_element(d, d, 1.0 / (d * d) as f64)
}

/// Robin-block direction of `dΛ/d(1/β)` for a δ′ condition of degree `d`.
pub fn inverse_beta_direction(d: usize) -> Mat {
    Mat::from_element(d, d, 1.0)
}

/// `dλ_k/dt` of `Λ_{v0} + t Q Λ̃ Q` at `t = 0`, `Q = I − P_D`: the value
/// `⟨Λ̃ Q F(v0), Q F(v0)⟩` for the normalized eigenfunction. For directions
/// inside `ran P_R` this is `⟨Λ̃ P_R F, P_R F⟩`; allowing all of `ker P_D`
/// lets the Robin part grow out of Neumann directions, e.g. `δ(α)` at
/// `α = 0`. `k` is one-based and `λ_k` must be simple.
pub fn hadamard_derivative(p: &SchrodingerProblem, k: usize, v0: usize, direction: &Mat) -> Result<f64> {
    let cond = p.condition(v0);
    let d = cond.degree;
    if direction.nrows() != d || direction.ncols() != d {
        return Err(Error::Input(format!("direction must be {d}x{d}")));
    }
    if k == 0 {
        return Err(Error::Input("eigenvalue index is one-based".into()));
    }
    let ev = first_eigenvalues(p, k + 1)?;
    if ev.len() < k + 1 {
        return Err(Error::Solver(format!("only {} eigenvalues found", ev.len())));
    }
    let lam = ev[k - 1];
    let mut gap = ev[k] - lam;
    if k >= 2 {
        gap = gap.min(lam - ev[k - 2]);
    }
    if gap <= SIMPLICITY_GAP {
        return Err(Error::NotSimple { gap });
    }
    let f = eigenfunctions_of(p, &SpectralValue { value: lam, multiplicity: 1, residual: 0.0 })?;
    let (trace, _) = f[0].trace.at_vertex(p.graph(), v0);
    let q = Mat::identity(d, d) - &cond.pd;
    let x = q * nalgebra::DVector::from_vec(trace);
    let sym = (direction + direction.transpose()) * 0.5;
    Ok((x.transpose() * sym * &x)[(0, 0)])
}

pub fn dlambda_dalpha(p: &SchrodingerProblem, k: usize, v0: usize) -> Result<f64> {
    match p.condition(v0).family {
        Family::Delta(_) => hadamard_derivative(p, k, v0, &delta_direction(p.condition(v0).degree)),
        _ => Err(Error::Precondition("vertex does not carry a delta condition".into())),
    }
}

pub fn dlambda_dinverse_beta(p: &SchrodingerProblem, k: usize, v0: usize) -> Result<f64> {
    match p.condition(v0).family {
        Family::DeltaPrime(_) => hadamard_derivative(p, k, v0, &inverse_beta_direction(p.condition(v0).degree)),
        _ => Err(Error::Precondition("vertex does not carry a deltaprime condition".into())),
    }
}

/// `dλ/dβ = −(1/β²) dλ/d(1/β)`.
pub fn dlambda_dbeta(p: &SchrodingerProblem, k: usize, v0: usize) -> Result<f64> {
    match p.condition(v0).family {
        Family::DeltaPrime(b) => Ok(-dlambda_dinverse_beta(p, k, v0)? / (b * b)),
        _ => Err(Error::Precondition("vertex does not carry a deltaprime condition".into())),
    }
}

/// `cond` with `Λ` replaced by `Λ + t Q Λ̃ Q`, `Q = I − P_D`. The Robin
/// projection is recomputed as the range of the new operator.
pub fn perturbed_condition(cond: &VertexCondition, direction: &Mat, t: f64) -> Result<VertexCondition> {
    let d = cond.degree;
    let q = Mat::identity(d, d) - &cond.pd;
    let sym = (direction + direction.transpose()) * 0.5;
    let lam = &cond.lambda + &q * sym * &q * t;
    let lam = (&lam + lam.transpose()) * 0.5;
    let pr = linalg::projector(&linalg::range_basis(&lam, 1e-11));
    let pn = &q - &pr;
    let lambda = &pr * lam * &pr;
    Ok(VertexCondition::custom(cond.pd.clone(), pn, pr, lambda)?.recognized())
}

/// The problem with `Λ_{v0}` replaced by `Λ_{v0} + t Q Λ̃ Q`.
pub fn with_robin_perturbation(p: &SchrodingerProblem, v0: usize, direction: &Mat, t: f64) -> Result<SchrodingerProblem> {
    let mut conditions = p.conditions().to_vec();
    conditions[v0] = perturbed_condition(p.condition(v0), direction, t)?;
    SchrodingerProblem::new(p.graph().clone(), conditions)
}

/// Central differences at steps `h` and `h/2` with their Richardson
/// combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference {
    pub coarse: f64,
    pub fine: f64,
    pub richardson: f64,
}

impl FiniteDifference {
    /// Relative agreement of the two step sizes; large values flag noise.
    pub fn spread(&self) -> f64 {
        (self.coarse - self.fine).abs() / self.fine.abs().max(1.0)
    }
}

/// Central difference of `λ_k(build(x))` at `x0`.
pub fn central_difference<F>(k: usize, x0: f64, h: f64, build: F) -> Result<FiniteDifference>
where
    F: Fn(f64) -> Result<SchrodingerProblem>,
{
    let lam = |x: f64| -> Result<f64> {
        let ev = first_eigenvalues(&build(x)?, k)?;
        ev.get(k - 1).copied().ok_or_else(|| Error::Solver("eigenvalue index out of range".into()))
    };
    let coarse = (lam(x0 + h)? - lam(x0 - h)?) / (2.0 * h);
    let fine = (lam(x0 + h / 2.0)? - lam(x0 - h / 2.0)?) / h;
    Ok(FiniteDifference { coarse, fine, richardson: (4.0 * fine - coarse) / 3.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemBuilder;

    fn robin_neumann(alpha: f64) -> Result<SchrodingerProblem> {
        ProblemBuilder::new()
            .vertex("a", Family::Delta(alpha))
            .vertex("b", Family::Neumann)
            .edge("e", "a", "b", 1.0)
            .build()
    }

    #[test]
    fn flat_interval_derivative_is_one() {
        let p = robin_neumann(0.0).unwrap();
        assert!((dlambda_dalpha(&p, 1, 0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn robin_interval_matches_difference() {
        let p = robin_neumann(1.0).unwrap();
        let formula = dlambda_dalpha(&p, 1, 0).unwrap();
        let fd = central_difference(1, 1.0, 1e-5, robin_neumann).unwrap();
        assert!((formula - fd.richardson).abs() / formula.abs().max(1.0) < 1e-5, "{formula} vs {fd:?}");
    }

    #[test]
    fn deltaprime_loop_matches_difference() {
        let build = |b: f64| ProblemBuilder::new().vertex("v", Family::DeltaPrime(b)).edge("e", "v", "v", 1.3).build();
        let p = build(1.0).unwrap();
        let ev = first_eigenvalues(&p, 3).unwrap();
        let k = if (ev[1] - ev[0]).abs() > 1e-3 { 1 } else { 3 };
        let formula = dlambda_dbeta(&p, k, 0).unwrap();
        let fd = central_difference(k, 1.0, 1e-5, build).unwrap();
        assert!((formula - fd.richardson).abs() / formula.abs().max(1.0) < 1e-5, "{formula} vs {fd:?}");
        let inv = dlambda_dinverse_beta(&p, k, 0).unwrap();
        let fd = central_difference(k, 1.0, 1e-5, |s| build(1.0 / s)).unwrap();
        assert!((inv - fd.richardson).abs() / inv.abs().max(1.0) < 1e-5);
    }

    #[test]
    fn kirchhoff_vertex_perturbation_matches_delta() {
        let p = robin_neumann(0.0).unwrap();
        let fd = central_difference(1, 0.0, 1e-5, |t| with_robin_perturbation(&p, 0, &delta_direction(1), t)).unwrap();
        assert!((fd.coarse - 1.0).abs() < 1e-6, "{fd:?}");
        let up = with_robin_perturbation(&p, 0, &delta_direction(1), 0.25).unwrap();
        assert_eq!(up.condition(0).family, Family::Delta(0.25));
    }

    #[test]
    fn double_eigenvalue_is_rejected() {
        let p = ProblemBuilder::new().vertex("v", Family::kirchhoff()).edge("e", "v", "v", 1.0).build().unwrap();
        assert!(matches!(dlambda_dalpha(&p, 2, 0), Err(Error::NotSimple { .. })));
    }
}
