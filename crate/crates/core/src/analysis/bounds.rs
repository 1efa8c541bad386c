//! Lower and upper bounds for `λ₁` under δ and δ′ conditions.

use std::f64::consts::PI;

use crate::condition::Family;
use crate::error::{Error, Result};
use crate::graph::EdgeSpec;
use crate::problem::{SchrodingerProblem, VertexSpec};
use crate::secular::first_eigenvalues;

use super::require_delta;

/// Total positive and negative interaction strengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionStrengths {
    pub plus: f64,
    pub minus: f64,
    pub length: f64,
}

impl InteractionStrengths {
    pub fn of(p: &SchrodingerProblem) -> Result<Self> {
        let alphas = require_delta(p)?;
        let g = p.graph();
        let qp: f64 = g.edges().iter().map(|e| e.potential.positive_part_integral(e.length)).sum();
        let qm: f64 = g.edges().iter().map(|e| e.potential.negative_part_integral(e.length)).sum();
        let ap: f64 = alphas.iter().filter(|&&a| a > 0.0).sum();
        let am: f64 = alphas.iter().filter(|&&a| a < 0.0).sum();
        Ok(InteractionStrengths { plus: qp + ap, minus: qm - am, length: g.total_length() })
    }
}

/// Eigenvalues below `λ` of `−f''` on `[0, L]` with `f'(0) = a f(0)` and
/// `−f'(L) = b f(L)` (inward derivatives).
///
/// Sturm counting: zeros in `(0, L)` of the solution satisfying the left
/// condition, plus one if the right-end ratio `−f'(L)/f(L)` exceeds `b`.
/// Below zero the solution is written with `cosh`/`sinh` scaled by
/// `cosh(κx)`, so nothing overflows.
pub fn interval_count_below(a: f64, b: f64, len: f64, lambda: f64) -> usize {
    let (zeros, f, fp) = if lambda > 0.0 {
        let k = lambda.sqrt();
        let phi0 = 1f64.atan2(a / k);
        let theta = k * len + phi0;
        let zeros = ((theta / PI).ceil() as usize).saturating_sub(1);
        let (s, c) = (k * len).sin_cos();
        (zeros, c + a / k * s, -k * s + a * c)
    } else if lambda < 0.0 {
        let kappa = (-lambda).sqrt();
        let zeros = if a < 0.0 && kappa < -a && (kappa / -a).atanh() / kappa < len { 1 } else { 0 };
        let t = (kappa * len).tanh();
        (zeros, 1.0 + a / kappa * t, kappa * t + a)
    } else {
        let zeros = if a < 0.0 && -1.0 / a < len { 1 } else { 0 };
        (zeros, 1.0 + a * len, a)
    };
    // ratio −f'/f > b, with the sign of f (scaled by cosh, which is positive)
    let above = if f > 0.0 {
        -fp > b * f
    } else if f < 0.0 {
        -fp < b * f
    } else {
        false
    };
    zeros + above as usize
}

/// Smallest eigenvalue of the zero-potential interval with inward Robin
/// strengths `a` at `0` and `b` at `L`, by bisection on the Sturm count.
pub fn robin_interval_ground_state(a: f64, b: f64, len: f64) -> f64 {
    // trace inequality |f(0)|² ≤ (1/ε + n)‖f‖² + ‖f'‖²/n for ε ≤ L, where n
    // is the total negative coupling, gives λ₁ ≥ −n(n + 1/ε)
    let n = a.min(0.0).abs() + b.min(0.0).abs();
    let mut lo = if n > 0.0 { -n * (n + 1.0 / len.min(1.0 / n)) - 1.0 } else { -1.0 };
    while interval_count_below(a, b, len, lo) > 0 {
        lo *= 2.0;
    }
    let mut hi = (PI / len).powi(2) + 1.0;
    while interval_count_below(a, b, len, hi) == 0 {
        hi = 2.0 * hi.abs() + 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if interval_count_below(a, b, len, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lower bound: ground state of the potential-free interval of the same
/// total length with strengths `I₊` and `−I₋` at its ends.
pub fn lower_bound_interval(p: &SchrodingerProblem) -> Result<f64> {
    let s = InteractionStrengths::of(p)?;
    if !p.graph().is_connected() {
        return Err(Error::Precondition("graph must be connected".into()));
    }
    Ok(robin_interval_ground_state(s.plus, -s.minus, s.length))
}

/// Upper bound from the constant test function.
pub fn upper_bound_constant(p: &SchrodingerProblem) -> Result<f64> {
    let alphas = require_delta(p)?;
    Ok((p.potential_integral() + alphas.iter().sum::<f64>()) / p.graph().total_length())
}

/// The flower obtained by joining all vertices into one, carrying `family`.
pub fn flower_problem(p: &SchrodingerProblem, family: Family) -> Result<SchrodingerProblem> {
    let edges: Vec<EdgeSpec> = p
        .graph()
        .edges()
        .iter()
        .map(|e| EdgeSpec::new(&e.id, "o", "o", e.length).with_potential(e.potential.clone()))
        .collect();
    SchrodingerProblem::from_parts(&[("o".to_string(), VertexSpec::Family(family))], &edges)
}

/// Smallest nonnegative root `k` of `2k Σ_e tan(k L_e / 2) = α`, `α > 0`.
fn flower_root(lengths: &[f64], alpha: f64) -> f64 {
    let lmax = lengths.iter().cloned().fold(0.0, f64::max);
    let f = |k: f64| 2.0 * k * lengths.iter().map(|l| (k * l / 2.0).tan()).sum::<f64>() - alpha;
    let mut lo = 0.0;
    let mut hi = PI / lmax;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Upper bound from joining all vertices.
///
/// δ case (`Σα_v > 0`): with zero potential the flower's secular equation is
/// solved directly; otherwise the flower is solved numerically. δ′ case
/// (every `β_v < 0`): the flower with `β = Σβ_v` is solved numerically.
pub fn flower_bound(p: &SchrodingerProblem) -> Result<f64> {
    if let Some(alphas) = super::all_delta(p) {
        let alpha: f64 = alphas.iter().sum();
        if alpha <= 0.0 {
            return Err(Error::Precondition("flower bound needs a positive total delta strength".into()));
        }
        let g = p.graph();
        if g.edges().iter().all(|e| e.potential.sup_norm() == 0.0) {
            let lengths: Vec<f64> = g.edges().iter().map(|e| e.length).collect();
            let k = flower_root(&lengths, alpha);
            return Ok(k * k);
        }
        let flower = flower_problem(p, Family::Delta(alpha))?;
        return Ok(first_eigenvalues(&flower, 1)?[0]);
    }
    let betas = p
        .conditions()
        .iter()
        .map(|c| match c.family {
            Family::DeltaPrime(b) if b < 0.0 => Some(b),
            _ => None,
        })
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| {
            Error::Precondition("flower bound needs all-delta conditions or deltaprime with every beta < 0".into())
        })?;
    let flower = flower_problem(p, Family::DeltaPrime(betas.iter().sum()))?;
    Ok(first_eigenvalues(&flower, 1)?[0])
}

/// One row of the bounds table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub lower: Option<f64>,
    pub lambda1: f64,
    pub upper_constant: Option<f64>,
    pub upper_flower: Option<f64>,
}

impl BoundReport {
    pub fn of(p: &SchrodingerProblem) -> Result<Self> {
        Ok(BoundReport {
            lower: lower_bound_interval(p).ok(),
            lambda1: first_eigenvalues(p, 1)?[0],
            upper_constant: upper_bound_constant(p).ok(),
            upper_flower: flower_bound(p).ok(),
        })
    }

    /// Smallest signed slack over the available bounds (negative = violated).
    pub fn min_slack(&self) -> f64 {
        let mut s = f64::INFINITY;
        if let Some(l) = self.lower {
            s = s.min(self.lambda1 - l);
        }
        if let Some(u) = self.upper_constant {
            s = s.min(u - self.lambda1);
        }
        if let Some(u) = self.upper_flower {
            s = s.min(u - self.lambda1);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemBuilder;

    fn robin_neumann(alpha: f64) -> SchrodingerProblem {
        ProblemBuilder::new()
            .vertex("a", Family::Delta(alpha))
            .vertex("b", Family::Neumann)
            .edge("e", "a", "b", 1.0)
            .build()
            .unwrap()
    }

    #[test]
    fn sturm_count_matches_solver() {
        for &(a, b, l) in &[(0.0, 0.0, 1.0), (1.0, -1.0, 2.0), (-3.0, -2.0, 1.5), (5.0, 0.3, 0.7), (-0.5, 4.0, 3.0)] {
            let p = ProblemBuilder::new()
                .vertex("a", Family::Delta(a))
                .vertex("b", Family::Delta(b))
                .edge("e", "a", "b", l)
                .build()
                .unwrap();
            let ev = first_eigenvalues(&p, 4).unwrap();
            assert!((robin_interval_ground_state(a, b, l) - ev[0]).abs() < 1e-9 * (1.0 + ev[0].abs()));
            for w in ev.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                assert_eq!(
                    interval_count_below(a, b, l, mid),
                    crate::secular::count_below(&p, mid),
                    "a={a} b={b} l={l} at {mid}"
                );
            }
        }
    }

    #[test]
    fn zero_strengths_give_zero() {
        let p = robin_neumann(0.0);
        assert!(lower_bound_interval(&p).unwrap().abs() < 1e-12);
        assert_eq!(upper_bound_constant(&p).unwrap(), 0.0);
    }

    #[test]
    fn robin_neumann_interval_attains_the_lower_bound() {
        let p = robin_neumann(1.0);
        let lb = lower_bound_interval(&p).unwrap();
        let ev = first_eigenvalues(&p, 1).unwrap()[0];
        assert!((lb - 0.74017).abs() < 5e-5);
        assert!((lb - ev).abs() < 1e-10);
        assert_eq!(upper_bound_constant(&p).unwrap(), 1.0);
    }

    #[test]
    fn negative_loop_bound_is_below_ground_state() {
        let p = ProblemBuilder::new().vertex("v", Family::Delta(-1.0)).edge("e", "v", "v", 1.0).build().unwrap();
        let lb = lower_bound_interval(&p).unwrap();
        let ev = first_eigenvalues(&p, 1).unwrap()[0];
        assert!(lb < 0.0 && lb < ev);
        // loop secular root: 2κ − α sinh κ − 2κ cosh κ = 0 with α = −1
        let f = |k: f64| 2.0 * k + (k).sinh() - 2.0 * k * k.cosh();
        let (mut lo, mut hi) = (1e-6, 5.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if f(m) > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        assert!((ev + lo * lo).abs() < 1e-9);
    }

    #[test]
    fn constant_potential_shift() {
        let p = ProblemBuilder::new()
            .vertex("a", Family::kirchhoff())
            .vertex("b", Family::kirchhoff())
            .edge_spec(EdgeSpec::new("e", "a", "b", 1.0).with_potential(crate::graph::Potential::constant(-2.0)))
            .edge_spec(EdgeSpec::new("f", "a", "b", 0.5).with_potential(crate::graph::Potential::constant(-2.0)))
            .build()
            .unwrap();
        assert!((upper_bound_constant(&p).unwrap() + 2.0).abs() < 1e-14);
        assert!((first_eigenvalues(&p, 1).unwrap()[0] + 2.0).abs() < 1e-9);
    }

    #[test]
    fn flower_single_loop() {
        let p = ProblemBuilder::new().vertex("v", Family::Delta(1.0)).edge("e", "v", "v", 2.0).build().unwrap();
        let b = flower_bound(&p).unwrap();
        let k = b.sqrt();
        assert!((2.0 * k * k.tan() - 1.0).abs() < 1e-9);
        assert!((b - first_eigenvalues(&p, 1).unwrap()[0]).abs() < 1e-9);
    }

    #[test]
    fn flower_bound_tends_to_zero() {
        let mut last = f64::INFINITY;
        for &a in &[1.0, 1e-2, 1e-4, 1e-6] {
            let p = ProblemBuilder::new()
                .vertex("u", Family::Delta(a))
                .vertex("w", Family::kirchhoff())
                .edge("e", "u", "w", 1.0)
                .edge("f", "u", "w", 0.5)
                .build()
                .unwrap();
            let b = flower_bound(&p).unwrap();
            assert!(b > 0.0 && b < last);
            last = b;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn flower_deltaprime_bounds_ground_state() {
        let p = ProblemBuilder::new()
            .vertex("u", Family::DeltaPrime(-0.7))
            .vertex("w", Family::DeltaPrime(-1.3))
            .edge("e", "u", "w", 1.0)
            .edge("f", "u", "w", 0.5)
            .edge("g", "w", "w", 0.8)
            .build()
            .unwrap();
        let ev = first_eigenvalues(&p, 1).unwrap()[0];
        assert!(ev <= flower_bound(&p).unwrap() + 1e-9);
    }
}
