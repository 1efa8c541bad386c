//! Star-graph examples: the equilateral star with a δ centre, and the
//! three-edge star whose ground state changes monotonicity in one edge length.

use std::f64::consts::FRAC_PI_2;

use crate::condition::Family;
use crate::error::{Error, Result};
use crate::problem::{ProblemBuilder, SchrodingerProblem};
use crate::secular::first_eigenvalues;

/// Smallest positive root of `1/k = E tan(k/E)`: the ground state `k` of the
/// equilateral `E`-star of total length 1 with Neumann leaves and `δ(1)` at
/// the centre.
pub fn star_limit_check(e: u32) -> f64 {
    assert!(e >= 1, "star needs at least one edge");
    let n = e as f64;
    let g = |k: f64| n * k * (k / n).tan() - 1.0;
    let (mut lo, mut hi) = (0.0, (n * FRAC_PI_2).min(1.0 + 1e-9));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Star with two unit edges ending in `δ(−3/2)`, one edge of length `l`
/// ending in `δ(−2)`, and `δ(α)` at the centre.
pub fn star_example(alpha: f64, l: f64) -> Result<SchrodingerProblem> {
    ProblemBuilder::new()
        .vertex("c", Family::Delta(alpha))
        .vertex("a", Family::Delta(-1.5))
        .vertex("b", Family::Delta(-1.5))
        .vertex("d", Family::Delta(-2.0))
        .edge("ea", "c", "a", 1.0)
        .edge("eb", "c", "b", 1.0)
        .edge("ed", "c", "d", l)
        .build()
}

/// Centre strength at which `λ₁ = −4` for every `l`: the long edge then
/// carries the pure exponential `e^{−2x}` fixed by its `δ(−2)` leaf, and
/// continuity plus the centre's δ condition determine `α`.
pub fn alpha_c_closed_form() -> f64 {
    let (c, s) = (2f64.cosh(), 2f64.sinh());
    // unit edge from its leaf: f = cosh 2x − (3/4) sinh 2x
    let f1 = c - 0.75 * s;
    let inward = -(2.0 * s - 1.5 * c);
    2.0 + 2.0 * inward / f1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCReport {
    pub alpha_c: f64,
    pub lambda1: f64,
    /// Bisection steps taken.
    pub steps: usize,
    /// Sign of `dλ₁/dl` at the bracket ends `(lo, hi)`.
    pub end_signs: (f64, f64),
}

fn slope(alpha: f64, l: f64, h: f64) -> Result<f64> {
    let up = first_eigenvalues(&star_example(alpha, l + h)?, 1)?[0];
    let down = first_eigenvalues(&star_example(alpha, l - h)?, 1)?[0];
    Ok((up - down) / (2.0 * h))
}

/// Bisect `α ∈ [lo, hi]` on the sign of the central difference of `λ₁` in
/// `l` at `l = 1`.
pub fn locate_alpha_c(lo: f64, hi: f64, tol: f64) -> Result<AlphaCReport> {
    let h = 1e-3;
    let (mut a, mut b) = (lo, hi);
    let sa = slope(a, 1.0, h)?.signum();
    let sb = slope(b, 1.0, h)?.signum();
    if sa == sb {
        return Err(Error::Precondition(format!("dλ₁/dl has sign {sa} at both α = {lo} and α = {hi}")));
    }
    let mut steps = 0;
    while b - a > tol && steps < 200 {
        let m = 0.5 * (a + b);
        if slope(m, 1.0, h)?.signum() == sa {
            a = m;
        } else {
            b = m;
        }
        steps += 1;
    }
    let alpha_c = 0.5 * (a + b);
    let lambda1 = first_eigenvalues(&star_example(alpha_c, 1.0)?, 1)?[0];
    Ok(AlphaCReport { alpha_c, lambda1, steps, end_signs: (sa, sb) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_limit_values() {
        let k1 = star_limit_check(1);
        assert!((k1 * k1.tan() - 1.0).abs() < 1e-12 && (k1 - 0.8603).abs() < 1e-4);
        assert!((k1 * k1 - 0.74017).abs() < 5e-5);
        assert!(star_limit_check(8) < 1.0);
        let mut last = 0.0;
        for j in 0..=14 {
            let k = star_limit_check(1 << j);
            assert!(k > last && k < 1.0);
            last = k;
        }
        assert!((star_limit_check(10_000) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn star_limit_matches_solver() {
        for e in [1usize, 3, 5] {
            let mut b = ProblemBuilder::new().vertex("c", Family::Delta(1.0));
            for i in 0..e {
                let leaf = format!("l{i}");
                b = b.vertex(&leaf, Family::Neumann).edge(&format!("e{i}"), &leaf, "c", 1.0 / e as f64);
            }
            let lam = first_eigenvalues(&b.build().unwrap(), 1).unwrap()[0];
            let k = star_limit_check(e as u32);
            assert!((lam - k * k).abs() < 1e-9, "E={e}: {lam} vs {}", k * k);
        }
    }

    #[test]
    fn critical_coupling_keeps_ground_state_fixed() {
        let a = alpha_c_closed_form();
        assert!(a < 0.0 && (a.abs() - 1.09).abs() < 0.01);
        for l in [0.5, 1.0, 2.0] {
            let lam = first_eigenvalues(&star_example(a, l).unwrap(), 1).unwrap()[0];
            assert!((lam + 4.0).abs() < 1e-9, "l={l}: {lam}");
        }
    }

    #[test]
    fn bisection_finds_closed_form() {
        let r = locate_alpha_c(-1.5, -0.5, 1e-7).unwrap();
        assert!((r.alpha_c - alpha_c_closed_form()).abs() < 1e-6, "{r:?}");
    }
}
