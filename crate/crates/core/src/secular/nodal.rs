//! Edge solutions represented by their values at piece boundaries.
//!
//! Below the Dirichlet spectrum of an edge every piece has `s(ℓ) > 0`, and
//! the solution on a piece with end values `(g_a, g_b)` is
//! `g_a s(ℓ − x)/s(ℓ) + g_b s(x)/s(ℓ)`. These basis functions are bounded by
//! one in the hyperbolic regime, so values, derivatives and integrals stay
//! accurate where the shooting form `a c + b s` cancels catastrophically.

use nalgebra::DVector;

use super::{dirichlet_count, piece_transfer, piece_transfer_exact};
use crate::linalg::Mat;

/// Whether the nodal form is well conditioned on an edge at `λ`.
pub(crate) fn edge_is_nodal(pieces: &[(f64, f64)], lambda: f64) -> bool {
    let margin = 1e-6 * (1.0 + lambda.abs());
    dirichlet_count(pieces, lambda + margin) == 0
}

/// `(c/s, 1/s)` of a piece; the Dirichlet-to-Neumann entries.
fn dtn_entries(len: f64, mu: f64) -> (f64, f64) {
    let (t, log) = piece_transfer(len, mu);
    (t[(0, 0)] / t[(0, 1)], (-log).exp() / t[(0, 1)])
}

/// Basis values `(φ_a, φ_b, φ_a', φ_b')` at `x` in a piece.
fn basis(len: f64, mu: f64, x: f64) -> (f64, f64, f64, f64) {
    let (t, log) = piece_transfer(len, mu);
    let (tx, lx) = piece_transfer(x, mu);
    let (ty, ly) = piece_transfer(len - x, mu);
    let sb = (lx - log).exp() / t[(0, 1)];
    let sa = (ly - log).exp() / t[(0, 1)];
    (ty[(0, 1)] * sa, tx[(0, 1)] * sb, -ty[(1, 1)] * sa, tx[(1, 1)] * sb)
}

/// `(∫φ_a², ∫φ_a φ_b)` over a piece; `∫φ_b² = ∫φ_a²` by symmetry.
fn integrals(len: f64, mu: f64) -> (f64, f64) {
    let z = mu * len * len;
    let l3 = len * len * len;
    if z.abs() < 1e-2 {
        let t = piece_transfer_exact(len, mu);
        let s = t[(0, 1)];
        let ss = l3 * (1.0 / 3.0 - z / 15.0 + 2.0 * z * z / 315.0 - z * z * z / 2835.0);
        let sx = l3 * (1.0 / 6.0 - z / 60.0 + z * z / 1680.0 - z * z * z / 90720.0);
        (ss / (s * s), sx / (s * s))
    } else if mu > 0.0 {
        let t = piece_transfer_exact(len, mu);
        let (c, s) = (t[(0, 0)], t[(0, 1)]);
        ((len - c * s) / (2.0 * mu) / (s * s), (s - len * c) / (2.0 * mu) / (s * s))
    } else {
        let (t, log) = piece_transfer(len, mu);
        let (c, s) = (t[(0, 0)], t[(0, 1)]);
        let k2 = -mu;
        let aa = (c * s - len * (-2.0 * log).exp()) / (2.0 * k2 * s * s);
        let ab = (len * c - s) * (-log).exp() / (2.0 * k2 * s * s);
        (aa, ab)
    }
}

/// Values at the piece boundaries of an edge with end values `f0`, `f1`.
pub(crate) fn edge_nodes(pieces: &[(f64, f64)], lambda: f64, f0: f64, f1: f64) -> Vec<f64> {
    let n = pieces.len();
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = f0;
    nodes[n] = f1;
    if n == 1 {
        return nodes;
    }
    let d: Vec<(f64, f64)> = pieces.iter().map(|&(l, q)| dtn_entries(l, lambda - q)).collect();
    // flux continuity at interior node j: g_j (r_{j−1} + r_j) − g_{j−1} i_{j−1} − g_{j+1} i_j = 0
    let m = n - 1;
    let mut a = Mat::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for row in 0..m {
        let j = row + 1;
        a[(row, row)] = d[j - 1].0 + d[j].0;
        if row > 0 {
            a[(row, row - 1)] = -d[j - 1].1;
        } else {
            rhs[row] += d[0].1 * f0;
        }
        if row + 1 < m {
            a[(row, row + 1)] = -d[j].1;
        } else {
            rhs[row] += d[n - 1].1 * f1;
        }
    }
    if let Some(x) = a.lu().solve(&rhs) {
        nodes[1..n].copy_from_slice(x.as_slice());
    }
    nodes
}

/// Inward derivatives at both ends of an edge from its nodes.
pub(crate) fn end_derivatives(pieces: &[(f64, f64)], lambda: f64, nodes: &[f64]) -> (f64, f64) {
    let n = pieces.len();
    let (r0, i0) = dtn_entries(pieces[0].0, lambda - pieces[0].1);
    let (r1, i1) = dtn_entries(pieces[n - 1].0, lambda - pieces[n - 1].1);
    (-r0 * nodes[0] + i0 * nodes[1], i1 * nodes[n - 1] - r1 * nodes[n])
}

/// Value and derivative at `x` along the edge.
pub(crate) fn eval(pieces: &[(f64, f64)], lambda: f64, nodes: &[f64], x: f64) -> (f64, f64) {
    let mut start = 0.0;
    for (j, &(len, q)) in pieces.iter().enumerate() {
        if x <= start + len || j + 1 == pieces.len() {
            let t = (x - start).clamp(0.0, len);
            let (pa, pb, da, db) = basis(len, lambda - q, t);
            return (nodes[j] * pa + nodes[j + 1] * pb, nodes[j] * da + nodes[j + 1] * db);
        }
        start += len;
    }
    (nodes[0], 0.0)
}

/// `∫_e f g` for two nodal functions on the same edge.
pub(crate) fn inner(pieces: &[(f64, f64)], lambda: f64, f: &[f64], g: &[f64]) -> f64 {
    pieces
        .iter()
        .enumerate()
        .map(|(j, &(len, q))| {
            let (aa, ab) = integrals(len, lambda - q);
            aa * (f[j] * g[j] + f[j + 1] * g[j + 1]) + ab * (f[j] * g[j + 1] + f[j + 1] * g[j])
        })
        .sum()
}

/// Minimum and maximum along the edge, with closed-form critical points.
pub(crate) fn extrema(pieces: &[(f64, f64)], lambda: f64, nodes: &[f64]) -> (f64, f64) {
    let mut lo = nodes[0];
    let mut hi = nodes[0];
    for (j, &(len, q)) in pieces.iter().enumerate() {
        let mu = lambda - q;
        let (ga, gb) = (nodes[j], nodes[j + 1]);
        let mut push = |x: f64| {
            lo = lo.min(x);
            hi = hi.max(x);
        };
        push(gb);
        let at = |x: f64| {
            let (pa, pb, _, _) = basis(len, mu, x);
            ga * pa + gb * pb
        };
        if mu < 0.0 {
            // f' = 0 where g_b cosh κx = g_a cosh κ(ℓ − x)
            if ga * gb > 0.0 {
                let k = (-mu).sqrt();
                let big = k * len;
                let e2 = (-2.0 * big).exp();
                let coth = (1.0 + e2) / (1.0 - e2);
                let csch = 2.0 * (-big).exp() / (1.0 - e2);
                let arg = coth - csch * gb / ga;
                if arg.abs() < 1.0 {
                    let x = arg.atanh() / k;
                    if x > 0.0 && x < len {
                        push(at(x));
                    }
                }
            }
        } else if mu > 0.0 {
            let w = mu.sqrt();
            let (_, _, da, db) = basis(len, mu, 0.0);
            let (u, p) = (ga, ga * da + gb * db);
            let phi0 = u.atan2(p / w);
            let half = std::f64::consts::FRAC_PI_2;
            let pi = std::f64::consts::PI;
            let mut m = ((phi0 - half) / pi).floor() + 1.0;
            loop {
                let x = (half + m * pi - phi0) / w;
                if x >= len {
                    break;
                }
                if x > 0.0 {
                    push(at(x));
                }
                m += 1.0;
            }
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_integrals_match_quadrature() {
        for &(len, mu) in &[(1.0, -4.0), (3.0, -100.0), (0.5, -1e-3), (1.0, 2.0), (0.2, 30.0)] {
            let n = 20000;
            let h = len / n as f64;
            // Simpson
            let (mut aa, mut ab) = (0.0, 0.0);
            for i in 0..=n {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 } * h / 3.0;
                let (pa, pb, _, _) = basis(len, mu, i as f64 * h);
                aa += w * pa * pa;
                ab += w * pb * pa;
            }
            let (ia, ib) = integrals(len, mu);
            assert!((ia - aa).abs() < 1e-7 * aa.max(1e-3), "{len} {mu}: {ia} vs {aa}");
            assert!((ib - ab).abs() < 1e-7 * aa.max(1e-3), "{len} {mu}: {ib} vs {ab}");
        }
    }

    #[test]
    fn nodes_reproduce_single_piece_solution() {
        // e^{−2x} on [0, 1.5] split into three pieces with q = 0
        let pieces = vec![(0.5, 0.0), (0.5, 0.0), (0.5, 0.0)];
        let nodes = edge_nodes(&pieces, -4.0, 1.0, (-3.0f64).exp());
        for (j, g) in nodes.iter().enumerate() {
            assert!((g - (-(j as f64)).exp()).abs() < 1e-14);
        }
        let (d0, d1) = end_derivatives(&pieces, -4.0, &nodes);
        assert!((d0 + 2.0).abs() < 1e-12 && (d1 - 2.0 * (-3.0f64).exp()).abs() < 1e-12);
        let (v, dv) = eval(&pieces, -4.0, &nodes, 0.7);
        assert!((v - (-1.4f64).exp()).abs() < 1e-14 && (dv + 2.0 * (-1.4f64).exp()).abs() < 1e-13);
        let (lo, hi) = extrema(&pieces, -4.0, &nodes);
        assert!((hi - 1.0).abs() < 1e-15 && (lo - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn interior_minimum_of_cosh() {
        // cosh(3(x − 0.4)) on [0, 1]
        let f = |x: f64| (3.0 * (x - 0.4)).cosh();
        let pieces = vec![(1.0, 0.0)];
        let nodes = vec![f(0.0), f(1.0)];
        let (lo, hi) = extrema(&pieces, -9.0, &nodes);
        assert!((lo - 1.0).abs() < 1e-14 && (hi - f(1.0)).abs() < 1e-14);
    }
}
