//! Seeded random problems for the inequality harness.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::condition::{Family, VertexCondition};
use crate::graph::{EdgeSpec, Potential};
use crate::linalg::Mat;
use crate::problem::VertexSpec;

use super::Fragment;

/// Smallest `|β|` drawn for δ′ strengths; tinier values make `Λ = d/β` so
/// large that the spectrum is dominated by one very negative eigenvalue.
pub const MIN_ABS_BETA: f64 = 0.05;

/// Wraps the RNG with the distributions used by the harness.
pub struct Generator<'r> {
    pub rng: &'r mut ChaCha8Rng,
}

impl<'r> Generator<'r> {
    pub fn new(rng: &'r mut ChaCha8Rng) -> Self {
        Generator { rng }
    }

    pub fn length(&mut self) -> f64 {
        self.rng.gen_range(0.2..2.0)
    }

    pub fn alpha(&mut self) -> f64 {
        self.rng.gen_range(-2.0..2.0)
    }

    pub fn beta(&mut self) -> f64 {
        loop {
            let b: f64 = self.rng.gen_range(-2.0..2.0);
            if b.abs() >= MIN_ABS_BETA {
                return b;
            }
        }
    }

    pub fn beta_in(&mut self, lo: f64, hi: f64) -> f64 {
        loop {
            let b: f64 = self.rng.gen_range(lo..hi);
            if b.abs() >= MIN_ABS_BETA {
                return b;
            }
        }
    }

    pub fn rng_range(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Piecewise-constant potential with values in `[lo, hi)`.
    pub fn potential(&mut self, length: f64, lo: f64, hi: f64) -> Potential {
        match self.rng.gen_range(0..5) {
            0 | 1 => Potential::zero(),
            2 | 3 => Potential::constant(self.rng.gen_range(lo..hi)),
            _ => {
                let b = length * self.rng.gen_range(0.2..0.8);
                Potential::piecewise(vec![b], vec![self.rng.gen_range(lo..hi), self.rng.gen_range(lo..hi)])
            }
        }
    }

    /// Connected multigraph on `nv` vertices with `ne` edges (loops and
    /// parallel edges allowed). Returns endpoint pairs.
    pub fn topology(&mut self, nv: usize, ne: usize) -> Vec<(usize, usize)> {
        assert!(nv >= 1 && ne + 1 >= nv && ne >= 1);
        let mut edges = Vec::with_capacity(ne);
        for i in 1..nv {
            let j = self.rng.gen_range(0..i);
            edges.push(if self.chance(0.5) { (i, j) } else { (j, i) });
        }
        while edges.len() < ne {
            edges.push((self.rng.gen_range(0..nv), self.rng.gen_range(0..nv)));
        }
        edges
    }

    /// Random vertex count and edge count, at most five edges.
    pub fn shape(&mut self, min_vertices: usize) -> (usize, usize) {
        let nv = self.rng.gen_range(min_vertices.max(1)..=4);
        let ne = self.rng.gen_range((nv - 1).max(1)..=5);
        (nv, ne)
    }

    pub fn edges(&mut self, ids: &[String], pairs: &[(usize, usize)], prefix: &str, lo: f64, hi: f64) -> Vec<EdgeSpec> {
        pairs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let l = self.length();
                let q = self.potential(l, lo, hi);
                EdgeSpec::new(&format!("{prefix}{k}"), &ids[a], &ids[b], l).with_potential(q)
            })
            .collect()
    }

    pub fn delta(&mut self) -> VertexSpec {
        VertexSpec::Family(Family::Delta(self.alpha()))
    }

    /// δ′ with random strength, occasionally anti-Kirchhoff.
    pub fn deltaprime(&mut self) -> VertexSpec {
        if self.chance(0.15) {
            VertexSpec::Family(Family::AntiKirchhoff)
        } else {
            VertexSpec::Family(Family::DeltaPrime(self.beta()))
        }
    }

    /// Any condition, including random custom ones.
    pub fn any_condition(&mut self, degree: usize) -> VertexSpec {
        match self.rng.gen_range(0..8) {
            0 | 7 => self.delta(),
            1 => VertexSpec::Family(Family::kirchhoff()),
            2 => VertexSpec::Family(Family::DeltaPrime(self.beta())),
            3 => VertexSpec::Family(Family::AntiKirchhoff),
            4 => VertexSpec::Family(Family::Dirichlet),
            5 => VertexSpec::Family(Family::Neumann),
            _ => VertexSpec::Explicit(random_custom_condition(self.rng, degree, 0)),
        }
    }
}

fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> Mat {
    loop {
        let m = Mat::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        if m.determinant().abs() > 1e-3 {
            return m.qr().q();
        }
    }
}

/// A random self-adjoint condition of degree `d` with at least `min_robin`
/// Robin directions; Robin eigenvalues have modulus in `[0.2, 2]`.
pub fn random_custom_condition(rng: &mut ChaCha8Rng, d: usize, min_robin: usize) -> VertexCondition {
    let q = random_orthogonal(rng, d);
    let nr = rng.gen_range(min_robin.min(d)..=d);
    let nd = rng.gen_range(0..=d - nr);
    let proj = |cols: std::ops::Range<usize>| {
        let b = q.columns(cols.start, cols.len()).into_owned();
        &b * b.transpose()
    };
    let pr = proj(0..nr);
    let pd = proj(nr..nr + nd);
    let pn = proj(nr + nd..d);
    let mut lambda = Mat::zeros(d, d);
    if nr > 0 {
        let u = random_orthogonal(rng, nr);
        let mu: Vec<f64> = (0..nr)
            .map(|_| {
                let m: f64 = rng.gen_range(0.2..2.0);
                if rng.gen_bool(0.5) {
                    m
                } else {
                    -m
                }
            })
            .collect();
        let inner = &u * Mat::from_diagonal(&nalgebra::DVector::from_vec(mu)) * u.transpose();
        let b = q.columns(0, nr).into_owned();
        lambda = &b * inner * b.transpose();
        lambda = (&lambda + lambda.transpose()) * 0.5;
    }
    VertexCondition::custom(pd, pn, pr, lambda).expect("random condition is self-adjoint by construction")
}

impl Fragment {
    /// Vertex ids `w0, w1, ...`.
    pub fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }
}
