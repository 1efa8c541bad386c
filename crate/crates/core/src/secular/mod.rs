//! Exact solver built on per-edge fundamental systems.
//!
//! Each edge carries solutions `c`, `s` of `−u'' + q u = λ u` with
//! `c(0)=1, c'(0)=0, s(0)=0, s'(0)=1`. Eigenvalues are located with an exact
//! counting function (Dirichlet edge count plus the negative index of the
//! boundary form of λ-harmonic extensions), bisected per index and then
//! polished on the smallest singular value of the vertex-condition matrix.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::graph::{Edge, End, MetricGraph};
use crate::linalg::{self, Mat};
use crate::par::{self, Exec};
use crate::problem::SchrodingerProblem;

mod nodal;

/// Relative rank tolerance for singular values of the secular matrix.
pub const SECULAR_RANK_TOL: f64 = 1e-7;
/// Clusters of bisected eigenvalues closer than this (relative) are one eigenvalue.
const CLUSTER_TOL: f64 = 1e-7;
const HYPERBOLIC_SPLIT: f64 = 20.0;

/// Transfer matrix `[[c, s], [c', s']]` at `x = L(e)`, stored as `exp(log_scale) * scaled`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalSystem {
    pub scaled: Matrix2<f64>,
    pub log_scale: f64,
}

impl FundamentalSystem {
    pub fn matrix(&self) -> Matrix2<f64> {
        self.scaled * self.log_scale.exp()
    }

    pub fn c(&self) -> f64 {
        self.matrix()[(0, 0)]
    }

    pub fn s(&self) -> f64 {
        self.matrix()[(0, 1)]
    }

    pub fn c_prime(&self) -> f64 {
        self.matrix()[(1, 0)]
    }

    pub fn s_prime(&self) -> f64 {
        self.matrix()[(1, 1)]
    }

    pub fn det(&self) -> f64 {
        self.scaled.determinant() * (2.0 * self.log_scale).exp()
    }
}

/// Transfer over one constant piece of length `len` with `mu = λ − q`.
pub(crate) fn piece_transfer(len: f64, mu: f64) -> (Matrix2<f64>, f64) {
    if mu > 0.0 {
        let w = mu.sqrt();
        let (sn, cs) = (w * len).sin_cos();
        let s = sn / w;
        (Matrix2::new(cs, s, -mu * s, cs), 0.0)
    } else if mu == 0.0 {
        (Matrix2::new(1.0, len, 0.0, 1.0), 0.0)
    } else {
        let k = (-mu).sqrt();
        let x = k * len;
        if x < HYPERBOLIC_SPLIT {
            let c = x.cosh();
            let s = x.sinh() / k;
            (Matrix2::new(c, s, k * k * s, c), 0.0)
        } else {
            let e = (-2.0 * x).exp();
            let c = 0.5 * (1.0 + e);
            let s = 0.5 * (1.0 - e) / k;
            (Matrix2::new(c, s, k * k * s, c), x)
        }
    }
}

/// Unscaled transfer over one piece; overflows only where `f64` cannot
/// represent the solution values themselves.
pub(crate) fn piece_transfer_exact(len: f64, mu: f64) -> Matrix2<f64> {
    let (t, log) = piece_transfer(len, mu);
    if log == 0.0 {
        t
    } else {
        t * log.exp()
    }
}

fn chain(pieces: &[(f64, f64)], lambda: f64) -> (Matrix2<f64>, f64) {
    let mut t = Matrix2::identity();
    let mut log = 0.0;
    for &(len, q) in pieces {
        let (p, l) = piece_transfer(len, lambda - q);
        t = p * t;
        log += l;
        let m = t.abs().max();
        if m > 1e100 {
            t /= m;
            log += m.ln();
        }
    }
    (t, log)
}

/// Fundamental system of an edge at spectral parameter `λ`.
pub fn fundamental_system(edge: &Edge, lambda: f64) -> FundamentalSystem {
    let (scaled, log_scale) = chain(&edge.potential.pieces(edge.length), lambda);
    FundamentalSystem { scaled, log_scale }
}

/// Number of zeros of `s(·; λ)` in the open edge, i.e. the number of Dirichlet
/// eigenvalues of the edge strictly below `λ`.
pub(crate) fn dirichlet_count(pieces: &[(f64, f64)], lambda: f64) -> usize {
    let mut u = 0.0f64;
    let mut p = 1.0f64;
    let mut count: i64 = 0;
    let last = pieces.len() - 1;
    for (i, &(len, q)) in pieces.iter().enumerate() {
        let mu = lambda - q;
        let open_end = i == last;
        if mu > 0.0 {
            let w = mu.sqrt();
            let phi0 = u.atan2(p / w);
            let phi1 = phi0 + w * len;
            let lo = (phi0 / std::f64::consts::PI).floor() as i64;
            let hi = if open_end {
                (phi1 / std::f64::consts::PI).ceil() as i64 - 1
            } else {
                (phi1 / std::f64::consts::PI).floor() as i64
            };
            count += (hi - lo).max(0);
        }
        let (t, _) = piece_transfer(len, mu);
        let (nu, np) = (t[(0, 0)] * u + t[(0, 1)] * p, t[(1, 0)] * u + t[(1, 1)] * p);
        if mu <= 0.0 && u != 0.0 {
            let crosses = if open_end { nu * u.signum() < 0.0 } else { nu * u.signum() <= 0.0 };
            if crosses {
                count += 1;
            }
        }
        let n = nu.abs().max(np.abs());
        u = nu / n;
        p = np / n;
    }
    count as usize
}

/// Piece integrals `(∫C², ∫CS, ∫S²)` over a constant piece.
pub(crate) fn piece_integrals(len: f64, mu: f64) -> (f64, f64, f64) {
    let t = piece_transfer_exact(len, mu);
    let (c, s) = (t[(0, 0)], t[(0, 1)]);
    let cc = 0.5 * (len + c * s);
    let cs = 0.5 * s * s;
    let z = mu * len * len;
    let ss = if z.abs() < 1e-2 {
        let l3 = len * len * len;
        l3 * (1.0 / 3.0 - z / 15.0 + 2.0 * z * z / 315.0 - z * z * z / 2835.0)
    } else {
        (len - c * s) / (2.0 * mu)
    };
    (cc, cs, ss)
}

/// Precomputed data for repeated evaluation at many `λ`.
pub struct SecularModel<'a> {
    problem: &'a SchrodingerProblem,
    pieces: Vec<Vec<(f64, f64)>>,
    /// Orthonormal basis of `{F : P_D F(v) = 0 for all v}` in slot coordinates.
    free: Mat,
    /// `Wᵀ R W` with `R` the Robin operators placed at slot coordinates.
    robin: Mat,
    rows_f: Mat,
    rows_d: Mat,
}

impl<'a> SecularModel<'a> {
    pub fn new(problem: &'a SchrodingerProblem) -> Self {
        let g = problem.graph();
        let n = 2 * g.edge_count();
        let pieces = g.edges().iter().map(|e| e.potential.pieces(e.length)).collect();
        let mut blocks = Vec::new();
        let mut robin_full = Mat::zeros(n, n);
        let mut rows_f = Mat::zeros(n, n);
        let mut rows_d = Mat::zeros(n, n);
        let mut row = 0;
        for v in 0..g.vertex_count() {
            let cond = problem.condition(v);
            let slots: Vec<usize> = g.incidence(v).iter().map(|i| i.slot()).collect();
            let basis = linalg::range_basis(&(&cond.pn + &cond.pr), 1e-6);
            blocks.push((slots.clone(), basis));
            let (a, b) = cond.rows();
            for i in 0..slots.len() {
                let norm = (a.row(i).norm_squared() + b.row(i).norm_squared()).sqrt();
                for (j, &sj) in slots.iter().enumerate() {
                    rows_f[(row, sj)] = a[(i, j)] / norm;
                    rows_d[(row, sj)] = b[(i, j)] / norm;
                    robin_full[(slots[i], sj)] = cond.lambda[(i, j)];
                }
                row += 1;
            }
        }
        let m: usize = blocks.iter().map(|(_, b)| b.ncols()).sum();
        let mut free = Mat::zeros(n, m);
        let mut col = 0;
        for (slots, basis) in &blocks {
            for k in 0..basis.ncols() {
                for (j, &s) in slots.iter().enumerate() {
                    free[(s, col)] = basis[(j, k)];
                }
                col += 1;
            }
        }
        let robin = free.transpose() * &robin_full * &free;
        SecularModel { problem, pieces, free, robin, rows_f, rows_d }
    }

    pub fn problem(&self) -> &SchrodingerProblem {
        self.problem
    }

    fn graph(&self) -> &MetricGraph {
        self.problem.graph()
    }

    /// Number of eigenvalues strictly below `λ` (counted with multiplicity).
    pub fn count_below(&self, lambda: f64) -> usize {
        let dirichlet: usize = self.pieces.iter().map(|p| dirichlet_count(p, lambda)).sum();
        dirichlet + linalg::negative_index(&self.dtn_form(lambda))
    }

    /// `Wᵀ(R − N(λ))W` with `N` the edgewise Dirichlet-to-Neumann map; its
    /// kernel gives the boundary values of eigenfunctions when `λ` is below
    /// every edge's Dirichlet spectrum.
    fn dtn_form(&self, lambda: f64) -> Mat {
        let n = 2 * self.graph().edge_count();
        let mut dtn = Mat::zeros(n, n);
        for (e, pieces) in self.pieces.iter().enumerate() {
            let (t, log) = chain(pieces, lambda);
            let mut s = t[(0, 1)];
            if s == 0.0 {
                s = f64::MIN_POSITIVE;
            }
            let es = (-log).exp();
            let (o, r) = (2 * e, 2 * e + 1);
            dtn[(o, o)] = -t[(0, 0)] / s;
            dtn[(o, r)] = es / s;
            dtn[(r, o)] = es / s;
            dtn[(r, r)] = -t[(1, 1)] / s;
        }
        &self.robin - self.free.transpose() * dtn * &self.free
    }

    /// Balanced secular matrix scaled to unit Frobenius norm (or less), plus the column
    /// scales mapping its null vectors `y` to coefficients `x = scale ∘ y`.
    ///
    /// The `s`-columns are multiplied by `sqrt(max(1, |λ|))` so both solution
    /// families carry comparable weight at high frequency.
    pub fn matrix(&self, lambda: f64) -> (Mat, Vec<f64>) {
        let n = 2 * self.graph().edge_count();
        let k_ref = lambda.abs().max(1.0).sqrt();
        let mut tf = Mat::zeros(n, n);
        let mut td = Mat::zeros(n, n);
        let mut scale = vec![1.0; n];
        for (e, pieces) in self.pieces.iter().enumerate() {
            let (t, log) = chain(pieces, lambda);
            let es = (-log).exp();
            let (a, b) = (2 * e, 2 * e + 1);
            tf[(a, a)] = es;
            tf[(b, a)] = t[(0, 0)];
            tf[(b, b)] = t[(0, 1)] * k_ref;
            td[(a, b)] = es * k_ref;
            td[(b, a)] = -t[(1, 0)];
            td[(b, b)] = -t[(1, 1)] * k_ref;
            scale[a] = es;
            scale[b] = es * k_ref;
        }
        let mut m = &self.rows_f * tf + &self.rows_d * td;
        // Balanced entries are O(1); a matrix that is small as a whole is
        // (nearly) null rather than badly scaled, as on a loop at a double
        // eigenvalue.
        m /= m.norm().max(1.0);
        (m, scale)
    }

    /// Smallest singular value of the balanced secular matrix relative to its largest.
    pub fn sigma_min(&self, lambda: f64) -> f64 {
        self.sigma_nth(lambda, 1)
    }

    /// The `j`-th smallest relative singular value; it vanishes exactly at
    /// eigenvalues of multiplicity at least `j`.
    pub fn sigma_nth(&self, lambda: f64, j: usize) -> f64 {
        let (m, _) = self.matrix(lambda);
        let sv = linalg::singular_values(&m);
        let j = j.clamp(1, sv.len());
        sv[sv.len() - j] / sv[0].max(1.0 / (m.nrows() as f64).sqrt())
    }

    /// A spectral parameter with no eigenvalue below it.
    pub fn lower_limit(&self) -> Result<f64> {
        let p = self.problem;
        let lam_sum = p.robin_norm_sum();
        let mut low = -(p.potential_sup() + lam_sum * lam_sum + 1.0);
        for _ in 0..200 {
            if self.count_below(low) == 0 {
                return Ok(low);
            }
            low = 2.0 * low - 1.0;
        }
        Err(Error::Solver("no lower bound for the spectrum found".into()))
    }

    fn upper_for(&self, k: usize, start: f64) -> Result<f64> {
        let mut hi = start.abs().max(1.0);
        for _ in 0..200 {
            if self.count_below(hi) >= k {
                return Ok(hi);
            }
            hi = 2.0 * hi + 1.0;
        }
        Err(Error::Solver(format!("could not bracket eigenvalue {k}")))
    }

    /// `inf {λ : count_below(λ) ≥ j}` by bisection.
    fn bisect_index(&self, j: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-15 * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) >= j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Root of `det M` in `[a, b]` by bisection, if the sign changes.
    fn det_root(&self, mut a: f64, mut b: f64) -> Option<f64> {
        let det = |x: f64| self.matrix(x).0.lu().determinant();
        let fa = det(a);
        let fb = det(b);
        if !(fa * fb < 0.0) {
            return None;
        }
        let sa = fa.signum();
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = det(mid);
            if fm == 0.0 {
                return Some(mid);
            }
            if fm.signum() == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }

    fn golden_min(&self, a: f64, b: f64, j: usize) -> (f64, f64) {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (a, b);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let mut f1 = self.sigma_nth(x1, j);
        let mut f2 = self.sigma_nth(x2, j);
        for _ in 0..200 {
            if b - a <= 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = self.sigma_nth(x1, j);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = self.sigma_nth(x2, j);
            }
        }
        if f1 <= f2 {
            (x1, f1)
        } else {
            (x2, f2)
        }
    }
}

/// Which backend produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Secular,
    Fem,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralValue {
    pub value: f64,
    pub multiplicity: usize,
    pub residual: f64,
}

/// Ascending distinct eigenvalues with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<SpectralValue>,
    pub window: (f64, f64),
    pub backend: Backend,
}

impl Spectrum {
    /// Eigenvalues repeated according to multiplicity.
    pub fn flat(&self) -> Vec<f64> {
        self.values.iter().flat_map(|v| std::iter::repeat(v.value).take(v.multiplicity)).collect()
    }

    /// The first `k` eigenvalues with multiplicity (fewer if unavailable).
    pub fn first(&self, k: usize) -> Vec<f64> {
        let mut f = self.flat();
        f.truncate(k);
        f
    }

    /// `λ_k`, one-based.
    pub fn nth(&self, k: usize) -> Option<f64> {
        self.flat().get(k - 1).copied()
    }

    pub fn len_with_multiplicity(&self) -> usize {
        self.values.iter().map(|v| v.multiplicity).sum()
    }
}

/// What part of the spectrum to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRequest {
    pub count: Option<usize>,
    pub window: Option<(f64, f64)>,
}

impl SpectrumRequest {
    pub fn first(k: usize) -> Self {
        SpectrumRequest { count: Some(k), window: None }
    }

    pub fn window(min: f64, max: f64) -> Self {
        SpectrumRequest { count: None, window: Some((min, max)) }
    }
}

/// Smallest singular value of the balanced secular matrix at `λ`.
pub fn secular_value(problem: &SchrodingerProblem, lambda: f64) -> f64 {
    SecularModel::new(problem).sigma_min(lambda)
}

/// Number of eigenvalues strictly below `λ`.
pub fn count_below(problem: &SchrodingerProblem, lambda: f64) -> usize {
    SecularModel::new(problem).count_below(lambda)
}

pub fn eigenvalues(problem: &SchrodingerProblem, request: SpectrumRequest) -> Result<Spectrum> {
    eigenvalues_with(problem, request, Exec::default())
}

/// First `k` eigenvalues with multiplicity, as a flat list.
pub fn first_eigenvalues(problem: &SchrodingerProblem, k: usize) -> Result<Vec<f64>> {
    Ok(eigenvalues(problem, SpectrumRequest::first(k))?.first(k))
}

pub fn eigenvalues_with(problem: &SchrodingerProblem, request: SpectrumRequest, exec: Exec) -> Result<Spectrum> {
    let model = SecularModel::new(problem);
    let low = model.lower_limit()?;
    let (first, last, hi) = match (request.count, request.window) {
        (Some(0), _) => return Err(Error::Input("k must be at least 1".into())),
        (None, None) => return Err(Error::Input("either k or a window is required".into())),
        (Some(k), None) => (1, k, model.upper_for(k, low)?),
        (count, Some((a, b))) => {
            if !(a < b) {
                return Err(Error::Input("empty spectral window".into()));
            }
            let below_a = if a <= low { 0 } else { model.count_below(a) };
            let top = b + 1e-12 * (1.0 + b.abs());
            let upto_b = model.count_below(top);
            let found = upto_b.saturating_sub(below_a);
            let last = match count {
                Some(k) if found < k => {
                    return Err(Error::WindowExhausted { found, requested: k, upper: b });
                }
                Some(k) => below_a + k,
                None => upto_b,
            };
            if last <= below_a {
                return Ok(Spectrum { values: Vec::new(), window: (a, b), backend: Backend::Secular });
            }
            (below_a + 1, last, top)
        }
    };
    let indices: Vec<usize> = (first..=last).collect();
    let mut approx = par::map(exec, &indices, |&j| model.bisect_index(j, low, hi));
    approx.sort_by(f64::total_cmp);

    let mut clusters: Vec<(usize, Vec<f64>)> = Vec::new();
    for (i, &x) in approx.iter().enumerate() {
        match clusters.last_mut() {
            Some((_, members)) if x - members[members.len() - 1] <= CLUSTER_TOL * (1.0 + x.abs()) => {
                members.push(x)
            }
            _ => clusters.push((first + i, vec![x])),
        }
    }
    let nc = clusters.len();
    let jobs: Vec<usize> = (0..nc).collect();
    let polished = par::map(exec, &jobs, |&ci| {
        let (start, members) = &clusters[ci];
        let lo_m = members[0];
        let hi_m = members[members.len() - 1];
        let c = 0.5 * (lo_m + hi_m);
        let mut gap = f64::INFINITY;
        if ci > 0 {
            let prev = &clusters[ci - 1].1;
            gap = gap.min(lo_m - prev[prev.len() - 1]);
        }
        if ci + 1 < nc {
            gap = gap.min(clusters[ci + 1].1[0] - hi_m);
        }
        let w = (CLUSTER_TOL * (1.0 + c.abs())).max(2.0 * (hi_m - lo_m)).min(0.4 * gap);
        // Counting loses digits next to poles of the Dirichlet-to-Neumann map,
        // where the secular matrix is well conditioned; deep in the hyperbolic
        // regime it is the other way round. A refinement on the secular matrix
        // (sign of det M for simple roots, the j-th smallest singular value
        // for clusters of size j) replaces the counting value only when it
        // lowers the residual by orders of magnitude.
        let j = members.len();
        let xb = if j == 1 { members[0] } else { c };
        let mut best = (xb, model.sigma_nth(xb, j));
        let refined = if j == 1 {
            let wd = (1e-6 * (1.0 + c.abs())).min(0.4 * gap);
            model.det_root(c - wd, c + wd).map(|x| (x, model.sigma_nth(x, 1)))
        } else {
            None
        };
        let refined = match refined {
            Some(r) if r.1 < SECULAR_RANK_TOL => r,
            _ => model.golden_min(c - w, c + w, j),
        };
        if refined.1 < 1e-3 * best.1 {
            best = refined;
        }
        let mut mult = members.len();
        if ci + 1 == nc {
            let above = model.count_below(c + w);
            mult = mult.max(above.saturating_sub(start - 1));
        }
        SpectralValue { value: best.0, multiplicity: mult, residual: best.1 }
    });
    for v in &polished {
        if !(v.residual < SECULAR_RANK_TOL) {
            return Err(Error::Solver(format!(
                "refinement did not converge near {:.12} (residual {:.3e})",
                v.value, v.residual
            )));
        }
    }
    let window = request.window.unwrap_or((low, polished.last().map(|v| v.value).unwrap_or(low)));
    Ok(Spectrum { values: polished, window, backend: Backend::Secular })
}

/// Boundary data in the flattened endpoint ordering (`2e` origin, `2e+1` terminus).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub values: Vec<f64>,
    /// Inward derivatives.
    pub derivatives: Vec<f64>,
}

impl BoundaryTrace {
    /// Per-vertex view `(F(v), F'(v))` in incidence order.
    pub fn at_vertex(&self, graph: &MetricGraph, v: usize) -> (Vec<f64>, Vec<f64>) {
        let inc = graph.incidence(v);
        (
            inc.iter().map(|i| self.values[i.slot()]).collect(),
            inc.iter().map(|i| self.derivatives[i.slot()]).collect(),
        )
    }
}

/// An eigenfunction `f_e = a_e c_e + b_e s_e`, normalized in `L²(Γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenfunction {
    pub eigenvalue: f64,
    pub coefficients: Vec<(f64, f64)>,
    pub trace: BoundaryTrace,
    /// Values at the piece boundaries of every edge, present when `λ` lies
    /// below all edges' Dirichlet spectra. Evaluation then uses the nodal
    /// form, which stays accurate deep in the hyperbolic regime.
    pub nodes: Option<Vec<Vec<f64>>>,
}

impl Eigenfunction {
    fn from_coefficients(problem: &SchrodingerProblem, lambda: f64, coefficients: Vec<(f64, f64)>) -> Self {
        let g = problem.graph();
        let mut values = vec![0.0; 2 * g.edge_count()];
        let mut derivatives = vec![0.0; 2 * g.edge_count()];
        for (e, edge) in g.edges().iter().enumerate() {
            let (a, b) = coefficients[e];
            let t = fundamental_system(edge, lambda).matrix();
            values[End::Origin.slot(e)] = a;
            derivatives[End::Origin.slot(e)] = b;
            values[End::Terminus.slot(e)] = t[(0, 0)] * a + t[(0, 1)] * b;
            derivatives[End::Terminus.slot(e)] = -(t[(1, 0)] * a + t[(1, 1)] * b);
        }
        Eigenfunction { eigenvalue: lambda, coefficients, trace: BoundaryTrace { values, derivatives }, nodes: None }
    }

    fn from_nodes(problem: &SchrodingerProblem, lambda: f64, nodes: Vec<Vec<f64>>) -> Self {
        let g = problem.graph();
        let mut values = vec![0.0; 2 * g.edge_count()];
        let mut derivatives = vec![0.0; 2 * g.edge_count()];
        let mut coefficients = Vec::with_capacity(g.edge_count());
        for (e, edge) in g.edges().iter().enumerate() {
            let pieces = edge.potential.pieces(edge.length);
            let (d0, d1) = nodal::end_derivatives(&pieces, lambda, &nodes[e]);
            values[2 * e] = nodes[e][0];
            values[2 * e + 1] = *nodes[e].last().unwrap();
            derivatives[2 * e] = d0;
            derivatives[2 * e + 1] = d1;
            coefficients.push((values[2 * e], d0));
        }
        Eigenfunction { eigenvalue: lambda, coefficients, trace: BoundaryTrace { values, derivatives }, nodes: Some(nodes) }
    }

    /// `factor · f`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mul = |v: &Vec<f64>| v.iter().map(|x| x * factor).collect::<Vec<f64>>();
        Eigenfunction {
            eigenvalue: self.eigenvalue,
            coefficients: self.coefficients.iter().map(|&(a, b)| (a * factor, b * factor)).collect(),
            trace: BoundaryTrace { values: mul(&self.trace.values), derivatives: mul(&self.trace.derivatives) },
            nodes: self.nodes.as_ref().map(|n| n.iter().map(mul).collect()),
        }
    }

    /// Value and derivative at `x` on edge `e`.
    pub fn eval(&self, problem: &SchrodingerProblem, e: usize, x: f64) -> (f64, f64) {
        let edge = problem.graph().edge(e);
        if let Some(nodes) = &self.nodes {
            return nodal::eval(&edge.potential.pieces(edge.length), self.eigenvalue, &nodes[e], x);
        }
        let (mut u, mut p) = self.coefficients[e];
        let mut start = 0.0;
        for (s0, s1, q) in edge.potential.segments(edge.length) {
            let end = s1.min(x);
            if end > s0 {
                let t = piece_transfer_exact(end - s0, self.eigenvalue - q);
                let nu = t[(0, 0)] * u + t[(0, 1)] * p;
                p = t[(1, 0)] * u + t[(1, 1)] * p;
                u = nu;
            }
            start = s1;
            if s1 >= x {
                break;
            }
        }
        let _ = start;
        (u, p)
    }

    /// Squared `L²` norm on edge `e`.
    pub fn edge_norm_sq(&self, problem: &SchrodingerProblem, e: usize) -> f64 {
        if let Some(nodes) = &self.nodes {
            let edge = problem.graph().edge(e);
            return nodal::inner(&edge.potential.pieces(edge.length), self.eigenvalue, &nodes[e], &nodes[e]);
        }
        let (a, b) = self.coefficients[e];
        edge_inner(problem, e, self.eigenvalue, (a, b), (a, b))
    }

    /// Minimum and maximum over edge `e`, using closed-form critical points.
    pub fn edge_extrema(&self, problem: &SchrodingerProblem, e: usize) -> (f64, f64) {
        let edge = problem.graph().edge(e);
        if let Some(nodes) = &self.nodes {
            return nodal::extrema(&edge.potential.pieces(edge.length), self.eigenvalue, &nodes[e]);
        }
        let (mut u, mut p) = self.coefficients[e];
        let mut lo = u;
        let mut hi = u;
        for (len, q) in edge.potential.pieces(edge.length) {
            let mu = self.eigenvalue - q;
            let mut push = |x: f64| {
                lo = lo.min(x);
                hi = hi.max(x);
            };
            if mu > 0.0 {
                let w = mu.sqrt();
                let r = (u * u + p * p / mu).sqrt();
                let phi0 = u.atan2(p / w);
                // critical points where phi0 + w t = π/2 + jπ
                let half = std::f64::consts::FRAC_PI_2;
                let pi = std::f64::consts::PI;
                let mut j = ((phi0 - half) / pi).floor() + 1.0;
                loop {
                    let t = (half + j * pi - phi0) / w;
                    if t >= len {
                        break;
                    }
                    if t > 0.0 {
                        push((phi0 + w * t).sin() * r);
                    }
                    j += 1.0;
                }
            } else if mu < 0.0 && u != 0.0 {
                let k = (-mu).sqrt();
                let ratio = -p / (k * u);
                if ratio.abs() < 1.0 {
                    let t = ratio.atanh() / k;
                    if t > 0.0 && t < len {
                        let tr = piece_transfer_exact(t, mu);
                        push(tr[(0, 0)] * u + tr[(0, 1)] * p);
                    }
                }
            }
            let t = piece_transfer_exact(len, mu);
            let nu = t[(0, 0)] * u + t[(0, 1)] * p;
            p = t[(1, 0)] * u + t[(1, 1)] * p;
            u = nu;
            push(u);
        }
        (lo, hi)
    }

    /// Residuals of the three condition parts at every vertex.
    pub fn vertex_residuals(&self, problem: &SchrodingerProblem) -> Vec<[f64; 3]> {
        let g = problem.graph();
        (0..g.vertex_count())
            .map(|v| {
                let (f, fp) = self.trace.at_vertex(g, v);
                problem.condition(v).residuals(&f, &fp)
            })
            .collect()
    }
}

/// `∫_e f g` for two functions on edge `e` given by `(a, b)` coefficients.
fn edge_inner(problem: &SchrodingerProblem, e: usize, lambda: f64, f: (f64, f64), g: (f64, f64)) -> f64 {
    let edge = problem.graph().edge(e);
    let (mut u1, mut p1) = f;
    let (mut u2, mut p2) = g;
    let mut total = 0.0;
    for (len, q) in edge.potential.pieces(edge.length) {
        let mu = lambda - q;
        let (icc, ics, iss) = piece_integrals(len, mu);
        total += u1 * u2 * icc + (u1 * p2 + p1 * u2) * ics + p1 * p2 * iss;
        let t = piece_transfer_exact(len, mu);
        let n1 = t[(0, 0)] * u1 + t[(0, 1)] * p1;
        p1 = t[(1, 0)] * u1 + t[(1, 1)] * p1;
        u1 = n1;
        let n2 = t[(0, 0)] * u2 + t[(0, 1)] * p2;
        p2 = t[(1, 0)] * u2 + t[(1, 1)] * p2;
        u2 = n2;
    }
    total
}

/// `L²(Γ)` inner product of two coefficient vectors at the same `λ`.
fn inner(problem: &SchrodingerProblem, lambda: f64, f: &[(f64, f64)], g: &[(f64, f64)]) -> f64 {
    (0..f.len()).map(|e| edge_inner(problem, e, lambda, f[e], g[e])).sum()
}

/// Orthonormal eigenfunctions for `λ`; the multiplicity is the number of
/// singular values below the rank tolerance.
pub fn eigenfunctions(problem: &SchrodingerProblem, lambda: f64) -> Result<Vec<Eigenfunction>> {
    eigenfunctions_with_multiplicity(problem, lambda, None)
}

/// Orthonormal basis of the eigenspace of a computed spectral value.
pub fn eigenfunctions_of(problem: &SchrodingerProblem, value: &SpectralValue) -> Result<Vec<Eigenfunction>> {
    eigenfunctions_with_multiplicity(problem, value.value, Some(value.multiplicity))
}

fn eigenfunctions_with_multiplicity(
    problem: &SchrodingerProblem,
    lambda: f64,
    multiplicity: Option<usize>,
) -> Result<Vec<Eigenfunction>> {
    let model = SecularModel::new(problem);
    let (m, scale) = model.matrix(lambda);
    let (sv, v) = linalg::full_svd(&m);
    let n = m.ncols();
    let smax = sv.first().copied().unwrap_or(1.0);
    let tol = SECULAR_RANK_TOL * smax;
    let numerical = sv.iter().filter(|&&s| s < tol).count();
    let mult = match multiplicity {
        Some(k) => k.min(n),
        None => numerical,
    };
    if mult == 0 || sv[n - mult] >= tol {
        return Err(Error::NotEigenvalue { residual: sv[n - 1] });
    }
    let g = problem.graph();
    if model.pieces.iter().all(|p| nodal::edge_is_nodal(p, lambda)) {
        return nodal_eigenfunctions(&model, lambda, mult);
    }
    let mut funcs: Vec<Vec<(f64, f64)>> = (0..mult)
        .map(|i| {
            let y = v.column(n - 1 - i);
            (0..g.edge_count()).map(|e| (y[2 * e] * scale[2 * e], y[2 * e + 1] * scale[2 * e + 1])).collect()
        })
        .collect();
    // Gram–Schmidt in L²(Γ).
    for i in 0..mult {
        for j in 0..i {
            let proj = inner(problem, lambda, &funcs[i], &funcs[j]);
            let fj = funcs[j].clone();
            for (ci, cj) in funcs[i].iter_mut().zip(fj) {
                ci.0 -= proj * cj.0;
                ci.1 -= proj * cj.1;
            }
        }
        let norm = inner(problem, lambda, &funcs[i], &funcs[i]).sqrt();
        if !(norm > 0.0) {
            return Err(Error::Solver("degenerate eigenfunction basis".into()));
        }
        for c in funcs[i].iter_mut() {
            c.0 /= norm;
            c.1 /= norm;
        }
        let big = funcs[i].iter().fold(0.0f64, |m, c| m.max(c.0.abs()).max(c.1.abs()));
        let first = funcs[i]
            .iter()
            .flat_map(|c| [c.0, c.1])
            .find(|x| x.abs() > 1e-8 * big)
            .unwrap_or(1.0);
        if first < 0.0 {
            for c in funcs[i].iter_mut() {
                c.0 = -c.0;
                c.1 = -c.1;
            }
        }
    }
    Ok(funcs.into_iter().map(|c| Eigenfunction::from_coefficients(problem, lambda, c)).collect())
}

/// Eigenfunctions from the kernel of the Dirichlet-to-Neumann form, in nodal
/// representation.
fn nodal_eigenfunctions(model: &SecularModel, lambda: f64, mult: usize) -> Result<Vec<Eigenfunction>> {
    let problem = model.problem;
    let q = model.dtn_form(lambda);
    let (vals, vecs) = linalg::sym_eigen(&q);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()));
    if order.len() < mult {
        return Err(Error::Solver("boundary form smaller than the multiplicity".into()));
    }
    let edges = problem.graph().edges();
    let pieces: Vec<Vec<(f64, f64)>> = edges.iter().map(|e| e.potential.pieces(e.length)).collect();
    let nodes_of = |w: &crate::linalg::Vector| -> Vec<Vec<f64>> {
        let f = &model.free * w;
        (0..edges.len()).map(|e| nodal::edge_nodes(&pieces[e], lambda, f[2 * e], f[2 * e + 1])).collect()
    };
    let dot = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
        (0..edges.len()).map(|e| nodal::inner(&pieces[e], lambda, &a[e], &b[e])).sum()
    };
    let mut basis: Vec<crate::linalg::Vector> = order[..mult].iter().map(|&i| vecs.column(i).into_owned()).collect();
    let mut nodes: Vec<Vec<Vec<f64>>> = basis.iter().map(|w| nodes_of(w)).collect();
    for i in 0..mult {
        for j in 0..i {
            let proj = dot(&nodes[i], &nodes[j]);
            let wj = basis[j].clone();
            basis[i] -= wj * proj;
            nodes[i] = nodes_of(&basis[i]);
        }
        let norm = dot(&nodes[i], &nodes[i]).sqrt();
        if !(norm > 0.0) {
            return Err(Error::Solver("degenerate eigenfunction basis".into()));
        }
        let big = basis[i].amax();
        let first = basis[i].iter().copied().find(|x| x.abs() > 1e-8 * big).unwrap_or(1.0);
        let factor = if first < 0.0 { -1.0 / norm } else { 1.0 / norm };
        basis[i] *= factor;
        nodes[i] = nodes_of(&basis[i]);
    }
    Ok(nodes.into_iter().map(|n| Eigenfunction::from_nodes(problem, lambda, n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::Family;
    use crate::graph::Potential;
    use crate::problem::ProblemBuilder;
    use std::f64::consts::PI;

    fn interval(a: Family, b: Family, len: f64) -> SchrodingerProblem {
        ProblemBuilder::new().vertex("a", a).vertex("b", b).edge("e", "a", "b", len).build().unwrap()
    }

    fn edge(len: f64, q: Potential) -> Edge {
        Edge { id: "e".into(), origin: 0, terminus: 1, length: len, potential: q }
    }

    #[test]
    fn transfer_at_pi() {
        let fs = fundamental_system(&edge(1.0, Potential::zero()), PI * PI);
        assert!((fs.c() + 1.0).abs() < 1e-14);
        assert!(fs.s().abs() < 1e-15);
        assert!((fs.s_prime() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn transfer_at_zero() {
        let fs = fundamental_system(&edge(1.0, Potential::zero()), 0.0);
        assert_eq!(fs.matrix(), Matrix2::new(1.0, 1.0, 0.0, 1.0));
    }

    #[test]
    fn transfer_hyperbolic() {
        let fs = fundamental_system(&edge(1.0, Potential::constant(5.0)), 1.0);
        assert!((fs.c() - 2f64.cosh()).abs() < 1e-13);
        assert!((fs.s() - 2f64.sinh() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn transfer_large_hyperbolic_is_scaled() {
        let fs = fundamental_system(&edge(2.0, Potential::zero()), -1e6);
        assert!((fs.log_scale - 2000.0).abs() < 1e-9);
        assert!(fs.scaled.iter().all(|x| x.is_finite()));
        // c/s = κ coth(κL) and s'/s likewise
        assert!((fs.scaled[(0, 0)] / fs.scaled[(0, 1)] - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn dirichlet_count_matches_sines() {
        let pieces = vec![(1.0, 0.0)];
        assert_eq!(dirichlet_count(&pieces, 0.5 * PI * PI), 0);
        assert_eq!(dirichlet_count(&pieces, 1.5 * PI * PI), 1);
        assert_eq!(dirichlet_count(&pieces, 4.5 * PI * PI), 2);
        assert_eq!(dirichlet_count(&pieces, -3.0), 0);
        // the same edge split into pieces
        let split = vec![(0.3, 0.0), (0.4, 0.0), (0.3, 0.0)];
        for lam in [1.0, 12.0, 40.0, 90.0, 150.0] {
            assert_eq!(dirichlet_count(&split, lam), dirichlet_count(&pieces, lam));
        }
    }

    #[test]
    fn secular_value_neumann_interval() {
        let p = interval(Family::Neumann, Family::Neumann, 1.0);
        assert!(secular_value(&p, PI * PI) < 1e-10);
        assert!(secular_value(&p, 1.0) > 1e-3);
    }

    #[test]
    fn neumann_interval_spectrum() {
        let p = interval(Family::Neumann, Family::Neumann, 1.0);
        let s = first_eigenvalues(&p, 6).unwrap();
        for (k, lam) in s.iter().enumerate() {
            let exact = (k as f64 * PI).powi(2);
            assert!((lam - exact).abs() <= 1e-9 * exact.max(1e-3), "{k}: {lam} vs {exact}");
        }
    }

    #[test]
    fn robin_neumann_golden_value() {
        let p = interval(Family::Delta(1.0), Family::Neumann, 1.0);
        let s = first_eigenvalues(&p, 1).unwrap();
        assert!((s[0] - 0.74017).abs() < 5e-5);
    }

    #[test]
    fn long_hyperbolic_edge_eigenfunction() {
        // κL ≈ 24: the transfer over the edge is stored with a log scale
        let p = interval(Family::Delta(-8.0), Family::Neumann, 3.0);
        let lam = first_eigenvalues(&p, 1).unwrap()[0];
        assert!((lam + 64.0).abs() < 1e-6);
        let f = &eigenfunctions(&p, lam).unwrap()[0];
        assert!((f.edge_norm_sq(&p, 0) - 1.0).abs() < 1e-9);
        let (u, du) = f.eval(&p, 0, 3.0);
        let scale = f.trace.values[0].abs();
        assert!((u - f.trace.values[1]).abs() < 1e-9 * scale);
        assert!((du + f.trace.derivatives[1]).abs() < 1e-9 * scale * 8.0);
        let (lo, hi) = f.edge_extrema(&p, 0);
        assert!(lo * hi > 0.0);
        // exact ground state √(2κ) e^{−κx} up to sign
        assert!((hi.abs().max(lo.abs()) - 4.0).abs() < 1e-6);
    }

    #[test]
    fn piece_integral_series_matches_closed_form() {
        for &(len, mu) in &[(1.0, 1e-4), (0.7, -2e-3), (2.0, 0.001)] {
            let (_, _, ss) = piece_integrals(len, mu);
            let w: f64 = (mu as f64).abs().sqrt();
            let exact = if mu > 0.0 {
                len / (2.0 * mu) - (2.0 * w * len).sin() / (4.0 * mu * w)
            } else {
                (2.0 * w * len).sinh() / (4.0 * (-mu) * w) - len / (2.0 * (-mu))
            };
            assert!((ss - exact).abs() < 1e-9 * exact, "{ss} {exact}");
        }
    }
}


