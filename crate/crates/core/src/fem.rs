//! Piecewise-linear Galerkin discretization of the quadratic form
//! `h(f) = ∫|f'|² + ∫q|f|² + Σ_v ⟨Λ_v P_R F(v), P_R F(v)⟩` on `{P_D F(v) = 0}`.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::graph::End;
use crate::linalg::{self, Mat};
use crate::problem::SchrodingerProblem;
use crate::secular::{Backend, SpectralValue, Spectrum};

/// Assembled pencil `(A, B)` in constrained coordinates.
#[derive(Debug, Clone)]
pub struct FormDiscretization {
    pub a: Mat,
    pub b: Mat,
    /// Intervals per edge.
    pub intervals: Vec<usize>,
    /// For every full nodal index, the reduced coordinates it depends on.
    map: Vec<Vec<(usize, f64)>>,
    offsets: Vec<usize>,
}

impl FormDiscretization {
    pub fn reduced_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn full_dim(&self) -> usize {
        self.map.len()
    }

    /// Full nodal vector (all edges, endpoints included) of a reduced vector.
    pub fn expand(&self, y: &[f64]) -> Vec<f64> {
        self.map.iter().map(|deps| deps.iter().map(|&(r, c)| c * y[r]).sum()).collect()
    }

    /// Nodal index of node `i` on edge `e`.
    pub fn node(&self, e: usize, i: usize) -> usize {
        self.offsets[e] + i
    }

    /// Boundary value at a flattened endpoint slot from a full nodal vector.
    pub fn slot_value(&self, full: &[f64], e: usize, end: End) -> f64 {
        match end {
            End::Origin => full[self.node(e, 0)],
            End::Terminus => full[self.node(e, self.intervals[e])],
        }
    }
}

/// Intervals per edge for a target mesh width.
pub fn mesh_counts(problem: &SchrodingerProblem, h_target: f64) -> Result<Vec<usize>> {
    if !(h_target > 0.0 && h_target.is_finite()) {
        return Err(Error::Input("mesh width must be positive".into()));
    }
    Ok(problem
        .graph()
        .edges()
        .iter()
        .map(|e| ((e.length / h_target).ceil() as usize).max(2))
        .collect())
}

pub fn assemble(problem: &SchrodingerProblem, h_target: f64) -> Result<FormDiscretization> {
    assemble_with_counts(problem, &mesh_counts(problem, h_target)?)
}

pub fn assemble_with_counts(problem: &SchrodingerProblem, intervals: &[usize]) -> Result<FormDiscretization> {
    let g = problem.graph();
    if intervals.len() != g.edge_count() {
        return Err(Error::Input("one interval count per edge required".into()));
    }
    if intervals.iter().any(|&n| n < 2) {
        return Err(Error::Input("mesh too coarse: each edge needs at least 2 intervals".into()));
    }
    let mut offsets = Vec::with_capacity(intervals.len());
    let mut full = 0;
    for &n in intervals {
        offsets.push(full);
        full += n + 1;
    }
    let mut map: Vec<Vec<(usize, f64)>> = vec![Vec::new(); full];
    let mut next = 0;
    for (e, &n) in intervals.iter().enumerate() {
        for i in 1..n {
            map[offsets[e] + i] = vec![(next, 1.0)];
            next += 1;
        }
    }
    let mut robin_blocks = Vec::new();
    for v in 0..g.vertex_count() {
        let cond = problem.condition(v);
        let w = linalg::range_basis(&(&cond.pn + &cond.pr), 1e-6);
        let base = next;
        next += w.ncols();
        for (j, inc) in g.incidence(v).iter().enumerate() {
            let node = match inc.end {
                End::Origin => offsets[inc.edge],
                End::Terminus => offsets[inc.edge] + intervals[inc.edge],
            };
            map[node] = (0..w.ncols()).map(|m| (base + m, w[(j, m)])).filter(|&(_, c)| c != 0.0).collect();
        }
        let block = w.transpose() * &cond.lambda * &w;
        robin_blocks.push((base, block));
    }
    let n_red = next;
    let mut a = Mat::zeros(n_red, n_red);
    let mut b = Mat::zeros(n_red, n_red);
    for (e, edge) in g.edges().iter().enumerate() {
        let n = intervals[e];
        let h = edge.length / n as f64;
        let segments = edge.potential.segments(edge.length);
        for i in 0..n {
            let x0 = i as f64 * h;
            let x1 = if i + 1 == n { edge.length } else { (i + 1) as f64 * h };
            let hh = x1 - x0;
            let mut ka = [[1.0 / hh, -1.0 / hh], [-1.0 / hh, 1.0 / hh]];
            let mb = [[hh / 3.0, hh / 6.0], [hh / 6.0, hh / 3.0]];
            for &(s0, s1, q) in &segments {
                let lo = s0.max(x0);
                let hi = s1.min(x1);
                if hi <= lo || q == 0.0 {
                    continue;
                }
                let us = (lo - x0) / hh;
                let ut = (hi - x0) / hh;
                let m00 = hh * ((1.0 - us).powi(3) - (1.0 - ut).powi(3)) / 3.0;
                let m11 = hh * (ut.powi(3) - us.powi(3)) / 3.0;
                let prim = |u: f64| u * u / 2.0 - u * u * u / 3.0;
                let m01 = hh * (prim(ut) - prim(us));
                ka[0][0] += q * m00;
                ka[1][1] += q * m11;
                ka[0][1] += q * m01;
                ka[1][0] += q * m01;
            }
            let nodes = [offsets[e] + i, offsets[e] + i + 1];
            for (la, &na) in nodes.iter().enumerate() {
                for (lb, &nb) in nodes.iter().enumerate() {
                    for &(ra, ca) in &map[na] {
                        for &(rb, cb) in &map[nb] {
                            a[(ra, rb)] += ca * cb * ka[la][lb];
                            b[(ra, rb)] += ca * cb * mb[la][lb];
                        }
                    }
                }
            }
        }
    }
    for (base, block) in robin_blocks {
        let m = block.nrows();
        for i in 0..m {
            for j in 0..m {
                a[(base + i, base + j)] += block[(i, j)];
            }
        }
    }
    Ok(FormDiscretization { a, b, intervals: intervals.to_vec(), map, offsets })
}

/// Generalized eigenpairs of the pencil in ascending order; eigenvectors are
/// `B`-orthonormal columns in reduced coordinates.
pub fn solve_pencil(d: &FormDiscretization) -> Result<(Vec<f64>, Mat)> {
    let chol = Cholesky::new(d.b.clone()).ok_or_else(|| Error::Solver("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&d.a)
        .ok_or_else(|| Error::Solver("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Solver("triangular solve failed".into()))?;
    let (vals, z) = linalg::sym_eigen(&c);
    let y = l
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::Solver("back substitution failed".into()))?;
    Ok((vals, y))
}

/// First `k` discrete eigenvalues (Rayleigh–Ritz upper bounds).
pub fn eigenvalues_fem(problem: &SchrodingerProblem, k: usize, h_target: f64) -> Result<Spectrum> {
    let d = assemble(problem, h_target)?;
    eigenvalues_fem_of(&d, k)
}

pub fn eigenvalues_fem_of(d: &FormDiscretization, k: usize) -> Result<Spectrum> {
    if k == 0 {
        return Err(Error::Input("k must be at least 1".into()));
    }
    if k > d.reduced_dim() {
        return Err(Error::Input(format!("k = {k} exceeds the discrete dimension {}", d.reduced_dim())));
    }
    let (vals, vecs) = solve_pencil(d)?;
    let mut out: Vec<SpectralValue> = Vec::new();
    for (i, &lam) in vals.iter().take(k).enumerate() {
        let y = vecs.column(i);
        let r = (&d.a * y - &d.b * y * lam).norm() / (&d.b * y).norm().max(f64::MIN_POSITIVE);
        let resid = r / (1.0 + lam.abs());
        match out.last_mut() {
            Some(last) if (lam - last.value).abs() <= 1e-8 * (1.0 + lam.abs()) => {
                last.multiplicity += 1;
                last.residual = last.residual.max(resid);
            }
            _ => out.push(SpectralValue { value: lam, multiplicity: 1, residual: resid }),
        }
    }
    let window = (vals[0], vals[k - 1]);
    Ok(Spectrum { values: out, window, backend: Backend::Fem })
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub values: Vec<f64>,
    /// Observed order per eigenvalue from this and the two coarser levels.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// `(level, index)` pairs where refinement increased an eigenvalue.
    pub non_monotone: Vec<(usize, usize)>,
    /// `(level, index)` pairs with observed order below 1.5.
    pub low_order: Vec<(usize, usize)>,
}

impl ConvergenceTable {
    /// Observed order of eigenvalue `index` (zero-based) at the finest level.
    pub fn final_order(&self, index: usize) -> Option<f64> {
        self.rows.last().and_then(|r| r.orders[index])
    }
}

/// Refine by halving every edge mesh `levels` times, starting from `h0`.
pub fn convergence_study(problem: &SchrodingerProblem, k: usize, h0: f64, levels: usize) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::Input("a convergence study needs at least 3 levels".into()));
    }
    let base = mesh_counts(problem, h0)?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut non_monotone = Vec::new();
    let mut low_order = Vec::new();
    for level in 0..levels {
        let counts: Vec<usize> = base.iter().map(|n| n << level).collect();
        let d = assemble_with_counts(problem, &counts)?;
        let values = eigenvalues_fem_of(&d, k)?.first(k);
        let mut orders = vec![None; k];
        if level >= 2 {
            for j in 0..k {
                let a = rows[level - 2].values[j];
                let b = rows[level - 1].values[j];
                let c = values[j];
                let d1 = a - b;
                let d2 = b - c;
                let floor = 1e-12 * (1.0 + c.abs());
                if d1.abs() > floor && d2.abs() > floor {
                    let p = (d1 / d2).abs().log2();
                    if p < 1.5 {
                        low_order.push((level, j));
                    }
                    orders[j] = Some(p);
                }
            }
        }
        if level >= 1 {
            for j in 0..k {
                let prev = rows[level - 1].values[j];
                if values[j] > prev + 1e-12 * (1.0 + prev.abs()) {
                    non_monotone.push((level, j));
                }
            }
        }
        rows.push(ConvergenceRow { h: h0 / (1u64 << level) as f64, values, orders });
    }
    Ok(ConvergenceTable { rows, non_monotone, low_order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::Family;
    use crate::problem::ProblemBuilder;
    use std::f64::consts::PI;

    #[test]
    fn two_element_interval_matrices() {
        let p = ProblemBuilder::new()
            .vertex("a", Family::Neumann)
            .vertex("b", Family::Neumann)
            .edge("e", "a", "b", 1.0)
            .build()
            .unwrap();
        let d = assemble_with_counts(&p, &[2]).unwrap();
        assert_eq!(d.reduced_dim(), 3);
        // reduced order: interior node, then vertex a, then vertex b
        let stiff = [[4.0, -2.0, -2.0], [-2.0, 2.0, 0.0], [-2.0, 0.0, 2.0]];
        let mass = [[1.0 / 3.0, 1.0 / 12.0, 1.0 / 12.0], [1.0 / 12.0, 1.0 / 6.0, 0.0], [1.0 / 12.0, 0.0, 1.0 / 6.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((d.a[(i, j)] - stiff[i][j]).abs() < 1e-14);
                assert!((d.b[(i, j)] - mass[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn neumann_interval_fem() {
        let p = ProblemBuilder::new()
            .vertex("a", Family::Neumann)
            .vertex("b", Family::Neumann)
            .edge("e", "a", "b", 1.0)
            .build()
            .unwrap();
        let s = eigenvalues_fem(&p, 3, 1.0 / 64.0).unwrap().first(3);
        assert!(s[0].abs() < 1e-10);
        assert!((s[1] - PI * PI).abs() < 1e-3 * PI * PI);
        assert!((s[2] - 4.0 * PI * PI).abs() < 1e-3 * 4.0 * PI * PI);
    }

    #[test]
    fn potential_integrals_exact_for_constant() {
        // constant q shifts every eigenvalue exactly in the discrete problem too
        let base = ProblemBuilder::new()
            .vertex("a", Family::Neumann)
            .vertex("b", Family::Neumann)
            .edge("e", "a", "b", 1.0)
            .build()
            .unwrap();
        let shifted = ProblemBuilder::new()
            .vertex("a", Family::Neumann)
            .vertex("b", Family::Neumann)
            .edge_spec(crate::graph::EdgeSpec::new("e", "a", "b", 1.0).with_potential(crate::graph::Potential::piecewise(vec![0.31], vec![2.0, 2.0])))
            .build()
            .unwrap();
        let s0 = eigenvalues_fem(&base, 4, 0.1).unwrap().first(4);
        let s1 = eigenvalues_fem(&shifted, 4, 0.1).unwrap().first(4);
        for (a, b) in s0.iter().zip(&s1) {
            assert!((b - a - 2.0).abs() < 1e-10);
        }
    }
}
