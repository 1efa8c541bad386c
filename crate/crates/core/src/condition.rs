//! Self-adjoint vertex conditions in projection form
//! `P_D F = 0`, `P_N F' = 0`, `P_R F' = Λ P_R F`.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Tolerance for projection identities.
pub const PROJ_TOL: f64 = 1e-12;
/// Tolerance for ranks, Lagrangian checks and kernel detection.
pub const RANK_TOL: f64 = 1e-10;

/// The named condition families. Continuity-Kirchhoff is `Delta(0.0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Delta(f64),
    /// Nonzero strength only; zero strength is `AntiKirchhoff`.
    DeltaPrime(f64),
    AntiKirchhoff,
    Dirichlet,
    Neumann,
    Custom,
}

impl Family {
    pub fn kirchhoff() -> Self {
        Family::Delta(0.0)
    }

    /// Strength of a δ condition, if this is one.
    pub fn delta_strength(&self) -> Option<f64> {
        match *self {
            Family::Delta(a) => Some(a),
            _ => None,
        }
    }

    /// Strength of a δ′-type condition, anti-Kirchhoff counting as `β = 0`.
    pub fn deltaprime_strength(&self) -> Option<f64> {
        match *self {
            Family::DeltaPrime(b) => Some(b),
            Family::AntiKirchhoff => Some(0.0),
            _ => None,
        }
    }

    /// δ′ family member for any real strength (zero gives anti-Kirchhoff).
    pub fn deltaprime_or_anti(beta: f64) -> Self {
        if beta == 0.0 {
            Family::AntiKirchhoff
        } else {
            Family::DeltaPrime(beta)
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Delta(a) if *a == 0.0 => "kirchhoff",
            Family::Delta(_) => "delta",
            Family::DeltaPrime(_) => "deltaprime",
            Family::AntiKirchhoff => "antikirchhoff",
            Family::Dirichlet => "dirichlet",
            Family::Neumann => "neumann",
            Family::Custom => "custom",
        }
    }
}

/// Kind selector for [`make_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Delta,
    DeltaPrime,
    Kirchhoff,
    AntiKirchhoff,
    Dirichlet,
    Neumann,
}

/// A vertex condition of degree `d`. Row/column `i` refers to the `i`-th entry of
/// the vertex incidence list.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCondition {
    pub degree: usize,
    pub pd: Mat,
    pub pn: Mat,
    pub pr: Mat,
    /// Symmetric, vanishing on the complement of `ran P_R`.
    pub lambda: Mat,
    pub family: Family,
}

fn ones_projector(d: usize) -> Mat {
    Mat::from_element(d, d, 1.0 / d as f64)
}

fn ones_complement(d: usize) -> Mat {
    Mat::identity(d, d) - ones_projector(d)
}

/// Build a named condition family at degree `d`.
pub fn make_condition(kind: Kind, d: usize, strength: Option<f64>) -> Result<VertexCondition> {
    let family = match kind {
        Kind::Delta => Family::Delta(strength.unwrap_or(0.0)),
        Kind::Kirchhoff => Family::Delta(0.0),
        Kind::DeltaPrime => {
            let b = strength.ok_or_else(|| Error::Condition("deltaprime needs a strength".into()))?;
            if b == 0.0 {
                return Err(Error::Condition("deltaprime strength must be nonzero; use antikirchhoff".into()));
            }
            Family::DeltaPrime(b)
        }
        Kind::AntiKirchhoff => Family::AntiKirchhoff,
        Kind::Dirichlet => Family::Dirichlet,
        Kind::Neumann => Family::Neumann,
    };
    from_family(family, d)
}

/// Matrices of a family at degree `d`.
pub fn from_family(family: Family, d: usize) -> Result<VertexCondition> {
    if d == 0 {
        return Err(Error::Condition("degree must be at least 1".into()));
    }
    let zero = Mat::zeros(d, d);
    let id = Mat::identity(d, d);
    let (pd, pn, pr, lambda) = match family {
        Family::Delta(a) if a == 0.0 => (ones_complement(d), ones_projector(d), zero.clone(), zero),
        Family::Delta(a) => {
            if !a.is_finite() {
                return Err(Error::Condition("delta strength must be finite".into()));
            }
            let p = ones_projector(d);
            (ones_complement(d), zero.clone(), p.clone(), p * (a / d as f64))
        }
        Family::DeltaPrime(b) => {
            if b == 0.0 || !b.is_finite() {
                return Err(Error::Condition("deltaprime strength must be finite and nonzero".into()));
            }
            let p = ones_projector(d);
            (zero.clone(), ones_complement(d), p.clone(), p * (d as f64 / b))
        }
        Family::AntiKirchhoff => (ones_projector(d), ones_complement(d), zero.clone(), zero),
        Family::Dirichlet => (id, zero.clone(), zero.clone(), zero),
        Family::Neumann => (zero.clone(), id, zero.clone(), zero),
        Family::Custom => return Err(Error::Condition("custom conditions carry explicit matrices".into())),
    };
    Ok(VertexCondition { degree: d, pd, pn, pr, lambda, family })
}

impl VertexCondition {
    /// A validated condition from explicit matrices.
    pub fn custom(pd: Mat, pn: Mat, pr: Mat, lambda: Mat) -> Result<Self> {
        let d = pd.nrows();
        let c = VertexCondition { degree: d, pd, pn, pr, lambda, family: Family::Custom };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.degree;
        if d == 0 {
            return Err(Error::Condition("degree must be at least 1".into()));
        }
        for (name, m) in [("PD", &self.pd), ("PN", &self.pn), ("PR", &self.pr), ("Lambda", &self.lambda)] {
            if m.shape() != (d, d) {
                return Err(Error::Condition(format!("{name} must be {d}x{d}")));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Condition(format!("{name} has non-finite entries")));
            }
        }
        for (name, p) in [("PD", &self.pd), ("PN", &self.pn), ("PR", &self.pr)] {
            if linalg::max_abs(&(p * p - p)) > PROJ_TOL || linalg::max_abs(&(p - p.transpose())) > PROJ_TOL {
                return Err(Error::Condition(format!("{name} is not an orthogonal projection")));
            }
        }
        let sum = &self.pd + &self.pn + &self.pr - Mat::identity(d, d);
        if linalg::max_abs(&sum) > PROJ_TOL {
            return Err(Error::Condition("projections do not sum to the identity".into()));
        }
        for (a, b) in [(&self.pd, &self.pn), (&self.pd, &self.pr), (&self.pn, &self.pr)] {
            if linalg::max_abs(&(a * b)) > PROJ_TOL {
                return Err(Error::Condition("projections are not mutually orthogonal".into()));
            }
        }
        let l = &self.lambda;
        let scale = linalg::max_abs(l).max(1.0);
        if linalg::max_abs(&(l - l.transpose())) > PROJ_TOL * scale {
            return Err(Error::Condition("Lambda is not symmetric".into()));
        }
        if linalg::max_abs(&(l - &self.pr * l * &self.pr)) > PROJ_TOL * scale {
            return Err(Error::Condition("Lambda does not act within ran P_R".into()));
        }
        let basis = linalg::range_basis(&self.pr, 1e-6);
        if basis.ncols() > 0 {
            let restricted = basis.transpose() * l * &basis;
            let smin = linalg::singular_values(&restricted).last().copied().unwrap_or(0.0);
            if smin <= PROJ_TOL {
                return Err(Error::Condition("Lambda is singular on ran P_R".into()));
            }
        }
        Ok(())
    }

    /// Rows `[A | B]` (each `d × d`) with `A F + B F' = 0` equivalent to the condition.
    pub fn rows(&self) -> (Mat, Mat) {
        (&self.pd - &self.lambda, &self.pn + &self.pr)
    }

    /// Spanning columns `(F; F')` of the admissible boundary-pair subspace.
    pub fn admissible_subspace(&self) -> Mat {
        let d = self.degree;
        let r = linalg::range_basis(&self.pr, 1e-6);
        let n = linalg::range_basis(&self.pn, 1e-6);
        let dd = linalg::range_basis(&self.pd, 1e-6);
        let mut s = Mat::zeros(2 * d, r.ncols() + n.ncols() + dd.ncols());
        let mut col = 0;
        for i in 0..r.ncols() {
            let f = r.column(i).into_owned();
            let fp = &self.lambda * &f;
            s.view_mut((0, col), (d, 1)).copy_from(&f);
            s.view_mut((d, col), (d, 1)).copy_from(&fp);
            col += 1;
        }
        for i in 0..n.ncols() {
            s.view_mut((0, col), (d, 1)).copy_from(&n.column(i));
            col += 1;
        }
        for i in 0..dd.ncols() {
            s.view_mut((d, col), (d, 1)).copy_from(&dd.column(i));
            col += 1;
        }
        s
    }

    /// Vertex term `⟨Λ P_R F, P_R F⟩` of the quadratic form.
    pub fn form_term(&self, f: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(f);
        (v.transpose() * &self.lambda * &v)[(0, 0)]
    }

    /// Rebuild the same family at another degree.
    pub fn with_degree(&self, d: usize) -> Result<Self> {
        if d == self.degree {
            return Ok(self.clone());
        }
        match self.family {
            Family::Custom => Err(Error::Condition(
                "custom conditions cannot be rebuilt at a different degree".into(),
            )),
            f => from_family(f, d),
        }
    }

    /// Condition after scaling all edges by `t` (`Λ → Λ/t`).
    pub fn scaled(&self, t: f64) -> Self {
        let family = match self.family {
            Family::Delta(a) => Family::Delta(a / t),
            Family::DeltaPrime(b) => Family::DeltaPrime(b * t),
            f => f,
        };
        VertexCondition { lambda: &self.lambda / t, family, ..self.clone() }
    }

    /// Same projections with a replaced Robin operator.
    pub fn with_lambda(&self, lambda: Mat) -> Result<Self> {
        let c = VertexCondition { lambda, family: Family::Custom, ..self.clone() };
        c.validate()?;
        Ok(c.recognized())
    }

    /// Residual of boundary data `(F, F')` against the three condition parts.
    pub fn residuals(&self, f: &[f64], fp: &[f64]) -> [f64; 3] {
        let f = nalgebra::DVector::from_column_slice(f);
        let fp = nalgebra::DVector::from_column_slice(fp);
        [
            (&self.pd * &f).norm(),
            (&self.pn * &fp).norm(),
            (&self.pr * &fp - &self.lambda * &f).norm(),
        ]
    }

    /// Tag the condition with a named family when its matrices match one.
    pub fn recognized(mut self) -> Self {
        if self.family != Family::Custom {
            return self;
        }
        let d = self.degree;
        let tr = self.lambda.trace();
        let mut candidates = vec![
            Family::Dirichlet,
            Family::Neumann,
            Family::Delta(0.0),
            Family::AntiKirchhoff,
            Family::Delta(d as f64 * tr),
        ];
        if tr != 0.0 {
            candidates.push(Family::DeltaPrime(d as f64 / tr));
        }
        for f in candidates {
            if let Ok(c) = from_family(f, d) {
                let scale = linalg::max_abs(&self.lambda).max(1.0);
                let close = |a: &Mat, b: &Mat, s: f64| linalg::max_abs(&(a - b)) < 1e-9 * s;
                if close(&c.pd, &self.pd, 1.0)
                    && close(&c.pn, &self.pn, 1.0)
                    && close(&c.pr, &self.pr, 1.0)
                    && close(&c.lambda, &self.lambda, scale)
                {
                    self.family = f;
                    return self;
                }
            }
        }
        self
    }
}

/// Convert a Lagrangian subspace of boundary pairs (columns `(F; F')`, length
/// `2d`) into projection form.
pub fn condition_from_subspace(s: &Mat) -> Result<VertexCondition> {
    let two_d = s.nrows();
    if two_d % 2 != 0 || two_d == 0 {
        return Err(Error::Condition("subspace rows must be 2d".into()));
    }
    let d = two_d / 2;
    let q = linalg::range_basis(s, RANK_TOL);
    if q.ncols() != d {
        return Err(Error::Condition(format!("subspace has dimension {} but degree is {d}", q.ncols())));
    }
    let x = q.rows(0, d).into_owned();
    let y = q.rows(d, d).into_owned();
    let omega = x.transpose() * &y - y.transpose() * &x;
    if linalg::max_abs(&omega) > RANK_TOL {
        return Err(Error::Condition(format!(
            "subspace is not Lagrangian (defect {:.3e})",
            linalg::max_abs(&omega)
        )));
    }
    let u = linalg::range_basis(&x, RANK_TOL);
    let r = u.ncols();
    let id = Mat::identity(d, d);
    let proj_f = linalg::projector(&u);
    let pd = &id - &proj_f;
    if r == 0 {
        let zero = Mat::zeros(d, d);
        return Ok(VertexCondition { degree: d, pd, pn: zero.clone(), pr: zero.clone(), lambda: zero, family: Family::Custom }
            .symmetrized()
            .recognized());
    }
    let xc = u.transpose() * &x;
    let yc = u.transpose() * &y;
    let gram = &xc * xc.transpose();
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Condition("degenerate value projection".into()))?;
    let lam_c = &yc * xc.transpose() * gram_inv;
    let asym = linalg::max_abs(&(&lam_c - lam_c.transpose()));
    if asym > RANK_TOL * linalg::max_abs(&lam_c).max(1.0) {
        return Err(Error::Condition(format!("induced Robin map is not symmetric ({asym:.3e})")));
    }
    let (mu, w) = linalg::sym_eigen(&lam_c);
    let scale = mu.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut pn = Mat::zeros(d, d);
    let mut lambda = Mat::zeros(d, d);
    for (i, &m) in mu.iter().enumerate() {
        let col = &u * w.column(i);
        let outer = &col * col.transpose();
        if m.abs() <= RANK_TOL * scale {
            pn += outer;
        } else {
            lambda += outer * m;
        }
    }
    let pr = &proj_f - &pn;
    Ok(VertexCondition { degree: d, pd, pn, pr, lambda, family: Family::Custom }.symmetrized().recognized())
}

impl VertexCondition {
    fn symmetrized(mut self) -> Self {
        for m in [&mut self.pd, &mut self.pn, &mut self.pr, &mut self.lambda] {
            *m = (&*m + m.transpose()) * 0.5;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_families() -> Vec<Family> {
        vec![
            Family::Delta(0.0),
            Family::Delta(1.3),
            Family::Delta(-0.7),
            Family::DeltaPrime(2.0),
            Family::DeltaPrime(-0.4),
            Family::AntiKirchhoff,
            Family::Dirichlet,
            Family::Neumann,
        ]
    }

    #[test]
    fn families_satisfy_invariants() {
        for f in all_families() {
            for d in 1..=4 {
                from_family(f, d).unwrap().validate().unwrap();
            }
        }
    }

    #[test]
    fn delta_zero_is_kirchhoff() {
        let a = make_condition(Kind::Delta, 2, Some(0.0)).unwrap();
        let b = make_condition(Kind::Kirchhoff, 2, None).unwrap();
        assert_eq!(a.pd, b.pd);
        assert_eq!(a.pn, b.pn);
        assert_eq!(a.pr, b.pr);
        assert_eq!(a.lambda, b.lambda);
        let q2 = Mat::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!(linalg::max_abs(&(&a.pd - q2)) < 1e-15);
    }

    #[test]
    fn deltaprime_lambda() {
        let c = make_condition(Kind::DeltaPrime, 3, Some(2.0)).unwrap();
        let ones = nalgebra::DVector::from_element(3, 1.0);
        let image = &c.lambda * &ones;
        assert!((image - ones * 1.5).norm() < 1e-14);
        assert!(make_condition(Kind::DeltaPrime, 3, Some(0.0)).is_err());
        assert!(make_condition(Kind::Delta, 0, Some(1.0)).is_err());
    }

    #[test]
    fn degree_one_delta_is_robin() {
        let c = make_condition(Kind::Delta, 1, Some(0.8)).unwrap();
        assert_eq!(c.pr[(0, 0)], 1.0);
        assert!((c.lambda[(0, 0)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_from_subspace() {
        let s = Mat::from_column_slice(2, 1, &[0.0, 1.0]);
        let c = condition_from_subspace(&s).unwrap();
        assert_eq!(c.family, Family::Dirichlet);
        assert!((c.pd[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn delta_subspace_round_trip() {
        // S = {((a,a),(p,q)) : p + q = alpha a}
        let alpha = 0.9;
        let s = Mat::from_column_slice(4, 2, &[1.0, 1.0, alpha, 0.0, 0.0, 0.0, 1.0, -1.0]);
        let c = condition_from_subspace(&s).unwrap();
        let reference = make_condition(Kind::Delta, 2, Some(alpha)).unwrap();
        assert!(linalg::max_abs(&(&c.lambda - &reference.lambda)) < 1e-12);
        assert!(matches!(c.family, Family::Delta(a) if (a - alpha).abs() < 1e-12));
    }

    #[test]
    fn round_trip_all_families() {
        for f in all_families() {
            for d in 1..=4 {
                let c = from_family(f, d).unwrap();
                let s = c.admissible_subspace();
                let back = condition_from_subspace(&s).unwrap();
                back.validate().unwrap();
                let ang = linalg::max_principal_angle(&s, &back.admissible_subspace(), RANK_TOL);
                assert!(ang < 1e-9, "{f:?} d={d} angle {ang}");
            }
        }
    }

    #[test]
    fn rejects_non_lagrangian() {
        let s = Mat::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(condition_from_subspace(&s).is_err());
        let wrong_dim = Mat::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
        assert!(condition_from_subspace(&wrong_dim).is_err());
    }

    #[test]
    fn rows_encode_condition() {
        for f in all_families() {
            let c = from_family(f, 3).unwrap();
            let (a, b) = c.rows();
            let s = c.admissible_subspace();
            let mut ab = Mat::zeros(3, 6);
            ab.view_mut((0, 0), (3, 3)).copy_from(&a);
            ab.view_mut((0, 3), (3, 3)).copy_from(&b);
            assert!((&ab * &s).norm() < 1e-12);
            assert_eq!(linalg::range_basis(&ab, 1e-10).ncols(), 3);
        }
    }
}
