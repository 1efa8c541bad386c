//! Dense linear-algebra helpers. Storage is nalgebra; the SVD and the
//! symmetric eigensolver are local.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// One-sided Jacobi SVD of a tall (or square) matrix.
///
/// Returns `(U·Σ, σ, V)` unsorted. Hestenes rotations keep the small singular
/// values accurate relative to the largest, which matters for null spaces and
/// for the secular determinant test near an eigenvalue.
fn jacobi_svd(m: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (r, c) = m.shape();
    let mut a = m.clone();
    let mut v = Mat::identity(c, c);
    debug_assert!(r >= c);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..r {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..r {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = cs * x - sn * y;
                    a[(i, q)] = sn * x + cs * y;
                }
                for i in 0..c {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = cs * x - sn * y;
                    v[(i, q)] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sv = (0..c).map(|j| a.column(j).norm()).collect();
    (a, sv, v)
}

fn pad_square(m: &Mat) -> Mat {
    let (r, c) = m.shape();
    if r >= c {
        return m.clone();
    }
    let mut p = Mat::zeros(c, c);
    p.view_mut((0, 0), (r, c)).copy_from(m);
    p
}

fn descending(sv: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    order
}

/// Singular values in descending order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Vec::new();
    }
    let k = r.min(c);
    let src = if r < c { m.transpose() } else { m.clone() };
    let (_, sv, _) = jacobi_svd(&src);
    let mut out: Vec<f64> = descending(&sv).into_iter().map(|i| sv[i]).collect();
    out.truncate(k);
    out
}

/// Singular values (descending) and the full right singular basis of `m`.
///
/// Wide matrices are padded with zero rows so that the returned `V` is square.
pub fn full_svd(m: &Mat) -> (Vec<f64>, Mat) {
    let c = m.ncols();
    if c == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let (_, sv, v) = jacobi_svd(&pad_square(m));
    let order = descending(&sv);
    let mut vs = Mat::zeros(c, c);
    for (k, &i) in order.iter().enumerate() {
        vs.set_column(k, &v.column(i));
    }
    (order.iter().map(|&i| sv[i]).collect(), vs)
}

/// Orthonormal basis of the null space; a singular value counts as zero below
/// `tol * max(1, sigma_max)`.
pub fn null_space(m: &Mat, tol: f64) -> Mat {
    let c = m.ncols();
    if m.nrows() == 0 {
        return Mat::identity(c, c);
    }
    let (sv, v) = full_svd(m);
    let scale = sv.first().copied().unwrap_or(0.0).max(1.0);
    let rank = sv.iter().filter(|&&s| s > tol * scale).count();
    v.columns(rank, c - rank).into_owned()
}

/// Orthonormal basis of the column space.
pub fn range_basis(m: &Mat, tol: f64) -> Mat {
    let (r, c) = m.shape();
    if c == 0 || r == 0 {
        return Mat::zeros(r, 0);
    }
    // Left singular vectors of m are right singular vectors of mᵀ.
    let (sv, v) = full_svd(&m.transpose());
    let scale = sv.first().copied().unwrap_or(0.0).max(1.0);
    let rank = sv.iter().filter(|&&s| s > tol * scale).count();
    v.columns(0, rank).into_owned()
}

pub fn projector(basis: &Mat) -> Mat {
    basis * basis.transpose()
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
///
/// On return `z` holds the accumulated orthogonal transform, `d` the diagonal
/// and `e[1..]` the subdiagonal (EISPACK `tred2` layout).
fn tridiagonalize(z: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| z[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = z[(i, l)];
            } else {
                for k in 0..=l {
                    z[(i, k)] /= scale;
                    h += z[(i, k)] * z[(i, k)];
                }
                let f = z[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    z[(j, i)] = z[(i, j)] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[(j, k)] * z[(i, k)];
                    }
                    for k in j + 1..=l {
                        g += z[(k, j)] * z[(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * z[(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = z[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[(j, k)] -= f * e[k] + g * z[(i, k)];
                    }
                }
            }
        } else {
            e[i] = z[(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[(i, k)] * z[(k, j)];
                }
                for k in 0..i {
                    z[(k, j)] -= g * z[(k, i)];
                }
            }
        }
        d[i] = z[(i, i)];
        z[(i, i)] = 1.0;
        for j in 0..i {
            z[(j, i)] = 0.0;
            z[(i, j)] = 0.0;
        }
    }
}

/// Implicit QL with Wilkinson shifts on the tridiagonal from [`tridiagonalize`].
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut Mat) -> bool {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    if n > 0 {
        e[n - 1] = 0.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return false;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..z.nrows() {
                    let f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    true
}

/// Symmetric eigen-decomposition with ascending eigenvalues.
///
/// Householder tridiagonalisation followed by implicit QL; the input is
/// symmetrised first.
pub fn sym_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let mut z = (m + m.transpose()) * 0.5;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, &mut d, &mut e);
    let ok = tridiagonal_ql(&mut d, &mut e, &mut z);
    debug_assert!(ok, "QL iteration did not converge");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &z.column(i));
    }
    (vals, vecs)
}

/// Number of strictly negative eigenvalues of a symmetric matrix.
pub fn negative_index(m: &Mat) -> usize {
    sym_eigen(m).0.iter().filter(|&&x| x < 0.0).count()
}

/// Largest principal angle between two subspaces given by spanning columns.
///
/// Computed from sines (`‖(I − QQᵀ)P‖`), which stays accurate for tiny angles.
/// Returns `π/2` when the dimensions differ.
pub fn max_principal_angle(a: &Mat, b: &Mat, tol: f64) -> f64 {
    let qa = range_basis(a, tol);
    let qb = range_basis(b, tol);
    if qa.ncols() != qb.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let resid = &qb - &qa * (qa.transpose() * &qb);
    let s = singular_values(&resid).first().copied().unwrap_or(0.0);
    s.min(1.0).asin()
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = Mat::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let n = null_space(&m, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-14);
        assert!((n.transpose() * &n - Mat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn principal_angle_small() {
        let a = Mat::from_column_slice(2, 1, &[1.0, 0.0]);
        let t = 1e-11f64;
        let b = Mat::from_column_slice(2, 1, &[t.cos(), t.sin()]);
        let ang = max_principal_angle(&a, &b, 1e-12);
        assert!((ang - t).abs() < 1e-20);
    }

    #[test]
    fn eigen_nearly_diagonal_tiny_entries() {
        let m = Mat::from_row_slice(
            3,
            3,
            &[3.3e-32, 0.0, 4.2e-16, 0.0, -7.8e-30, 5.04e-15, 4.2e-16, 5.04e-15, -7.5],
        );
        let (vals, vecs) = sym_eigen(&m);
        let resid = &m * &vecs - &vecs * Mat::from_diagonal(&Vector::from_vec(vals.clone()));
        assert!(resid.norm() < 1e-14, "{}", resid.norm());
        assert!((vals[0] + 7.5).abs() < 1e-14);
        assert!((vecs.transpose() * &vecs - Mat::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn eigen_random_symmetric() {
        let n = 37;
        let m = Mat::from_fn(n, n, |i, j| (((i * 7 + j * 13) % 11) as f64 - 5.0) + if i == j { 0.5 * i as f64 } else { 0.0 });
        let m = &m + m.transpose();
        let (vals, vecs) = sym_eigen(&m);
        let resid = &m * &vecs - &vecs * Mat::from_diagonal(&Vector::from_vec(vals.clone()));
        assert!(resid.norm() < 1e-11 * m.norm());
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn svd_matches_reconstruction() {
        let m = Mat::from_fn(5, 3, |i, j| 1.0 / (i + j + 1) as f64);
        let (sv, v) = full_svd(&m);
        let us = &m * &v;
        for (k, s) in sv.iter().enumerate() {
            assert!((us.column(k).norm() - s).abs() < 1e-13);
        }
        let r = range_basis(&m, 1e-12);
        assert_eq!(r.ncols(), 3);
        assert!((&r * r.transpose() * &m - &m).norm() < 1e-13);
    }

    #[test]
    fn negative_index_counts() {
        let m = Mat::from_diagonal(&Vector::from_vec(vec![-1.0, 2.0, -3.0]));
        assert_eq!(negative_index(&m), 2);
    }
}
