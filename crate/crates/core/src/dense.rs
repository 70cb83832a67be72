//! Dense kernels for small factors: thin SVD, symmetric eigendecomposition
//! and projection onto the orthogonal complement of a basis.
//!
//! All routines accept zero-sized dimensions and return empty factors for them.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, Matrix};

/// Sweep cap shared by both Jacobi iterations.
pub const MAX_SWEEPS: usize = 100;

/// Off-diagonal stopping tolerance of the symmetric eigensolver, relative to `‖B‖_F`.
pub const EIG_TOL: f64 = 1e-14;

/// Thin singular value decomposition `A = U·diag(S)·Vᵀ` of an m×k matrix, m ≥ k.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// m×k, orthonormal columns.
    pub u: Matrix,
    /// Descending, nonnegative.
    pub s: Vec<f64>,
    /// k×k orthogonal.
    pub v: Matrix,
}

/// Symmetric eigendecomposition `B = E·diag(D)·Eᵀ`.
#[derive(Debug, Clone)]
pub struct SymEig {
    /// k×k orthogonal; column `i` pairs with `values[i]`.
    pub vectors: Matrix,
    /// Descending.
    pub values: Vec<f64>,
}

impl ThinSvd {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, &s) in self.s.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        us.matmul_t(&self.v)
    }
}

impl SymEig {
    pub fn reconstruct(&self) -> Matrix {
        let mut ed = self.vectors.clone();
        for (j, &d) in self.values.iter().enumerate() {
            ed.col_mut(j).iter_mut().for_each(|x| *x *= d);
        }
        ed.matmul_t(&self.vectors)
    }
}

/// Thin SVD by Householder QR followed by one-sided Jacobi on the k×k triangle.
///
/// Left vectors belonging to (numerically) zero singular values are completed
/// to an orthonormal set, so `U` always has orthonormal columns.
pub fn thin_svd(a: &Matrix) -> Result<ThinSvd> {
    let (m, k) = a.shape();
    if m < k {
        return Err(Error::Dimension(format!(
            "thin SVD needs rows >= cols, got {m}x{k}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("thin_svd input"));
    }
    if k == 0 {
        return Ok(ThinSvd {
            u: Matrix::zeros(m, 0),
            s: Vec::new(),
            v: Matrix::zeros(0, 0),
        });
    }

    let (q, r) = householder_qr(a);
    let (w, v) = one_sided_jacobi(r)?;

    let sigma: Vec<f64> = (0..k).map(|j| norm2(w.col(j))).collect();
    let order = descending_order(&sigma);

    let mut u_small = Matrix::zeros(k, k);
    let mut v_sorted = Matrix::zeros(k, k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let sj = sigma[src];
        s.push(sj);
        v_sorted.col_mut(dst).copy_from_slice(v.col(src));
        if sj > 0.0 {
            for (o, x) in u_small.col_mut(dst).iter_mut().zip(w.col(src)) {
                *o = x / sj;
            }
        }
    }
    orthonormalize_columns(&mut u_small, None);

    Ok(ThinSvd {
        u: q.matmul(&u_small),
        s,
        v: v_sorted,
    })
}

/// Cyclic Jacobi eigensolver for a symmetric matrix; eigenvalues descending.
///
/// The input is symmetrized as `(B + Bᵀ)/2` first. Inputs whose asymmetry
/// exceeds `1e-12·max(1, ‖B‖_F)` are rejected.
pub fn symmetric_eig(b: &Matrix) -> Result<SymEig> {
    if !b.is_square() {
        return Err(Error::Dimension(format!(
            "symmetric_eig needs a square matrix, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    if !b.is_finite() {
        return Err(Error::NonFinite("symmetric_eig input"));
    }
    let norm = b.frobenius_norm();
    let asym = b.asymmetry();
    if asym > 1e-12 * norm.max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let n = b.rows();
    let mut a = b.symmetrized();
    let mut vecs = Matrix::identity(n);

    let target = EIG_TOL * norm;
    let mut converged = false;
    let mut off = off_diagonal_norm(&a);
    for _ in 0..MAX_SWEEPS {
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut vecs, p, q);
            }
        }
        off = off_diagonal_norm(&a);
    }
    if !converged && off > target {
        return Err(Error::NoConvergence {
            routine: "symmetric_eig",
            sweeps: MAX_SWEEPS,
            residual: off,
        });
    }

    let diag = a.diag();
    let order = descending_order(&diag);
    let values = order.iter().map(|&i| diag[i]).collect();
    Ok(SymEig {
        vectors: vecs.select_columns(&order),
        values,
    })
}

/// Splits `X = Q·P + Xres` with `Qᵀ·Xres ≈ 0` using two projection passes.
///
/// `P` accumulates both passes. `Q` is assumed to have orthonormal columns.
pub fn orthonormal_residual(q: &Matrix, x: &Matrix) -> Result<(Matrix, Matrix)> {
    if q.rows() != x.rows() {
        return Err(Error::Dimension(format!(
            "basis has {} rows but data has {}",
            q.rows(),
            x.rows()
        )));
    }
    let mut res = x.clone();
    let mut p = Matrix::zeros(q.cols(), x.cols());
    if q.cols() == 0 {
        return Ok((p, res));
    }
    for _ in 0..2 {
        for j in 0..x.cols() {
            let r = res.col_mut(j);
            for l in 0..q.cols() {
                let c = dot(q.col(l), r);
                axpy(-c, q.col(l), r);
                p.col_mut(j)[l] += c;
            }
        }
    }
    Ok((p, res))
}

/// Re-orthonormalizes the columns of `u` in place (modified Gram–Schmidt, two
/// passes), optionally also against the columns of `against`.
///
/// Columns that lose most of their length are replaced by the coordinate
/// vector with the largest component outside the span built so far, so the
/// result always has orthonormal columns when `rows ≥ cols + against.cols()`.
pub(crate) fn orthonormalize_columns(u: &mut Matrix, against: Option<&Matrix>) {
    let (m, k) = u.shape();
    for j in 0..k {
        let mut v = u.col(j).to_vec();
        let before = norm2(&v);
        project_out(&mut v, u, j, against);
        let after = norm2(&v);
        if before == 0.0 || after < 0.5 * before {
            // Degenerate column: substitute the best coordinate direction.
            let mut best = (f64::NEG_INFINITY, Vec::new());
            for i in 0..m {
                let mut e = vec![0.0; m];
                e[i] = 1.0;
                project_out(&mut e, u, j, against);
                let n = norm2(&e);
                if n > best.0 {
                    best = (n, e);
                }
            }
            v = best.1;
        }
        let n = norm2(&v);
        u.col_mut(j)
            .iter_mut()
            .zip(&v)
            .for_each(|(o, x)| *o = x / n);
    }
}

fn project_out(v: &mut [f64], u: &Matrix, upto: usize, against: Option<&Matrix>) {
    for _ in 0..2 {
        if let Some(q) = against {
            for l in 0..q.cols() {
                let c = dot(q.col(l), v);
                axpy(-c, q.col(l), v);
            }
        }
        for l in 0..upto {
            let c = dot(u.col(l), v);
            axpy(-c, u.col(l), v);
        }
    }
}

/// Householder QR of an m×k matrix (m ≥ k): returns the m×k orthonormal
/// factor and the k×k upper triangle.
fn householder_qr(a: &Matrix) -> (Matrix, Matrix) {
    let (m, k) = a.shape();
    let mut work = a.clone();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k);

    for j in 0..k {
        let x = &work.col(j)[j..];
        let alpha = norm2(x);
        let mut v = x.to_vec();
        let beta = if alpha == 0.0 {
            0.0
        } else {
            let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
            v[0] += sign * alpha;
            let vnorm2 = dot(&v, &v);
            if vnorm2 == 0.0 {
                0.0
            } else {
                2.0 / vnorm2
            }
        };
        if beta != 0.0 {
            for c in j..k {
                let col = &mut work.col_mut(c)[j..];
                let f = beta * dot(&v, col);
                axpy(-f, &v, col);
            }
        }
        reflectors.push((v, beta));
    }

    let mut r = Matrix::zeros(k, k);
    for c in 0..k {
        for i in 0..=c {
            r[(i, c)] = work[(i, c)];
        }
    }

    let mut q = Matrix::eye(m, k);
    for (j, (v, beta)) in reflectors.iter().enumerate().rev() {
        if *beta == 0.0 {
            continue;
        }
        for c in j..k {
            let col = &mut q.col_mut(c)[j..];
            let f = beta * dot(v, col);
            axpy(-f, v, col);
        }
    }
    (q, r)
}

/// Hestenes one-sided Jacobi: returns `W = R·V` with mutually orthogonal
/// columns and the accumulated orthogonal `V`.
fn one_sided_jacobi(mut w: Matrix) -> Result<(Matrix, Matrix)> {
    let k = w.cols();
    let mut v = Matrix::identity(k);
    let tol = f64::EPSILON * k as f64;
    // Columns at roundoff level relative to the whole matrix carry no signal
    // and can stay parallel forever; leave them alone.
    let negligible = (f64::EPSILON * w.frobenius_norm()).powi(2);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(w.col(p), w.col(p));
                let beta = dot(w.col(q), w.col(q));
                let gamma = dot(w.col(p), w.col(q));
                if alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }

    let mut worst = 0.0f64;
    for p in 0..k {
        for q in p + 1..k {
            let np = norm2(w.col(p));
            let nq = norm2(w.col(q));
            if np * np > negligible && nq * nq > negligible {
                worst = worst.max(dot(w.col(p), w.col(q)).abs() / (np * nq));
            }
        }
    }
    Err(Error::NoConvergence {
        routine: "thin_svd",
        sweeps: MAX_SWEEPS,
        residual: worst,
    })
}

#[inline]
fn rotate_columns(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let (cp, cq) = a.col_pair_mut(p, q);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// One two-sided rotation annihilating `a[p, q]`.
fn jacobi_rotate(a: &mut Matrix, vecs: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.is_finite() {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + theta.hypot(1.0))
    } else {
        0.0
    };
    if t == 0.0 {
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let app = a[(p, p)] - t * apq;
    let aqq = a[(q, q)] + t * apq;

    rotate_columns(a, p, q, c, s);
    for i in 0..n {
        let (xp, xq) = (a[(p, i)], a[(q, i)]);
        a[(p, i)] = c * xp - s * xq;
        a[(q, i)] = s * xp + c * xq;
    }
    a[(p, p)] = app;
    a[(q, q)] = aqq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    rotate_columns(vecs, p, q, c, s);
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for j in 0..n {
        for (i, &v) in a.col(j).iter().enumerate() {
            if i != j {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// Indices sorting `values` descending; ties keep their original order.
pub(crate) fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn svd_of_single_column() {
        let a = Matrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        let svd = thin_svd(&a).unwrap();
        assert!(close(svd.s[0], 5.0, 1e-15));
        let sign = svd.v[(0, 0)];
        assert!(close(sign.abs(), 1.0, 1e-15));
        assert!(close(svd.u[(0, 0)] * sign, 0.6, 1e-15));
        assert!(close(svd.u[(1, 0)] * sign, 0.8, 1e-15));
    }

    #[test]
    fn svd_of_identity() {
        let svd = thin_svd(&Matrix::identity(3)).unwrap();
        assert!(svd.s.iter().all(|&s| close(s, 1.0, 1e-15)));
        assert!(svd.reconstruct().sub(&Matrix::identity(3)).frobenius_norm() < 1e-14);
        assert!(svd.u.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn svd_of_zero_matrix_completes_basis() {
        let svd = thin_svd(&Matrix::zeros(5, 3)).unwrap();
        assert_eq!(svd.s, vec![0.0; 3]);
        assert!(svd.u.orthonormality_defect() < 1e-15);
        assert!(svd.v.orthonormality_defect() < 1e-15);
    }

    #[test]
    fn svd_rank_deficient_columns() {
        // Second column duplicates the first.
        let a = Matrix::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![2.0, 2.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let svd = thin_svd(&a).unwrap();
        assert!(svd.s[2] < 1e-14);
        assert!(svd.u.orthonormality_defect() < 1e-14);
        assert!(svd.reconstruct().sub(&a).frobenius_norm() < 1e-14);
    }

    #[test]
    fn svd_empty_and_wide() {
        let svd = thin_svd(&Matrix::zeros(4, 0)).unwrap();
        assert_eq!(svd.u.shape(), (4, 0));
        assert!(svd.s.is_empty());
        assert!(matches!(
            thin_svd(&Matrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn eig_of_diagonal_sorts() {
        let eig = symmetric_eig(&Matrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(eig.vectors.col(0), &[1.0, 0.0, 0.0]);
        assert_eq!(eig.vectors.col(1), &[0.0, 0.0, 1.0]);
        assert_eq!(eig.vectors.col(2), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn eig_of_exchange_matrix() {
        let b = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let eig = symmetric_eig(&b).unwrap();
        assert!(close(eig.values[0], 1.0, 1e-15));
        assert!(close(eig.values[1], -1.0, 1e-15));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let e0 = eig.vectors.col(0);
        let e1 = eig.vectors.col(1);
        assert!(close(e0[0].abs(), h, 1e-15) && close(e0[0], e0[1], 1e-15));
        assert!(close(e1[0].abs(), h, 1e-15) && close(e1[0], -e1[1], 1e-15));
    }

    #[test]
    fn eig_rejects_asymmetric_and_non_square() {
        let b = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(symmetric_eig(&b), Err(Error::NotSymmetric(_))));
        assert!(matches!(
            symmetric_eig(&Matrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        let mut nan = Matrix::identity(2);
        nan[(0, 0)] = f64::NAN;
        assert!(matches!(symmetric_eig(&nan), Err(Error::NonFinite(_))));
    }

    #[test]
    fn eig_empty() {
        let eig = symmetric_eig(&Matrix::zeros(0, 0)).unwrap();
        assert!(eig.values.is_empty());
    }

    #[test]
    fn residual_basis_vectors() {
        let e1 = Matrix::from_columns(3, &[vec![1.0, 0.0, 0.0]]).unwrap();
        let e2 = Matrix::from_columns(3, &[vec![0.0, 1.0, 0.0]]).unwrap();
        let (p, r) = orthonormal_residual(&e1, &e1).unwrap();
        assert_eq!(p[(0, 0)], 1.0);
        assert_eq!(r.frobenius_norm(), 0.0);
        let (p, r) = orthonormal_residual(&e1, &e2).unwrap();
        assert_eq!(p[(0, 0)], 0.0);
        assert_eq!(r, e2);
    }

    #[test]
    fn residual_with_empty_basis() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let (p, r) = orthonormal_residual(&Matrix::zeros(2, 0), &x).unwrap();
        assert_eq!(p.shape(), (0, 1));
        assert_eq!(r, x);
        assert!(orthonormal_residual(&Matrix::zeros(3, 0), &x).is_err());
    }

    #[test]
    fn orthonormalize_replaces_degenerate_columns() {
        let mut u = Matrix::from_columns(3, &[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        orthonormalize_columns(&mut u, None);
        assert!(u.orthonormality_defect() < 1e-15);
    }
}
