//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a - b‖_F / max(1, ‖a‖_F, ‖b‖_F)`.
pub fn rel_residual(a: &CMat, b: &CMat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let scale = frob(a).max(frob(b)).max(1.0);
    frob(&(a - b)) / scale
}

pub fn rel_residual_vec(a: &CVec, b: &CVec) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let scale = a.norm().max(b.norm()).max(1.0);
    (a - b).norm() / scale
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part (eigenvalues only).
pub fn min_eigenvalue(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    rel_residual(m, &m.adjoint())
}

/// Singular values of a real matrix in descending order.
pub fn singular_values(m: &RMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with threshold `rel · σ_max`.
pub fn numerical_rank(m: &RMat, rel: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rel * top).count(),
        _ => 0,
    }
}

pub fn numerical_rank_c(m: &CMat, rel: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = m.clone().svd(false, false).singular_values;
    let top = s.max();
    if top <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel * top).count()
}

/// Minimum-norm least-squares solution of `a x = b` with singular values
/// below `rel · σ_max` truncated.
pub fn lstsq_min_norm(a: &RMat, b: &RVec, rel: f64) -> RVec {
    if a.ncols() == 0 {
        return RVec::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    let eps = (rel * top).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).unwrap_or_else(|_| RVec::zeros(a.ncols()))
}

/// Complex pseudo-inverse with relative singular-value cutoff.
pub fn pinv_c(a: &CMat, rel: f64) -> CMat {
    if a.nrows() == 0 || a.ncols() == 0 {
        return CMat::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    let eps = (rel * top).max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(eps)
        .unwrap_or_else(|_| CMat::zeros(a.ncols(), a.nrows()))
}

pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

pub fn expm_real(m: &RMat) -> RMat {
    m.clone().exp()
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn hpd_inverse(m: &CMat) -> Option<CMat> {
    if m.nrows() == 0 {
        return Some(CMat::zeros(0, 0));
    }
    m.clone().cholesky().map(|ch| ch.inverse())
}

/// Orthonormalizes the columns of `vectors` with respect to the inner product
/// `(x, y) = y^H G x`, dropping columns whose residual norm falls below
/// `rel` times the largest column norm. Returns the retained orthonormal
/// columns and the indices of the input columns that were kept.
pub fn gram_schmidt(vectors: &CMat, gram: &CMat, rel: f64) -> (CMat, Vec<usize>) {
    let n = vectors.nrows();
    let norm = |v: &CVec| (v.adjoint() * gram * v)[(0, 0)].re.max(0.0).sqrt();
    let scale = (0..vectors.ncols())
        .map(|j| norm(&vectors.column(j).into_owned()))
        .fold(0.0, f64::max);
    let mut basis: Vec<CVec> = Vec::new();
    let mut kept = Vec::new();
    if scale == 0.0 {
        return (CMat::zeros(n, 0), kept);
    }
    for j in 0..vectors.ncols() {
        let mut v: CVec = vectors.column(j).into_owned();
        for _ in 0..2 {
            for q in &basis {
                let coef = (q.adjoint() * gram * &v)[(0, 0)];
                v -= q * coef;
            }
        }
        let nv = norm(&v);
        if nv > rel * scale {
            basis.push(v / C64::new(nv, 0.0));
            kept.push(j);
        }
    }
    let mut out = CMat::zeros(n, basis.len());
    for (j, q) in basis.iter().enumerate() {
        out.set_column(j, q);
    }
    (out, kept)
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// A random unitary obtained from the QR factorization of a random matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let m = random_complex(rng, n, n) + eye(n) * C64::new(0.5, 0.0);
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    // fix the phases so the distribution does not depend on QR sign conventions
    let mut out = q.clone();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            out[(i, j)] = q[(i, j)] * ph;
        }
    }
    out
}
