//! Complex dense linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `x xᴴ`
pub fn outer(x: &CVec) -> CMat {
    x * x.adjoint()
}

pub fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// `Re Tr(A B)` for square matrices of equal size, without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `|aᴴ b|²`
pub fn abs2_inner(a: &CVec, b: &CVec) -> f64 {
    a.dotc(b).norm_sqr()
}

pub fn norm2_sq(x: &CVec) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn hermitian_error(m: &CMat) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermitian_error(m) <= tol
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Ties keep the lower original index first.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh_desc(m: &CMat) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(invalid("eigendecomposition of a non-square matrix"));
    }
    let n = m.nrows();
    if n == 0 {
        return Err(invalid("eigendecomposition of an empty matrix"));
    }
    let eig = nalgebra::SymmetricEigen::try_new(hermitize(m), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        normalize_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Rotates a vector so its largest-magnitude entry is real and positive.
/// Gives eigenvectors a deterministic global phase.
pub fn normalize_phase(x: &mut CVec) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in x.iter().enumerate() {
        // strict comparison with a small margin keeps the first of near-ties
        if z.norm() > best_mag * (1.0 + 1e-12) {
            best_mag = z.norm();
            best = i;
        }
    }
    if best_mag > 0.0 {
        let ph = x[best] / x[best].norm();
        let rot = ph.conj();
        x.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Largest eigenvalue η(X) and its unit eigenvector θ(X).
pub fn top_eig(m: &CMat) -> Result<(f64, CVec)> {
    let e = eigh_desc(m)?;
    Ok((e.values[0], e.vectors.column(0).into_owned()))
}

/// Clips negative eigenvalues to zero.
pub fn psd_project(m: &CMat) -> Result<CMat> {
    let e = eigh_desc(m)?;
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (i, &lam) in e.values.iter().enumerate() {
        if lam > 0.0 {
            let v = e.vectors.column(i).into_owned();
            out += outer(&v).map(|z| z * lam);
        }
    }
    Ok(hermitize(&out))
}

/// Largest generalized eigenpair of the Hermitian pencil `(a, b)` with `b`
/// positive definite, via Cholesky `b = L Lᴴ` and the standard problem
/// `L⁻¹ a L⁻ᴴ`. The returned vector has unit Euclidean norm.
pub fn generalized_top_eig(a: &CMat, b: &CMat) -> Result<(f64, CVec)> {
    let chol = nalgebra::Cholesky::new(hermitize(b))
        .ok_or_else(|| Error::Numerical("pencil matrix is not positive definite".into()))?;
    let l = chol.l();
    let n = a.nrows();
    // C = L⁻¹ A L⁻ᴴ
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let cmat = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?
        .adjoint();
    let (lam, y) = top_eig(&cmat)?;
    // w = L⁻ᴴ y
    let mut w = l
        .adjoint()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let nrm = w.norm();
    if !(nrm.is_finite() && nrm > 0.0) {
        return Err(Error::Numerical("degenerate generalized eigenvector".into()));
    }
    w.unscale_mut(nrm);
    normalize_phase(&mut w);
    debug_assert_eq!(w.len(), n);
    Ok((lam, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_eig_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0)]));
        let (lam, v) = top_eig(&m).unwrap();
        assert!((lam - 3.0).abs() < 1e-12);
        assert!((v[1].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_resolve_to_first_index() {
        let m = CMat::identity(3, 3);
        let (_, v) = top_eig(&m).unwrap();
        assert!((v[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generalized_pencil_hand_case() {
        // H = diag(1,0), B = diag(0,1) + I
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), ZERO]));
        let b = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]));
        let (lam, w) = generalized_top_eig(&a, &b).unwrap();
        assert!((lam - 1.0).abs() < 1e-12);
        assert!((w[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_prod_matches_product() {
        let a = outer(&CVec::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.3)]));
        let b = outer(&CVec::from_vec(vec![c(0.2, -1.0), c(1.5, 0.1)]));
        let direct = trace_re(&(&a * &b));
        assert!((trace_prod(&a, &b) - direct).abs() < 1e-12);
    }
}
