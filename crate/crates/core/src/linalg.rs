//! Small dense helpers shared across modules. Vectors are plain `[C64]`
//! slices; matrices are `faer` column-major matrices.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `<a|b>`, antilinear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

pub fn scale(a: &mut [C64], s: C64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// `y += s * x`
pub fn axpy(y: &mut [C64], s: C64, x: &[C64]) {
    debug_assert_eq!(x.len(), y.len());
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += s * xi);
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Normalizes in place and returns the previous norm.
pub fn normalize(a: &mut [C64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        scale(a, C64::new(1.0 / n, 0.0));
    }
    n
}

/// `min_θ ‖b − e^{iθ} a‖` for arbitrary (not necessarily unit) vectors.
pub fn phase_aligned_distance(a: &[C64], b: &[C64]) -> f64 {
    let ov = inner(a, b);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
    a.iter()
        .zip(b)
        .map(|(x, y)| (y - phase * x).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix,
/// with the diagonal phases of R divided out.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Mat<C64> {
    let g = Mat::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    Mat::from_fn(dim, dim, |i, j| {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        q[(i, j)] * ph
    })
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, eigenvalues sorted
/// in descending order (columns of the returned matrix follow the same order).
pub fn hermitian_eigen(m: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Backend(format!("{e:?}")))?;
    let n = m.nrows();
    let vals = evd.S().column_vector();
    let vecs = evd.U();
    let values: Vec<f64> = (0..n).rev().map(|i| vals[i].re).collect();
    let vectors = Mat::from_fn(n, n, |i, j| vecs[(i, n - 1 - j)]);
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues(m: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let mut vals = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Backend(format!("{e:?}")))?;
    vals.reverse();
    Ok(vals)
}

/// `max_ij |U†U − I|_ij`
pub fn unitarity_defect(u: MatRef<'_, C64>) -> f64 {
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn column(m: MatRef<'_, C64>, j: usize) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn mat_vec(m: MatRef<'_, C64>, v: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols(), v.len());
    let mut out = vec![ZERO; m.nrows()];
    for (j, vj) in v.iter().enumerate() {
        if *vj == ZERO {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * vj;
        }
    }
    out
}

/// Kronecker product `a ⊗ b`, row index of `b` fastest.
pub fn kron(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}
