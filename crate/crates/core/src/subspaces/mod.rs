//! Orthogonal projectors onto constraint subspaces, applied matrix-free.

mod channel;
mod fermion;
mod perm;

use std::fmt;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};

pub use channel::{channel_image_projector, ChannelImageProjector, ChannelSpec, ChannelSpecJson};
pub use fermion::{
    binomial, embed_fermion_state, slater_state, wedge, yang_pairing_defect, yang_state,
    yang_symmetry_unitary, yang_two_particle_state, FermionProjector, FermionSpace, SplitIsometry,
};
pub use perm::{antisymmetric_projector, symmetric_projector, PermutationProjector, Symmetry};

/// Largest ambient dimension for which dense materialization and exact
/// basis-sum traces are allowed.
pub const DENSE_LIMIT: usize = 4096;

/// Hermitian idempotent operator `P` with `image(P) = U`.
pub trait SubspaceProjector: Send + Sync + fmt::Debug {
    fn ambient_dim(&self) -> usize;

    /// `P v`. `v.len()` must equal [`SubspaceProjector::ambient_dim`].
    fn apply(&self, v: &[C64]) -> Vec<C64>;

    fn rank(&self) -> Option<usize>;

    fn label(&self) -> String;
}

#[derive(Clone, Debug)]
pub struct IdentityProjector {
    dim: usize,
}

impl IdentityProjector {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl SubspaceProjector for IdentityProjector {
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        v.to_vec()
    }

    fn rank(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn label(&self) -> String {
        format!("identity({})", self.dim)
    }
}

/// `P v = Σ_i |u_i⟩⟨u_i|v⟩` over an orthonormal basis.
#[derive(Clone, Debug)]
pub struct SpanProjector {
    dim: usize,
    basis: Vec<Vec<C64>>,
    label: String,
}

impl SpanProjector {
    /// Orthonormal basis of the image.
    pub fn basis(&self) -> &[Vec<C64>] {
        &self.basis
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl SubspaceProjector for SpanProjector {
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        for u in &self.basis {
            let c = linalg::inner(u, v);
            linalg::axpy(&mut out, c, u);
        }
        out
    }

    fn rank(&self) -> Option<usize> {
        Some(self.basis.len())
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Residual norm (relative to the input vector) below which a vector is
/// treated as linearly dependent.
const SPAN_DROP_TOL: f64 = 1e-10;

/// Modified Gram–Schmidt with one re-orthogonalization pass.
fn orthonormalize(vectors: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let original = linalg::norm(v);
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for u in &basis {
                let c = linalg::inner(u, &w);
                linalg::axpy(&mut w, -c, u);
            }
        }
        let residual = linalg::norm(&w);
        if residual < SPAN_DROP_TOL * original {
            continue;
        }
        linalg::scale(&mut w, C64::new(1.0 / residual, 0.0));
        basis.push(w);
    }
    basis
}

pub fn span_projector(vectors: &[Vec<C64>]) -> Result<SpanProjector> {
    let dim = vectors
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidParameter("span of an empty vector list".into()))?;
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    let basis = orthonormalize(vectors);
    if basis.is_empty() {
        return Err(Error::InvalidParameter("all spanning vectors vanish".into()));
    }
    let label = format!("span({} of {} vectors in C^{dim})", basis.len(), vectors.len());
    Ok(SpanProjector { dim, basis, label })
}

/// Projector onto `D` i.i.d. complex Gaussian directions in `C^ambient_dim`.
pub fn random_subspace_projector(ambient_dim: usize, dim: usize, seed: u64) -> Result<SpanProjector> {
    let embedded = random_subspace_in(ambient_dim, dim, seed, |v| v)?;
    Ok(embedded.with_label(format!("random({dim} in C^{ambient_dim}, seed {seed})")))
}

/// Random `dim`-dimensional subspace of `C^coord_dim`, mapped through
/// `embed` (an isometry into the ambient space) before orthonormalization.
pub fn random_subspace_in(
    coord_dim: usize,
    dim: usize,
    seed: u64,
    embed: impl Fn(Vec<C64>) -> Vec<C64>,
) -> Result<SpanProjector> {
    if dim == 0 || dim > coord_dim {
        return Err(Error::InvalidParameter(format!(
            "subspace dimension {dim} outside 1..={coord_dim}"
        )));
    }
    const MAX_ATTEMPTS: usize = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(dim);
    let mut attempts = 0;
    while vectors.len() < dim {
        let candidate = embed(linalg::gaussian_vector(&mut rng, coord_dim));
        let mut trial = vectors.clone();
        trial.push(candidate);
        if orthonormalize(&trial).len() == trial.len() {
            vectors = trial;
        } else {
            attempts += 1;
            if attempts >= MAX_ATTEMPTS {
                return Err(Error::Inconsistent(format!(
                    "random subspace stayed rank deficient after {MAX_ATTEMPTS} resamples"
                )));
            }
        }
    }
    span_projector(&vectors)
}

/// Worst relative idempotence and Hermiticity defects over random probes.
#[derive(Clone, Copy, Debug)]
pub struct ProbeReport {
    pub idempotence: f64,
    pub hermiticity: f64,
}

pub fn probe(p: &dyn SubspaceProjector, probes: usize, seed: u64) -> ProbeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.ambient_dim();
    let mut report = ProbeReport { idempotence: 0.0, hermiticity: 0.0 };
    for _ in 0..probes {
        let u = linalg::gaussian_vector(&mut rng, n);
        let v = linalg::gaussian_vector(&mut rng, n);
        let pv = p.apply(&v);
        let ppv = p.apply(&pv);
        let idem = linalg::norm(&linalg::sub(&ppv, &pv)) / linalg::norm(&v);
        let pu = p.apply(&u);
        let herm = (linalg::inner(&u, &pv) - linalg::inner(&pu, &v)).norm()
            / (linalg::norm(&u) * linalg::norm(&v));
        report.idempotence = report.idempotence.max(idem);
        report.hermiticity = report.hermiticity.max(herm);
    }
    report
}

/// `Tr P`: exact basis sum up to [`DENSE_LIMIT`], otherwise a Hutchinson
/// estimate with `probes` Rademacher vectors.
pub fn trace(p: &dyn SubspaceProjector, probes: usize, seed: u64) -> f64 {
    let n = p.ambient_dim();
    if n <= DENSE_LIMIT {
        let mut e = vec![ZERO; n];
        let mut total = 0.0;
        for i in 0..n {
            e[i] = linalg::ONE;
            total += p.apply(&e)[i].re;
            e[i] = ZERO;
        }
        return total;
    }
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..probes {
        let z: Vec<C64> = (0..n)
            .map(|_| C64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0))
            .collect();
        total += linalg::inner(&z, &p.apply(&z)).re;
    }
    total / probes as f64
}

/// Dense matrix of `P`; refused above [`DENSE_LIMIT`].
pub fn to_dense(p: &dyn SubspaceProjector) -> Result<Mat<C64>> {
    let n = p.ambient_dim();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: n, limit: DENSE_LIMIT });
    }
    let mut m = Mat::<C64>::zeros(n, n);
    let mut e = vec![ZERO; n];
    for j in 0..n {
        e[j] = linalg::ONE;
        let col = p.apply(&e);
        for (i, x) in col.into_iter().enumerate() {
            m[(i, j)] = x;
        }
        e[j] = ZERO;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; n];
        v[i] = linalg::ONE;
        v
    }

    #[test]
    fn span_of_unit_vector() {
        let p = span_projector(&[e(3, 0)]).unwrap();
        let v = vec![C64::new(0.3, 0.1), C64::new(2.0, 0.0), C64::new(0.0, -1.0)];
        let pv = p.apply(&v);
        assert_eq!(pv[0], v[0]);
        assert_eq!(pv[1], ZERO);
        assert_eq!(pv[2], ZERO);
    }

    #[test]
    fn span_drops_duplicates() {
        let p = span_projector(&[e(4, 0), e(4, 0)]).unwrap();
        assert_eq!(p.rank(), Some(1));
    }

    #[test]
    fn span_rejects_empty_and_mismatched() {
        assert!(span_projector(&[]).is_err());
        assert!(span_projector(&[vec![ZERO; 3]]).is_err());
        assert!(matches!(
            span_projector(&[e(3, 0), e(4, 0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_span_is_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let vs: Vec<_> = (0..4).map(|_| linalg::gaussian_vector(&mut rng, 8)).collect();
        let p = span_projector(&vs).unwrap();
        assert_eq!(p.rank(), Some(4));
        let r = probe(&p, 20, 1);
        assert!(r.idempotence < 1e-10 && r.hermiticity < 1e-10, "{r:?}");
        assert!((trace(&p, 0, 0) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn full_random_subspace_is_identity() {
        let p = random_subspace_projector(6, 6, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = linalg::gaussian_vector(&mut rng, 6);
        assert!(linalg::norm(&linalg::sub(&p.apply(&v), &v)) < 1e-10 * linalg::norm(&v));
    }

    #[test]
    fn one_dimensional_random_subspace() {
        let p = random_subspace_projector(5, 1, 8).unwrap();
        let u = &p.basis()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = linalg::gaussian_vector(&mut rng, 5);
        let pv = p.apply(&v);
        // pv ∥ u
        let c = linalg::inner(u, &pv);
        let mut r = pv.clone();
        linalg::axpy(&mut r, -c, u);
        assert!(linalg::norm(&r) < 1e-12);
    }

    #[test]
    fn random_subspace_is_deterministic() {
        let a = random_subspace_projector(9, 4, 77).unwrap();
        let b = random_subspace_projector(9, 4, 77).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let v = linalg::gaussian_vector(&mut rng, 9);
            assert_eq!(a.apply(&v), b.apply(&v));
        }
        assert!(random_subspace_projector(3, 4, 1).is_err());
        assert!(random_subspace_projector(3, 0, 1).is_err());
    }

    #[test]
    fn dense_limit_enforced() {
        assert!(matches!(
            to_dense(&IdentityProjector::new(DENSE_LIMIT + 1)),
            Err(Error::TooLarge { .. })
        ));
        let m = to_dense(&IdentityProjector::new(3)).unwrap();
        assert_eq!(m[(1, 1)], linalg::ONE);
    }

    #[test]
    fn hutchinson_trace_for_large_identity() {
        // Rademacher probes give the exact trace for the identity.
        let t = trace(&IdentityProjector::new(DENSE_LIMIT + 10), 3, 5);
        assert!((t - (DENSE_LIMIT + 10) as f64).abs() < 1e-9);
    }
}
