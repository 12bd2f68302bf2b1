//! Fermionic states in intrinsic coordinates.
//!
//! A state of `N` fermions in `C^d` is a vector over the lexicographically
//! ordered `N`-subsets of `{0..d}`. The cut between `K` and `N−K` particles
//! is realized by the split isometry `E : ∧^N → ∧^K ⊗ ∧^{N−K}`,
//!
//! ```text
//! E|S⟩ = Σ_{A ⊔ B = S, |A| = K} sgn(A, B) / √C(N,K) · |A⟩ ⊗ |B⟩,
//! ```
//!
//! where `sgn(A, B)` is the parity of the merge permutation taking
//! (sorted A, sorted B) to sorted S.

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::perm::signed_permutations;
use super::SubspaceProjector;
use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};
use crate::tensor::PureState;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

const MAX_MODES: usize = 63;

#[derive(Clone, Debug)]
pub struct FermionSpace {
    d: usize,
    n: usize,
    /// bitmask of each basis subset, lexicographic order
    basis: Vec<u64>,
}

fn mask_of(subset: &[usize]) -> u64 {
    subset.iter().fold(0u64, |m, &i| m | (1 << i))
}

fn elements(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

impl FermionSpace {
    /// `N` particles in `C^d`, `0 ≤ N ≤ d ≤ 63`.
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 || d > MAX_MODES {
            return Err(Error::InvalidParameter(format!("mode count d={d} outside 1..={MAX_MODES}")));
        }
        if n > d {
            return Err(Error::InvalidParameter(format!("N={n} exceeds d={d}")));
        }
        let mut basis = Vec::with_capacity(binomial(d, n));
        let mut t: Vec<usize> = (0..n).collect();
        loop {
            basis.push(mask_of(&t));
            let Some(i) = (0..n).rev().find(|&i| t[i] < d - (n - i)) else {
                break;
            };
            t[i] += 1;
            for j in i + 1..n {
                t[j] = t[j - 1] + 1;
            }
        }
        Ok(Self { d, n, basis })
    }

    pub fn modes(&self) -> usize {
        self.d
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    /// `C(d, N)`
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Sorted elements of the `index`-th basis subset.
    pub fn subset(&self, index: usize) -> Vec<usize> {
        elements(self.basis[index])
    }

    pub fn mask(&self, index: usize) -> u64 {
        self.basis[index]
    }

    /// Lexicographic rank of a subset given by its bitmask.
    pub fn rank_of_mask(&self, mask: u64) -> Option<usize> {
        if mask.count_ones() as usize != self.n || (self.d < 64 && mask >> self.d != 0) {
            return None;
        }
        let mut rank = 0;
        let mut prev: isize = -1;
        for (j, c) in elements(mask).into_iter().enumerate() {
            for x in (prev + 1) as usize..c {
                rank += binomial(self.d - 1 - x, self.n - 1 - j);
            }
            prev = c as isize;
        }
        Some(rank)
    }

    pub fn rank_of(&self, subset: &[usize]) -> Option<usize> {
        if subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&i| i >= self.d) {
            return None;
        }
        self.rank_of_mask(mask_of(subset))
    }
}

/// Parity sign of the merge permutation (sorted A, sorted B) → sorted A ∪ B.
fn merge_sign(a: u64, b: u64) -> f64 {
    // number of pairs (x ∈ A, y ∈ B) with x > y
    let mut inversions = 0u32;
    for y in elements(b) {
        inversions += (a >> (y + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sparse isometry `E : ∧^N C^d → ∧^K C^d ⊗ ∧^{N−K} C^d`.
#[derive(Clone, Debug)]
pub struct SplitIsometry {
    space: FermionSpace,
    k: usize,
    dim_a: usize,
    dim_b: usize,
    scale: f64,
    /// per intrinsic basis element: (ambient row, sign)
    columns: Vec<Vec<(usize, f64)>>,
}

impl SplitIsometry {
    pub fn new(space: &FermionSpace, k: usize) -> Result<Self> {
        let n = space.particles();
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!("split K={k} outside 1..={}", n.saturating_sub(1))));
        }
        let space_a = FermionSpace::new(space.modes(), k)?;
        let space_b = FermionSpace::new(space.modes(), n - k)?;
        let dim_b = space_b.dim();
        // positions inside S that go to side A
        let pos = FermionSpace::new(n, k)?;
        let columns = (0..space.dim())
            .map(|col| {
                let s = space.mask(col);
                let members = elements(s);
                (0..pos.dim())
                    .map(|p| {
                        let a = pos.subset(p).into_iter().fold(0u64, |m, i| m | 1 << members[i]);
                        let b = s & !a;
                        let ra = space_a.rank_of_mask(a).expect("valid K-subset");
                        let rb = space_b.rank_of_mask(b).expect("valid (N-K)-subset");
                        (ra * dim_b + rb, merge_sign(a, b))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            space: space.clone(),
            k,
            dim_a: space_a.dim(),
            dim_b,
            scale: 1.0 / (binomial(n, k) as f64).sqrt(),
            columns,
        })
    }

    pub fn space(&self) -> &FermionSpace {
        &self.space
    }

    pub fn split(&self) -> usize {
        self.k
    }

    /// `[C(d,K), C(d,N−K)]`
    pub fn ambient_dims(&self) -> [usize; 2] {
        [self.dim_a, self.dim_b]
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn columns(&self) -> &[Vec<(usize, f64)>] {
        &self.columns
    }

    /// `E x`
    pub fn embed(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.columns.len());
        let mut out = vec![ZERO; self.ambient_dim()];
        for (col, xc) in self.columns.iter().zip(x) {
            if *xc == ZERO {
                continue;
            }
            let v = xc * self.scale;
            for &(row, s) in col {
                out[row] += v * s;
            }
        }
        out
    }

    /// `E† v`
    pub fn restrict(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.ambient_dim());
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(row, s)| v[row] * s).sum::<C64>() * self.scale)
            .collect()
    }
}

/// `P = E E†` onto the image of `∧^N C^d` inside `∧^K ⊗ ∧^{N−K}`.
#[derive(Clone, Debug)]
pub struct FermionProjector {
    iso: SplitIsometry,
}

impl FermionProjector {
    pub fn new(space: &FermionSpace, k: usize) -> Result<Self> {
        Ok(Self { iso: SplitIsometry::new(space, k)? })
    }

    pub fn isometry(&self) -> &SplitIsometry {
        &self.iso
    }

    /// Local dimensions `[C(d,K), C(d,N−K)]` of the ambient space.
    pub fn dims(&self) -> Vec<usize> {
        self.iso.ambient_dims().to_vec()
    }
}

impl SubspaceProjector for FermionProjector {
    fn ambient_dim(&self) -> usize {
        self.iso.ambient_dim()
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.iso.embed(&self.iso.restrict(v))
    }

    fn rank(&self) -> Option<usize> {
        Some(self.iso.space.dim())
    }

    fn label(&self) -> String {
        format!(
            "fermion(d={}, N={}, K={})",
            self.iso.space.modes(),
            self.iso.space.particles(),
            self.iso.k
        )
    }
}

/// Normalized `x ∧ y` of `x ∈ ∧^{K1}`, `y ∈ ∧^{K2}` (intrinsic coordinates
/// over `d` modes); the zero vector when the antisymmetrized product vanishes.
pub fn wedge(d: usize, k1: usize, x: &[C64], k2: usize, y: &[C64]) -> Result<Vec<C64>> {
    let target = FermionSpace::new(d, k1 + k2)?;
    let iso = SplitIsometry::new(&target, k1)?;
    let [da, db] = iso.ambient_dims();
    if x.len() != da {
        return Err(Error::DimensionMismatch { expected: da, got: x.len() });
    }
    if y.len() != db {
        return Err(Error::DimensionMismatch { expected: db, got: y.len() });
    }
    let product: Vec<C64> = x.iter().flat_map(|a| y.iter().map(move |b| a * b)).collect();
    let mut out = iso.restrict(&product);
    if linalg::norm(&out) > 1e-14 {
        linalg::normalize(&mut out);
    } else {
        out.iter_mut().for_each(|z| *z = ZERO);
    }
    Ok(out)
}

/// Intrinsic unit vector of the Slater determinant over `occupied`
/// (zero-based mode indices, any order).
pub fn slater_state(space: &FermionSpace, occupied: &[usize]) -> Result<PureState> {
    let mut sorted = occupied.to_vec();
    sorted.sort_unstable();
    let rank = (sorted.len() == space.particles())
        .then(|| space.rank_of(&sorted))
        .flatten()
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "{occupied:?} is not a {}-subset of {} modes",
                space.particles(),
                space.modes()
            ))
        })?;
    PureState::basis(vec![space.dim()], rank)
}

/// `Σ_{i<d/2} √(2/d) |{2i, 2i+1}⟩` in intrinsic coordinates of `∧² C^d`.
pub fn yang_two_particle_state(d: usize) -> Result<Vec<C64>> {
    if d % 2 != 0 || d == 0 {
        return Err(Error::InvalidParameter(format!("Yang states need even d, got {d}")));
    }
    let pair = FermionSpace::new(d, 2)?;
    let mut v = vec![ZERO; pair.dim()];
    let c = C64::new((2.0 / d as f64).sqrt(), 0.0);
    for i in 0..d / 2 {
        v[pair.rank_of(&[2 * i, 2 * i + 1]).expect("pair")] = c;
    }
    Ok(v)
}

/// Antisymmetrized power `Ψ⁽²⁾ ∧ … ∧ Ψ⁽²⁾` (N/2 factors), normalized after
/// each wedge.
pub fn yang_state(space: &FermionSpace) -> Result<PureState> {
    let (d, n) = (space.modes(), space.particles());
    if d % 2 != 0 || n % 2 != 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("Yang states need even d and N, got d={d}, N={n}")));
    }
    let pair = yang_two_particle_state(d)?;
    let mut state = pair.clone();
    for m in (2..n).step_by(2) {
        state = wedge(d, m, &state, 2, &pair)?;
    }
    PureState::new(vec![space.dim()], state)
}

/// Maps intrinsic coordinates of `∧^N C^d` into `(C^d)^{⊗N}`, each subset
/// going to its normalized antisymmetrized tensor.
pub fn embed_fermion_state(intrinsic: &[C64], space: &FermionSpace) -> Result<PureState> {
    if intrinsic.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: intrinsic.len() });
    }
    let (d, n) = (space.modes(), space.particles());
    let perms = signed_permutations(n);
    let norm = 1.0 / (perms.len() as f64).sqrt();
    let mut out = vec![ZERO; d.pow(n as u32)];
    for (i, x) in intrinsic.iter().enumerate() {
        if *x == ZERO {
            continue;
        }
        let s = space.subset(i);
        for (p, sign) in &perms {
            let flat = p.iter().fold(0, |acc, &slot| acc * d + s[slot]);
            out[flat] += x * (sign * norm);
        }
    }
    PureState::new(vec![d; n], out)
}

/// Worst violation of the pairing conditions
/// `conj(U[2i,2j]) = U[2i+1,2j+1]` and `conj(U[2i,2j+1]) = −U[2i+1,2j]`.
pub fn yang_pairing_defect(u: faer::MatRef<'_, C64>) -> f64 {
    let half = u.nrows() / 2;
    let mut worst = 0.0f64;
    for i in 0..half {
        for j in 0..half {
            let c1 = u[(2 * i, 2 * j)].conj() - u[(2 * i + 1, 2 * j + 1)];
            let c2 = u[(2 * i, 2 * j + 1)].conj() + u[(2 * i + 1, 2 * j)];
            worst = worst.max(c1.norm()).max(c2.norm());
        }
    }
    worst
}

/// Random unitary in the symmetry group of the two-particle Yang state:
/// a random anti-Hermitian generator is averaged with its image under
/// `X ↦ J X̄ Jᵀ` (J the block-diagonal pairing form) and exponentiated.
pub fn yang_symmetry_unitary(d: usize, seed: u64) -> Result<Mat<C64>> {
    if d % 2 != 0 || d == 0 {
        return Err(Error::InvalidParameter(format!("pairing symmetry needs even d, got {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(d, d, |_, _| {
        let v = linalg::gaussian_vector(&mut rng, 1);
        v[0]
    });
    let h = Mat::from_fn(d, d, |i, j| (g[(i, j)] - g[(j, i)].conj()) * 0.5);
    // J = ⊕ [[0, 1], [-1, 0]]
    let j_entry = |r: usize, c: usize| -> f64 {
        if r / 2 != c / 2 {
            0.0
        } else if r % 2 == 0 && c % 2 == 1 {
            1.0
        } else if r % 2 == 1 && c % 2 == 0 {
            -1.0
        } else {
            0.0
        }
    };
    let partner = |r: usize| r ^ 1;
    // (J X̄ Jᵀ)[r,c] = J[r,r'] conj(X[r',c']) J[c,c']
    let twisted = Mat::from_fn(d, d, |r, c| {
        let (rp, cp) = (partner(r), partner(c));
        h[(rp, cp)].conj() * (j_entry(r, rp) * j_entry(c, cp))
    });
    let hs = Mat::from_fn(d, d, |r, c| (h[(r, c)] + twisted[(r, c)]) * 0.5);
    // exp(H) = exp(-i G) with G = iH Hermitian
    let gh = Mat::from_fn(d, d, |r, c| hs[(r, c)] * C64::i());
    let gh = Mat::from_fn(d, d, |r, c| (gh[(r, c)] + gh[(c, r)].conj()) * 0.5);
    let (vals, w) = linalg::hermitian_eigen(gh.as_ref())?;
    let phases: Vec<C64> = vals.iter().map(|&g| C64::from_polar(1.0, -g)).collect();
    Ok(Mat::from_fn(d, d, |r, c| {
        (0..d).map(|k| w[(r, k)] * phases[k] * w[(c, k)].conj()).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspaces::{antisymmetric_projector, probe, trace};
    use crate::tensor::{schmidt_decompose, Cut};

    fn sv(space: &FermionSpace, k: usize, x: &[C64]) -> Vec<f64> {
        let iso = SplitIsometry::new(space, k).unwrap();
        let s = PureState::new(iso.ambient_dims().to_vec(), iso.embed(x)).unwrap();
        schmidt_decompose(&s, &Cut::new(vec![0], 2).unwrap()).unwrap().coeffs
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 8), 495);
        assert_eq!(binomial(10, 2), 45);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn basis_is_lexicographic_and_ranked() {
        let sp = FermionSpace::new(6, 3).unwrap();
        assert_eq!(sp.dim(), 20);
        let subsets: Vec<Vec<usize>> = (0..sp.dim()).map(|i| sp.subset(i)).collect();
        assert!(subsets.windows(2).all(|w| w[0] < w[1]));
        for (i, s) in subsets.iter().enumerate() {
            assert_eq!(sp.rank_of(s), Some(i));
        }
        assert_eq!(sp.rank_of(&[0, 0, 1]), None);
        assert_eq!(sp.rank_of(&[0, 1]), None);
    }

    #[test]
    fn merge_sign_examples() {
        // ({1}, {0}) -> (1, 0) is one transposition
        assert_eq!(merge_sign(0b10, 0b01), -1.0);
        assert_eq!(merge_sign(0b01, 0b10), 1.0);
        // ({0, 2}, {1}) -> (0, 2, 1): one inversion
        assert_eq!(merge_sign(0b101, 0b010), -1.0);
        // ({2}, {0, 1}) -> (2, 0, 1): two inversions
        assert_eq!(merge_sign(0b100, 0b011), 1.0);
    }

    #[test]
    fn split_isometry_is_isometric() {
        for (d, n, k) in [(4, 2, 1), (5, 3, 1), (5, 3, 2), (6, 4, 2), (7, 4, 3)] {
            let sp = FermionSpace::new(d, n).unwrap();
            let iso = SplitIsometry::new(&sp, k).unwrap();
            for col in iso.columns() {
                assert_eq!(col.len(), binomial(n, k));
            }
            for i in 0..sp.dim() {
                let mut e = vec![ZERO; sp.dim()];
                e[i] = linalg::ONE;
                let back = iso.restrict(&iso.embed(&e));
                assert!(linalg::norm(&linalg::sub(&back, &e)) < 1e-12);
            }
        }
    }

    #[test]
    fn fermion_projector_examples() {
        let sp = FermionSpace::new(4, 2).unwrap();
        let p = FermionProjector::new(&sp, 1).unwrap();
        assert_eq!(p.rank(), Some(6));
        assert!((trace(&p, 0, 0) - 6.0).abs() < 1e-12);
        let iso = p.isometry();
        let slater = slater_state(&sp, &[0, 1]).unwrap();
        let v = iso.embed(slater.amps());
        assert!(linalg::norm(&linalg::sub(&p.apply(&v), &v)) < 1e-14);
        let r = probe(&p, 20, 3);
        assert!(r.idempotence < 1e-10 && r.hermiticity < 1e-10);
        assert!(FermionProjector::new(&sp, 0).is_err());
        assert!(FermionProjector::new(&sp, 2).is_err());
    }

    #[test]
    fn intrinsic_spectra_match_full_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sp = FermionSpace::new(4, 3).unwrap();
        let x = {
            let mut v = linalg::gaussian_vector(&mut rng, sp.dim());
            linalg::normalize(&mut v);
            v
        };
        let full = embed_fermion_state(&x, &sp).unwrap();
        let full_sv = schmidt_decompose(&full, &Cut::new(vec![0], 3).unwrap()).unwrap().coeffs;
        let intrinsic_sv = sv(&sp, 1, &x);
        for (a, b) in intrinsic_sv.iter().zip(&full_sv) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(full_sv[intrinsic_sv.len()..].iter().all(|&c| c < 1e-10));
    }

    #[test]
    fn slater_examples() {
        let sp = FermionSpace::new(4, 2).unwrap();
        let s = slater_state(&sp, &[0, 1]).unwrap();
        assert_eq!(s.amps()[0], linalg::ONE);
        assert!(slater_state(&sp, &[0]).is_err());
        assert!(slater_state(&sp, &[0, 4]).is_err());
        assert!(slater_state(&sp, &[1, 1]).is_err());

        let sp = FermionSpace::new(6, 3).unwrap();
        let s = slater_state(&sp, &[1, 3, 4]).unwrap();
        // unranking oracle: count lexicographically smaller 3-subsets
        let mut smaller = 0;
        for a in 0..6 {
            for b in a + 1..6 {
                for c in b + 1..6 {
                    if [a, b, c] < [1, 3, 4] {
                        smaller += 1;
                    }
                }
            }
        }
        assert_eq!(s.amps()[smaller], linalg::ONE);
        let coeffs = sv(&sp, 1, s.amps());
        for c in &coeffs[..3] {
            assert!((c * c - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn yang_examples() {
        let sp = FermionSpace::new(4, 2).unwrap();
        let y = yang_state(&sp).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let i12 = sp.rank_of(&[0, 1]).unwrap();
        let i34 = sp.rank_of(&[2, 3]).unwrap();
        for (i, a) in y.amps().iter().enumerate() {
            let want = if i == i12 || i == i34 { h } else { 0.0 };
            assert!((a - C64::new(want, 0.0)).norm() < 1e-14);
        }

        let sp = FermionSpace::new(8, 4).unwrap();
        let y = yang_state(&sp).unwrap();
        let top = sv(&sp, 2, y.amps())[0];
        assert!((top * top - 0.25).abs() < 1e-12);

        let sp = FermionSpace::new(6, 4).unwrap();
        let y = yang_state(&sp).unwrap();
        let p = FermionProjector::new(&sp, 2).unwrap();
        let v = p.isometry().embed(y.amps());
        assert!(linalg::norm(&linalg::sub(&p.apply(&v), &v)) < 1e-10);

        assert!(yang_state(&FermionSpace::new(5, 2).unwrap()).is_err());
        assert!(yang_state(&FermionSpace::new(6, 3).unwrap()).is_err());
    }

    #[test]
    fn wedge_of_overlapping_states_vanishes() {
        let sp1 = FermionSpace::new(4, 1).unwrap();
        let e0 = slater_state(&sp1, &[0]).unwrap();
        let w = wedge(4, 1, e0.amps(), 1, e0.amps()).unwrap();
        assert!(w.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn embedding_examples() {
        let sp = FermionSpace::new(2, 2).unwrap();
        let e = embed_fermion_state(&[linalg::ONE], &sp).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO];
        assert!(linalg::norm(&linalg::sub(e.amps(), &want)) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let sp = FermionSpace::new(4, 3).unwrap();
        let x = linalg::gaussian_vector(&mut rng, sp.dim());
        let y = linalg::gaussian_vector(&mut rng, sp.dim());
        let ex = embed_fermion_state(&x, &sp).unwrap();
        let ey = embed_fermion_state(&y, &sp).unwrap();
        assert!((ex.inner(&ey) - linalg::inner(&x, &y)).norm() < 1e-12);
        let p = antisymmetric_projector(4, 3);
        assert!(linalg::norm(&linalg::sub(&p.apply(ex.amps()), ex.amps())) < 1e-12);
    }

    #[test]
    fn yang_symmetry_examples() {
        let id = Mat::<C64>::identity(4, 4);
        assert_eq!(yang_pairing_defect(id.as_ref()), 0.0);
        for d in [4, 6] {
            for seed in 0..5 {
                let u = yang_symmetry_unitary(d, seed).unwrap();
                assert!(linalg::unitarity_defect(u.as_ref()) < 1e-10);
                assert!(yang_pairing_defect(u.as_ref()) < 1e-10);
            }
        }
        assert!(yang_symmetry_unitary(5, 0).is_err());
    }
}
