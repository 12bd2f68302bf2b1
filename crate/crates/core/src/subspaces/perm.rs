//! (Anti)symmetrizers on `(C^d)^{⊗N}`, applied orbit by orbit: each
//! sorted index tuple is averaged over its `N!` permutations and the
//! average is written back with the permutation signs.

use num_complex::Complex64 as C64;

use super::{binomial, SubspaceProjector};
use crate::linalg::ZERO;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
}

#[derive(Clone, Debug)]
pub struct PermutationProjector {
    d: usize,
    n: usize,
    symmetry: Symmetry,
    /// all permutations of `0..n` with their signs
    perms: Vec<(Vec<usize>, f64)>,
}

pub fn antisymmetric_projector(d: usize, n: usize) -> PermutationProjector {
    PermutationProjector::new(d, n, Symmetry::Antisymmetric)
}

pub fn symmetric_projector(d: usize, n: usize) -> PermutationProjector {
    PermutationProjector::new(d, n, Symmetry::Symmetric)
}

/// Permutations of `0..n` in lexicographic order, each with its sign.
pub(crate) fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        out.push((p.clone(), if inversions % 2 == 0 { 1.0 } else { -1.0 }));
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

impl PermutationProjector {
    pub fn new(d: usize, n: usize, symmetry: Symmetry) -> Self {
        Self { d, n, symmetry, perms: signed_permutations(n) }
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.d; self.n]
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    fn flat(&self, tuple: &[usize], perm: &[usize]) -> usize {
        perm.iter().fold(0, |acc, &slot| acc * self.d + tuple[slot])
    }

    /// Visits sorted tuples: strictly increasing for the antisymmetrizer
    /// (tuples with repeats are annihilated), nondecreasing otherwise.
    fn for_each_orbit(&self, mut f: impl FnMut(&[usize])) {
        let (d, n) = (self.d, self.n);
        let strict = self.symmetry == Symmetry::Antisymmetric;
        if n == 0 || (strict && n > d) {
            return;
        }
        let mut t: Vec<usize> = if strict { (0..n).collect() } else { vec![0; n] };
        loop {
            f(&t);
            // advance to the next sorted tuple
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                let max = if strict { d - (n - i) } else { d - 1 };
                if t[i] < max {
                    t[i] += 1;
                    for j in i + 1..n {
                        t[j] = if strict { t[j - 1] + 1 } else { t[j - 1] };
                    }
                    break;
                }
            }
        }
    }
}

impl SubspaceProjector for PermutationProjector {
    fn ambient_dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.ambient_dim());
        let mut out = vec![ZERO; v.len()];
        let norm = 1.0 / self.perms.len() as f64;
        let signed = self.symmetry == Symmetry::Antisymmetric;
        let mut idx = vec![0usize; self.perms.len()];
        self.for_each_orbit(|t| {
            let mut acc = ZERO;
            for (k, (p, s)) in self.perms.iter().enumerate() {
                idx[k] = self.flat(t, p);
                acc += if signed { v[idx[k]] * *s } else { v[idx[k]] };
            }
            acc *= norm;
            for (k, (_, s)) in self.perms.iter().enumerate() {
                out[idx[k]] = if signed { acc * *s } else { acc };
            }
        });
        out
    }

    fn rank(&self) -> Option<usize> {
        Some(match self.symmetry {
            Symmetry::Antisymmetric => binomial(self.d, self.n),
            Symmetry::Symmetric => binomial(self.d + self.n - 1, self.n),
        })
    }

    fn label(&self) -> String {
        match self.symmetry {
            Symmetry::Antisymmetric => format!("antisymmetric(d={}, N={})", self.d, self.n),
            Symmetry::Symmetric => format!("symmetric(d={}, N={})", self.d, self.n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::subspaces::{probe, trace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis(dim: usize, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; dim];
        v[i] = linalg::ONE;
        v
    }

    /// Reference path: `(1/N!) Σ_σ s(σ) U_σ v` on the full vector, with
    /// `(U_σ v)[i_1..i_N] = v[i_σ(1)..i_σ(N)]`.
    fn permutation_sum(d: usize, n: usize, signed: bool, v: &[C64]) -> Vec<C64> {
        let perms = signed_permutations(n);
        let total = d.pow(n as u32);
        let mut out = vec![ZERO; total];
        let mut digits = vec![0usize; n];
        for (flat, o) in out.iter_mut().enumerate() {
            let mut r = flat;
            for k in (0..n).rev() {
                digits[k] = r % d;
                r /= d;
            }
            for (p, s) in &perms {
                let src = p.iter().fold(0, |acc, &k| acc * d + digits[k]);
                *o += v[src] * if signed { *s } else { 1.0 };
            }
            *o /= perms.len() as f64;
        }
        out
    }

    #[test]
    fn permutation_signs() {
        let perms = signed_permutations(3);
        assert_eq!(perms.len(), 6);
        assert_eq!(perms[0], (vec![0, 1, 2], 1.0));
        assert_eq!(perms[1], (vec![0, 2, 1], -1.0));
        assert_eq!(perms[5], (vec![2, 1, 0], -1.0));
        assert_eq!(perms.iter().map(|p| p.1).sum::<f64>(), 0.0);
    }

    #[test]
    fn antisymmetrizer_on_two_qubits() {
        let p = antisymmetric_projector(2, 2);
        let out = p.apply(&basis(4, 1)); // |01>
        assert_eq!(out, vec![ZERO, C64::new(0.5, 0.0), C64::new(-0.5, 0.0), ZERO]);
        let zero = p.apply(&basis(4, 0)); // |00>
        assert!(zero.iter().all(|x| *x == ZERO));
    }

    #[test]
    fn symmetrizer_on_two_qubits() {
        let p = symmetric_projector(2, 2);
        let out = p.apply(&basis(4, 1));
        assert_eq!(out, vec![ZERO, C64::new(0.5, 0.0), C64::new(0.5, 0.0), ZERO]);
        assert_eq!(p.rank(), Some(3));
    }

    #[test]
    fn traces_match_binomials() {
        assert!((trace(&antisymmetric_projector(4, 2), 0, 0) - 6.0).abs() < 1e-12);
        assert!((trace(&symmetric_projector(3, 3), 0, 0) - 10.0).abs() < 1e-12);
        assert!((trace(&antisymmetric_projector(3, 4), 0, 0)).abs() < 1e-12);
        assert_eq!(antisymmetric_projector(3, 4).rank(), Some(0));
    }

    #[test]
    fn orbit_path_matches_permutation_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (d, n) in [(2usize, 2usize), (3, 2), (3, 3), (4, 3), (2, 4)] {
            let v = linalg::gaussian_vector(&mut rng, d.pow(n as u32));
            for (proj, signed) in [(antisymmetric_projector(d, n), true), (symmetric_projector(d, n), false)] {
                let fast = proj.apply(&v);
                let slow = permutation_sum(d, n, signed, &v);
                assert!(linalg::norm(&linalg::sub(&fast, &slow)) < 1e-12, "d={d} n={n}");
            }
        }
    }

    #[test]
    fn probes_pass() {
        for p in [antisymmetric_projector(3, 3), symmetric_projector(3, 3), antisymmetric_projector(4, 2)] {
            let r = probe(&p, 20, 5);
            assert!(r.idempotence < 1e-10 && r.hermiticity < 1e-10, "{r:?}");
        }
    }
}
