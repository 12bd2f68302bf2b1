//! Dense multipartite pure states, bipartite reshaping, Schmidt
//! decompositions and reduced density matrices.
//!
//! Amplitudes are stored factor-major with the last factor varying fastest.
//! Every module uses this single layout; the reshaping for a cut keeps the
//! original factor order inside each side.

use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};

/// Coefficients below this are exact zeros for rank counting.
pub const RANK_TOL: f64 = 1e-12;
/// Accepted deviation from unit norm at operation boundaries.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter(format!(
                "local dimensions must be positive, got {dims:?}"
            )));
        }
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(Error::DimensionMismatch { expected: total, got: amps.len() });
        }
        Ok(Self { dims, amps })
    }

    /// Computational basis state with the given flat index.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range {total}")));
        }
        let mut amps = vec![ZERO; total];
        amps[index] = linalg::ONE;
        Self::new(dims, amps)
    }

    /// Rescales to unit norm.
    pub fn normalized(mut self) -> Result<Self> {
        let n = linalg::normalize(&mut self.amps);
        if n == 0.0 {
            return Err(Error::Normalization { norm: 0.0 });
        }
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization { norm: n });
        }
        Ok(())
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> C64 {
        linalg::inner(&self.amps, &other.amps)
    }
}

/// Bipartition of the tensor factors. Factor indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cut {
    side_a: Vec<usize>,
}

impl Cut {
    /// `side_a` must be strictly increasing and a nonempty proper subset of
    /// `0..n_factors`.
    pub fn new(side_a: Vec<usize>, n_factors: usize) -> Result<Self> {
        let cut = Self { side_a };
        cut.validate(n_factors)?;
        Ok(cut)
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self, n_factors: usize) -> Vec<usize> {
        (0..n_factors).filter(|f| !self.side_a.contains(f)).collect()
    }

    pub fn validate(&self, n_factors: usize) -> Result<()> {
        if self.side_a.is_empty() {
            return Err(Error::CutShape("side A is empty".into()));
        }
        if self.side_a.len() >= n_factors {
            return Err(Error::CutShape(format!(
                "side A {:?} is not a proper subset of {n_factors} factors",
                self.side_a
            )));
        }
        if self.side_a.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::CutShape(format!("side A {:?} is not strictly increasing", self.side_a)));
        }
        if let Some(&f) = self.side_a.iter().find(|&&f| f >= n_factors) {
            return Err(Error::CutShape(format!("factor {f} out of range for {n_factors} factors")));
        }
        Ok(())
    }

    pub fn shape(&self, dims: &[usize]) -> Result<CutShape> {
        self.validate(dims.len())?;
        let d_a: usize = self.side_a.iter().map(|&f| dims[f]).product();
        let d_b: usize = dims.iter().product::<usize>() / d_a;
        Ok(CutShape { d_a, d_b, n_s: d_a.min(d_b) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutShape {
    pub d_a: usize,
    pub d_b: usize,
    pub n_s: usize,
}

/// Precomputed index map between flat amplitudes and the `d_A × d_B`
/// matrix of a cut: `index[a * d_B + b]` is the flat amplitude index.
#[derive(Clone, Debug)]
pub struct CutLayout {
    cut: Cut,
    shape: CutShape,
    index: Vec<usize>,
}

impl CutLayout {
    pub fn new(dims: &[usize], cut: &Cut) -> Result<Self> {
        let shape = cut.shape(dims)?;
        let n = dims.len();
        let in_a: Vec<bool> = (0..n).map(|f| cut.side_a.contains(&f)).collect();
        let total: usize = dims.iter().product();
        let mut index = vec![0usize; total];
        let mut digits = vec![0usize; n];
        for flat in 0..total {
            // digits of `flat`, last factor fastest
            let mut rem = flat;
            for f in (0..n).rev() {
                digits[f] = rem % dims[f];
                rem /= dims[f];
            }
            let (mut a, mut b) = (0usize, 0usize);
            for f in 0..n {
                if in_a[f] {
                    a = a * dims[f] + digits[f];
                } else {
                    b = b * dims[f] + digits[f];
                }
            }
            index[a * shape.d_b + b] = flat;
        }
        Ok(Self { cut: cut.clone(), shape, index })
    }

    pub fn cut(&self) -> &Cut {
        &self.cut
    }

    pub fn shape(&self) -> CutShape {
        self.shape
    }

    /// Flat amplitude index of matrix entry `(a, b)`.
    pub fn flat_index(&self, a: usize, b: usize) -> usize {
        self.index[a * self.shape.d_b + b]
    }

    pub fn reshape(&self, amps: &[C64]) -> Mat<C64> {
        let d_b = self.shape.d_b;
        Mat::from_fn(self.shape.d_a, d_b, |a, b| amps[self.index[a * d_b + b]])
    }

    /// Inverse of [`CutLayout::reshape`].
    pub fn flatten(&self, m: MatRef<'_, C64>) -> Vec<C64> {
        let d_b = self.shape.d_b;
        let mut out = vec![ZERO; self.index.len()];
        for a in 0..self.shape.d_a {
            for b in 0..d_b {
                out[self.index[a * d_b + b]] = m[(a, b)];
            }
        }
        out
    }

    /// `out += Σ_i w_i |left_i⟩⊗|right_i⟩` in flat amplitude order, over the
    /// first `weights.len()` Schmidt pairs.
    pub fn accumulate_pairs(&self, sd: &SchmidtDecomposition, weights: &[f64], out: &mut [C64]) {
        let d_b = self.shape.d_b;
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let left = sd.left.col(i);
            let right = sd.right.col(i);
            for a in 0..self.shape.d_a {
                let la = left[a] * w;
                if la == ZERO {
                    continue;
                }
                let row = &self.index[a * d_b..(a + 1) * d_b];
                for (b, &flat) in row.iter().enumerate() {
                    out[flat] += la * right[b];
                }
            }
        }
    }

    /// Schmidt decomposition without the normalization precondition.
    pub fn decompose(&self, amps: &[C64]) -> Result<SchmidtDecomposition> {
        SchmidtDecomposition::from_matrix(self.reshape(amps).as_ref())
    }
}

/// `ψ = Σ λ_i |left_i⟩⊗|right_i⟩`; left and right vectors are matrix columns.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coeffs: Vec<f64>,
    pub left: Mat<C64>,
    pub right: Mat<C64>,
}

impl SchmidtDecomposition {
    /// Thin SVD `M = U Σ V†`, so that `right_i = conj(V_i)`.
    pub fn from_matrix(m: MatRef<'_, C64>) -> Result<Self> {
        let svd = m.thin_svd().map_err(|e| Error::Backend(format!("{e:?}")))?;
        let s = svd.S().column_vector();
        let n_s = s.nrows();
        let mut order: Vec<usize> = (0..n_s).collect();
        let coeffs_raw: Vec<f64> = (0..n_s).map(|i| s[i].re.max(0.0)).collect();
        // The backend already returns nonincreasing values; keep the order stable.
        if coeffs_raw.windows(2).any(|w| w[0] < w[1]) {
            order.sort_by(|&i, &j| coeffs_raw[j].total_cmp(&coeffs_raw[i]));
        }
        let u = svd.U();
        let v = svd.V();
        let coeffs = order.iter().map(|&i| coeffs_raw[i]).collect();
        let left = Mat::from_fn(u.nrows(), n_s, |r, c| u[(r, order[c])]);
        let right = Mat::from_fn(v.nrows(), n_s, |r, c| v[(r, order[c])].conj());
        Ok(Self { coeffs, left, right })
    }

    pub fn n_s(&self) -> usize {
        self.coeffs.len()
    }

    pub fn rank(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c > RANK_TOL).count()
    }

    /// The `d_A × d_B` matrix `Σ λ_i left_i right_iᵀ`.
    pub fn to_matrix(&self) -> Mat<C64> {
        let (d_a, d_b) = (self.left.nrows(), self.right.nrows());
        let mut m = Mat::<C64>::zeros(d_a, d_b);
        for (i, &l) in self.coeffs.iter().enumerate() {
            for b in 0..d_b {
                let rb = self.right[(b, i)] * l;
                for a in 0..d_a {
                    m[(a, b)] += self.left[(a, i)] * rb;
                }
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    entries: Mat<C64>,
}

impl DensityMatrix {
    /// Wraps a matrix after checking Hermiticity (1e-12) and squareness.
    pub fn new(entries: Mat<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..=i {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > 1e-12 {
                    return Err(Error::InvalidParameter(format!("matrix not Hermitian at ({i},{j})")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self { entries: Mat::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO }) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> MatRef<'_, C64> {
        self.entries.as_ref()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    /// Descending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(self.entries.as_ref())
    }
}

pub fn reshape_for_cut(state: &PureState, cut: &Cut) -> Result<Mat<C64>> {
    Ok(CutLayout::new(state.dims(), cut)?.reshape(state.amps()))
}

pub fn schmidt_decompose(state: &PureState, cut: &Cut) -> Result<SchmidtDecomposition> {
    state.check_normalized()?;
    CutLayout::new(state.dims(), cut)?.decompose(state.amps())
}

/// `ρ_A = Tr_B |ψ⟩⟨ψ|`, computed as `M M†` of the cut matrix.
pub fn reduced_density_matrix(state: &PureState, cut: &Cut) -> Result<DensityMatrix> {
    state.check_normalized()?;
    let m = reshape_for_cut(state, cut)?;
    let rho = &m * m.adjoint();
    let n = rho.nrows();
    // symmetrize away rounding so the Hermiticity check is exact
    let rho = Mat::from_fn(n, n, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * 0.5);
    DensityMatrix::new(rho)
}

/// I.i.d. standard complex Gaussian amplitudes, normalized.
pub fn random_state(dims: &[usize], seed: u64) -> Result<PureState> {
    let total: usize = dims.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = linalg::gaussian_vector(&mut rng, total);
    PureState::new(dims.to_vec(), amps)?.normalized()
}
