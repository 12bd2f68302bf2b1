//! Schmidt norms, Rényi and von Neumann entropies, and the variational
//! lower bound. Logarithms are natural.

use faer::MatRef;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{schmidt_decompose, Cut, DensityMatrix, PureState, RANK_TOL};
use crate::C64;

/// Eigenvalues below this are dropped from `Tr ρ^α` when `α < 1`.
const SPECTRUM_FLOOR: f64 = 1e-14;

/// `‖ψ‖_{p,k} = (Σ_{i≤k} c_i λ_i^p)^{1/p}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub k: usize,
    /// `c_1 ≥ … ≥ c_k ≥ 0`; `None` means all ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl NormSpec {
    pub fn new(p: f64, k: usize) -> Result<Self> {
        let spec = Self { p, k, weights: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn weighted(p: f64, weights: Vec<f64>) -> Result<Self> {
        let spec = Self { p, k: weights.len(), weights: Some(weights) };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidNorm(format!("p must be ≥ 1, got {}", self.p)));
        }
        if self.k == 0 {
            return Err(Error::InvalidNorm("k must be ≥ 1".into()));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.k {
                return Err(Error::InvalidNorm(format!("{} weights given for k = {}", w.len(), self.k)));
            }
            if w.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
                return Err(Error::InvalidNorm("weights must be finite and nonnegative".into()));
            }
            if w.windows(2).any(|p| p[0] < p[1]) {
                return Err(Error::InvalidNorm("weights must be nonincreasing".into()));
            }
        }
        Ok(())
    }

    /// `c_i` for `i < k`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// `k` clamped to `n_s`, with a warning when clamping happens.
    pub fn effective_k(&self, n_s: usize) -> usize {
        if self.k > n_s {
            warn!("k = {} exceeds n_s = {n_s}; clamping", self.k);
        }
        self.k.min(n_s)
    }

    /// `Σ_{i≤k} c_i λ_i^p` for descending coefficients.
    pub fn power_sum(&self, coeffs: &[f64]) -> f64 {
        let k = self.effective_k(coeffs.len());
        (0..k).map(|i| self.weight(i) * coeffs[i].powf(self.p)).sum()
    }

    pub fn norm_of(&self, coeffs: &[f64]) -> f64 {
        self.power_sum(coeffs).powf(1.0 / self.p)
    }
}

pub fn schmidt_norm(state: &PureState, cut: &Cut, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    let sd = schmidt_decompose(state, cut)?;
    Ok(spec.norm_of(&sd.coeffs))
}

/// `Tr ρ^α` from a spectrum; tiny eigenvalues are dropped for `α < 1`.
fn trace_power(eigs: &[f64], alpha: f64) -> f64 {
    eigs.iter()
        .map(|&e| e.max(0.0))
        .filter(|&e| alpha >= 1.0 || e > SPECTRUM_FLOOR)
        .map(|e| e.powf(alpha))
        .sum()
}

pub fn renyi_from_spectrum(eigs: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if alpha == 1.0 {
        return Err(Error::InvalidParameter("alpha = 1 is the von Neumann entropy".into()));
    }
    Ok(trace_power(eigs, alpha).ln() / (1.0 - alpha))
}

pub fn von_neumann_from_spectrum(eigs: &[f64]) -> f64 {
    -eigs.iter().filter(|&&e| e > 0.0).map(|&e| e * e.ln()).sum::<f64>()
}

/// `S_α(ρ) = log Tr[ρ^α] / (1 − α)`.
pub fn renyi_entropy(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    renyi_from_spectrum(&rho.eigenvalues()?, alpha)
}

/// `S(ρ) = −Tr ρ log ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(von_neumann_from_spectrum(&rho.eigenvalues()?))
}

/// Entropy of `ρ_A` computed from the Schmidt coefficients, using
/// `Tr ρ_A^α = ‖ψ‖_{2α,n_s}^{2α}`. `α = 1` gives the von Neumann entropy.
pub fn entropy_from_state(state: &PureState, cut: &Cut, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    let sd = schmidt_decompose(state, cut)?;
    let probs: Vec<f64> = sd.coeffs.iter().map(|l| l * l).collect();
    if alpha == 1.0 {
        return Ok(von_neumann_from_spectrum(&probs));
    }
    renyi_from_spectrum(&probs, alpha)
}

/// `Σ c_i |⟨ψ|u_i⊗v_i⟩|`, which never exceeds `Σ c_i λ_i`. The frames are
/// matrices whose columns are the `u_i` (length `d_A`) and `v_i` (length
/// `d_B`); they must be orthonormal.
pub fn variational_lower_bound(
    state: &PureState,
    cut: &Cut,
    weights: &[f64],
    u: MatRef<'_, C64>,
    v: MatRef<'_, C64>,
) -> Result<f64> {
    let m = crate::tensor::reshape_for_cut(state, cut)?;
    let k = weights.len();
    if u.nrows() != m.nrows() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: u.nrows() });
    }
    if v.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.ncols(), got: v.nrows() });
    }
    if u.ncols() < k || v.ncols() < k {
        return Err(Error::InvalidParameter(format!("frames have fewer than {k} columns")));
    }
    check_orthonormal(u, k)?;
    check_orthonormal(v, k)?;
    let mut total = 0.0;
    for (i, &c) in weights.iter().enumerate() {
        // ⟨ψ|u⊗v⟩ = Σ_ab conj(M_ab) u_a v_b
        let mut ov = C64::new(0.0, 0.0);
        for b in 0..m.ncols() {
            for a in 0..m.nrows() {
                ov += m[(a, b)].conj() * u[(a, i)] * v[(b, i)];
            }
        }
        total += c * ov.norm();
    }
    Ok(total)
}

fn check_orthonormal(f: MatRef<'_, C64>, k: usize) -> Result<()> {
    for i in 0..k {
        let ci = linalg::column(f, i);
        for j in 0..=i {
            let g = linalg::inner(&linalg::column(f, j), &ci);
            let want = if i == j { 1.0 } else { 0.0 };
            if (g - C64::new(want, 0.0)).norm() > 1e-10 {
                return Err(Error::InvalidParameter(format!("frame columns {j},{i} not orthonormal")));
            }
        }
    }
    Ok(())
}

/// Schmidt rank of a state across a cut.
pub fn schmidt_rank(state: &PureState, cut: &Cut) -> Result<usize> {
    let sd = schmidt_decompose(state, cut)?;
    Ok(sd.coeffs.iter().filter(|&&c| c > RANK_TOL).count())
}
