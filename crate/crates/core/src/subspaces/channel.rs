//! Channels given by Kraus operators and the projector onto the image of
//! their Stinespring isometry `V = Σ_i V_i ⊗ |b_i⟩`.

use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::SubspaceProjector;
use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};

/// Trace-preservation tolerance, entrywise on `Σ V_i† V_i − I`.
const TP_TOL: f64 = 1e-10;

/// Kraus operators `V_i : C^{d_S} → C^{d_A}`.
#[derive(Clone, Debug)]
pub struct ChannelSpec {
    d_s: usize,
    d_a: usize,
    kraus: Vec<Mat<C64>>,
}

/// JSON form: row-major matrices of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpecJson {
    pub d_s: usize,
    pub d_a: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelSpec {
    pub fn new(kraus: Vec<Mat<C64>>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one Kraus operator".into()))?;
        let (d_a, d_s) = first.shape();
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (d_a, d_s)) {
            return Err(Error::InvalidParameter(format!(
                "Kraus operator of shape {:?}, expected {:?}",
                bad.shape(),
                (d_a, d_s)
            )));
        }
        let mut sum = Mat::<C64>::zeros(d_s, d_s);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        for i in 0..d_s {
            for j in 0..d_s {
                let want = if i == j { 1.0 } else { 0.0 };
                if (sum[(i, j)] - C64::new(want, 0.0)).norm() > TP_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "Kraus operators are not trace preserving: (Σ V†V)[{i},{j}] = {}",
                        sum[(i, j)]
                    )));
                }
            }
        }
        Ok(Self { d_s, d_a, kraus })
    }

    pub fn from_json_spec(spec: &ChannelSpecJson) -> Result<Self> {
        let mut kraus = Vec::with_capacity(spec.kraus.len());
        for (n, rows) in spec.kraus.iter().enumerate() {
            if rows.len() != spec.d_a || rows.iter().any(|r| r.len() != spec.d_s) {
                return Err(Error::InvalidParameter(format!(
                    "Kraus operator {n} is not {}x{}",
                    spec.d_a, spec.d_s
                )));
            }
            kraus.push(Mat::from_fn(spec.d_a, spec.d_s, |i, j| {
                let [re, im] = rows[i][j];
                C64::new(re, im)
            }));
        }
        Self::new(kraus)
    }

    pub fn to_json_spec(&self) -> ChannelSpecJson {
        ChannelSpecJson {
            d_s: self.d_s,
            d_a: self.d_a,
            kraus: self
                .kraus
                .iter()
                .map(|k| {
                    (0..self.d_a)
                        .map(|i| (0..self.d_s).map(|j| [k[(i, j)].re, k[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self { d_s: d, d_a: d, kraus: vec![Mat::identity(d, d)] }
    }

    /// Qubit dephasing with Kraus operators `{√(1−q) I, √q Z}`.
    pub fn dephasing(q: f64) -> Result<Self> {
        let a = (1.0 - q).sqrt();
        let b = q.sqrt();
        let diag = |x: f64, y: f64| {
            Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => C64::new(x, 0.0),
                (1, 1) => C64::new(y, 0.0),
                _ => ZERO,
            })
        };
        Self::new(vec![diag(a, a), diag(b, -b)])
    }

    /// `ρ ↦ Tr(ρ) I/d` through the `d²` Weyl operators `X^j Z^k / d`.
    pub fn completely_depolarizing(d: usize) -> Result<Self> {
        let omega = |m: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / d as f64);
        let mut kraus = Vec::with_capacity(d * d);
        for j in 0..d {
            for k in 0..d {
                kraus.push(Mat::from_fn(d, d, |r, c| {
                    if r == (c + j) % d {
                        omega((k * c) % d) / d as f64
                    } else {
                        ZERO
                    }
                }));
            }
        }
        Self::new(kraus)
    }

    /// `E ⊗ F` with Kraus operators `V_i ⊗ W_j` (index of `F` fastest).
    pub fn tensor(&self, other: &ChannelSpec) -> Result<Self> {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|v| other.kraus.iter().map(move |w| linalg::kron(v.as_ref(), w.as_ref())))
            .collect();
        Self::new(kraus)
    }

    pub fn input_dim(&self) -> usize {
        self.d_s
    }

    pub fn output_dim(&self) -> usize {
        self.d_a
    }

    /// Ancilla dimension, one basis vector per Kraus operator.
    pub fn ancilla_dim(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[Mat<C64>] {
        &self.kraus
    }

    /// `Σ V_i ρ V_i†`
    pub fn apply(&self, rho: MatRef<'_, C64>) -> Mat<C64> {
        let mut out = Mat::<C64>::zeros(self.d_a, self.d_a);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Stinespring isometry as a `(d_A·d_B) × d_S` matrix, row `a·d_B + i`.
    pub fn isometry(&self) -> Mat<C64> {
        let n = self.kraus.len();
        Mat::from_fn(self.d_a * n, self.d_s, |row, s| self.kraus[row % n][(row / n, s)])
    }
}

/// `P = V V†` on `C^{d_A} ⊗ C^{d_B}`.
#[derive(Clone, Debug)]
pub struct ChannelImageProjector {
    isometry: Mat<C64>,
    dims: [usize; 2],
}

pub fn channel_image_projector(channel: &ChannelSpec) -> ChannelImageProjector {
    ChannelImageProjector {
        isometry: channel.isometry(),
        dims: [channel.output_dim(), channel.ancilla_dim()],
    }
}

impl ChannelImageProjector {
    /// `[d_A, d_B]`
    pub fn dims(&self) -> Vec<usize> {
        self.dims.to_vec()
    }

    pub fn isometry(&self) -> MatRef<'_, C64> {
        self.isometry.as_ref()
    }

    /// `V|φ⟩`
    pub fn embed(&self, phi: &[C64]) -> Vec<C64> {
        linalg::mat_vec(self.isometry.as_ref(), phi)
    }
}

impl SubspaceProjector for ChannelImageProjector {
    fn ambient_dim(&self) -> usize {
        self.isometry.nrows()
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let m = &self.isometry;
        let coeffs: Vec<C64> = (0..m.ncols())
            .map(|s| (0..m.nrows()).map(|r| m[(r, s)].conj() * v[r]).sum())
            .collect();
        linalg::mat_vec(self.isometry.as_ref(), &coeffs)
    }

    fn rank(&self) -> Option<usize> {
        Some(self.isometry.ncols())
    }

    fn label(&self) -> String {
        format!(
            "channel-image(d_S={}, d_A={}, d_B={})",
            self.isometry.ncols(),
            self.dims[0],
            self.dims[1]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspaces::probe;
    use crate::tensor::{schmidt_decompose, Cut, PureState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_density(rng: &mut ChaCha8Rng, d: usize) -> Mat<C64> {
        let g = Mat::from_fn(d, d, |_, _| linalg::gaussian_vector(rng, 1)[0]);
        let rho = &g * g.adjoint();
        let tr: f64 = (0..d).map(|i| rho[(i, i)].re).sum();
        Mat::from_fn(d, d, |i, j| rho[(i, j)] / tr)
    }

    /// `Tr_B[V ρ V†]`, the second factor being the ancilla.
    fn partial_trace_b(m: MatRef<'_, C64>, d_a: usize, d_b: usize) -> Mat<C64> {
        Mat::from_fn(d_a, d_a, |a, a2| (0..d_b).map(|b| m[(a * d_b + b, a2 * d_b + b)]).sum())
    }

    #[test]
    fn unitary_channel_image() {
        let ch = ChannelSpec::identity(3);
        let p = channel_image_projector(&ch);
        assert_eq!(p.rank(), Some(3));
        assert_eq!(p.dims(), vec![3, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = linalg::gaussian_vector(&mut rng, 3);
        let v = p.embed(&phi);
        let s = PureState::new(p.dims(), v.clone()).unwrap().normalized().unwrap();
        let sd = schmidt_decompose(&s, &Cut::new(vec![0], 2).unwrap()).unwrap();
        assert_eq!(sd.rank(), 1);
        assert!(linalg::norm(&linalg::sub(&p.apply(&v), &v)) < 1e-12);
    }

    #[test]
    fn dephasing_stinespring_consistency() {
        let ch = ChannelSpec::dephasing(0.5).unwrap();
        let v = ch.isometry();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let rho = random_density(&mut rng, 2);
            let direct = ch.apply(rho.as_ref());
            let big = &v * &rho * v.adjoint();
            let via = partial_trace_b(big.as_ref(), 2, ch.ancilla_dim());
            for i in 0..2 {
                for j in 0..2 {
                    assert!((direct[(i, j)] - via[(i, j)]).norm() < 1e-12);
                }
            }
        }
        let p = channel_image_projector(&ch);
        let r = probe(&p, 20, 4);
        assert!(r.idempotence < 1e-10 && r.hermiticity < 1e-10);
    }

    #[test]
    fn depolarizing_output_is_maximally_mixed() {
        let ch = ChannelSpec::completely_depolarizing(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(&mut rng, 3);
        let out = ch.apply(rho.as_ref());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((out[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let half = Mat::from_fn(2, 2, |i, j| if i == j { C64::new(0.5, 0.0) } else { ZERO });
        assert!(ChannelSpec::new(vec![half]).is_err());
        assert!(ChannelSpec::new(vec![]).is_err());
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let ch = ChannelSpec::dephasing(0.3).unwrap();
        let text = serde_json::to_string(&ch.to_json_spec()).unwrap();
        let back: ChannelSpecJson = serde_json::from_str(&text).unwrap();
        let ch2 = ChannelSpec::from_json_spec(&back).unwrap();
        assert_eq!(ch2.kraus(), ch.kraus());

        let bad = r#"{"d_s": 2, "d_a": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]], "extra": 1}"#;
        assert!(serde_json::from_str::<ChannelSpecJson>(bad).is_err());
        let wrong_shape = r#"{"d_s": 2, "d_a": 2, "kraus": [[[[1,0]]]]}"#;
        let spec: ChannelSpecJson = serde_json::from_str(wrong_shape).unwrap();
        assert!(ChannelSpec::from_json_spec(&spec).is_err());
    }

    #[test]
    fn tensor_product_channel() {
        let e = ChannelSpec::dephasing(0.5).unwrap();
        let f = ChannelSpec::identity(2);
        let ef = e.tensor(&f).unwrap();
        assert_eq!((ef.input_dim(), ef.output_dim(), ef.ancilla_dim()), (4, 4, 2));
    }
}
