//! JSON run configurations. Every block rejects unknown keys and is
//! checked before any computation starts.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use schmidt_core::applications::{ProbeSpace, ProbeTarget, Table1Row};
use schmidt_core::measures::NormSpec;
use schmidt_core::optimizer::IterationConfig;
use schmidt_core::subspaces::{
    antisymmetric_projector, channel_image_projector, random_subspace_projector, span_projector, symmetric_projector,
    ChannelSpec, ChannelSpecJson, FermionProjector, FermionSpace, IdentityProjector, SubspaceProjector,
};
use schmidt_core::tensor::{Cut, PureState};
use schmidt_core::C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub threads: Option<usize>,
    pub iteration: Option<IterationConfig>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    /// Command-specific block, parsed by the command.
    pub params: Option<Value>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// The command block, or its default when absent.
    pub fn params<T: DeserializeOwned + Default>(&self) -> Result<T, CliError> {
        match &self.params {
            None => Ok(T::default()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("params: {e}"))),
        }
    }
}

/// 1-based factor indices to a 0-based cut.
pub fn cut_from_one_based(side: &[usize], n_factors: usize) -> Result<Cut, CliError> {
    if side.iter().any(|&i| i == 0) {
        return Err(CliError::Config("cut indices are 1-based".into()));
    }
    Ok(Cut::new(side.iter().map(|i| i - 1).collect(), n_factors)?)
}

fn pairs_to_complex(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

/// `{"dims": [..], "amps": [[re, im], ..]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub amps: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn load(path: &Path) -> Result<PureState, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let f: StateFile = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let state = PureState::new(f.dims, pairs_to_complex(&f.amps))?;
        state.check_normalized()?;
        Ok(state)
    }
}

/// Constraint subspaces for `maximize`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SpaceSpec {
    Identity { dims: Vec<usize> },
    Symmetric { d: usize, n: usize },
    Antisymmetric { d: usize, n: usize },
    /// `∧^N C^d` split as `∧^K ⊗ ∧^{N−K}`.
    Fermion { d: usize, n: usize, split: usize },
    Random { dims: Vec<usize>, dim: usize, seed: u64 },
    Span { dims: Vec<usize>, vectors: Vec<Vec<[f64; 2]>> },
    Channel { channel: ChannelFile },
}

impl SpaceSpec {
    pub fn build(&self) -> Result<(Arc<dyn SubspaceProjector>, Vec<usize>), CliError> {
        Ok(match self {
            Self::Identity { dims } => (Arc::new(IdentityProjector::new(dims.iter().product())), dims.clone()),
            Self::Symmetric { d, n } => (Arc::new(symmetric_projector(*d, *n)), vec![*d; *n]),
            Self::Antisymmetric { d, n } => (Arc::new(antisymmetric_projector(*d, *n)), vec![*d; *n]),
            Self::Fermion { d, n, split } => {
                let proj = FermionProjector::new(&FermionSpace::new(*d, *n)?, *split)?;
                let dims = proj.dims();
                (Arc::new(proj), dims)
            }
            Self::Random { dims, dim, seed } => {
                (Arc::new(random_subspace_projector(dims.iter().product(), *dim, *seed)?), dims.clone())
            }
            Self::Span { dims, vectors } => {
                let vs: Vec<Vec<C64>> = vectors.iter().map(|v| pairs_to_complex(v)).collect();
                (Arc::new(span_projector(&vs)?), dims.clone())
            }
            Self::Channel { channel } => {
                let proj = channel_image_projector(&channel.build()?);
                let dims = proj.dims();
                (Arc::new(proj), dims)
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// 1-based factor indices on side A.
    pub cut: Vec<usize>,
    pub p: f64,
    pub k: usize,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl TermSpec {
    pub fn build(&self, n_factors: usize) -> Result<(Cut, NormSpec), CliError> {
        let spec = match &self.weights {
            Some(w) => {
                if w.len() != self.k {
                    return Err(CliError::Config(format!("{} weights given for k = {}", w.len(), self.k)));
                }
                NormSpec::weighted(self.p, w.clone())?
            }
            None => NormSpec::new(self.p, self.k)?,
        };
        Ok((cut_from_one_based(&self.cut, n_factors)?, spec))
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximizeParams {
    pub space: Option<SpaceSpec>,
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmeParams {
    pub dims: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FermionMode {
    /// Largest `‖·‖_{p,k}` of the split, with the known optimum as target.
    #[default]
    Extremal,
    /// Minimal Rényi entropy of the `K`-particle density matrix.
    Entropy,
    /// Compare the optimum with the Yang state.
    Yang,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FermionParams {
    pub d: usize,
    pub n: usize,
    pub split: usize,
    pub mode: FermionMode,
    pub p: f64,
    pub k: usize,
    pub alpha: f64,
}

impl Default for FermionParams {
    fn default() -> Self {
        Self { d: 0, n: 0, split: 1, mode: FermionMode::Extremal, p: 2.0, k: 1, alpha: 2.0 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarietyParams {
    pub space: Option<ProbeSpace>,
    pub target: Option<ProbeTarget>,
    pub trials: Option<usize>,
    pub start_dim: Option<usize>,
}

/// A named channel or explicit Kraus operators.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelFile {
    Named(NamedChannel),
    Kraus(ChannelSpecJson),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum NamedChannel {
    Identity { d: usize },
    Dephasing { q: f64 },
    Depolarizing { d: usize },
}

impl ChannelFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: not a channel: {e}", path.display())))
    }

    pub fn build(&self) -> Result<ChannelSpec, CliError> {
        Ok(match self {
            Self::Named(NamedChannel::Identity { d }) => ChannelSpec::identity(*d),
            Self::Named(NamedChannel::Dephasing { q }) => ChannelSpec::dephasing(*q)?,
            Self::Named(NamedChannel::Depolarizing { d }) => ChannelSpec::completely_depolarizing(*d)?,
            Self::Kraus(k) => ChannelSpec::from_json_spec(k)?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub channel: Option<ChannelFile>,
    /// When present, compares `E ⊗ F` with `E` and `F` separately.
    pub second: Option<ChannelFile>,
    pub alpha: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self { channel: None, second: None, alpha: 2.0 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Params {
    pub rows: Option<Vec<Table1Row>>,
    pub csv: Option<PathBuf>,
}
