//! Probing the dimension of a variety of special states: random subspaces
//! of increasing dimension `D` are drawn inside a structured space, and
//! the optimizer decides whether each one meets the variety.

use std::sync::Arc;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{subspace_variety_dimension, RankProfile};
use crate::error::{Error, Result};
use crate::measures::NormSpec;
use crate::optimizer::{run_single, IterationConfig, Objective};
use crate::rng::derive_seed;
use crate::subspaces::{
    binomial, random_subspace_in, symmetric_projector, FermionProjector, FermionSpace, SubspaceProjector,
    DENSE_LIMIT,
};
use crate::tensor::Cut;
use crate::C64;

/// Hit tolerance: a subspace contains the target when the best value is
/// this close to it.
pub const HIT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProbeSpace {
    /// `C^{d_1} ⊗ … ⊗ C^{d_n}`
    Full { dims: Vec<usize> },
    /// `⊗^N_sym C^d`
    Symmetric { d: usize, n: usize },
    /// `∧^N C^d`
    Antisymmetric { d: usize, n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProbeTarget {
    /// Schmidt rank `≤ r` across the first cut.
    Rank { r: usize },
    /// Schmidt ranks `≤ r_i` across every single-factor cut.
    Ranks { r: Vec<usize> },
    MaxEntangled,
    Condensate,
    Slater,
    Yang,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarietyConfig {
    pub trials: usize,
    pub start_dim: usize,
    pub iteration: IterationConfig,
}

impl Default for VarietyConfig {
    fn default() -> Self {
        Self { trials: 5, start_dim: 1, iteration: IterationConfig::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DimProbe {
    pub dim: usize,
    pub hits: usize,
    pub trials: usize,
    pub best_values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarietyOutcome {
    pub space: ProbeSpace,
    pub target: ProbeTarget,
    pub target_value: f64,
    pub structure_dim: usize,
    /// Largest `D` at which no trial met the variety.
    pub max_dim: usize,
    pub expected: Option<usize>,
    /// Every trial at `max_dim + 1` met the variety.
    pub confirmed: bool,
    pub probes: Vec<DimProbe>,
}

/// Coordinates of the structured space and the objective detecting the
/// variety inside it.
struct Setup {
    coord_dim: usize,
    structure_dim: usize,
    embed: Box<dyn Fn(Vec<C64>) -> Vec<C64> + Send + Sync>,
    dims: Vec<usize>,
    terms: Vec<(Cut, NormSpec)>,
    target: f64,
}

fn two_factor(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::InvalidParameter(format!("this target needs two factors, got {dims:?}"))),
    }
}

fn setup(space: &ProbeSpace, target: &ProbeTarget) -> Result<Setup> {
    let first_cut = |n: usize| Cut::new(vec![0], n);
    match (space, target) {
        (ProbeSpace::Full { dims }, t) => {
            let total: usize = dims.iter().product();
            let (terms, value) = match t {
                ProbeTarget::Rank { r } => {
                    two_factor(dims)?;
                    (vec![(first_cut(2)?, NormSpec::new(2.0, *r)?)], 1.0)
                }
                ProbeTarget::MaxEntangled => {
                    let (a, b) = two_factor(dims)?;
                    let n_s = a.min(b);
                    (vec![(first_cut(2)?, NormSpec::new(1.0, n_s)?)], (n_s as f64).sqrt())
                }
                ProbeTarget::Ranks { r } => {
                    RankProfile::new(dims.clone(), r.clone())?;
                    let terms = r
                        .iter()
                        .enumerate()
                        .map(|(i, &ri)| Ok((Cut::new(vec![i], dims.len())?, NormSpec::new(2.0, ri)?)))
                        .collect::<Result<Vec<_>>>()?;
                    (terms, (r.len() as f64).sqrt())
                }
                _ => return Err(Error::InvalidParameter(format!("{t:?} is not defined on a full tensor space"))),
            };
            Ok(Setup { coord_dim: total, structure_dim: total, embed: Box::new(|v| v), dims: dims.clone(), terms, target: value })
        }
        (ProbeSpace::Symmetric { d, n }, t) => {
            let (d, n) = (*d, *n);
            if n < 2 || d < 1 {
                return Err(Error::InvalidParameter("symmetric space needs N >= 2".into()));
            }
            let proj = symmetric_projector(d, n);
            let (spec, value) = match t {
                ProbeTarget::Rank { r } if n == 2 => (NormSpec::new(2.0, *r)?, 1.0),
                ProbeTarget::MaxEntangled if n == 2 => (NormSpec::new(1.0, d)?, (d as f64).sqrt()),
                ProbeTarget::Condensate => (NormSpec::new(2.0, 1)?, 1.0),
                _ => return Err(Error::InvalidParameter(format!("{t:?} is not defined on the symmetric space with N={n}"))),
            };
            Ok(Setup {
                coord_dim: proj.ambient_dim(),
                structure_dim: binomial(d + n - 1, n),
                embed: Box::new(move |v| proj.apply(&v)),
                dims: vec![d; n],
                terms: vec![(first_cut(n)?, spec)],
                target: value,
            })
        }
        (ProbeSpace::Antisymmetric { d, n }, t) => {
            let (d, n) = (*d, *n);
            let space = FermionSpace::new(d, n)?;
            let (k_split, spec, value) = match t {
                ProbeTarget::Rank { r } if n == 2 => (1, NormSpec::new(2.0, *r)?, 1.0),
                ProbeTarget::MaxEntangled if n == 2 => (1, NormSpec::new(1.0, d)?, (d as f64).sqrt()),
                ProbeTarget::Slater => (1, NormSpec::new(2.0, 1)?, (1.0 / n as f64).sqrt()),
                ProbeTarget::Yang if d % 2 == 0 && n % 2 == 0 && n + 2 <= d => {
                    let (df, nf) = (d as f64, n as f64);
                    (2, NormSpec::new(2.0, 1)?, ((df - nf + 2.0) / ((nf - 1.0) * df)).sqrt())
                }
                _ => return Err(Error::InvalidParameter(format!("{t:?} is not defined on the antisymmetric space d={d}, N={n}"))),
            };
            let proj = FermionProjector::new(&space, k_split)?;
            let dims = proj.dims();
            Ok(Setup {
                coord_dim: space.dim(),
                structure_dim: space.dim(),
                embed: Box::new(move |v| proj.isometry().embed(&v)),
                dims,
                terms: vec![(first_cut(2)?, spec)],
                target: value,
            })
        }
    }
}

/// Predicted largest `D` for which a generic subspace misses the variety.
pub fn expected_dimension(space: &ProbeSpace, target: &ProbeTarget) -> Option<usize> {
    match (space, target) {
        (ProbeSpace::Full { dims }, ProbeTarget::Rank { r }) if dims.len() == 2 => {
            let (a, b, r) = (dims[0], dims[1], *r);
            (a * b).checked_sub(r * (a + b).checked_sub(r)?)
        }
        (ProbeSpace::Full { dims }, ProbeTarget::MaxEntangled) if dims.len() == 2 => {
            let m = dims[0].min(dims[1]);
            Some(m * m / 2)
        }
        (ProbeSpace::Full { dims }, ProbeTarget::Ranks { r }) => {
            let profile = RankProfile::new(dims.clone(), r.clone()).ok()?;
            dims.iter().product::<usize>().checked_sub(subspace_variety_dimension(&profile))
        }
        (ProbeSpace::Symmetric { d, n: 2 }, ProbeTarget::Rank { r }) => {
            // r(d − r/2 + 1/2) = r(2d − r + 1)/2
            binomial(d + 1, 2).checked_sub((r * (2 * d + 1).checked_sub(*r)?) / 2)
        }
        (ProbeSpace::Symmetric { d, n: 2 }, ProbeTarget::MaxEntangled) => Some(binomial(d + 1, 2) / 2),
        (ProbeSpace::Symmetric { d, n }, ProbeTarget::Condensate) => binomial(d + n - 1, *n).checked_sub(*d),
        (ProbeSpace::Antisymmetric { d, n: 2 }, ProbeTarget::Rank { r }) => {
            // r(d − r/2 − 1/2) = r(2d − r − 1)/2
            binomial(*d, 2).checked_sub((r * (2 * d).checked_sub(r + 1)?) / 2)
        }
        (ProbeSpace::Antisymmetric { d, n: 2 }, ProbeTarget::MaxEntangled) => Some(binomial(*d, 2) / 2),
        (ProbeSpace::Antisymmetric { d, n }, ProbeTarget::Slater) => {
            binomial(*d, *n).checked_sub(n * (d - n) + 1)
        }
        (ProbeSpace::Antisymmetric { d, n }, ProbeTarget::Yang) => {
            binomial(*d, *n).checked_sub(binomial(*d, 2).div_ceil(2))
        }
        _ => None,
    }
}

/// Scans `D = start_dim, start_dim + 1, …` until some trial meets the
/// variety, and reports the last `D` where none did.
pub fn variety_probe(space: &ProbeSpace, target: &ProbeTarget, config: &VarietyConfig) -> Result<VarietyOutcome> {
    config.iteration.validate()?;
    if config.trials == 0 || config.start_dim == 0 {
        return Err(Error::InvalidParameter("trials and start_dim must be positive".into()));
    }
    let s = setup(space, target)?;
    let ambient: usize = s.dims.iter().product();
    if ambient > DENSE_LIMIT || s.coord_dim > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: ambient.max(s.coord_dim), limit: DENSE_LIMIT });
    }
    let mut probes = Vec::new();
    for dim in config.start_dim..=s.structure_dim {
        let mut best_values = Vec::with_capacity(config.trials);
        for trial in 0..config.trials {
            let seed = derive_seed(derive_seed(config.iteration.seed, dim as u64), trial as u64);
            let proj = random_subspace_in(s.coord_dim, dim, seed, &s.embed)?;
            let proj: Arc<dyn SubspaceProjector> = Arc::new(proj);
            let objective = Objective::new(proj, s.dims.clone(), s.terms.clone())?;
            let iter_cfg = IterationConfig {
                seed: derive_seed(seed, 0x5eed),
                target: Some(s.target),
                stop_at_target: false,
                ..config.iteration.clone()
            };
            best_values.push(run_single(&objective, &iter_cfg)?.best_value);
        }
        let hits = best_values.iter().filter(|&&v| (v - s.target).abs() < HIT_TOL).count();
        info!("D = {dim}: {hits}/{} trials meet the variety", config.trials);
        probes.push(DimProbe { dim, hits, trials: config.trials, best_values });
        if hits > 0 {
            let confirmed = hits == config.trials;
            if !confirmed {
                warn!("only {hits}/{} trials met the variety at D = {dim}", config.trials);
            }
            return Ok(VarietyOutcome {
                space: space.clone(),
                target: target.clone(),
                target_value: s.target,
                structure_dim: s.structure_dim,
                max_dim: dim - 1,
                expected: expected_dimension(space, target),
                confirmed,
                probes,
            });
        }
    }
    Err(Error::Inconsistent(format!(
        "{target:?} not found even in the whole {}-dimensional space",
        s.structure_dim
    )))
}
