//! Experiment drivers: fermionic extremal problems, AME search, variety
//! probing, channel output entropies and the ten-restart benchmark table.

mod ame;
mod channel;
mod fermion;
mod table1;
mod variety;

use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::optimizer::{IterationConfig, IterationReport};
use crate::rng::derive_seed;

pub use ame::{ame_cuts, ame_search, ame_spectrum_deviation};
pub use channel::{channel_min_output, channel_pair_min_output, subspace_min_output, PairOutcome};
pub use fermion::{
    extremal_target, fermion_entropy_min, fermion_extremal, two_eigenvalue_state, yang_dominance,
    FermionProblem, YangCheck,
};
pub use table1::{default_table1_rows, table1_csv, table1_protocol, Table1Entry, Table1Row, TABLE1_RESTARTS};
pub use variety::{expected_dimension, variety_probe, DimProbe, ProbeSpace, ProbeTarget, VarietyConfig, VarietyOutcome};

/// A known or conjectured optimum in objective units.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Target {
    pub value: f64,
    pub provenance: String,
}

impl Target {
    pub fn new(value: f64, provenance: impl Into<String>) -> Self {
        Self { value, provenance: provenance.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub params: Value,
    pub best_value: f64,
    pub target: Option<Target>,
    pub success_count: usize,
    pub restarts: usize,
    pub mean_iterations_successes: Option<f64>,
    pub seeds: Vec<u64>,
    /// Experiment-specific derived quantities.
    pub details: Value,
    pub runs: IterationReport,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentResult {
    fn from_report(
        experiment: &str,
        params: Value,
        target: Option<Target>,
        runs: IterationReport,
        config: &IterationConfig,
        wall_time: Duration,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            params,
            best_value: runs.best_value,
            target,
            success_count: runs.success_count,
            restarts: config.restarts,
            mean_iterations_successes: runs.mean_iterations_successes,
            seeds: restart_seeds(config),
            details: Value::Null,
            runs,
            wall_time,
        }
    }
}

/// Seeds actually used by each restart.
pub fn restart_seeds(config: &IterationConfig) -> Vec<u64> {
    (0..config.restarts as u64).map(|i| derive_seed(config.seed, i)).collect()
}

/// Uses the known target unless the caller supplied one.
fn with_target(config: &IterationConfig, target: Option<&Target>) -> IterationConfig {
    let mut c = config.clone();
    if c.target.is_none() {
        c.target = target.map(|t| t.value);
    }
    c
}

/// Schmidt-rank bounds `r_i` on the single-factor cuts of
/// `C^{d_1} ⊗ … ⊗ C^{d_n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankProfile {
    dims: Vec<usize>,
    ranks: Vec<usize>,
}

impl RankProfile {
    pub fn new(dims: Vec<usize>, ranks: Vec<usize>) -> Result<Self> {
        if dims.len() != ranks.len() || dims.len() < 2 {
            return Err(Error::InvalidParameter("need matching dims and ranks for at least 2 factors".into()));
        }
        if dims.iter().zip(&ranks).any(|(&d, &r)| r == 0 || r > d) {
            return Err(Error::InvalidParameter(format!("ranks {ranks:?} must lie in 1..=dims {dims:?}")));
        }
        Ok(Self { dims, ranks })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    fn others(&self, i: usize) -> usize {
        self.ranks.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &r)| r).product()
    }

    /// `r̃_i = min(r_i, Π_{j≠i} r_j)`
    pub fn effective_ranks(&self) -> Vec<usize> {
        (0..self.ranks.len()).map(|i| self.ranks[i].min(self.others(i))).collect()
    }

    /// `Π r̃_i + Σ r̃_i (d_i − r̃_i)`
    pub fn dimension_effective_form(&self) -> usize {
        let rt = self.effective_ranks();
        rt.iter().product::<usize>() + rt.iter().zip(&self.dims).map(|(&r, &d)| r * (d - r)).sum::<usize>()
    }
}

/// Dimension of the variety of states with Schmidt ranks `≤ r_i`:
/// `r_1⋯r_n + Σ min(r_i, Π_{j≠i} r_j)(d_i − r_i)`.
pub fn subspace_variety_dimension(profile: &RankProfile) -> usize {
    let r = &profile.ranks;
    let head: usize = r.iter().product();
    head + (0..r.len())
        .map(|i| r[i].min(profile.others(i)) * (profile.dims[i] - r[i]))
        .sum::<usize>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variety_dimension_examples() {
        let p = RankProfile::new(vec![2, 2, 2], vec![1, 1, 1]).unwrap();
        assert_eq!(subspace_variety_dimension(&p), 4);
        let p = RankProfile::new(vec![3, 3], vec![2, 2]).unwrap();
        assert_eq!(subspace_variety_dimension(&p), 8);
        assert_eq!(subspace_variety_dimension(&p), 2 * (3 + 3 - 2));
        let p = RankProfile::new(vec![3, 3], vec![2, 1]).unwrap();
        assert_eq!(subspace_variety_dimension(&p), 5);
        assert_eq!(p.effective_ranks(), vec![1, 1]);
        assert_eq!(p.dimension_effective_form(), 5);
        assert!(RankProfile::new(vec![3, 3], vec![4, 1]).is_err());
        assert!(RankProfile::new(vec![3], vec![1]).is_err());
    }

    #[test]
    fn both_forms_agree() {
        for dims in [vec![2, 3, 4], vec![3, 3, 3], vec![2, 2, 5], vec![4, 5]] {
            let n = dims.len();
            let mut ranks = vec![1usize; n];
            loop {
                let p = RankProfile::new(dims.clone(), ranks.clone()).unwrap();
                assert_eq!(subspace_variety_dimension(&p), p.dimension_effective_form(), "{ranks:?}");
                // bipartite case reduces to r(d_A + d_B − r) for equal ranks
                if n == 2 && ranks[0] == ranks[1] {
                    let r = ranks[0];
                    assert_eq!(subspace_variety_dimension(&p), r * (dims[0] + dims[1] - r));
                }
                let mut i = 0;
                while i < n {
                    ranks[i] += 1;
                    if ranks[i] <= dims[i] {
                        break;
                    }
                    ranks[i] = 1;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }
}
