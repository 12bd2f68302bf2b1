//! Ten restarts per problem with a known or conjectured optimum; counts
//! how often the optimum is reached and how many iterations it takes.

use serde::{Deserialize, Serialize};

use super::{ame_search, fermion_entropy_min, fermion_extremal, ExperimentResult, FermionProblem};
use crate::error::Result;
use crate::measures::NormSpec;
use crate::optimizer::IterationConfig;
use crate::subspaces::yang_state;

pub const TABLE1_RESTARTS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Table1Row {
    /// Largest eigenvalue of the `K`-particle density matrix; the target
    /// is the value of the Yang state.
    Yang { d: usize, n: usize, k: usize },
    /// Sum of the two largest eigenvalues of the 2-particle density matrix.
    TwoEigenvalues { d: usize, n: usize },
    /// Minimal `S_2` of the `K`-particle density matrix.
    EntropyS2 { d: usize, n: usize, k: usize },
    Ame { dims: Vec<usize> },
}

impl Table1Row {
    pub fn label(&self) -> String {
        match self {
            Self::Yang { d, n, k } => format!("yang d={d} N={n} K={k}"),
            Self::TwoEigenvalues { d, n } => format!("two eigenvalues d={d} N={n}"),
            Self::EntropyS2 { d, n, k } => format!("S_2 minimum d={d} N={n} K={k}"),
            Self::Ame { dims } => {
                let s: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
                format!("AME {}", s.join("x"))
            }
        }
    }

    fn run(&self, config: &IterationConfig) -> Result<ExperimentResult> {
        match self {
            Self::Yang { d, n, k } => {
                let spec = NormSpec::new(2.0, 1)?;
                let problem = FermionProblem::new(*d, *n, *k, spec.clone())?;
                let yang = problem.evaluate_intrinsic(yang_state(&problem.space)?.amps())?;
                let cfg = IterationConfig { target: Some(yang), ..config.clone() };
                let mut res = fermion_extremal(*d, *n, *k, spec, &cfg)?;
                res.target = Some(super::Target::new(yang, "value of the Yang state"));
                Ok(res)
            }
            Self::TwoEigenvalues { d, n } => fermion_extremal(*d, *n, 2, NormSpec::new(2.0, 2)?, config),
            Self::EntropyS2 { d, n, k } => fermion_entropy_min(*d, *n, *k, 2.0, config),
            Self::Ame { dims } => ame_search(dims, config),
        }
    }
}

/// The rows of the benchmark table.
pub fn default_table1_rows() -> Vec<Table1Row> {
    vec![
        Table1Row::Yang { d: 12, n: 8, k: 4 },
        Table1Row::TwoEigenvalues { d: 10, n: 6 },
        Table1Row::EntropyS2 { d: 10, n: 6, k: 2 },
        Table1Row::Ame { dims: vec![3, 3, 3] },
        Table1Row::Ame { dims: vec![4, 4, 4, 4] },
        Table1Row::Ame { dims: vec![5, 5, 5, 5] },
        Table1Row::Ame { dims: vec![5, 5, 5, 5, 5] },
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Entry {
    pub label: String,
    pub row: Table1Row,
    pub mean_iterations: Option<f64>,
    pub successes: usize,
    pub restarts: usize,
    pub target: Option<f64>,
    pub best_value: f64,
    pub result: ExperimentResult,
}

/// Runs every row with exactly ten restarts, each stopping once it is
/// within `1e-5` of the target.
pub fn table1_protocol(rows: &[Table1Row], config: &IterationConfig) -> Result<Vec<Table1Entry>> {
    let cfg = IterationConfig { restarts: TABLE1_RESTARTS, stop_at_target: true, target: None, ..config.clone() };
    rows.iter()
        .map(|row| {
            let res = row.run(&cfg)?;
            Ok(Table1Entry {
                label: row.label(),
                row: row.clone(),
                mean_iterations: res.mean_iterations_successes,
                successes: res.success_count,
                restarts: res.restarts,
                target: res.target.as_ref().map(|t| t.value),
                best_value: res.best_value,
                result: res,
            })
        })
        .collect()
}

/// `experiment,mean_iterations,successes,restarts`; a missing mean is
/// written as `n/a`.
pub fn table1_csv(entries: &[Table1Entry]) -> String {
    let mut out = String::from("experiment,mean_iterations,successes,restarts\n");
    for e in entries {
        let mean = e.mean_iterations.map_or("n/a".to_string(), |m| format!("{m:.1}"));
        out.push_str(&format!("{},{},{},{}\n", e.label, mean, e.successes, e.restarts));
    }
    out
}
