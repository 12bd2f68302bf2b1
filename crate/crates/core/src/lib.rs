//! Maximization of Schmidt norms of pure states restricted to a subspace,
//! over one or several bipartite cuts, plus the experiment drivers built on
//! top of it (fermionic extremal problems, AME search, variety probing and
//! channel output entropies).

pub mod applications;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod optimizer;
pub mod rng;
pub mod subspaces;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use tensor::{
    random_state, reduced_density_matrix, reshape_for_cut, schmidt_decompose, Cut, CutLayout,
    CutShape, DensityMatrix, PureState, SchmidtDecomposition,
};
pub use measures::{
    entropy_from_state, renyi_entropy, schmidt_norm, variational_lower_bound, von_neumann_entropy,
    NormSpec,
};
pub use optimizer::{
    distance_bound_check, fixed_point_residual, iterate_once, run_single, shor_baseline,
    IterationConfig, IterationReport, Objective, RestartReport,
};
