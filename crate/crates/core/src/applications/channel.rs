//! Minimal output Rényi entropy of channels, via the image of the
//! Stinespring isometry: `sup ‖E(ρ)‖_α = sup_{ψ ∈ im V} ‖ψ‖²_{2α, d_A}`.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::ExperimentResult;
use crate::error::{Error, Result};
use crate::measures::NormSpec;
use crate::optimizer::{run_single, IterationConfig, Objective};
use crate::subspaces::{channel_image_projector, ChannelSpec, SubspaceProjector};
use crate::tensor::Cut;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be > 1, got {alpha}")));
    }
    Ok(())
}

/// Maximizes `‖ψ‖_{2α,n_s}` over a subspace of `C^{d_A} ⊗ C^{d_B}` and
/// reports the maximal output α-norm `v²` and minimal entropy
/// `S_α = (2α/(1−α)) log v`.
pub fn subspace_min_output(
    projector: Arc<dyn SubspaceProjector>,
    dims: [usize; 2],
    alpha: f64,
    config: &IterationConfig,
) -> Result<ExperimentResult> {
    check_alpha(alpha)?;
    let start = Instant::now();
    let label = projector.label();
    let n_s = dims[0].min(dims[1]);
    let objective = Objective::single(projector, dims.to_vec(), Cut::new(vec![0], 2)?, NormSpec::new(2.0 * alpha, n_s)?)?;
    let runs = run_single(&objective, config)?;
    let v = runs.best_value;
    let params = json!({ "subspace": label, "dims": dims, "alpha": alpha });
    let mut res = ExperimentResult::from_report("min_output_entropy", params, None, runs, config, start.elapsed());
    res.details = json!({
        "max_output_norm": v * v,
        "min_entropy": 2.0 * alpha / (1.0 - alpha) * v.ln(),
    });
    Ok(res)
}

/// Single channel: the output space is the first factor and the Kraus
/// index the second.
pub fn channel_min_output(channel: &ChannelSpec, alpha: f64, config: &IterationConfig) -> Result<ExperimentResult> {
    let proj = channel_image_projector(channel);
    let dims = proj.dims();
    let mut res = subspace_min_output(Arc::new(proj), [dims[0], dims[1]], alpha, config)?;
    res.experiment = "channel_min_output".into();
    res.params = json!({
        "d_s": channel.input_dim(),
        "d_a": channel.output_dim(),
        "kraus": channel.kraus().len(),
        "alpha": alpha,
    });
    Ok(res)
}

/// Joint versus product maximal output α-norms of `E ⊗ F`.
#[derive(Clone, Debug, Serialize)]
pub struct PairOutcome {
    pub first: ExperimentResult,
    pub second: ExperimentResult,
    pub joint: ExperimentResult,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`; positive values violate multiplicativity.
    pub gap: f64,
}

pub fn channel_pair_min_output(
    first: &ChannelSpec,
    second: &ChannelSpec,
    alpha: f64,
    config: &IterationConfig,
) -> Result<PairOutcome> {
    let a = channel_min_output(first, alpha, config)?;
    let b = channel_min_output(second, alpha, config)?;
    let joint = channel_min_output(&first.tensor(second)?, alpha, config)?;
    let norm = |r: &ExperimentResult| r.details["max_output_norm"].as_f64().unwrap_or(f64::NAN);
    let (lhs, rhs) = (norm(&joint), norm(&a) * norm(&b));
    Ok(PairOutcome { first: a, second: b, joint, lhs, rhs, gap: lhs - rhs })
}
