//! Extremal Schmidt coefficients and entropies of `N` fermions, in
//! intrinsic coordinates `∧^K C^d ⊗ ∧^{N−K} C^d`.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::{with_target, ExperimentResult, Target};
use crate::error::{Error, Result};
use crate::measures::{von_neumann_from_spectrum, NormSpec};
use crate::optimizer::{run_single, IterationConfig, Objective};
use crate::subspaces::{binomial, slater_state, wedge, yang_state, FermionProjector, FermionSpace};
use crate::tensor::{Cut, PureState};
use crate::C64;

/// The `K | N−K` cut of `∧^N C^d` with one norm term.
#[derive(Clone, Debug)]
pub struct FermionProblem {
    pub space: FermionSpace,
    pub projector: Arc<FermionProjector>,
    pub objective: Objective,
}

impl FermionProblem {
    pub fn new(d: usize, n: usize, k_split: usize, spec: NormSpec) -> Result<Self> {
        let space = FermionSpace::new(d, n)?;
        let projector = Arc::new(FermionProjector::new(&space, k_split)?);
        let dims = projector.dims();
        let objective = Objective::single(projector.clone(), dims, Cut::new(vec![0], 2)?, spec)?;
        Ok(Self { space, projector, objective })
    }

    /// `n_s = min(C(d,K), C(d,N−K))`
    pub fn n_s(&self) -> usize {
        let [a, b] = self.projector.isometry().ambient_dims();
        a.min(b)
    }

    /// Objective value of an intrinsic state.
    pub fn evaluate_intrinsic(&self, x: &[C64]) -> Result<f64> {
        if x.len() != self.space.dim() {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), got: x.len() });
        }
        self.objective.value(&self.projector.isometry().embed(x))
    }

    /// Intrinsic coordinates of an ambient state in the image.
    pub fn restrict(&self, v: &[C64]) -> Vec<C64> {
        self.projector.isometry().restrict(v)
    }
}

/// Known or conjectured optimum of `‖·‖_{2,k}` (as a norm, not squared)
/// for the unweighted cases with a closed form.
pub fn extremal_target(d: usize, n: usize, k_split: usize, spec: &NormSpec) -> Option<Target> {
    if spec.p != 2.0 || spec.weights.is_some() {
        return None;
    }
    let (df, nf) = (d as f64, n as f64);
    let even = d % 2 == 0 && n % 2 == 0;
    let squared = match (k_split, spec.k) {
        (1, 1) => Some((1.0 / nf, "coleman bound 1/N")),
        (2, 1) if even => Some(((df - nf + 2.0) / ((nf - 1.0) * df), "yang bound (d-N+2)/((N-1)d)")),
        (2, 2) if even && d > 2 => Some((
            (1.0 + 0.5 * (nf - 2.0) * (df - nf + 2.0) / (df - 2.0)) / binomial(n, 2) as f64,
            "two-eigenvalue conjecture",
        )),
        _ => None,
    };
    squared.map(|(s, why)| Target::new(s.sqrt(), format!("{why}; squared value {s:.12}")))
}

/// Maximizes `‖·‖_{p,k}` over `∧^N C^d` across the `K | N−K` cut.
pub fn fermion_extremal(d: usize, n: usize, k_split: usize, spec: NormSpec, config: &IterationConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let problem = FermionProblem::new(d, n, k_split, spec.clone())?;
    let target = extremal_target(d, n, k_split, &spec);
    let cfg = with_target(config, target.as_ref());
    let runs = run_single(&problem.objective, &cfg)?;
    let params = json!({ "d": d, "N": n, "K": k_split, "p": spec.p, "k": spec.k, "weights": spec.weights });
    let best = runs.best_value;
    let mut res = ExperimentResult::from_report("fermion_extremal", params, target, runs, &cfg, start.elapsed());
    res.details = json!({
        "best_squared": best * best,
        "restart_squared": res.runs.restarts.iter().map(|r| r.value * r.value).collect::<Vec<_>>(),
    });
    Ok(res)
}

/// Minimizes `S_α` of the `K`-particle reduced density matrix (α > 1) by
/// maximizing `‖·‖_{2α,n_s}`.
pub fn fermion_entropy_min(d: usize, n: usize, k_split: usize, alpha: f64, config: &IterationConfig) -> Result<ExperimentResult> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("entropy minimization needs alpha > 1, got {alpha}")));
    }
    let start = Instant::now();
    let space = FermionSpace::new(d, n)?;
    let iso_dims = FermionProjector::new(&space, k_split)?.dims();
    let n_s = iso_dims[0].min(iso_dims[1]);
    let p = 2.0 * alpha;
    let problem = FermionProblem::new(d, n, k_split, NormSpec::new(p, n_s)?)?;
    let c = binomial(n, k_split) as f64;
    let target = Target::new(
        c.powf((1.0 - alpha) / (2.0 * alpha)),
        format!("slater spectrum; S_alpha = log C(N,K) = {:.12}", c.ln()),
    );
    let cfg = with_target(config, Some(&target));
    let runs = run_single(&problem.objective, &cfg)?;
    let entropy = |v: f64| 2.0 * alpha / (1.0 - alpha) * v.ln();
    let layout = problem.objective.terms()[0].layout();
    let best_sd = layout.decompose(&runs.best().state)?;
    let probs: Vec<f64> = best_sd.coeffs.iter().map(|l| l * l).collect();
    let params = json!({ "d": d, "N": n, "K": k_split, "alpha": alpha, "p": p, "k": n_s });
    let best = runs.best_value;
    let mut res = ExperimentResult::from_report("fermion_entropy_min", params, Some(target), runs, &cfg, start.elapsed());
    res.details = json!({
        "min_entropy": entropy(best),
        "entropy_target": c.ln(),
        "von_neumann_entropy": von_neumann_from_spectrum(&probs),
        "restart_entropies": res.runs.restarts.iter().map(|r| entropy(r.value)).collect::<Vec<_>>(),
        "max_trace_power": res.runs.restarts.iter().map(|r| r.value.powf(p)).fold(0.0, f64::max),
        "trace_power_bound": c.powf(1.0 - alpha),
    });
    Ok(res)
}

/// Restart agreement and Yang-state dominance for `‖·‖_{2,1}` at an even
/// split of `∧^N C^d`.
#[derive(Clone, Debug, Serialize)]
pub struct YangCheck {
    pub yang_value: f64,
    pub best_value: f64,
    /// Restarts within `1e-6` of the best value.
    pub agreeing: usize,
    pub restarts: usize,
    pub values: Vec<f64>,
    pub yang_dominates: bool,
}

pub fn yang_dominance(d: usize, n: usize, k_split: usize, config: &IterationConfig) -> Result<YangCheck> {
    let problem = FermionProblem::new(d, n, k_split, NormSpec::new(2.0, 1)?)?;
    let yang = yang_state(&problem.space)?;
    let yang_value = problem.evaluate_intrinsic(yang.amps())?;
    let runs = run_single(&problem.objective, config)?;
    let values: Vec<f64> = runs.restarts.iter().map(|r| r.value).collect();
    let best = runs.best_value;
    Ok(YangCheck {
        yang_value,
        best_value: best,
        agreeing: values.iter().filter(|&&v| (v - best).abs() < 1e-6).count(),
        restarts: config.restarts,
        values,
        yang_dominates: yang_value >= best - 1e-6,
    })
}

/// `φ₁ ∧ φ₂ ∧ Ψ^{(N−2)}` with `φ₁, φ₂` the first two modes and the Yang
/// state built on the remaining `d − 2` modes. Intrinsic in `∧^N C^d`.
pub fn two_eigenvalue_state(d: usize, n: usize) -> Result<PureState> {
    if d % 2 != 0 || n % 2 != 0 || n < 4 || n > d {
        return Err(Error::InvalidParameter(format!("need even 4 <= N <= d, got d={d}, N={n}")));
    }
    let rest = FermionSpace::new(d - 2, n - 2)?;
    let yang = yang_state(&rest)?;
    let shifted_space = FermionSpace::new(d, n - 2)?;
    let mut shifted = vec![C64::new(0.0, 0.0); shifted_space.dim()];
    for (i, x) in yang.amps().iter().enumerate() {
        let r = shifted_space.rank_of_mask(rest.mask(i) << 2).expect("shifted subset");
        shifted[r] = *x;
    }
    let pair = slater_state(&FermionSpace::new(d, 2)?, &[0, 1])?;
    let out = wedge(d, 2, pair.amps(), n - 2, &shifted)?;
    PureState::new(vec![binomial(d, n)], out)
}
