//! The alternating iteration `ψ ↦ P Σ c_i λ_i^{p−1} |a_i⟩⊗|b_i⟩`, normalized,
//! over one or several cuts, with restarts and convergence monitoring.

mod shor;

use std::io::Write;
use std::sync::Arc;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::measures::NormSpec;
use crate::rng::derive_seed;
use crate::subspaces::SubspaceProjector;
use crate::tensor::{random_state, Cut, CutLayout, PureState, RANK_TOL};
use crate::C64;

pub use shor::shor_baseline;

/// Projected directions shorter than this abort the step.
pub const DEGENERATE_NORM: f64 = 1e-14;
/// Iterates must stay within this distance of the subspace.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// `|value − target|` below this counts as a success.
pub const TARGET_TOL: f64 = 1e-5;

const INIT_ATTEMPTS: u64 = 16;

#[derive(Clone, Debug)]
pub struct Term {
    pub cut: Cut,
    pub spec: NormSpec,
    layout: CutLayout,
}

impl Term {
    pub fn layout(&self) -> &CutLayout {
        &self.layout
    }
}

/// `Σ_terms ‖ψ‖_{p,k}^p` over `image(P)`. All terms share one `p`, and the
/// reported value is the `p`-th root of the sum, so a single term reports
/// its Schmidt norm.
#[derive(Clone, Debug)]
pub struct Objective {
    projector: Arc<dyn SubspaceProjector>,
    dims: Vec<usize>,
    terms: Vec<Term>,
    p: f64,
}

/// Objective value and per-term norms at a state, plus the next iterate.
#[derive(Clone, Debug)]
pub struct Step {
    pub value: f64,
    pub term_values: Vec<f64>,
    pub next: Vec<C64>,
}

impl Objective {
    pub fn new(projector: Arc<dyn SubspaceProjector>, dims: Vec<usize>, terms: Vec<(Cut, NormSpec)>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidParameter(format!("bad dims {dims:?}")));
        }
        if projector.ambient_dim() != total {
            return Err(Error::DimensionMismatch { expected: total, got: projector.ambient_dim() });
        }
        if terms.is_empty() {
            return Err(Error::InvalidParameter("objective needs at least one term".into()));
        }
        let p = terms[0].1.p;
        let mut built = Vec::with_capacity(terms.len());
        for (cut, spec) in terms {
            spec.validate()?;
            if spec.p != p {
                return Err(Error::InvalidNorm(format!(
                    "all terms must share one p (found {p} and {})",
                    spec.p
                )));
            }
            let layout = CutLayout::new(&dims, &cut)?;
            built.push(Term { cut, spec, layout });
        }
        Ok(Self { projector, dims, terms: built, p })
    }

    pub fn single(projector: Arc<dyn SubspaceProjector>, dims: Vec<usize>, cut: Cut, spec: NormSpec) -> Result<Self> {
        Self::new(projector, dims, vec![(cut, spec)])
    }

    pub fn projector(&self) -> &dyn SubspaceProjector {
        self.projector.as_ref()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.projector.ambient_dim()
    }

    /// Value and per-term norms without computing the next iterate.
    pub fn evaluate(&self, amps: &[C64]) -> Result<(f64, Vec<f64>)> {
        let mut power = 0.0;
        let mut norms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let sd = t.layout.decompose(amps)?;
            let s = t.spec.power_sum(&sd.coeffs);
            power += s;
            norms.push(s.powf(1.0 / self.p));
        }
        Ok((power.powf(1.0 / self.p), norms))
    }

    pub fn value(&self, amps: &[C64]) -> Result<f64> {
        Ok(self.evaluate(amps)?.0)
    }

    /// One application of the iteration map, also returning the value at
    /// the input (both come from the same decompositions).
    pub fn step(&self, amps: &[C64]) -> Result<Step> {
        if amps.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: amps.len() });
        }
        let mut dir = vec![linalg::ZERO; amps.len()];
        let mut power = 0.0;
        let mut term_values = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let sd = t.layout.decompose(amps)?;
            let k = t.spec.effective_k(sd.n_s());
            let p = t.spec.p;
            let weights: Vec<f64> = (0..k)
                .map(|i| {
                    let l = sd.coeffs[i];
                    let c = t.spec.weight(i);
                    if p == 1.0 {
                        // λ⁰ only where the Schmidt pair is well defined
                        if l > RANK_TOL { c } else { 0.0 }
                    } else {
                        c * l.powf(p - 1.0)
                    }
                })
                .collect();
            t.layout.accumulate_pairs(&sd, &weights, &mut dir);
            let s = t.spec.power_sum(&sd.coeffs);
            power += s;
            term_values.push(s.powf(1.0 / self.p));
        }
        let mut next = self.projector.apply(&dir);
        let n = linalg::normalize(&mut next);
        if !(n >= DEGENERATE_NORM) {
            return Err(Error::DegenerateDirection { norm: n });
        }
        Ok(Step { value: power.powf(1.0 / self.p), term_values, next })
    }

    /// `‖Pψ − ψ‖`.
    pub fn feasibility_defect(&self, amps: &[C64]) -> f64 {
        linalg::norm(&linalg::sub(&self.projector.apply(amps), amps))
    }

    /// Random normalized starting point in the subspace, resampled when the
    /// projection vanishes.
    pub fn initial_state(&self, seed: u64) -> Result<Vec<C64>> {
        let mut last = 0.0;
        for attempt in 0..INIT_ATTEMPTS {
            let s = if attempt == 0 { seed } else { derive_seed(seed, attempt) };
            let psi = random_state(&self.dims, s)?;
            let mut v = self.projector.apply(psi.amps());
            last = linalg::normalize(&mut v);
            if last >= DEGENERATE_NORM {
                return Ok(v);
            }
        }
        Err(Error::DegenerateDirection { norm: last })
    }

    fn check_state(&self, state: &PureState) -> Result<()> {
        if state.dims() != self.dims.as_slice() {
            return Err(Error::InvalidParameter(format!(
                "state dims {:?} differ from objective dims {:?}",
                state.dims(),
                self.dims
            )));
        }
        state.check_normalized()
    }
}

/// One step of the iteration.
pub fn iterate_once(state: &PureState, objective: &Objective) -> Result<PureState> {
    objective.check_state(state)?;
    let defect = objective.feasibility_defect(state.amps());
    if defect > FEASIBILITY_TOL {
        return Err(Error::InvalidParameter(format!("state lies {defect:.2e} outside the subspace")));
    }
    let step = objective.step(state.amps())?;
    PureState::new(state.dims().to_vec(), step.next)
}

/// `min_θ ‖iterate(ψ) − e^{iθ} ψ‖`.
pub fn fixed_point_residual(state: &PureState, objective: &Objective) -> Result<f64> {
    objective.check_state(state)?;
    let step = objective.step(state.amps())?;
    Ok(linalg::phase_aligned_distance(state.amps(), &step.next))
}

/// Both sides of `‖ψ − φ‖² ≤ 2 − 2 f(ψ)/f(φ)` for consecutive iterates,
/// with `ψ` phase-aligned to `φ`.
pub fn distance_bound_check(prev: &PureState, next: &PureState, objective: &Objective) -> Result<(f64, f64)> {
    objective.check_state(prev)?;
    objective.check_state(next)?;
    let d = linalg::phase_aligned_distance(prev.amps(), next.amps());
    let fp = objective.value(prev.amps())?;
    let fn_ = objective.value(next.amps())?;
    Ok((d * d, 2.0 - 2.0 * fp / fn_))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationConfig {
    pub max_iters: usize,
    pub tol_increment: f64,
    pub stall_window: usize,
    pub seed: u64,
    pub restarts: usize,
    pub record_trace: bool,
    /// Worker threads for independent restarts.
    pub threads: usize,
    /// Known or conjectured optimum, used for success counting.
    pub target: Option<f64>,
    /// Stop a restart once it is within [`TARGET_TOL`] of the target.
    pub stop_at_target: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            tol_increment: 1e-10,
            stall_window: 50,
            seed: 0,
            restarts: 10,
            record_trace: false,
            threads: 1,
            target: None,
            stop_at_target: false,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.stall_window == 0 || self.restarts == 0 || self.threads == 0 {
            return Err(Error::InvalidParameter(
                "max_iters, stall_window, restarts and threads must be positive".into(),
            ));
        }
        if !(self.tol_increment > 0.0) {
            return Err(Error::InvalidParameter("tol_increment must be positive".into()));
        }
        if let Some(t) = self.target {
            if !t.is_finite() {
                return Err(Error::InvalidParameter("target must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub objective: f64,
    /// `min_θ ‖ψ_{t+1} − e^{iθ} ψ_t‖`
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RestartReport {
    pub restart: usize,
    pub seed: u64,
    pub value: f64,
    pub term_values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// Largest single-step decrease of the objective (0 when monotone).
    pub max_decrease: f64,
    pub iterations_to_target: Option<usize>,
    pub success: Option<bool>,
    #[serde(skip)]
    pub state: Vec<C64>,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationReport {
    pub restarts: Vec<RestartReport>,
    /// Restarts abandoned because the projected direction vanished.
    pub degenerate: Vec<usize>,
    pub best_value: f64,
    pub best_restart: usize,
    pub target: Option<f64>,
    pub success_count: usize,
    pub mean_iterations_successes: Option<f64>,
    pub converged_count: usize,
}

impl IterationReport {
    pub fn best(&self) -> &RestartReport {
        self.restarts.iter().find(|r| r.restart == self.best_restart).expect("best restart present")
    }

    pub(crate) fn assemble(runs: Vec<(usize, Result<RestartReport>)>, target: Option<f64>) -> Result<Self> {
        let total = runs.len();
        let mut restarts = Vec::new();
        let mut degenerate = Vec::new();
        for (i, r) in runs {
            match r {
                Ok(rep) => restarts.push(rep),
                Err(Error::DegenerateDirection { norm }) => {
                    warn!("restart {i} degenerated (norm {norm:.2e})");
                    degenerate.push(i);
                }
                Err(e) => return Err(e),
            }
        }
        if restarts.is_empty() {
            return Err(Error::AllRestartsFailed(total));
        }
        let best = restarts
            .iter()
            .fold(&restarts[0], |b, r| if r.value > b.value { r } else { b });
        let (best_value, best_restart) = (best.value, best.restart);
        let successes: Vec<&RestartReport> = restarts.iter().filter(|r| r.success == Some(true)).collect();
        let mean = if successes.is_empty() {
            None
        } else {
            let its: usize = successes.iter().map(|r| r.iterations_to_target.unwrap_or(r.iterations)).sum();
            Some(its as f64 / successes.len() as f64)
        };
        Ok(Self {
            best_value,
            best_restart,
            target,
            success_count: successes.len(),
            mean_iterations_successes: mean,
            converged_count: restarts.iter().filter(|r| r.converged).count(),
            restarts,
            degenerate,
        })
    }

    /// Trace CSV with header `restart,iter,objective,residual`.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "restart,iter,objective,residual")?;
        for r in &self.restarts {
            for t in &r.trace {
                writeln!(w, "{},{},{:.17e},{:.17e}", r.restart, t.iter, t.objective, t.residual)?;
            }
        }
        Ok(())
    }
}

/// Runs `f(i)` for every restart index, on a dedicated pool when more than
/// one thread is requested. Results come back in index order.
pub(crate) fn run_restarts<T, F>(restarts: usize, threads: usize, f: F) -> Result<Vec<(usize, T)>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if threads <= 1 {
        return Ok((0..restarts).map(|i| (i, f(i))).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..restarts).into_par_iter().map(|i| (i, f(i))).collect()))
}

/// The restart loop shared by the iteration and the baseline: `step` maps
/// a state to its value and the next iterate.
pub(crate) fn run_restart_with<S>(
    objective: &Objective,
    config: &IterationConfig,
    restart: usize,
    step_fn: S,
) -> Result<RestartReport>
where
    S: Fn(&[C64]) -> Result<Step>,
{
    let seed = derive_seed(config.seed, restart as u64);
    let mut psi = objective.initial_state(seed)?;
    let mut trace = Vec::new();
    let mut prev: Option<f64> = None;
    let mut stall = 0usize;
    let mut max_decrease = 0.0f64;
    let mut to_target = None;
    let mut converged = false;
    let mut iter = 0usize;
    loop {
        let step = step_fn(&psi)?;
        let residual = linalg::phase_aligned_distance(&psi, &step.next);
        if config.record_trace {
            trace.push(TracePoint { iter, objective: step.value, residual });
        }
        if let Some(p) = prev {
            let inc = step.value - p;
            max_decrease = max_decrease.max(-inc);
            if inc < config.tol_increment {
                stall += 1;
            } else {
                stall = 0;
            }
        }
        prev = Some(step.value);
        let hit = config.target.is_some_and(|t| (step.value - t).abs() < TARGET_TOL);
        if hit && to_target.is_none() {
            to_target = Some(iter);
        }
        let done = if stall >= config.stall_window {
            converged = true;
            true
        } else {
            (hit && config.stop_at_target) || iter >= config.max_iters
        };
        if done {
            let success = config.target.map(|t| (step.value - t).abs() < TARGET_TOL);
            debug!("restart {restart}: value {:.12} after {iter} iterations", step.value);
            return Ok(RestartReport {
                restart,
                seed,
                value: step.value,
                term_values: step.term_values,
                iterations: iter,
                converged,
                residual,
                max_decrease,
                iterations_to_target: to_target,
                success,
                state: psi,
                trace,
            });
        }
        psi = step.next;
        iter += 1;
    }
}

/// Runs the iteration from `config.restarts` random starting points.
pub fn run_single(objective: &Objective, config: &IterationConfig) -> Result<IterationReport> {
    config.validate()?;
    let runs = run_restarts(config.restarts, config.threads, |i| {
        run_restart_with(objective, config, i, |v| objective.step(v))
    })?;
    IterationReport::assemble(runs, config.target)
}
