//! Leading-eigenvector baseline for `‖ψ‖_{2α,n_s}`: the next iterate is
//! the top eigenvector of `P (ρ_A^{α−1} ⊗ 1) P`, computed densely.

use faer::Mat;

use super::{run_restart_with, run_restarts, IterationConfig, IterationReport, Objective, Step};
use crate::error::{Error, Result};
use crate::linalg;
use crate::subspaces::{to_dense, DENSE_LIMIT};
use crate::C64;

/// Runs the baseline on a single-term, unweighted objective with
/// `p = 2α` and `k ≥ n_s`.
pub fn shor_baseline(objective: &Objective, alpha: f64, config: &IterationConfig) -> Result<IterationReport> {
    config.validate()?;
    if !(alpha >= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
    }
    let [term] = objective.terms() else {
        return Err(Error::InvalidParameter("baseline needs a single-term objective".into()));
    };
    let shape = term.layout().shape();
    if term.spec.weights.is_some() || term.spec.k < shape.n_s || (term.spec.p - 2.0 * alpha).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "baseline needs an unweighted (p = 2α = {}, k = n_s = {}) term",
            2.0 * alpha,
            shape.n_s
        )));
    }
    let n = objective.ambient_dim();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: n, limit: DENSE_LIMIT });
    }
    let p = to_dense(objective.projector())?;
    let layout = term.layout();

    let step = |psi: &[C64]| -> Result<Step> {
        let (value, term_values) = objective.evaluate(psi)?;
        let m = layout.reshape(psi);
        let rho = &m * m.adjoint();
        let x = if alpha == 1.0 {
            Mat::<C64>::identity(shape.d_a, shape.d_a)
        } else {
            let (vals, vecs) = linalg::hermitian_eigen(rho.as_ref())?;
            let f: Vec<f64> = vals.iter().map(|&e| e.max(0.0).powf(alpha - 1.0)).collect();
            Mat::from_fn(shape.d_a, shape.d_a, |i, j| {
                (0..shape.d_a).map(|r| vecs[(i, r)] * f[r] * vecs[(j, r)].conj()).sum()
            })
        };
        // X ⊗ 1 in flat amplitude order
        let mut xb = Mat::<C64>::zeros(n, n);
        for a in 0..shape.d_a {
            for a2 in 0..shape.d_a {
                let v = x[(a, a2)];
                if v == linalg::ZERO {
                    continue;
                }
                for b in 0..shape.d_b {
                    xb[(layout.flat_index(a, b), layout.flat_index(a2, b))] = v;
                }
            }
        }
        let op = &p * &xb * &p;
        let op = Mat::from_fn(n, n, |i, j| (op[(i, j)] + op[(j, i)].conj()) * 0.5);
        let (_, vecs) = linalg::hermitian_eigen(op.as_ref())?;
        let mut next = linalg::column(vecs.as_ref(), 0);
        linalg::normalize(&mut next);
        Ok(Step { value, term_values, next })
    };

    let runs = run_restarts(config.restarts, 1, |i| run_restart_with(objective, config, i, step))?;
    IterationReport::assemble(runs, config.target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::NormSpec;
    use crate::optimizer::run_single;
    use crate::subspaces::{antisymmetric_projector, random_subspace_projector, IdentityProjector, SubspaceProjector};
    use crate::tensor::Cut;
    use std::sync::Arc;

    #[test]
    fn alpha_one_lands_in_subspace() {
        let proj = random_subspace_projector(9, 2, 3).unwrap();
        let obj = Objective::single(
            Arc::new(proj.clone()),
            vec![3, 3],
            Cut::new(vec![0], 2).unwrap(),
            NormSpec::new(2.0, 3).unwrap(),
        )
        .unwrap();
        let cfg = IterationConfig { restarts: 1, max_iters: 1, ..Default::default() };
        let rep = shor_baseline(&obj, 1.0, &cfg).unwrap();
        let s = &rep.restarts[0].state;
        assert!(linalg::norm(&linalg::sub(&proj.apply(s), s)) < 1e-10);
        // with α = 1 the objective is ‖ψ‖₂ = 1
        assert!((rep.best_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_iteration_on_wedge3() {
        let proj: Arc<dyn SubspaceProjector> = Arc::new(antisymmetric_projector(6, 3));
        let obj = Objective::single(
            proj,
            vec![6, 6, 6],
            Cut::new(vec![0], 3).unwrap(),
            NormSpec::new(4.0, 6).unwrap(),
        )
        .unwrap();
        let cfg = IterationConfig { restarts: 2, seed: 5, record_trace: true, ..Default::default() };
        let shor = shor_baseline(&obj, 2.0, &cfg).unwrap();
        let ours = run_single(&obj, &cfg).unwrap();
        assert!((shor.best_value - ours.best_value).abs() < 1e-6, "{} vs {}", shor.best_value, ours.best_value);
        for r in &shor.restarts {
            assert!(r.max_decrease <= 1e-12, "{}", r.max_decrease);
        }
    }

    #[test]
    fn rejects_bad_objectives() {
        let id: Arc<dyn SubspaceProjector> = Arc::new(IdentityProjector::new(4));
        let cut = Cut::new(vec![0], 2).unwrap();
        let obj = Objective::single(id.clone(), vec![2, 2], cut.clone(), NormSpec::new(2.0, 1).unwrap()).unwrap();
        assert!(shor_baseline(&obj, 1.0, &IterationConfig::default()).is_err());
        let obj = Objective::single(id, vec![2, 2], cut, NormSpec::new(4.0, 2).unwrap()).unwrap();
        assert!(shor_baseline(&obj, 1.5, &IterationConfig::default()).is_err());
        assert!(shor_baseline(&obj, 0.5, &IterationConfig::default()).is_err());
        let big: Arc<dyn SubspaceProjector> = Arc::new(IdentityProjector::new(8192));
        let obj = Objective::single(big, vec![2, 4096], Cut::new(vec![0], 2).unwrap(), NormSpec::new(2.0, 2).unwrap())
            .unwrap();
        assert!(matches!(shor_baseline(&obj, 1.0, &IterationConfig::default()), Err(Error::TooLarge { .. })));
    }
}
