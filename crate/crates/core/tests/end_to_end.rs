use std::sync::Arc;

use schmidt_core::applications::{ame_search, fermion_extremal, subspace_variety_dimension, RankProfile};
use schmidt_core::optimizer::{fixed_point_residual, run_single, IterationConfig, Objective};
use schmidt_core::subspaces::{random_subspace_projector, symmetric_projector, IdentityProjector};
use schmidt_core::tensor::{schmidt_decompose, Cut, PureState};
use schmidt_core::{schmidt_norm, NormSpec};

fn cfg(seed: u64, restarts: usize) -> IterationConfig {
    IterationConfig { seed, restarts, ..Default::default() }
}

#[test]
fn unconstrained_maximum_is_maximally_entangled() {
    let obj = Objective::single(
        Arc::new(IdentityProjector::new(12)),
        vec![3, 4],
        Cut::new(vec![0], 2).unwrap(),
        NormSpec::new(1.0, 3).unwrap(),
    )
    .unwrap();
    let rep = run_single(&obj, &cfg(1, 3)).unwrap();
    assert!((rep.best_value - 3f64.sqrt()).abs() < 1e-8);
    let best = rep.best();
    let psi = PureState::new(vec![3, 4], best.state.clone()).unwrap();
    let sd = schmidt_decompose(&psi, &Cut::new(vec![0], 2).unwrap()).unwrap();
    for l in &sd.coeffs {
        assert!((l - 1.0 / 3f64.sqrt()).abs() < 1e-6);
    }
    assert!(fixed_point_residual(&psi, &obj).unwrap() < 1e-6);
}

#[test]
fn symmetric_states_cannot_be_maximally_entangled_across_both_qubits() {
    // ⊗²_sym C² contains the triplet (|01⟩+|10⟩)/√2 with λ = (1/√2, 1/√2)
    let obj = Objective::single(
        Arc::new(symmetric_projector(2, 2)),
        vec![2, 2],
        Cut::new(vec![0], 2).unwrap(),
        NormSpec::new(1.0, 2).unwrap(),
    )
    .unwrap();
    let rep = run_single(&obj, &cfg(2, 5)).unwrap();
    assert!((rep.best_value - 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn reported_values_match_recomputation() {
    let proj = Arc::new(random_subspace_projector(27, 4, 9).unwrap());
    let dims = vec![3, 3, 3];
    let terms: Vec<_> = (0..3).map(|i| (Cut::new(vec![i], 3).unwrap(), NormSpec::new(2.0, 2).unwrap())).collect();
    let obj = Objective::new(proj, dims.clone(), terms.clone()).unwrap();
    let rep = run_single(&obj, &cfg(4, 4)).unwrap();
    for r in &rep.restarts {
        let psi = PureState::new(dims.clone(), r.state.clone()).unwrap();
        let sum: f64 = terms.iter().map(|(c, s)| schmidt_norm(&psi, c, s).unwrap().powi(2)).sum();
        assert!((sum.sqrt() - r.value).abs() < 1e-10);
        assert!(r.max_decrease < 1e-12);
    }
}

#[test]
fn applications_share_seeds() {
    let a = ame_search(&[2, 2, 2], &cfg(7, 4)).unwrap();
    let b = ame_search(&[2, 2, 2], &cfg(7, 4)).unwrap();
    assert_eq!(a.seeds, b.seeds);
    assert_eq!(a.best_value, b.best_value);
    // GHZ reaches every single-qubit cut bound
    assert_eq!(a.success_count, 4);

    let f = fermion_extremal(4, 2, 1, NormSpec::new(2.0, 1).unwrap(), &cfg(8, 3)).unwrap();
    assert!((f.best_value.powi(2) - 0.5).abs() < 1e-9);
}

#[test]
fn rank_profile_dimension() {
    let p = RankProfile::new(vec![3, 3], vec![1, 1]).unwrap();
    // the largest subspace avoiding product states has the complementary dimension
    assert_eq!(9 - subspace_variety_dimension(&p), 4);
}
