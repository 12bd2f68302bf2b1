//! Search for absolutely maximally entangled states: maximize `Σ_i λ_i`
//! across every balanced cut simultaneously, with no subspace constraint.

use std::sync::Arc;
use std::time::Instant;

use serde_json::json;

use super::{with_target, ExperimentResult, Target};
use crate::error::{Error, Result};
use crate::measures::NormSpec;
use crate::optimizer::{run_single, IterationConfig, Objective, TARGET_TOL};
use crate::subspaces::IdentityProjector;
use crate::tensor::{Cut, CutLayout};
use crate::C64;

/// All `⌊n/2⌋`-subsets of the factors; for even `n` only the ones
/// containing factor 0, since complementary cuts share their spectrum.
pub fn ame_cuts(n: usize) -> Result<Vec<Cut>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("AME search needs at least 2 factors, got {n}")));
    }
    let m = n / 2;
    let mut cuts = Vec::new();
    let mut t: Vec<usize> = (0..m).collect();
    loop {
        if n % 2 == 1 || t[0] == 0 {
            cuts.push(Cut::new(t.clone(), n)?);
        }
        let Some(i) = (0..m).rev().find(|&i| t[i] < n - (m - i)) else {
            break;
        };
        t[i] += 1;
        for j in i + 1..m {
            t[j] = t[j - 1] + 1;
        }
    }
    Ok(cuts)
}

fn balanced_objective(dims: &[usize]) -> Result<(Objective, Vec<usize>)> {
    let total: usize = dims.iter().product();
    let cuts = ame_cuts(dims.len())?;
    let mut terms = Vec::with_capacity(cuts.len());
    let mut n_s = Vec::with_capacity(cuts.len());
    for cut in cuts {
        let shape = cut.shape(dims)?;
        n_s.push(shape.n_s);
        terms.push((cut, NormSpec::new(1.0, shape.n_s)?));
    }
    let obj = Objective::new(Arc::new(IdentityProjector::new(total)), dims.to_vec(), terms)?;
    Ok((obj, n_s))
}

/// Runs the multi-cut search. A restart succeeds when every cut is within
/// `1e-5` of `√n_s`.
pub fn ame_search(dims: &[usize], config: &IterationConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let (objective, n_s) = balanced_objective(dims)?;
    let bounds: Vec<f64> = n_s.iter().map(|&n| (n as f64).sqrt()).collect();
    let target = Target::new(bounds.iter().sum(), "every balanced cut at sqrt(n_s)");
    let cfg = with_target(config, Some(&target));
    let mut runs = run_single(&objective, &cfg)?;

    let mut deficits = Vec::new();
    for r in &mut runs.restarts {
        let d: Vec<f64> = r.term_values.iter().zip(&bounds).map(|(v, b)| b - v).collect();
        let ok = d.iter().all(|x| x.abs() < TARGET_TOL);
        r.success = Some(ok);
        if ok && r.iterations_to_target.is_none() {
            r.iterations_to_target = Some(r.iterations);
        }
        deficits.push(d);
    }
    let successes: Vec<_> = runs.restarts.iter().filter(|r| r.success == Some(true)).collect();
    runs.success_count = successes.len();
    runs.mean_iterations_successes = (!successes.is_empty()).then(|| {
        successes.iter().map(|r| r.iterations_to_target.unwrap_or(r.iterations)).sum::<usize>() as f64
            / successes.len() as f64
    });

    let cuts: Vec<Vec<usize>> = objective.terms().iter().map(|t| t.cut.side_a().to_vec()).collect();
    let params = json!({ "dims": dims, "cuts": cuts, "p": 1.0 });
    let mut res = ExperimentResult::from_report("ame_search", params, Some(target), runs, &cfg, start.elapsed());
    res.details = json!({ "cut_bounds": bounds, "deficits": deficits });
    Ok(res)
}

/// Largest deviation of a reduced spectrum from `1/n_s` over all balanced
/// cuts (the smaller side of each cut is compared).
pub fn ame_spectrum_deviation(dims: &[usize], amps: &[C64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for cut in ame_cuts(dims.len())? {
        let layout = CutLayout::new(dims, &cut)?;
        let sd = layout.decompose(amps)?;
        let n_s = sd.n_s() as f64;
        for l in &sd.coeffs {
            worst = worst.max((l * l - 1.0 / n_s).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_enumeration() {
        let sides = |n| ame_cuts(n).unwrap().iter().map(|c| c.side_a().to_vec()).collect::<Vec<_>>();
        assert_eq!(sides(3), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(sides(4), vec![vec![0, 1], vec![0, 2], vec![0, 3]]);
        assert_eq!(sides(5).len(), 10);
        assert_eq!(sides(6).len(), 10);
        assert!(ame_cuts(1).is_err());
    }

    #[test]
    fn qutrit_triple_found() {
        let cfg = IterationConfig { seed: 1, restarts: 3, ..Default::default() };
        let res = ame_search(&[3, 3, 3], &cfg).unwrap();
        assert_eq!(res.success_count, 3);
        let best = &res.runs.best().state;
        assert!(ame_spectrum_deviation(&[3, 3, 3], best).unwrap() < 1e-4);
    }

    #[test]
    fn four_qubits_fail() {
        let cfg = IterationConfig { seed: 1, restarts: 3, ..Default::default() };
        let res = ame_search(&[2, 2, 2, 2], &cfg).unwrap();
        assert_eq!(res.success_count, 0);
        let deficits = res.details["deficits"].as_array().unwrap();
        assert!(deficits.iter().all(|d| d.as_array().unwrap().iter().any(|x| x.as_f64().unwrap() > 1e-5)));
    }
}
