//! Exhaustive grid search on the true (non-concave) objective, used to
//! validate the envelope solver.

use std::f64::consts::E;

use super::envelope::evaluate_true_objective;
use super::AllocInstance;
use crate::error::{Error, Result};

pub const ORACLE_MAX_CLIENTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// Maximizes the true objective over grid points `i · p̄/M` of the
/// feasible polytope, `M = round(p̄ / step)`.
///
/// With `ordered = false` the nonincreasing constraint is dropped and the
/// prefix-max form of the objective is used. The last coordinate only
/// enters its own term, monotonically, so it is set to its largest
/// feasible grid value rather than enumerated; this gives the same optimum
/// as a full enumeration. Halving the step refines the grid, so the value
/// never decreases under refinement by an integer factor.
pub fn brute_force_problem7(inst: &AllocInstance, step: f64, ordered: bool) -> Result<GridOptimum> {
    let k = inst.len();
    if k > ORACLE_MAX_CLIENTS {
        return Err(Error::TooLarge {
            what: "grid oracle",
            size: k,
            limit: ORACLE_MAX_CLIENTS,
            hint: "grid size grows as (p̄/step)^(K-1)",
        });
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid("step", "must be finite and positive"));
    }
    let budget = inst.budget();
    if k == 0 {
        return Ok(GridOptimum {
            value: 0.0,
            argmax: vec![],
        });
    }
    let m = (budget / step).round().max(1.0) as u64;
    let h = budget / m as f64;
    let beta = inst.budget_weights();
    // largest j with used + beta·j <= m, in grid units
    let max_index =
        |used: f64, b: f64| -> u64 { (((m as f64 - used) / b) + 1e-9).floor().max(0.0) as u64 };

    let mut best = GridOptimum {
        value: f64::NEG_INFINITY,
        argmax: vec![],
    };
    let mut consider = |idx: &[u64]| {
        let x: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
        let v = evaluate_true_objective(&x, inst);
        if v > best.value {
            best = GridOptimum {
                value: v,
                argmax: x,
            };
        }
    };

    match k {
        1 => consider(&[m]),
        2 => {
            for i1 in 0..=m {
                let mut i2 = max_index(i1 as f64, beta[1]);
                if ordered {
                    i2 = i2.min(i1);
                }
                consider(&[i1, i2]);
            }
        }
        _ => {
            for i1 in 0..=m {
                let top2 = max_index(i1 as f64, beta[1]);
                let top2 = if ordered { top2.min(i1) } else { top2 };
                for i2 in 0..=top2 {
                    let used = i1 as f64 + beta[1] * i2 as f64;
                    let mut i3 = max_index(used, beta[2]);
                    if ordered {
                        i3 = i3.min(i2);
                    }
                    consider(&[i1, i2, i3]);
                }
            }
        }
    }
    Ok(best)
}

/// Bound on how far the grid optimum can fall below the continuous one:
/// rounding every coordinate of the true optimizer down to the grid keeps
/// it feasible and ordered, and each term moves by at most its maximal
/// slope `4 c_k / (e² s_k)` times the grid spacing.
pub fn grid_error_bound(inst: &AllocInstance, step: f64) -> f64 {
    let m = (inst.budget() / step).round().max(1.0);
    let h = inst.budget() / m;
    let lipschitz: f64 = inst
        .coefficients()
        .iter()
        .zip(inst.scales())
        .map(|(c, s)| 4.0 * c / (E * E * s))
        .sum();
    h * lipschitz
}
