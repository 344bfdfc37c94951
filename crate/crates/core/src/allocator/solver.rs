//! Spectral projected-gradient ascent on the envelope problem.

use super::envelope::{envelope_objective, evaluate_true_objective, g_tilde_slope, gap_bound};
use super::projection::project_onto_polytope;
use super::{AllocInstance, AllocSolution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once the scaled residual is at or below this.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iters: 100_000,
        }
    }
}

/// Maximizes the envelope objective with default options.
pub fn solve_problem8(inst: &AllocInstance) -> Result<AllocSolution> {
    solve_problem8_with(inst, SolverOptions::default())
}

pub fn solve_problem8_with(inst: &AllocInstance, opts: SolverOptions) -> Result<AllocSolution> {
    let k = inst.len();
    if k == 0 {
        return Err(Error::invalid("served", "need at least one client"));
    }
    let budget = inst.budget();
    let total_c: f64 = inst.coefficients().iter().sum();
    let finish = |hat: Vec<f64>, residual, iterations| AllocSolution {
        served: inst.served().to_vec(),
        envelope_value: envelope_objective(&hat, inst),
        true_value: evaluate_true_objective(&hat, inst),
        gap_certificate: gap_bound(inst),
        hat_powers: hat,
        residual,
        iterations,
    };
    if total_c == 0.0 {
        return Ok(finish(vec![0.0; k], 0.0, 0));
    }
    if k == 1 {
        return Ok(finish(vec![budget], 0.0, 0));
    }

    let beta = inst.budget_weights();
    let gradient = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(inst.coefficients())
            .zip(inst.scales())
            .map(|((&x, &c), &s)| g_tilde_slope(x, c, s))
            .collect()
    };
    // natural step scale: gradients are ~c/s, coordinates ~p̄
    let theta = budget * budget / total_c;
    let residual_of = |x: &[f64], g: &[f64]| -> f64 {
        let trial: Vec<f64> = x.iter().zip(g).map(|(a, b)| a + theta * b).collect();
        let p = project_onto_polytope(&trial, &beta, budget);
        x.iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / budget
    };

    // interior start exhausting the budget
    let mut x: Vec<f64> = beta.iter().map(|b| budget / (k as f64 * b)).collect();
    let mut fx = envelope_objective(&x, inst);
    let mut g = gradient(&x);
    let mut step = theta;
    let mut residual = residual_of(&x, &g);

    for iter in 0..opts.max_iters {
        if residual <= opts.tolerance {
            return Ok(finish(x, residual, iter));
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + t * b).collect();
            let xn = project_onto_polytope(&trial, &beta, budget);
            let ascent: f64 = g
                .iter()
                .zip(xn.iter().zip(&x))
                .map(|(gi, (a, b))| gi * (a - b))
                .sum();
            let fn_ = envelope_objective(&xn, inst);
            if fn_ >= fx + 1e-4 * ascent - 1e-15 * fx.abs() {
                accepted = Some((xn, fn_));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            break;
        };
        let gn = gradient(&xn);
        // Barzilai-Borwein step for the next iteration (ascent on a concave
        // function: curvature is -(Δg)·(Δx)). Without curvature the model is
        // linear along the last move, so try the longest step and let the
        // line search cut it back. Longer steps than that lose digits when
        // the projection subtracts the budget multiplier.
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..k {
            let sx = xn[i] - x[i];
            ss += sx * sx;
            sy -= sx * (gn[i] - g[i]);
        }
        let longest = theta * 1e4;
        step = if sy > 0.0 { ss / sy } else { longest };
        step = step.clamp(theta * 1e-10, longest);
        x = xn;
        fx = fn_;
        g = gn;
        residual = residual_of(&x, &g);
    }
    if residual <= opts.tolerance {
        let iters = opts.max_iters;
        return Ok(finish(x, residual, iters));
    }
    Err(Error::NonConvergence {
        what: "envelope power allocation",
        iterations: opts.max_iters,
        residual,
    })
}
