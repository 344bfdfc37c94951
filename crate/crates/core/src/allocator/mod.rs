//! Multi-client NOMA power allocation.
//!
//! For a fixed served subset, listed in SIC decoding order, the expected
//! weighted age drop is `Σ_k c_k exp(-s_k / p̂_k) - 1` in the transformed
//! powers `p̂`. That objective is not concave, so it is replaced by its
//! concave upper envelope and maximized over the polytope
//! `{p̂_1 >= ... >= p̂_K >= 0, Σ_k (r+1)^(k-1) p̂_k <= p̄}`. The loss from
//! doing so is at most `e^{-2} Σ c_k`. Subsets are then enumerated and
//! compared on the true objective.

mod enumerate;
mod envelope;
mod oracle;
mod projection;
mod solver;

pub use enumerate::{
    best_subset_of_size, enumerate_allocate, enumerate_allocate_with_guard, Candidate,
    DEFAULT_ENUMERATION_GUARD,
};
pub use envelope::{
    envelope_objective, evaluate_true_objective, g_max_slope, g_tilde, g_tilde_slope, g_value,
    gap_bound,
};
pub use oracle::{brute_force_problem7, grid_error_bound, GridOptimum, ORACLE_MAX_CLIENTS};
pub use projection::project_onto_polytope;
pub use solver::{solve_problem8, solve_problem8_with, SolverOptions};

use crate::channel::{from_hat_powers, ChannelParams, PowerAllocation};
use crate::error::{Error, Result};
use crate::scheduler::AoIState;

/// One fixed-subset allocation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocInstance {
    served: Vec<usize>,
    coefficients: Vec<f64>,
    scales: Vec<f64>,
    budget: f64,
    rate_factor: f64,
}

impl AllocInstance {
    /// `served` is in decoding order; `scales` must be nonincreasing along
    /// it (equal distances give equal scales).
    pub fn new(
        served: Vec<usize>,
        coefficients: Vec<f64>,
        scales: Vec<f64>,
        budget: f64,
        rate_factor: f64,
    ) -> Result<Self> {
        let k = served.len();
        for len in [coefficients.len(), scales.len()] {
            if len != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    actual: len,
                });
            }
        }
        if coefficients.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::invalid(
                "coefficients",
                "must be finite and nonnegative",
            ));
        }
        if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("scales", "must be finite and positive"));
        }
        if scales.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid(
                "scales",
                "must be nonincreasing in decoding order (farthest client first)",
            ));
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::invalid("budget", "must be finite and positive"));
        }
        if !(rate_factor.is_finite() && rate_factor > 0.0) {
            return Err(Error::invalid("rate_factor", "must be finite and positive"));
        }
        Ok(Self {
            served,
            coefficients,
            scales,
            budget,
            rate_factor,
        })
    }

    /// Instance for serving `subset` in the given age state. The subset is
    /// put into decoding order.
    pub fn from_state(state: &AoIState, params: &ChannelParams, subset: &[usize]) -> Result<Self> {
        if state.len() != params.num_clients() {
            return Err(Error::LengthMismatch {
                expected: params.num_clients(),
                actual: state.len(),
            });
        }
        if let Some(&bad) = subset.iter().find(|&&i| i >= state.len()) {
            return Err(Error::invalid(
                "subset",
                format!("client {bad} does not exist"),
            ));
        }
        let served = params.decoding_order(subset);
        let coefficients = served
            .iter()
            .map(|&i| state.weights()[i] * f64::from(state.ages()[i]))
            .collect();
        let scales = served.iter().map(|&i| params.scale(i)).collect();
        Self::new(
            served,
            coefficients,
            scales,
            params.power_budget(),
            params.rate_factor(),
        )
    }

    pub fn served(&self) -> &[usize] {
        &self.served
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn rate_factor(&self) -> f64 {
        self.rate_factor
    }

    pub fn len(&self) -> usize {
        self.served.len()
    }

    pub fn is_empty(&self) -> bool {
        self.served.is_empty()
    }

    /// Budget weights `(r+1)^(k-1)` of the transformed powers.
    pub fn budget_weights(&self) -> Vec<f64> {
        let base = 1.0 + self.rate_factor;
        (0..self.len()).map(|k| base.powi(k as i32)).collect()
    }
}

/// Result of one envelope solve.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocSolution {
    pub served: Vec<usize>,
    pub hat_powers: Vec<f64>,
    /// Envelope objective at `hat_powers`.
    pub envelope_value: f64,
    /// True objective at `hat_powers` (no `-1`).
    pub true_value: f64,
    /// `e^{-2} Σ c_k`.
    pub gap_certificate: f64,
    /// Scaled first-order residual at termination.
    pub residual: f64,
    pub iterations: usize,
}

impl AllocSolution {
    /// Raw-power allocation of the clients that actually get power. Zero
    /// transformed powers form a suffix and those clients count as unserved.
    pub fn allocation(&self, rate_factor: f64) -> Result<PowerAllocation> {
        let k = self.hat_powers.iter().take_while(|&&p| p > 0.0).count();
        PowerAllocation::from_hat(
            self.served[..k].to_vec(),
            self.hat_powers[..k].to_vec(),
            rate_factor,
        )
    }

    /// Raw powers of the whole subset, in decoding order.
    pub fn raw_powers(&self, rate_factor: f64) -> Vec<f64> {
        from_hat_powers(&self.hat_powers, rate_factor)
    }
}
