//! Brute-force max-weight over a power grid, used as a reference for the
//! envelope-based allocator.

use rayon::prelude::*;

use super::{AoIState, Decision};
use crate::channel::{ChannelParams, PowerAllocation};
use crate::error::{Error, Result};

pub const EXHAUSTIVE_MAX_CLIENTS: usize = 4;

struct Grid {
    order: Vec<usize>,
    coef: Vec<f64>,
    scale: Vec<f64>,
    unit: f64,
    rate: f64,
    levels: u32,
}

impl Grid {
    /// `Σ_i c_i (1 - P_i)` for per-client grid counts `k` (client order).
    fn value(&self, k: &[u32]) -> f64 {
        let n = self.order.len();
        let mut hat = [0.0f64; EXHAUSTIVE_MAX_CLIENTS];
        let mut tail = 0.0;
        for &i in self.order.iter().rev() {
            if k[i] > 0 {
                let raw = f64::from(k[i]) * self.unit;
                hat[i] = raw - self.rate * tail;
                tail += raw;
            }
        }
        let mut worst = 0.0f64;
        let mut total = 0.0;
        for &i in &self.order[..n] {
            if k[i] == 0 {
                continue;
            }
            if hat[i] <= 0.0 {
                break;
            }
            worst = worst.max(1.0 / hat[i]);
            total += self.coef[i] * (-self.scale[i] * worst).exp();
        }
        total
    }

    /// Best point with `k[..fixed]` given, searching the rest in
    /// lexicographic order.
    fn search(&self, k: &mut [u32], fixed: usize, left: u32, best: &mut (f64, Vec<u32>)) {
        if fixed == k.len() {
            let v = self.value(k);
            if v > best.0 {
                *best = (v, k.to_vec());
            }
            return;
        }
        for j in 0..=left {
            k[fixed] = j;
            self.search(k, fixed + 1, left - j, best);
        }
        k[fixed] = 0;
    }
}

/// Exhaustive max-weight over raw powers `k_i · p̄ / levels` with
/// `Σ k_i <= levels`, using the exact SIC outage for every grid point.
pub fn exhaustive_mw(state: &AoIState, params: &ChannelParams, levels: u32) -> Result<Decision> {
    let n = params.num_clients();
    if state.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: state.len(),
        });
    }
    if n > EXHAUSTIVE_MAX_CLIENTS {
        return Err(Error::TooLarge {
            what: "exhaustive max-weight search",
            size: n,
            limit: EXHAUSTIVE_MAX_CLIENTS,
            hint: "the grid has about levels^N / N! points",
        });
    }
    if levels < 10 {
        return Err(Error::invalid(
            "grid_levels",
            format!("must be >= 10, got {levels}"),
        ));
    }
    let budget = params.power_budget();
    let grid = Grid {
        order: params.decoding_order(&(0..n).collect::<Vec<_>>()),
        coef: (0..n)
            .map(|i| state.weights()[i] * f64::from(state.ages()[i]))
            .collect(),
        scale: (0..n).map(|i| params.scale(i)).collect(),
        unit: budget / f64::from(levels),
        rate: params.rate_factor(),
        levels,
    };

    let per_first: Vec<(f64, Vec<u32>)> = (0..=grid.levels)
        .into_par_iter()
        .map(|k0| {
            let mut k = vec![0; n];
            k[0] = k0;
            let mut best = (f64::NEG_INFINITY, vec![]);
            grid.search(&mut k, 1, grid.levels - k0, &mut best);
            best
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, vec![]);
    for cand in per_first {
        if cand.0 > best.0 {
            best = cand;
        }
    }

    let (value, k) = best;
    let served: Vec<usize> = grid.order.iter().copied().filter(|&i| k[i] > 0).collect();
    let raw: Vec<f64> = served
        .iter()
        .map(|&i| {
            if k[i] == levels {
                budget
            } else {
                f64::from(k[i]) * grid.unit
            }
        })
        .collect();
    let alloc = PowerAllocation::from_raw(served, raw, grid.rate)?;
    Ok(Decision::from_allocation(alloc, budget, value - 1.0))
}
