//! Subset enumeration: solve the envelope problem for every candidate
//! served set and keep the one with the best true objective.

use rayon::prelude::*;

use super::{solve_problem8, AllocInstance, AllocSolution};
use crate::channel::{ChannelParams, PowerAllocation};
use crate::error::{Error, Result};
use crate::scheduler::AoIState;

/// Largest client count accepted by [`enumerate_allocate`].
pub const DEFAULT_ENUMERATION_GUARD: usize = 12;

/// Winning subset of an enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub solution: AllocSolution,
    /// Clients with positive power, in decoding order.
    pub allocation: PowerAllocation,
    /// Number of clients actually served.
    pub k: usize,
}

impl Candidate {
    /// Expected weighted age drop `U - 1`.
    pub fn expected_drop(&self) -> f64 {
        self.solution.true_value - 1.0
    }
}

pub fn enumerate_allocate(state: &AoIState, params: &ChannelParams) -> Result<Candidate> {
    enumerate_allocate_with_guard(state, params, DEFAULT_ENUMERATION_GUARD)
}

pub fn enumerate_allocate_with_guard(
    state: &AoIState,
    params: &ChannelParams,
    guard: usize,
) -> Result<Candidate> {
    let n = params.num_clients();
    check_guard(n, guard)?;
    let subsets: Vec<Vec<usize>> = (1u32..(1u32 << n)).map(|mask| members(mask, n)).collect();
    best_of(state, params, subsets)
}

/// Best subset among those of exactly `k` clients.
pub fn best_subset_of_size(
    state: &AoIState,
    params: &ChannelParams,
    k: usize,
) -> Result<Candidate> {
    let n = params.num_clients();
    check_guard(n, DEFAULT_ENUMERATION_GUARD)?;
    if k == 0 || k > n {
        return Err(Error::invalid("k", format!("must lie in 1..={n}, got {k}")));
    }
    let subsets: Vec<Vec<usize>> = (1u32..(1u32 << n))
        .filter(|m| m.count_ones() as usize == k)
        .map(|mask| members(mask, n))
        .collect();
    best_of(state, params, subsets)
}

fn check_guard(n: usize, guard: usize) -> Result<()> {
    if n > guard || n >= 32 {
        return Err(Error::TooLarge {
            what: "subset enumeration",
            size: n,
            limit: guard.min(31),
            hint: "every one of the 2^N - 1 subsets is solved each slot",
        });
    }
    if n == 0 {
        return Err(Error::invalid("distances", "no clients"));
    }
    Ok(())
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

fn best_of(
    state: &AoIState,
    params: &ChannelParams,
    subsets: Vec<Vec<usize>>,
) -> Result<Candidate> {
    let rate = params.rate_factor();
    let solved: Vec<(Vec<usize>, AllocSolution)> = subsets
        .into_par_iter()
        .map(|subset| {
            let inst = AllocInstance::from_state(state, params, &subset)?;
            Ok((subset, solve_problem8(&inst)?))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(Vec<usize>, AllocSolution)> = None;
    for (subset, sol) in solved {
        let better = match &best {
            None => true,
            Some((bs, b)) => {
                sol.true_value > b.true_value
                    || (sol.true_value == b.true_value && (subset.len(), &subset) < (bs.len(), bs))
            }
        };
        if better {
            best = Some((subset, sol));
        }
    }
    let (_, solution) = best.expect("at least one subset");
    let allocation = solution.allocation(rate)?;
    Ok(Candidate {
        k: allocation.len(),
        allocation,
        solution,
    })
}
