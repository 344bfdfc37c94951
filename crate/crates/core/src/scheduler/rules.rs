use super::{AoIState, Decision, DecisionKind};
use crate::allocator::{best_subset_of_size, enumerate_allocate, g_value, Candidate};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::mdp2::{build_action_space, ChannelOutage, OutageProvider, TwoClientAction};

fn check_clients(state: &AoIState, params: &ChannelParams) -> Result<()> {
    if state.len() != params.num_clients() {
        return Err(Error::LengthMismatch {
            expected: params.num_clients(),
            actual: state.len(),
        });
    }
    Ok(())
}

/// One-slot expected weighted age drop of a two-client action.
pub fn expected_drop2(
    state: &AoIState,
    action: TwoClientAction,
    outage: &dyn OutageProvider,
) -> Result<f64> {
    if state.len() != 2 {
        return Err(Error::invalid(
            "ages",
            "two-client rule needs exactly two clients",
        ));
    }
    let o = outage.outage(action)?;
    let (a, w) = (state.ages(), state.weights());
    Ok(w[0] * (1.0 - o.near) * f64::from(a[0]) + w[1] * (1.0 - o.far) * f64::from(a[1]) - 1.0)
}

/// Action with the largest expected drop; ties go to the smaller index.
pub fn maxweight_over(
    state: &AoIState,
    actions: &[TwoClientAction],
    outage: &dyn OutageProvider,
) -> Result<(TwoClientAction, f64)> {
    let mut best: Option<(TwoClientAction, f64)> = None;
    for &a in actions {
        let v = expected_drop2(state, a, outage)?;
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((a, v));
        }
    }
    best.ok_or_else(|| Error::invalid("actions", "empty action set"))
}

/// Max-weight rule over the reduced discrete action set with `levels`
/// power levels.
pub fn two_client_maxweight(
    state: &AoIState,
    params: &ChannelParams,
    levels: u32,
) -> Result<Decision> {
    check_clients(state, params)?;
    let actions = build_action_space(levels, params.target_rate(), true)?;
    let provider = ChannelOutage::new(params.clone())?;
    let (action, drop) = maxweight_over(state, &actions, &provider)?;
    Ok(Decision {
        kind: DecisionKind::TwoClient(action),
        expected_drop: drop,
    })
}

/// OMA to the client with the largest `w_i (1 - P_i^O) Δ_i`; ties go to
/// the lowest index.
pub fn mw_oma(state: &AoIState, params: &ChannelParams) -> Result<Decision> {
    check_clients(state, params)?;
    let budget = params.power_budget();
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..state.len() {
        // same arithmetic as the allocator's single-client objective
        let c = state.weights()[i] * f64::from(state.ages()[i]);
        let v = g_value(budget, c, params.scale(i));
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(Decision {
        kind: DecisionKind::Oma { client: best.0 },
        expected_drop: best.1 - 1.0,
    })
}

fn from_candidate(c: Candidate, params: &ChannelParams) -> Decision {
    let drop = c.expected_drop();
    Decision::from_allocation(c.allocation, params.power_budget(), drop)
}

/// Best NOMA transmission to exactly `k` clients.
pub fn fixed_k_noma(state: &AoIState, params: &ChannelParams, k: usize) -> Result<Decision> {
    check_clients(state, params)?;
    Ok(from_candidate(
        best_subset_of_size(state, params, k)?,
        params,
    ))
}

/// Adaptive NOMA/OMA: best subset of any size.
pub fn adaptive_noma_oma(state: &AoIState, params: &ChannelParams) -> Result<Decision> {
    check_clients(state, params)?;
    Ok(from_candidate(enumerate_allocate(state, params)?, params))
}
