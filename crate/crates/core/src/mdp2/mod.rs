//! Exact two-client MDP: action space, transition kernel, relative value
//! iteration, and structural checks on the resulting policy.

mod actions;
mod kernel;
mod rvi;
mod structure;
mod table;

pub use actions::{
    build_action_space, restricted_action_space, ActionKind, ActionOutage, ActionRestriction,
    ChannelOutage, FnOutage, OutageProvider, TwoClientAction,
};
pub use kernel::{transition_kernel, AgePair};
pub use rvi::{rvi_solve, MdpConfig};
pub use structure::{
    extract_boundaries, verify_switching, ActionGrid, RowBoundary, SwitchingBoundaries,
    SwitchingReport,
};
pub use table::PolicyTable;

use crate::channel::ChannelParams;
use crate::error::Result;

/// Solves the MDP for a physical channel with the default numerics.
pub fn solve_for_channel(
    params: &ChannelParams,
    weights: [f64; 2],
    levels: u32,
    delta_max: u32,
    restriction: ActionRestriction,
) -> Result<PolicyTable> {
    let actions = restricted_action_space(levels, params.target_rate(), restriction)?;
    let provider = ChannelOutage::new(params.clone())?;
    rvi_solve(&MdpConfig::new(weights, delta_max, actions), &provider)
}
