use super::actions::{ActionOutage, TwoClientAction};

/// Age pair `(Δ1, Δ2)`, both in `1..=delta_max`.
pub type AgePair = (u32, u32);

/// Successor distribution of `state` under `action`.
///
/// OMA actions yield the two successors of the served client's
/// success/failure; NOMA actions yield four product-form successors. Ages
/// saturate at `delta_max`.
pub fn transition_kernel(
    state: AgePair,
    action: TwoClientAction,
    outage: ActionOutage,
    delta_max: u32,
) -> Vec<(AgePair, f64)> {
    let (d1, d2) = state;
    let n1 = (d1 + 1).min(delta_max);
    let n2 = (d2 + 1).min(delta_max);
    let (p1, p2) = (outage.near, outage.far);
    if action.index() == 0 {
        vec![((1, n2), 1.0 - p1), ((n1, n2), p1)]
    } else if action.index() == action.levels() {
        vec![((n1, 1), 1.0 - p2), ((n1, n2), p2)]
    } else {
        vec![
            ((1, n2), (1.0 - p1) * p2),
            ((n1, 1), p1 * (1.0 - p2)),
            ((1, 1), (1.0 - p1) * (1.0 - p2)),
            ((n1, n2), p1 * p2),
        ]
    }
}
