//! Policies as stateful per-replication objects.
//!
//! A [`PolicySpec`] names a rule and its parameters. Preparing it against
//! a channel does the expensive one-off work (solving the MDP, building
//! action sets) and yields a [`PreparedPolicy`], which hands out
//! independent [`Policy`] instances, one per simulation worker.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::{
    adaptive_noma_oma, check_weights, exhaustive_mw, expected_drop2, fixed_k_noma, maxweight_over,
    mw_oma, AoIState, Decision, DecisionKind,
};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::mdp2::{
    build_action_space, solve_for_channel, ActionRestriction, ChannelOutage, PolicyTable,
    TwoClientAction,
};

pub trait Policy: Send {
    fn decide(&mut self, state: &AoIState) -> Result<Decision>;
}

/// Wraps a closure as a [`Policy`].
pub struct FnPolicy<F>(pub F);

impl<F> Policy for FnPolicy<F>
where
    F: FnMut(&AoIState) -> Result<Decision> + Send,
{
    fn decide(&mut self, state: &AoIState) -> Result<Decision> {
        (self.0)(state)
    }
}

/// Creates fresh policy instances; shared across worker threads.
pub trait PolicyFactory: Sync {
    fn create(&self) -> Box<dyn Policy>;
}

impl<F> PolicyFactory for F
where
    F: Fn() -> Box<dyn Policy> + Sync,
{
    fn create(&self) -> Box<dyn Policy> {
        self()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// Table policy from relative value iteration (two clients).
    Mdp {
        restriction: ActionRestriction,
        levels: u32,
        delta_max: u32,
    },
    /// Max-weight over the reduced discrete action set (two clients).
    MaxWeight2 { levels: u32 },
    /// Max-weight OMA: one client per slot at full power.
    MwOma,
    /// Adaptive NOMA/OMA via subset enumeration and the envelope allocator.
    ApNomaOma,
    /// NOMA to exactly `k` clients.
    ApNomaFixedK { k: usize },
    /// Max-weight by exhaustive power-grid search (small N).
    MwExhaustive { grid_levels: u32 },
}

impl PolicySpec {
    pub const NAMES: [&'static str; 8] = [
        "mdp-optimal",
        "mdp-oma",
        "mdp-noma",
        "maxweight2",
        "mw-oma",
        "ap-noma-oma",
        "ap-noma-fixed-k",
        "mw-exhaustive",
    ];

    /// Builds a spec from its name. `levels`, `delta_max`, `k` and
    /// `grid_levels` are read only by the rules that use them.
    pub fn from_name(
        name: &str,
        levels: u32,
        delta_max: u32,
        k: usize,
        grid_levels: u32,
    ) -> Result<Self> {
        let mdp = |restriction| PolicySpec::Mdp {
            restriction,
            levels,
            delta_max,
        };
        Ok(match name {
            "mdp-optimal" => mdp(ActionRestriction::Adaptive),
            "mdp-oma" => mdp(ActionRestriction::OmaOnly),
            "mdp-noma" => mdp(ActionRestriction::NomaOnly),
            "maxweight2" => PolicySpec::MaxWeight2 { levels },
            "mw-oma" => PolicySpec::MwOma,
            "ap-noma-oma" => PolicySpec::ApNomaOma,
            "ap-noma-fixed-k" => PolicySpec::ApNomaFixedK { k },
            "mw-exhaustive" => PolicySpec::MwExhaustive { grid_levels },
            other => {
                return Err(Error::invalid(
                    "policy",
                    format!(
                        "unknown policy `{other}` (expected one of {})",
                        Self::NAMES.join(", ")
                    ),
                ))
            }
        })
    }

    /// Stable short name, used as the `policy` column of sweep output.
    pub fn name(&self) -> String {
        match self {
            PolicySpec::Mdp { restriction, .. } => match restriction {
                ActionRestriction::Adaptive | ActionRestriction::AdaptiveFull => "mdp-optimal",
                ActionRestriction::OmaOnly => "mdp-oma",
                ActionRestriction::NomaOnly => "mdp-noma",
            }
            .to_string(),
            PolicySpec::MaxWeight2 { .. } => "maxweight2".to_string(),
            PolicySpec::MwOma => "mw-oma".to_string(),
            PolicySpec::ApNomaOma => "ap-noma-oma".to_string(),
            PolicySpec::ApNomaFixedK { k } => format!("ap-noma-fixed-{k}"),
            PolicySpec::MwExhaustive { .. } => "mw-exhaustive".to_string(),
        }
    }

    /// Checks the spec against the channel and does any one-off work.
    pub fn prepare(&self, params: &ChannelParams, weights: &[f64]) -> Result<PreparedPolicy> {
        let n = params.num_clients();
        if weights.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: weights.len(),
            });
        }
        check_weights(weights)?;
        let two_clients = || {
            if n == 2 {
                Ok(())
            } else {
                Err(Error::invalid(
                    "distances",
                    format!(
                        "policy `{}` needs exactly two clients, got {n}",
                        self.name()
                    ),
                ))
            }
        };
        let kind = match *self {
            PolicySpec::Mdp {
                restriction,
                levels,
                delta_max,
            } => {
                two_clients()?;
                let table = solve_for_channel(
                    params,
                    [weights[0], weights[1]],
                    levels,
                    delta_max,
                    restriction,
                )?;
                Prepared::Table(Arc::new(table))
            }
            PolicySpec::MaxWeight2 { levels } => {
                two_clients()?;
                Prepared::MaxWeight(Arc::new(build_action_space(
                    levels,
                    params.target_rate(),
                    true,
                )?))
            }
            PolicySpec::ApNomaFixedK { k } if k == 0 || k > n => {
                return Err(Error::invalid("k", format!("must lie in 1..={n}, got {k}")));
            }
            PolicySpec::MwExhaustive { grid_levels } => {
                if n > super::EXHAUSTIVE_MAX_CLIENTS {
                    return Err(Error::TooLarge {
                        what: "exhaustive max-weight search",
                        size: n,
                        limit: super::EXHAUSTIVE_MAX_CLIENTS,
                        hint: "the grid has about levels^N / N! points",
                    });
                }
                if grid_levels < 10 {
                    return Err(Error::invalid(
                        "grid_levels",
                        format!("must be >= 10, got {grid_levels}"),
                    ));
                }
                Prepared::Rule
            }
            PolicySpec::ApNomaOma if n > crate::allocator::DEFAULT_ENUMERATION_GUARD => {
                return Err(Error::TooLarge {
                    what: "subset enumeration",
                    size: n,
                    limit: crate::allocator::DEFAULT_ENUMERATION_GUARD,
                    hint: "every one of the 2^N - 1 subsets is solved each slot",
                });
            }
            _ => Prepared::Rule,
        };
        Ok(PreparedPolicy {
            spec: self.clone(),
            params: Arc::new(params.clone()),
            kind,
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone)]
enum Prepared {
    Table(Arc<PolicyTable>),
    MaxWeight(Arc<Vec<TwoClientAction>>),
    Rule,
}

/// A spec bound to a channel, ready to hand out policy instances.
#[derive(Debug, Clone)]
pub struct PreparedPolicy {
    spec: PolicySpec,
    params: Arc<ChannelParams>,
    kind: Prepared,
}

impl PreparedPolicy {
    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    /// The solved MDP, for table policies.
    pub fn table(&self) -> Option<&PolicyTable> {
        match &self.kind {
            Prepared::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn instance(&self) -> SpecPolicy {
        SpecPolicy {
            prepared: self.clone(),
            outage: ChannelOutage::new((*self.params).clone()).ok(),
            cache: DecisionCache::default(),
        }
    }
}

impl PolicyFactory for PreparedPolicy {
    fn create(&self) -> Box<dyn Policy> {
        Box::new(self.instance())
    }
}

/// Instance of a [`PreparedPolicy`] with its own decision cache.
pub struct SpecPolicy {
    prepared: PreparedPolicy,
    outage: Option<ChannelOutage>,
    cache: DecisionCache,
}

impl SpecPolicy {
    fn compute(&self, state: &AoIState) -> Result<Decision> {
        let params = &*self.prepared.params;
        match (&self.prepared.kind, &self.prepared.spec) {
            (Prepared::Table(table), _) => {
                let action = table.two_client_action((state.ages()[0], state.ages()[1]));
                let outage = self.outage.as_ref().expect("two-client channel");
                Ok(Decision {
                    kind: DecisionKind::TwoClient(action),
                    expected_drop: expected_drop2(state, action, outage)?,
                })
            }
            (Prepared::MaxWeight(actions), _) => {
                let outage = self.outage.as_ref().expect("two-client channel");
                let (action, drop) = maxweight_over(state, actions, outage)?;
                Ok(Decision {
                    kind: DecisionKind::TwoClient(action),
                    expected_drop: drop,
                })
            }
            (Prepared::Rule, PolicySpec::MwOma) => mw_oma(state, params),
            (Prepared::Rule, PolicySpec::ApNomaOma) => adaptive_noma_oma(state, params),
            (Prepared::Rule, PolicySpec::ApNomaFixedK { k }) => fixed_k_noma(state, params, *k),
            (Prepared::Rule, PolicySpec::MwExhaustive { grid_levels }) => {
                exhaustive_mw(state, params, *grid_levels)
            }
            (Prepared::Rule, spec) => unreachable!("{spec} is always prepared with data"),
        }
    }
}

impl Policy for SpecPolicy {
    fn decide(&mut self, state: &AoIState) -> Result<Decision> {
        if state.len() != self.prepared.params.num_clients() {
            return Err(Error::LengthMismatch {
                expected: self.prepared.params.num_clients(),
                actual: state.len(),
            });
        }
        if let Some(d) = self.cache.get(state.ages()) {
            return Ok(d.clone());
        }
        let d = self.compute(state)?;
        self.cache.insert(state.ages().to_vec(), d.clone());
        Ok(d)
    }
}

/// Bounded memo of decisions keyed by the age vector. When full it is
/// cleared wholesale; simulations keep revisiting a small set of states,
/// so the working set refills quickly.
#[derive(Debug, Clone)]
pub struct DecisionCache {
    map: HashMap<Vec<u32>, Decision>,
    capacity: usize,
}

impl Default for DecisionCache {
    fn default() -> Self {
        Self::with_capacity(1 << 16)
    }
}

impl DecisionCache {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            map: HashMap::new(),
            capacity: capacity.max(1),
        }
    }

    pub fn get(&self, ages: &[u32]) -> Option<&Decision> {
        self.map.get(ages)
    }

    pub fn insert(&mut self, ages: Vec<u32>, decision: Decision) {
        if self.map.len() >= self.capacity {
            self.map.clear();
        }
        self.map.insert(ages, decision);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cell() -> ChannelParams {
        ChannelParams::from_snr_db(vec![2.0, 4.0], 2.0, 18.0, 1.0).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for name in PolicySpec::NAMES {
            let spec = PolicySpec::from_name(name, 10, 50, 2, 20).unwrap();
            let expected = if name == "ap-noma-fixed-k" {
                "ap-noma-fixed-2"
            } else {
                name
            };
            assert_eq!(spec.name(), expected);
        }
        assert!(PolicySpec::from_name("nope", 10, 50, 1, 20).is_err());
    }

    #[test]
    fn two_client_policies_need_two_clients() {
        let params = ChannelParams::from_snr_db(vec![3.0, 2.0, 1.0], 2.0, 18.0, 1.0).unwrap();
        let w = [1.0 / 3.0; 3];
        assert!(PolicySpec::MaxWeight2 { levels: 10 }
            .prepare(&params, &w)
            .is_err());
        assert!(PolicySpec::ApNomaFixedK { k: 4 }
            .prepare(&params, &w)
            .is_err());
        assert!(PolicySpec::ApNomaFixedK { k: 3 }
            .prepare(&params, &w)
            .is_ok());
    }

    #[test]
    fn table_policy_clamps_ages() {
        let spec = PolicySpec::Mdp {
            restriction: ActionRestriction::Adaptive,
            levels: 10,
            delta_max: 40,
        };
        let prepared = spec.prepare(&two_cell(), &[0.5, 0.5]).unwrap();
        let mut policy = prepared.create();
        let far = AoIState::new(vec![500, 3], vec![0.5, 0.5]).unwrap();
        let clamped = AoIState::new(vec![40, 3], vec![0.5, 0.5]).unwrap();
        assert_eq!(
            policy.decide(&far).unwrap().kind,
            policy.decide(&clamped).unwrap().kind
        );
    }

    #[test]
    fn cache_clears_when_full() {
        let mut cache = DecisionCache::with_capacity(2);
        let d = Decision {
            kind: DecisionKind::Idle,
            expected_drop: -1.0,
        };
        cache.insert(vec![1], d.clone());
        cache.insert(vec![2], d.clone());
        cache.insert(vec![3], d);
        assert_eq!(cache.len(), 1);
        assert!(cache.get(&[3]).is_some());
    }
}
