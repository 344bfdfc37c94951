//! Per-slot scheduling decisions.
//!
//! Every rule here is myopic: it maximizes the expected one-slot drop of
//! the weighted age, `Σ_i w_i (1 - P_i) Δ_i - 1`, over its own decision
//! space. The MDP-backed policies in [`policy`] look further ahead.

mod exhaustive;
pub mod policy;
mod rules;

pub use exhaustive::{exhaustive_mw, EXHAUSTIVE_MAX_CLIENTS};
pub use policy::{DecisionCache, FnPolicy, Policy, PolicyFactory, PolicySpec, PreparedPolicy};
pub use rules::{
    adaptive_noma_oma, expected_drop2, fixed_k_noma, maxweight_over, mw_oma, two_client_maxweight,
};

use crate::channel::{allocation_outages, ChannelParams, PowerAllocation};
use crate::error::{Error, Result};
use crate::mdp2::{ChannelOutage, OutageProvider, TwoClientAction};

/// Ages and weights of all clients.
#[derive(Debug, Clone, PartialEq)]
pub struct AoIState {
    ages: Vec<u32>,
    weights: Vec<f64>,
}

impl AoIState {
    pub fn new(ages: Vec<u32>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        let state = Self {
            ages: vec![],
            weights,
        };
        state.with_ages(ages)
    }

    /// Equal weights `1/N`.
    pub fn uniform(ages: Vec<u32>) -> Result<Self> {
        let n = ages.len().max(1);
        Self::new(ages, vec![1.0 / n as f64; n])
    }

    /// Same weights, new ages.
    pub fn with_ages(&self, ages: Vec<u32>) -> Result<Self> {
        if ages.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                expected: self.weights.len(),
                actual: ages.len(),
            });
        }
        if ages.contains(&0) {
            return Err(Error::invalid("ages", "every age must be at least 1"));
        }
        Ok(Self {
            ages,
            weights: self.weights.clone(),
        })
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }

    /// `Σ_i w_i Δ_i`.
    pub fn weighted_age(&self) -> f64 {
        self.ages
            .iter()
            .zip(&self.weights)
            .map(|(&a, &w)| w * f64::from(a))
            .sum()
    }
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::invalid("weights", "need at least one client"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("weights", "must be finite and nonnegative"));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 * weights.len() as f64 {
        return Err(Error::invalid(
            "weights",
            format!("must sum to 1, got {sum}"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecisionKind {
    /// Nobody is served this slot.
    Idle,
    /// One client at full budget.
    Oma { client: usize },
    /// Superposition of two or more clients.
    Noma(PowerAllocation),
    /// Discrete split of the two-client model.
    TwoClient(TwoClientAction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub kind: DecisionKind,
    /// `Σ_i w_i (1 - P_i) Δ_i - 1` at the state the decision was made in.
    pub expected_drop: f64,
}

impl Decision {
    /// Turns an allocation into the matching decision kind: empty is idle,
    /// a single full-budget client is OMA.
    pub fn from_allocation(alloc: PowerAllocation, budget: f64, expected_drop: f64) -> Self {
        let kind = match alloc.len() {
            0 => DecisionKind::Idle,
            1 if alloc.raw_powers()[0] == budget => DecisionKind::Oma {
                client: alloc.served()[0],
            },
            _ => DecisionKind::Noma(alloc),
        };
        Self {
            kind,
            expected_drop,
        }
    }

    /// Per-client outage probability under this decision; unserved
    /// clients get 1.
    pub fn outage_probabilities(&self, params: &ChannelParams) -> Result<Vec<f64>> {
        let n = params.num_clients();
        match &self.kind {
            DecisionKind::Idle => Ok(vec![1.0; n]),
            DecisionKind::Oma { client } => {
                if *client >= n {
                    return Err(Error::invalid(
                        "client",
                        format!("client {client} does not exist"),
                    ));
                }
                let mut out = vec![1.0; n];
                out[*client] = params.oma_outage_of(*client);
                Ok(out)
            }
            DecisionKind::Noma(alloc) => {
                if let Some(&bad) = alloc.served().iter().find(|&&c| c >= n) {
                    return Err(Error::invalid(
                        "served",
                        format!("client {bad} does not exist"),
                    ));
                }
                Ok(allocation_outages(alloc, params))
            }
            DecisionKind::TwoClient(action) => {
                let o = ChannelOutage::new(params.clone())?.outage(*action)?;
                Ok(vec![o.near, o.far])
            }
        }
    }

    /// Compact, comma-free text form used in traces.
    pub fn encode(&self) -> String {
        match &self.kind {
            DecisionKind::Idle => "idle".to_string(),
            DecisionKind::Oma { client } => format!("oma:{}", client + 1),
            DecisionKind::Noma(alloc) => {
                let parts: Vec<String> = alloc
                    .served()
                    .iter()
                    .zip(alloc.raw_powers())
                    .map(|(c, p)| format!("{}@{p:.6}", c + 1))
                    .collect();
                format!("noma:{}", parts.join("|"))
            }
            DecisionKind::TwoClient(a) => format!("a:{}", a.index()),
        }
    }

    /// Clients receiving power, in client-index order.
    pub fn served_clients(&self) -> Vec<usize> {
        let mut served = match &self.kind {
            DecisionKind::Idle => vec![],
            DecisionKind::Oma { client } => vec![*client],
            DecisionKind::Noma(alloc) => alloc.served().to_vec(),
            DecisionKind::TwoClient(a) => match a.index() {
                0 => vec![0],
                i if i == a.levels() => vec![1],
                _ => vec![0, 1],
            },
        };
        served.sort_unstable();
        served
    }
}

/// `Σ_i w_i (1 - P_i) Δ_i - 1`.
pub fn expected_drop(state: &AoIState, outages: &[f64]) -> f64 {
    state
        .ages()
        .iter()
        .zip(state.weights())
        .zip(outages)
        .map(|((&a, &w), &p)| w * (1.0 - p) * f64::from(a))
        .sum::<f64>()
        - 1.0
}
