use crate::channel::{self, ChannelParams};
use crate::error::{Error, Result};

/// Discrete power split for the two-client downlink.
///
/// `index = a` allocates `a / levels` of the budget to client 2 (the far
/// user). `a = 0` is OMA to client 1, `a = levels` is OMA to client 2, and
/// anything in between is NOMA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoClientAction {
    index: u32,
    levels: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionKind {
    /// Full power to client 1.
    OmaNear,
    /// Full power to client 2.
    OmaFar,
    /// Superposition with `far_fraction` of the power on client 2.
    Noma { far_fraction: f64 },
}

impl TwoClientAction {
    pub fn new(index: u32, levels: u32) -> Result<Self> {
        if levels < 2 {
            return Err(Error::invalid(
                "levels",
                format!("must be >= 2, got {levels}"),
            ));
        }
        if index > levels {
            return Err(Error::invalid(
                "action",
                format!("index {index} exceeds power levels {levels}"),
            ));
        }
        Ok(Self { index, levels })
    }

    pub fn index(self) -> u32 {
        self.index
    }

    pub fn levels(self) -> u32 {
        self.levels
    }

    pub fn far_fraction(self) -> f64 {
        f64::from(self.index) / f64::from(self.levels)
    }

    pub fn is_oma(self) -> bool {
        self.index == 0 || self.index == self.levels
    }

    pub fn kind(self) -> ActionKind {
        match self.index {
            0 => ActionKind::OmaNear,
            i if i == self.levels => ActionKind::OmaFar,
            _ => ActionKind::Noma {
                far_fraction: self.far_fraction(),
            },
        }
    }
}

/// Which subset of the two-client actions a policy may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActionRestriction {
    /// OMA and NOMA, with dominated NOMA splits removed.
    #[default]
    Adaptive,
    /// OMA and every admissible NOMA split.
    AdaptiveFull,
    /// `{0, L}` only.
    OmaOnly,
    /// Admissible NOMA splits only (`0 < a < L`).
    NomaOnly,
}

/// Smallest NOMA index before elimination: `a/L > 1/2` (as `⌈L/2⌉ + 1`) and
/// `a/L` strictly above `(2^R - 1) / 2^R`.
fn raw_noma_floor(levels: u32, target_rate: f64) -> u32 {
    let l = f64::from(levels);
    let half = levels.div_ceil(2) + 1;
    let rate_bound = (target_rate.exp2() - 1.0) / target_rate.exp2() * l;
    // strictly above the bound: when it is an integer, step past it
    let mut rate_floor = (rate_bound - 1e-9).ceil();
    if (rate_floor - rate_bound).abs() < 1e-9 {
        rate_floor += 1.0;
    }
    half.max(rate_floor.max(0.0) as u32)
}

/// `⌊2^R L / (2^R + 1)⌋`: the NOMA split minimizing the near user's outage.
fn eliminated_noma_floor(levels: u32, target_rate: f64) -> u32 {
    let g = target_rate.exp2();
    (g * f64::from(levels) / (g + 1.0) + 1e-9).floor() as u32
}

/// Ordered action set `{0, first NOMA split, ..., L}`.
///
/// With `eliminate`, NOMA splits below `⌊2^R L/(2^R+1)⌋` are dropped: both
/// clients' NOMA outages are smaller at that split. The eliminated set is
/// always a subset of the full one.
pub fn build_action_space(
    levels: u32,
    target_rate: f64,
    eliminate: bool,
) -> Result<Vec<TwoClientAction>> {
    if levels < 2 {
        return Err(Error::invalid(
            "levels",
            format!("must be >= 2, got {levels}"),
        ));
    }
    if !(target_rate.is_finite() && target_rate > 0.0) {
        return Err(Error::invalid(
            "target_rate",
            format!("must be > 0, got {target_rate}"),
        ));
    }
    let mut lo = raw_noma_floor(levels, target_rate);
    if eliminate {
        lo = lo.max(eliminated_noma_floor(levels, target_rate));
    }
    let mut set = vec![TwoClientAction::new(0, levels)?];
    for a in lo.max(1)..=levels {
        set.push(TwoClientAction::new(a, levels)?);
    }
    Ok(set)
}

pub fn restricted_action_space(
    levels: u32,
    target_rate: f64,
    restriction: ActionRestriction,
) -> Result<Vec<TwoClientAction>> {
    let set = match restriction {
        ActionRestriction::Adaptive => build_action_space(levels, target_rate, true)?,
        ActionRestriction::AdaptiveFull => build_action_space(levels, target_rate, false)?,
        ActionRestriction::OmaOnly => vec![
            TwoClientAction::new(0, levels)?,
            TwoClientAction::new(levels, levels)?,
        ],
        ActionRestriction::NomaOnly => build_action_space(levels, target_rate, false)?
            .into_iter()
            .filter(|a| !a.is_oma())
            .collect(),
    };
    if set.is_empty() {
        return Err(Error::invalid(
            "levels",
            format!("no admissible NOMA split with {levels} power levels"),
        ));
    }
    Ok(set)
}

/// Per-client outage under one action; an unserved client has outage 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionOutage {
    pub near: f64,
    pub far: f64,
}

impl ActionOutage {
    pub fn new(near: f64, far: f64) -> Self {
        Self { near, far }
    }
}

/// Source of per-action outage probabilities for the MDP.
pub trait OutageProvider {
    fn outage(&self, action: TwoClientAction) -> Result<ActionOutage>;
}

/// Outage from the closed-form channel models. Client 1 sits at
/// `distances[0]`, client 2 at `distances[1]`.
#[derive(Debug, Clone)]
pub struct ChannelOutage {
    params: ChannelParams,
}

impl ChannelOutage {
    pub fn new(params: ChannelParams) -> Result<Self> {
        if params.num_clients() != 2 {
            return Err(Error::invalid(
                "distances",
                format!(
                    "two-client model needs 2 distances, got {}",
                    params.num_clients()
                ),
            ));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }
}

impl OutageProvider for ChannelOutage {
    fn outage(&self, action: TwoClientAction) -> Result<ActionOutage> {
        let (d1, d2) = (self.params.distance(0), self.params.distance(1));
        Ok(match action.kind() {
            ActionKind::OmaNear => ActionOutage::new(channel::oma_outage(d1, &self.params)?, 1.0),
            ActionKind::OmaFar => ActionOutage::new(1.0, channel::oma_outage(d2, &self.params)?),
            ActionKind::Noma { far_fraction } => ActionOutage::new(
                channel::noma2_outage_near(far_fraction, d1, &self.params)?,
                channel::noma2_outage_far(far_fraction, d2, &self.params)?,
            ),
        })
    }
}

/// Outage supplied by a closure, for synthetic instances.
pub struct FnOutage<F>(pub F);

impl<F> OutageProvider for FnOutage<F>
where
    F: Fn(TwoClientAction) -> ActionOutage,
{
    fn outage(&self, action: TwoClientAction) -> Result<ActionOutage> {
        let o = (self.0)(action);
        for p in [o.near, o.far] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(
                    "outage",
                    format!("probability {p} outside [0, 1]"),
                ));
            }
        }
        Ok(o)
    }
}
