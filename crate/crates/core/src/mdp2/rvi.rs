//! Relative value iteration for the truncated two-client average-cost MDP.
//!
//! The Bellman operator is applied to the data-transformed chain
//! `P' = θP + (1-θ)I` (θ = 1/2), which has the same gain and bias as the
//! original but is aperiodic, so the iteration also converges on policies
//! that cycle deterministically (e.g. alternating OMA with no outage).

use super::actions::{ActionOutage, OutageProvider, TwoClientAction};
use super::kernel::AgePair;
use super::structure::ActionGrid;
use super::table::PolicyTable;
use crate::error::{Error, Result};

const APERIODICITY: f64 = 0.5;
/// Relative margin an action must win by to displace a smaller index.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MdpConfig {
    pub weights: [f64; 2],
    pub delta_max: u32,
    pub actions: Vec<TwoClientAction>,
    pub span_tol: f64,
    pub max_iters: usize,
    pub reference: AgePair,
}

impl MdpConfig {
    pub fn new(weights: [f64; 2], delta_max: u32, actions: Vec<TwoClientAction>) -> Self {
        Self {
            weights,
            delta_max,
            actions,
            span_tol: 1e-9,
            max_iters: 1_000_000,
            reference: (1, 1),
        }
    }

    pub fn with_span_tol(mut self, tol: f64) -> Self {
        self.span_tol = tol;
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn with_reference(mut self, reference: AgePair) -> Self {
        self.reference = reference;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let [w1, w2] = self.weights;
        if !(w1 >= 0.0 && w2 >= 0.0 && (w1 + w2 - 1.0).abs() <= 1e-12) {
            return Err(Error::invalid(
                "weights",
                format!("must be nonnegative and sum to 1, got ({w1}, {w2})"),
            ));
        }
        if self.delta_max < 2 {
            return Err(Error::invalid("delta_max", "must be >= 2"));
        }
        if self.span_tol.is_nan() || self.span_tol <= 0.0 {
            return Err(Error::invalid("span_tol", "must be > 0"));
        }
        if self.actions.is_empty() {
            return Err(Error::invalid("actions", "action set is empty"));
        }
        let levels = self.actions[0].levels();
        if self.actions.iter().any(|a| a.levels() != levels) {
            return Err(Error::invalid("actions", "mixed power discretizations"));
        }
        if !self.actions.windows(2).all(|w| w[0].index() < w[1].index()) {
            return Err(Error::invalid(
                "actions",
                "action set must be strictly increasing",
            ));
        }
        let (r1, r2) = self.reference;
        if !(1..=self.delta_max).contains(&r1) || !(1..=self.delta_max).contains(&r2) {
            return Err(Error::invalid(
                "reference",
                "reference state outside the grid",
            ));
        }
        Ok(())
    }
}

/// Precomputed Q-value machinery shared by the solver and the table.
#[derive(Debug, Clone)]
pub(crate) struct Evaluator {
    pub delta_max: u32,
    pub weights: [f64; 2],
    pub outages: Vec<ActionOutage>,
}

impl Evaluator {
    #[inline]
    fn idx(&self, d1: u32, d2: u32) -> usize {
        ((d1 - 1) * self.delta_max + (d2 - 1)) as usize
    }

    /// `w·Δ + E[h(next)]` for action position `k`.
    #[inline]
    pub fn q_value(&self, h: &[f64], (d1, d2): AgePair, k: usize) -> f64 {
        let d = self.delta_max;
        let n1 = (d1 + 1).min(d);
        let n2 = (d2 + 1).min(d);
        let ActionOutage { near: p1, far: p2 } = self.outages[k];
        let cost = self.weights[0] * f64::from(d1) + self.weights[1] * f64::from(d2);
        cost + (1.0 - p1) * (1.0 - p2) * h[0]
            + (1.0 - p1) * p2 * h[self.idx(1, n2)]
            + p1 * (1.0 - p2) * h[self.idx(n1, 1)]
            + p1 * p2 * h[self.idx(n1, n2)]
    }

    /// Minimum Q-value and the position of the smallest minimizing action.
    #[inline]
    pub fn best(&self, h: &[f64], state: AgePair) -> (f64, usize) {
        let mut best = self.q_value(h, state, 0);
        let mut arg = 0;
        for k in 1..self.outages.len() {
            let q = self.q_value(h, state, k);
            if q < best - TIE_EPS * best.abs().max(1.0) {
                best = q;
                arg = k;
            }
        }
        (best, arg)
    }
}

/// Solves the average-cost optimality equation on `{1..delta_max}²`.
///
/// Stops once the span of `T h - h` drops below `span_tol`; the gain is read
/// off at the reference state and the greedy policy breaks ties toward the
/// smallest action index.
pub fn rvi_solve(config: &MdpConfig, provider: &dyn OutageProvider) -> Result<PolicyTable> {
    config.validate()?;
    let outages = config
        .actions
        .iter()
        .map(|&a| provider.outage(a))
        .collect::<Result<Vec<_>>>()?;
    let eval = Evaluator {
        delta_max: config.delta_max,
        weights: config.weights,
        outages,
    };
    let d = config.delta_max;
    let n = (d as usize).pow(2);
    let ref_idx = eval.idx(config.reference.0, config.reference.1);

    let mut h = vec![0.0; n];
    let mut th = vec![0.0; n];
    let mut span = f64::INFINITY;
    let mut gain = 0.0;
    let mut iterations = 0;
    while iterations < config.max_iters {
        iterations += 1;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for d1 in 1..=d {
            for d2 in 1..=d {
                let i = eval.idx(d1, d2);
                let (q, _) = eval.best(&h, (d1, d2));
                th[i] = q;
                let diff = q - h[i];
                lo = lo.min(diff);
                hi = hi.max(diff);
            }
        }
        span = hi - lo;
        gain = th[ref_idx] - h[ref_idx];
        if span < config.span_tol {
            break;
        }
        let shift = (1.0 - APERIODICITY) * h[ref_idx] + APERIODICITY * th[ref_idx];
        for (hv, &tv) in h.iter_mut().zip(&th) {
            *hv = (1.0 - APERIODICITY) * *hv + APERIODICITY * tv - shift;
        }
    }
    if span >= config.span_tol {
        return Err(Error::NonConvergence {
            what: "relative value iteration",
            iterations,
            residual: span,
        });
    }

    let grid = ActionGrid::from_fn(d, |s| config.actions[eval.best(&h, s).1].index());
    Ok(PolicyTable::from_parts(
        grid,
        config.actions.clone(),
        eval,
        h,
        gain,
        span,
        iterations,
    ))
}

#[cfg(test)]
mod tests {
    use super::super::actions::FnOutage;
    use super::*;

    fn actions(levels: u32, idx: &[u32]) -> Vec<TwoClientAction> {
        idx.iter()
            .map(|&i| TwoClientAction::new(i, levels).unwrap())
            .collect()
    }

    #[test]
    fn alternating_oma_without_outage() {
        let cfg = MdpConfig::new([0.5, 0.5], 30, actions(10, &[0, 6, 7, 8, 9, 10]));
        let prov = FnOutage(|a: TwoClientAction| match a.index() {
            0 => ActionOutage::new(0.0, 1.0),
            10 => ActionOutage::new(1.0, 0.0),
            _ => ActionOutage::new(1.0, 1.0),
        });
        let table = rvi_solve(&cfg, &prov).unwrap();
        assert!((table.average_cost() - 1.5).abs() < 1e-8);
        assert_eq!(table.action((1, 2)), 10);
        assert_eq!(table.action((2, 1)), 0);
        assert!(table
            .grid()
            .realized_actions()
            .iter()
            .all(|&a| a == 0 || a == 10));
    }

    #[test]
    fn certain_noma_pins_ages() {
        let cfg = MdpConfig::new([0.3, 0.7], 20, actions(10, &[0, 6, 7, 8, 9, 10]));
        let prov = FnOutage(|a: TwoClientAction| match a.index() {
            8 => ActionOutage::new(0.0, 0.0),
            0 => ActionOutage::new(0.2, 1.0),
            10 => ActionOutage::new(1.0, 0.2),
            _ => ActionOutage::new(0.5, 0.5),
        });
        let table = rvi_solve(&cfg, &prov).unwrap();
        assert!((table.average_cost() - 1.0).abs() < 1e-8);
        assert_eq!(table.grid().realized_actions(), vec![8]);
    }

    #[test]
    fn iteration_cap_reports_span() {
        let cfg = MdpConfig::new([0.5, 0.5], 20, actions(10, &[0, 10])).with_max_iters(3);
        let prov = FnOutage(|_| ActionOutage::new(0.3, 0.3));
        match rvi_solve(&cfg, &prov) {
            Err(Error::NonConvergence {
                iterations,
                residual,
                ..
            }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = MdpConfig::new([0.6, 0.6], 20, actions(10, &[0, 10]));
        assert!(bad.validate().is_err());
        let bad = MdpConfig::new([0.5, 0.5], 1, actions(10, &[0, 10]));
        assert!(bad.validate().is_err());
        let bad = MdpConfig::new([0.5, 0.5], 10, actions(10, &[10, 0]));
        assert!(bad.validate().is_err());
        let bad = MdpConfig::new([0.5, 0.5], 10, actions(10, &[0, 10])).with_reference((11, 1));
        assert!(bad.validate().is_err());
    }
}
