use std::fmt::Write as _;

use super::actions::{ActionOutage, TwoClientAction};
use super::kernel::AgePair;
use super::rvi::Evaluator;
use super::structure::ActionGrid;
use crate::error::{Error, Result};

/// Solved two-client policy on the truncated grid.
///
/// Tables produced by [`rvi_solve`](super::rvi_solve) carry the relative
/// value function and per-action outages; tables read back from text only
/// carry the actions.
#[derive(Debug, Clone)]
pub struct PolicyTable {
    grid: ActionGrid,
    action_set: Vec<TwoClientAction>,
    weights: [f64; 2],
    average_cost: f64,
    solved: Option<Solved>,
}

#[derive(Debug, Clone)]
struct Solved {
    eval: Evaluator,
    values: Vec<f64>,
    span: f64,
    iterations: usize,
}

impl PolicyTable {
    pub(crate) fn from_parts(
        grid: ActionGrid,
        action_set: Vec<TwoClientAction>,
        eval: Evaluator,
        values: Vec<f64>,
        average_cost: f64,
        span: f64,
        iterations: usize,
    ) -> Self {
        Self {
            grid,
            action_set,
            weights: eval.weights,
            average_cost,
            solved: Some(Solved {
                eval,
                values,
                span,
                iterations,
            }),
        }
    }

    pub fn grid(&self) -> &ActionGrid {
        &self.grid
    }

    pub fn delta_max(&self) -> u32 {
        self.grid.delta_max()
    }

    pub fn action_set(&self) -> &[TwoClientAction] {
        &self.action_set
    }

    pub fn levels(&self) -> u32 {
        self.action_set[0].levels()
    }

    pub fn weights(&self) -> [f64; 2] {
        self.weights
    }

    /// Long-run weighted average AoI `J*` of the optimal policy.
    pub fn average_cost(&self) -> f64 {
        self.average_cost
    }

    /// Action index at `state`; ages beyond the truncation are clamped.
    pub fn action(&self, state: AgePair) -> u32 {
        self.grid.get(state)
    }

    pub fn two_client_action(&self, state: AgePair) -> TwoClientAction {
        TwoClientAction::new(self.action(state), self.levels()).expect("table holds valid actions")
    }

    /// Relative value `h(Δ1, Δ2)`, if the table was solved in-process.
    pub fn value(&self, state: AgePair) -> Option<f64> {
        let s = self.solved.as_ref()?;
        Some(s.values[self.grid.index_of(clamp(state, self.delta_max()))])
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.solved.as_ref().map(|s| s.values.as_slice())
    }

    pub fn final_span(&self) -> Option<f64> {
        self.solved.as_ref().map(|s| s.span)
    }

    pub fn iterations(&self) -> Option<usize> {
        self.solved.as_ref().map(|s| s.iterations)
    }

    pub fn action_outages(&self) -> Option<&[ActionOutage]> {
        self.solved.as_ref().map(|s| s.eval.outages.as_slice())
    }

    /// `w·Δ + E[h(next)]` for every action in the set, in set order.
    pub fn q_values(&self, state: AgePair) -> Option<Vec<f64>> {
        let s = self.solved.as_ref()?;
        let state = clamp(state, self.delta_max());
        Some(
            (0..self.action_set.len())
                .map(|k| s.eval.q_value(&s.values, state, k))
                .collect(),
        )
    }

    /// Greedy action recomputed from the value function rather than read
    /// from the stored grid.
    pub fn recompute_action(&self, state: AgePair) -> Option<u32> {
        let s = self.solved.as_ref()?;
        let (_, k) = s.eval.best(&s.values, clamp(state, self.delta_max()));
        Some(self.action_set[k].index())
    }

    /// `max_s |J* + h(s) - min_a Q(s, a)|`.
    pub fn bellman_residual(&self) -> Option<f64> {
        let s = self.solved.as_ref()?;
        let d = self.delta_max();
        let mut worst = 0.0f64;
        for d1 in 1..=d {
            for d2 in 1..=d {
                let (q, _) = s.eval.best(&s.values, (d1, d2));
                let h = s.values[self.grid.index_of((d1, d2))];
                worst = worst.max((self.average_cost + h - q).abs());
            }
        }
        Some(worst)
    }

    /// Header lines starting with `#`, then one `Δ1,Δ2,a` line per state.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let set: Vec<String> = self
            .action_set
            .iter()
            .map(|a| a.index().to_string())
            .collect();
        writeln!(out, "# delta_max={}", self.delta_max()).unwrap();
        writeln!(out, "# levels={}", self.levels()).unwrap();
        writeln!(out, "# weights={},{}", self.weights[0], self.weights[1]).unwrap();
        writeln!(out, "# action_set={}", set.join(",")).unwrap();
        writeln!(out, "# average_cost={}", self.average_cost).unwrap();
        if let Some(s) = &self.solved {
            writeln!(out, "# span={:e}", s.span).unwrap();
            writeln!(out, "# iterations={}", s.iterations).unwrap();
        }
        let d = self.delta_max();
        for d1 in 1..=d {
            for d2 in 1..=d {
                writeln!(out, "{d1},{d2},{}", self.action((d1, d2))).unwrap();
            }
        }
        out
    }

    /// Parses the output of [`to_text`](Self::to_text). The result has no
    /// value function.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut delta_max = None;
        let mut levels = None;
        let mut weights = None;
        let mut action_set = None;
        let mut average_cost = None;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: `{line}`", lineno + 1));
            if let Some(header) = line.strip_prefix('#') {
                let Some((key, value)) = header.trim().split_once('=') else {
                    continue;
                };
                match key.trim() {
                    "delta_max" => {
                        delta_max = Some(value.parse::<u32>().map_err(|_| bad("delta_max"))?)
                    }
                    "levels" => levels = Some(value.parse::<u32>().map_err(|_| bad("levels"))?),
                    "weights" => {
                        let w = parse_list::<f64>(value).map_err(|_| bad("weights"))?;
                        if w.len() != 2 {
                            return Err(bad("weights"));
                        }
                        weights = Some([w[0], w[1]]);
                    }
                    "action_set" => {
                        action_set = Some(parse_list::<u32>(value).map_err(|_| bad("action_set"))?)
                    }
                    "average_cost" => {
                        average_cost = Some(value.parse::<f64>().map_err(|_| bad("average_cost"))?)
                    }
                    _ => {}
                }
                continue;
            }
            let fields = parse_list::<u32>(line).map_err(|_| bad("entry"))?;
            if fields.len() != 3 {
                return Err(bad("entry"));
            }
            entries.push((fields[0], fields[1], fields[2]));
        }
        let missing = |k: &str| Error::Parse(format!("missing header `{k}`"));
        let delta_max = delta_max.ok_or_else(|| missing("delta_max"))?;
        let levels = levels.ok_or_else(|| missing("levels"))?;
        let action_set = action_set
            .ok_or_else(|| missing("action_set"))?
            .into_iter()
            .map(|a| TwoClientAction::new(a, levels))
            .collect::<Result<Vec<_>>>()?;
        let mut actions = vec![u32::MAX; (delta_max as usize).pow(2)];
        for (d1, d2, a) in entries {
            if !(1..=delta_max).contains(&d1) || !(1..=delta_max).contains(&d2) {
                return Err(Error::Parse(format!("state ({d1},{d2}) outside the grid")));
            }
            if !action_set.iter().any(|x| x.index() == a) {
                return Err(Error::Parse(format!("action {a} not in the action set")));
            }
            actions[((d1 - 1) * delta_max + (d2 - 1)) as usize] = a;
        }
        if actions.contains(&u32::MAX) {
            return Err(Error::Parse("policy does not cover every state".into()));
        }
        Ok(Self {
            grid: ActionGrid::new(delta_max, actions)?,
            action_set,
            weights: weights.ok_or_else(|| missing("weights"))?,
            average_cost: average_cost.ok_or_else(|| missing("average_cost"))?,
            solved: None,
        })
    }
}

fn clamp((d1, d2): AgePair, d: u32) -> AgePair {
    (d1.clamp(1, d), d2.clamp(1, d))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    s.split(',').map(|x| x.trim().parse::<T>()).collect()
}
