//! Switching-structure checks and decision-boundary compression for
//! two-client policies.

use std::fmt::Write as _;

use super::kernel::AgePair;
use crate::error::{Error, Result};

/// Action index `a` for every state of the truncated grid `{1..D}²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionGrid {
    delta_max: u32,
    actions: Vec<u32>,
}

impl ActionGrid {
    pub fn new(delta_max: u32, actions: Vec<u32>) -> Result<Self> {
        let n = (delta_max as usize).pow(2);
        if actions.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: actions.len(),
            });
        }
        Ok(Self { delta_max, actions })
    }

    pub fn from_fn(delta_max: u32, mut f: impl FnMut(AgePair) -> u32) -> Self {
        let mut actions = Vec::with_capacity((delta_max as usize).pow(2));
        for d1 in 1..=delta_max {
            for d2 in 1..=delta_max {
                actions.push(f((d1, d2)));
            }
        }
        Self { delta_max, actions }
    }

    pub fn delta_max(&self) -> u32 {
        self.delta_max
    }

    #[inline]
    pub fn index_of(&self, (d1, d2): AgePair) -> usize {
        ((d1 - 1) * self.delta_max + (d2 - 1)) as usize
    }

    /// Action at `state`, with ages beyond the grid clamped to `delta_max`.
    pub fn get(&self, (d1, d2): AgePair) -> u32 {
        let d1 = d1.clamp(1, self.delta_max);
        let d2 = d2.clamp(1, self.delta_max);
        self.actions[self.index_of((d1, d2))]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.actions
    }

    /// Distinct actions that actually occur, ascending.
    pub fn realized_actions(&self) -> Vec<u32> {
        let mut v = self.actions.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Pairs of neighbouring states whose actions break monotonicity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SwitchingReport {
    /// `(lower, upper)`: `upper` is one step further along Δ2 (action must
    /// not decrease) or along Δ1 (action must not increase).
    pub violations: Vec<(AgePair, AgePair)>,
}

impl SwitchingReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the action is nondecreasing in Δ2 for fixed Δ1 and
/// nonincreasing in Δ1 for fixed Δ2.
pub fn verify_switching(grid: &ActionGrid) -> SwitchingReport {
    let d = grid.delta_max;
    let mut violations = Vec::new();
    for d1 in 1..=d {
        for d2 in 1..=d {
            let a = grid.get((d1, d2));
            if d2 < d && grid.get((d1, d2 + 1)) < a {
                violations.push(((d1, d2), (d1, d2 + 1)));
            }
            if d1 < d && grid.get((d1 + 1, d2)) > a {
                violations.push(((d1, d2), (d1 + 1, d2)));
            }
        }
    }
    SwitchingReport { violations }
}

/// Decision boundaries of one Δ1 row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowBoundary {
    /// Action at Δ2 = 1.
    pub start: u32,
    /// `(Δ2, action)`: the action switches to `action` at this Δ2.
    pub switches: Vec<(u32, u32)>,
}

/// Compact representation of a switching-type policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchingBoundaries {
    delta_max: u32,
    rows: Vec<RowBoundary>,
}

impl SwitchingBoundaries {
    pub fn rows(&self) -> &[RowBoundary] {
        &self.rows
    }

    /// Total number of switch points over all rows.
    pub fn boundary_count(&self) -> usize {
        self.rows.iter().map(|r| r.switches.len()).sum()
    }

    pub fn reconstruct(&self) -> ActionGrid {
        ActionGrid::from_fn(self.delta_max, |(d1, d2)| {
            let row = &self.rows[(d1 - 1) as usize];
            row.switches
                .iter()
                .take_while(|(at, _)| *at <= d2)
                .last()
                .map_or(row.start, |&(_, a)| a)
        })
    }

    /// One line per row: `Δ1,start,Δ2:a,Δ2:a,...`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            write!(out, "{},{}", i + 1, row.start).unwrap();
            for (at, a) in &row.switches {
                write!(out, ",{at}:{a}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Per-row Δ2 thresholds at which the action steps up.
pub fn extract_boundaries(grid: &ActionGrid) -> Result<SwitchingBoundaries> {
    let report = verify_switching(grid);
    if !report.passes() {
        return Err(Error::NotSwitching {
            violations: report.violations.len(),
        });
    }
    let d = grid.delta_max;
    let rows = (1..=d)
        .map(|d1| {
            let start = grid.get((d1, 1));
            let mut current = start;
            let mut switches = Vec::new();
            for d2 in 2..=d {
                let a = grid.get((d1, d2));
                if a != current {
                    switches.push((d2, a));
                    current = a;
                }
            }
            RowBoundary { start, switches }
        })
        .collect();
    Ok(SwitchingBoundaries { delta_max: d, rows })
}
