//! Slotted Monte Carlo evaluation of scheduling policies.
//!
//! Each slot the policy picks a decision from the current ages, every
//! client's delivery succeeds independently with probability `1 - P_i`,
//! and ages evolve as `Δ' = 1` on success, `Δ + 1` otherwise. Ages are
//! averaged over the slots after the warmup.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::scheduler::{check_weights, AoIState, Decision, PolicyFactory, PolicySpec};

/// Applies one slot of age evolution.
pub fn step_aoi(ages: &[u32], successes: &[bool]) -> Result<Vec<u32>> {
    if ages.len() != successes.len() {
        return Err(Error::LengthMismatch {
            expected: ages.len(),
            actual: successes.len(),
        });
    }
    Ok(ages
        .iter()
        .zip(successes)
        .map(|(&a, &ok)| if ok { 1 } else { a + 1 })
        .collect())
}

/// Draws per-client delivery outcomes for a decision.
pub fn sample_outcomes<R: Rng + ?Sized>(
    decision: &Decision,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<bool>> {
    let outages = decision.outage_probabilities(params)?;
    Ok(sample_from_outages(&outages, rng))
}

fn sample_from_outages<R: Rng + ?Sized>(outages: &[f64], rng: &mut R) -> Vec<bool> {
    // one uniform per client keeps the stream aligned across decisions
    outages
        .iter()
        .map(|&p| rng.random::<f64>() < 1.0 - p)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub horizon: u64,
    pub warmup: u64,
    pub seed: u64,
    pub replications: usize,
    pub policy: PolicySpec,
    pub channel: ChannelParams,
    pub weights: Vec<f64>,
    /// All ones when `None`.
    pub initial_ages: Option<Vec<u32>>,
    /// Keep the per-slot log of the first replication.
    pub record_trace: bool,
}

impl SimConfig {
    /// Equal weights, warmup of 1% of the horizon, one replication.
    pub fn new(channel: ChannelParams, policy: PolicySpec, horizon: u64, seed: u64) -> Self {
        let n = channel.num_clients();
        Self {
            horizon,
            warmup: horizon / 100,
            seed,
            replications: 1,
            policy,
            weights: vec![1.0 / n as f64; n],
            channel,
            initial_ages: None,
            record_trace: false,
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_warmup(mut self, warmup: u64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_trace(mut self, record: bool) -> Self {
        self.record_trace = record;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon <= self.warmup {
            return Err(Error::invalid(
                "horizon",
                format!("must exceed warmup ({} <= {})", self.horizon, self.warmup),
            ));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        let n = self.channel.num_clients();
        if self.weights.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: self.weights.len(),
            });
        }
        check_weights(&self.weights)?;
        if let Some(ages) = &self.initial_ages {
            AoIState::new(ages.clone(), self.weights.clone())?;
        }
        Ok(())
    }

    fn initial_state(&self) -> Result<AoIState> {
        let n = self.channel.num_clients();
        let ages = self.initial_ages.clone().unwrap_or_else(|| vec![1; n]);
        AoIState::new(ages, self.weights.clone())
    }
}

/// One slot of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub slot: u64,
    pub ages: Vec<u32>,
    pub decision: String,
    /// Bit `i` set when client `i` received its update.
    pub successes: u64,
}

impl TraceRow {
    /// `t, Δ_1, ..., Δ_N, decision, bitmask`.
    pub fn to_line(&self) -> String {
        let mut fields = vec![self.slot.to_string()];
        fields.extend(self.ages.iter().map(u32::to_string));
        fields.push(self.decision.clone());
        fields.push(self.successes.to_string());
        fields.join(",")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Mean over replications of the weighted time-average age.
    pub weighted_avg_aoi: f64,
    pub per_client_avg_aoi: Vec<f64>,
    /// Standard error across replications (0 for a single replication).
    pub stderr: f64,
    /// Per-replication weighted averages.
    pub replication_means: Vec<f64>,
    /// Slots averaged per replication.
    pub slots: u64,
    pub trace: Option<Vec<TraceRow>>,
}

struct Replication {
    weighted: f64,
    per_client: Vec<f64>,
    trace: Option<Vec<TraceRow>>,
}

/// Runs a configuration, preparing its policy first.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let prepared = config.policy.prepare(&config.channel, &config.weights)?;
    run_with(config, &prepared)
}

/// Runs a configuration with an arbitrary policy source; `config.policy`
/// is ignored.
pub fn run_with(config: &SimConfig, policies: &dyn PolicyFactory) -> Result<SimResult> {
    config.validate()?;
    let reps: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|rep| replicate(config, policies, rep))
        .collect::<Result<_>>()?;

    let means: Vec<f64> = reps.iter().map(|r| r.weighted).collect();
    let count = means.len() as f64;
    let mean = means.iter().sum::<f64>() / count;
    let stderr = if means.len() > 1 {
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    let n = config.channel.num_clients();
    let per_client = (0..n)
        .map(|i| reps.iter().map(|r| r.per_client[i]).sum::<f64>() / count)
        .collect();
    let trace = reps.into_iter().next().and_then(|r| r.trace);
    Ok(SimResult {
        weighted_avg_aoi: mean,
        per_client_avg_aoi: per_client,
        stderr,
        replication_means: means,
        slots: config.horizon - config.warmup,
        trace,
    })
}

fn replicate(config: &SimConfig, policies: &dyn PolicyFactory, rep: usize) -> Result<Replication> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(rep as u64);
    let mut policy = policies.create();
    let mut state = config.initial_state()?;
    let n = state.len();
    let mut sums = vec![0u64; n];
    let mut trace = (config.record_trace && rep == 0).then(Vec::new);

    for slot in 1..=config.horizon {
        if slot > config.warmup {
            for (s, &a) in sums.iter_mut().zip(state.ages()) {
                *s += u64::from(a);
            }
        }
        let fail = |e: Error| Error::PolicyFailure {
            slot,
            ages: state.ages().to_vec(),
            source: Box::new(e),
        };
        let decision = policy.decide(&state).map_err(fail)?;
        let outages = decision
            .outage_probabilities(&config.channel)
            .map_err(fail)?;
        let successes = sample_from_outages(&outages, &mut rng);
        if let Some(t) = trace.as_mut() {
            let mask = successes
                .iter()
                .enumerate()
                .filter(|(_, &ok)| ok)
                .fold(0u64, |m, (i, _)| m | (1 << i));
            t.push(TraceRow {
                slot,
                ages: state.ages().to_vec(),
                decision: decision.encode(),
                successes: mask,
            });
        }
        let ages = step_aoi(state.ages(), &successes)?;
        state = state.with_ages(ages)?;
    }

    let slots = (config.horizon - config.warmup) as f64;
    let per_client: Vec<f64> = sums.iter().map(|&s| s as f64 / slots).collect();
    let weighted = per_client
        .iter()
        .zip(&config.weights)
        .map(|(a, w)| a * w)
        .sum();
    Ok(Replication {
        weighted,
        per_client,
        trace,
    })
}

/// The swept quantity of a sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepAxis {
    SnrDb(f64),
    Clients(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis: SweepAxis,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: String,
    pub axis: SweepAxis,
    pub seed: u64,
    pub result: Result<SimResult>,
}

/// Runs every point, in parallel, keeping input order. A failing point
/// records its error and the rest still run.
pub fn sweep(points: Vec<SweepPoint>) -> Vec<SweepRow> {
    points
        .into_par_iter()
        .map(|p| SweepRow {
            policy: p.config.policy.name(),
            axis: p.axis,
            seed: p.config.seed,
            result: run(&p.config),
        })
        .collect()
}
