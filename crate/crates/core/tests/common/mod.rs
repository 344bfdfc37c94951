//! Shared fixtures and property checks for the integration tests.
//!
//! Each `*_violations` function returns a description of every failed
//! check, so callers can both assert emptiness and report counts.

#![allow(dead_code)]

use aoi_noma::allocator::AllocInstance;
use aoi_noma::channel::{
    from_hat_powers, min_far_fraction, noma2_outage_far, noma2_outage_near, oma_outage,
    to_hat_powers, weighted_hat_budget, ChannelParams,
};
use aoi_noma::mdp2::build_action_space;
use aoi_noma::mdp2::{solve_for_channel, ActionRestriction, ChannelOutage, OutageProvider};
use aoi_noma::scheduler::{maxweight_over, mw_oma, AoIState, DecisionKind, PolicySpec};
use aoi_noma::sim::{run, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two clients at distances 2 and 4, path loss 2, 1 bit/s/Hz.
pub fn two_client(snr_db: f64) -> ChannelParams {
    ChannelParams::from_snr_db(vec![2.0, 4.0], 2.0, snr_db, 1.0).unwrap()
}

/// `n` clients at distances `n, n-1, ..., 1`.
pub fn line_of_clients(n: usize, snr_db: f64) -> ChannelParams {
    let d = (0..n).map(|i| (n - i) as f64).collect();
    ChannelParams::from_snr_db(d, 2.0, snr_db, 1.0).unwrap()
}

/// Random allocation instance with `k` clients: coefficients in (0, 5),
/// scales decreasing, budget in (0.5, 5), target rate in (0.25, 2).
pub fn random_instance(rng: &mut ChaCha8Rng, k: usize) -> AllocInstance {
    let budget = rng.random_range(0.5..5.0);
    let target_rate: f64 = rng.random_range(0.25..2.0);
    let rate = target_rate.exp2() - 1.0;
    let coefficients: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..5.0)).collect();
    let mut scales: Vec<f64> = (0..k)
        .map(|_| budget * rng.random_range(0.01..1.5))
        .collect();
    scales.sort_by(|a, b| b.total_cmp(a));
    AllocInstance::new((0..k).collect(), coefficients, scales, budget, rate).unwrap()
}

pub fn random_ages(rng: &mut ChaCha8Rng, n: usize, max: u32) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(1..=max)).collect()
}

// ---------------------------------------------------------------- channel

/// Bounds, monotonicity in distance and SNR, and the shape of the two
/// NOMA outage curves in the power split.
pub fn outage_violations() -> Vec<String> {
    let mut bad = vec![];
    for &rate in &[0.5, 1.0, 1.5, 2.0] {
        for &snr_db in &[0.0, 10.0, 18.0, 30.0, 45.0] {
            let p = ChannelParams::from_snr_db(vec![1.0, 2.0], 2.5, snr_db, rate).unwrap();
            // OMA: increasing in distance
            let mut prev = -1.0;
            for i in 1..=200 {
                let d = 0.05 * i as f64;
                let o = oma_outage(d, &p).unwrap();
                if !(0.0..=1.0).contains(&o) {
                    bad.push(format!("oma outage {o} out of range at d={d}"));
                }
                if !increases(prev, o) {
                    bad.push(format!(
                        "oma outage not increasing at d={d} (R={rate}, {snr_db} dB)"
                    ));
                }
                prev = o;
            }
            // far user: strictly decreasing over the admissible splits
            let lo = min_far_fraction(&p);
            let switch = rate.exp2() / (rate.exp2() + 1.0);
            let steps = 2000;
            let mut prev_far = f64::INFINITY;
            let mut near_vals = vec![];
            for j in 1..steps {
                let a2 = lo + (1.0 - lo) * j as f64 / steps as f64;
                let far = noma2_outage_far(a2, 4.0, &p).unwrap();
                let near = noma2_outage_near(a2, 2.0, &p).unwrap();
                for o in [far, near] {
                    if !(0.0..=1.0).contains(&o) {
                        bad.push(format!("noma outage {o} out of range at a2={a2}"));
                    }
                }
                if prev_far.is_finite() && !increases(far, prev_far) {
                    bad.push(format!(
                        "far outage not decreasing at a2={a2} (R={rate}, {snr_db} dB)"
                    ));
                }
                prev_far = far;
                near_vals.push((a2, near));
            }
            for w in near_vals.windows(2) {
                let ((a, pa), (_, pb)) = (w[0], w[1]);
                let ok = if a < switch { pb <= pa } else { pb >= pa };
                // the step straddling the switch may go either way
                if !ok && !(a < switch && w[1].0 >= switch) {
                    bad.push(format!(
                        "near outage shape broken at a2={a} (R={rate}, {snr_db} dB)"
                    ));
                }
            }
        }
    }
    // OMA: decreasing in SNR
    let mut prev = 1.0;
    for i in 0..=80 {
        let p = ChannelParams::from_snr_db(vec![3.0], 2.0, -10.0 + i as f64, 1.0).unwrap();
        let o = oma_outage(3.0, &p).unwrap();
        if !increases(o, prev) {
            bad.push(format!(
                "oma outage not decreasing in SNR at {} dB",
                -10 + i
            ));
        }
        prev = o;
    }
    bad
}

/// Strict increase from `a` to `b`, except that ties are allowed within
/// 1e-12 of 0 or 1, where consecutive outage values round to the same double.
fn increases(a: f64, b: f64) -> bool {
    let saturated = !(1e-12..=1.0 - 1e-12).contains(&a);
    b > a || (b == a && saturated)
}

/// Round trip between raw and transformed powers, and the budget identity.
pub fn transform_violations(seed: u64, cases: usize) -> Vec<String> {
    let mut r = rng(seed);
    let mut bad = vec![];
    for _ in 0..cases {
        let k = r.random_range(1..=8);
        let rate = r.random_range(0.05..7.0);
        let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.0..10.0)).collect();
        let hat = to_hat_powers(&raw, rate);
        let back = from_hat_powers(&hat, rate);
        let total: f64 = raw.iter().sum();
        for (a, b) in raw.iter().zip(&back) {
            if (a - b).abs() > 1e-12 * total.max(1.0) * (1.0 + rate).powi(k) {
                bad.push(format!("round trip {a} -> {b} (r={rate}, K={k})"));
            }
        }
        let weighted = weighted_hat_budget(&hat, rate);
        // the weighted sum cancels large terms of both signs, so measure the
        // error against the magnitude of those terms
        let magnitude = weighted_hat_budget(&hat.iter().map(|h| h.abs()).collect::<Vec<_>>(), rate);
        if (weighted - total).abs() > 1e-12 * magnitude.max(total) {
            bad.push(format!(
                "budget identity {weighted} vs {total} (r={rate}, K={k})"
            ));
        }
    }
    bad
}

// ---------------------------------------------------------------- mdp

/// Optimality-equation residual of solved tables, against 10× the span
/// tolerance.
pub fn bellman_violations() -> Vec<String> {
    let mut bad = vec![];
    for (snr_db, weights, delta_max) in [
        (18.0, [0.5, 0.5], 100),
        (12.0, [0.3, 0.7], 60),
        (25.0, [0.8, 0.2], 60),
    ] {
        let table = solve_for_channel(
            &two_client(snr_db),
            weights,
            10,
            delta_max,
            ActionRestriction::Adaptive,
        )
        .unwrap();
        let res = table.bellman_residual().unwrap();
        if res >= 10.0 * 1e-9 {
            bad.push(format!(
                "Bellman residual {res:e} at {snr_db} dB, w={weights:?}"
            ));
        }
        if table.average_cost() < 1.0 {
            bad.push(format!("average cost {} below 1", table.average_cost()));
        }
    }
    bad
}

// ---------------------------------------------------------------- sim

pub struct RenewalCheck {
    pub q: f64,
    pub expected: f64,
    pub estimate: f64,
    pub stderr: f64,
}

impl RenewalCheck {
    pub fn passes(&self) -> bool {
        (self.estimate - self.expected).abs() <= 3.0 * self.stderr
    }
}

/// A single client under OMA has geometric inter-delivery times, so its
/// long-run average age is `1 / (1 - q)`.
pub fn renewal_check(snr_db: f64, horizon: u64, replications: usize, seed: u64) -> RenewalCheck {
    let params = ChannelParams::from_snr_db(vec![3.0], 2.0, snr_db, 1.0).unwrap();
    let q = params.oma_outage_of(0);
    let config =
        SimConfig::new(params, PolicySpec::MwOma, horizon, seed).with_replications(replications);
    let r = run(&config).unwrap();
    RenewalCheck {
        q,
        expected: 1.0 / (1.0 - q),
        estimate: r.weighted_avg_aoi,
        stderr: r.stderr,
    }
}

// ---------------------------------------------------------------- scheduler

/// Dropping the constant `-1` never changes the two-client max-weight
/// action, and scaling every age never changes the max-weight OMA client.
pub fn argmax_invariance_violations(seed: u64, cases: usize) -> Vec<String> {
    let mut r = rng(seed);
    let mut bad = vec![];
    for _ in 0..cases {
        // two-client constant shift
        let snr_db = r.random_range(5.0..35.0);
        let params = two_client(snr_db);
        let w1 = r.random_range(0.0..1.0);
        let state = AoIState::new(random_ages(&mut r, 2, 60), vec![w1, 1.0 - w1]).unwrap();
        let provider = ChannelOutage::new(params.clone()).unwrap();
        let actions = build_action_space(10, 1.0, true).unwrap();
        let (chosen, _) = maxweight_over(&state, &actions, &provider).unwrap();
        let mut best = (actions[0], f64::NEG_INFINITY);
        for &a in &actions {
            let o = provider.outage(a).unwrap();
            let (ages, w) = (state.ages(), state.weights());
            let v = w[0] * (1.0 - o.near) * f64::from(ages[0])
                + w[1] * (1.0 - o.far) * f64::from(ages[1]);
            if v > best.1 {
                best = (a, v);
            }
        }
        if best.0 != chosen {
            bad.push(format!("shift changed argmax at {:?}", state.ages()));
        }

        // N-client scale invariance
        let n = r.random_range(1..=6);
        let mut d: Vec<f64> = (0..n).map(|_| r.random_range(0.5..6.0)).collect();
        d.sort_by(|a, b| b.total_cmp(a));
        let params = ChannelParams::from_snr_db(d, 2.0, snr_db, 1.0).unwrap();
        let ages = random_ages(&mut r, n, 40);
        let state = AoIState::uniform(ages.clone()).unwrap();
        let base = mw_oma(&state, &params).unwrap().kind;
        for m in [2u32, 3, 10] {
            let scaled = AoIState::uniform(ages.iter().map(|a| a * m).collect()).unwrap();
            let k = mw_oma(&scaled, &params).unwrap().kind;
            if k != base {
                bad.push(format!("scaling by {m} changed the OMA client at {ages:?}"));
            }
        }
        if !matches!(base, DecisionKind::Oma { .. }) {
            bad.push("mw_oma returned a non-OMA decision".into());
        }
    }
    bad
}
