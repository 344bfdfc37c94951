//! End-to-end acceptance checks. Runs as a plain binary so every
//! criterion prints its own PASS/FAIL line:
//!
//! ```bash
//! cargo test --release --test acceptance            # all criteria
//! cargo test --release --test acceptance -- 3 5     # a selection
//! ```

mod common;

use std::collections::BTreeSet;
use std::f64::consts::E;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use aoi_noma::allocator::{
    brute_force_problem7, enumerate_allocate, grid_error_bound, solve_problem8,
};
use aoi_noma::mdp2::{
    restricted_action_space, rvi_solve, solve_for_channel, verify_switching, ActionRestriction,
    ChannelOutage, MdpConfig,
};
use aoi_noma::scheduler::{exhaustive_mw, AoIState, PolicySpec};
use aoi_noma::sim::{run, SimConfig};
use common::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn simulate(policy: PolicySpec, params: aoi_noma::channel::ChannelParams, horizon: u64) -> f64 {
    let n = params.num_clients();
    let config =
        SimConfig::new(params, policy, horizon, 2024).with_weights(vec![1.0 / n as f64; n]);
    run(&config).unwrap().weighted_avg_aoi
}

fn mdp(restriction: ActionRestriction) -> PolicySpec {
    PolicySpec::Mdp {
        restriction,
        levels: 10,
        delta_max: 100,
    }
}

/// OMA-only optimal policy at 40 dB approaches alternating service.
fn high_snr_oma() -> Outcome {
    let start = Instant::now();
    let avg = simulate(mdp(ActionRestriction::OmaOnly), two_client(40.0), 1_000_000);
    let t = start.elapsed();
    outcome(
        (avg - 1.5).abs() <= 0.02 && within(t, 60),
        format!("avg AoI {avg:.5} (target 1.5 ± 0.02) in {t:.1?}"),
    )
}

/// Adaptive optimal policy at 40 dB approaches serving both every slot.
fn high_snr_adaptive() -> Outcome {
    let start = Instant::now();
    let avg = simulate(
        mdp(ActionRestriction::Adaptive),
        two_client(40.0),
        1_000_000,
    );
    let t = start.elapsed();
    outcome(
        avg <= 1.05 && within(t, 60),
        format!("avg AoI {avg:.5} (limit 1.05) in {t:.1?}"),
    )
}

/// Optimal policy structure at 18 dB.
fn switching_structure() -> Outcome {
    let params = two_client(18.0);
    let start = Instant::now();
    let actions = restricted_action_space(10, 1.0, ActionRestriction::Adaptive).unwrap();
    let config = MdpConfig::new([0.5, 0.5], 100, actions);
    let table = rvi_solve(&config, &ChannelOutage::new(params).unwrap()).unwrap();
    let t = start.elapsed();
    let report = verify_switching(table.grid());
    let set: BTreeSet<u32> = table.action_set().iter().map(|a| a.index()).collect();
    let realized: BTreeSet<u32> = table.grid().realized_actions().into_iter().collect();
    let want_set: BTreeSet<u32> = [0, 6, 7, 8, 9, 10].into();
    let want_regions: BTreeSet<u32> = [0, 7, 8, 9, 10].into();
    outcome(
        t < Duration::from_secs(10)
            && report.passes()
            && set == want_set
            && realized == want_regions,
        format!(
            "solved in {t:.2?}, {} violations, action set {set:?}, decision regions {realized:?}",
            report.violations.len()
        ),
    )
}

/// Max-weight within 3% of optimal at three SNRs.
fn heuristic_near_optimal() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = vec![];
    for snr in [15.0, 18.0, 21.0] {
        let opt = simulate(mdp(ActionRestriction::Adaptive), two_client(snr), 1_000_000);
        let mw = simulate(
            PolicySpec::MaxWeight2 { levels: 10 },
            two_client(snr),
            1_000_000,
        );
        let rel = (mw - opt) / opt;
        worst = worst.max(rel);
        parts.push(format!(
            "{snr} dB: opt {opt:.4} mw {mw:.4} ({:+.2}%)",
            100.0 * rel
        ));
    }
    let t = start.elapsed();
    outcome(
        worst <= 0.03 && within(t, 300),
        format!("{} in {t:.1?}", parts.join("; ")),
    )
}

/// Dropping dominated NOMA splits leaves the optimal cost unchanged.
fn elimination_sound() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut parts = vec![];
    for (levels, snr) in [(20, 18.0), (20, 12.0), (10, 18.0)] {
        let params = two_client(snr);
        let full = solve_for_channel(
            &params,
            [0.5, 0.5],
            levels,
            30,
            ActionRestriction::AdaptiveFull,
        )
        .unwrap();
        let reduced =
            solve_for_channel(&params, [0.5, 0.5], levels, 30, ActionRestriction::Adaptive)
                .unwrap();
        let diff = (full.average_cost() - reduced.average_cost()).abs();
        worst = worst.max(diff);
        parts.push(format!(
            "L={levels} {snr} dB: |A|={} vs {}, ΔJ={diff:.1e}",
            full.action_set().len(),
            reduced.action_set().len()
        ));
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-6 && within(t, 10),
        format!("{} in {t:.2?}", parts.join("; ")),
    )
}

/// Envelope solution sandwiches the grid optimum and respects the gap bound.
fn envelope_sandwich() -> Outcome {
    let start = Instant::now();
    let mut r = rng(6);
    let cases = 1200;
    let mut failures = vec![];
    let mut max_gap_ratio: f64 = 0.0;
    for i in 0..cases {
        let k = 1 + i % 3;
        let inst = random_instance(&mut r, k);
        let step = 1e-3 * inst.budget();
        let sol = solve_problem8(&inst).unwrap();
        let grid = brute_force_problem7(&inst, step, true).unwrap();
        let eps = grid_error_bound(&inst, step);
        let sum_c: f64 = inst.coefficients().iter().sum();
        let fp = 1e-9 * sum_c.max(1.0);
        let (u, ut, ug) = (sol.true_value, sol.envelope_value, grid.value);
        let gap = sum_c / (E * E);
        if u > ug + eps + fp {
            failures.push(format!("case {i}: U°={u} > U*grid+ε={}", ug + eps));
        }
        if ug > ut + fp {
            failures.push(format!("case {i}: U*grid={ug} > Ũ°={ut}"));
        }
        if ut - u > gap + fp || u > ut + fp {
            failures.push(format!("case {i}: Ũ°-U°={} vs bound {gap}", ut - u));
        }
        max_gap_ratio = max_gap_ratio.max((ut - u) / gap);
    }
    let t = start.elapsed();
    outcome(
        failures.is_empty() && within(t, 600),
        format!(
            "{cases} instances, {} violations, largest (Ũ°-U°)/bound {max_gap_ratio:.3}, {t:.1?}{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" [{f}]"))
                .unwrap_or_default()
        ),
    )
}

/// The ordering constraint does not change the grid optimum.
fn ordering_is_free() -> Outcome {
    let start = Instant::now();
    let mut r = rng(7);
    let cases = 240;
    let mut failures = 0;
    let mut worst_ratio: f64 = 0.0;
    for i in 0..cases {
        let k = 2 + i % 2;
        let inst = random_instance(&mut r, k);
        let step = 1e-3 * inst.budget();
        let ordered = brute_force_problem7(&inst, step, true).unwrap().value;
        let free = brute_force_problem7(&inst, step, false).unwrap().value;
        let eps = grid_error_bound(&inst, step);
        let diff = (free - ordered).abs();
        if diff > 2.0 * eps {
            failures += 1;
        }
        worst_ratio = worst_ratio.max(diff / (2.0 * eps));
    }
    let t = start.elapsed();
    outcome(
        failures == 0 && within(t, 600),
        format!(
            "{cases} instances, {failures} violations, largest diff/(2ε) {worst_ratio:.3}, {t:.1?}"
        ),
    )
}

/// Five clients: NOMA wins at high SNR, OMA beats forced NOMA at low SNR.
fn multi_client_trend() -> Outcome {
    let start = Instant::now();
    let horizon = 100_000;
    let ap30 = simulate(PolicySpec::ApNomaOma, line_of_clients(5, 30.0), horizon);
    let oma30 = simulate(PolicySpec::MwOma, line_of_clients(5, 30.0), horizon);
    let oma10 = simulate(PolicySpec::MwOma, line_of_clients(5, 10.0), horizon);
    let fixed10: Vec<f64> = (2..=5)
        .map(|k| {
            simulate(
                PolicySpec::ApNomaFixedK { k },
                line_of_clients(5, 10.0),
                horizon,
            )
        })
        .collect();
    let t = start.elapsed();
    let ok = ap30 <= oma30 && fixed10.iter().all(|&f| oma10 <= f) && within(t, 600);
    outcome(
        ok,
        format!(
            "30 dB: AP {ap30:.4} vs MW-OMA {oma30:.4}; 10 dB: MW-OMA {oma10:.4} vs fixed K=2..5 {:.4?}; {t:.1?}",
            fixed10
        ),
    )
}

/// Adaptive allocation is close to exhaustive search over a power grid.
fn oracle_proximity() -> Outcome {
    let start = Instant::now();
    let params = line_of_clients(3, 20.0);
    let levels = 200;
    let delta = params.power_budget() / f64::from(levels);
    let r_factor = params.rate_factor();
    let mut r = rng(9);
    let cases = 120;
    let mut failures = vec![];
    let mut worst_ratio: f64 = 0.0;
    for i in 0..cases {
        let state = AoIState::uniform(random_ages(&mut r, 3, 25)).unwrap();
        let adaptive = enumerate_allocate(&state, &params).unwrap();
        let exhaustive = exhaustive_mw(&state, &params, levels).unwrap();
        let lipschitz: f64 = (0..3)
            .map(|j| {
                state.weights()[j] * f64::from(state.ages()[j]) * 4.0 / (E * E * params.scale(j))
            })
            .sum();
        let grid_err = delta * (1.0 + r_factor * 2.0) * lipschitz;
        let allowed = adaptive.solution.gap_certificate + grid_err;
        let diff = (adaptive.expected_drop() - exhaustive.expected_drop).abs();
        if diff > allowed {
            failures.push(format!(
                "case {i} ages {:?}: diff {diff} > {allowed}",
                state.ages()
            ));
        }
        worst_ratio = worst_ratio.max(diff / allowed);
    }
    let t = start.elapsed();
    outcome(
        failures.is_empty() && within(t, 600),
        format!(
            "{cases} states, {} violations, largest diff/allowance {worst_ratio:.3}, {t:.1?}{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" [{f}]"))
                .unwrap_or_default()
        ),
    )
}

/// The standalone property suites, in one pass.
fn property_suites() -> Outcome {
    let start = Instant::now();
    let outage = outage_violations();
    let transform = transform_violations(10, 20_000);
    let bellman = bellman_violations();
    let renewal = renewal_check(8.0, 250_000, 8, 10);
    let invariance = argmax_invariance_violations(10, 2_000);
    let t = start.elapsed();
    let total = outage.len()
        + transform.len()
        + bellman.len()
        + invariance.len()
        + usize::from(!renewal.passes());
    let first = outage
        .iter()
        .chain(&transform)
        .chain(&bellman)
        .chain(&invariance)
        .next()
        .map(|f| format!(" [{f}]"))
        .unwrap_or_default();
    outcome(
        total == 0 && within(t, 120),
        format!(
            "violations: outage {}, transform {}, Bellman {}, invariance {}; renewal {:.4} vs 1/(1-q) = {:.4} ± 3·{:.4}; {t:.1?}{first}",
            outage.len(),
            transform.len(),
            bellman.len(),
            invariance.len(),
            renewal.estimate,
            renewal.expected,
            renewal.stderr
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("high-SNR OMA limit", high_snr_oma),
        ("high-SNR adaptive limit", high_snr_adaptive),
        (
            "switching structure of the optimal policy",
            switching_structure,
        ),
        ("max-weight near-optimality", heuristic_near_optimal),
        ("action-elimination soundness", elimination_sound),
        ("envelope sandwich and gap bound", envelope_sandwich),
        (
            "ordering constraint does not change the optimum",
            ordering_is_free,
        ),
        ("multi-client NOMA/OMA trend", multi_client_trend),
        ("proximity to exhaustive search", oracle_proximity),
        ("property suites", property_suites),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let status = if result.passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status}: {name}: {}", result.detail);
        if !result.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
