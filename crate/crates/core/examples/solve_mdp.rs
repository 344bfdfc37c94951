//! Solve the two-client MDP and print the optimal policy's decision regions.
//!
//! ```bash
//! cargo run --release --example solve_mdp -- 18
//! ```
//!
//! The optional argument is the transmission SNR in dB (default 18).

use std::time::Instant;

use aoi_noma::channel::ChannelParams;
use aoi_noma::mdp2::{extract_boundaries, solve_for_channel, verify_switching, ActionRestriction};

fn main() -> aoi_noma::Result<()> {
    let snr_db: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("SNR in dB"))
        .unwrap_or(18.0);
    let params = ChannelParams::from_snr_db(vec![2.0, 4.0], 2.0, snr_db, 1.0)?;

    let start = Instant::now();
    let table = solve_for_channel(&params, [0.5, 0.5], 10, 100, ActionRestriction::Adaptive)?;
    println!(
        "solved in {:.2?} ({} iterations), J* = {:.6}",
        start.elapsed(),
        table.iterations().unwrap_or(0),
        table.average_cost()
    );
    println!("realized actions: {:?}", table.grid().realized_actions());

    let report = verify_switching(table.grid());
    println!(
        "switching structure: {} violations",
        report.violations.len()
    );

    // Top-left corner of the policy, Δ1 down the rows and Δ2 across.
    println!("\nactions for Δ1, Δ2 in 1..=20:");
    for d1 in 1..=20 {
        let row: Vec<String> = (1..=20)
            .map(|d2| format!("{:>2}", table.action((d1, d2))))
            .collect();
        println!("Δ1={d1:>3} | {}", row.join(" "));
    }

    if report.passes() {
        let boundaries = extract_boundaries(table.grid())?;
        println!("\nfirst boundary rows (Δ1,start,Δ2:a,...):");
        for line in boundaries.to_text().lines().take(8) {
            println!("  {line}");
        }
    }
    Ok(())
}
