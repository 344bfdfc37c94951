//! Simulates the optimal two-client policy against the one-step max-weight
//! rule and the OMA-only / NOMA-only restrictions.
//!
//! ```bash
//! cargo run --release --example maxweight_vs_optimal -- 200000
//! ```

use aoi_noma::channel::ChannelParams;
use aoi_noma::mdp2::ActionRestriction;
use aoi_noma::scheduler::PolicySpec;
use aoi_noma::sim::{sweep, SimConfig, SweepAxis, SweepPoint};

fn main() {
    let horizon: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("horizon"))
        .unwrap_or(100_000);
    let mdp = |restriction| PolicySpec::Mdp {
        restriction,
        levels: 10,
        delta_max: 100,
    };
    let policies = [
        mdp(ActionRestriction::Adaptive),
        PolicySpec::MaxWeight2 { levels: 10 },
        mdp(ActionRestriction::OmaOnly),
        mdp(ActionRestriction::NomaOnly),
    ];
    let snrs = [10.0, 15.0, 20.0, 25.0, 30.0];

    let mut points = vec![];
    for policy in &policies {
        for &snr_db in &snrs {
            let channel = ChannelParams::from_snr_db(vec![2.0, 4.0], 2.0, snr_db, 1.0).unwrap();
            let config = SimConfig::new(channel, policy.clone(), horizon, 1);
            points.push(SweepPoint {
                axis: SweepAxis::SnrDb(snr_db),
                config,
            });
        }
    }

    print!("{:<12}", "policy");
    for s in snrs {
        print!("{:>9}", format!("{s} dB"));
    }
    println!();
    for rows in sweep(points).chunks(snrs.len()) {
        print!("{:<12}", rows[0].policy);
        for row in rows {
            match &row.result {
                Ok(r) => print!("{:>9.4}", r.weighted_avg_aoi),
                Err(e) => print!("  error: {e}"),
            }
        }
        println!();
    }
}
