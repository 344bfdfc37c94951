//! Five clients at distances 5..1: adaptive NOMA/OMA against max-weight
//! OMA and NOMA with a fixed number of served clients, across SNR.
//!
//! ```bash
//! cargo run --release --example multi_client_sweep -- 20000
//! ```
//!
//! The argument is the horizon in slots (default 20000).

use aoi_noma::channel::ChannelParams;
use aoi_noma::scheduler::PolicySpec;
use aoi_noma::sim::{sweep, SimConfig, SweepAxis, SweepPoint};

fn main() {
    let horizon: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("horizon"))
        .unwrap_or(20_000);
    let mut policies = vec![PolicySpec::ApNomaOma, PolicySpec::MwOma];
    policies.extend((2..=5).map(|k| PolicySpec::ApNomaFixedK { k }));
    let snrs = [10.0, 20.0, 30.0, 40.0];

    let mut points = vec![];
    for policy in &policies {
        for &snr_db in &snrs {
            let channel =
                ChannelParams::from_snr_db(vec![5.0, 4.0, 3.0, 2.0, 1.0], 2.0, snr_db, 1.0)
                    .unwrap();
            points.push(SweepPoint {
                axis: SweepAxis::SnrDb(snr_db),
                config: SimConfig::new(channel, policy.clone(), horizon, 7),
            });
        }
    }

    print!("{:<18}", "policy");
    for s in snrs {
        print!("{:>10}", format!("{s} dB"));
    }
    println!();
    for rows in sweep(points).chunks(snrs.len()) {
        print!("{:<18}", rows[0].policy);
        for row in rows {
            match &row.result {
                Ok(r) => print!("{:>10.4}", r.weighted_avg_aoi),
                Err(e) => print!("  error: {e}"),
            }
        }
        println!();
    }
}
