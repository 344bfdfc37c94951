//! Runs one policy with several replications, prints the estimate with its
//! standard error and the first slots of the trace. A custom policy can be
//! plugged in through a closure.
//!
//! ```bash
//! cargo run --release --example simulate
//! ```

use aoi_noma::channel::ChannelParams;
use aoi_noma::scheduler::{mw_oma, AoIState, Decision, DecisionKind, FnPolicy, Policy, PolicySpec};
use aoi_noma::sim::{run, run_with, SimConfig};

fn main() -> aoi_noma::Result<()> {
    let channel = ChannelParams::from_snr_db(vec![3.0, 2.0, 1.0], 2.0, 15.0, 1.0)?;

    let config = SimConfig::new(channel.clone(), PolicySpec::ApNomaOma, 20_000, 11)
        .with_replications(8)
        .with_trace(true);
    let result = run(&config)?;
    println!(
        "AP-N/OMA: {:.4} ± {:.4} over {} replications of {} slots",
        result.weighted_avg_aoi,
        result.stderr,
        result.replication_means.len(),
        result.slots
    );
    println!("per client: {:.3?}", result.per_client_avg_aoi);
    println!("\nslot,ages...,decision,delivered mask");
    for row in result.trace.iter().flatten().take(8) {
        println!("{}", row.to_line());
    }

    // round robin, ignoring ages and channel quality
    let factory = || -> Box<dyn Policy> {
        let mut next = 0;
        Box::new(FnPolicy(move |state: &AoIState| {
            let client = next % state.len();
            next += 1;
            Ok(Decision {
                kind: DecisionKind::Oma { client },
                expected_drop: 0.0,
            })
        }))
    };
    let rr = run_with(&config.clone().with_trace(false), &factory)?;
    let base = SimConfig::new(channel, PolicySpec::MwOma, 20_000, 11).with_replications(8);
    let mw = run(&base)?;
    println!(
        "\nround robin {:.4} ± {:.4}",
        rr.weighted_avg_aoi, rr.stderr
    );
    println!("MW-OMA      {:.4} ± {:.4}", mw.weighted_avg_aoi, mw.stderr);

    // the built-in rule, for reference at a single state
    let state = AoIState::uniform(vec![5, 1, 2])?;
    println!(
        "MW-OMA at ages {:?}: {}",
        state.ages(),
        mw_oma(&state, &base.channel)?.encode()
    );
    Ok(())
}
