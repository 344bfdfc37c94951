//! One adaptive NOMA/OMA decision for a five-client cell, compared with
//! the best single-client transmission and each fixed client count.
//!
//! ```bash
//! cargo run --release --example allocate_once -- 20 1,1,1,1,1
//! ```
//!
//! Arguments: SNR in dB (default 20) and comma-separated ages (default all 1).

use std::time::Instant;

use aoi_noma::allocator::enumerate_allocate;
use aoi_noma::channel::ChannelParams;
use aoi_noma::scheduler::{fixed_k_noma, mw_oma, AoIState};

fn main() -> aoi_noma::Result<()> {
    let mut args = std::env::args().skip(1);
    let snr_db: f64 = args
        .next()
        .map(|s| s.parse().expect("SNR in dB"))
        .unwrap_or(20.0);
    let ages: Vec<u32> = args
        .next()
        .map(|s| {
            s.split(',')
                .map(|a| a.trim().parse().expect("age"))
                .collect()
        })
        .unwrap_or_else(|| vec![1; 5]);

    let n = ages.len();
    let distances: Vec<f64> = (0..n).map(|i| (n - i) as f64).collect();
    let params = ChannelParams::from_snr_db(distances, 2.0, snr_db, 1.0)?;
    let state = AoIState::uniform(ages)?;

    let start = Instant::now();
    let best = enumerate_allocate(&state, &params)?;
    let elapsed = start.elapsed();

    let served: Vec<usize> = best.allocation.served().iter().map(|c| c + 1).collect();
    println!("{n} clients at {snr_db} dB, ages {:?}", state.ages());
    println!("enumerated {} subsets in {elapsed:.2?}", (1u32 << n) - 1);
    println!("served (decoding order): {served:?}");
    println!("raw powers:  {:.4?}", best.allocation.raw_powers());
    println!("p̂ powers:    {:.4?}", best.allocation.hat_powers());
    println!("expected drop {:.6}", best.expected_drop());
    println!(
        "envelope {:.6}, true {:.6}, gap certificate {:.6}",
        best.solution.envelope_value, best.solution.true_value, best.solution.gap_certificate
    );

    println!("\nbest OMA: {:.6}", mw_oma(&state, &params)?.expected_drop);
    for k in 1..=n {
        let d = fixed_k_noma(&state, &params, k)?;
        println!("best with exactly {k} served: {:.6}", d.expected_drop);
    }
    Ok(())
}
