//! Outage probability of OMA and of the two NOMA users across the power
//! split, for the two-client cell at distances 2 and 4.
//!
//! ```bash
//! cargo run --example outage_curves -- 18
//! ```

use aoi_noma::channel::{min_far_fraction, noma2_outage_far, noma2_outage_near, ChannelParams};

fn main() -> aoi_noma::Result<()> {
    let snr_db: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("SNR in dB"))
        .unwrap_or(18.0);
    let params = ChannelParams::from_snr_db(vec![2.0, 4.0], 2.0, snr_db, 1.0)?;

    println!("{snr_db} dB, R = 1 bit/s/Hz");
    println!(
        "OMA: near {:.4}, far {:.4}",
        params.oma_outage_of(0),
        params.oma_outage_of(1)
    );
    println!("NOMA needs α2 > {:.4}\n", min_far_fraction(&params));

    println!("{:>6} {:>8} {:>8}", "α2", "near", "far");
    for a in 6..10 {
        let alpha2 = f64::from(a) / 10.0;
        let near = noma2_outage_near(alpha2, 2.0, &params)?;
        let far = noma2_outage_far(alpha2, 4.0, &params)?;
        println!("{alpha2:>6.2} {near:>8.4} {far:>8.4}");
    }

    println!("\nOMA outage against SNR (d = 4):");
    for db in (0..=40).step_by(5) {
        let p = params.with_snr_db(f64::from(db))?;
        println!("{db:>3} dB  {:.6}", p.oma_outage_of(1));
    }
    Ok(())
}
