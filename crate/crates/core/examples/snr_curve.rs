//! Bob's SNR against the uniform siphon fraction, and where it crosses 1 and 10.
//!
//! cargo run --example snr_curve

use tsqc::analytics::{critical_siphon_fraction, snr_general};
use tsqc::montecarlo::snr_curve;

fn main() -> tsqc::Result<()> {
    for (alpha, snr) in snr_curve(0.0, 0.3, 13)? {
        let bar = "#".repeat((snr.min(40.0)) as usize);
        println!("{alpha:.3}  {snr:>8.3}  {bar}");
    }
    println!("SNR = 1 at alpha = {:.5}", critical_siphon_fraction());
    let ten = snr_curve(0.0, 0.1, 1001)?
        .into_iter()
        .find(|&(_, s)| s <= 10.0)
        .map(|(a, _)| a)
        .unwrap_or(f64::NAN);
    println!("SNR <= 10 from alpha = {ten:.3}");
    println!(
        "worked attack (0.2, 0.25, 0.34): SNR {:.4}",
        snr_general(0.2, 0.25, 0.34)?
    );
    Ok(())
}
