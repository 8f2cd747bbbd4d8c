//! (p-k-n) classes and the photon budgets behind them.
//!
//! cargo run --example threshold_classes

use tsqc::analytics::{classify_protocol, detector_array_budget, min_siphon_photons, ProtocolKind};

fn main() -> tsqc::Result<()> {
    let bb84 = classify_protocol(ProtocolKind::Bb84, None, None)?;
    println!(
        "BB84: {bb84} (threshold property: {})",
        bb84.has_threshold_property()
    );
    let tsqc = classify_protocol(ProtocolKind::ThreeStage, Some(5), Some(30))?;
    println!("three-stage, p = 5, n = 30: {tsqc}");
    for photons in [3, 5, 12, 20, 21] {
        println!("  {photons:>2} photons -> {:?}", tsqc.regime(photons));
    }
    println!("s      3 log2 s   eve (3s)   source (6s)");
    for s in [2u64, 4, 8, 16, 1024] {
        let (eve, source) = detector_array_budget(s)?;
        println!("{s:<6} {:<10} {eve:<10} {source}", min_siphon_photons(s)?);
    }
    Ok(())
}
