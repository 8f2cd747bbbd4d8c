//! Siphon-and-replace: intensity checks stay silent while Bob's SNR degrades.
//!
//! cargo run --example siphoning_attack

use tsqc::adversary::{photon_vector_after, AttackPlan, TomographyModel};
use tsqc::analytics::snr_uniform;
use tsqc::protocol::{run_three_stage, SessionConfig};

fn main() -> tsqc::Result<()> {
    let config = SessionConfig {
        pulse_size: 50_000,
        alpha: 0.05,
        seed: 3,
        ..SessionConfig::default()
    };
    println!("beta   breach  final(good,bad)   snr     closed-form  expected per 100");
    for beta in [0.02, 0.05, 0.1, 0.15, 0.2] {
        let plan = AttackPlan::uniform(
            beta,
            true,
            TomographyModel::physical_ml(config.angle_set),
            5,
        )?;
        let o = run_three_stage(&config, Some(&plan))?;
        let v = photon_vector_after(100, beta, 3)?;
        println!(
            "{beta:<5}  {:<6}  {:<16}  {:<7.4} {:<12.4} {{{:.2}, {:.2}}}",
            o.breach_detected,
            format!("{:?}", o.final_composition),
            o.final_snr().unwrap_or(f64::INFINITY),
            snr_uniform(beta)?,
            v.good,
            v.bad
        );
    }
    Ok(())
}
