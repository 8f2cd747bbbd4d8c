//! Detection and decoding rates while sweeping Eve's siphon fraction.
//!
//! cargo run --release --example experiment_sweep

use tsqc::adversary::{AttackPlan, TomographyModel};
use tsqc::montecarlo::{run_experiment, ExperimentSpec, Sweep, SweepParam};
use tsqc::protocol::{GPolicy, SessionConfig};

fn main() -> tsqc::Result<()> {
    let base = SessionConfig {
        pulse_size: 2_000,
        alpha: 0.05,
        g_policy: GPolicy::Constant(0.2),
        ..SessionConfig::default()
    };
    let betas = vec![0.02, 0.05, 0.08, 0.1, 0.15, 0.2, 0.3];
    for replace in [false, true] {
        let plan = AttackPlan::uniform(
            0.0,
            replace,
            TomographyModel::physical_ml(base.angle_set),
            3,
        )?;
        let mut spec = ExperimentSpec::new(base.clone(), Some(plan), 500, 11);
        spec.randomize_bit = true;
        spec.sweep = Some(Sweep {
            param: SweepParam::Beta,
            values: betas.clone(),
        });
        println!("replace = {replace}");
        println!("  cell        detect  decode  eve     final snr");
        for c in run_experiment(&spec)?.cells {
            println!(
                "  {:<11} {:<7.3} {:<7.3} {:<7.3} {}",
                c.label,
                c.detection_rate,
                c.decode_accuracy,
                c.eve_success_rate,
                c.mean_final_snr.map_or("-".into(), |s| format!("{s:.3}"))
            );
        }
    }
    Ok(())
}
