//! One clean session and one session with a careless eavesdropper.
//!
//! cargo run --example three_stage_session

use tsqc::adversary::{AttackPlan, TomographyModel};
use tsqc::protocol::{run_three_stage, GPolicy, SessionConfig, SessionOutcome};

fn report(title: &str, o: &SessionOutcome) {
    println!("== {title}");
    for r in &o.intensity_records {
        println!(
            "  {}: expected {:.0}, kept {}, {:?}",
            r.checkpoint, r.expected, r.observed, r.verdict
        );
    }
    println!(
        "  final pulse {:?}, sent {}, decoded {:?}, breach at {:?}",
        o.final_composition,
        o.sent_bit as u8,
        o.decoded_bit.map(u8::from),
        o.breach_stage
    );
}

fn main() -> tsqc::Result<()> {
    let config = SessionConfig {
        pulse_size: 1000,
        alpha: 0.05,
        g_policy: GPolicy::Constant(0.05),
        bit: true,
        seed: 7,
        ..SessionConfig::default()
    };
    report("no eavesdropper", &run_three_stage(&config, None)?);

    let plan = AttackPlan::uniform(
        0.1,
        false,
        TomographyModel::abstract_threshold(20, config.angle_set)?,
        1,
    )?;
    report(
        "10% siphoned per pass, not replaced",
        &run_three_stage(&config, Some(&plan))?,
    );
    Ok(())
}
