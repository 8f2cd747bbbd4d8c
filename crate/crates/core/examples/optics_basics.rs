//! Rotations, Malus-law measurement and beam splitting on a small pulse.
//!
//! cargo run --example optics_basics

use std::f64::consts::PI;

use tsqc::optics::{
    measure_photon, rotate, split_fraction, Photon, PhotonPulse, PolarizationState, RotationOp,
    SplitMode,
};
use tsqc::RandomStream;

fn main() -> tsqc::Result<()> {
    let mut rng = RandomStream::new(1);

    let theta = RotationOp::new(3.0 * PI / 8.0);
    let phi = RotationOp::new(5.0 * PI / 8.0);
    let start = PolarizationState::new(PI / 2.0);
    let a = start.rotated(theta).rotated(phi);
    let b = start.rotated(phi).rotated(theta);
    println!("theta then phi: {a}");
    println!("phi then theta: {b}");
    println!(
        "undo both:      {}",
        a.rotated(theta.inverse()).rotated(phi.inverse())
    );

    let basis = PolarizationState::new(0.0);
    for angle in [0.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, PI / 2.0] {
        let trials = 20_000;
        let hits = (0..trials)
            .filter(|_| {
                measure_photon(
                    Photon::signal(PolarizationState::new(angle)),
                    basis,
                    &mut rng,
                )
            })
            .count();
        println!(
            "photon at {:>5.1} deg: passed {:.4} (cos^2 = {:.4})",
            angle.to_degrees(),
            hits as f64 / trials as f64,
            angle.cos().powi(2)
        );
    }

    let pulse = rotate(PhotonPulse::uniform(start, 1000), theta);
    let (meter, kept) = split_fraction(pulse.clone(), 0.1, SplitMode::Deterministic, &mut rng)?;
    println!(
        "deterministic 10% split: {} / {}",
        meter.intensity(),
        kept.intensity()
    );
    let (meter, kept) = split_fraction(pulse, 0.1, SplitMode::Binomial, &mut rng)?;
    println!(
        "binomial 10% split:      {} / {}",
        meter.intensity(),
        kept.intensity()
    );
    Ok(())
}
