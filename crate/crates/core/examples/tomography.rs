//! Maximum-likelihood angle discrimination: success rate against stash size.
//!
//! cargo run --release --example tomography

use tsqc::adversary::{estimate_angle, TomographyModel};
use tsqc::optics::{PhotonPulse, PolarizationState};
use tsqc::protocol::AngleSet;
use tsqc::RandomStream;

fn main() -> tsqc::Result<()> {
    let trials = 5_000;
    for s in [2u64, 4, 8, 16] {
        let set = AngleSet::new(s)?;
        let model = TomographyModel::physical_ml(set);
        let truth = set.angle(1);
        let mut rng = RandomStream::new(s);
        print!("s = {s:<3}");
        for size in [1usize, 4, 16, 64, 256] {
            let wins = (0..trials)
                .filter(|_| {
                    estimate_angle(&PhotonPulse::uniform(truth, size), &model, truth, &mut rng)
                        .success
                })
                .count();
            print!("  n={size:<3} {:.3}", wins as f64 / trials as f64);
        }
        println!();
    }

    // injected noise drags Eve down too
    let set = AngleSet::new(8)?;
    let model = TomographyModel::physical_ml(set);
    let truth = set.angle(2);
    let mut rng = RandomStream::new(99);
    for bad in [0usize, 16, 32, 64] {
        let wins = (0..trials)
            .filter(|_| {
                let noise = PolarizationState::new(rng.uniform() * std::f64::consts::PI);
                let stash = PhotonPulse::with_composition(truth, 32, noise, bad);
                estimate_angle(&stash, &model, truth, &mut rng).success
            })
            .count();
        println!("32 good + {bad:>2} bad: {:.3}", wins as f64 / trials as f64);
    }
    Ok(())
}
