//! Monte Carlo agreement between sampled siphoning cascades and their closed forms.

use tsqc::adversary::{intercept, photon_vector_after, AttackPlan, Pass, TomographyModel};
use tsqc::analytics::snr_uniform;
use tsqc::montecarlo::{run_experiment, ExperimentSpec};
use tsqc::optics::{PhotonPulse, PolarizationState};
use tsqc::protocol::{AngleSet, SessionConfig};
use tsqc::RandomStream;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn sampled_cascade_matches_photon_vector() {
    let set = AngleSet::new(4).unwrap();
    for (n, alpha) in [(100usize, 0.2), (400, 0.1), (250, 0.3)] {
        let plan = AttackPlan::uniform(alpha, true, TomographyModel::physical_ml(set), 0).unwrap();
        let mut rng = RandomStream::new(n as u64);
        let mut finals = vec![Vec::new(); 3];
        for _ in 0..10_000 {
            let mut pulse = PhotonPulse::uniform(PolarizationState::new(0.0), n);
            for pass in Pass::ALL {
                let (fwd, _) = intercept(pulse, pass, &plan, &mut rng);
                finals[pass.index()].push(fwd.good_count() as f64);
                pulse = fwd;
            }
        }
        for pass in Pass::ALL {
            let closed = photon_vector_after(n as u64, alpha, pass.number()).unwrap();
            let (mean, se) = mean_and_se(&finals[pass.index()]);
            // deterministic per-pass rounding shifts the mean by < 1 photon
            let round_slack = 0.5 * pass.number() as f64;
            assert!(
                (mean - closed.good).abs() <= 3.0 * se + round_slack,
                "n={n} alpha={alpha} {pass}: {mean} vs {}",
                closed.good
            );
        }
    }
}

#[test]
fn final_snr_error_shrinks_with_trials() {
    let base = SessionConfig {
        pulse_size: 4_000,
        alpha: 0.05,
        ..SessionConfig::default()
    };
    let plan = AttackPlan::uniform(0.12, true, TomographyModel::physical_ml(base.angle_set), 2).unwrap();
    let target = snr_uniform(0.12).unwrap();
    let err = |trials| {
        let spec = ExperimentSpec::new(base.clone(), Some(plan.clone()), trials, 21);
        let got = run_experiment(&spec).unwrap().cells[0].mean_final_snr.unwrap();
        (got - target).abs() / target
    };
    assert!(err(20) < 0.03);
    assert!(err(500) < 0.01);
}
