//! Seeded batch execution of sessions, parameter sweeps, the scripted
//! 100-photon siphoning trace and the analytic SNR curve.
//!
//! Trial `i` of an experiment always runs with session seed
//! `mix_seed(spec.seed, i)` regardless of thread scheduling, and per-trial
//! records are reduced in trial order, so results are bit-identical across
//! runs and thread counts. Every sweep cell reuses the same trial seeds.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::adversary::{eve_stash_snr, intercept, AttackPlan, Pass, TomographyModel};
use crate::analytics::snr_uniform;
use crate::error::{check_unit_open, Error, Result};
use crate::optics::{PhotonPulse, PolarizationState};
use crate::protocol::{run_three_stage, AngleSet, GPolicy, SessionConfig, SessionOutcome};
use crate::rng::{mix_seed, RandomStream};

/// Parameters an experiment can sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    /// Uniform siphon fraction on all three passes.
    Beta,
    A1,
    A2,
    A3,
    PulseSize,
    ChannelLoss,
    /// Switches the threshold policy to a constant `g`.
    G,
    /// Angle-set size `s` for both parties and Eve.
    AngleSetSize,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Beta => "beta",
            SweepParam::A1 => "a1",
            SweepParam::A2 => "a2",
            SweepParam::A3 => "a3",
            SweepParam::PulseSize => "n",
            SweepParam::ChannelLoss => "loss",
            SweepParam::G => "g",
            SweepParam::AngleSetSize => "s",
        }
    }

    fn needs_attack(self) -> bool {
        matches!(
            self,
            SweepParam::Beta | SweepParam::A1 | SweepParam::A2 | SweepParam::A3
        )
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "alpha" => SweepParam::Alpha,
            "beta" => SweepParam::Beta,
            "a1" => SweepParam::A1,
            "a2" => SweepParam::A2,
            "a3" => SweepParam::A3,
            "n" | "pulse_size" => SweepParam::PulseSize,
            "loss" | "channel_loss" => SweepParam::ChannelLoss,
            "g" => SweepParam::G,
            "s" => SweepParam::AngleSetSize,
            other => return Err(Error::Config(format!("unknown sweep parameter `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base_config: SessionConfig,
    pub attack: Option<AttackPlan>,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    /// Draw the sent bit per trial instead of using `base_config.bit`.
    pub randomize_bit: bool,
}

impl ExperimentSpec {
    pub fn new(
        base_config: SessionConfig,
        attack: Option<AttackPlan>,
        trials: usize,
        seed: u64,
    ) -> Self {
        Self {
            base_config,
            attack,
            trials,
            seed,
            sweep: None,
            randomize_bit: false,
        }
    }

    /// Concrete `(label, config, attack)` for each cell.
    fn cells(&self) -> Result<Vec<(String, SessionConfig, Option<AttackPlan>)>> {
        let Some(sweep) = &self.sweep else {
            self.base_config.validate()?;
            return Ok(vec![(
                "base".to_string(),
                self.base_config.clone(),
                self.attack.clone(),
            )]);
        };
        if sweep.values.is_empty() {
            return Err(Error::Config("sweep has no values".into()));
        }
        if sweep.param.needs_attack() && self.attack.is_none() {
            return Err(Error::Config(format!(
                "sweeping `{}` requires an attack plan",
                sweep.param
            )));
        }
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut config = self.base_config.clone();
                let mut attack = self.attack.clone();
                match sweep.param {
                    SweepParam::Alpha => config.alpha = v,
                    SweepParam::ChannelLoss => config.channel_loss = v,
                    SweepParam::G => config.g_policy = GPolicy::Constant(v),
                    SweepParam::PulseSize => {
                        if v < 1.0 || v.fract() != 0.0 {
                            return Err(Error::param(
                                "n",
                                format!("{v} is not a positive integer"),
                            ));
                        }
                        config.pulse_size = v as usize;
                    }
                    SweepParam::AngleSetSize => {
                        if v.fract() != 0.0 || v < 0.0 {
                            return Err(Error::param("s", format!("{v} is not an integer")));
                        }
                        config.angle_set = AngleSet::new(v as u64)?;
                        if let Some(a) = attack.as_mut() {
                            a.tomography.angle_set = config.angle_set;
                        }
                    }
                    SweepParam::Beta | SweepParam::A1 | SweepParam::A2 | SweepParam::A3 => {
                        let plan = attack.as_ref().expect("checked above");
                        let mut f = plan.siphon_fractions();
                        match sweep.param {
                            SweepParam::Beta => f = [v; 3],
                            SweepParam::A1 => f[0] = v,
                            SweepParam::A2 => f[1] = v,
                            _ => f[2] = v,
                        }
                        attack = Some(plan.with_fractions(f)?);
                    }
                }
                config.validate()?;
                Ok((format!("{}={}", sweep.param, v), config, attack))
            })
            .collect()
    }
}

/// Aggregates for one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub label: String,
    pub trials: usize,
    pub detection_rate: f64,
    /// 95% normal-approximation half-width; `None` for a single trial.
    pub detection_ci: Option<f64>,
    pub decode_accuracy: f64,
    pub decode_ci: Option<f64>,
    /// Mean good/bad ratio of Bob's final pulse over trials that received
    /// injected photons; `None` if no trial did.
    pub mean_final_snr: Option<f64>,
    /// Trials left out of `mean_final_snr` because their pulse had no injected photons.
    pub snr_excluded: usize,
    pub eve_success_rate: f64,
    pub eve_ci: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
}

#[derive(Debug, Clone, Copy)]
struct TrialRecord {
    detected: bool,
    correct: bool,
    snr: Option<f64>,
    eve: bool,
}

impl From<&SessionOutcome> for TrialRecord {
    fn from(o: &SessionOutcome) -> Self {
        Self {
            detected: o.breach_detected,
            correct: o.decoded_correctly(),
            snr: o.final_snr(),
            eve: o.eve_succeeded(),
        }
    }
}

/// Half-width of the 95% normal-approximation interval for a proportion.
pub fn proportion_half_width(rate: f64, trials: usize) -> Option<f64> {
    (trials > 1).then(|| 1.96 * (rate * (1.0 - rate) / trials as f64).sqrt())
}

/// Session configuration used for trial `index` of an experiment.
pub fn trial_config(
    base: &SessionConfig,
    seed: u64,
    index: usize,
    randomize_bit: bool,
) -> SessionConfig {
    let trial_seed = mix_seed(seed, index as u64);
    let mut config = base.clone();
    config.seed = trial_seed;
    config.session_index = index as u64;
    if randomize_bit {
        config.bit = RandomStream::derive(trial_seed, 2).bernoulli(0.5);
    }
    config
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    if spec.trials < 1 {
        return Err(Error::param("trials", "must be >= 1"));
    }
    let cells = spec
        .cells()?
        .into_iter()
        .map(|(label, config, attack)| {
            let records = (0..spec.trials)
                .into_par_iter()
                .map(|i| {
                    let c = trial_config(&config, spec.seed, i, spec.randomize_bit);
                    run_three_stage(&c, attack.as_ref()).map(|o| TrialRecord::from(&o))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(aggregate(label, &records))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult { cells })
}

fn aggregate(label: String, records: &[TrialRecord]) -> CellResult {
    let n = records.len();
    let rate =
        |f: fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count() as f64 / n as f64;
    let detection_rate = rate(|r| r.detected);
    let decode_accuracy = rate(|r| r.correct);
    let eve_success_rate = rate(|r| r.eve);
    let snrs: Vec<f64> = records.iter().filter_map(|r| r.snr).collect();
    let mean_final_snr = (!snrs.is_empty()).then(|| snrs.iter().sum::<f64>() / snrs.len() as f64);
    CellResult {
        label,
        trials: n,
        detection_rate,
        detection_ci: proportion_half_width(detection_rate, n),
        decode_accuracy,
        decode_ci: proportion_half_width(decode_accuracy, n),
        mean_final_snr,
        snr_excluded: n - snrs.len(),
        eve_success_rate,
        eve_ci: proportion_half_width(eve_success_rate, n),
    }
}

/// `steps` evenly spaced points of the uniform-siphon SNR over `[alpha_min, alpha_max]`.
pub fn snr_curve(alpha_min: f64, alpha_max: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    check_unit_open("alpha_min", alpha_min)?;
    check_unit_open("alpha_max", alpha_max)?;
    if alpha_min >= alpha_max {
        return Err(Error::param("alpha_max", "must exceed alpha_min"));
    }
    if steps < 2 {
        return Err(Error::param("steps", "must be >= 2"));
    }
    let span = alpha_max - alpha_min;
    (0..steps)
        .map(|i| {
            let a = if i == steps - 1 {
                alpha_max
            } else {
                alpha_min + span * i as f64 / (steps - 1) as f64
            };
            Ok((a, snr_uniform(a)?))
        })
        .collect()
}

/// Photons taken per pass in the scripted attack on a 100-photon pulse.
pub const WORKED_EXAMPLE_TAKEN: [usize; 3] = [20, 25, 34];
pub const WORKED_EXAMPLE_PULSE: usize = 100;
pub const WORKED_EXAMPLE_TRIALS: usize = 10_000;

/// One pass of the scripted attack, averaged over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkedPass {
    pub pass: Pass,
    pub taken: usize,
    /// Mean composition of the stream forwarded after this pass.
    pub stream_good_mean: f64,
    pub stream_bad_mean: f64,
    /// Mean composition of Eve's stash.
    pub stash_good_mean: f64,
    pub stash_bad_mean: f64,
}

impl WorkedPass {
    /// Stream composition in whole photons.
    pub fn stream(&self) -> (usize, usize) {
        let good = self.stream_good_mean.round() as usize;
        (good, WORKED_EXAMPLE_PULSE - good)
    }

    /// Stash composition in whole photons: expected good count rounded, the
    /// rest of the taken photons counted as bad.
    pub fn stash(&self) -> (usize, usize) {
        let good = (self.stash_good_mean.round() as usize).min(self.taken);
        (good, self.taken - good)
    }

    /// Eve's SNR for the whole-photon stash.
    pub fn stash_snr(&self) -> f64 {
        let (good, bad) = self.stash();
        if bad == 0 {
            f64::INFINITY
        } else {
            good as f64 / bad as f64
        }
    }

    /// Ratio of the mean stash counts, without rounding to whole photons.
    pub fn stash_snr_of_means(&self) -> f64 {
        if self.stash_bad_mean == 0.0 {
            f64::INFINITY
        } else {
            self.stash_good_mean / self.stash_bad_mean
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkedExampleTrace {
    pub trials: usize,
    pub passes: Vec<WorkedPass>,
}

/// Replays the scripted siphon-and-replace attack (100 photons; 20, 25 and 34
/// taken on the three passes) and averages the compositions over
/// [`WORKED_EXAMPLE_TRIALS`] seeded trials.
pub fn reproduce_worked_example(seed: u64) -> WorkedExampleTrace {
    reproduce_worked_example_with(seed, WORKED_EXAMPLE_TRIALS)
}

pub fn reproduce_worked_example_with(seed: u64, trials: usize) -> WorkedExampleTrace {
    let trials = trials.max(1);
    let fractions = WORKED_EXAMPLE_TAKEN.map(|t| t as f64 / WORKED_EXAMPLE_PULSE as f64);
    let set = AngleSet::new(2).expect("2 is a power of two");
    let model = TomographyModel::physical_ml(set);
    let plan = AttackPlan::new(fractions, true, model, seed).expect("fractions below one");

    // per trial: [stream_good, stream_bad, stash_good, stash_bad] for each pass
    let per_trial: Vec<[[usize; 4]; 3]> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::derive(mix_seed(seed, i as u64), 3);
            let mut pulse = PhotonPulse::uniform(PolarizationState::new(0.0), WORKED_EXAMPLE_PULSE);
            let mut out = [[0usize; 4]; 3];
            for pass in Pass::ALL {
                let (fwd, stash) = intercept(pulse, pass, &plan, &mut rng);
                out[pass.index()] = [
                    fwd.good_count(),
                    fwd.bad_count(),
                    stash.good_count(),
                    stash.bad_count(),
                ];
                debug_assert_eq!(eve_stash_snr(&stash).is_infinite(), stash.bad_count() == 0);
                pulse = fwd;
            }
            out
        })
        .collect();

    let passes = Pass::ALL
        .iter()
        .map(|&pass| {
            let mut sums = [0usize; 4];
            for t in &per_trial {
                for (s, v) in sums.iter_mut().zip(t[pass.index()]) {
                    *s += v;
                }
            }
            let mean = |k: usize| sums[k] as f64 / trials as f64;
            WorkedPass {
                pass,
                taken: WORKED_EXAMPLE_TAKEN[pass.index()],
                stream_good_mean: mean(0),
                stream_bad_mean: mean(1),
                stash_good_mean: mean(2),
                stash_bad_mean: mean(3),
            }
        })
        .collect();
    WorkedExampleTrace { trials, passes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::TomographyModel;
    use crate::analytics::snr_general;

    #[test]
    fn curve_endpoints() {
        let c = snr_curve(0.1, 0.2, 2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0], (0.1, snr_uniform(0.1).unwrap()));
        assert_eq!(c[1], (0.2, snr_uniform(0.2).unwrap()));
        assert!(snr_curve(0.2, 0.1, 5).is_err());
        assert!(snr_curve(0.1, 0.2, 1).is_err());
        assert!(snr_curve(0.1, 1.0, 3).is_err());
    }

    #[test]
    fn curve_starting_at_zero_is_infinite() {
        let c = snr_curve(0.0, 0.5, 11).unwrap();
        assert!(c[0].1.is_infinite());
        assert!(c.windows(2).all(|w| w[1].1 < w[0].1));
    }

    /// Bisection oracle for the α where the curve crosses `level`.
    fn crossing(level: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 0.99);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if snr_uniform(mid).unwrap() > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn curve_crossings() {
        let c = snr_curve(0.0, 0.5, 501).unwrap();
        let straddle = |level: f64| {
            c.windows(2)
                .find(|w| w[0].1 > level && w[1].1 <= level)
                .map(|w| (w[0].0, w[1].0))
                .unwrap()
        };
        let (lo, hi) = straddle(1.0);
        assert!(lo <= 0.2062 && 0.2062 <= hi + 1e-3);
        let ten = crossing(10.0);
        assert!((ten - 0.031).abs() < 5e-4, "crossing {ten}");
        let (lo, hi) = straddle(10.0);
        assert!(lo <= ten && ten <= hi);
    }

    #[test]
    fn no_attack_experiment() {
        let spec = ExperimentSpec {
            randomize_bit: true,
            ..ExperimentSpec::new(
                SessionConfig {
                    pulse_size: 50,
                    ..SessionConfig::default()
                },
                None,
                500,
                8,
            )
        };
        let r = run_experiment(&spec).unwrap();
        let cell = &r.cells[0];
        assert_eq!(cell.detection_rate, 0.0);
        assert_eq!(cell.decode_accuracy, 1.0);
        assert_eq!(cell.mean_final_snr, None);
        assert_eq!(cell.snr_excluded, 500);
        assert_eq!(cell.eve_success_rate, 0.0);
    }

    #[test]
    fn single_trial_has_no_interval() {
        let spec = ExperimentSpec::new(SessionConfig::default(), None, 1, 0);
        let cell = &run_experiment(&spec).unwrap().cells[0];
        assert_eq!(cell.detection_ci, None);
        assert_eq!(cell.trials, 1);
    }

    #[test]
    fn zero_trials_rejected() {
        let spec = ExperimentSpec::new(SessionConfig::default(), None, 0, 0);
        assert!(run_experiment(&spec).is_err());
    }

    #[test]
    fn sweeps_validate() {
        let mut spec = ExperimentSpec::new(SessionConfig::default(), None, 3, 0);
        spec.sweep = Some(Sweep {
            param: SweepParam::Beta,
            values: vec![0.1],
        });
        assert!(matches!(run_experiment(&spec), Err(Error::Config(_))));
        spec.sweep = Some(Sweep {
            param: SweepParam::Alpha,
            values: vec![1.2],
        });
        assert!(run_experiment(&spec).is_err());
        spec.sweep = Some(Sweep {
            param: SweepParam::AngleSetSize,
            values: vec![6.0],
        });
        assert!(run_experiment(&spec).is_err());
        spec.sweep = Some(Sweep {
            param: SweepParam::Alpha,
            values: vec![],
        });
        assert!(run_experiment(&spec).is_err());
        assert!("bogus".parse::<SweepParam>().is_err());
        assert_eq!(
            "loss".parse::<SweepParam>().unwrap(),
            SweepParam::ChannelLoss
        );
    }

    #[test]
    fn detection_grows_with_beta_without_replacement() {
        let base = SessionConfig::default();
        let plan = AttackPlan::uniform(
            0.05,
            false,
            TomographyModel::abstract_threshold(5, base.angle_set).unwrap(),
            1,
        )
        .unwrap();
        let mut spec = ExperimentSpec::new(base, Some(plan), 50, 2);
        spec.sweep = Some(Sweep {
            param: SweepParam::Beta,
            values: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
        });
        let r = run_experiment(&spec).unwrap();
        let rates: Vec<f64> = r.cells.iter().map(|c| c.detection_rate).collect();
        assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");
        assert_eq!(rates[0], 0.0);
        assert_eq!(*rates.last().unwrap(), 1.0);
        assert_eq!(r.cells[1].label, "beta=0.1");
    }

    #[test]
    fn snr_converges_to_closed_form() {
        let base = SessionConfig {
            pulse_size: 20_000,
            ..SessionConfig::default()
        };
        let plan = AttackPlan::new(
            [0.1, 0.15, 0.05],
            true,
            TomographyModel::abstract_threshold(1, base.angle_set).unwrap(),
            4,
        )
        .unwrap();
        let spec = ExperimentSpec::new(base, Some(plan), 40, 6);
        let cell = &run_experiment(&spec).unwrap().cells[0];
        let analytic = snr_general(0.1, 0.15, 0.05).unwrap();
        let got = cell.mean_final_snr.unwrap();
        assert!(
            (got - analytic).abs() / analytic < 0.02,
            "{got} vs {analytic}"
        );
        assert_eq!(cell.eve_success_rate, 1.0);
    }

    #[test]
    fn experiments_are_reproducible() {
        let base = SessionConfig {
            pulse_size: 300,
            ..SessionConfig::default()
        };
        let plan = AttackPlan::uniform(0.1, true, TomographyModel::physical_ml(base.angle_set), 3)
            .unwrap();
        let spec = ExperimentSpec::new(base, Some(plan), 64, 99);
        let a = run_experiment(&spec).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| run_experiment(&spec)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn worked_example_small() {
        let t = reproduce_worked_example_with(1, 2000);
        assert_eq!(t.passes[0].stream(), (80, 20));
        assert_eq!(t.passes[0].stash(), (20, 0));
        assert!(t.passes[0].stash_snr().is_infinite());
        assert_eq!(t.passes[1].stream(), (60, 40));
        assert_eq!(t.passes[1].stash(), (20, 5));
        assert_eq!(t.passes[2].stash(), (20, 14));
        assert!((t.passes[2].stash_snr_of_means() - 1.5).abs() < 0.05);
    }
}
