//! The three-stage exchange (Alice → Bob → Alice → Bob) with intensity
//! monitoring at each receiving checkpoint.
//!
//! Alice and Bob each apply a secret rotation drawn from a public [`AngleSet`];
//! because rotations commute, once both are undone Bob holds the encoded state
//! again. At every checkpoint the receiver diverts a public fraction `alpha` of
//! the incoming beam to measure it and compares the beam against what the
//! public source intensity predicts.

use std::f64::consts::PI;
use std::fmt;

use crate::adversary::{estimate_angle, intercept, AngleEstimate, AttackPlan, Pass};
use crate::error::{check_unit_exclusive, check_unit_open, Error, Result};
use crate::optics::{
    deterministic_count, measure_photon, rotate, split_fraction, PhotonPulse, PolarizationState,
    RotationOp, SplitMode,
};
use crate::rng::{mix_seed, RandomStream};

/// The `s = 2^r` rotation angles `{ iπ/s : 0 <= i < s }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleSet {
    bits: u32,
}

impl AngleSet {
    pub fn new(size: u64) -> Result<Self> {
        if size >= 2 && size.is_power_of_two() && size <= 1 << 30 {
            Ok(Self {
                bits: size.trailing_zeros(),
            })
        } else {
            Err(Error::param(
                "s",
                format!("{size} is not a power of two in [2, 2^30]"),
            ))
        }
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        if (1..=30).contains(&bits) {
            Ok(Self { bits })
        } else {
            Err(Error::param("r", format!("{bits} not in 1..=30")))
        }
    }

    pub fn size(&self) -> usize {
        1usize << self.bits
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn angle(&self, index: usize) -> PolarizationState {
        PolarizationState::new(index as f64 * PI / self.size() as f64)
    }

    pub fn angles(&self) -> impl Iterator<Item = PolarizationState> + '_ {
        (0..self.size()).map(|i| self.angle(i))
    }
}

/// How the detection threshold `g` is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum GPolicy {
    Constant(f64),
    /// Pre-shared schedule indexed by session.
    PerSession(Vec<f64>),
    /// Pre-shared schedule indexed by checkpoint within a session.
    WithinSession(Vec<f64>),
}

impl GPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            GPolicy::Constant(g) => check_unit_exclusive("g", *g),
            GPolicy::PerSession(s) | GPolicy::WithinSession(s) => {
                if s.is_empty() {
                    return Err(Error::Config("g schedule is empty".into()));
                }
                s.iter().try_for_each(|g| check_unit_exclusive("g", *g))
            }
        }
    }
}

/// The threshold in force at `stage_index` (checkpoint ordinal, 0-based) of
/// session `session_index`.
pub fn next_g(policy: &GPolicy, session_index: u64, stage_index: usize) -> Result<f64> {
    policy.validate()?;
    Ok(match policy {
        GPolicy::Constant(g) => *g,
        GPolicy::PerSession(s) => s[(session_index % s.len() as u64) as usize],
        GPolicy::WithinSession(s) => s[stage_index % s.len()],
    })
}

/// What the checkpoint compares the observed beam with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BreachRule {
    /// Against the beam expected after the legitimate monitoring diversions
    /// (and public channel loss). Without an eavesdropper this never trips.
    #[default]
    PerStage,
    /// Against the public source intensity itself: Alice's and Bob's own
    /// diversions count against the `g` budget, as in the constant-g table.
    TotalBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckVerdict {
    Pass,
    Breach,
}

/// Breach iff `observed < expected * (1 - g)`.
pub fn intensity_check(expected: f64, observed: usize, g: f64) -> CheckVerdict {
    if (observed as f64) < expected * (1.0 - g) {
        CheckVerdict::Breach
    } else {
        CheckVerdict::Pass
    }
}

/// Bit 0 is horizontal, bit 1 vertical. The angle set does not affect the
/// encoding but every encoded state is a member of any set with `s >= 2`.
pub fn encode_bit(bit: bool, _angle_set: &AngleSet) -> PolarizationState {
    PolarizationState::new(if bit { PI / 2.0 } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub angle_set: AngleSet,
    /// Public source intensity `I`, in photons.
    pub pulse_size: usize,
    /// Fraction diverted at each checkpoint for intensity monitoring.
    pub alpha: f64,
    pub g_policy: GPolicy,
    pub bit: bool,
    /// Per-pass, per-photon loss probability.
    pub channel_loss: f64,
    pub split_mode: SplitMode,
    pub breach_rule: BreachRule,
    /// Used by [`GPolicy::PerSession`].
    pub session_index: u64,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            angle_set: AngleSet::new(16).expect("16 is a power of two"),
            pulse_size: 1000,
            alpha: 0.05,
            g_policy: GPolicy::Constant(0.2),
            bit: false,
            channel_loss: 0.0,
            split_mode: SplitMode::Deterministic,
            breach_rule: BreachRule::PerStage,
            session_index: 0,
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pulse_size < 1 {
            return Err(Error::param("pulse_size", "must be >= 1"));
        }
        check_unit_open("alpha", self.alpha)?;
        check_unit_open("channel_loss", self.channel_loss)?;
        self.g_policy.validate()
    }
}

/// A receiving checkpoint; the numbers follow the protocol's step numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Checkpoint {
    /// Step 2: Bob receives the first pass.
    BobFirst,
    /// Step 3: Alice receives the second pass.
    Alice,
    /// Step 4: Bob receives the third pass.
    BobFinal,
}

impl Checkpoint {
    pub const ALL: [Checkpoint; 3] = [
        Checkpoint::BobFirst,
        Checkpoint::Alice,
        Checkpoint::BobFinal,
    ];

    pub fn ordinal(self) -> usize {
        match self {
            Checkpoint::BobFirst => 0,
            Checkpoint::Alice => 1,
            Checkpoint::BobFinal => 2,
        }
    }

    pub fn step(self) -> u8 {
        self.ordinal() as u8 + 2
    }

    pub fn receiver(self) -> &'static str {
        match self {
            Checkpoint::Alice => "alice",
            _ => "bob",
        }
    }
}

impl fmt::Display for Checkpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {} ({})", self.step(), self.receiver())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityRecord {
    pub checkpoint: Checkpoint,
    /// Photons the checkpoint expects to keep after its own diversion.
    pub expected: f64,
    /// Photons actually kept after the diversion.
    pub observed: usize,
    /// Photons diverted to the intensity meter.
    pub diverted: usize,
    pub g: f64,
    pub verdict: CheckVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeFailure {
    /// Nothing reached Bob's detector.
    EmptyPulse,
    /// Exactly half the measurements voted each way.
    Tie,
}

impl fmt::Display for DecodeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeFailure::EmptyPulse => {
                f.write_str("all photons lost or siphoned before decoding")
            }
            DecodeFailure::Tie => f.write_str("majority vote tied"),
        }
    }
}

/// Eve's view of one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PassIntercept {
    pub pass: Pass,
    pub stash_good: usize,
    pub stash_bad: usize,
    pub estimate: AngleEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub sent_bit: bool,
    pub decoded_bit: Option<bool>,
    pub diagnostic: Option<DecodeFailure>,
    pub intensity_records: Vec<IntensityRecord>,
    pub breach_detected: bool,
    pub breach_stage: Option<Checkpoint>,
    /// `(good, bad)` photons in the pulse Bob measures.
    pub final_composition: (usize, usize),
    pub theta_index: usize,
    pub phi_index: usize,
    /// Empty when no attack ran.
    pub intercepts: Vec<PassIntercept>,
}

impl SessionOutcome {
    pub fn decoded_correctly(&self) -> bool {
        self.decoded_bit == Some(self.sent_bit)
    }

    /// Good/bad ratio of the decoded pulse; `None` when no injected photon reached Bob.
    pub fn final_snr(&self) -> Option<f64> {
        let (good, bad) = self.final_composition;
        (bad > 0).then(|| good as f64 / bad as f64)
    }

    /// Eve identified the state on all three passes.
    pub fn eve_succeeded(&self) -> bool {
        self.intercepts.len() == 3 && self.intercepts.iter().all(|i| i.estimate.success)
    }
}

struct ExpectedBeam {
    rule: BreachRule,
    alpha: f64,
    survival: f64,
    mode: SplitMode,
    source: f64,
    // Public no-eavesdropper prediction of the beam after the last checkpoint.
    cascade: f64,
    passes: i32,
}

impl ExpectedBeam {
    fn new(config: &SessionConfig) -> Self {
        Self {
            rule: config.breach_rule,
            alpha: config.alpha,
            survival: 1.0 - config.channel_loss,
            mode: config.split_mode,
            source: config.pulse_size as f64,
            cascade: config.pulse_size as f64,
            passes: 0,
        }
    }

    /// Advances one pass and returns the expectation for the next checkpoint.
    fn next(&mut self) -> f64 {
        self.passes += 1;
        let arriving = self.cascade * self.survival;
        let diverted = match self.mode {
            SplitMode::Deterministic if self.survival >= 1.0 => {
                deterministic_count(self.alpha, arriving as usize) as f64
            }
            SplitMode::Deterministic => (self.alpha * arriving).round(),
            SplitMode::Binomial => self.alpha * arriving,
        };
        self.cascade = arriving - diverted;
        match self.rule {
            BreachRule::PerStage => self.cascade,
            BreachRule::TotalBudget => self.source * self.survival.powi(self.passes),
        }
    }
}

/// Runs one session, optionally under attack.
///
/// The session stream derives from `config.seed`; the attack stream from
/// `attack.seed` mixed with `config.seed`, so repeated sessions with the same
/// plan still see fresh injected noise.
pub fn run_three_stage(
    config: &SessionConfig,
    attack: Option<&AttackPlan>,
) -> Result<SessionOutcome> {
    config.validate()?;
    let mut rng = RandomStream::derive(config.seed, 0);
    let mut eve_rng = attack.map(|a| RandomStream::derive(mix_seed(a.seed, config.seed), 1));
    let set = &config.angle_set;

    let theta_index = rng.index(set.size());
    let phi_index = rng.index(set.size());
    let theta = RotationOp::new(set.angle(theta_index).angle());
    let phi = RotationOp::new(set.angle(phi_index).angle());
    let encoded = encode_bit(config.bit, set);

    let mut expected = ExpectedBeam::new(config);
    let mut records = Vec::with_capacity(3);
    let mut intercepts = Vec::new();

    // Stage 1: Alice prepares and rotates by θ.
    let mut pulse = rotate(PhotonPulse::uniform(encoded, config.pulse_size), theta);

    let transmit = |pulse: PhotonPulse,
                    pass: Pass,
                    truth: PolarizationState,
                    rng: &mut RandomStream,
                    eve_rng: &mut Option<RandomStream>,
                    intercepts: &mut Vec<PassIntercept>| {
        let pulse = pulse.attenuate(1.0 - config.channel_loss, rng);
        match (attack, eve_rng.as_mut()) {
            (Some(plan), Some(erng)) => {
                let (forwarded, stash) = intercept(pulse, pass, plan, erng);
                let estimate = estimate_angle(&stash, &plan.tomography, truth, erng);
                intercepts.push(PassIntercept {
                    pass,
                    stash_good: stash.good_count(),
                    stash_bad: stash.bad_count(),
                    estimate,
                });
                forwarded
            }
            _ => pulse,
        }
    };

    let mut checkpoint = |pulse: PhotonPulse,
                          at: Checkpoint,
                          rng: &mut RandomStream,
                          records: &mut Vec<IntensityRecord>|
     -> Result<PhotonPulse> {
        let (meter, kept) = split_fraction(pulse, config.alpha, config.split_mode, rng)?;
        let expect = expected.next();
        let g = next_g(&config.g_policy, config.session_index, at.ordinal())?;
        let observed = kept.intensity();
        records.push(IntensityRecord {
            checkpoint: at,
            expected: expect,
            observed,
            diverted: meter.intensity(),
            g,
            verdict: intensity_check(expect, observed, g),
        });
        Ok(kept)
    };

    let truth1 = encoded.rotated(theta);
    pulse = transmit(
        pulse,
        Pass::First,
        truth1,
        &mut rng,
        &mut eve_rng,
        &mut intercepts,
    );

    // Stage 2: Bob checks, rotates by φ and returns the beam.
    pulse = checkpoint(pulse, Checkpoint::BobFirst, &mut rng, &mut records)?;
    pulse = rotate(pulse, phi);
    let truth2 = truth1.rotated(phi);
    pulse = transmit(
        pulse,
        Pass::Second,
        truth2,
        &mut rng,
        &mut eve_rng,
        &mut intercepts,
    );

    // Stage 3: Alice checks, undoes θ.
    pulse = checkpoint(pulse, Checkpoint::Alice, &mut rng, &mut records)?;
    pulse = rotate(pulse, theta.inverse());
    let truth3 = truth2.rotated(theta.inverse());
    pulse = transmit(
        pulse,
        Pass::Third,
        truth3,
        &mut rng,
        &mut eve_rng,
        &mut intercepts,
    );

    // Stage 4: Bob checks, undoes φ and measures in the encoding basis.
    pulse = checkpoint(pulse, Checkpoint::BobFinal, &mut rng, &mut records)?;
    pulse = rotate(pulse, phi.inverse());

    let final_composition = (pulse.good_count(), pulse.bad_count());
    let (decoded_bit, diagnostic) = decode_majority(pulse, &mut rng);

    let breach_stage = records
        .iter()
        .find(|r| r.verdict == CheckVerdict::Breach)
        .map(|r| r.checkpoint);

    Ok(SessionOutcome {
        sent_bit: config.bit,
        decoded_bit,
        diagnostic,
        intensity_records: records,
        breach_detected: breach_stage.is_some(),
        breach_stage,
        final_composition,
        theta_index,
        phi_index,
        intercepts,
    })
}

/// Measures every photon with a horizontal polarizer; passing votes for 0.
fn decode_majority(
    pulse: PhotonPulse,
    rng: &mut RandomStream,
) -> (Option<bool>, Option<DecodeFailure>) {
    if pulse.is_empty() {
        return (None, Some(DecodeFailure::EmptyPulse));
    }
    let basis = PolarizationState::new(0.0);
    let total = pulse.intensity();
    let zeros = pulse
        .into_photons()
        .into_iter()
        .filter(|p| measure_photon(*p, basis, rng))
        .count();
    let ones = total - zeros;
    match zeros.cmp(&ones) {
        std::cmp::Ordering::Greater => (Some(false), None),
        std::cmp::Ordering::Less => (Some(true), None),
        std::cmp::Ordering::Equal => (None, Some(DecodeFailure::Tie)),
    }
}
