//! The eavesdropper: per-pass siphoning with optional replacement, expected
//! photon-vector bookkeeping, and state estimation on siphoned photons.

use std::fmt;

use crate::error::{check_unit_open, Error, Result};
use crate::optics::{
    measure_photon, pass_probability, split_fraction, Photon, PhotonPulse, PolarizationState,
    SplitMode,
};
use crate::protocol::AngleSet;
use crate::rng::RandomStream;

/// One of the three transmissions of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pass {
    /// Alice to Bob, carrying the bit rotated by θ.
    First,
    /// Bob to Alice, rotated by θ and φ.
    Second,
    /// Alice to Bob, rotated by φ only.
    Third,
}

impl Pass {
    pub const ALL: [Pass; 3] = [Pass::First, Pass::Second, Pass::Third];

    /// Zero-based position.
    pub fn index(self) -> usize {
        match self {
            Pass::First => 0,
            Pass::Second => 1,
            Pass::Third => 2,
        }
    }

    /// One-based pass number.
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Pass::First),
            2 => Ok(Pass::Second),
            3 => Ok(Pass::Third),
            _ => Err(Error::param("pass", format!("{n} not in 1..=3"))),
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pass {}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TomographyKind {
    /// Identification succeeds exactly when the stash holds at least `p_min` signal photons.
    AbstractThreshold,
    /// Maximum-likelihood discrimination from Malus-law measurements against
    /// every candidate angle.
    PhysicalMl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyModel {
    pub kind: TomographyKind,
    pub p_min: usize,
    pub angle_set: AngleSet,
}

impl TomographyModel {
    pub fn abstract_threshold(p_min: usize, angle_set: AngleSet) -> Result<Self> {
        Self::new(TomographyKind::AbstractThreshold, p_min, angle_set)
    }

    pub fn physical_ml(angle_set: AngleSet) -> Self {
        Self {
            kind: TomographyKind::PhysicalMl,
            p_min: 1,
            angle_set,
        }
    }

    pub fn new(kind: TomographyKind, p_min: usize, angle_set: AngleSet) -> Result<Self> {
        if p_min < 1 {
            return Err(Error::param("p_min", "must be >= 1"));
        }
        Ok(Self {
            kind,
            p_min,
            angle_set,
        })
    }
}

/// Eve's strategy for one session.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackPlan {
    siphon_fractions: [f64; 3],
    pub replace: bool,
    pub tomography: TomographyModel,
    pub seed: u64,
}

impl AttackPlan {
    pub fn new(
        siphon_fractions: [f64; 3],
        replace: bool,
        tomography: TomographyModel,
        seed: u64,
    ) -> Result<Self> {
        for (name, f) in ["a1", "a2", "a3"].into_iter().zip(siphon_fractions) {
            check_unit_open(name, f)?;
        }
        Ok(Self {
            siphon_fractions,
            replace,
            tomography,
            seed,
        })
    }

    /// The same siphon fraction on every pass.
    pub fn uniform(
        fraction: f64,
        replace: bool,
        tomography: TomographyModel,
        seed: u64,
    ) -> Result<Self> {
        Self::new([fraction; 3], replace, tomography, seed)
    }

    pub fn siphon_fractions(&self) -> [f64; 3] {
        self.siphon_fractions
    }

    pub fn fraction(&self, pass: Pass) -> f64 {
        self.siphon_fractions[pass.index()]
    }

    pub fn with_fractions(&self, siphon_fractions: [f64; 3]) -> Result<Self> {
        Self::new(
            siphon_fractions,
            self.replace,
            self.tomography.clone(),
            self.seed,
        )
    }
}

/// Expected `{good, bad}` photon counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonVector {
    pub good: f64,
    pub bad: f64,
}

impl PhotonVector {
    pub fn total(&self) -> f64 {
        self.good + self.bad
    }
}

impl fmt::Display for PhotonVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.good, self.bad)
    }
}

/// Siphons the plan's fraction for `pass` (deterministic count, uniform choice
/// over the mixed pulse). With replacement, one randomly polarized photon is
/// injected per siphoned photon so the forwarded intensity is unchanged.
///
/// Returns `(forwarded, stash)`.
pub fn intercept(
    pulse: PhotonPulse,
    pass: Pass,
    plan: &AttackPlan,
    rng: &mut RandomStream,
) -> (PhotonPulse, PhotonPulse) {
    let fraction = plan.fraction(pass);
    let (stash, mut forwarded) = split_fraction(pulse, fraction, SplitMode::Deterministic, rng)
        .expect("plan fractions are validated on construction");
    if plan.replace {
        for _ in 0..stash.intensity() {
            let angle = rng.uniform() * std::f64::consts::PI;
            forwarded.push(Photon::injected(PolarizationState::new(angle)));
        }
    }
    (forwarded, stash)
}

/// Closed-form expected photon vector after `passes` rounds of
/// siphon-and-replace at fraction `alpha` on an `n`-photon pulse.
pub fn photon_vector_after(n: u64, alpha: f64, passes: u8) -> Result<PhotonVector> {
    check_unit_open("alpha", alpha)?;
    let n = n as f64;
    let a = alpha;
    let (good, bad) = match Pass::from_number(passes)? {
        Pass::First => (n * (1.0 - a), n * a),
        Pass::Second => (n * (1.0 - a).powi(2), n * (2.0 * a - a * a)),
        Pass::Third => (
            n * (1.0 - a).powi(3),
            n * (3.0 * a - 3.0 * a * a + a.powi(3)),
        ),
    };
    Ok(PhotonVector { good, bad })
}

/// Result of a tomography attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEstimate {
    pub estimate: PolarizationState,
    pub success: bool,
}

// Keeps log-likelihoods finite when an outcome is impossible under a hypothesis.
const LIKELIHOOD_FLOOR: f64 = 1e-12;

/// Estimates the pulse polarization from the stash.
pub fn estimate_angle(
    stash: &PhotonPulse,
    model: &TomographyModel,
    true_angle: PolarizationState,
    rng: &mut RandomStream,
) -> AngleEstimate {
    let set = &model.angle_set;
    let random_guess = |rng: &mut RandomStream| set.angle(rng.index(set.size()));
    if stash.is_empty() {
        return AngleEstimate {
            estimate: random_guess(rng),
            success: false,
        };
    }
    match model.kind {
        TomographyKind::AbstractThreshold => {
            if stash.good_count() >= model.p_min {
                AngleEstimate {
                    estimate: true_angle,
                    success: true,
                }
            } else {
                AngleEstimate {
                    estimate: random_guess(rng),
                    success: false,
                }
            }
        }
        TomographyKind::PhysicalMl => {
            let estimate = max_likelihood_angle(stash, set, rng);
            AngleEstimate {
                estimate,
                success: estimate == true_angle,
            }
        }
    }
}

/// Round-robin assigns photons to candidate bases (lower indices get the
/// remainder), measures each, and returns the most likely candidate.
fn max_likelihood_angle(
    stash: &PhotonPulse,
    set: &AngleSet,
    rng: &mut RandomStream,
) -> PolarizationState {
    let s = set.size();
    // passes[c], fails[c]: outcomes recorded with the polarizer at candidate c
    let mut passes = vec![0u32; s];
    let mut fails = vec![0u32; s];
    for (i, photon) in stash.photons().iter().enumerate() {
        let c = i % s;
        if measure_photon(*photon, set.angle(c), rng) {
            passes[c] += 1;
        } else {
            fails[c] += 1;
        }
    }

    let log_likelihood = |h: usize| -> f64 {
        let hyp = set.angle(h);
        (0..s)
            .filter(|&c| passes[c] + fails[c] > 0)
            .map(|c| {
                let p = pass_probability(hyp, set.angle(c))
                    .clamp(LIKELIHOOD_FLOOR, 1.0 - LIKELIHOOD_FLOOR);
                passes[c] as f64 * p.ln() + fails[c] as f64 * (1.0 - p).ln()
            })
            .sum()
    };
    let scores: Vec<f64> = (0..s).map(log_likelihood).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * best.abs().max(1.0);
    let ties: Vec<usize> = (0..s).filter(|&h| best - scores[h] <= tol).collect();
    set.angle(ties[rng.index(ties.len())])
}

/// Eve's own signal-to-noise in a stash; infinite when it holds no injected photons.
pub fn eve_stash_snr(stash: &PhotonPulse) -> f64 {
    let bad = stash.bad_count();
    if bad == 0 {
        f64::INFINITY
    } else {
        stash.good_count() as f64 / bad as f64
    }
}
