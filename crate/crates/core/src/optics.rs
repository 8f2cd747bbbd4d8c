//! Planar polarization optics: linear polarization states, commuting rotations,
//! Malus-law measurement and beam splitting of multi-photon pulses.

use std::f64::consts::PI;
use std::fmt;

use rand::seq::index;

use crate::error::{check_unit_closed, Result};
use crate::rng::RandomStream;

/// Angles closer than this (on the circle of circumference π) compare equal.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

fn reduce(angle: f64) -> f64 {
    let r = angle.rem_euclid(PI);
    // rem_euclid can return exactly π for tiny negative inputs
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Linear polarization direction, reduced into `[0, π)`.
#[derive(Debug, Clone, Copy)]
pub struct PolarizationState {
    angle: f64,
}

impl PolarizationState {
    pub fn new(angle: f64) -> Self {
        Self {
            angle: reduce(angle),
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Shortest distance between the two directions, in `[0, π/2]`.
    pub fn distance(&self, other: &PolarizationState) -> f64 {
        let d = (self.angle - other.angle).abs();
        d.min(PI - d)
    }

    pub fn rotated(&self, op: RotationOp) -> Self {
        Self::new(self.angle + op.delta)
    }
}

impl PartialEq for PolarizationState {
    fn eq(&self, other: &Self) -> bool {
        self.distance(other) < ANGLE_TOLERANCE
    }
}

impl fmt::Display for PolarizationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} rad", self.angle)
    }
}

/// Rotation of the polarization plane by `delta` radians. Rotations commute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationOp {
    pub delta: f64,
}

impl RotationOp {
    pub fn new(delta: f64) -> Self {
        Self { delta }
    }

    pub fn inverse(self) -> Self {
        Self { delta: -self.delta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Prepared by Alice.
    Signal,
    /// Injected by the eavesdropper to mask a siphoned photon.
    Injected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photon {
    state: PolarizationState,
    provenance: Provenance,
}

impl Photon {
    pub fn new(state: PolarizationState, provenance: Provenance) -> Self {
        Self { state, provenance }
    }

    pub fn signal(state: PolarizationState) -> Self {
        Self::new(state, Provenance::Signal)
    }

    pub fn injected(state: PolarizationState) -> Self {
        Self::new(state, Provenance::Injected)
    }

    pub fn state(&self) -> PolarizationState {
        self.state
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_signal(&self) -> bool {
        self.provenance == Provenance::Signal
    }

    fn rotated(self, op: RotationOp) -> Self {
        Self {
            state: self.state.rotated(op),
            provenance: self.provenance,
        }
    }
}

/// A burst of photons travelling together. Its intensity is the photon count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhotonPulse {
    photons: Vec<Photon>,
}

impl PhotonPulse {
    pub fn new(photons: Vec<Photon>) -> Self {
        Self { photons }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `count` identical signal photons.
    pub fn uniform(state: PolarizationState, count: usize) -> Self {
        Self {
            photons: vec![Photon::signal(state); count],
        }
    }

    /// A pulse with `good` signal photons at `state` followed by `bad` injected
    /// photons at `noise_state`.
    pub fn with_composition(
        state: PolarizationState,
        good: usize,
        noise_state: PolarizationState,
        bad: usize,
    ) -> Self {
        let mut photons = vec![Photon::signal(state); good];
        photons.extend(std::iter::repeat_n(Photon::injected(noise_state), bad));
        Self { photons }
    }

    pub fn intensity(&self) -> usize {
        self.photons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.photons.is_empty()
    }

    pub fn good_count(&self) -> usize {
        self.photons.iter().filter(|p| p.is_signal()).count()
    }

    pub fn bad_count(&self) -> usize {
        self.intensity() - self.good_count()
    }

    pub fn photons(&self) -> &[Photon] {
        &self.photons
    }

    pub fn into_photons(self) -> Vec<Photon> {
        self.photons
    }

    pub fn push(&mut self, photon: Photon) {
        self.photons.push(photon);
    }

    pub fn extend(&mut self, other: PhotonPulse) {
        self.photons.extend(other.photons);
    }

    /// Keeps each photon independently with probability `survival`.
    pub fn attenuate(self, survival: f64, rng: &mut RandomStream) -> Self {
        if survival >= 1.0 {
            return self;
        }
        Self {
            photons: self
                .photons
                .into_iter()
                .filter(|_| rng.bernoulli(survival))
                .collect(),
        }
    }
}

impl FromIterator<Photon> for PhotonPulse {
    fn from_iter<I: IntoIterator<Item = Photon>>(iter: I) -> Self {
        Self {
            photons: iter.into_iter().collect(),
        }
    }
}

/// Rotates every photon of the pulse; composition and order are preserved.
pub fn rotate(pulse: PhotonPulse, op: RotationOp) -> PhotonPulse {
    pulse.photons.into_iter().map(|p| p.rotated(op)).collect()
}

/// Projective measurement through a polarizer at `basis`. Returns `true`
/// (the photon passed) with probability cos²(photon − basis).
pub fn measure_photon(photon: Photon, basis: PolarizationState, rng: &mut RandomStream) -> bool {
    let p = pass_probability(photon.state, basis);
    rng.bernoulli(p)
}

/// Malus's law.
pub fn pass_probability(state: PolarizationState, basis: PolarizationState) -> f64 {
    (state.angle - basis.angle).cos().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    /// Exactly `round(fraction * intensity)` photons, chosen uniformly without replacement.
    #[default]
    Deterministic,
    /// Each photon diverted independently with probability `fraction`.
    Binomial,
}

/// Number of photons a deterministic split of `intensity` diverts.
pub fn deterministic_count(fraction: f64, intensity: usize) -> usize {
    ((fraction * intensity as f64).round() as usize).min(intensity)
}

/// Beam splitter. Returns `(diverted, remainder)`; the two pulses partition the
/// input and each keeps the input's relative photon order.
pub fn split_fraction(
    pulse: PhotonPulse,
    fraction: f64,
    mode: SplitMode,
    rng: &mut RandomStream,
) -> Result<(PhotonPulse, PhotonPulse)> {
    check_unit_closed("fraction", fraction)?;
    let n = pulse.intensity();
    let mut take = vec![false; n];
    match mode {
        SplitMode::Deterministic => {
            let k = deterministic_count(fraction, n);
            if k == n {
                return Ok((pulse, PhotonPulse::empty()));
            }
            if k > 0 {
                for i in index::sample(rng.inner_mut(), n, k) {
                    take[i] = true;
                }
            }
        }
        SplitMode::Binomial => {
            for t in take.iter_mut() {
                *t = rng.bernoulli(fraction);
            }
        }
    }
    let mut diverted = Vec::new();
    let mut remainder = Vec::with_capacity(n);
    for (photon, t) in pulse.photons.into_iter().zip(take) {
        if t {
            diverted.push(photon);
        } else {
            remainder.push(photon);
        }
    }
    Ok((PhotonPulse::new(diverted), PhotonPulse::new(remainder)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(a: f64) -> PolarizationState {
        PolarizationState::new(a)
    }

    #[test]
    fn angles_reduce_mod_pi() {
        assert!((state(1.2 * PI).angle() - 0.2 * PI).abs() < 1e-12);
        assert!((state(-0.25 * PI).angle() - 0.75 * PI).abs() < 1e-12);
        assert_eq!(state(0.3), state(0.3 + PI));
        assert_eq!(state(0.0), state(PI - 1e-14));
        assert!(state(-1e-300).angle() < PI);
    }

    #[test]
    fn rotate_identity() {
        let pulse = PhotonPulse::uniform(state(0.0), 3);
        let out = rotate(pulse.clone(), RotationOp::new(0.0));
        assert_eq!(out, pulse);
    }

    #[test]
    fn rotate_then_undo() {
        let pulse = PhotonPulse::uniform(state(PI / 6.0), 1);
        let op = RotationOp::new(PI / 4.0);
        let out = rotate(rotate(pulse, op), op.inverse());
        assert_eq!(out.photons()[0].state(), state(PI / 6.0));
    }

    #[test]
    fn rotate_wraps() {
        let pulse = PhotonPulse::uniform(state(0.9 * PI), 1);
        let out = rotate(pulse, RotationOp::new(0.3 * PI));
        assert!((out.photons()[0].state().angle() - 0.2 * PI).abs() < 1e-12);
    }

    #[test]
    fn rotation_keeps_provenance() {
        let pulse = PhotonPulse::with_composition(state(0.0), 2, state(1.0), 3);
        let out = rotate(pulse, RotationOp::new(0.7));
        assert_eq!(out.good_count(), 2);
        assert_eq!(out.bad_count(), 3);
    }

    #[test]
    fn aligned_and_orthogonal_measurements() {
        let mut rng = RandomStream::new(1);
        for _ in 0..1000 {
            assert!(measure_photon(
                Photon::signal(state(0.0)),
                state(0.0),
                &mut rng
            ));
            assert!(!measure_photon(
                Photon::signal(state(PI / 2.0)),
                state(0.0),
                &mut rng
            ));
        }
    }

    #[test]
    fn diagonal_measurement_is_fair() {
        let mut rng = RandomStream::new(2024);
        let trials = 100_000;
        let ones = (0..trials)
            .filter(|_| measure_photon(Photon::signal(state(PI / 4.0)), state(0.0), &mut rng))
            .count();
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn deterministic_split_of_hundred() {
        let mut rng = RandomStream::new(3);
        let pulse = PhotonPulse::uniform(state(0.0), 100);
        let (d, r) = split_fraction(pulse, 0.2, SplitMode::Deterministic, &mut rng).unwrap();
        assert_eq!(d.intensity(), 20);
        assert_eq!(r.intensity(), 80);
    }

    #[test]
    fn zero_and_full_split() {
        let mut rng = RandomStream::new(3);
        let pulse = PhotonPulse::uniform(state(0.0), 17);
        for mode in [SplitMode::Deterministic, SplitMode::Binomial] {
            let (d, r) = split_fraction(pulse.clone(), 0.0, mode, &mut rng).unwrap();
            assert!(d.is_empty());
            assert_eq!(r, pulse);
            let (d, r) = split_fraction(pulse.clone(), 1.0, mode, &mut rng).unwrap();
            assert_eq!(d, pulse);
            assert!(r.is_empty());
        }
    }

    #[test]
    fn binomial_split_count() {
        let mut rng = RandomStream::new(99);
        let pulse = PhotonPulse::uniform(state(0.0), 100_000);
        let (d, _) = split_fraction(pulse, 0.1, SplitMode::Binomial, &mut rng).unwrap();
        let k = d.intensity() as i64;
        assert!((k - 10_000).abs() <= 300, "diverted {k}");
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let mut rng = RandomStream::new(0);
        for f in [-0.1, 1.5, f64::NAN] {
            assert!(
                split_fraction(PhotonPulse::empty(), f, SplitMode::Deterministic, &mut rng)
                    .is_err()
            );
        }
    }

    proptest! {
        #[test]
        fn rotations_commute(a in -10.0f64..10.0, b in -10.0f64..10.0, s in 0.0f64..PI) {
            let x = state(s).rotated(RotationOp::new(a)).rotated(RotationOp::new(b));
            let y = state(s).rotated(RotationOp::new(b)).rotated(RotationOp::new(a));
            prop_assert!(x.distance(&y) < 1e-12);
        }

        #[test]
        fn rotation_inverse(a in -10.0f64..10.0, s in -10.0f64..10.0) {
            let op = RotationOp::new(a);
            let x = state(s).rotated(op).rotated(op.inverse());
            prop_assert!(x.distance(&state(s)) < 1e-12);
        }

        #[test]
        fn reduced_angle_in_range(a in -1e6f64..1e6) {
            let s = state(a);
            prop_assert!(s.angle() >= 0.0 && s.angle() < PI);
        }

        #[test]
        fn split_conserves_photons(
            good in 0usize..200,
            bad in 0usize..200,
            fraction in 0.0f64..=1.0,
            binomial in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let mut rng = RandomStream::new(seed);
            let pulse = PhotonPulse::with_composition(state(0.0), good, state(1.0), bad);
            let mode = if binomial { SplitMode::Binomial } else { SplitMode::Deterministic };
            let (d, r) = split_fraction(pulse, fraction, mode, &mut rng).unwrap();
            prop_assert_eq!(d.intensity() + r.intensity(), good + bad);
            prop_assert_eq!(d.good_count() + r.good_count(), good);
            prop_assert_eq!(d.bad_count() + r.bad_count(), bad);
            if !binomial {
                prop_assert_eq!(d.intensity(), deterministic_count(fraction, good + bad));
            }
        }
    }

    #[test]
    fn malus_frequency_within_three_sigma() {
        let mut rng = RandomStream::new(5);
        let trials = 100_000;
        for (photon, basis) in [(0.3, 0.0), (1.0, 2.5), (PI / 3.0, 0.1)] {
            let p = pass_probability(state(photon), state(basis));
            let hits = (0..trials)
                .filter(|_| measure_photon(Photon::signal(state(photon)), state(basis), &mut rng))
                .count() as f64;
            let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
            assert!((hits - trials as f64 * p).abs() <= 3.0 * sigma + 1.0);
        }
    }
}
