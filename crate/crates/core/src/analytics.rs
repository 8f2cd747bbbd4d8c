//! Closed-form security analysis of the three-stage protocol under siphoning:
//! signal-to-noise ratios, the intensity budget surface, photon bounds and the
//! (p-k-n) threshold classification.

use std::fmt;

use crate::error::{check_unit_exclusive, check_unit_open, Error, Result};

/// Bob's good/bad photon ratio when Eve siphons-and-replaces the same fraction
/// on each of the three passes. `alpha == 0` yields `f64::INFINITY`.
pub fn snr_uniform(alpha: f64) -> Result<f64> {
    check_unit_open("alpha", alpha)?;
    Ok(ratio_from_survival((1.0 - alpha).powi(3)))
}

/// Same as [`snr_uniform`] with a distinct siphon fraction per pass.
pub fn snr_general(a1: f64, a2: f64, a3: f64) -> Result<f64> {
    check_unit_open("a1", a1)?;
    check_unit_open("a2", a2)?;
    check_unit_open("a3", a3)?;
    Ok(ratio_from_survival((1.0 - a1) * (1.0 - a2) * (1.0 - a3)))
}

fn ratio_from_survival(good: f64) -> f64 {
    let bad = 1.0 - good;
    if bad <= 0.0 {
        f64::INFINITY
    } else {
        good / bad
    }
}

/// Bisection tolerance for [`critical_siphon_fraction`].
pub const CRITICAL_TOLERANCE: f64 = 1e-6;

/// The uniform siphon fraction at which Bob's SNR drops to 1.
pub fn critical_siphon_fraction() -> f64 {
    let f = |a: f64| (1.0 - a).powi(3) - 0.5;
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    // f(lo) > 0 > f(hi)
    while hi - lo > CRITICAL_TOLERANCE / 4.0 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fraction of the source intensity left after three `alpha` monitoring
/// diversions and the eavesdropper's `beta` siphoning, `(1-α)³(1-β)²`.
///
/// This is the surface tabulated for the constant-g budget. Only two powers of
/// `(1-β)` appear even though Eve taps three passes; the table is reproduced as
/// published.
pub fn overall_intensity_fraction(alpha: f64, beta: f64) -> Result<f64> {
    check_unit_open("alpha", alpha)?;
    check_unit_open("beta", beta)?;
    Ok((1.0 - alpha).powi(3) * (1.0 - beta).powi(2))
}

/// Whether the overall reduction stays within the `g` budget.
pub fn table1_feasible(alpha: f64, beta: f64, g: f64) -> Result<bool> {
    check_unit_exclusive("g", g)?;
    Ok(overall_intensity_fraction(alpha, beta)? >= 1.0 - g)
}

/// One row of the intensity-budget table.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRow {
    pub alpha: f64,
    /// `None` where the table leaves the cell blank.
    pub cells: Vec<Option<f64>>,
}

/// The α × β intensity-budget table for threshold `g`.
///
/// Along each row the cells run up to and including the first β that pushes the
/// overall fraction below `1 - g`; everything after it is blank. A row whose
/// monitoring alone (β = 0) already exceeds the budget is blank throughout.
pub fn intensity_budget_table(g: f64, alphas: &[f64], betas: &[f64]) -> Result<Vec<BudgetRow>> {
    check_unit_exclusive("g", g)?;
    let mut sorted = betas.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted != betas {
        return Err(Error::param("beta", "column values must be ascending"));
    }
    alphas
        .iter()
        .map(|&alpha| {
            let mut prev_feasible = table1_feasible(alpha, 0.0, g)?;
            let mut cells = Vec::with_capacity(betas.len());
            for &beta in betas {
                let value = overall_intensity_fraction(alpha, beta)?;
                cells.push(prev_feasible.then_some(value));
                prev_feasible = prev_feasible && value >= 1.0 - g;
            }
            Ok(BudgetRow { alpha, cells })
        })
        .collect()
}

fn check_power_of_two(s: u64) -> Result<u32> {
    if s >= 2 && s.is_power_of_two() {
        Ok(s.trailing_zeros())
    } else {
        Err(Error::param("s", format!("{s} is not a power of two >= 2")))
    }
}

/// Information-theoretic floor on photons Eve must siphon over three passes to
/// single out one of `s` angles: `3 log2 s`.
pub fn min_siphon_photons(s: u64) -> Result<u64> {
    Ok(3 * check_power_of_two(s)? as u64)
}

/// Detector-array scheme: Eve needs `3s` photons; a source whose intensity
/// checks resolve a halving may emit `6s` per burst.
pub fn detector_array_budget(s: u64) -> Result<(u64, u64)> {
    if s < 2 {
        return Err(Error::param("s", format!("{s} < 2")));
    }
    Ok((3 * s, 6 * s))
}

/// Photon budget when Eve needs `m` photons per pass: siphons `3m` from a `6m` source.
pub fn siphon_budget(m: u64) -> (u64, u64) {
    (3 * m, 6 * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Bb84,
    ThreeStage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecurityRegime {
    Secure,
    PartiallySecure,
    Insecure,
}

/// A (p-k-n) threshold classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdClass {
    pub p: u64,
    pub k: u64,
    pub n: u64,
}

impl ThresholdClass {
    pub fn new(p: u64, k: u64, n: u64) -> Result<Self> {
        if p >= 1 && p <= k && k <= n {
            Ok(Self { p, k, n })
        } else {
            Err(Error::param(
                "threshold",
                format!("need 1 <= p <= k <= n, got {p}-{k}-{n}"),
            ))
        }
    }

    pub fn has_threshold_property(&self) -> bool {
        !(self.p == self.k && self.k == self.n)
    }

    pub fn regime(&self, photons: u64) -> SecurityRegime {
        if photons < self.p {
            SecurityRegime::Secure
        } else if photons <= self.k {
            SecurityRegime::PartiallySecure
        } else {
            SecurityRegime::Insecure
        }
    }
}

impl fmt::Display for ThresholdClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.p, self.k, self.n)
    }
}

/// BB84 is 1-1-1; the three-stage protocol is p-4p-n.
pub fn classify_protocol(
    kind: ProtocolKind,
    p: Option<u64>,
    n: Option<u64>,
) -> Result<ThresholdClass> {
    match kind {
        ProtocolKind::Bb84 => ThresholdClass::new(1, 1, 1),
        ProtocolKind::ThreeStage => {
            let p = p.ok_or_else(|| Error::param("p", "required for the three-stage protocol"))?;
            let n = n.ok_or_else(|| Error::param("n", "required for the three-stage protocol"))?;
            if p < 1 {
                return Err(Error::param("p", "must be >= 1"));
            }
            let k = 4 * p;
            if n < k {
                return Err(Error::param("n", format!("{n} < 4p = {k}")));
            }
            ThresholdClass::new(p, k, n)
        }
    }
}
