//! Jitter-averaged joint detection probabilities and the width algebra that
//! links photon duration and jitters to the measured peak and dip widths.
//!
//! For zero-mean Gaussian jitters of the frequency difference (width δω) and
//! of the arrival delay (width Δτ), the time-resolved probability is
//!
//! ```text
//! P(τ) = T / (2√π T1) · exp(−τ²/T1²) · [1 − cos²φ · exp(−τ²/T2²)]
//! T1² = δt² + Δτ²
//! 1/T2² = δω²/4 + Δτ² / (δt² T1²)
//! ```
//!
//! which reduces to the pure frequency-jitter form for Δτ = 0 (T2 = 2/δω) and
//! to the pure emission-time form for δω = 0 (T2 = δt·T1/Δτ). The combined
//! expression is checked against [`crate::oracle`] in the test suites.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, sqrt};

use crate::error::{Error, Result};
use crate::wavepacket::JitterSpec;

/// Peak width `T1` and dip width `T2`.
///
/// `T2` is stored as `1/T2²` so that a vanishing dip (no jitter at all) is the
/// finite value zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthPair {
    pub t1: f64,
    pub inv_t2_sq: f64,
}

impl WidthPair {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t1 > 0.0 && t1.is_finite()) {
            return Err(Error::Domain("peak width T1 must be positive and finite"));
        }
        if !(t2 > 0.0) {
            return Err(Error::Domain("dip width T2 must be positive"));
        }
        Ok(Self {
            t1,
            inv_t2_sq: 1.0 / (t2 * t2),
        })
    }

    /// `T2`, infinite when there is no dip.
    pub fn t2(&self) -> f64 {
        if self.inv_t2_sq == 0.0 {
            f64::INFINITY
        } else {
            1.0 / sqrt(self.inv_t2_sq)
        }
    }

    /// Largest emission-time jitter compatible with the widths,
    /// `T1² / √(T1² + T2²)`, reached when δω = 0.
    pub fn max_emission_jitter(&self) -> f64 {
        // T1²/√(T1²+T2²) = T1²·√(1/T2²) / √(T1²/T2² + 1)
        let t1sq = self.t1 * self.t1;
        t1sq * sqrt(self.inv_t2_sq) / sqrt(t1sq * self.inv_t2_sq + 1.0)
    }

    /// Largest frequency jitter, `2/T2`, reached when Δτ = 0.
    pub fn max_frequency_jitter(&self) -> f64 {
        2.0 * sqrt(self.inv_t2_sq)
    }

    /// Shortest photon duration compatible with the widths, `T1·T2/√(T1²+T2²)`.
    pub fn min_duration(&self) -> f64 {
        self.t1 / sqrt(1.0 + self.t1 * self.t1 * self.inv_t2_sq)
    }
}

/// A (frequency jitter, emission-time jitter, duration) triple that explains
/// a [`WidthPair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusPoint {
    /// δω (rad/s).
    pub delta_omega: f64,
    /// Δτ (s).
    pub delta_tau: f64,
    /// Implied photon duration δt (s).
    pub delta_t: f64,
}

impl LocusPoint {
    pub fn jitter(&self) -> JitterSpec {
        JitterSpec {
            sigma_delta: self.delta_omega,
            sigma_dtau: self.delta_tau,
            ..JitterSpec::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PureCase {
    FrequencyOnly,
    EmissionOnly,
}

fn check_duration(delta_t: f64) -> Result<()> {
    if !(delta_t > 0.0 && delta_t.is_finite()) {
        return Err(Error::Domain("photon duration must be positive and finite"));
    }
    Ok(())
}

fn check_zero_mean(jitter: &JitterSpec) -> Result<()> {
    jitter.validate()?;
    if !jitter.is_zero_mean() {
        return Err(Error::Unsupported(
            "closed jitter forms assume zero-mean jitter; use the numeric oracle",
        ));
    }
    Ok(())
}

/// Peak and dip widths produced by a photon of duration `delta_t` with the given jitters.
pub fn widths_from_jitters(delta_t: f64, jitter: &JitterSpec) -> Result<WidthPair> {
    check_duration(delta_t)?;
    jitter.validate()?;
    let (dw, jt) = (jitter.sigma_delta, jitter.sigma_dtau);
    let t1sq = delta_t * delta_t + jt * jt;
    Ok(WidthPair {
        t1: sqrt(t1sq),
        inv_t2_sq: dw * dw / 4.0 + jt * jt / (delta_t * delta_t * t1sq),
    })
}

/// Time-resolved joint detection probability for simultaneously impinging
/// photons with frequency and emission-time jitter.
///
/// A mean frequency difference produces the quantum beat `cos(Δ̄τ)`; the mean
/// arrival delay must be zero.
pub fn p2_jittered(tau: f64, delta_t: f64, jitter: &JitterSpec, cos2_phi: f64, resolution: f64) -> Result<f64> {
    jitter.validate()?;
    if jitter.mean_dtau != 0.0 {
        return Err(Error::Unsupported(
            "closed jitter forms assume simultaneous arrival; use the numeric oracle",
        ));
    }
    let w = widths_from_jitters(delta_t, jitter)?;
    let peak = exp(-tau * tau / (w.t1 * w.t1));
    let dip = 1.0 - cos2_phi * cos(jitter.mean_delta * tau) * exp(-tau * tau * w.inv_t2_sq);
    Ok(resolution / (2.0 * sqrt(PI) * w.t1) * peak * dip)
}

/// Coincidence probability without time resolution as a function of the mean
/// arrival delay `dtau`, for a single kind of jitter.
///
/// Frequency jitter reduces the dip depth by `2/√(4 + δt²δω²)` at unchanged
/// width; emission-time jitter reduces it by `1/√(1 + Δτ²/δt²)` and widens the
/// dip to `√(δt² + Δτ²)`. Both jitters at once is refused: integrate
/// [`p2_jittered`] over τ instead.
pub fn hom_jittered(dtau: f64, delta_t: f64, jitter: &JitterSpec, cos2_phi: f64) -> Result<f64> {
    check_duration(delta_t)?;
    check_zero_mean(jitter)?;
    let (dw, jt) = (jitter.sigma_delta, jitter.sigma_dtau);
    if dw > 0.0 && jt > 0.0 {
        return Err(Error::Unsupported(
            "no closed coincidence form for simultaneous frequency and emission-time jitter",
        ));
    }
    let dt2 = delta_t * delta_t;
    let (depth, width_sq) = if jt > 0.0 {
        (1.0 / sqrt(1.0 + jt * jt / dt2), dt2 + jt * jt)
    } else {
        (2.0 / sqrt(4.0 + dt2 * dw * dw), dt2)
    };
    Ok(0.5 * (1.0 - cos2_phi * depth * exp(-dtau * dtau / width_sq)))
}

/// Invert widths assuming only one kind of jitter.
pub fn pure_case_inversion(widths: &WidthPair, case: PureCase) -> LocusPoint {
    match case {
        PureCase::FrequencyOnly => LocusPoint {
            delta_omega: widths.max_frequency_jitter(),
            delta_tau: 0.0,
            delta_t: widths.t1,
        },
        PureCase::EmissionOnly => LocusPoint {
            delta_omega: 0.0,
            delta_tau: widths.max_emission_jitter(),
            delta_t: widths.min_duration(),
        },
    }
}

/// Locus point at emission-time jitter `delta_tau` (0 ≤ Δτ ≤ Δτ_max).
fn locus_point(widths: &WidthPair, delta_tau: f64) -> LocusPoint {
    let t1sq = widths.t1 * widths.t1;
    let dtsq = (t1sq - delta_tau * delta_tau).max(0.0);
    let rest = widths.inv_t2_sq - delta_tau * delta_tau / (dtsq * t1sq);
    LocusPoint {
        delta_omega: 2.0 * sqrt(rest.max(0.0)),
        delta_tau,
        delta_t: sqrt(dtsq),
    }
}

/// All (δω, Δτ) pairs reproducing `widths`, sampled uniformly in Δτ from the
/// pure-frequency endpoint to the pure-emission endpoint.
///
/// When the widths show no dip at all the locus collapses to the single
/// jitter-free point, which is returned once.
pub fn jitter_locus(widths: &WidthPair, n_points: usize) -> Result<Vec<LocusPoint>> {
    if n_points < 2 {
        return Err(Error::Domain("a locus needs at least two points"));
    }
    let max = widths.max_emission_jitter();
    if max == 0.0 {
        return Ok(alloc::vec![pure_case_inversion(widths, PureCase::FrequencyOnly)]);
    }
    let last = n_points - 1;
    Ok((0..n_points)
        .map(|k| {
            if k == 0 {
                pure_case_inversion(widths, PureCase::FrequencyOnly)
            } else if k == last {
                pure_case_inversion(widths, PureCase::EmissionOnly)
            } else {
                locus_point(widths, max * k as f64 / last as f64)
            }
        })
        .collect())
}
