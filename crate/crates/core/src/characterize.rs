//! Physical interpretation of measured peak and dip widths.

use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::jitter::{jitter_locus, pure_case_inversion, widths_from_jitters, LocusPoint, PureCase, WidthPair};

pub const DEFAULT_LOCUS_POINTS: usize = 101;

/// How much of the peak width the widths leave open to interpretation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// No dip broadening: the photons show no jitter and `δt = T1`.
    JitterFree,
    /// `T2 ≫ T1`: every explanation has `δt` within 5 % of `T1` and only
    /// a small emission-time jitter.
    NearlyPure,
    /// A genuine trade-off between frequency and emission-time jitter.
    Ambiguous,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::JitterFree => "jitter_free",
            Regime::NearlyPure => "nearly_pure",
            Regime::Ambiguous => "ambiguous",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    pub widths: WidthPair,
    pub frequency_endpoint: LocusPoint,
    pub emission_endpoint: LocusPoint,
    pub locus: Vec<LocusPoint>,
    /// Lower bound on the photon duration.
    pub min_duration: f64,
    /// Upper bound on the emission-time jitter.
    pub max_emission_jitter: f64,
    /// Upper bound on the frequency jitter.
    pub max_frequency_jitter: f64,
    pub regime: Regime,
}

impl Characterization {
    /// Fraction of the peak width that is certainly photon duration.
    pub fn coherent_fraction(&self) -> f64 {
        self.min_duration / self.widths.t1
    }
}

pub fn characterize(widths: &WidthPair) -> Result<Characterization> {
    characterize_with(widths, DEFAULT_LOCUS_POINTS)
}

pub fn characterize_with(widths: &WidthPair, n_points: usize) -> Result<Characterization> {
    let locus = jitter_locus(widths, n_points)?;
    let min_duration = widths.min_duration();
    let regime = if widths.inv_t2_sq == 0.0 {
        Regime::JitterFree
    } else if min_duration >= 0.95 * widths.t1 {
        Regime::NearlyPure
    } else {
        Regime::Ambiguous
    };
    Ok(Characterization {
        widths: *widths,
        frequency_endpoint: pure_case_inversion(widths, PureCase::FrequencyOnly),
        emission_endpoint: pure_case_inversion(widths, PureCase::EmissionOnly),
        locus,
        min_duration,
        max_emission_jitter: widths.max_emission_jitter(),
        max_frequency_jitter: widths.max_frequency_jitter(),
        regime,
    })
}

/// Joint χ² of a hypothesized source against measured widths, given the
/// covariance of `(T1, 1/T2²)`. Below [`JOINT_TWO_SIGMA`] the point lies
/// inside the joint 2σ region.
pub fn locus_chi2(measured: &WidthPair, covariance: &[[f64; 2]; 2], truth: &LocusPoint) -> Result<f64> {
    let expected = widths_from_jitters(truth.delta_t, &truth.jitter())?;
    let d = [measured.t1 - expected.t1, measured.inv_t2_sq - expected.inv_t2_sq];
    let [[a, b], [_, c]] = *covariance;
    let det = a * c - b * b;
    if !(det > 0.0) {
        return Err(Error::Domain("width covariance must be positive definite"));
    }
    Ok((c * d[0] * d[0] - 2.0 * b * d[0] * d[1] + a * d[1] * d[1]) / det)
}

/// χ² level enclosing 95.45 % probability for two degrees of freedom.
pub const JOINT_TWO_SIGMA: f64 = 6.18;

/// Width of the autocorrelation of the single-stream density when every
/// photon has emission jitter `stream_jitter`.
pub fn autocorrelation_width(delta_t: f64, stream_jitter: f64) -> f64 {
    sqrt(delta_t * delta_t + 2.0 * stream_jitter * stream_jitter)
}
