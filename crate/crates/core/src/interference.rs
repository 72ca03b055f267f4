//! Beam splitter, second-order correlation functions and closed-form joint
//! detection probabilities for a pair of Gaussian photons.
//!
//! Detector 3 registers `t1`, detector 4 registers `t2`, and `τ = t2 − t1`.
//! The closed forms assume both photons share the same duration δt; other
//! cases are handled only by [`crate::oracle`].

use core::f64::consts::PI;

use libm::{cos, exp, fabs, sinh, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::wavepacket::GaussianMode;

/// Lossless two-port beam splitter with transmission σ.
///
/// `[[√σ, √(1−σ)], [−√(1−σ), √σ]]`; the opposite signs of the off-diagonal
/// entries carry the π phase jump of one reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterMatrix {
    pub sigma: f64,
    pub entries: [[Complex64; 2]; 2],
}

impl BeamSplitterMatrix {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Domain("beam-splitter transmission must lie in (0, 1)"));
        }
        let t = Complex64::new(sqrt(sigma), 0.0);
        let r = Complex64::new(sqrt(1.0 - sigma), 0.0);
        Ok(Self {
            sigma,
            entries: [[t, r], [-r, t]],
        })
    }

    pub fn balanced() -> Self {
        Self::new(0.5).expect("0.5 is a valid transmission")
    }

    /// `B·B†`.
    pub fn gram(&self) -> [[Complex64; 2]; 2] {
        let b = &self.entries;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = b[i][0] * b[j][0].conj() + b[i][1] * b[j][1].conj();
            }
        }
        out
    }

    /// Largest deviation of `B·B†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.gram();
        let mut worst: f64 = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((cell - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Alias matching the operation name.
pub fn beam_splitter(sigma: f64) -> Result<BeamSplitterMatrix> {
    BeamSplitterMatrix::new(sigma)
}

/// Two photons, their polarization overlap and the detection context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConfig {
    pub mode1: GaussianMode,
    pub mode2: GaussianMode,
    /// cos²φ of the polarization angle; also absorbs spatial mode mismatch.
    pub cos2_phi: f64,
    /// Detector time resolution T (s).
    pub detector_resolution: f64,
    pub eta3: f64,
    pub eta4: f64,
}

impl PairConfig {
    pub fn new(
        mode1: GaussianMode,
        mode2: GaussianMode,
        cos2_phi: f64,
        detector_resolution: f64,
        eta3: f64,
        eta4: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&cos2_phi) {
            return Err(Error::Domain("cos²φ must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&eta3) || !(0.0..=1.0).contains(&eta4) {
            return Err(Error::Domain("detector efficiencies must lie in [0, 1]"));
        }
        if !(detector_resolution > 0.0 && detector_resolution.is_finite()) {
            return Err(Error::Domain("detector resolution must be positive"));
        }
        Ok(Self {
            mode1,
            mode2,
            cos2_phi,
            detector_resolution,
            eta3,
            eta4,
        })
    }

    /// Two copies of `mode` with ideal detectors.
    pub fn identical(mode: GaussianMode, cos2_phi: f64, detector_resolution: f64) -> Result<Self> {
        Self::new(mode, mode, cos2_phi, detector_resolution, 1.0, 1.0)
    }

    pub fn with_cos2_phi(self, cos2_phi: f64) -> Result<Self> {
        Self::new(
            self.mode1,
            self.mode2,
            cos2_phi,
            self.detector_resolution,
            self.eta3,
            self.eta4,
        )
    }

    pub fn efficiency(&self) -> f64 {
        self.eta3 * self.eta4
    }

    /// Common duration, or an error when the two photons differ.
    pub fn common_duration(&self) -> Result<f64> {
        let (a, b) = (self.mode1.delta_t, self.mode2.delta_t);
        if fabs(a - b) > 1e-12 * a.max(b) {
            return Err(Error::Unsupported(
                "closed forms require equal photon durations; use the numeric oracle",
            ));
        }
        Ok(a)
    }
}

/// The pieces of `G⁽²⁾(t1, t2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Components {
    /// Perpendicular-polarization correlation `G_HV`.
    pub hv: f64,
    /// Phase-dependent interference term `F`.
    pub interference: f64,
    /// `G_HV − cos²φ·F`, never negative.
    pub total: f64,
}

/// Correlation function from real envelopes and the phase difference.
pub fn g2_components(pair: &PairConfig, t1: f64, t2: f64) -> G2Components {
    let (m1, m2) = (&pair.mode1, &pair.mode2);
    let e11 = m1.envelope(t1);
    let e22 = m2.envelope(t2);
    let e12 = m1.envelope(t2);
    let e21 = m2.envelope(t1);
    let hv = ((e11 * e22) * (e11 * e22) + (e12 * e21) * (e12 * e21)) / 4.0;
    let dphi = m1.phase(t1) - m1.phase(t2) + m2.phase(t2) - m2.phase(t1);
    let interference = e11 * e22 * e12 * e21 / 2.0 * cos(dphi);
    let total = (hv - pair.cos2_phi * interference).max(0.0);
    G2Components {
        hv,
        interference,
        total,
    }
}

/// `G⁽²⁾(t1, t2)` composed directly from complex mode products:
/// `cos²φ·|ξ1(t1)ξ2(t2) − ξ2(t1)ξ1(t2)|²/4 + sin²φ·G_HV`.
pub fn g2_from_amplitudes(pair: &PairConfig, t1: f64, t2: f64) -> f64 {
    let a = pair.mode1.amplitude(t1) * pair.mode2.amplitude(t2);
    let b = pair.mode2.amplitude(t1) * pair.mode1.amplitude(t2);
    let hh = (a - b).norm_sqr() / 4.0;
    let hv = (a.norm_sqr() + b.norm_sqr()) / 4.0;
    pair.cos2_phi * hh + (1.0 - pair.cos2_phi) * hv
}

/// Coincidence probability without time resolution (photons short compared to T).
///
/// `½·η3η4·(1 − cos²φ·exp(−δt²Δ²/4)·exp(−δτ²/δt²))`
pub fn p2_hom(pair: &PairConfig, delta: f64, dtau: f64) -> Result<f64> {
    let dt = pair.common_duration()?;
    let visibility = exp(-dt * dt * delta * delta / 4.0) * exp(-dtau * dtau / (dt * dt));
    Ok(0.5 * pair.efficiency() * (1.0 - pair.cos2_phi * visibility))
}

/// Joint detection probability per detector-resolution window as a function
/// of the detection-time difference `tau`, for frequency difference `delta`
/// and arrival delay `dtau`.
pub fn p2_time_resolved(pair: &PairConfig, delta: f64, dtau: f64, tau: f64) -> Result<f64> {
    let dt = pair.common_duration()?;
    let dt2 = dt * dt;
    let s = sinh(tau * dtau / dt2);
    let bracket = (1.0 - pair.cos2_phi * cos(delta * tau)) / 2.0 + s * s;
    let prefactor = pair.detector_resolution / (sqrt(PI) * dt);
    Ok(pair.efficiency() * prefactor * bracket * exp(-(dtau * dtau + tau * tau) / dt2))
}

/// Trapezoidal integral of a sampled curve over τ.
///
/// The curve must have decayed at both ends: each endpoint must be at most
/// `1e-12` times the largest sample.
pub fn tau_integrate(taus: &[f64], values: &[f64]) -> Result<f64> {
    if taus.len() != values.len() {
        return Err(Error::Domain("grid and values differ in length"));
    }
    if taus.len() < 2 {
        return Err(Error::Domain("need at least two samples"));
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("grid must be strictly increasing"));
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(fabs(*v)));
    let limit = 1e-12 * peak;
    if fabs(values[0]) > limit || fabs(values[values.len() - 1]) > limit {
        return Err(Error::Domain("curve has not decayed at the grid endpoints"));
    }
    let segments: alloc::vec::Vec<f64> = taus
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .collect();
    Ok(crate::quad::pairwise_sum(&segments))
}
