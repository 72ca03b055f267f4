//! Gaussian single-photon modes and their single-detector densities.
//!
//! A mode is fixed by its carrier `omega0`, duration `delta_t` and emission
//! time `tau0`. At the detector (z = 0) the complex amplitude is
//!
//! ```text
//! ξ(t) = (2 / (π δt²))^{1/4} · exp(-(t - τ0)² / δt²) · exp(i ω0 (τ0 - t))
//! ```
//!
//! so `|ξ|²` is a normalized density with standard deviation `δt/2`. The
//! frequency-domain width is `κ = 2/δt`.

use core::f64::consts::PI;

use libm::{cos, exp, sin, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Envelope values below this are flushed to zero.
pub const ENVELOPE_FLOOR: f64 = 1e-300;

/// Ratio `κ/ω0` above which a mode is no longer considered narrow-band.
pub const NARROW_BAND_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMode {
    /// Carrier angular frequency (rad/s).
    pub omega0: f64,
    /// Duration δt (s), 1/e half-width of the amplitude envelope.
    pub delta_t: f64,
    /// Emission time (s).
    pub tau0: f64,
}

impl GaussianMode {
    pub fn new(omega0: f64, delta_t: f64, tau0: f64) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::Domain("carrier frequency must be positive and finite"));
        }
        if !(delta_t > 0.0 && delta_t.is_finite()) {
            return Err(Error::Domain("photon duration must be positive and finite"));
        }
        if !tau0.is_finite() {
            return Err(Error::Domain("emission time must be finite"));
        }
        Ok(Self { omega0, delta_t, tau0 })
    }

    /// Frequency-domain width κ = 2/δt.
    pub fn bandwidth(&self) -> f64 {
        2.0 / self.delta_t
    }

    /// `false` when κ ≥ 0.01·ω0, where the spatiotemporal description loses validity.
    pub fn is_narrow_band(&self) -> bool {
        self.bandwidth() < NARROW_BAND_LIMIT * self.omega0
    }

    pub fn with_tau0(self, tau0: f64) -> Self {
        Self { tau0, ..self }
    }

    pub fn with_omega0(self, omega0: f64) -> Self {
        Self { omega0, ..self }
    }

    /// Real envelope ε(t).
    pub fn envelope(&self, t: f64) -> f64 {
        let x = (t - self.tau0) / self.delta_t;
        let norm = sqrt(sqrt(2.0 / PI)) / sqrt(self.delta_t);
        let value = norm * exp(-x * x);
        if value < ENVELOPE_FLOOR {
            0.0
        } else {
            value
        }
    }

    /// Phase Φ(t) in the convention ξ = ε·exp(-iΦ).
    pub fn phase(&self, t: f64) -> f64 {
        self.omega0 * (t - self.tau0)
    }

    /// Complex mode amplitude ξ(t) at the detector.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        let eps = self.envelope(t);
        let arg = self.omega0 * (self.tau0 - t);
        Complex64::new(eps * cos(arg), eps * sin(arg))
    }

    /// Frequency-domain mode function χ(ω) evaluated at z = 0.
    pub fn spectral_amplitude(&self, omega: f64) -> Complex64 {
        let kappa = self.bandwidth();
        let x = (omega - self.omega0) / kappa;
        let eps = sqrt(sqrt(2.0 / (PI * kappa * kappa))) * exp(-x * x);
        let arg = -omega * self.tau0;
        Complex64::new(eps * cos(arg), eps * sin(arg))
    }

    /// Detection-time density |ξ(t)|² = ε²(t) (1/s). Multiply by η·T for a probability.
    pub fn detection_density(&self, t: f64) -> f64 {
        let e = self.envelope(t);
        e * e
    }

    /// Detection density averaged over a Gaussian emission-time jitter of width
    /// `emission_jitter_width` (same `exp(-x²/w²)` convention).
    ///
    /// ε² has variance δt²/4 and the emission law has variance w²/2, so the
    /// result is a normal density of variance `δt²/4 + w²/2` centered on τ0.
    /// Frequency jitter does not enter: |ξ|² does not depend on ω0.
    pub fn average_detection_density(&self, emission_jitter_width: f64, t: f64) -> Result<f64> {
        if !(emission_jitter_width >= 0.0 && emission_jitter_width.is_finite()) {
            return Err(Error::Domain("emission jitter width must be finite and non-negative"));
        }
        if emission_jitter_width == 0.0 {
            return Ok(self.detection_density(t));
        }
        let variance = self.averaged_variance(emission_jitter_width);
        let d = t - self.tau0;
        let value = exp(-d * d / (2.0 * variance)) / sqrt(2.0 * PI * variance);
        Ok(if value < ENVELOPE_FLOOR { 0.0 } else { value })
    }

    /// Variance of the jitter-averaged detection density.
    pub fn averaged_variance(&self, emission_jitter_width: f64) -> f64 {
        0.25 * self.delta_t * self.delta_t + 0.5 * emission_jitter_width * emission_jitter_width
    }
}

/// Gaussian jitter of the frequency difference Δ = ω02 − ω01 and of the
/// arrival delay δτ = τ02 − τ01 of the photon pairs.
///
/// Widths use `f(x) = exp(-(x-m)²/w²) / (√π w)`; a width of zero is a delta
/// distribution. The two jitters are independent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JitterSpec {
    /// Mean frequency difference (rad/s).
    pub mean_delta: f64,
    /// Width δω of the frequency-difference law (rad/s).
    pub sigma_delta: f64,
    /// Mean arrival delay (s).
    pub mean_dtau: f64,
    /// Width Δτ of the arrival-delay law (s).
    pub sigma_dtau: f64,
}

impl JitterSpec {
    pub fn new(mean_delta: f64, sigma_delta: f64, mean_dtau: f64, sigma_dtau: f64) -> Result<Self> {
        let spec = Self {
            mean_delta,
            sigma_delta,
            mean_dtau,
            sigma_dtau,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Zero-mean jitter with the given widths.
    pub fn widths(sigma_delta: f64, sigma_dtau: f64) -> Result<Self> {
        Self::new(0.0, sigma_delta, 0.0, sigma_dtau)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.mean_delta, self.sigma_delta, self.mean_dtau, self.sigma_dtau]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("jitter parameters must be finite"));
        }
        if self.sigma_delta < 0.0 || self.sigma_dtau < 0.0 {
            return Err(Error::Domain("jitter widths must be non-negative"));
        }
        Ok(())
    }

    pub fn is_zero_mean(&self) -> bool {
        self.mean_delta == 0.0 && self.mean_dtau == 0.0
    }

    /// f(Δ); only meaningful for a non-zero width.
    pub fn frequency_density(&self, delta: f64) -> f64 {
        gaussian_law(delta - self.mean_delta, self.sigma_delta)
    }

    /// f(δτ); only meaningful for a non-zero width.
    pub fn delay_density(&self, dtau: f64) -> f64 {
        gaussian_law(dtau - self.mean_dtau, self.sigma_dtau)
    }
}

fn gaussian_law(x: f64, width: f64) -> f64 {
    let u = x / width;
    exp(-u * u) / (sqrt(PI) * width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};
    use crate::units::{angular_from_mhz, us};

    fn mode() -> GaussianMode {
        GaussianMode::new(angular_from_mhz(1000.0), us(0.5), us(2.0)).unwrap()
    }

    #[test]
    fn rejects_invalid_modes() {
        assert!(GaussianMode::new(0.0, 1e-6, 0.0).is_err());
        assert!(GaussianMode::new(1e9, 0.0, 0.0).is_err());
        assert!(GaussianMode::new(1e9, -1e-6, 0.0).is_err());
        assert!(GaussianMode::new(1e9, 1e-6, f64::NAN).is_err());
    }

    #[test]
    fn narrow_band_flag() {
        assert!(mode().is_narrow_band());
        // κ = 4e6 rad/s, ω0 = 1e8 rad/s → κ/ω0 = 0.04
        let broad = GaussianMode::new(1e8, us(0.5), 0.0).unwrap();
        assert!(!broad.is_narrow_band());
    }

    #[test]
    fn peak_value() {
        let m = mode();
        let peak = m.amplitude(m.tau0).norm_sqr();
        let expected = sqrt(2.0 / PI) / m.delta_t;
        assert!((peak - expected).abs() < 1e-12 * expected);
        assert!((m.detection_density(m.tau0) - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn tails_vanish() {
        let m = mode();
        let peak = m.amplitude(m.tau0).norm();
        for t in [m.tau0 + 10.0 * m.delta_t, m.tau0 - 10.0 * m.delta_t] {
            assert!(m.amplitude(t).norm() < 1e-40 * peak);
        }
    }

    #[test]
    fn envelope_floor_clamps_to_zero() {
        let m = mode();
        assert_eq!(m.envelope(m.tau0 + 30.0 * m.delta_t), 0.0);
    }

    #[test]
    fn normalization_by_quadrature() {
        let m = mode();
        let est = integrate(
            |t| m.amplitude(t).norm_sqr(),
            m.tau0 - 10.0 * m.delta_t,
            m.tau0 + 10.0 * m.delta_t,
            8,
            Tolerance::new(1e-3, 1e-12),
        )
        .unwrap();
        assert!((est.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn density_is_even_about_tau0() {
        let m = mode();
        for k in 1..50 {
            let x = k as f64 * 0.05 * m.delta_t;
            let a = m.detection_density(m.tau0 + x);
            let b = m.detection_density(m.tau0 - x);
            assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        }
    }

    #[test]
    fn average_density_without_jitter_is_plain_density() {
        let m = mode();
        for k in -20..=20 {
            let t = m.tau0 + k as f64 * 0.1 * m.delta_t;
            assert_eq!(m.average_detection_density(0.0, t).unwrap(), m.detection_density(t));
        }
    }

    #[test]
    fn average_density_ignores_carrier() {
        let m = mode();
        let shifted = m.with_omega0(m.omega0 + angular_from_mhz(3.0));
        let w = us(0.3);
        for k in -10..=10 {
            let t = m.tau0 + k as f64 * 0.2 * m.delta_t;
            assert_eq!(
                m.average_detection_density(w, t).unwrap(),
                shifted.average_detection_density(w, t).unwrap()
            );
        }
    }

    #[test]
    fn average_density_rejects_negative_width() {
        assert!(mode().average_detection_density(-1e-9, 0.0).is_err());
    }

    #[test]
    fn average_density_matches_discrete_convolution() {
        // Oracle: convolve ε² with f(τ0) on a fine grid and compare the
        // resulting variance and pointwise values.
        let m = mode();
        let w = us(0.4);
        let h = m.delta_t / 400.0;
        let n = 8000i64;
        let emission = |x: f64| exp(-x * x / (w * w)) / (sqrt(PI) * w);
        let conv = |t: f64| -> f64 {
            (-n..=n)
                .map(|k| {
                    let s = k as f64 * h;
                    emission(s) * m.detection_density(t - s)
                })
                .sum::<f64>()
                * h
        };
        let mut mean = 0.0;
        let mut second = 0.0;
        let mut mass = 0.0;
        let step = m.delta_t / 20.0;
        for k in -200..=200 {
            let t = m.tau0 + k as f64 * step;
            let c = conv(t);
            let closed = m.average_detection_density(w, t).unwrap();
            if closed > 1e-6 * m.average_detection_density(w, m.tau0).unwrap() {
                assert!((c - closed).abs() < 1e-6 * closed, "t={t} conv={c} closed={closed}");
            }
            mass += c * step;
            mean += c * (t - m.tau0) * step;
            second += c * (t - m.tau0).powi(2) * step;
        }
        let variance = second / mass - (mean / mass).powi(2);
        let expected = m.averaged_variance(w);
        assert!((variance - expected).abs() < 1e-6 * expected);
        assert!(expected > m.averaged_variance(0.0));
    }

    #[test]
    fn fourier_transform_of_spectrum_reproduces_mode() {
        // ξ(t) = conj[(2π)^{-1/2} ∫ χ(ω) e^{iωt} dω]; the conjugation accounts for
        // the sign of the carrier phase in the time-domain convention.
        let m = GaussianMode::new(angular_from_mhz(200.0), us(0.5), us(0.7)).unwrap();
        let kappa = m.bandwidth();
        let tol = Tolerance::new(1e-10 * m.amplitude(m.tau0).norm(), 1e-11);
        for k in -12..=12 {
            let t = m.tau0 + k as f64 * 0.15 * m.delta_t;
            let re = integrate(
                |w| {
                    let z = m.spectral_amplitude(w) * Complex64::new(cos(w * t), sin(w * t));
                    z.re
                },
                m.omega0 - 10.0 * kappa,
                m.omega0 + 10.0 * kappa,
                64,
                tol,
            )
            .unwrap()
            .value;
            let im = integrate(
                |w| {
                    let z = m.spectral_amplitude(w) * Complex64::new(cos(w * t), sin(w * t));
                    z.im
                },
                m.omega0 - 10.0 * kappa,
                m.omega0 + 10.0 * kappa,
                64,
                tol,
            )
            .unwrap()
            .value;
            let numeric = Complex64::new(re, -im) / sqrt(2.0 * PI);
            let direct = m.amplitude(t);
            let scale = m.amplitude(m.tau0).norm();
            assert!((numeric - direct).norm() < 1e-6 * scale, "t={t}: {numeric} vs {direct}");
        }
    }

    #[test]
    fn jitter_laws_are_normalized() {
        let j = JitterSpec::new(1.0e6, 3.0e6, 1e-7, 4e-7).unwrap();
        let f = integrate(
            |x| j.frequency_density(x),
            1e6 - 3e7,
            1e6 + 3e7,
            8,
            Tolerance::new(1e-14, 1e-12),
        )
        .unwrap()
        .value;
        let g = integrate(
            |x| j.delay_density(x),
            1e-7 - 4e-6,
            1e-7 + 4e-6,
            8,
            Tolerance::new(1e-14, 1e-12),
        )
        .unwrap()
        .value;
        assert!((f - 1.0).abs() < 1e-10);
        assert!((g - 1.0).abs() < 1e-10);
        assert!(JitterSpec::new(0.0, -1.0, 0.0, 0.0).is_err());
    }
}
