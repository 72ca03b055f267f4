//! Numerical ground truth for the closed-form probabilities.
//!
//! [`p2_numeric_oracle`] integrates the correlation function built from raw
//! complex mode products over the first detection time and over both jitter
//! laws by nested adaptive quadrature. Nothing here calls a closed form, so
//! every formula in [`crate::interference`] and [`crate::jitter`] can be
//! checked against it.
//!
//! Internally all times are measured in units of the first photon's duration,
//! which keeps the integrands O(1) and makes absolute tolerances meaningful.
//! Phases are taken relative to the first photon's carrier.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::Cell;
use core::f64::consts::PI;

use libm::fabs;

use crate::error::{Error, Result};
use crate::interference::{g2_from_amplitudes, p2_hom, p2_time_resolved, PairConfig};
use crate::jitter::{hom_jittered, p2_jittered, widths_from_jitters};
use crate::quad::{integrate, Tolerance};
use crate::units::{angular_from_mhz, us};
use crate::wavepacket::{GaussianMode, JitterSpec};

/// Half-width of every integration window, in units of the relevant width.
pub const WINDOW_WIDTHS: f64 = 6.0;

/// Half-width of the detection-time window around the envelope overlap, in
/// photon durations.
pub const TIME_WINDOW_WIDTHS: f64 = 4.5;

/// Initial panels of the detection-time integrals.
pub const TIME_PANELS: usize = 4;

/// Initial panels of the jitter-law integrals.
pub const JITTER_PANELS: usize = 4;

/// Tolerances of the three nesting levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTolerance {
    /// Integral over the first detection time.
    pub inner: Tolerance,
    /// Integrals over the jitter laws and over τ.
    pub outer: Tolerance,
}

impl Default for OracleTolerance {
    fn default() -> Self {
        Self {
            inner: Tolerance::new(1e-12, 1e-8),
            outer: Tolerance::new(1e-11, 1e-7),
        }
    }
}

/// Pair and jitter rescaled to units of `scale` seconds.
struct Scaled {
    pair: PairConfig,
    jitter: JitterSpec,
}

fn rescale(pair: &PairConfig, jitter: &JitterSpec) -> Result<(Scaled, f64)> {
    jitter.validate()?;
    let s = pair.mode1.delta_t;
    // Frame rotating at the first carrier: a common phase drops out of |a − b|²
    // but would otherwise swamp the integrand with rounding noise.
    let carrier = pair.mode1.omega0;
    let scale_mode = |m: &GaussianMode| GaussianMode {
        omega0: (m.omega0 - carrier) * s,
        delta_t: m.delta_t / s,
        tau0: m.tau0 / s,
    };
    let scaled = Scaled {
        pair: PairConfig {
            mode1: scale_mode(&pair.mode1),
            mode2: scale_mode(&pair.mode2),
            ..*pair
        },
        jitter: JitterSpec {
            mean_delta: jitter.mean_delta * s,
            sigma_delta: jitter.sigma_delta * s,
            mean_dtau: jitter.mean_dtau / s,
            sigma_dtau: jitter.sigma_dtau / s,
        },
    };
    Ok((scaled, s))
}

/// Run `f` and surface the first error recorded in `slot`.
fn checked<T>(slot: &Cell<Option<Error>>, value: Result<T>) -> Result<T> {
    match slot.take() {
        Some(e) => Err(e),
        None => value,
    }
}

impl Scaled {
    /// Pair with the jitter sample applied on top of the nominal modes.
    fn sample(&self, delta: f64, dtau: f64) -> PairConfig {
        let m2 = self.pair.mode2;
        PairConfig {
            mode2: GaussianMode {
                omega0: m2.omega0 + delta,
                tau0: m2.tau0 + dtau,
                ..m2
            },
            ..self.pair
        }
    }

    /// ∫dt0 G(t0, t0 + τ) for one jitter sample.
    ///
    /// Every term of G is a product of one envelope at t0 and one at t0 + τ,
    /// so the integrand is concentrated around `(c1 + c2 − τ)/2`.
    fn time_integral(&self, delta: f64, dtau: f64, tau: f64, tol: Tolerance) -> Result<f64> {
        let p = self.sample(delta, dtau);
        let (c1, c2) = (p.mode1.tau0, p.mode2.tau0);
        let width = p.mode1.delta_t.max(p.mode2.delta_t);
        let center = 0.5 * (c1 + c2 - tau);
        let lo = center - TIME_WINDOW_WIDTHS * width;
        let hi = center + TIME_WINDOW_WIDTHS * width;
        Ok(integrate(|t0| g2_from_amplitudes(&p, t0, t0 + tau), lo, hi, TIME_PANELS, tol)?.value)
    }

    /// Jitter-averaged ∫dt0 G(t0, t0 + τ).
    fn averaged(&self, tau: f64, tol: OracleTolerance) -> Result<f64> {
        let j = self.jitter;
        let failure: Cell<Option<Error>> = Cell::new(None);
        let over_delay = |delta: f64| -> Result<f64> {
            if j.sigma_dtau == 0.0 {
                return self.time_integral(delta, j.mean_dtau, tau, tol.inner);
            }
            let inner_fail: Cell<Option<Error>> = Cell::new(None);
            let est = integrate(
                |d| match self.time_integral(delta, d, tau, tol.inner) {
                    Ok(v) => j.delay_density(d) * v,
                    Err(e) => {
                        inner_fail.set(Some(e));
                        0.0
                    }
                },
                j.mean_dtau - WINDOW_WIDTHS * j.sigma_dtau,
                j.mean_dtau + WINDOW_WIDTHS * j.sigma_dtau,
                JITTER_PANELS,
                tol.outer,
            );
            checked(&inner_fail, est.map(|e| e.value))
        };
        if j.sigma_delta == 0.0 {
            return over_delay(j.mean_delta);
        }
        let est = integrate(
            |delta| match over_delay(delta) {
                Ok(v) => j.frequency_density(delta) * v,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            },
            j.mean_delta - WINDOW_WIDTHS * j.sigma_delta,
            j.mean_delta + WINDOW_WIDTHS * j.sigma_delta,
            JITTER_PANELS,
            tol.outer,
        );
        checked(&failure, est.map(|e| e.value))
    }
}

/// Jitter-averaged joint detection probability at detection-time difference
/// `tau`, in the same units as [`p2_time_resolved`]:
/// `η3η4·T·∫dt0 ∫dΔ ∫dδτ f(Δ) f(δτ) G⁽²⁾(t0, t0 + τ)`.
///
/// The jitter samples are added to the nominal difference of the two modes in
/// `pair`, so with identical nominal modes the jitter means are the mean
/// frequency difference and mean delay.
pub fn p2_numeric_oracle(pair: &PairConfig, jitter: &JitterSpec, tau: f64) -> Result<f64> {
    p2_numeric_oracle_with(pair, jitter, tau, OracleTolerance::default())
}

pub fn p2_numeric_oracle_with(pair: &PairConfig, jitter: &JitterSpec, tau: f64, tol: OracleTolerance) -> Result<f64> {
    let (scaled, s) = rescale(pair, jitter)?;
    let integral = scaled.averaged(tau / s, tol)?;
    Ok(pair.efficiency() * pair.detector_resolution / s * integral)
}

/// Coincidence probability without time resolution,
/// `η3η4·∫dτ ∫dt0 ⟨G⁽²⁾(t0, t0 + τ)⟩`, evaluated numerically.
pub fn coincidence_numeric_oracle(pair: &PairConfig, jitter: &JitterSpec) -> Result<f64> {
    coincidence_numeric_oracle_with(pair, jitter, OracleTolerance::default())
}

pub fn coincidence_numeric_oracle_with(pair: &PairConfig, jitter: &JitterSpec, tol: OracleTolerance) -> Result<f64> {
    let (scaled, _) = rescale(pair, jitter)?;
    let j = scaled.jitter;
    let p = scaled.pair;
    let spread = p.mode1.delta_t.max(p.mode2.delta_t) + j.sigma_dtau;
    let offset = fabs(p.mode2.tau0 - p.mode1.tau0 + j.mean_dtau);
    let reach = offset + WINDOW_WIDTHS * spread;
    let failure: Cell<Option<Error>> = Cell::new(None);
    let est = integrate(
        |tau| match scaled.averaged(tau, tol) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        },
        -reach,
        reach,
        8,
        tol.outer,
    );
    let integral = checked(&failure, est.map(|e| e.value))?;
    Ok(pair.efficiency() * integral)
}

/// One closed-form evaluation compared against the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub formula: &'static str,
    pub label: String,
    pub closed: f64,
    pub numeric: f64,
}

impl OracleCheck {
    /// Relative deviation, or `None` when the oracle value is below the
    /// significance floor.
    pub fn relative_error(&self) -> Option<f64> {
        (fabs(self.numeric) > SIGNIFICANCE_FLOOR).then(|| fabs(self.closed - self.numeric) / fabs(self.numeric))
    }

    pub fn passes(&self, rel_tol: f64) -> bool {
        match self.relative_error() {
            Some(r) => r <= rel_tol,
            None => fabs(self.closed - self.numeric) <= SIGNIFICANCE_FLOOR,
        }
    }
}

/// Values at or below this magnitude are compared in absolute terms only.
pub const SIGNIFICANCE_FLOOR: f64 = 1e-10;

/// Required agreement between closed forms and the oracle.
pub const ORACLE_REL_TOL: f64 = 1e-6;

/// Formulas covered by [`oracle_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    Hom,
    TimeResolved,
    Jittered,
    HomJittered,
}

impl Formula {
    pub const ALL: [Formula; 4] = [
        Formula::Hom,
        Formula::TimeResolved,
        Formula::Jittered,
        Formula::HomJittered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Formula::Hom => "p2_hom",
            Formula::TimeResolved => "p2_time_resolved",
            Formula::Jittered => "p2_jittered",
            Formula::HomJittered => "hom_jittered",
        }
    }
}

/// One point of the comparison grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub formula: Formula,
    pub delta_t: f64,
    pub cos2_phi: f64,
    pub delta: f64,
    pub dtau: f64,
    pub jitter: JitterSpec,
    /// Detection-time differences for the time-resolved formulas.
    pub taus: [f64; 3],
}

/// Carrier used for every grid point (2π·1 GHz keeps all modes narrow-band).
pub fn grid_carrier() -> f64 {
    angular_from_mhz(1000.0)
}

/// Detector resolution used on the grid.
pub const GRID_RESOLUTION: f64 = 1e-9;

/// The documented comparison grid: 125 configurations per formula.
///
/// * `p2_hom`, `p2_time_resolved`: Δ/2π ∈ {0, 0.4, 1, 2.2, 3.8} MHz ×
///   δτ ∈ {−0.6, 0, 0.25, 0.5, 1} δt × cos²φ ∈ {0, 0.25, 0.5, 0.92, 1}, δt = 0.5 μs.
/// * `p2_jittered`: δt ∈ {0.2, 0.3, 0.36, 0.45, 0.6} μs × Δτ ∈ {0, 0.1, 0.25,
///   0.4, 0.53} μs × δω/2π ∈ {0, 0.2, 0.5, 0.72, 1} MHz, cos²φ = 0.92.
/// * `hom_jittered`: δt ∈ {0.2, 0.3, 0.36, 0.45, 0.6} μs × five frequency or
///   five emission widths (δω/2π ∈ {0.1, 0.3, 0.72, 1, 2} MHz, Δτ ∈ {0.05, 0.2,
///   0.4, 0.53, 0.8} μs) × mean delay ∈ {0, 0.3, 0.8} δt restricted to 125 points.
pub fn oracle_grid(formula: Formula) -> Vec<GridPoint> {
    let mut out = Vec::new();
    match formula {
        Formula::Hom | Formula::TimeResolved => {
            let dt = us(0.5);
            for &mhz in &[0.0, 0.4, 1.0, 2.2, 3.8] {
                for &d in &[-0.6, 0.0, 0.25, 0.5, 1.0] {
                    for &c in &[0.0, 0.25, 0.5, 0.92, 1.0] {
                        out.push(GridPoint {
                            formula,
                            delta_t: dt,
                            cos2_phi: c,
                            delta: angular_from_mhz(mhz),
                            dtau: d * dt,
                            jitter: JitterSpec::none(),
                            taus: [-1.3 * dt, 0.35 * dt, 1.1 * dt],
                        });
                    }
                }
            }
        }
        Formula::Jittered => {
            for &dt in &[0.2, 0.3, 0.36, 0.45, 0.6] {
                for &jt in &[0.0, 0.1, 0.25, 0.4, 0.53] {
                    for &mhz in &[0.0, 0.2, 0.5, 0.72, 1.0] {
                        let jitter = JitterSpec::widths(angular_from_mhz(mhz), us(jt)).unwrap();
                        let t1 = widths_from_jitters(us(dt), &jitter).unwrap().t1;
                        out.push(GridPoint {
                            formula,
                            delta_t: us(dt),
                            cos2_phi: 0.92,
                            delta: 0.0,
                            dtau: 0.0,
                            jitter,
                            taus: [-0.3 * t1, 0.9 * t1, 1.7 * t1],
                        });
                    }
                }
            }
        }
        Formula::HomJittered => {
            let freq = [0.1, 0.3, 0.72, 1.0, 2.0];
            let emis = [0.05, 0.2, 0.4, 0.53, 0.8];
            'outer: for &dt in &[0.2, 0.3, 0.36, 0.45, 0.6] {
                for &mean in &[0.0, 0.3, 0.8] {
                    for k in 0..5 {
                        for kind in 0..2 {
                            if out.len() == 125 {
                                break 'outer;
                            }
                            let jitter = if kind == 0 {
                                JitterSpec::widths(angular_from_mhz(freq[k]), 0.0).unwrap()
                            } else {
                                JitterSpec::widths(0.0, us(emis[k])).unwrap()
                            };
                            out.push(GridPoint {
                                formula,
                                delta_t: us(dt),
                                cos2_phi: 1.0,
                                delta: 0.0,
                                dtau: mean * us(dt),
                                jitter,
                                taus: [0.0; 3],
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

fn grid_pair(point: &GridPoint) -> PairConfig {
    let mode = GaussianMode::new(grid_carrier(), point.delta_t, us(2.0)).unwrap();
    PairConfig::identical(mode, point.cos2_phi, GRID_RESOLUTION).unwrap()
}

/// Evaluate one grid point: closed form against the oracle.
pub fn check_point(point: &GridPoint) -> Result<Vec<OracleCheck>> {
    let pair = grid_pair(point);
    let mut out = Vec::new();
    let label = |extra: String| -> String {
        format!(
            "dt={:.3}us cos2={} delta/2pi={:.3}MHz dtau={:.3}us domega/2pi={:.3}MHz Dtau={:.3}us{}",
            point.delta_t * 1e6,
            point.cos2_phi,
            point.delta / (2.0 * PI * 1e6),
            point.dtau * 1e6,
            point.jitter.sigma_delta / (2.0 * PI * 1e6),
            point.jitter.sigma_dtau * 1e6,
            extra
        )
    };
    match point.formula {
        Formula::Hom => {
            let fixed = JitterSpec::new(point.delta, 0.0, point.dtau, 0.0)?;
            out.push(OracleCheck {
                formula: point.formula.name(),
                label: label(String::new()),
                closed: p2_hom(&pair, point.delta, point.dtau)?,
                numeric: coincidence_numeric_oracle(&pair, &fixed)?,
            });
        }
        Formula::TimeResolved => {
            let fixed = JitterSpec::new(point.delta, 0.0, point.dtau, 0.0)?;
            for &tau in &point.taus {
                out.push(OracleCheck {
                    formula: point.formula.name(),
                    label: label(format!(" tau={:.3}us", tau * 1e6)),
                    closed: p2_time_resolved(&pair, point.delta, point.dtau, tau)?,
                    numeric: p2_numeric_oracle(&pair, &fixed, tau)?,
                });
            }
        }
        Formula::Jittered => {
            for &tau in &point.taus {
                out.push(OracleCheck {
                    formula: point.formula.name(),
                    label: label(format!(" tau={:.3}us", tau * 1e6)),
                    closed: p2_jittered(tau, point.delta_t, &point.jitter, point.cos2_phi, GRID_RESOLUTION)?,
                    numeric: p2_numeric_oracle(&pair, &point.jitter, tau)?,
                });
            }
        }
        Formula::HomJittered => {
            let shifted = JitterSpec {
                mean_dtau: point.dtau,
                ..point.jitter
            };
            out.push(OracleCheck {
                formula: point.formula.name(),
                label: label(String::new()),
                closed: hom_jittered(point.dtau, point.delta_t, &point.jitter, point.cos2_phi)?,
                numeric: coincidence_numeric_oracle(&pair, &shifted)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(cos2: f64) -> PairConfig {
        let mode = GaussianMode::new(grid_carrier(), us(0.5), us(2.0)).unwrap();
        PairConfig::identical(mode, cos2, 1e-9).unwrap()
    }

    #[test]
    fn zero_jitter_matches_time_resolved_on_41_points() {
        let delta = angular_from_mhz(1.7);
        let dtau = us(0.2);
        let jitter = JitterSpec::new(delta, 0.0, dtau, 0.0).unwrap();
        for cos2 in [0.0, 0.92, 1.0] {
            let p = pair(cos2);
            for k in -20..=20 {
                let tau = k as f64 * us(0.1);
                let closed = p2_time_resolved(&p, delta, dtau, tau).unwrap();
                let numeric = p2_numeric_oracle(&p, &jitter, tau).unwrap();
                if numeric.abs() > SIGNIFICANCE_FLOOR {
                    assert!(
                        (closed - numeric).abs() <= 1e-6 * numeric.abs(),
                        "cos2={cos2} tau={tau}: {closed} vs {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn frequency_jitter_matches_closed_form() {
        let p = pair(1.0);
        let jitter = JitterSpec::widths(angular_from_mhz(0.8), 0.0).unwrap();
        for k in [-12, -5, 1, 4, 9] {
            let tau = k as f64 * us(0.1);
            let closed = p2_jittered(tau, us(0.5), &jitter, 1.0, 1e-9).unwrap();
            let numeric = p2_numeric_oracle(&p, &jitter, tau).unwrap();
            assert!(
                (closed - numeric).abs() <= 1e-6 * numeric.abs(),
                "{closed} vs {numeric}"
            );
        }
    }

    #[test]
    fn mean_frequency_difference_matches_beat_form() {
        let p = pair(0.92);
        let jitter = JitterSpec::new(angular_from_mhz(2.8), angular_from_mhz(0.5), 0.0, us(0.3)).unwrap();
        for k in [-9, -4, 1, 3, 7] {
            let tau = k as f64 * us(0.1);
            let closed = p2_jittered(tau, us(0.5), &jitter, 0.92, 1e-9).unwrap();
            let numeric = p2_numeric_oracle(&p, &jitter, tau).unwrap();
            assert!(
                (closed - numeric).abs() <= 1e-6 * numeric.abs(),
                "{closed} vs {numeric}"
            );
        }
    }

    #[test]
    fn far_tails_are_negligible() {
        let p = pair(0.5);
        let jitter = JitterSpec::widths(angular_from_mhz(0.5), us(0.3)).unwrap();
        let reach = 10.0 * (us(0.5) + us(0.3)) * 1.01;
        for tau in [reach, -reach] {
            assert!(p2_numeric_oracle(&p, &jitter, tau).unwrap() < 1e-12);
        }
    }

    #[test]
    fn unequal_durations_are_supported() {
        let m1 = GaussianMode::new(grid_carrier(), us(0.4), us(2.0)).unwrap();
        let m2 = GaussianMode::new(grid_carrier(), us(0.6), us(2.0)).unwrap();
        let p = PairConfig::new(m1, m2, 0.0, 1e-9, 1.0, 1.0).unwrap();
        // Perpendicular photons never interfere: the coincidence probability is ½.
        let c = coincidence_numeric_oracle(&p, &JitterSpec::none()).unwrap();
        assert!((c - 0.5).abs() < 1e-8);
    }

    #[test]
    fn quadrature_failure_surfaces() {
        let p = pair(0.5);
        let tol = OracleTolerance {
            inner: Tolerance {
                abs: 0.0,
                rel: 1e-16,
                max_panels: 8,
            },
            outer: Tolerance::default(),
        };
        let err = p2_numeric_oracle_with(&p, &JitterSpec::none(), us(0.3), tol).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn grid_sizes() {
        for f in Formula::ALL {
            assert!(oracle_grid(f).len() >= 125, "{}", f.name());
        }
    }
}
