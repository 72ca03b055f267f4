//! Theory curves on a symmetric grid.

use photon_beat_core::interference::{p2_hom, p2_time_resolved};
use photon_beat_core::jitter::{hom_jittered, p2_jittered, widths_from_jitters};
use photon_beat_core::units::angular_from_mhz;
use photon_beat_core::{GaussianMode, JitterSpec, PairConfig};

use crate::error::{CliError, CliResult};
use crate::io::curve_csv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Model {
    /// Coincidence probability against arrival delay.
    Hom,
    /// Joint detection probability against detection-time difference.
    TimeResolved,
    /// Time-resolved, averaged over frequency jitter.
    FreqJitter,
    /// Time-resolved, averaged over emission-time jitter.
    EmissionJitter,
    /// Time-resolved with both jitters.
    Combined,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Hom => "hom",
            Model::TimeResolved => "time-resolved",
            Model::FreqJitter => "freq-jitter",
            Model::EmissionJitter => "emission-jitter",
            Model::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveParams {
    /// Photon duration δt (s).
    pub delta_t: f64,
    /// Arrival delay δτ (s).
    pub dtau: f64,
    /// Frequency difference Δ (rad/s).
    pub delta: f64,
    pub cos2_phi: f64,
    /// Frequency jitter δω (rad/s).
    pub frequency_jitter: f64,
    /// Emission-time jitter Δτ (s).
    pub emission_jitter: f64,
    /// Detector time resolution T (s).
    pub resolution: f64,
    pub points: usize,
    /// Half-width of the grid in units of the curve width.
    pub span: f64,
}

impl Default for CurveParams {
    fn default() -> Self {
        Self {
            delta_t: 0.36e-6,
            dtau: 0.0,
            delta: 0.0,
            cos2_phi: 1.0,
            frequency_jitter: 0.0,
            emission_jitter: 0.0,
            resolution: 1e-9,
            points: 1001,
            span: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub x_name: &'static str,
    pub x: Vec<f64>,
    pub p2: Vec<f64>,
    /// Same model with perpendicular polarization.
    pub reference: Vec<f64>,
}

fn grid(width: f64, span: f64, points: usize) -> Vec<f64> {
    let half = span * width;
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| {
            let x = -half + 2.0 * half * i as f64 / last;
            if 2 * i + 1 == points {
                0.0
            } else {
                x
            }
        })
        .collect()
}

fn usage(message: &str) -> CliError {
    CliError::Usage(message.to_string())
}

pub fn curve(model: Model, p: &CurveParams) -> CliResult<Curve> {
    if p.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    if !(p.span > 0.0 && p.span.is_finite()) {
        return Err(usage("--span must be positive"));
    }
    let mode = GaussianMode::new(angular_from_mhz(1000.0), p.delta_t, 0.0)?;
    let jitter = match model {
        Model::Hom | Model::TimeResolved => JitterSpec::widths(p.frequency_jitter, p.emission_jitter)?,
        Model::FreqJitter if p.emission_jitter != 0.0 => return Err(usage("freq-jitter takes no --dtau-jitter")),
        Model::EmissionJitter if p.frequency_jitter != 0.0 => return Err(usage("emission-jitter takes no --domega")),
        _ => JitterSpec::new(p.delta, p.frequency_jitter, p.dtau, p.emission_jitter)?,
    };
    let eval = |cos2: f64, x: f64| -> CliResult<f64> {
        Ok(match model {
            Model::Hom => {
                if p.frequency_jitter > 0.0 || p.emission_jitter > 0.0 {
                    let j = JitterSpec::new(p.delta, p.frequency_jitter, 0.0, p.emission_jitter)?;
                    hom_jittered(x, p.delta_t, &j, cos2)?
                } else {
                    let pair = PairConfig::identical(mode, cos2, p.resolution)?;
                    p2_hom(&pair, p.delta, x)?
                }
            }
            Model::TimeResolved => {
                if jitter != JitterSpec::none() {
                    return Err(usage("time-resolved takes no jitter; use combined"));
                }
                let pair = PairConfig::identical(mode, cos2, p.resolution)?;
                p2_time_resolved(&pair, p.delta, p.dtau, x)?
            }
            _ => p2_jittered(x, p.delta_t, &jitter, cos2, p.resolution)?,
        })
    };
    let width = match model {
        Model::Hom => (p.delta_t * p.delta_t + p.emission_jitter * p.emission_jitter).sqrt(),
        Model::TimeResolved => p.delta_t + p.dtau.abs(),
        _ => widths_from_jitters(p.delta_t, &jitter)?.t1,
    };
    let x = grid(width, p.span, p.points);
    let p2 = x.iter().map(|&t| eval(p.cos2_phi, t)).collect::<CliResult<Vec<_>>>()?;
    let reference = x.iter().map(|&t| eval(0.0, t)).collect::<CliResult<Vec<_>>>()?;
    Ok(Curve {
        x_name: if model == Model::Hom { "dtau_s" } else { "tau_s" },
        x,
        p2,
        reference,
    })
}

pub fn curve_text(model: Model, p: &CurveParams, c: &Curve) -> String {
    let comments = [
        format!("model = {}", model.name()),
        format!(
            "delta_t_s = {} dtau_s = {} delta_rad_per_s = {} cos2_phi = {} frequency_jitter_rad_per_s = {} emission_jitter_s = {} resolution_s = {}",
            p.delta_t, p.dtau, p.delta, p.cos2_phi, p.frequency_jitter, p.emission_jitter, p.resolution
        ),
    ];
    let rows: Vec<Vec<f64>> = (0..c.x.len()).map(|i| vec![c.x[i], c.p2[i], c.reference[i]]).collect();
    curve_csv(&[c.x_name, "p2", "p2_perpendicular"], &comments, &rows)
}
