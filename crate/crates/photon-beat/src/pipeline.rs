//! Simulation, histogramming, fitting and characterization chained together.

use photon_beat_core::characterize::{characterize_with, Characterization};
use photon_beat_core::fit::{fit_beat, fit_dip, fit_peak, FitResult};
use photon_beat_core::histogram::{
    autocorrelation, correct_background, correct_background_fitted, detection_density, Autocorrelation,
    CoincidenceHistogram,
};
use photon_beat_core::synthesis::{DetectionEvent, RunConfig};
use serde::Serialize;

use crate::config::{AnalysisSettings, BackgroundMode, Settings};
use crate::error::{CliError, CliResult};
use crate::io::FORMAT;
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    /// Orthogonal polarizations: no interference.
    Perpendicular,
    /// The configured overlap, without the imposed frequency difference.
    Parallel,
    /// The configured overlap and frequency difference.
    Beating,
    /// One photon stream onto a single detector pair, for the autocorrelation.
    Single,
}

impl RunKind {
    pub fn seed_offset(self) -> u64 {
        match self {
            RunKind::Perpendicular => 0,
            RunKind::Parallel => 1,
            RunKind::Single => 2,
            RunKind::Beating => 3,
        }
    }
}

/// Configuration of one run of the chain. Runs draw from seeds offset from the
/// configured one so that they are independent.
pub fn run_config(settings: &Settings, kind: RunKind) -> RunConfig {
    let mut cfg = settings.run;
    cfg.seed = cfg.seed.wrapping_add(kind.seed_offset());
    match kind {
        RunKind::Perpendicular => {
            cfg.cos2_phi = 0.0;
            cfg.jitter.mean_delta = 0.0;
        }
        RunKind::Parallel => cfg.jitter.mean_delta = 0.0,
        RunKind::Beating => {}
        RunKind::Single => cfg.n_triggers = settings.analysis.p1_triggers,
    }
    cfg
}

pub fn simulate(cfg: &RunConfig, kind: RunKind) -> CliResult<Vec<DetectionEvent>> {
    Ok(match kind {
        RunKind::Single => parallel::generate_p1_run(cfg)?,
        _ => parallel::generate_pair_run(cfg)?.0,
    })
}

/// Raw histogram with its background estimate applied.
pub fn histogram(events: &[DetectionEvent], cfg: &RunConfig, a: &AnalysisSettings) -> CliResult<CoincidenceHistogram> {
    let h = parallel::histogram(events, a.bin_width, cfg.pair_delay)?;
    Ok(match a.background {
        BackgroundMode::APriori => {
            let rate = 0.5 * (cfg.dark_rate[0] + cfg.dark_rate[1]);
            correct_background(&h, rate, cfg.exposure())
        }
        BackgroundMode::Fitted => correct_background_fitted(&h, a.background_min_tau)?,
    })
}

/// Peak, dip and (with a beating histogram) beat fits.
pub fn fit(
    perpendicular: &CoincidenceHistogram,
    parallel: &CoincidenceHistogram,
    beating: Option<&CoincidenceHistogram>,
    cos2_phi: f64,
) -> CliResult<FitResult> {
    let analysis = CliError::Analysis;
    let peak = fit_peak(&perpendicular.curve()).map_err(analysis)?;
    let dip = match fit_dip(&parallel.curve(), &peak, cos2_phi) {
        Err(e @ photon_beat_core::Error::Domain(_)) => return Err(e.into()),
        r => r.map_err(analysis)?,
    };
    let mut result = FitResult::from_peak(&peak).with_dip(&dip, cos2_phi);
    if let Some(b) = beating {
        let beat = fit_beat(&b.curve(), &peak, dip.inv_t2_sq, cos2_phi).map_err(analysis)?;
        result = result.with_beat(&beat);
    }
    Ok(result)
}

pub fn single_stream_autocorrelation(
    events: &[DetectionEvent],
    cfg: &RunConfig,
    a: &AnalysisSettings,
) -> CliResult<Autocorrelation> {
    let dark = cfg.dark_rate[0] + cfg.dark_rate[1];
    let density = detection_density(events, a.bin_width, cfg.trigger_period, cfg.n_triggers, dark)?;
    autocorrelation(&density).map_err(CliError::Analysis)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub events: Vec<(RunKind, Vec<DetectionEvent>)>,
    pub histograms: Vec<(RunKind, CoincidenceHistogram)>,
    pub fit: FitResult,
    pub characterization: Characterization,
    pub autocorrelation: Option<Autocorrelation>,
}

impl ChainOutput {
    pub fn histogram(&self, kind: RunKind) -> Option<&CoincidenceHistogram> {
        self.histograms.iter().find(|(k, _)| *k == kind).map(|(_, h)| h)
    }
}

/// The whole chain. A beating run is added when a frequency difference is
/// configured, the single-stream run when `p1_triggers > 0`.
pub fn run_chain(settings: &Settings, keep_events: bool) -> CliResult<ChainOutput> {
    let mut kinds = vec![RunKind::Perpendicular, RunKind::Parallel];
    if settings.run.jitter.mean_delta != 0.0 {
        kinds.push(RunKind::Beating);
    }
    let mut events = Vec::new();
    let mut histograms = Vec::new();
    for &kind in &kinds {
        let cfg = run_config(settings, kind);
        let ev = simulate(&cfg, kind)?;
        histograms.push((kind, histogram(&ev, &cfg, &settings.analysis)?));
        if keep_events {
            events.push((kind, ev));
        }
    }
    let find = |k: RunKind| histograms.iter().find(|(kind, _)| *kind == k).map(|(_, h)| h);
    let result = fit(
        find(RunKind::Perpendicular).expect("perpendicular run"),
        find(RunKind::Parallel).expect("parallel run"),
        find(RunKind::Beating),
        settings.run.cos2_phi,
    )?;
    let widths = result.widths().expect("dip fitted");
    let characterization = characterize_with(&widths, settings.analysis.locus_points)?;
    let autocorrelation = if settings.analysis.p1_triggers > 0 {
        let cfg = run_config(settings, RunKind::Single);
        let ev = simulate(&cfg, RunKind::Single)?;
        let a = single_stream_autocorrelation(&ev, &cfg, &settings.analysis)?;
        if keep_events {
            events.push((RunKind::Single, ev));
        }
        Some(a)
    } else {
        None
    };
    Ok(ChainOutput {
        events,
        histograms,
        fit: result,
        characterization,
        autocorrelation,
    })
}

/// Summary of a characterization in display units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub format: String,
    pub t1_us: f64,
    pub t2_us: Option<f64>,
    pub min_duration_us: f64,
    pub max_emission_jitter_us: f64,
    pub max_frequency_jitter_over_2pi_mhz: f64,
    pub coherent_fraction: f64,
    pub regime: String,
    pub delta_over_2pi_mhz: Option<f64>,
    pub t3_us: Option<f64>,
    pub t3_over_t1: Option<f64>,
}

impl Report {
    pub fn new(c: &Characterization, delta: Option<f64>, t3: Option<f64>) -> Self {
        use photon_beat_core::units::{mhz_from_angular, to_us};
        let t2 = c.widths.t2();
        Self {
            format: FORMAT.to_string(),
            t1_us: to_us(c.widths.t1),
            t2_us: t2.is_finite().then(|| to_us(t2)),
            min_duration_us: to_us(c.min_duration),
            max_emission_jitter_us: to_us(c.max_emission_jitter),
            max_frequency_jitter_over_2pi_mhz: mhz_from_angular(c.max_frequency_jitter),
            coherent_fraction: c.coherent_fraction(),
            regime: c.regime.name().to_string(),
            delta_over_2pi_mhz: delta.map(mhz_from_angular),
            t3_us: t3.map(to_us),
            t3_over_t1: t3.map(|t| t / c.widths.t1),
        }
    }

    pub fn text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "T1 = {:.4} us", self.t1_us);
        match self.t2_us {
            Some(t2) => {
                let _ = writeln!(s, "T2 = {t2:.4} us");
            }
            None => s.push_str("T2 = inf (no dip broadening)\n"),
        }
        let _ = writeln!(s, "photon duration     dt >= {:.4} us", self.min_duration_us);
        let _ = writeln!(s, "emission-time jitter    <= {:.4} us", self.max_emission_jitter_us);
        let _ = writeln!(
            s,
            "frequency jitter /2pi   <= {:.4} MHz",
            self.max_frequency_jitter_over_2pi_mhz
        );
        let _ = writeln!(s, "regime: {}", self.regime);
        if let Some(d) = self.delta_over_2pi_mhz {
            let _ = writeln!(s, "Delta/2pi = {d:.4} MHz");
        }
        if let (Some(t3), Some(r)) = (self.t3_us, self.t3_over_t1) {
            let _ = writeln!(s, "T3 = {t3:.4} us (T3/T1 = {r:.4})");
        }
        s
    }
}
