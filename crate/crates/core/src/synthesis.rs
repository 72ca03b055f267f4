//! Seeded Monte Carlo generation of time-tagged detection events.
//!
//! Every trigger window draws from its own ChaCha stream keyed by
//! `(seed, run kind, trigger index)`, so windows can be generated in any order
//! or in parallel and still produce identical event lists.
//!
//! Pair runs follow the two-fiber geometry: each of the two arrival slots of a
//! window (long-fiber photon from the previous trigger, short-fiber photon from
//! the current one) is occupied with probability
//! `generation_efficiency × routing_probability`. With both slots occupied the
//! photons meet on the beam splitter; the joint detection times are drawn from
//! `G⁽²⁾(t1, t2)` by rejection from the perpendicular-polarization density
//! `2·G_HV`, which bounds `G⁽²⁾` everywhere. An accepted proposal is a
//! coincidence, a rejected one a same-port pair, so the acceptance rate is the
//! coincidence probability itself and total probability is conserved.

use alloc::vec::Vec;
use core::cmp::Ordering;

use libm::floor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::interference::{g2_components, PairConfig};
use crate::units::us;
use crate::wavepacket::{GaussianMode, JitterSpec};

/// Output port detectors behind the beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Detector {
    D3,
    D4,
}

impl Detector {
    pub fn number(self) -> u8 {
        match self {
            Detector::D3 => 3,
            Detector::D4 => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            3 => Some(Detector::D3),
            4 => Some(Detector::D4),
            _ => None,
        }
    }

    fn index(self) -> usize {
        match self {
            Detector::D3 => 0,
            Detector::D4 => 1,
        }
    }
}

/// One click, timed relative to the trigger of its window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub trigger_index: u64,
    pub detector: Detector,
    pub time: f64,
}

impl DetectionEvent {
    /// Order by trigger, then time, then detector.
    pub fn order(&self, other: &Self) -> Ordering {
        self.trigger_index
            .cmp(&other.trigger_index)
            .then(self.time.total_cmp(&other.time))
            .then(self.detector.cmp(&other.detector))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Nominal photon mode; `tau0` is measured from the trigger.
    pub mode: GaussianMode,
    /// Jitter of consecutive photon pairs.
    pub jitter: JitterSpec,
    /// Emission-time jitter width of single photons across the whole stream.
    /// Defaults to the per-photon share of the pair jitter, `Δτ/√2`.
    pub stream_emission_jitter: Option<f64>,
    pub cos2_phi: f64,
    pub n_triggers: u64,
    /// Spacing of the trigger windows (s).
    pub trigger_period: f64,
    /// Travel-time difference of the two fibers (s); coincidences are searched
    /// within ±pair_delay/2.
    pub pair_delay: f64,
    pub generation_efficiency: f64,
    /// Probability that a generated photon is routed into the arm that makes it
    /// arrive in a given window; 0.5 for a random polarizing splitter.
    pub routing_probability: f64,
    pub detector_efficiency: [f64; 2],
    /// Dark-count rate per detector (Hz).
    pub dark_rate: [f64; 2],
    /// Time-tag resolution (s); 0 disables quantization.
    pub time_resolution: f64,
    /// Window over which dark counts accumulate; defaults to the trigger period.
    pub dark_window: Option<f64>,
    pub seed: u64,
}

impl RunConfig {
    /// Defaults modeled on the experiment: 5.28 μs fiber delay and trigger
    /// period, 25 % generation efficiency, random routing, 50 % detectors with
    /// 150 Hz dark counts, 1 ns time tags, photons centered in the window.
    pub fn experiment(mode: GaussianMode, jitter: JitterSpec, cos2_phi: f64, n_triggers: u64, seed: u64) -> Self {
        Self {
            mode,
            jitter,
            stream_emission_jitter: None,
            cos2_phi,
            n_triggers,
            trigger_period: us(5.28),
            pair_delay: us(5.28),
            generation_efficiency: 0.25,
            routing_probability: 0.5,
            detector_efficiency: [0.5, 0.5],
            dark_rate: [150.0, 150.0],
            time_resolution: 1e-9,
            dark_window: None,
            seed,
        }
    }

    /// Every window holds one pair, detectors are perfect and noiseless.
    pub fn ideal(mode: GaussianMode, jitter: JitterSpec, cos2_phi: f64, n_triggers: u64, seed: u64) -> Self {
        Self {
            generation_efficiency: 1.0,
            routing_probability: 1.0,
            detector_efficiency: [1.0, 1.0],
            dark_rate: [0.0, 0.0],
            time_resolution: 0.0,
            ..Self::experiment(mode, jitter, cos2_phi, n_triggers, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.jitter
            .validate()
            .map_err(|_| Error::Config("jitter widths must be finite and non-negative"))?;
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.cos2_phi) {
            return Err(Error::Config("cos2_phi must lie in [0, 1]"));
        }
        if !unit(self.generation_efficiency) || !unit(self.routing_probability) {
            return Err(Error::Config("generation and routing probabilities must lie in [0, 1]"));
        }
        if !self.detector_efficiency.iter().all(|&e| unit(e)) {
            return Err(Error::Config("detector efficiencies must lie in [0, 1]"));
        }
        if !self.dark_rate.iter().all(|&r| r >= 0.0 && r.is_finite()) {
            return Err(Error::Config("dark rates must be finite and non-negative"));
        }
        if !(self.trigger_period > 0.0 && self.trigger_period.is_finite()) {
            return Err(Error::Config("trigger period must be positive"));
        }
        if !(self.pair_delay > 0.0 && self.pair_delay.is_finite()) {
            return Err(Error::Config("pair delay must be positive"));
        }
        if !(self.time_resolution >= 0.0 && self.time_resolution.is_finite()) {
            return Err(Error::Config("time resolution must be non-negative"));
        }
        if let Some(w) = self.stream_emission_jitter {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Config("stream emission jitter must be non-negative"));
            }
        }
        if let Some(w) = self.dark_window {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config("dark-count window must be positive"));
            }
        }
        Ok(())
    }

    /// Probability that a window holds two photons.
    pub fn pairing_probability(&self) -> f64 {
        let q = self.generation_efficiency * self.routing_probability;
        q * q
    }

    /// Emission-time jitter width of each photon of a pair, `Δτ/√2`.
    pub fn pair_photon_jitter(&self) -> f64 {
        self.jitter.sigma_dtau / core::f64::consts::SQRT_2
    }

    pub fn stream_jitter(&self) -> f64 {
        self.stream_emission_jitter.unwrap_or_else(|| self.pair_photon_jitter())
    }

    pub fn dark_window(&self) -> f64 {
        self.dark_window.unwrap_or(self.trigger_period)
    }

    /// Total time over which dark counts were collected, per detector.
    pub fn exposure(&self) -> f64 {
        self.n_triggers as f64 * self.dark_window()
    }
}

/// What happened in one pair-run window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowOutcome {
    Empty,
    Single,
    /// Both photons left through different ports.
    Coincidence,
    /// Both photons left through the same port.
    SamePort,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub windows: u64,
    pub singles: u64,
    pub pairs: u64,
    pub coincidences: u64,
    pub same_port: u64,
}

impl RunStats {
    pub fn record(&mut self, outcome: WindowOutcome) {
        self.windows += 1;
        match outcome {
            WindowOutcome::Empty => {}
            WindowOutcome::Single => self.singles += 1,
            WindowOutcome::Coincidence => {
                self.pairs += 1;
                self.coincidences += 1;
            }
            WindowOutcome::SamePort => {
                self.pairs += 1;
                self.same_port += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &RunStats) {
        self.windows += other.windows;
        self.singles += other.singles;
        self.pairs += other.pairs;
        self.coincidences += other.coincidences;
        self.same_port += other.same_port;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub events: Vec<DetectionEvent>,
    pub outcome: WindowOutcome,
}

const P1_STREAM: u64 = 0x5031_5f72_756e_0001;
const PAIR_STREAM: u64 = 0x7061_6972_5f72_0002;

/// Independent generator for one trigger window.
pub fn window_rng(seed: u64, kind: u64, trigger_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ kind);
    rng.set_stream(trigger_index);
    rng
}

fn normal(mean: f64, sd: f64) -> Normal<f64> {
    Normal::new(mean, sd).expect("standard deviation is finite and non-negative")
}

fn quantize(t: f64, resolution: f64) -> f64 {
    if resolution > 0.0 {
        floor(t / resolution) * resolution
    } else {
        t
    }
}

fn push_dark_counts(cfg: &RunConfig, idx: u64, rng: &mut ChaCha8Rng, out: &mut Vec<DetectionEvent>) {
    let window = cfg.dark_window();
    for detector in [Detector::D3, Detector::D4] {
        let lambda = cfg.dark_rate[detector.index()] * window;
        if lambda <= 0.0 {
            continue;
        }
        let n = Poisson::new(lambda).expect("positive finite rate").sample(rng) as u64;
        for _ in 0..n {
            let t: f64 = rng.random::<f64>() * window;
            out.push(DetectionEvent {
                trigger_index: idx,
                detector,
                time: t,
            });
        }
    }
}

fn finish(cfg: &RunConfig, mut events: Vec<DetectionEvent>) -> Vec<DetectionEvent> {
    for e in events.iter_mut() {
        e.time = quantize(e.time, cfg.time_resolution);
    }
    events.sort_by(|a, b| a.order(b));
    events
}

fn random_detector(rng: &mut ChaCha8Rng) -> Detector {
    if rng.random::<bool>() {
        Detector::D4
    } else {
        Detector::D3
    }
}

/// Events of one window of a single-stream (P⁽¹⁾) run.
pub fn p1_window(cfg: &RunConfig, idx: u64) -> Vec<DetectionEvent> {
    let mut rng = window_rng(cfg.seed, P1_STREAM, idx);
    let mut events = Vec::new();
    if rng.random::<f64>() < cfg.generation_efficiency {
        let detector = random_detector(&mut rng);
        if rng.random::<f64>() < cfg.detector_efficiency[detector.index()] {
            let emission = normal(cfg.mode.tau0, cfg.stream_jitter() / core::f64::consts::SQRT_2).sample(&mut rng);
            let t = normal(emission, cfg.mode.delta_t / 2.0).sample(&mut rng);
            events.push(DetectionEvent {
                trigger_index: idx,
                detector,
                time: t,
            });
        }
    }
    push_dark_counts(cfg, idx, &mut rng, &mut events);
    finish(cfg, events)
}

/// Single-stream run: one photon per trigger with the whole-stream jitter.
pub fn generate_p1_run(cfg: &RunConfig) -> Result<Vec<DetectionEvent>> {
    cfg.validate()?;
    Ok((0..cfg.n_triggers).flat_map(|i| p1_window(cfg, i)).collect())
}

/// Events and outcome of one window of a two-photon interference run.
pub fn pair_window(cfg: &RunConfig, idx: u64) -> Result<WindowRecord> {
    let mut rng = window_rng(cfg.seed, PAIR_STREAM, idx);
    let q = cfg.generation_efficiency * cfg.routing_probability;
    let first = rng.random::<f64>() < q;
    let second = rng.random::<f64>() < q;
    let mut events = Vec::new();
    let eff = cfg.detector_efficiency;
    let photon_sd = cfg.pair_photon_jitter() / core::f64::consts::SQRT_2;
    let envelope_sd = cfg.mode.delta_t / 2.0;

    let outcome = match (first, second) {
        (false, false) => WindowOutcome::Empty,
        (true, false) | (false, true) => {
            let detector = random_detector(&mut rng);
            let emission = normal(cfg.mode.tau0, photon_sd).sample(&mut rng);
            let t = normal(emission, envelope_sd).sample(&mut rng);
            if rng.random::<f64>() < eff[detector.index()] {
                events.push(DetectionEvent {
                    trigger_index: idx,
                    detector,
                    time: t,
                });
            }
            WindowOutcome::Single
        }
        (true, true) => {
            let j = &cfg.jitter;
            let e1 = normal(0.0, photon_sd).sample(&mut rng);
            let e2 = normal(0.0, photon_sd).sample(&mut rng);
            let delta = normal(j.mean_delta, j.sigma_delta / core::f64::consts::SQRT_2).sample(&mut rng);
            let m1 = cfg.mode.with_tau0(cfg.mode.tau0 + e1);
            let m2 = GaussianMode {
                omega0: cfg.mode.omega0 + delta,
                tau0: cfg.mode.tau0 + e2 + j.mean_dtau,
                ..cfg.mode
            };
            let pair = PairConfig {
                mode1: m1,
                mode2: m2,
                cos2_phi: cfg.cos2_phi,
                detector_resolution: 1.0,
                eta3: 1.0,
                eta4: 1.0,
            };
            // Proposal 2·G_HV: an equal mixture of the two product densities.
            let a1 = normal(m1.tau0, envelope_sd).sample(&mut rng);
            let a2 = normal(m2.tau0, envelope_sd).sample(&mut rng);
            let (t1, t2) = if rng.random::<bool>() { (a1, a2) } else { (a2, a1) };
            let g = g2_components(&pair, t1, t2);
            let bound = 2.0 * g.hv;
            if g.total > bound * (1.0 + 1e-12) {
                return Err(Error::Config("rejection envelope 2·G_HV violated"));
            }
            let u: f64 = rng.random();
            if u * bound < g.total {
                if rng.random::<f64>() < eff[0] {
                    events.push(DetectionEvent {
                        trigger_index: idx,
                        detector: Detector::D3,
                        time: t1,
                    });
                }
                if rng.random::<f64>() < eff[1] {
                    events.push(DetectionEvent {
                        trigger_index: idx,
                        detector: Detector::D4,
                        time: t2,
                    });
                }
                WindowOutcome::Coincidence
            } else {
                // A non-number-resolving detector clicks once, on the first
                // photon it registers.
                let detector = random_detector(&mut rng);
                let e = eff[detector.index()];
                let seen_a = rng.random::<f64>() < e;
                let seen_b = rng.random::<f64>() < e;
                let click = match (seen_a, seen_b) {
                    (true, true) => Some(t1.min(t2)),
                    (true, false) => Some(t1),
                    (false, true) => Some(t2),
                    (false, false) => None,
                };
                if let Some(time) = click {
                    events.push(DetectionEvent {
                        trigger_index: idx,
                        detector,
                        time,
                    });
                }
                WindowOutcome::SamePort
            }
        }
    };
    push_dark_counts(cfg, idx, &mut rng, &mut events);
    Ok(WindowRecord {
        events: finish(cfg, events),
        outcome,
    })
}

/// Two-photon interference run.
pub fn generate_pair_run(cfg: &RunConfig) -> Result<Vec<DetectionEvent>> {
    generate_pair_run_with_stats(cfg).map(|(events, _)| events)
}

pub fn generate_pair_run_with_stats(cfg: &RunConfig) -> Result<(Vec<DetectionEvent>, RunStats)> {
    cfg.validate()?;
    let mut stats = RunStats::default();
    let mut events = Vec::new();
    for idx in 0..cfg.n_triggers {
        let record = pair_window(cfg, idx)?;
        stats.record(record.outcome);
        events.extend(record.events);
    }
    Ok((events, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::angular_from_mhz;
    use libm::erf;

    fn mode() -> GaussianMode {
        GaussianMode::new(angular_from_mhz(1000.0), us(0.5), us(2.64)).unwrap()
    }

    #[test]
    fn validation_catches_bad_values() {
        let good = RunConfig::ideal(mode(), JitterSpec::none(), 1.0, 10, 1);
        assert!(good.validate().is_ok());
        let mut bad = good;
        bad.cos2_phi = 1.5;
        assert!(bad.validate().is_err());
        let mut bad = good;
        bad.dark_rate = [-1.0, 0.0];
        assert!(bad.validate().is_err());
        let mut bad = good;
        bad.trigger_period = 0.0;
        assert!(matches!(generate_pair_run(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn ideal_p1_run_has_one_event_per_trigger() {
        let cfg = RunConfig::ideal(mode(), JitterSpec::none(), 0.0, 1000, 3);
        let events = generate_p1_run(&cfg).unwrap();
        assert_eq!(events.len(), 1000);
        for (i, e) in events.iter().enumerate() {
            assert_eq!(e.trigger_index, i as u64);
        }
    }

    #[test]
    fn p1_times_follow_the_mode_density() {
        let cfg = RunConfig::ideal(mode(), JitterSpec::none(), 0.0, 100_000, 11);
        let mut times: Vec<f64> = generate_p1_run(&cfg).unwrap().iter().map(|e| e.time).collect();
        times.sort_by(f64::total_cmp);
        let n = times.len() as f64;
        let sd = cfg.mode.delta_t / 2.0;
        let cdf = |t: f64| 0.5 * (1.0 + erf((t - cfg.mode.tau0) / (sd * core::f64::consts::SQRT_2)));
        let ks = times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let c = cdf(t);
                (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS statistic {ks}");
    }

    #[test]
    fn stream_jitter_adds_its_variance() {
        let w = us(0.6);
        let mut cfg = RunConfig::ideal(mode(), JitterSpec::none(), 0.0, 100_000, 5);
        cfg.stream_emission_jitter = Some(w);
        let times: Vec<f64> = generate_p1_run(&cfg).unwrap().iter().map(|e| e.time).collect();
        let n = times.len() as f64;
        let mean = times.iter().sum::<f64>() / n;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let base = cfg.mode.averaged_variance(0.0);
        let excess = var - base;
        let expected = w * w / 2.0;
        assert!(
            (excess / expected - 1.0).abs() < 0.05,
            "excess {excess} expected {expected}"
        );
    }

    #[test]
    fn same_seed_same_events() {
        let cfg = RunConfig::experiment(mode(), JitterSpec::widths(1e6, us(0.2)).unwrap(), 0.92, 2000, 7);
        assert_eq!(generate_pair_run(&cfg).unwrap(), generate_pair_run(&cfg).unwrap());
        let other = RunConfig { seed: 8, ..cfg };
        assert_ne!(generate_pair_run(&cfg).unwrap(), generate_pair_run(&other).unwrap());
    }

    #[test]
    fn windows_are_order_independent() {
        let cfg = RunConfig::experiment(mode(), JitterSpec::widths(1e6, us(0.2)).unwrap(), 0.5, 500, 9);
        let forward: Vec<_> = (0..500).map(|i| pair_window(&cfg, i).unwrap()).collect();
        for i in (0..500).rev() {
            assert_eq!(pair_window(&cfg, i).unwrap(), forward[i as usize]);
        }
    }

    #[test]
    fn ideal_coalescence_has_no_coincidences() {
        let cfg = RunConfig::ideal(mode(), JitterSpec::none(), 1.0, 20_000, 13);
        let (events, stats) = generate_pair_run_with_stats(&cfg).unwrap();
        assert_eq!(stats.pairs, 20_000);
        assert_eq!(stats.coincidences, 0);
        assert_eq!(events.len(), 20_000);
    }

    #[test]
    fn perpendicular_pairs_split_half_the_time() {
        let cfg = RunConfig::ideal(mode(), JitterSpec::none(), 0.0, 100_000, 17);
        let (_, stats) = generate_pair_run_with_stats(&cfg).unwrap();
        assert_eq!(stats.coincidences + stats.same_port, stats.pairs);
        let p = stats.coincidences as f64 / stats.pairs as f64;
        let sigma = (0.25f64 / stats.pairs as f64).sqrt();
        assert!((p - 0.5).abs() < 4.0 * sigma, "{p}");
    }

    #[test]
    fn quantization_puts_times_on_the_grid() {
        let mut cfg = RunConfig::experiment(mode(), JitterSpec::none(), 0.0, 2000, 19);
        cfg.time_resolution = 1e-9;
        for e in generate_pair_run(&cfg).unwrap() {
            let k = e.time / 1e-9;
            assert!((k - k.round()).abs() < 1e-6);
        }
    }
}
