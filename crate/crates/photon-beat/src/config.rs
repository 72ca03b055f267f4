//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys carry their unit
//! as a suffix; frequencies in `_mhz` are `ω/2π`. Unknown or repeated keys are
//! errors, missing keys take the defaults below.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `delta_t_us` | 0.36 | photon duration δt |
//! | `tau0_us` | 2.64 | nominal photon center after the trigger |
//! | `carrier_mhz` | 1000 | carrier frequency |
//! | `mean_delta_mhz` | 0 | imposed frequency difference Δ |
//! | `frequency_jitter_mhz` | 0 | frequency jitter δω |
//! | `mean_delay_us` | 0 | mean arrival delay δτ |
//! | `emission_jitter_us` | 0 | emission-time jitter Δτ of consecutive photons |
//! | `stream_jitter_us` | Δτ/√2 | per-photon emission-time jitter over the whole stream |
//! | `cos2_phi` | 0.92 | polarization and mode-overlap factor |
//! | `n_triggers` | 1000000 | trigger windows per run |
//! | `trigger_period_us` | 5.28 | trigger spacing |
//! | `pair_delay_us` | 5.28 | fiber travel-time difference |
//! | `generation_efficiency` | 0.25 | photon generation probability per trigger |
//! | `routing_probability` | 0.5 | probability of routing into a given fiber |
//! | `detector_efficiency` | 0.5 | both detectors; or `detector_efficiency_3`, `_4` |
//! | `dark_rate_hz` | 150 | both detectors; or `dark_rate_hz_3`, `_4` |
//! | `time_resolution_us` | 0.001 | time-tag grid, 0 for none |
//! | `dark_window_us` | trigger period | dark-count integration window |
//! | `seed` | 1 | RNG seed |
//! | `bin_width_us` | 0.048 | histogram bin width |
//! | `background` | `a_priori` | `a_priori` or `fitted` |
//! | `background_min_tau_us` | 2.0 | tail start for the fitted background |
//! | `locus_points` | 101 | points of the jitter locus |
//! | `p1_triggers` | 100000 | trigger windows of the single-stream run |

use std::collections::BTreeMap;
use std::fmt::Write as _;

use photon_beat_core::synthesis::RunConfig;
use photon_beat_core::units::{angular_from_mhz, mhz_from_angular, to_us, us};
use photon_beat_core::{GaussianMode, JitterSpec};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackgroundMode {
    APriori,
    Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSettings {
    pub bin_width: f64,
    pub background: BackgroundMode,
    pub background_min_tau: f64,
    pub locus_points: usize,
    pub p1_triggers: u64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            bin_width: us(0.048),
            background: BackgroundMode::APriori,
            background_min_tau: us(2.0),
            locus_points: 101,
            p1_triggers: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub run: RunConfig,
    pub analysis: AnalysisSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Source after optimization: T1 = 0.64 μs, T2 = 0.44 μs, T3 = 0.81 μs.
    Optimized,
    /// Source before optimization: T1 = 0.87 μs, T2 = 0.31 μs, T3 = 1.07 μs.
    Before,
}

impl Preset {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "optimized" => Some(Preset::Optimized),
            "before" => Some(Preset::Before),
            _ => None,
        }
    }
}

impl Default for Settings {
    fn default() -> Self {
        let mode = GaussianMode::new(angular_from_mhz(1000.0), us(0.36), us(2.64)).expect("valid default mode");
        Self {
            run: RunConfig::experiment(mode, JitterSpec::none(), 0.92, 1_000_000, 1),
            analysis: AnalysisSettings::default(),
        }
    }
}

const KEYS: &[&str] = &[
    "delta_t_us",
    "tau0_us",
    "carrier_mhz",
    "mean_delta_mhz",
    "frequency_jitter_mhz",
    "mean_delay_us",
    "emission_jitter_us",
    "stream_jitter_us",
    "cos2_phi",
    "n_triggers",
    "trigger_period_us",
    "pair_delay_us",
    "generation_efficiency",
    "routing_probability",
    "detector_efficiency",
    "detector_efficiency_3",
    "detector_efficiency_4",
    "dark_rate_hz",
    "dark_rate_hz_3",
    "dark_rate_hz_4",
    "time_resolution_us",
    "dark_window_us",
    "seed",
    "bin_width_us",
    "background",
    "background_min_tau_us",
    "locus_points",
    "p1_triggers",
];

fn parse_map(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", n + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: `{key}` given twice", n + 1)));
        }
    }
    Ok(map)
}

struct Reader(BTreeMap<String, String>);

impl Reader {
    fn real(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Config(format!("`{key}`: `{v}` is not a finite number"))),
        }
    }

    fn optional(&self, key: &str) -> CliResult<Option<f64>> {
        if self.0.contains_key(key) {
            self.real(key, 0.0).map(Some)
        } else {
            Ok(None)
        }
    }

    fn integer(&self, key: &str, default: u64) -> CliResult<u64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("`{key}`: `{v}` is not a non-negative integer"))),
        }
    }

    fn pair(&self, key: &str, default: f64) -> CliResult<[f64; 2]> {
        let both = self.real(key, default)?;
        Ok([
            self.real(&format!("{key}_3"), both)?,
            self.real(&format!("{key}_4"), both)?,
        ])
    }
}

/// Display-unit text of an SI value: the shortest decimal that converts back
/// to exactly `si`, preferring 12 significant digits.
fn unit_text(si: f64, to_unit: fn(f64) -> f64, from_unit: fn(f64) -> f64) -> String {
    let v = to_unit(si);
    let short: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    if from_unit(short) == si {
        short.to_string()
    } else {
        v.to_string()
    }
}

impl Settings {
    pub fn from_text(text: &str) -> CliResult<Self> {
        let r = Reader(parse_map(text)?);
        let d = Settings::default();
        let mode = GaussianMode::new(
            angular_from_mhz(r.real("carrier_mhz", mhz_from_angular(d.run.mode.omega0))?),
            us(r.real("delta_t_us", to_us(d.run.mode.delta_t))?),
            us(r.real("tau0_us", to_us(d.run.mode.tau0))?),
        )
        .map_err(|e| CliError::Config(format!("photon mode: {e}")))?;
        let jitter = JitterSpec::new(
            angular_from_mhz(r.real("mean_delta_mhz", 0.0)?),
            angular_from_mhz(r.real("frequency_jitter_mhz", 0.0)?),
            us(r.real("mean_delay_us", 0.0)?),
            us(r.real("emission_jitter_us", 0.0)?),
        )
        .map_err(|e| CliError::Config(format!("jitter: {e}")))?;
        let run = RunConfig {
            mode,
            jitter,
            stream_emission_jitter: r.optional("stream_jitter_us")?.map(us),
            cos2_phi: r.real("cos2_phi", d.run.cos2_phi)?,
            n_triggers: r.integer("n_triggers", d.run.n_triggers)?,
            trigger_period: us(r.real("trigger_period_us", to_us(d.run.trigger_period))?),
            pair_delay: us(r.real("pair_delay_us", to_us(d.run.pair_delay))?),
            generation_efficiency: r.real("generation_efficiency", d.run.generation_efficiency)?,
            routing_probability: r.real("routing_probability", d.run.routing_probability)?,
            detector_efficiency: r.pair("detector_efficiency", d.run.detector_efficiency[0])?,
            dark_rate: r.pair("dark_rate_hz", d.run.dark_rate[0])?,
            time_resolution: us(r.real("time_resolution_us", to_us(d.run.time_resolution))?),
            dark_window: r.optional("dark_window_us")?.map(us),
            seed: r.integer("seed", d.run.seed)?,
        };
        run.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let background = match r.0.get("background").map(String::as_str) {
            None | Some("a_priori") => BackgroundMode::APriori,
            Some("fitted") => BackgroundMode::Fitted,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "`background`: `{other}` is neither `a_priori` nor `fitted`"
                )))
            }
        };
        let analysis = AnalysisSettings {
            bin_width: us(r.real("bin_width_us", to_us(d.analysis.bin_width))?),
            background,
            background_min_tau: us(r.real("background_min_tau_us", to_us(d.analysis.background_min_tau))?),
            locus_points: r.integer("locus_points", d.analysis.locus_points as u64)? as usize,
            p1_triggers: r.integer("p1_triggers", d.analysis.p1_triggers)?,
        };
        if !(analysis.bin_width >= 1e-9 * (1.0 - 1e-12) && analysis.bin_width <= 1e-6 * (1.0 + 1e-12)) {
            return Err(CliError::Config("`bin_width_us` must lie between 0.001 and 1".into()));
        }
        if analysis.locus_points < 2 {
            return Err(CliError::Config("`locus_points` must be at least 2".into()));
        }
        Ok(Self { run, analysis })
    }

    /// Every key with its current value; parses back to the same settings.
    pub fn to_text(&self) -> String {
        let r = &self.run;
        let a = &self.analysis;
        let mut s = String::from("# photon-beat v1\n");
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("delta_t_us", unit_text(r.mode.delta_t, to_us, us));
        put("tau0_us", unit_text(r.mode.tau0, to_us, us));
        put(
            "carrier_mhz",
            unit_text(r.mode.omega0, mhz_from_angular, angular_from_mhz),
        );
        put(
            "mean_delta_mhz",
            unit_text(r.jitter.mean_delta, mhz_from_angular, angular_from_mhz),
        );
        put(
            "frequency_jitter_mhz",
            unit_text(r.jitter.sigma_delta, mhz_from_angular, angular_from_mhz),
        );
        put("mean_delay_us", unit_text(r.jitter.mean_dtau, to_us, us));
        put("emission_jitter_us", unit_text(r.jitter.sigma_dtau, to_us, us));
        if let Some(w) = r.stream_emission_jitter {
            put("stream_jitter_us", unit_text(w, to_us, us));
        }
        put("cos2_phi", r.cos2_phi.to_string());
        put("n_triggers", r.n_triggers.to_string());
        put("trigger_period_us", unit_text(r.trigger_period, to_us, us));
        put("pair_delay_us", unit_text(r.pair_delay, to_us, us));
        put("generation_efficiency", r.generation_efficiency.to_string());
        put("routing_probability", r.routing_probability.to_string());
        put("detector_efficiency_3", r.detector_efficiency[0].to_string());
        put("detector_efficiency_4", r.detector_efficiency[1].to_string());
        put("dark_rate_hz_3", r.dark_rate[0].to_string());
        put("dark_rate_hz_4", r.dark_rate[1].to_string());
        put("time_resolution_us", unit_text(r.time_resolution, to_us, us));
        if let Some(w) = r.dark_window {
            put("dark_window_us", unit_text(w, to_us, us));
        }
        put("seed", r.seed.to_string());
        put("bin_width_us", unit_text(a.bin_width, to_us, us));
        put(
            "background",
            match a.background {
                BackgroundMode::APriori => "a_priori",
                BackgroundMode::Fitted => "fitted",
            }
            .to_string(),
        );
        put("background_min_tau_us", unit_text(a.background_min_tau, to_us, us));
        put("locus_points", a.locus_points.to_string());
        put("p1_triggers", a.p1_triggers.to_string());
        s
    }

    pub fn preset(preset: Preset) -> Self {
        // Durations and jitters are the pure-emission inversion of the
        // measured widths, the stream jitter reproduces the measured T3.
        let (delta_t, emission, stream, bin, triggers) = match preset {
            Preset::Optimized => (0.3626, 0.5274, 0.5122, 0.048, 1_100_000),
            Preset::Before => (0.29, 0.82, 0.7283, 0.120, 580_000),
        };
        let mut s = Settings::default();
        s.run.mode.delta_t = us(delta_t);
        s.run.jitter = JitterSpec::widths(0.0, us(emission)).expect("valid preset jitter");
        s.run.stream_emission_jitter = Some(us(stream));
        s.run.n_triggers = triggers;
        s.analysis.bin_width = us(bin);
        s
    }
}
