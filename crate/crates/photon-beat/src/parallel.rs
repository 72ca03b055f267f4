//! Multi-threaded generation and histogramming. Results are identical to the
//! sequential functions in the core crate for any thread count.

use photon_beat_core::histogram::{build_histogram, CoincidenceHistogram};
use photon_beat_core::synthesis::{p1_window, pair_window, DetectionEvent, RunConfig, RunStats};
use photon_beat_core::Result;
use rayon::prelude::*;

pub const CHUNK_TRIGGERS: u64 = 8192;

fn chunks(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(CHUNK_TRIGGERS))
        .map(|c| (c * CHUNK_TRIGGERS, ((c + 1) * CHUNK_TRIGGERS).min(n)))
        .collect()
}

pub fn generate_pair_run(cfg: &RunConfig) -> Result<(Vec<DetectionEvent>, RunStats)> {
    cfg.validate()?;
    let parts = chunks(cfg.n_triggers)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut stats = RunStats::default();
            let mut events = Vec::new();
            for idx in lo..hi {
                let record = pair_window(cfg, idx)?;
                stats.record(record.outcome);
                events.extend(record.events);
            }
            Ok((events, stats))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stats = RunStats::default();
    let mut events = Vec::with_capacity(parts.iter().map(|(e, _)| e.len()).sum());
    for (e, s) in parts {
        stats.merge(&s);
        events.extend(e);
    }
    Ok((events, stats))
}

pub fn generate_p1_run(cfg: &RunConfig) -> Result<Vec<DetectionEvent>> {
    cfg.validate()?;
    let parts: Vec<Vec<DetectionEvent>> = chunks(cfg.n_triggers)
        .into_par_iter()
        .map(|(lo, hi)| (lo..hi).flat_map(|i| p1_window(cfg, i)).collect())
        .collect();
    Ok(parts.concat())
}

/// Histogram of events grouped by trigger, built over slices that never
/// split a trigger window and merged in order.
pub fn histogram(events: &[DetectionEvent], bin_width: f64, pair_delay: f64) -> Result<CoincidenceHistogram> {
    histogram_in_slices(events, bin_width, pair_delay, 1 << 16)
}

fn histogram_in_slices(
    events: &[DetectionEvent],
    bin_width: f64,
    pair_delay: f64,
    target: usize,
) -> Result<CoincidenceHistogram> {
    if events.len() <= target || events.windows(2).any(|w| w[1].trigger_index < w[0].trigger_index) {
        return build_histogram(events, bin_width, pair_delay);
    }
    let mut bounds = vec![0];
    let mut at = target;
    while at < events.len() {
        let idx = events[at - 1].trigger_index;
        while at < events.len() && events[at].trigger_index == idx {
            at += 1;
        }
        bounds.push(at);
        at += target;
    }
    bounds.push(events.len());
    bounds.dedup();
    let parts = bounds
        .par_windows(2)
        .map(|w| build_histogram(&events[w[0]..w[1]], bin_width, pair_delay))
        .collect::<Result<Vec<_>>>()?;
    let mut total = parts[0].clone();
    for p in &parts[1..] {
        total = total.merge(p)?;
    }
    Ok(total)
}
