//! Coincidence histograms, background subtraction and the single-detector
//! autocorrelation.

use alloc::vec;
use alloc::vec::Vec;

use libm::{floor, round};

use crate::error::{Error, Result};
use crate::fit::{fit_peak, CurveData};
use crate::synthesis::{DetectionEvent, Detector};

/// Histogram of `τ = t4 − t3` over coincidences within one trigger window.
/// Bins are centered on `k·bin_width`, `k = −J..=J`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub bin_width: f64,
    pub half_bins: usize,
    pub counts: Vec<u64>,
    /// Expected accidental counts per bin, already estimated; zero until a
    /// background model is applied.
    pub background_per_bin: f64,
    pub total_detections: u64,
}

impl CoincidenceHistogram {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 - self.half_bins as f64) * self.bin_width
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts minus background, floored at zero.
    pub fn corrected(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| (c as f64 - self.background_per_bin).max(0.0))
            .collect()
    }

    pub fn with_background(mut self, per_bin: f64) -> Self {
        self.background_per_bin = per_bin.max(0.0);
        self
    }

    /// Background-corrected curve for Poisson fitting. Values are not
    /// clamped, so `value + background` restores the raw counts.
    pub fn curve(&self) -> CurveData {
        CurveData {
            tau: self.centers(),
            value: self
                .counts
                .iter()
                .map(|&c| c as f64 - self.background_per_bin)
                .collect(),
            variance: self.counts.iter().map(|&c| (c as f64).max(1.0)).collect(),
            poisson_background: Some(self.background_per_bin),
            bin_width: Some(self.bin_width),
        }
    }

    /// Sum of two histograms with the same binning.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.bin_width != other.bin_width || self.half_bins != other.half_bins {
            return Err(Error::Domain("histograms have different binning"));
        }
        Ok(Self {
            bin_width: self.bin_width,
            half_bins: self.half_bins,
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
            background_per_bin: self.background_per_bin + other.background_per_bin,
            total_detections: self.total_detections + other.total_detections,
        })
    }
}

/// Number of bins on each side of zero that fit inside `±pair_delay/2`.
pub fn half_bin_count(bin_width: f64, pair_delay: f64) -> usize {
    let j = floor(pair_delay / 2.0 / bin_width - 0.5);
    if j > 0.0 {
        j as usize
    } else {
        0
    }
}

/// Pairs every detector-3 click with every detector-4 click of the same
/// trigger window. Events must be grouped by trigger index.
pub fn build_histogram(events: &[DetectionEvent], bin_width: f64, pair_delay: f64) -> Result<CoincidenceHistogram> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::Domain("bin width must be positive"));
    }
    if !(pair_delay > 0.0 && pair_delay.is_finite()) {
        return Err(Error::Domain("pair delay must be positive"));
    }
    let half = half_bin_count(bin_width, pair_delay);
    let mut counts = vec![0u64; 2 * half + 1];
    let mut start = 0;
    while start < events.len() {
        let idx = events[start].trigger_index;
        let mut end = start;
        while end < events.len() && events[end].trigger_index == idx {
            end += 1;
        }
        let window = &events[start..end];
        for a in window.iter().filter(|e| e.detector == Detector::D3) {
            for b in window.iter().filter(|e| e.detector == Detector::D4) {
                let k = round((b.time - a.time) / bin_width);
                if k.abs() <= half as f64 {
                    counts[(k as i64 + half as i64) as usize] += 1;
                }
            }
        }
        start = end;
    }
    if events.windows(2).any(|w| w[1].trigger_index < w[0].trigger_index) {
        return Err(Error::Domain("events must be sorted by trigger index"));
    }
    Ok(CoincidenceHistogram {
        bin_width,
        half_bins: half,
        counts,
        background_per_bin: 0.0,
        total_detections: events.len() as u64,
    })
}

/// Expected accidental coincidences per bin from dark counts.
///
/// Dark clicks are spread uniformly over the exposure, so each detector click
/// finds a dark click of the other detector in a given bin with probability
/// `bin_width × dark_rate`. Dark-dark pairs are included through the second
/// term.
pub fn accidental_background(bin_width: f64, dark_rate: f64, exposure: f64, total_detections: u64) -> f64 {
    let darks = 2.0 * dark_rate * exposure;
    let signal = (total_detections as f64 - darks).max(0.0);
    bin_width * dark_rate * signal + bin_width * dark_rate * dark_rate * exposure
}

/// Background from the known dark-count rate (per detector) and exposure.
pub fn correct_background(hist: &CoincidenceHistogram, dark_rate: f64, exposure: f64) -> CoincidenceHistogram {
    let bg = accidental_background(hist.bin_width, dark_rate, exposure, hist.total_detections);
    hist.clone().with_background(bg)
}

/// Background taken as the mean count of the bins with `|τ| ≥ min_abs_tau`.
pub fn correct_background_fitted(hist: &CoincidenceHistogram, min_abs_tau: f64) -> Result<CoincidenceHistogram> {
    let tail: Vec<f64> = (0..hist.len())
        .filter(|&i| hist.center(i).abs() >= min_abs_tau)
        .map(|i| hist.counts[i] as f64)
        .collect();
    if tail.is_empty() {
        return Err(Error::Domain("no histogram bins beyond the background threshold"));
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    Ok(hist.clone().with_background(mean))
}

/// Binned detection-time density of one photon stream.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDensity {
    pub bin_width: f64,
    /// Lower edge of the first bin.
    pub start: f64,
    pub values: Vec<f64>,
}

impl BinnedDensity {
    pub fn center(&self, i: usize) -> f64 {
        self.start + (i as f64 + 0.5) * self.bin_width
    }
}

/// Histogram of detection times over `[0, window)`, normalized per trigger.
/// With `dark` = `(summed dark rate, n_triggers)` the flat dark contribution
/// is subtracted first.
pub fn detection_density(
    events: &[DetectionEvent],
    bin_width: f64,
    window: f64,
    n_triggers: u64,
    dark_rate: f64,
) -> Result<BinnedDensity> {
    if !(bin_width > 0.0 && window > bin_width) {
        return Err(Error::Domain("bin width must be positive and below the window"));
    }
    if n_triggers == 0 {
        return Err(Error::Domain("no triggers"));
    }
    let n_bins = floor(window / bin_width) as usize;
    let mut values = vec![0.0; n_bins];
    for e in events {
        let k = floor(e.time / bin_width);
        if k >= 0.0 && (k as usize) < n_bins {
            values[k as usize] += 1.0;
        }
    }
    let dark_per_bin = dark_rate * bin_width * n_triggers as f64;
    for v in values.iter_mut() {
        *v = (*v - dark_per_bin).max(0.0) / n_triggers as f64;
    }
    Ok(BinnedDensity {
        bin_width,
        start: 0.0,
        values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    pub bin_width: f64,
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    /// Width `T3` of a Gaussian fitted to the autocorrelation.
    pub t3: f64,
    pub t3_sigma: f64,
}

/// Discrete autocorrelation `A(k·b) = Σ_i P(t_i) P(t_i + k·b)` and its width.
pub fn autocorrelation(density: &BinnedDensity) -> Result<Autocorrelation> {
    let n = density.values.len();
    let occupied = density.values.iter().filter(|&&v| v > 0.0).count();
    if occupied < 8 {
        return Err(Error::Domain("autocorrelation needs at least 8 occupied bins"));
    }
    let p = &density.values;
    let mut lags = Vec::with_capacity(2 * n - 1);
    let mut values = Vec::with_capacity(2 * n - 1);
    for k in -(n as i64 - 1)..=(n as i64 - 1) {
        let mut s = 0.0;
        for i in 0..n as i64 {
            let j = i + k;
            if j >= 0 && j < n as i64 {
                s += p[i as usize] * p[j as usize];
            }
        }
        lags.push(k as f64 * density.bin_width);
        values.push(s);
    }
    let data = CurveData::unweighted(lags.clone(), values.clone());
    let fit = fit_peak(&data)?;
    Ok(Autocorrelation {
        bin_width: density.bin_width,
        lags,
        values,
        t3: fit.t1,
        t3_sigma: fit.t1_sigma,
    })
}
