//! File formats. Every file starts with the `# photon-beat v1` line and is
//! written to a temporary sibling first, then renamed into place.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use photon_beat_core::characterize::Characterization;
use photon_beat_core::fit::FitResult;
use photon_beat_core::histogram::CoincidenceHistogram;
use photon_beat_core::synthesis::{DetectionEvent, Detector};
use photon_beat_core::units::{mhz_from_angular, rad_per_us, to_us};
use photon_beat_core::WidthPair;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT_LINE: &str = "# photon-beat v1";
pub const FORMAT: &str = "photon-beat v1";

pub const EVENTS_HEADER: [&str; 3] = ["trigger_index", "detector", "time_s"];
pub const HISTOGRAM_HEADER: [&str; 3] = ["tau_s", "count", "background"];
pub const LOCUS_HEADER: [&str; 4] = [
    "delta_tau_us",
    "delta_omega_rad_per_us",
    "delta_omega_over_2pi_MHz",
    "delta_t_us",
];

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("`{}` is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

fn read(path: &Path) -> CliResult<String> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if text.lines().next() != Some(FORMAT_LINE) {
        return Err(CliError::format(path, format!("first line must be `{FORMAT_LINE}`")));
    }
    Ok(text)
}

fn csv_text(comments: &[String], header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut head = String::from(FORMAT_LINE);
    head.push('\n');
    for c in comments {
        head.push_str("# ");
        head.push_str(c);
        head.push('\n');
    }
    let mut w = csv::Writer::from_writer(head.into_bytes());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("ASCII output")
}

/// Comment lines after the format line and the data records.
fn csv_records(path: &Path, text: &str, header: &[&str]) -> CliResult<(Vec<String>, Vec<csv::StringRecord>)> {
    let comments = text
        .lines()
        .skip(1)
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim().to_string())
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let found = r.headers().map_err(|e| CliError::format(path, e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(CliError::format(
            path,
            format!("expected header `{}`", header.join(",")),
        ));
    }
    let records = r
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::format(path, e.to_string()))?;
    Ok((comments, records))
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> CliResult<T> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| CliError::format(path, format!("line {line}: bad value in column {}", i + 1)))
}

pub fn events_csv(events: &[DetectionEvent]) -> String {
    csv_text(
        &[],
        &EVENTS_HEADER,
        events.iter().map(|e| {
            vec![
                e.trigger_index.to_string(),
                e.detector.number().to_string(),
                e.time.to_string(),
            ]
        }),
    )
}

pub fn write_events(path: &Path, events: &[DetectionEvent]) -> CliResult<()> {
    write_atomic(path, events_csv(events).as_bytes())
}

pub fn read_events(path: &Path) -> CliResult<Vec<DetectionEvent>> {
    let text = read(path)?;
    let (_, records) = csv_records(path, &text, &EVENTS_HEADER)?;
    records
        .iter()
        .map(|rec| {
            let detector = Detector::from_number(field(path, rec, 1)?)
                .ok_or_else(|| CliError::format(path, "detector must be 3 or 4"))?;
            let time: f64 = field(path, rec, 2)?;
            if !time.is_finite() {
                return Err(CliError::format(path, "event time must be finite"));
            }
            Ok(DetectionEvent {
                trigger_index: field(path, rec, 0)?,
                detector,
                time,
            })
        })
        .collect()
}

pub fn histogram_csv(h: &CoincidenceHistogram) -> String {
    csv_text(
        &[
            format!("bin_width_s = {}", h.bin_width),
            format!("total_detections = {}", h.total_detections),
        ],
        &HISTOGRAM_HEADER,
        (0..h.len()).map(|i| {
            vec![
                h.center(i).to_string(),
                h.counts[i].to_string(),
                h.background_per_bin.to_string(),
            ]
        }),
    )
}

pub fn write_histogram(path: &Path, h: &CoincidenceHistogram) -> CliResult<()> {
    write_atomic(path, histogram_csv(h).as_bytes())
}

fn meta<T: std::str::FromStr>(path: &Path, comments: &[String], key: &str) -> CliResult<T> {
    comments
        .iter()
        .filter_map(|c| c.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .and_then(|(_, v)| v.trim().parse().ok())
        .ok_or_else(|| CliError::format(path, format!("missing `# {key} = ...` line")))
}

pub fn read_histogram(path: &Path) -> CliResult<CoincidenceHistogram> {
    let text = read(path)?;
    let (comments, records) = csv_records(path, &text, &HISTOGRAM_HEADER)?;
    let bin_width: f64 = meta(path, &comments, "bin_width_s")?;
    let total_detections: u64 = meta(path, &comments, "total_detections")?;
    if records.len() % 2 != 1 || bin_width.is_nan() || bin_width <= 0.0 {
        return Err(CliError::format(
            path,
            "histogram must have an odd number of bins and a positive bin width",
        ));
    }
    let half_bins = records.len() / 2;
    let mut counts = Vec::with_capacity(records.len());
    let mut background = 0.0;
    for (i, rec) in records.iter().enumerate() {
        let tau: f64 = field(path, rec, 0)?;
        let expected = (i as f64 - half_bins as f64) * bin_width;
        if (tau - expected).abs() > 1e-6 * bin_width {
            return Err(CliError::format(path, format!("bin {i} is not centered at {expected}")));
        }
        counts.push(field(path, rec, 1)?);
        background = field(path, rec, 2)?;
    }
    Ok(CoincidenceHistogram {
        bin_width,
        half_bins,
        counts,
        background_per_bin: background,
        total_detections,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub n0: f64,
    pub t1_s: f64,
    pub t2_s: Option<f64>,
    pub delta_rad_per_s: Option<f64>,
    /// Covariance of (T1 in s, 1/T2² in 1/s²).
    pub widths_covariance: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub format: String,
    pub n0: f64,
    pub t1_s: f64,
    pub t2_s: Option<f64>,
    pub inv_t2_sq_per_s2: Option<f64>,
    pub delta_rad_per_s: Option<f64>,
    pub cos2_phi_used: f64,
    pub uncertainties: UncertaintyReport,
    pub residual_norm: f64,
    pub flags: Vec<String>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl FitReport {
    pub fn new(fit: &FitResult) -> Self {
        let u = &fit.uncertainties;
        Self {
            format: FORMAT.to_string(),
            n0: fit.n0,
            t1_s: fit.t1,
            t2_s: fit.t2.and_then(finite),
            inv_t2_sq_per_s2: fit.inv_t2_sq,
            delta_rad_per_s: fit.delta,
            cos2_phi_used: fit.cos2_phi_used,
            uncertainties: UncertaintyReport {
                n0: u.n0,
                t1_s: u.t1,
                t2_s: u.t2.and_then(finite),
                delta_rad_per_s: u.delta,
                widths_covariance: u.widths_covariance,
            },
            residual_norm: fit.residual_norm,
            flags: fit.flags.iter().map(|f| f.name().to_string()).collect(),
        }
    }

    pub fn widths(&self) -> Option<WidthPair> {
        self.inv_t2_sq_per_s2.map(|u| WidthPair {
            t1: self.t1_s,
            inv_t2_sq: u,
        })
    }
}

pub fn write_fit(path: &Path, fit: &FitResult) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(&FitReport::new(fit)).expect("plain data serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_fit(path: &Path) -> CliResult<FitReport> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let report: FitReport = serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))?;
    if report.format != FORMAT {
        return Err(CliError::format(path, format!("format must be `{FORMAT}`")));
    }
    Ok(report)
}

pub fn locus_csv(c: &Characterization) -> String {
    csv_text(
        &[
            format!("t1_us = {}", to_us(c.widths.t1)),
            format!("t2_us = {}", to_us(c.widths.t2())),
            format!("regime = {}", c.regime.name()),
        ],
        &LOCUS_HEADER,
        c.locus.iter().map(|p| {
            vec![
                to_us(p.delta_tau).to_string(),
                rad_per_us(p.delta_omega).to_string(),
                mhz_from_angular(p.delta_omega).to_string(),
                to_us(p.delta_t).to_string(),
            ]
        }),
    )
}

pub fn write_locus(path: &Path, c: &Characterization) -> CliResult<()> {
    write_atomic(path, locus_csv(c).as_bytes())
}

/// Columnar curve output with a fixed header.
pub fn curve_csv(header: &[&str], comments: &[String], rows: &[Vec<f64>]) -> String {
    csv_text(
        comments,
        header,
        rows.iter().map(|r| r.iter().map(f64::to_string).collect()),
    )
}
