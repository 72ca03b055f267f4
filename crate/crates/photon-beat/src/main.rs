use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use photon_beat::config::{Preset, Settings};
use photon_beat::curves::{curve, curve_text, CurveParams, Model};
use photon_beat::error::{CliError, CliResult};
use photon_beat::pipeline::{self, Report, RunKind};
use photon_beat::quantity::{parse_angular, parse_duration};
use photon_beat::{io, oracle};
use photon_beat_core::characterize::characterize_with;
use photon_beat_core::units::angular_from_mhz;
use photon_beat_core::WidthPair;

/// Time-resolved two-photon interference: theory curves, event simulation,
/// coincidence histograms, fits and source characterization.
///
/// Durations take a unit suffix (s, ms, us, ns; bare numbers are seconds).
/// Frequencies take Hz, kHz, MHz (read as ω/2π) or rad/s (bare numbers).
/// Exit status: 0 success, 1 computational failure, 2 usage or configuration error.
#[derive(Debug, Parser)]
#[command(
    name = "photon-beat",
    version,
    subcommand_required = false,
    arg_required_else_help = true,
    args_conflicts_with_subcommands = true
)]
struct Cli {
    /// Run simulate, hist, fit and characterize with a preset source.
    #[arg(long, value_name = "PRESET")]
    reproduce_paper: Option<PresetArg>,
    /// Output directory for --reproduce-paper.
    #[arg(long, value_name = "DIR", requires = "reproduce_paper")]
    out_dir: Option<PathBuf>,
    /// Seed for --reproduce-paper.
    #[arg(long, requires = "reproduce_paper")]
    seed: Option<u64>,
    /// Trigger windows per pair run for --reproduce-paper.
    #[arg(long, requires = "reproduce_paper")]
    triggers: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    /// T1 = 0.64 us, T2 = 0.44 us, T3 = 0.81 us.
    Optimized,
    /// T1 = 0.87 us, T2 = 0.31 us, T3 = 1.07 us.
    Before,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RunArg {
    /// cos2_phi forced to 0 and no frequency difference.
    Perpendicular,
    /// Configured cos2_phi without the frequency difference.
    Parallel,
    /// Configured cos2_phi and frequency difference.
    Beating,
    /// Single photon stream for the autocorrelation, `p1_triggers` windows.
    Single,
}

impl From<RunArg> for RunKind {
    fn from(r: RunArg) -> Self {
        match r {
            RunArg::Perpendicular => RunKind::Perpendicular,
            RunArg::Parallel => RunKind::Parallel,
            RunArg::Beating => RunKind::Beating,
            RunArg::Single => RunKind::Single,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit a theory curve as CSV.
    Curves(CurvesArgs),
    /// Generate a detection-event log.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "parallel")]
        run: RunArg,
        /// Event CSV to write.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Build a background-corrected coincidence histogram from an event log.
    Hist {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        events: PathBuf,
        /// Histogram CSV to write.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Fit the peak, the dip and optionally the beat.
    Fit {
        /// Histogram with perpendicular polarizations.
        #[arg(long)]
        perpendicular: PathBuf,
        /// Histogram with parallel polarizations.
        #[arg(long)]
        parallel: PathBuf,
        /// Histogram with an imposed frequency difference.
        #[arg(long)]
        beating: Option<PathBuf>,
        /// Mode overlap; defaults to the config value.
        #[arg(long)]
        cos2phi: Option<f64>,
        #[command(flatten)]
        config: ConfigArg,
        /// Fit JSON to write.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Invert peak and dip widths into the jitter locus.
    Characterize {
        /// Fit JSON produced by `fit`.
        #[arg(long, required_unless_present_all = ["t1", "t2"], conflicts_with_all = ["t1", "t2"])]
        fit: Option<PathBuf>,
        /// Peak width, e.g. 0.64us.
        #[arg(long, value_parser = parse_duration, requires = "t2")]
        t1: Option<f64>,
        /// Dip width, e.g. 0.44us.
        #[arg(long, value_parser = parse_duration, requires = "t1")]
        t2: Option<f64>,
        /// Locus CSV to write.
        #[arg(long)]
        locus: Option<PathBuf>,
        /// Report JSON to write.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Compare every closed form with numerical quadrature.
    OracleCheck,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> CliResult<Settings> {
        match &self.config {
            None => Ok(Settings::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Settings::from_text(&text).map_err(|e| match e {
                    CliError::Config(m) => CliError::Config(format!("{}: {m}", p.display())),
                    other => other,
                })
            }
        }
    }
}

#[derive(Debug, Args)]
struct CurvesArgs {
    #[arg(value_enum)]
    model: Model,
    /// Photon duration δt.
    #[arg(long, value_parser = parse_duration, default_value = "0.36us")]
    dt: f64,
    /// Arrival delay δτ.
    #[arg(long, value_parser = parse_duration, default_value = "0", allow_hyphen_values = true)]
    dtau: f64,
    /// Frequency difference Δ/2π in MHz.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta_mhz: f64,
    #[arg(long, default_value_t = 1.0)]
    cos2phi: f64,
    /// Frequency jitter δω.
    #[arg(long, value_parser = parse_angular, default_value = "0")]
    domega: f64,
    /// Emission-time jitter Δτ.
    #[arg(long, value_parser = parse_duration, default_value = "0")]
    dtau_jitter: f64,
    /// Detector time resolution T.
    #[arg(long, value_parser = parse_duration, default_value = "1ns")]
    resolution: f64,
    #[arg(long, default_value_t = 1001)]
    points: usize,
    /// Grid half-width in curve widths.
    #[arg(long, default_value_t = 5.0)]
    span: f64,
    /// CSV to write; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn curves(a: &CurvesArgs) -> CliResult<()> {
    let params = CurveParams {
        delta_t: a.dt,
        dtau: a.dtau,
        delta: angular_from_mhz(a.delta_mhz),
        cos2_phi: a.cos2phi,
        frequency_jitter: a.domega,
        emission_jitter: a.dtau_jitter,
        resolution: a.resolution,
        points: a.points,
        span: a.span,
    };
    let c = curve(a.model, &params)?;
    emit(a.out.as_deref(), &curve_text(a.model, &params, &c))
}

fn characterize(
    widths: WidthPair,
    delta: Option<f64>,
    points: usize,
    locus: Option<&Path>,
    report: Option<&Path>,
) -> CliResult<()> {
    let c = characterize_with(&widths, points)?;
    let r = Report::new(&c, delta, None);
    if let Some(p) = locus {
        io::write_locus(p, &c)?;
    }
    if let Some(p) = report {
        write_report(p, &r)?;
    }
    print!("{}", r.text());
    Ok(())
}

fn write_report(path: &Path, r: &Report) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(r).expect("plain data serializes");
    text.push('\n');
    io::write_atomic(path, text.as_bytes())
}

fn reproduce(preset: PresetArg, out_dir: Option<&Path>, seed: Option<u64>, triggers: Option<u64>) -> CliResult<()> {
    let (preset, name) = match preset {
        PresetArg::Optimized => (Preset::Optimized, "optimized"),
        PresetArg::Before => (Preset::Before, "before"),
    };
    let mut settings = Settings::preset(preset);
    if let Some(s) = seed {
        settings.run.seed = s;
    }
    if let Some(n) = triggers {
        settings.run.n_triggers = n;
    }
    let dir = out_dir.map_or_else(|| PathBuf::from(format!("reproduce-{name}")), Path::to_path_buf);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    io::write_atomic(&dir.join("config.txt"), settings.to_text().as_bytes())?;
    let out = pipeline::run_chain(&settings, true)?;
    for (kind, events) in &out.events {
        io::write_events(&dir.join(format!("events_{}.csv", run_name(*kind))), events)?;
    }
    for (kind, h) in &out.histograms {
        io::write_histogram(&dir.join(format!("hist_{}.csv", run_name(*kind))), h)?;
    }
    io::write_fit(&dir.join("fit.json"), &out.fit)?;
    io::write_locus(&dir.join("locus.csv"), &out.characterization)?;
    let t3 = out.autocorrelation.as_ref().map(|a| a.t3);
    let report = Report::new(&out.characterization, out.fit.delta, t3);
    write_report(&dir.join("report.json"), &report)?;
    print!("{}", report.text());
    Ok(())
}

fn run_name(kind: RunKind) -> &'static str {
    match kind {
        RunKind::Perpendicular => "perpendicular",
        RunKind::Parallel => "parallel",
        RunKind::Beating => "beating",
        RunKind::Single => "single",
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(p) = cli.reproduce_paper {
        return reproduce(p, cli.out_dir.as_deref(), cli.seed, cli.triggers);
    }
    match cli.command.ok_or_else(|| CliError::Usage("no command given".into()))? {
        Command::Curves(a) => curves(&a),
        Command::Simulate { config, seed, run, out } => {
            let mut settings = config.load()?;
            if let Some(s) = seed {
                settings.run.seed = s;
            }
            let kind = RunKind::from(run);
            let cfg = pipeline::run_config(&settings, kind);
            io::write_events(&out, &pipeline::simulate(&cfg, kind)?)
        }
        Command::Hist { config, events, out } => {
            let settings = config.load()?;
            let ev = io::read_events(&events)?;
            let h = pipeline::histogram(&ev, &settings.run, &settings.analysis)?;
            io::write_histogram(&out, &h)
        }
        Command::Fit {
            perpendicular,
            parallel,
            beating,
            cos2phi,
            config,
            out,
        } => {
            let cos2 = match cos2phi {
                Some(c) => c,
                None => config.load()?.run.cos2_phi,
            };
            let perp = io::read_histogram(&perpendicular)?;
            let par = io::read_histogram(&parallel)?;
            let beat = beating.as_deref().map(io::read_histogram).transpose()?;
            let result = pipeline::fit(&perp, &par, beat.as_ref(), cos2)?;
            io::write_fit(&out, &result)
        }
        Command::Characterize {
            fit,
            t1,
            t2,
            locus,
            report,
            points,
        } => {
            let (widths, delta) = match (fit, t1, t2) {
                (Some(path), _, _) => {
                    let f = io::read_fit(&path)?;
                    let w = f
                        .widths()
                        .ok_or_else(|| CliError::format(&path, "fit has no dip width"))?;
                    (w, f.delta_rad_per_s)
                }
                (None, Some(t1), Some(t2)) => (
                    WidthPair::new(t1, t2).map_err(|e| CliError::Config(e.to_string()))?,
                    None,
                ),
                _ => return Err(CliError::Usage("give --fit or both --t1 and --t2".into())),
            };
            characterize(widths, delta, points, locus.as_deref(), report.as_deref())
        }
        Command::OracleCheck => {
            let summaries = oracle::run_all()?;
            let mut ok = true;
            for s in &summaries {
                println!(
                    "{:<18} {:>4} configurations {:>4} checks  worst relative error {:.2e}  {}",
                    s.formula,
                    s.configurations,
                    s.checks,
                    s.worst_relative_error,
                    if s.passed() { "ok" } else { "FAILED" }
                );
                for f in &s.failures {
                    eprintln!("  {}: closed {} oracle {}", f.label, f.closed, f.numeric);
                }
                ok &= s.passed();
            }
            if ok {
                Ok(())
            } else {
                Err(CliError::Analysis(photon_beat_core::Error::Domain(
                    "closed forms disagree with the quadrature oracle",
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("photon-beat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
