//! Acceptance checks. Prints one PASS or FAIL line per criterion and exits
//! non-zero when any of them fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use photon_beat::config::{Preset, Settings};
use photon_beat::{oracle, parallel, pipeline};
use photon_beat_core::characterize::{autocorrelation_width, locus_chi2, JOINT_TWO_SIGMA};
use photon_beat_core::histogram::{build_histogram, correct_background};
use photon_beat_core::interference::{p2_hom, p2_time_resolved, tau_integrate};
use photon_beat_core::jitter::{
    hom_jittered, p2_jittered, pure_case_inversion, widths_from_jitters, LocusPoint, PureCase, WidthPair,
};
use photon_beat_core::synthesis::{self, RunConfig};
use photon_beat_core::units::{angular_from_mhz, mhz_from_angular, to_us, us};
use photon_beat_core::{GaussianMode, JitterSpec, PairConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Trigger count that yields about `detections` clicks under `cfg`.
fn triggers_for(cfg: &RunConfig, detections: f64) -> u64 {
    let q = cfg.generation_efficiency * cfg.routing_probability;
    let eta = 0.5 * (cfg.detector_efficiency[0] + cfg.detector_efficiency[1]);
    let per_trigger = 2.0 * q * eta + (cfg.dark_rate[0] + cfg.dark_rate[1]) * cfg.dark_window();
    (detections / per_trigger) as u64
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let summaries = oracle::run_all().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut parts = Vec::new();
    let mut ok = elapsed < Duration::from_secs(300);
    for s in &summaries {
        ok &= s.passed() && s.configurations >= 125;
        parts.push(format!(
            "{} {}/{} worst {:.1e}",
            s.formula,
            s.checks - s.failures.len(),
            s.checks,
            s.worst_relative_error
        ));
    }
    check(ok, format!("{} in {:.0} s", parts.join(", "), elapsed.as_secs_f64()))
}

fn width_algebra() -> Outcome {
    let w = widths_from_jitters(us(0.36), &JitterSpec::widths(0.0, us(0.53)).unwrap()).unwrap();
    let (t1, t2) = (to_us(w.t1), to_us(w.t2()));
    let measured = WidthPair::new(us(0.64), us(0.44)).unwrap();
    let emission = pure_case_inversion(&measured, PureCase::EmissionOnly);
    let frequency = pure_case_inversion(&measured, PureCase::FrequencyOnly);
    let khz = 1e3 * mhz_from_angular(frequency.delta_omega);
    let ok = (t1 - 0.64).abs() <= 0.01
        && (t2 - 0.44).abs() <= 0.01
        && (to_us(emission.delta_tau) - 0.53).abs() <= 0.01
        && (to_us(emission.delta_t) - 0.36).abs() <= 0.01
        && (khz - 723.0).abs() < 1.0
        && (khz - 720.0).abs() <= 5.0;
    check(
        ok,
        format!(
            "T1 {t1:.3} us, T2 {t2:.3} us; inverted Dtau {:.3} us, dt {:.3} us, domega/2pi {khz:.1} kHz",
            to_us(emission.delta_tau),
            to_us(emission.delta_t)
        ),
    )
}

fn quantum_beats() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (mhz, detections, seed) in [(2.8, 2e5, 28), (3.8, 3e5, 38)] {
        let mut s = Settings::preset(Preset::Optimized);
        s.run.cos2_phi = 0.92;
        s.run.jitter.mean_delta = angular_from_mhz(mhz);
        s.run.n_triggers = triggers_for(&s.run, detections);
        s.run.seed = seed;
        s.analysis.p1_triggers = 0;
        let out = pipeline::run_chain(&s, false).map_err(|e| e.to_string())?;
        let beating = out.histogram(pipeline::RunKind::Beating).unwrap();
        let fitted = mhz_from_angular(out.fit.delta.ok_or("no beat fitted")?);
        let deviation = fitted / mhz - 1.0;
        ok &= deviation.abs() <= 0.03;
        parts.push(format!(
            "{mhz} MHz -> {fitted:.3} MHz ({:+.1} %, {} detections)",
            100.0 * deviation,
            beating.total_detections
        ));
    }
    check(ok, parts.join(", "))
}

fn coalescence_null() -> Outcome {
    let mode = GaussianMode::new(angular_from_mhz(1000.0), us(0.36), us(2.64)).unwrap();
    let mut cfg = RunConfig::experiment(mode, JitterSpec::none(), 1.0, 0, 41);
    cfg.n_triggers = (1e5 / cfg.pairing_probability()).ceil() as u64;
    let (events, stats) = parallel::generate_pair_run(&cfg).map_err(|e| e.to_string())?;
    let raw = parallel::histogram(&events, 48e-9, cfg.pair_delay).map_err(|e| e.to_string())?;
    let h = correct_background(&raw, cfg.dark_rate[0], cfg.exposure());
    let centers = h.centers();
    let mid = (0..centers.len())
        .min_by(|&a, &b| centers[a].abs().total_cmp(&centers[b].abs()))
        .unwrap();
    let bg = h.background_per_bin;
    let excess = h.counts[mid] as f64 - bg;
    let sigma = bg.max(1.0).sqrt();
    check(
        excess.abs() <= 3.0 * sigma,
        format!(
            "{} pairs, central bin {} counts vs accidental level {bg:.2} ({:+.2} sigma)",
            stats.pairs,
            h.counts[mid],
            excess / sigma
        ),
    )
}

fn pipeline_round_trip() -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2005);
    let mut inside = 0;
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let truth = LocusPoint {
            delta_t: us(rng.random_range(0.25..0.5)),
            delta_tau: us(rng.random_range(0.1..0.6)),
            delta_omega: angular_from_mhz(rng.random_range(0.1..1.0)),
        };
        let mut s = Settings::default();
        s.run.mode.delta_t = truth.delta_t;
        s.run.jitter = truth.jitter();
        s.run.n_triggers = 1_000_000;
        s.run.seed = 500 + i;
        s.analysis.p1_triggers = 0;
        let out = pipeline::run_chain(&s, false).map_err(|e| e.to_string())?;
        let measured = out.fit.widths().ok_or("dip not fitted")?;
        let cov = out.fit.uncertainties.widths_covariance.ok_or("no covariance")?;
        let chi2 = locus_chi2(&measured, &cov, &truth).map_err(|e| e.to_string())?;
        worst = worst.max(chi2);
        if chi2 <= JOINT_TWO_SIGMA {
            inside += 1;
        }
    }
    check(
        inside >= 18,
        format!("{inside}/20 true sources inside the joint 2 sigma region (largest chi2 {worst:.2})"),
    )
}

fn autocorrelation_diagnostic() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;

    let (dt, pair) = (0.36, 0.5);
    let stream = 2.0 * pair / 2f64.sqrt();
    let mut s = Settings::default();
    s.run.mode.delta_t = us(dt);
    s.run.jitter = JitterSpec::widths(0.0, us(pair)).unwrap();
    s.run.stream_emission_jitter = Some(us(stream));
    s.run.n_triggers = 1_000_000;
    s.run.seed = 61;
    s.analysis.p1_triggers = 800_000;
    let out = pipeline::run_chain(&s, false).map_err(|e| e.to_string())?;
    let t3 = out.autocorrelation.as_ref().ok_or("no autocorrelation")?.t3;
    let predicted = autocorrelation_width(us(dt), us(stream)) / widths_from_jitters(us(dt), &s.run.jitter).unwrap().t1;
    let ratio = t3 / out.fit.t1;
    ok &= (ratio / predicted - 1.0).abs() <= 0.05;
    parts.push(format!("doubled stream jitter: T3/T1 {ratio:.3} vs {predicted:.3}"));

    let mut s = Settings::preset(Preset::Optimized);
    s.run.n_triggers = 2_000_000;
    s.run.seed = 67;
    s.analysis.p1_triggers = 800_000;
    let out = pipeline::run_chain(&s, false).map_err(|e| e.to_string())?;
    let t3 = to_us(out.autocorrelation.as_ref().ok_or("no autocorrelation")?.t3);
    let t1 = to_us(out.fit.t1);
    ok &= (t3 / 0.81 - 1.0).abs() <= 0.05 && ((t3 / t1) / (0.81 / 0.64) - 1.0).abs() <= 0.05;
    parts.push(format!(
        "optimized source: T1 {t1:.3} us, T3 {t3:.3} us, T3/T1 {:.3} vs {:.3}",
        t3 / t1,
        0.81 / 0.64
    ));
    check(ok, parts.join("; "))
}

fn runner() -> TestRunner {
    let config = Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<String, String> {
    runner()
        .run(&strategy, test)
        .map(|()| name.to_string())
        .map_err(|e| format!("{name}: {e}"))
}

fn pair(delta_t: f64, cos2: f64) -> PairConfig {
    let mode = GaussianMode::new(angular_from_mhz(1000.0), delta_t, 0.0).unwrap();
    PairConfig::identical(mode, cos2, 1e-9).unwrap()
}

/// (δt, Δ, δτ, cos²φ) in SI units.
fn pair_params() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.2f64..0.6, 0.0f64..4.0, -0.5f64..0.5, 0.0f64..=1.0)
        .prop_map(|(dt, mhz, dtau, c)| (us(dt), angular_from_mhz(mhz), us(dtau), c))
}

/// (δt, jitter, cos²φ) for the zero-mean jitter forms.
fn jitter_params() -> impl Strategy<Value = (f64, JitterSpec, f64)> {
    (0.2f64..0.6, 0.0f64..1.5, 0.0f64..0.8, 0.0f64..=1.0)
        .prop_map(|(dt, mhz, jit, c)| (us(dt), JitterSpec::widths(angular_from_mhz(mhz), us(jit)).unwrap(), c))
}

/// The coincidence form takes one kind of jitter at a time.
fn one_kind(j: &JitterSpec) -> JitterSpec {
    if j.sigma_dtau > 0.0 {
        JitterSpec { sigma_delta: 0.0, ..*j }
    } else {
        *j
    }
}

fn normalization() -> Outcome {
    property("normalization", pair_params(), |(dt, delta, dtau, c)| {
        let p = pair(dt, c);
        let reach = dtau.abs() + 7.0 * dt;
        let n = 4001;
        let taus: Vec<f64> = (0..n)
            .map(|i| -reach + 2.0 * reach * i as f64 / (n - 1) as f64)
            .collect();
        let values: Vec<f64> = taus
            .iter()
            .map(|&t| p2_time_resolved(&p, delta, dtau, t).unwrap())
            .collect();
        let integral = tau_integrate(&taus, &values).unwrap() / p.detector_resolution;
        let expected = p2_hom(&p, delta, dtau).unwrap();
        prop_assert!(
            (integral - expected).abs() <= 1e-6 * expected.max(1e-10),
            "{integral} vs {expected}"
        );
        Ok(())
    })
}

fn symmetry() -> Outcome {
    property(
        "symmetry",
        (jitter_params(), 0.0f64..3.0, pair_params()),
        |((dt, j, c), tau, (dt2, delta, dtau, c2))| {
            let tau = us(tau);
            let a = p2_jittered(tau, dt, &j, c, 1e-9).unwrap();
            let b = p2_jittered(-tau, dt, &j, c, 1e-9).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));
            let p = pair(dt2, c2);
            let a = p2_time_resolved(&p, delta, dtau, tau).unwrap();
            let b = p2_time_resolved(&p, delta, dtau, -tau).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));
            let h = one_kind(&j);
            prop_assert_eq!(
                hom_jittered(dtau, dt, &h, c).unwrap(),
                hom_jittered(-dtau, dt, &h, c).unwrap()
            );
            Ok(())
        },
    )
}

fn nonnegativity() -> Outcome {
    property(
        "nonnegativity",
        (jitter_params(), -3.0f64..3.0, pair_params()),
        |((dt, j, c), tau, (dt2, delta, dtau, c2))| {
            let tau = us(tau);
            let p = pair(dt2, c2);
            prop_assert!(p2_jittered(tau, dt, &j, c, 1e-9).unwrap() >= 0.0);
            prop_assert!(hom_jittered(dtau, dt, &one_kind(&j), c).unwrap() >= 0.0);
            prop_assert!(p2_time_resolved(&p, delta, dtau, tau).unwrap() >= 0.0);
            prop_assert!(p2_hom(&p, delta, dtau).unwrap() >= 0.0);
            Ok(())
        },
    )
}

fn zero_delay_null() -> Outcome {
    property(
        "tau=0 null",
        (jitter_params(), pair_params()),
        |((dt, j, _), (dt2, delta, dtau, _))| {
            prop_assert_eq!(p2_jittered(0.0, dt, &j, 1.0, 1e-9).unwrap(), 0.0);
            prop_assert_eq!(p2_time_resolved(&pair(dt2, 1.0), delta, dtau, 0.0).unwrap(), 0.0);
            Ok(())
        },
    )
}

fn parallel_determinism() -> Outcome {
    let pools: Vec<rayon::ThreadPool> = [1, 3]
        .iter()
        .map(|&n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap())
        .collect();
    let strategy = (any::<u64>(), 0u64..20_000, jitter_params(), 0.0f64..=1.0);
    property("parallel determinism", strategy, |(seed, n, (dt, j, _), cos2)| {
        let mode = GaussianMode::new(angular_from_mhz(1000.0), dt, us(2.64)).unwrap();
        let cfg = RunConfig::experiment(mode, j, cos2, n, seed);
        let sequential = synthesis::generate_pair_run_with_stats(&cfg).unwrap();
        let reference = build_histogram(&sequential.0, 48e-9, cfg.pair_delay).unwrap();
        for pool in &pools {
            let (events, stats) = pool.install(|| parallel::generate_pair_run(&cfg)).unwrap();
            prop_assert_eq!(stats, sequential.1);
            prop_assert!(events == sequential.0);
            let h = pool
                .install(|| parallel::histogram(&events, 48e-9, cfg.pair_delay))
                .unwrap();
            prop_assert!(h == reference);
        }
        Ok(())
    })
}

fn property_suites() -> Outcome {
    let suites = [
        normalization,
        symmetry,
        nonnegativity,
        zero_delay_null,
        parallel_determinism,
    ];
    let results: Vec<Outcome> = suites.iter().map(|f| f()).collect();
    let failed: Vec<String> = results.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
    if failed.is_empty() {
        let names: Vec<String> = results.into_iter().map(Result::unwrap).collect();
        Ok(format!("{} x 1000 cases", names.join(", ")))
    } else {
        Err(failed.join("; "))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("width algebra", width_algebra),
        ("quantum-beat recovery", quantum_beats),
        ("coalescence null", coalescence_null),
        ("pipeline round trip", pipeline_round_trip),
        ("autocorrelation diagnostic", autocorrelation_diagnostic),
        ("property suites", property_suites),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|_| Err("panicked".into()));
        let seconds = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{seconds:.1} s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name}: {detail} [{seconds:.1} s]", i + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
