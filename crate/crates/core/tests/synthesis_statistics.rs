use photon_beat_core::fit::{fit_beat, fit_peak};
use photon_beat_core::histogram::build_histogram;
use photon_beat_core::interference::{g2_components, p2_hom};
use photon_beat_core::quad::{integrate, Tolerance};
use photon_beat_core::synthesis::*;
use photon_beat_core::units::{angular_from_mhz, us};
use photon_beat_core::{GaussianMode, JitterSpec, PairConfig};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn mode() -> GaussianMode {
    GaussianMode::new(angular_from_mhz(1000.0), us(0.5), us(2.64)).unwrap()
}

/// (t3, t4) of every window holding one click on each detector.
fn coincidence_times(events: &[DetectionEvent]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for window in events.chunk_by(|a, b| a.trigger_index == b.trigger_index) {
        let t3: Vec<f64> = window
            .iter()
            .filter(|e| e.detector == Detector::D3)
            .map(|e| e.time)
            .collect();
        let t4: Vec<f64> = window
            .iter()
            .filter(|e| e.detector == Detector::D4)
            .map(|e| e.time)
            .collect();
        if t3.len() == 1 && t4.len() == 1 {
            out.push((t3[0], t4[0]));
        }
    }
    out
}

#[test]
fn rejection_sampler_reproduces_the_joint_density() {
    let delta = angular_from_mhz(1.0);
    let dtau = us(0.3);
    let jitter = JitterSpec::new(delta, 0.0, dtau, 0.0).unwrap();
    let cfg = RunConfig::ideal(mode(), jitter, 0.7, 210_000, 23);
    let samples = coincidence_times(&generate_pair_run(&cfg).unwrap());
    let n = samples.len() as f64;
    assert!(n > 95_000.0);

    let m1 = mode();
    let m2 = GaussianMode {
        omega0: m1.omega0 + delta,
        tau0: m1.tau0 + dtau,
        ..m1
    };
    let pair = PairConfig::new(m1, m2, 0.7, 1.0, 1.0, 1.0).unwrap();
    let total = p2_hom(&pair, delta, dtau).unwrap();

    let sd = m1.delta_t / 2.0;
    let lo = m1.tau0 - 3.0 * sd;
    let hi = m2.tau0 + 3.0 * sd;
    let cells = 12;
    let h = (hi - lo) / cells as f64;
    let inner_tol = Tolerance::new(1e-6, 1e-10);
    let outer_tol = Tolerance::new(1e-12, 1e-9);
    let mut expected = vec![0.0; cells * cells];
    let mut observed = vec![0.0; cells * cells];
    for i in 0..cells {
        for j in 0..cells {
            let (a1, a2) = (lo + i as f64 * h, lo + j as f64 * h);
            let mass = integrate(
                |t1| {
                    integrate(|t2| g2_components(&pair, t1, t2).total, a2, a2 + h, 1, inner_tol)
                        .unwrap()
                        .value
                },
                a1,
                a1 + h,
                1,
                outer_tol,
            )
            .unwrap()
            .value;
            expected[i * cells + j] = n * mass / total;
        }
    }
    let mut outside_observed = 0.0;
    for &(t3, t4) in &samples {
        let i = ((t3 - lo) / h).floor();
        let j = ((t4 - lo) / h).floor();
        if (0.0..cells as f64).contains(&i) && (0.0..cells as f64).contains(&j) {
            observed[i as usize * cells + j as usize] += 1.0;
        } else {
            outside_observed += 1.0;
        }
    }
    let mut outside_expected = n - expected.iter().sum::<f64>();
    let mut chi2 = 0.0;
    let mut bins = 0;
    for (e, o) in expected.iter().zip(&observed) {
        if *e < 5.0 {
            outside_expected += e;
            outside_observed += o;
        } else {
            chi2 += (o - e) * (o - e) / e;
            bins += 1;
        }
    }
    chi2 += (outside_observed - outside_expected).powi(2) / outside_expected;
    bins += 1;
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2} over {bins} bins, p = {p}");
}

#[test]
fn dark_counts_are_poisson_and_uniform() {
    let window = us(5.28);
    let lambda = 3.0;
    let mut cfg = RunConfig::ideal(mode(), JitterSpec::none(), 0.0, 20_000, 31);
    cfg.generation_efficiency = 0.0;
    cfg.dark_rate = [lambda / window, lambda / window];
    let events = generate_pair_run(&cfg).unwrap();
    let mut counts = vec![0.0f64; cfg.n_triggers as usize];
    let mut times = Vec::new();
    for e in events.iter().filter(|e| e.detector == Detector::D3) {
        counts[e.trigger_index as usize] += 1.0;
        times.push(e.time / window);
    }
    let k = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / k;
    assert!((mean - lambda).abs() < 3.0 * (lambda / k).sqrt(), "mean {mean}");
    let dispersion = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / mean;
    let cdf = ChiSquared::new(k - 1.0).unwrap().cdf(dispersion);
    assert!(cdf > 0.001 && cdf < 0.999, "dispersion {dispersion} over {k} windows");

    times.sort_by(f64::total_cmp);
    let m = times.len() as f64;
    let ks = times
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - i as f64 / m).abs().max(((i + 1) as f64 / m - u).abs()))
        .fold(0.0, f64::max);
    assert!(ks < 1.63 / m.sqrt(), "KS {ks}");
}

#[test]
fn perpendicular_peak_has_the_photon_duration_as_width() {
    let cfg = RunConfig::ideal(mode(), JitterSpec::none(), 0.0, 100_000, 37);
    let events = generate_pair_run(&cfg).unwrap();
    let hist = build_histogram(&events, 48e-9, cfg.pair_delay).unwrap();
    let peak = fit_peak(&hist.curve()).unwrap();
    assert!((peak.t1 / mode().delta_t - 1.0).abs() < 0.03, "T1 {}", peak.t1);
}

#[test]
fn imposed_frequency_difference_beats_from_a_null() {
    let delta = angular_from_mhz(3.8);
    let reference = RunConfig::ideal(mode(), JitterSpec::none(), 0.0, 100_000, 41);
    let beating = RunConfig {
        jitter: JitterSpec::new(delta, 0.0, 0.0, 0.0).unwrap(),
        cos2_phi: 1.0,
        seed: 43,
        ..reference
    };
    let href = build_histogram(&generate_pair_run(&reference).unwrap(), 48e-9, reference.pair_delay).unwrap();
    let hbeat = build_histogram(&generate_pair_run(&beating).unwrap(), 48e-9, beating.pair_delay).unwrap();
    let peak = fit_peak(&href.curve()).unwrap();
    let fit = fit_beat(&hbeat.curve(), &peak, 0.0, 1.0).unwrap();
    let period = 2.0 * std::f64::consts::PI / fit.delta;
    let expected = 2.0 * std::f64::consts::PI / delta;
    assert!((period / expected - 1.0).abs() < 0.03, "period {period} vs {expected}");
    let max = *hbeat.counts.iter().max().unwrap() as f64;
    assert!((hbeat.counts[hbeat.half_bins] as f64) < 0.1 * max);
}

#[test]
fn pair_outcomes_conserve_probability() {
    let jitter = JitterSpec::widths(angular_from_mhz(0.7), us(0.4)).unwrap();
    let cfg = RunConfig::ideal(mode(), jitter, 0.92, 100_000, 47);
    let (_, stats) = generate_pair_run_with_stats(&cfg).unwrap();
    assert_eq!(stats.pairs, cfg.n_triggers);
    assert_eq!(stats.coincidences + stats.same_port, stats.pairs);
}

#[test]
fn parallel_generation_order_does_not_matter() {
    let cfg = RunConfig::experiment(mode(), JitterSpec::widths(1e6, us(0.3)).unwrap(), 0.92, 4_000, 53);
    let sequential = generate_pair_run(&cfg).unwrap();
    let mut shuffled: Vec<DetectionEvent> = (0..cfg.n_triggers)
        .rev()
        .flat_map(|i| pair_window(&cfg, i).unwrap().events)
        .collect();
    shuffled.sort_by(|a, b| a.order(b));
    assert_eq!(sequential, shuffled);
}
