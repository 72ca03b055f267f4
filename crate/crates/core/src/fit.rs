//! Weighted least-squares fits of the coincidence models.
//!
//! The analysis is sequential: the perpendicular-polarization peak gives
//! `N0` and `T1`, the parallel-polarization dip then gives `T2` with those two
//! held fixed, and a beating histogram finally gives `Δ` with everything else
//! fixed. The dip is parameterized internally by `u = 1/T2²`, which stays
//! finite in the no-jitter limit.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{ceil, cos, exp, log, sin, sqrt};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
/// Convergence when the scaled gradient falls below this fraction of its
/// starting value.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;
/// Also converged once the χ² decrease the gradient promises is below this
/// fraction of `1 + χ²`.
pub const CHI2_RESOLUTION: f64 = 1e-24;
/// Smallest expected count in a Poisson fit.
pub const MODEL_FLOOR: f64 = 1e-9;
/// Fewest occupied bins accepted by the peak fit.
pub const MIN_OCCUPIED_BINS: usize = 8;
/// Beat fits closer than this fraction to the Nyquist limit are flagged.
pub const NYQUIST_MARGIN: f64 = 0.01;
/// Minimum χ² improvement over `Δ = 0` for a beat to count as detected.
pub const BEAT_SIGNIFICANCE: f64 = 9.0;

const GAUSS_LEGENDRE_5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Sampled curve with per-point variances.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveData {
    pub tau: Vec<f64>,
    pub value: Vec<f64>,
    pub variance: Vec<f64>,
    /// For background-subtracted counts: the subtracted level. `value +
    /// background` are then the raw counts and fits minimize the Poisson
    /// deviance of `model + background` instead of χ², with Fisher-scoring
    /// weights `1/(model + background)`. `variance` only seeds start values.
    pub poisson_background: Option<f64>,
    /// Set for histograms: each value is a count over a bin of this width
    /// centered on `tau`, and models are averaged over the bin.
    pub bin_width: Option<f64>,
}

impl CurveData {
    pub fn new(tau: Vec<f64>, value: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if tau.len() != value.len() || tau.len() != variance.len() {
            return Err(Error::Domain("curve columns differ in length"));
        }
        if !variance.iter().all(|&v| v > 0.0 && v.is_finite()) {
            return Err(Error::Domain("variances must be positive"));
        }
        if !tau.iter().chain(&value).all(|x| x.is_finite()) {
            return Err(Error::Domain("curve values must be finite"));
        }
        Ok(Self {
            tau,
            value,
            variance,
            poisson_background: None,
            bin_width: None,
        })
    }

    pub fn with_poisson_background(mut self, background: f64) -> Self {
        self.poisson_background = Some(background.max(0.0));
        self
    }

    /// Unit variances; covariances are then rescaled by the residual scatter.
    pub fn unweighted(tau: Vec<f64>, value: Vec<f64>) -> Self {
        let variance = alloc::vec![0.0; tau.len()];
        Self {
            tau,
            value,
            variance,
            poisson_background: None,
            bin_width: None,
        }
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    fn is_unweighted(&self) -> bool {
        self.variance.iter().all(|&v| v == 0.0)
    }

    fn weight(&self, i: usize) -> f64 {
        if self.variance[i] == 0.0 {
            1.0
        } else {
            1.0 / self.variance[i]
        }
    }

    /// Cost contribution, weight and residual of point `i` for model value `f`.
    fn term(&self, i: usize, f: f64) -> (f64, f64, f64) {
        match self.poisson_background {
            None => {
                let w = self.weight(i);
                let r = self.value[i] - f;
                (w * r * r, w, r)
            }
            Some(bg) => {
                let mu = (f + bg).max(MODEL_FLOOR);
                let y = self.value[i] + bg;
                let log_term = if y > 0.0 { y * log(y / mu) } else { 0.0 };
                (2.0 * (mu - y + log_term), 1.0 / mu, y - mu)
            }
        }
    }

    fn span(&self) -> f64 {
        self.tau.iter().fold(0.0f64, |m, &t| m.max(t.abs()))
    }

    fn min_spacing(&self) -> f64 {
        let mut t: Vec<f64> = self.tau.clone();
        t.sort_by(f64::total_cmp);
        t.windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Weighted sum of squared residuals of `model`, or its Poisson deviance.
    pub fn chi2(&self, model: impl Fn(f64) -> f64) -> f64 {
        (0..self.len())
            .map(|i| {
                let f = self.bin_average(self.tau[i], |t| (model(t), [])).0;
                self.term(i, f).0
            })
            .sum()
    }

    /// Model value and gradient at `tau`, averaged over the bin if binned.
    fn bin_average<const N: usize>(&self, tau: f64, model: impl Fn(f64) -> (f64, [f64; N])) -> (f64, [f64; N]) {
        let Some(b) = self.bin_width else {
            return model(tau);
        };
        let mut f = 0.0;
        let mut g = [0.0; N];
        for (x, w) in GAUSS_LEGENDRE_5 {
            let (v, d) = model(tau + 0.5 * b * x);
            f += 0.5 * w * v;
            for k in 0..N {
                g[k] += 0.5 * w * d[k];
            }
        }
        (f, g)
    }
}

/// Solution of a bounded Levenberg-Marquardt fit. `chi2` is the Poisson
/// deviance for count data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSolution<const N: usize> {
    pub params: [f64; N],
    pub covariance: [[f64; N]; N],
    pub chi2: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
}

fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[pivot][col].abs() > 0.0) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let s: f64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn invert<const N: usize>(a: [[f64; N]; N]) -> Option<[[f64; N]; N]> {
    let mut inv = [[0.0; N]; N];
    for k in 0..N {
        let mut e = [0.0; N];
        e[k] = 1.0;
        let col = solve(a, e)?;
        for i in 0..N {
            inv[i][k] = col[i];
        }
    }
    Some(inv)
}

struct Normal<const N: usize> {
    a: [[f64; N]; N],
    g: [f64; N],
    chi2: f64,
}

fn normal_equations<const N: usize, M>(data: &CurveData, model: &M, p: &[f64; N]) -> Normal<N>
where
    M: Fn(f64, &[f64; N]) -> (f64, [f64; N]),
{
    let mut a = [[0.0; N]; N];
    let mut g = [0.0; N];
    let mut chi2 = 0.0;
    for i in 0..data.len() {
        let (f, jac) = data.bin_average(data.tau[i], |t| model(t, p));
        let (cost, w, r) = data.term(i, f);
        chi2 += cost;
        for j in 0..N {
            g[j] += w * jac[j] * r;
            for k in 0..N {
                a[j][k] += w * jac[j] * jac[k];
            }
        }
    }
    Normal { a, g, chi2 }
}

/// Gradient scaled by the curvature, with components pushing against an
/// active bound removed.
fn scaled_gradient<const N: usize>(n: &Normal<N>, p: &[f64; N], lower: &[f64; N], upper: &[f64; N]) -> f64 {
    let mut s = 0.0;
    for k in 0..N {
        let blocked = (p[k] <= lower[k] && n.g[k] < 0.0) || (p[k] >= upper[k] && n.g[k] > 0.0);
        if !blocked && n.a[k][k] > 0.0 {
            s += n.g[k] * n.g[k] / n.a[k][k];
        }
    }
    sqrt(s)
}

/// Bounded Levenberg-Marquardt with Marquardt's diagonal damping. `model`
/// returns the model value and its parameter gradient.
pub fn levenberg_marquardt<const N: usize, M>(
    data: &CurveData,
    model: M,
    start: [f64; N],
    lower: [f64; N],
    upper: [f64; N],
) -> Result<LmSolution<N>>
where
    M: Fn(f64, &[f64; N]) -> (f64, [f64; N]),
{
    let mut p = start;
    let mut n = normal_equations(data, &model, &p);
    let g0 = scaled_gradient(&n, &p, &lower, &upper);
    let mut gn = g0;
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let done = |gn: f64, chi2: f64| gn <= GRADIENT_TOLERANCE * g0 || gn * gn <= CHI2_RESOLUTION * (1.0 + chi2);
    let mut converged = done(gn, n.chi2);
    while !converged {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::Fit {
                reason: "no convergence within the iteration limit",
                iterations,
                gradient_norm: gn,
            });
        }
        iterations += 1;
        let mut damped = n.a;
        for k in 0..N {
            let d = if n.a[k][k] > 0.0 { n.a[k][k] } else { 1.0 };
            damped[k][k] += lambda * d;
        }
        let Some(step) = solve(damped, n.g) else {
            lambda *= 10.0;
            continue;
        };
        let mut trial = p;
        for k in 0..N {
            trial[k] = (p[k] + step[k]).clamp(lower[k], upper[k]);
        }
        let tn = normal_equations(data, &model, &trial);
        if tn.chi2.is_finite() && tn.chi2 <= n.chi2 {
            let moved = (0..N).any(|k| trial[k] != p[k]);
            p = trial;
            n = tn;
            lambda = (lambda * 0.1).max(1e-12);
            gn = scaled_gradient(&n, &p, &lower, &upper);
            converged = done(gn, n.chi2) || !moved;
        } else {
            lambda *= 10.0;
            // No descent left at any damping: the minimum is resolved to
            // rounding precision.
            if lambda > 1e14 {
                converged = true;
            }
        }
    }
    let covariance = invert(n.a).ok_or(Error::Fit {
        reason: "singular normal matrix",
        iterations,
        gradient_norm: gn,
    })?;
    let mut covariance = covariance;
    if data.is_unweighted() && data.len() > N {
        let scale = n.chi2 / (data.len() - N) as f64;
        for row in covariance.iter_mut() {
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
    }
    Ok(LmSolution {
        params: p,
        covariance,
        chi2: n.chi2,
        iterations,
        gradient_norm: gn,
    })
}

/// `N0·exp(−τ²/T1²)` fitted to the perpendicular-polarization histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakFit {
    pub n0: f64,
    pub t1: f64,
    pub n0_sigma: f64,
    pub t1_sigma: f64,
    /// Covariance of `(n0, t1)`.
    pub covariance: [[f64; 2]; 2],
    pub chi2: f64,
}

pub fn peak_model(tau: f64, n0: f64, t1: f64) -> f64 {
    n0 * exp(-tau * tau / (t1 * t1))
}

pub fn fit_peak(data: &CurveData) -> Result<PeakFit> {
    let occupied = data.value.iter().filter(|&&v| v > 0.0).count();
    if occupied < MIN_OCCUPIED_BINS {
        return Err(Error::Domain("peak fit needs at least 8 occupied bins"));
    }
    let span = data.span();
    let total: f64 = data.value.iter().sum();
    let moment: f64 = data.tau.iter().zip(&data.value).map(|(t, v)| t * t * v).sum();
    let mut t1 = sqrt(2.0 * moment / total);
    if !(t1 > 0.0 && t1.is_finite()) {
        t1 = span / 4.0;
    }
    let n0 = data.value.iter().fold(0.0f64, |m, &v| m.max(v));
    let upper_t1 = 1e3 * span;
    let sol = levenberg_marquardt(
        data,
        |tau, p: &[f64; 2]| {
            let e = exp(-tau * tau / (p[1] * p[1]));
            (p[0] * e, [e, p[0] * e * 2.0 * tau * tau / (p[1] * p[1] * p[1])])
        },
        [n0, t1],
        [0.0, 1e-6 * span],
        [f64::INFINITY, upper_t1],
    )?;
    let [n0, t1] = sol.params;
    if t1 > 100.0 * span {
        return Err(Error::Fit {
            reason: "peak width unbounded: histogram is flat",
            iterations: sol.iterations,
            gradient_norm: sol.gradient_norm,
        });
    }
    Ok(PeakFit {
        n0,
        t1,
        n0_sigma: sqrt(sol.covariance[0][0]),
        t1_sigma: sqrt(sol.covariance[1][1]),
        covariance: sol.covariance,
        chi2: sol.chi2,
    })
}

/// Coincidence model with jitter-broadened dip and beat:
/// `N0·exp(−τ²/T1²)·[1 − c·cos(Δτ)·exp(−u τ²)]`, `u = 1/T2²`.
pub fn dip_model(tau: f64, n0: f64, t1: f64, inv_t2_sq: f64, delta: f64, cos2_phi: f64) -> f64 {
    n0 * exp(-tau * tau / (t1 * t1)) * (1.0 - cos2_phi * cos(delta * tau) * exp(-inv_t2_sq * tau * tau))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipFit {
    pub inv_t2_sq: f64,
    /// Statistical 1σ of `1/T2²` with `N0` and `T1` taken as exact.
    pub inv_t2_sq_sigma_stat: f64,
    /// Total 1σ of `1/T2²` including the propagated peak-fit covariance.
    pub inv_t2_sq_sigma: f64,
    /// Covariance of `1/T2²` with the peak's `T1`.
    pub t1_covariance: f64,
    pub chi2: f64,
}

impl DipFit {
    /// Dip width; infinite when the data show no broadening at all.
    pub fn t2(&self) -> f64 {
        if self.inv_t2_sq > 0.0 {
            1.0 / sqrt(self.inv_t2_sq)
        } else {
            f64::INFINITY
        }
    }

    pub fn t2_sigma(&self) -> f64 {
        if self.inv_t2_sq > 0.0 {
            self.inv_t2_sq_sigma / (2.0 * self.inv_t2_sq * sqrt(self.inv_t2_sq))
        } else {
            f64::INFINITY
        }
    }
}

fn fit_inv_t2_sq(data: &CurveData, n0: f64, t1: f64, cos2_phi: f64) -> Result<LmSolution<1>> {
    let model = |tau: f64, p: &[f64; 1]| {
        let e1 = n0 * exp(-tau * tau / (t1 * t1));
        let e2 = exp(-p[0] * tau * tau);
        (e1 * (1.0 - cos2_phi * e2), [e1 * cos2_phi * tau * tau * e2])
    };
    let b = data.min_spacing().min(t1);
    let mut best = (0.0, data.chi2(|tau| model(tau, &[0.0]).0));
    let steps = 60;
    for i in 0..=steps {
        // T2 from one bin to ten peak widths, log-spaced.
        let t2 = b * libm::pow(10.0 * t1 / b, i as f64 / steps as f64);
        let u = 1.0 / (t2 * t2);
        let c = data.chi2(|tau| model(tau, &[u]).0);
        if c < best.1 {
            best = (u, c);
        }
    }
    levenberg_marquardt(data, model, [best.0], [0.0], [f64::INFINITY])
}

/// Dip width from the parallel-polarization histogram with `N0`, `T1` fixed.
pub fn fit_dip(data: &CurveData, peak: &PeakFit, cos2_phi: f64) -> Result<DipFit> {
    if !(cos2_phi > 0.0 && cos2_phi <= 1.0) {
        return Err(Error::Domain("dip unidentifiable: cos2_phi must lie in (0, 1]"));
    }
    let sol = fit_inv_t2_sq(data, peak.n0, peak.t1, cos2_phi)?;
    let u = sol.params[0];
    let stat = sol.covariance[0][0];
    // Sensitivity of u to the fixed peak parameters by central differences.
    let mut grad = [0.0; 2];
    let sigmas = [peak.n0_sigma, peak.t1_sigma];
    for k in 0..2 {
        let h = 0.5 * sigmas[k];
        if !(h > 0.0 && h.is_finite()) {
            continue;
        }
        let shifted = |s: f64| {
            let mut p = [peak.n0, peak.t1];
            p[k] += s;
            fit_inv_t2_sq(data, p[0], p[1], cos2_phi).map(|r| r.params[0])
        };
        grad[k] = (shifted(h)? - shifted(-h)?) / (2.0 * h);
    }
    let mut prop = 0.0;
    for j in 0..2 {
        for k in 0..2 {
            prop += grad[j] * peak.covariance[j][k] * grad[k];
        }
    }
    Ok(DipFit {
        inv_t2_sq: u,
        inv_t2_sq_sigma_stat: sqrt(stat),
        inv_t2_sq_sigma: sqrt(stat + prop.max(0.0)),
        t1_covariance: grad[0] * peak.covariance[0][1] + grad[1] * peak.covariance[1][1],
        chi2: sol.chi2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatFit {
    pub delta: f64,
    pub delta_sigma: f64,
    pub chi2: f64,
    /// χ² of the same model with `Δ = 0`.
    pub chi2_zero: f64,
    /// Best `Δ` within 1 % of the Nyquist limit `π/bin_width`.
    pub aliased: bool,
}

impl BeatFit {
    pub fn significant(&self) -> bool {
        self.chi2_zero - self.chi2 >= BEAT_SIGNIFICANCE
    }
}

/// Frequency difference from a beating histogram, all other parameters fixed.
/// The whole band `[0, π/bin_width]` is scanned before local refinement so the
/// global minimum is returned.
pub fn fit_beat(data: &CurveData, peak: &PeakFit, inv_t2_sq: f64, cos2_phi: f64) -> Result<BeatFit> {
    if !(cos2_phi > 0.0 && cos2_phi <= 1.0) {
        return Err(Error::Domain("beat unidentifiable: cos2_phi must lie in (0, 1]"));
    }
    let b = data.min_spacing();
    if !b.is_finite() {
        return Err(Error::Domain("beat fit needs at least two distinct delays"));
    }
    let nyquist = PI / b;
    let (n0, t1) = (peak.n0, peak.t1);
    let model = |tau: f64, p: &[f64; 1]| {
        let e = n0 * exp(-tau * tau / (t1 * t1)) * cos2_phi * exp(-inv_t2_sq * tau * tau);
        (
            n0 * exp(-tau * tau / (t1 * t1)) - e * cos(p[0] * tau),
            [e * tau * sin(p[0] * tau)],
        )
    };
    let chi2_at = |d: f64| data.chi2(|tau| model(tau, &[d]).0);
    let n = (ceil(8.0 * data.span() / b) as usize).max(16);
    let grid: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let d = nyquist * i as f64 / n as f64;
            (d, chi2_at(d))
        })
        .collect();
    let mut minima: Vec<(f64, f64)> = (0..grid.len())
        .filter(|&i| {
            let left = i == 0 || grid[i - 1].1 >= grid[i].1;
            let right = i + 1 == grid.len() || grid[i + 1].1 >= grid[i].1;
            left && right
        })
        .map(|i| grid[i])
        .collect();
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best: Option<LmSolution<1>> = None;
    for &(d0, _) in minima.iter().take(3) {
        let sol = levenberg_marquardt(data, model, [d0], [0.0], [nyquist])?;
        if best.is_none_or(|b| sol.chi2 < b.chi2) {
            best = Some(sol);
        }
    }
    let sol = best.ok_or(Error::Fit {
        reason: "no beat candidate",
        iterations: 0,
        gradient_norm: f64::NAN,
    })?;
    let delta = sol.params[0];
    Ok(BeatFit {
        delta,
        delta_sigma: sqrt(sol.covariance[0][0]),
        chi2: sol.chi2,
        chi2_zero: chi2_at(0.0),
        aliased: delta >= (1.0 - NYQUIST_MARGIN) * nyquist,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitFlag {
    /// The dip shows no broadening beyond `T1`; `T2` is unbounded.
    NoDipBroadening,
    /// The beat frequency sits at the Nyquist limit of the binning.
    BeatAliased,
    /// The beat model does not improve on `Δ = 0` significantly.
    BeatNotSignificant,
}

impl FitFlag {
    pub fn name(self) -> &'static str {
        match self {
            FitFlag::NoDipBroadening => "no_dip_broadening",
            FitFlag::BeatAliased => "beat_aliased",
            FitFlag::BeatNotSignificant => "beat_not_significant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitUncertainties {
    pub n0: f64,
    pub t1: f64,
    pub t2: Option<f64>,
    pub delta: Option<f64>,
    /// Covariance of `(T1, 1/T2²)`, once the dip is fitted.
    pub widths_covariance: Option<[[f64; 2]; 2]>,
}

/// Result of the sequential peak, dip and beat fits.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub n0: f64,
    pub t1: f64,
    pub t2: Option<f64>,
    /// `1/T2²`, zero when the dip shows no broadening.
    pub inv_t2_sq: Option<f64>,
    pub delta: Option<f64>,
    pub cos2_phi_used: f64,
    /// Square root of the χ² of the last fit performed.
    pub residual_norm: f64,
    pub uncertainties: FitUncertainties,
    pub flags: Vec<FitFlag>,
}

impl FitResult {
    pub fn from_peak(peak: &PeakFit) -> Self {
        Self {
            n0: peak.n0,
            t1: peak.t1,
            t2: None,
            inv_t2_sq: None,
            delta: None,
            cos2_phi_used: 0.0,
            residual_norm: sqrt(peak.chi2),
            uncertainties: FitUncertainties {
                n0: peak.n0_sigma,
                t1: peak.t1_sigma,
                t2: None,
                delta: None,
                widths_covariance: None,
            },
            flags: Vec::new(),
        }
    }

    pub fn with_dip(mut self, dip: &DipFit, cos2_phi: f64) -> Self {
        self.t2 = Some(dip.t2());
        self.uncertainties.t2 = Some(dip.t2_sigma());
        let t1_var = self.uncertainties.t1 * self.uncertainties.t1;
        self.uncertainties.widths_covariance = Some([
            [t1_var, dip.t1_covariance],
            [dip.t1_covariance, dip.inv_t2_sq_sigma * dip.inv_t2_sq_sigma],
        ]);
        self.inv_t2_sq = Some(dip.inv_t2_sq);
        self.cos2_phi_used = cos2_phi;
        self.residual_norm = sqrt(dip.chi2);
        if dip.inv_t2_sq == 0.0 {
            self.flags.push(FitFlag::NoDipBroadening);
        }
        self
    }

    /// Measured widths, once the dip is fitted.
    pub fn widths(&self) -> Option<crate::jitter::WidthPair> {
        self.inv_t2_sq.map(|u| crate::jitter::WidthPair {
            t1: self.t1,
            inv_t2_sq: u,
        })
    }

    pub fn with_beat(mut self, beat: &BeatFit) -> Self {
        self.delta = Some(beat.delta);
        self.uncertainties.delta = Some(beat.delta_sigma);
        self.residual_norm = sqrt(beat.chi2);
        if beat.aliased {
            self.flags.push(FitFlag::BeatAliased);
        }
        if !beat.significant() {
            self.flags.push(FitFlag::BeatNotSignificant);
        }
        self
    }
}

/// Peak fit on `perpendicular`, then dip fit on `parallel`, then optionally a
/// beat fit on `beating` using the dip's width.
pub fn fit_sequence(
    perpendicular: &CurveData,
    parallel: &CurveData,
    cos2_phi: f64,
    beating: Option<&CurveData>,
) -> Result<FitResult> {
    let peak = fit_peak(perpendicular)?;
    let dip = fit_dip(parallel, &peak, cos2_phi)?;
    let mut result = FitResult::from_peak(&peak).with_dip(&dip, cos2_phi);
    if let Some(b) = beating {
        let beat = fit_beat(b, &peak, dip.inv_t2_sq, cos2_phi)?;
        result = result.with_beat(&beat);
    }
    Ok(result)
}
