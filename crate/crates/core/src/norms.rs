//! Lorentz quasi-norms of sampled functions and power-law fits of norm scans.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    cosine_c1, cosine_c1_outside, fractional_kernel, sine_bessel_part, FractionalExponent, KernelKind,
};
use crate::quadrature::{adaptive, Tolerance};
use crate::specfun::gamma_real;

/// Largest log residual accepted by [`fit_power_law`].
pub const MAX_FIT_RESIDUAL: f64 = 0.15;

/// `L^{p,q}`; `q = ∞` is the weak space, `p = q` the Lebesgue space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzSpec {
    pub p: f64,
    pub q: f64,
}

impl LorentzSpec {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0 && q >= 1.0) {
            return Err(Error::InvalidArgument(format!("need p, q >= 1, got ({p}, {q})")));
        }
        if p.is_infinite() && q.is_finite() {
            return Err(Error::InvalidArgument("L^{∞,q} with q < ∞ is trivial".into()));
        }
        Ok(Self { p, q })
    }

    pub fn lebesgue(p: f64) -> Self {
        Self { p, q: p }
    }

    pub fn weak(p: f64) -> Self {
        Self { p, q: f64::INFINITY }
    }

    pub fn is_lebesgue(&self) -> bool {
        self.p == self.q
    }
}

/// Voronoi cell lengths of sorted sample points; end cells are half cells.
pub fn cell_weights(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|k| {
                let lo = if k == 0 { points[0] } else { 0.5 * (points[k - 1] + points[k]) };
                let hi = if k == n - 1 { points[n - 1] } else { 0.5 * (points[k] + points[k + 1]) };
                hi - lo
            })
            .collect(),
    }
}

/// Lorentz quasi-norm of a step function taking `|values[k]|` on a set of measure
/// `weights[k]`, from its exact decreasing rearrangement.
pub fn lorentz_norm(values: &[f64], weights: &[f64], spec: LorentzSpec) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("lorentz_norm of an empty sample".into()));
    }
    if values.len() != weights.len() {
        return Err(Error::InvalidArgument("values and weights differ in length".into()));
    }
    if values.iter().any(|v| !v.is_finite()) || weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument("samples must be finite with nonnegative weights".into()));
    }
    let mut pairs: Vec<(f64, f64)> = values.iter().map(|v| v.abs()).zip(weights.iter().copied()).collect();
    if spec.p.is_infinite() {
        return Ok(pairs.iter().filter(|(_, w)| *w > 0.0).map(|(v, _)| *v).fold(0.0, f64::max));
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let inv_p = 1.0 / spec.p;
    let mut measure = 0.0;
    if spec.q.is_infinite() {
        let mut sup: f64 = 0.0;
        for (v, w) in pairs {
            measure += w;
            sup = sup.max(v * measure.powf(inv_p));
        }
        return Ok(sup);
    }
    if spec.is_lebesgue() {
        let sum: f64 = pairs.iter().map(|(v, w)| v.powf(spec.p) * w).sum();
        return Ok(sum.powf(inv_p));
    }
    let e = spec.q / spec.p;
    let mut prev = 0.0;
    let mut sum = 0.0;
    for (v, w) in pairs {
        measure += w;
        let next = measure.powf(e);
        sum += v.powf(spec.q) * (next - prev);
        prev = next;
    }
    Ok((sum / e).powf(1.0 / spec.q))
}

/// Lorentz norm of samples `f(t_k)` with Voronoi cell weights.
pub fn lorentz_norm_samples(points: &[f64], values: &[f64], spec: LorentzSpec) -> Result<f64> {
    lorentz_norm(values, &cell_weights(points), spec)
}

/// Radial space-time samples: `values[i * times.len() + j] = u(radii[i], times[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSamples<'a> {
    /// Measure attached to each radius, typically `4πr² dr`.
    pub radial_weights: &'a [f64],
    pub time_weights: &'a [f64],
    pub values: &'a [f64],
}

/// `‖ ‖u(x, ·)‖_{inner} ‖_{outer}`, time norm inside.
pub fn mixed_norm(s: &SpaceTimeSamples<'_>, outer: LorentzSpec, inner: LorentzSpec) -> Result<f64> {
    let nt = s.time_weights.len();
    if nt == 0 || s.values.len() != s.radial_weights.len() * nt {
        return Err(Error::InvalidArgument("space-time sample shape mismatch".into()));
    }
    let profile = s
        .values
        .chunks(nt)
        .map(|row| lorentz_norm(row, s.time_weights, inner))
        .collect::<Result<Vec<_>>>()?;
    lorentz_norm(&profile, s.radial_weights, outer)
}

/// `4πr²` times the radial cell length.
pub fn radial_measure(radii: &[f64]) -> Vec<f64> {
    cell_weights(radii).into_iter().zip(radii).map(|(w, r)| 4.0 * PI * r * r * w).collect()
}

/// Least-squares power law `y ≈ C x^β` in log-log coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    /// `ln C`.
    pub constant: f64,
    pub fit_range: (f64, f64),
    /// Largest `|ln y - (ln C + β ln x)|`.
    pub max_residual: f64,
    pub points: usize,
}

impl DecayFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.constant + self.exponent * x.ln()).exp()
    }
}

/// Fits `ln y = ln C + β ln x`. Needs at least 8 points over a decade; a residual above
/// [`MAX_FIT_RESIDUAL`] is reported as [`Error::FitQuality`] carrying the fit.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<DecayFit> {
    if xs.len() != ys.len() || xs.len() < 8 {
        return Err(Error::InvalidArgument("a decay fit needs at least 8 points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("decay fit data must be positive".into()));
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(0.0, f64::max);
    if hi / lo < 10.0 * (1.0 - 1e-9) {
        return Err(Error::InvalidArgument(format!("fit range [{lo}, {hi}] spans less than a decade")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let constant = my - exponent * mx;
    let max_residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - constant - exponent * x).abs())
        .fold(0.0, f64::max);
    let fit = DecayFit { exponent, constant, fit_range: (lo, hi), max_residual, points: xs.len() };
    if max_residual > MAX_FIT_RESIDUAL {
        return Err(Error::FitQuality { fit: Box::new(fit) });
    }
    Ok(fit)
}

/// `n` points per decade over `[a, b]`, endpoints included.
pub fn log_grid(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    let n = ((b / a).log10() * per_decade as f64).round().max(1.0) as usize;
    (0..=n).map(|k| a * (b / a).powf(k as f64 / n as f64)).collect()
}

/// Kernel whose time norm is scanned against the radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case")]
pub enum ScanKernel {
    /// `C_1(r, t)`, `t >= 0`.
    C1,
    /// Bessel part of `S_{1/2}(r, t)`, `t >= 0`.
    SineBessel,
    /// `E_{(1+α)/2}(r, t)` restricted to `t > r`.
    FractionalInside { alpha: FractionalExponent },
}

impl ScanKernel {
    pub fn label(&self) -> String {
        match self {
            Self::C1 => "C1".into(),
            Self::SineBessel => "S_B".into(),
            Self::FractionalInside { alpha } => format!("E_(1+α)/2 [α={}{:+}i, t>r]", alpha.re, alpha.im),
        }
    }
}

/// Sampling controls for a kernel time norm at fixed radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSampling {
    /// Step in `s = √(t²-r²)`.
    pub ds: f64,
    /// Sampling stops at `s = max(span * r, min_span)`.
    pub span: f64,
    pub min_span: f64,
}

impl Default for TimeSampling {
    fn default() -> Self {
        Self { ds: 0.1, span: 40.0, min_span: 200.0 }
    }
}

/// `Γ((p+1)/2) / (√π Γ(p/2 + 1))`, the mean of `|cos|^p`.
fn cosine_power_mean(p: f64) -> f64 {
    gamma_real(0.5 * (p + 1.0)) / (PI.sqrt() * gamma_real(0.5 * p + 1.0))
}

/// `‖K(r, ·)‖` over `t >= 0`.
///
/// Beyond the sampled window, Lebesgue norms add the tail `∫ m_p A(t)^p dt` of the
/// oscillating profile with envelope `A`, where `m_p` is the mean of `|cos|^p`.
/// Weak and Lorentz norms are taken over the window only.
pub fn kernel_time_norm(kernel: ScanKernel, r: f64, spec: LorentzSpec, sampling: TimeSampling) -> Result<f64> {
    let s_max = (sampling.span * r).max(sampling.min_span);
    let n = (s_max / sampling.ds).ceil() as usize;
    let mut s: Vec<f64> = (0..=n).map(|k| k as f64 * s_max / n as f64).collect();
    if matches!(kernel, ScanKernel::FractionalInside { .. }) {
        // The kernel blows up like (t - r)^{a-1} at the cone; grade geometrically into it.
        let first = s[1];
        let deepest = 2e-5 * r;
        let levels = (10.0 * (first / deepest).log10()).floor().max(0.0) as usize;
        let graded: Vec<f64> = (1..=levels).rev().map(|k| first * 10f64.powf(-(k as f64) / 10.0)).collect();
        s.splice(1..1, graded);
    }
    let t: Vec<f64> = s.iter().map(|s| (s * s + r * r).sqrt()).collect();
    let mut weights = cell_weights(&t);
    let mut values: Vec<f64> = match kernel {
        ScanKernel::C1 => cosine_c1_outside(r, &s)?,
        ScanKernel::SineBessel => t.iter().map(|&t| sine_bessel_part(r, t)).collect(),
        ScanKernel::FractionalInside { alpha } => {
            // The node on the cone carries a zero-measure cell.
            let mut out = vec![0.0];
            for &tk in &t[1..] {
                out.push(fractional_kernel(alpha, KernelKind::Exponential, r, tk)?.norm());
            }
            out
        }
    };
    if kernel == ScanKernel::C1 {
        // Constant Yukawa value on 0 <= t < r.
        values.push(cosine_c1(r, 0.0)?);
        weights.push(r);
    }
    let window = lorentz_norm(&values, &weights, spec)?;
    if !spec.is_lebesgue() || spec.p.is_infinite() {
        return Ok(window);
    }
    let p = spec.p;
    let tail = match kernel {
        ScanKernel::C1 | ScanKernel::SineBessel => {
            let c1 = kernel == ScanKernel::C1;
            let mp = cosine_power_mean(p);
            let density = move |s: f64| {
                let t = (s * s + r * r).sqrt();
                let amp = (2.0 / (PI * s)).sqrt() / (4.0 * PI * if c1 { t } else { s });
                mp * amp.powf(p) * s / t
            };
            adaptive(
                |v| {
                    let x = s_max * f64::exp(v);
                    Complex64::new(density(x) * x, 0.0)
                },
                &[0.0, 1.0, 3.0, 8.0, 20.0, 50.0],
                Tolerance::new(0.0, 1e-8),
                500,
            )
            .value
            .re
        }
        ScanKernel::FractionalInside { .. } => {
            // Power-law envelope fitted on the last half of the window.
            let half = t.len() / 2;
            let fit = fit_loglog_raw(&t[half..], &values[half..t.len()]);
            let gamma = -fit.0 * p;
            if gamma <= 1.0 {
                return Err(Error::Divergent(format!("fitted tail t^{} is not p-integrable", fit.0)));
            }
            let t_max = *t.last().unwrap();
            fit.1.exp().powf(p) * t_max.powf(1.0 - gamma) / (gamma - 1.0)
        }
    };
    Ok((window.powf(p) + tail).powf(1.0 / p))
}

/// Unchecked log-log regression `(slope, intercept)` on positive entries.
fn fit_loglog_raw(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Time norm of a kernel at log-spaced radii, fitted to `C r^β`.
pub fn decay_scan(
    kernel: ScanKernel,
    spec: LorentzSpec,
    range: (f64, f64),
    per_decade: usize,
    sampling: TimeSampling,
) -> Result<DecayFit> {
    let (xs, ys) = decay_samples(kernel, spec, range, per_decade, sampling)?;
    fit_power_law(&xs, &ys)
}

/// The raw `(r, ‖K(r, ·)‖)` pairs behind [`decay_scan`].
pub fn decay_samples(
    kernel: ScanKernel,
    spec: LorentzSpec,
    range: (f64, f64),
    per_decade: usize,
    sampling: TimeSampling,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(range.0 > 0.0 && range.1 >= 10.0 * range.0 * (1.0 - 1e-9)) {
        return Err(Error::InvalidArgument(format!("scan range {range:?} must span a decade")));
    }
    let xs = log_grid(range.0, range.1, per_decade);
    let ys = xs
        .iter()
        .map(|&r| kernel_time_norm(kernel, r, spec, sampling))
        .collect::<Result<Vec<_>>>()?;
    Ok((xs, ys))
}

/// JSON record of one scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub kernel: String,
    pub alpha: Option<[f64; 2]>,
    pub p: f64,
    pub q: f64,
    pub variable: String,
    pub exponent: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl DecayRecord {
    pub fn new(kernel: ScanKernel, spec: LorentzSpec, fit: &DecayFit, expected: f64, tolerance: f64) -> Self {
        let alpha = match kernel {
            ScanKernel::FractionalInside { alpha } => Some([alpha.re, alpha.im]),
            _ => None,
        };
        Self {
            kernel: kernel.label(),
            alpha,
            p: spec.p,
            q: spec.q,
            variable: "r".into(),
            exponent: fit.exponent,
            expected,
            tolerance,
            pass: (fit.exponent - expected).abs() <= tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn zero_function_and_empty_input() {
        let w = vec![0.1; 10];
        assert_eq!(lorentz_norm(&[0.0; 10], &w, LorentzSpec::weak(3.0)).unwrap(), 0.0);
        assert!(lorentz_norm(&[], &[], LorentzSpec::lebesgue(2.0)).is_err());
    }

    #[test]
    fn indicator_has_unit_weak_norm() {
        let t = grid(0.0, 2.0, 2001);
        let f: Vec<f64> = t.iter().map(|&t| if t <= 1.0 { 1.0 } else { 0.0 }).collect();
        for p in [1.0, 2.0, 4.0] {
            let v = lorentz_norm_samples(&t, &f, LorentzSpec::weak(p)).unwrap();
            assert!((v - 1.0).abs() < 2e-3, "p={p}: {v}");
        }
    }

    #[test]
    fn diagonal_lorentz_is_lebesgue() {
        let t = grid(0.0, 5.0, 777);
        let f: Vec<f64> = t.iter().map(|t| (-t).exp() * (3.0 * t).cos()).collect();
        let w = cell_weights(&t);
        for p in [1.0, 1.5, 3.0] {
            let direct: f64 = f.iter().zip(&w).map(|(v, w)| v.abs().powf(p) * w).sum::<f64>().powf(1.0 / p);
            // Force the general branch by a q within rounding of p.
            let general = lorentz_norm(&f, &w, LorentzSpec { p, q: p * (1.0 + 1e-15) }).unwrap();
            assert!((general - direct).abs() < 1e-10 * direct, "p={p}");
        }
    }

    #[test]
    fn weak_four_scaling_of_the_model_profile() {
        // f(t) = t^{-1}(t²-1)^{-1/4} on t > 1. The profile r^{-3/2} f(t/r) has
        // L^{4,∞} norm r^{-3/2 + 1/4} times that of f.
        let profile = |t: f64| if t > 1.0 { 1.0 / (t * (t * t - 1.0).powf(0.25)) } else { 0.0 };
        // Quadratic clustering at the integrable singularity t = 1.
        let t: Vec<f64> = (0..=40_000).map(|k| 1.0 + 999.0 * (k as f64 / 40_000.0).powi(2)).collect();
        let spec = LorentzSpec::weak(4.0);
        let f: Vec<f64> = t.iter().map(|&t| profile(t)).collect();
        let base = lorentz_norm_samples(&t, &f, spec).unwrap();
        assert!(base.is_finite() && base > 0.0);
        for r in [2.0, 8.0] {
            let tr: Vec<f64> = t.iter().map(|t| t * r).collect();
            let g: Vec<f64> = tr.iter().map(|&s| profile(s / r) / r.powf(1.5)).collect();
            let v = lorentz_norm_samples(&tr, &g, spec).unwrap();
            assert!((v / base - r.powf(-1.25)).abs() < 1e-9 * r.powf(-1.25), "r={r}");
        }
    }

    #[test]
    fn separable_mixed_norm_factorises() {
        let radii = grid(0.1, 5.0, 50);
        let times = grid(0.0, 3.0, 40);
        let f: Vec<f64> = radii.iter().map(|r| (-r).exp()).collect();
        let g: Vec<f64> = times.iter().map(|t| 1.0 + t.sin()).collect();
        let values: Vec<f64> = f.iter().flat_map(|a| g.iter().map(move |b| a * b)).collect();
        let rw = radial_measure(&radii);
        let tw = cell_weights(&times);
        let s = SpaceTimeSamples { radial_weights: &rw, time_weights: &tw, values: &values };
        let (outer, inner) = (LorentzSpec::lebesgue(6.0), LorentzSpec::lebesgue(2.0));
        let expect = lorentz_norm(&f, &rw, outer).unwrap() * lorentz_norm(&g, &tw, inner).unwrap();
        assert!((mixed_norm(&s, outer, inner).unwrap() - expect).abs() < 1e-8 * expect);
    }

    #[test]
    fn single_radius_mixed_norm() {
        let times = grid(0.0, 1.0, 11);
        let tw = cell_weights(&times);
        let values: Vec<f64> = times.iter().map(|t| 2.0 * t).collect();
        let rw = [0.5];
        let s = SpaceTimeSamples { radial_weights: &rw, time_weights: &tw, values: &values };
        let inner = lorentz_norm(&values, &tw, LorentzSpec::lebesgue(2.0)).unwrap();
        let v = mixed_norm(&s, LorentzSpec::lebesgue(3.0), LorentzSpec::lebesgue(2.0)).unwrap();
        assert!((v - inner * 0.5f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let xs = log_grid(1.0, 100.0, 8);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.75)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.exponent + 0.75).abs() < 1e-12);
        assert!((fit.predict(10.0) - 3.0 * 10f64.powf(-0.75)).abs() < 1e-12);
    }

    #[test]
    fn fit_guards() {
        let xs = log_grid(1.0, 5.0, 20);
        let ys = xs.clone();
        assert!(matches!(fit_power_law(&xs, &ys), Err(Error::InvalidArgument(_))));
        let xs = log_grid(1.0, 100.0, 8);
        let ys: Vec<f64> = xs.iter().enumerate().map(|(k, x)| x * if k % 2 == 0 { 1.0 } else { 2.0 }).collect();
        match fit_power_law(&xs, &ys) {
            Err(Error::FitQuality { fit }) => assert!(fit.max_residual > MAX_FIT_RESIDUAL),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn c1_sup_norm_is_the_larger_cone_value() {
        // sup_t |C_1(r, t)| = max(e^{-r}, 1 - e^{-r}) / (4πr).
        for r in [0.3, 0.69, 2.0, 7.0] {
            let v = kernel_time_norm(ScanKernel::C1, r, LorentzSpec::lebesgue(f64::INFINITY), TimeSampling::default()).unwrap();
            let exact = (-r).exp().max(1.0 - (-r).exp()) / (4.0 * PI * r);
            assert!((v - exact).abs() < 1e-9 * exact, "r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn fractional_inside_cone_slopes() {
        // α = 0.6: slope 1/p - 3/2 below p = 4/(3 - 2a).
        let alpha = FractionalExponent::real(0.6).unwrap();
        let sampling = TimeSampling { ds: 0.25, span: 10.0, min_span: 60.0 };
        for p in [1.0, 2.0] {
            let fit = decay_scan(ScanKernel::FractionalInside { alpha }, LorentzSpec::lebesgue(p), (4.0, 40.0), 8, sampling)
                .unwrap();
            assert!((fit.exponent - (1.0 / p - 1.5)).abs() < 0.12, "p={p}: {fit:?}");
        }
    }

    #[test]
    fn tail_model_makes_l1_insensitive_to_the_window() {
        let spec = LorentzSpec::lebesgue(1.0);
        let short = TimeSampling { ds: 0.1, span: 10.0, min_span: 100.0 };
        let long = TimeSampling { ds: 0.1, span: 80.0, min_span: 800.0 };
        for kernel in [ScanKernel::C1, ScanKernel::SineBessel] {
            let a = kernel_time_norm(kernel, 5.0, spec, short).unwrap();
            let b = kernel_time_norm(kernel, 5.0, spec, long).unwrap();
            assert!((a - b).abs() < 5e-3 * b, "{kernel:?}: {a} vs {b}");
        }
    }
}
