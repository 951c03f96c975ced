//! Free Klein-Gordon kernels in three dimensions, as radial functions of `(r, t)`.
//!
//! `S_{1/2}(t) = sin(t√(-Δ+1))/√(-Δ+1)` splits into a light-cone mass
//! `sgn(t) δ(|t| - r)/(4πr)` and a bounded Bessel part. Every other kernel here is
//! obtained by integrating `S_{1/2}` in time against a power, with the light-cone
//! mass integrated in closed form.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{
    adaptive, algebraic_endpoint, fourier_tail, gauss_kronrod, integrate_bessel_weighted, panels,
    IntegralSpec, IntegrandForm, Tolerance,
};
use crate::specfun::{bessel_j, gamma, j1_over_z};

const KERNEL_TOL: Tolerance = Tolerance::new(1e-12, 1e-10);
/// Offset used to reach integer exponents where the S/C combinations are 0/0.
const RICHARDSON_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Sine,
    Cosine,
    Exponential,
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s" | "sine" => Ok(Self::Sine),
            "c" | "cosine" => Ok(Self::Cosine),
            "e" | "exp" | "exponential" => Ok(Self::Exponential),
            other => Err(Error::InvalidArgument(format!("unknown kernel kind '{other}'"))),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sine => "S",
            Self::Cosine => "C",
            Self::Exponential => "E",
        })
    }
}

/// Exponent `α = a + ib` of the time integration; the kernel is of order `(1 + α)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalExponent {
    pub re: f64,
    pub im: f64,
}

impl FractionalExponent {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) || !(0.0..2.5).contains(&re) {
            return Err(Error::ExponentOutOfRange(format!(
                "Re α must lie in [0, 5/2), got {re}{im:+}i"
            )));
        }
        Ok(Self { re, im })
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::new(re, 0.0)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Order `(1 + α)/2` of the resulting operator.
    pub fn order(&self) -> Complex64 {
        (1.0 + self.value()) * 0.5
    }
}

/// Regular part of `S_{1/2}`: `-sgn(t) J_1(√(t²-r²)) / (4π√(t²-r²))` on `|t| >= r`.
pub fn sine_bessel_part(r: f64, t: f64) -> f64 {
    if t.abs() < r {
        return 0.0;
    }
    let s = ((t.abs() - r) * (t.abs() + r)).sqrt();
    -t.signum() * j1_over_z(s) / (4.0 * PI)
}

/// Coefficient of the light-cone mass `δ(|t| - r)` in `S_{1/2}`.
pub fn wave_mass(r: f64) -> f64 {
    1.0 / (4.0 * PI * r)
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("radius must be positive, got {r}")))
    }
}

/// `C_1(r, t) = cos(t√(-Δ+1))/(-Δ+1)`, even in `t`.
///
/// Inside the cone the light-cone mass cancels against the Bessel integral, leaving
/// `(1/4π) ∫_0^∞ s J_0(s)/(r²+s²)^{3/2} ds`. Outside it only the Bessel tail remains.
pub fn cosine_c1(r: f64, t: f64) -> Result<f64> {
    check_radius(r)?;
    let t = t.abs();
    if t <= r {
        let res = integrate_bessel_weighted(
            &IntegralSpec::new(IntegrandForm::SigmaJ0OverRho3 { r }, 0.0).with_tol(KERNEL_TOL),
        )?;
        return Ok(res.value.re / (4.0 * PI));
    }
    let s0 = ((t - r) * (t + r)).sqrt();
    let res = integrate_bessel_weighted(
        &IntegralSpec::new(IntegrandForm::J1OverRho { r }, s0).with_tol(KERNEL_TOL),
    )?;
    Ok(-res.value.re / (4.0 * PI))
}

/// `C_1(r, √(s²+r²))` on an increasing grid of `s >= 0`, by one tail integral and
/// cumulative panels between neighbours.
pub fn cosine_c1_outside(r: f64, s: &[f64]) -> Result<Vec<f64>> {
    check_radius(r)?;
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if s.windows(2).any(|w| w[1] <= w[0]) || s[0] < 0.0 {
        return Err(Error::InvalidArgument("grid must be increasing and nonnegative".into()));
    }
    let last = *s.last().unwrap();
    let tail = integrate_bessel_weighted(
        &IntegralSpec::new(IntegrandForm::J1OverRho { r }, last).with_tol(KERNEL_TOL),
    )?;
    let mut f = |x: f64| Complex64::new(bessel_j(1, x) / (x * x + r * r).sqrt(), 0.0);
    let mut acc = tail.value.re;
    let mut out = vec![0.0; s.len()];
    out[s.len() - 1] = -acc / (4.0 * PI);
    for k in (0..s.len() - 1).rev() {
        let (a, b) = (s[k], s[k + 1]);
        // Cells stay well below a wavelength for any sensible scan grid.
        let pieces = ((b - a) / 1.5).ceil().max(1.0) as usize;
        for j in 0..pieces {
            let lo = a + (b - a) * j as f64 / pieces as f64;
            let hi = a + (b - a) * (j + 1) as f64 / pieces as f64;
            acc += gauss_kronrod(&mut f, lo, hi).value.re;
        }
        out[k] = -acc / (4.0 * PI);
    }
    Ok(out)
}

/// `M(τ₀) = ∫_{τ >= τ₀} S_{1/2}(r, τ) (τ - τ₀)^{α-1} dτ`, the building block of every
/// fractional kernel.
pub fn fractional_moment(alpha: Complex64, r: f64, tau0: f64) -> Result<Complex64> {
    let (wave, bessel) = moment_parts(alpha, r, tau0)?;
    Ok(wave + bessel)
}

/// `M(τ₀)` split into the image of the light-cone mass and of the Bessel part.
fn moment_parts(alpha: Complex64, r: f64, tau0: f64) -> Result<(Complex64, Complex64)> {
    check_radius(r)?;
    let zero = Complex64::new(0.0, 0.0);
    let pow = |x: f64| Complex64::new(x, 0.0).powc(alpha - 1.0);
    let quad = |t: f64, lower: f64| -> Result<Complex64> {
        let spec = IntegralSpec::new(IntegrandForm::FractionalWave { r, t, alpha }, lower).with_tol(KERNEL_TOL);
        Ok(integrate_bessel_weighted(&spec)?.value)
    };
    let four_pi = 4.0 * PI;
    if tau0 >= r {
        let s0 = ((tau0 - r) * (tau0 + r)).sqrt();
        return Ok((zero, -quad(tau0, s0)? / four_pi));
    }
    let inner = quad(tau0, 0.0)?;
    let front = pow(r - tau0) / r;
    if tau0 > -r {
        return Ok((front / four_pi, -inner / four_pi));
    }
    let back = tau0.abs();
    let s0 = ((back - r) * (back + r)).sqrt();
    let negative = negative_branch(alpha, r, back, s0)?;
    Ok(((front - pow(back - r) / r) / four_pi, (negative - inner) / four_pi))
}

/// `∫_0^{s₀} J_1(s)/ρ (|τ₀| - ρ)^{α-1} ds` with `ρ(s₀) = |τ₀|`.
fn negative_branch(alpha: Complex64, r: f64, back: f64, s0: f64) -> Result<Complex64> {
    if s0 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let am1 = alpha - 1.0;
    let smooth = |s: f64| {
        let rho = (s * s + r * r).sqrt();
        Complex64::new((s0 + s) / (back + rho), 0.0).powc(am1) * (bessel_j(1, s) / rho)
    };
    let split = (s0 - 1.0).max(0.0);
    let mut total = algebraic_endpoint(smooth, split, s0, alpha, true, KERNEL_TOL);
    if split > 0.0 {
        let full = |s: f64| {
            let rho = (s * s + r * r).sqrt();
            Complex64::new(back - rho, 0.0).powc(am1) * (bessel_j(1, s) / rho)
        };
        let far = adaptive(full, &panels(0.0, split, PI), KERNEL_TOL, 4000);
        total.value += far.value;
        total.error += far.error;
    }
    let target = KERNEL_TOL.abs.max(KERNEL_TOL.rel * total.value.norm());
    if total.error > 10.0 * target {
        return Err(Error::Quadrature { estimate: total.error, target });
    }
    Ok(total.value)
}

/// Kernel of `S`, `C` or `E` of order `(1 + α)/2` at `(r, t)`.
///
/// Built from `M(t) ± M(-t)` divided by `2 cos(πα/2) Γ(α)` or `2 sin(πα/2) Γ(α)`.
/// Where that denominator vanishes the value is the limit in `α`, reached by
/// Richardson extrapolation of symmetric offsets.
pub fn fractional_kernel(alpha: FractionalExponent, kind: KernelKind, r: f64, t: f64) -> Result<Complex64> {
    check_radius(r)?;
    let a = alpha.value();
    if a.re <= 0.0 {
        return Err(Error::ExponentOutOfRange(format!("Re α must be positive, got {a}")));
    }
    if a.re <= 1.0 && (t.abs() - r).abs() <= 1e-12 * r {
        return Err(Error::InvalidArgument(format!(
            "the kernel is singular on the light cone for Re α <= 1 (r = {r}, t = {t})"
        )));
    }
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    let t = t.abs();
    let cos_part = || combination(a, r, t, true);
    let sin_part = || combination(a, r, t, false);
    match kind {
        KernelKind::Cosine => cos_part(),
        KernelKind::Sine => Ok(sin_part()? * sign),
        KernelKind::Exponential => Ok(cos_part()? + Complex64::new(0.0, sign) * sin_part()?),
    }
}

fn combination(a: Complex64, r: f64, t: f64, even: bool) -> Result<Complex64> {
    let raw = |alpha: Complex64| -> Result<Complex64> {
        let plus = fractional_moment(alpha, r, t)?;
        let minus = fractional_moment(alpha, r, -t)?;
        let half = alpha * (PI / 2.0);
        Ok(if even {
            (plus + minus) / (2.0 * half.sin() * gamma(alpha))
        } else {
            (plus - minus) / (2.0 * half.cos() * gamma(alpha))
        })
    };
    let denom = if even { (a * (PI / 2.0)).sin() } else { (a * (PI / 2.0)).cos() };
    if denom.norm() > 1e-6 {
        return raw(a);
    }
    let avg = |d: f64| -> Result<Complex64> { Ok((raw(a + d)? + raw(a - d)?) * 0.5) };
    let h = RICHARDSON_STEP;
    Ok((avg(h)? * 4.0 - avg(2.0 * h)?) / 3.0)
}

/// Closed-form sine transform `(1/2) ∫ S_{1/2}(r, t) sin(τt) dt`.
pub fn sine_fourier_transform_check(r: f64, tau: f64) -> f64 {
    if tau.abs() < 1.0 {
        return 0.0;
    }
    tau.signum() * ((tau * tau - 1.0).sqrt() * r).sin() / (4.0 * PI * r)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierSupport {
    pub r: f64,
    pub half_window: f64,
    pub samples: usize,
    /// Mean spectral energy on `|τ| < 0.9` relative to the mean on the comparison band.
    pub inner_energy_ratio: f64,
    /// Relative L² error against the closed form on `[1.1, 0.8 Nyquist]`.
    pub band_error: f64,
    pub band: (f64, f64),
    /// `(τ, measured, closed form)` for `0 <= τ <= 10`.
    #[serde(skip)]
    pub spectrum: Vec<(f64, f64, f64)>,
}

/// FFT of the sampled `S_{1/2}(r, ·)` on `[-W, W]` against the closed-form transform.
///
/// The Bessel part is odd, so only `t >= 0` is sampled. Its jump at the light cone is
/// removed with an exponential whose transform is exact, and the light-cone mass is
/// added analytically.
pub fn fourier_support_check(r: f64, half_window: f64, samples: usize) -> Result<FourierSupport> {
    check_radius(r)?;
    if samples < 64 || !samples.is_power_of_two() {
        return Err(Error::InvalidArgument("samples must be a power of two >= 64".into()));
    }
    let dt = 2.0 * half_window / samples as f64;
    let jump = |t: f64| if t >= r { -(-(t - r)).exp() / (8.0 * PI) } else { 0.0 };
    let half = samples / 2;
    let mut buf: Vec<Complex64> = (0..samples)
        .map(|j| {
            if j > half {
                return Complex64::new(0.0, 0.0);
            }
            let t = j as f64 * dt;
            let w = if j == half { 0.5 } else { 1.0 };
            Complex64::new(w * dt * (sine_bessel_part(r, t) - jump(t)), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(samples).process(&mut buf);

    let nyquist = PI / dt;
    let band = (1.1, 0.8 * nyquist);
    let (mut inner, mut n_inner) = (0.0, 0usize);
    let (mut band_energy, mut band_err, mut n_band) = (0.0, 0.0, 0usize);
    let mut spectrum = Vec::new();
    for (k, x) in buf.iter().enumerate().take(half) {
        let tau = 2.0 * PI * k as f64 / (samples as f64 * dt);
        let jump_hat = -((tau * r).sin() + tau * (tau * r).cos()) / (8.0 * PI * (1.0 + tau * tau));
        let value = -x.im + jump_hat + (tau * r).sin() * wave_mass(r);
        if tau <= 10.0 {
            spectrum.push((tau, value, sine_fourier_transform_check(r, tau)));
        }
        if tau < 0.9 {
            inner += value * value;
            n_inner += 1;
        } else if tau >= band.0 && tau <= band.1 {
            let exact = sine_fourier_transform_check(r, tau);
            band_energy += exact * exact;
            band_err += (value - exact).powi(2);
            n_band += 1;
        }
    }
    if n_inner == 0 || n_band == 0 {
        return Err(Error::Grid("window too short to resolve |τ| < 0.9".into()));
    }
    Ok(FourierSupport {
        r,
        half_window,
        samples,
        inner_energy_ratio: (inner / n_inner as f64) / (band_energy / n_band as f64),
        band_error: (band_err / band_energy).sqrt(),
        band,
        spectrum,
    })
}

/// Radial profile of the kernel of `(-Δ+1)^{-α}` at `|x| = ρ`,
/// `(1/(2π²ρ)) ∫_0^∞ k (k²+1)^{-α} sin(kρ) dk`.
pub fn resolvent_power_kernel(alpha: FractionalExponent, rho: f64) -> Result<Complex64> {
    let a = alpha.value();
    if !(a.re > 0.0 && a.re < 1.5) {
        return Err(Error::ExponentOutOfRange(format!("Re α must lie in (0, 3/2), got {a}")));
    }
    check_radius(rho)?;
    let g = |k: Complex64| k * (k * k + 1.0).powc(-a);
    let cut = 10.0;
    let near = adaptive(
        |k| g(Complex64::new(k, 0.0)) * (k * rho).sin(),
        &panels(0.0, cut, (PI / rho).min(1.0)),
        Tolerance::new(1e-15, 1e-12),
        4000,
    );
    let tol = Tolerance::new(1e-15, 1e-12);
    let up = fourier_tail(g, cut, rho, tol)?;
    let down = fourier_tail(g, cut, -rho, tol)?;
    let far = (up.value - down.value) / Complex64::new(0.0, 2.0);
    Ok((near.value + far) / (2.0 * PI * PI * rho))
}

/// `1/(t ⟨t²-r²⟩^{1/4})` outside the cone; `e^{-r}/√r` or `1/r` inside.
pub fn c1_bound(r: f64, t: f64) -> f64 {
    let t = t.abs();
    if t > r {
        1.0 / (t * japanese(t * t - r * r).powf(0.25))
    } else if r > 1.0 {
        (-r).exp() / r.sqrt()
    } else {
        1.0 / r
    }
}

/// Envelope for the kernel of order `(1 + α)/2`, `a = Re α`.
pub fn fractional_bound(a: f64, r: f64, t: f64) -> f64 {
    let t = t.abs();
    if t > r {
        1.0 / (t.powf(a) * japanese(t * t - r * r).powf(0.75 - 0.5 * a))
    } else if r >= 1.0 {
        (-r).exp() / (t.powf(1.0 - a) * r.sqrt())
    } else {
        1.0 / (r * (r - t).powf(1.0 - a))
    }
}

/// `⟨t²-r²⟩^{-3/4}` for the Bessel part of `S_{1/2}`.
pub fn bessel_part_bound(r: f64, t: f64) -> f64 {
    japanese(t * t - r * r).powf(-0.75)
}

fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Sampling lattice in `(r, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTimeGrid {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
}

impl RadialTimeGrid {
    pub fn new(radii: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || times.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Grid("radii must be positive and both axes nonempty".into()));
        }
        Ok(Self { radii, times })
    }

    pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![a];
        }
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        Self::linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
    }
}

/// Samples of a kernel's regular part. The light-cone mass of `S_{1/2}` is never
/// sampled; `wave_mass` records that it is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelField {
    pub kind: KernelKind,
    pub alpha: FractionalExponent,
    pub grid: RadialTimeGrid,
    /// Row-major in `r`.
    pub values: Vec<Complex64>,
    pub wave_mass: bool,
}

impl KernelField {
    /// `α = 0` with kind `S` gives `S_{1/2}`; `α = 1` with kind `C` gives `C_1`.
    pub fn sample(kind: KernelKind, alpha: FractionalExponent, grid: RadialTimeGrid) -> Result<Self> {
        let a = alpha.value();
        let free_sine = kind == KernelKind::Sine && a == Complex64::new(0.0, 0.0);
        let cosine_one = kind == KernelKind::Cosine && a == Complex64::new(1.0, 0.0);
        let mut values = Vec::with_capacity(grid.radii.len() * grid.times.len());
        for &r in &grid.radii {
            for &t in &grid.times {
                let v = if free_sine {
                    Complex64::new(sine_bessel_part(r, t), 0.0)
                } else if cosine_one {
                    Complex64::new(cosine_c1(r, t)?, 0.0)
                } else {
                    fractional_kernel(alpha, kind, r, t)?
                };
                values.push(v);
            }
        }
        Ok(Self { kind, alpha, grid, values, wave_mass: free_sine })
    }

    pub fn at(&self, i_r: usize, i_t: usize) -> Complex64 {
        self.values[i_r * self.grid.times.len() + i_t]
    }

    /// Time series at radius index `i_r`.
    pub fn row(&self, i_r: usize) -> &[Complex64] {
        let n = self.grid.times.len();
        &self.values[i_r * n..(i_r + 1) * n]
    }

    /// CSV with columns `r,t,re,im,wave_mass_coeff`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,t,re,im,wave_mass_coeff")?;
        for (i, &r) in self.grid.radii.iter().enumerate() {
            let mass = if self.wave_mass { wave_mass(r) } else { 0.0 };
            for (j, &t) in self.grid.times.iter().enumerate() {
                let v = self.at(i, j);
                writeln!(out, "{r:.17e},{t:.17e},{:.17e},{:.17e},{mass:.17e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    pub fn sidecar(&self) -> serde_json::Value {
        let span = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            [lo, hi]
        };
        serde_json::json!({
            "kind": self.kind,
            "alpha": [self.alpha.re, self.alpha.im],
            "order": [self.alpha.order().re, self.alpha.order().im],
            "n_r": self.grid.radii.len(),
            "n_t": self.grid.times.len(),
            "r_range": span(&self.grid.radii),
            "t_range": span(&self.grid.times),
            "wave_mass": self.wave_mass,
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let csv = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        self.write_csv(std::io::BufWriter::new(csv))?;
        let json = std::fs::File::create(dir.join(format!("{stem}.json")))?;
        serde_json::to_writer_pretty(json, &self.sidecar())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_j;

    fn yukawa(r: f64) -> f64 {
        (-r).exp() / (4.0 * PI * r)
    }

    #[test]
    fn bessel_part_on_and_off_the_cone() {
        assert!((sine_bessel_part(2.0, 2.0) + 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert!((sine_bessel_part(2.0, -2.0) - 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert_eq!(sine_bessel_part(2.0, 1.9), 0.0);
        let s = 24f64.sqrt();
        assert!((sine_bessel_part(1.0, 5.0) + bessel_j(1, s) / (4.0 * PI * s)).abs() < 1e-15);
    }

    #[test]
    fn c1_inside_the_cone_is_yukawa() {
        for &r in &[0.3, 1.0, 4.0, 10.0] {
            let v = cosine_c1(r, 0.5 * r).unwrap();
            assert!((v - yukawa(r)).abs() < 1e-12 * (1.0 + 1.0 / r), "r={r}");
        }
        // Exponential decay against e^{-r}/√r.
        assert!(cosine_c1(10.0, 0.0).unwrap().abs() <= (-10f64).exp() / 10f64.sqrt());
    }

    #[test]
    fn c1_jump_across_the_cone() {
        for &r in &[0.5, 2.0, 7.0] {
            let eps = 1e-7;
            let jump = cosine_c1(r, r - eps).unwrap() - cosine_c1(r, r + eps).unwrap();
            assert!((jump - wave_mass(r)).abs() < 1e-6, "r={r}");
        }
    }

    #[test]
    fn c1_outside_bound_has_one_constant() {
        let r = 2.0;
        let ratios: Vec<f64> = RadialTimeGrid::linspace(2.05, 50.0, 200)
            .into_iter()
            .map(|t| cosine_c1(r, t).unwrap().abs() / c1_bound(r, t))
            .collect();
        let max = ratios.iter().copied().fold(0.0, f64::max);
        assert!(max < 0.2, "{max}");
    }

    #[test]
    fn cumulative_profile_matches_pointwise() {
        let r = 3.0;
        let s: Vec<f64> = (0..400).map(|k| 0.1 * k as f64).collect();
        let prof = cosine_c1_outside(r, &s).unwrap();
        for k in [0, 17, 150, 399] {
            let t = (s[k] * s[k] + r * r).sqrt();
            let direct = if k == 0 { cosine_c1(r, r + 1e-14).unwrap() } else { cosine_c1(r, t).unwrap() };
            assert!((prof[k] - direct).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn unit_exponent_cosine_is_c1() {
        let one = FractionalExponent::real(1.0).unwrap();
        for &(r, t) in &[(1.0, 0.4), (2.0, 3.5), (0.7, 6.0), (3.0, 0.0)] {
            let v = fractional_kernel(one, KernelKind::Cosine, r, t).unwrap();
            assert!((v.re - cosine_c1(r, t).unwrap()).abs() < 1e-10, "({r},{t})");
            assert!(v.im.abs() < 1e-14);
        }
    }

    /// `(1/(2π²r)) ∫_0^∞ k sin(kr) m(k) dk` with `m(k) = ⟨k⟩^{-1-α}` times `cos`, `sin` or
    /// `exp(i t⟨k⟩)`. Each exponential piece is rotated off the axis beyond `k = 40`.
    fn spectral_oracle(alpha: Complex64, kind: KernelKind, r: f64, t: f64) -> Complex64 {
        let beta = alpha + 1.0;
        let i = Complex64::new(0.0, 1.0);
        // Terms c e^{i(a t⟨k⟩ + b k r)} from sin(kr) = (e^{ikr} - e^{-ikr})/2i.
        let time_terms: Vec<(f64, Complex64)> = match kind {
            KernelKind::Cosine => vec![(1.0, Complex64::new(0.5, 0.0)), (-1.0, Complex64::new(0.5, 0.0))],
            KernelKind::Sine => vec![(1.0, -0.5 * i), (-1.0, 0.5 * i)],
            KernelKind::Exponential => vec![(1.0, Complex64::new(1.0, 0.0))],
        };
        let jp = |z: Complex64| (z * z + 1.0).sqrt();
        let cut = 40.0;
        let tol = Tolerance::new(1e-15, 1e-13);
        let mut total = Complex64::new(0.0, 0.0);
        for &(a, ca) in &time_terms {
            for &(b, cb) in &[(1.0, -0.5 * i), (-1.0, 0.5 * i)] {
                let c = ca * cb;
                let f = |z: Complex64| c * z * jp(z).powc(-beta) * (i * (a * t * jp(z) + b * r * z)).exp();
                let near = adaptive(|k| f(Complex64::new(k, 0.0)), &panels(0.0, cut, 0.25), tol, 20000);
                let rate = a * t + b * r;
                assert!(rate.abs() > 0.1, "oracle needs |t| away from r");
                let d = rate.signum();
                let ymax = 46.0 / rate.abs();
                let far = adaptive(
                    |y| f(Complex64::new(cut, d * y)) * i * d,
                    &[0.0, 0.02 * ymax, 0.1 * ymax, 0.4 * ymax, ymax],
                    tol,
                    4000,
                );
                total += near.value + far.value;
            }
        }
        total / (2.0 * PI * PI * r)
    }

    #[test]
    fn fractional_kernels_match_the_spectral_oracle() {
        let cases = [
            (Complex64::new(1.0, 0.0), KernelKind::Cosine, 1.5, 0.6),
            (Complex64::new(1.0, 0.0), KernelKind::Sine, 1.5, 4.0),
            (Complex64::new(1.0, 0.0), KernelKind::Sine, 2.0, 0.7),
            (Complex64::new(0.6, 0.2), KernelKind::Exponential, 1.0, 3.0),
            (Complex64::new(0.6, 0.2), KernelKind::Exponential, 2.0, 0.5),
            (Complex64::new(1.5, 0.0), KernelKind::Sine, 0.8, 5.0),
            (Complex64::new(2.0, 0.0), KernelKind::Cosine, 1.2, 2.5),
            (Complex64::new(2.2, -0.3), KernelKind::Exponential, 3.0, 1.0),
        ];
        for (a, kind, r, t) in cases {
            let al = FractionalExponent::new(a.re, a.im).unwrap();
            let v = fractional_kernel(al, kind, r, t).unwrap();
            let o = spectral_oracle(a, kind, r, t);
            assert!((v - o).norm() < 1e-7 * (1.0 + o.norm()), "{kind} α={a} ({r},{t}): {v} vs {o}");
        }
    }

    #[test]
    fn parity_of_the_combinations() {
        let al = FractionalExponent::new(0.6, 0.2).unwrap();
        let (r, t) = (1.2, 2.7);
        let c = fractional_kernel(al, KernelKind::Cosine, r, t).unwrap();
        let s = fractional_kernel(al, KernelKind::Sine, r, t).unwrap();
        assert!((fractional_kernel(al, KernelKind::Cosine, r, -t).unwrap() - c).norm() < 1e-14);
        assert!((fractional_kernel(al, KernelKind::Sine, r, -t).unwrap() + s).norm() < 1e-14);
        let e = fractional_kernel(al, KernelKind::Exponential, r, -t).unwrap();
        assert!((e - (c - Complex64::new(0.0, 1.0) * s)).norm() < 1e-14);
    }

    #[test]
    fn light_cone_is_rejected_for_small_exponents() {
        let al = FractionalExponent::real(0.5).unwrap();
        assert!(fractional_kernel(al, KernelKind::Exponential, 1.0, 1.0).is_err());
        assert!(FractionalExponent::real(2.6).is_err());
    }

    #[test]
    fn small_radius_envelope_inside_cone() {
        let al = FractionalExponent::real(0.5).unwrap();
        let r = 0.5;
        let worst = RadialTimeGrid::linspace(0.0, 0.49, 25)
            .into_iter()
            .map(|t| fractional_kernel(al, KernelKind::Exponential, r, t).unwrap().norm() / fractional_bound(0.5, r, t))
            .fold(0.0, f64::max);
        assert!(worst < 1.0, "{worst}");
    }

    #[test]
    fn endpoint_exponent_decays_like_t_to_minus_three_halves() {
        let al = FractionalExponent::real(1.5).unwrap();
        let radii = [0.5, 2.0, 8.0];
        let mut comp = Vec::new();
        for &t in &[1.0, 3.0, 10.0, 30.0, 100.0] {
            let sup = radii
                .iter()
                .map(|&r| fractional_kernel(al, KernelKind::Exponential, r, t).unwrap().norm())
                .fold(0.0, f64::max);
            comp.push(sup * t.powf(1.5));
        }
        let max = comp.iter().copied().fold(0.0, f64::max);
        assert!(max < 1.0, "{comp:?}");
    }

    #[test]
    fn fourier_transform_closed_form() {
        let r = PI / 4.0;
        let v = sine_fourier_transform_check(r, 2f64.sqrt());
        assert!((v - (PI / 4.0).sin() / (4.0 * PI * r)).abs() < 1e-15);
        assert_eq!(sine_fourier_transform_check(1.0, 0.7), 0.0);
    }

    #[test]
    fn sampled_sine_kernel_has_no_spectrum_below_the_mass() {
        let rep = fourier_support_check(1.0, 200.0, 1 << 15).unwrap();
        assert!(rep.inner_energy_ratio < 1e-2, "{rep:?}");
        assert!(rep.band_error < 1e-2, "{rep:?}");
    }

    #[test]
    fn resolvent_kernel_at_unit_power_is_yukawa() {
        let one = FractionalExponent::real(1.0).unwrap();
        for &rho in &[0.1, 1.0, 3.0, 8.0] {
            let v = resolvent_power_kernel(one, rho).unwrap().re;
            assert!((v - yukawa(rho)).abs() < 1e-8, "rho={rho}: {v}");
        }
    }

    #[test]
    fn resolvent_kernel_against_real_integral() {
        // For α < 1: (sin πα / (2π²ρ)) ∫_1^∞ y (y²-1)^{-α} e^{-ρy} dy.
        let a = 0.5;
        let al = FractionalExponent::real(a).unwrap();
        for &rho in &[0.5, 2.0, 10.0] {
            let m = 1.0 / (1.0 - a);
            let res = adaptive(
                |u| {
                    // y - 1 = u^m removes the endpoint singularity.
                    if u <= 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let d = u.powf(m);
                    let y = 1.0 + d;
                    let w = m * u.powf(m - 1.0);
                    Complex64::new(y * (d * (y + 1.0)).powf(-a) * (-rho * y).exp() * w, 0.0)
                },
                &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0],
                Tolerance::new(1e-18, 1e-13),
                2000,
            );
            let oracle = (PI * a).sin() / (2.0 * PI * PI * rho) * res.value.re;
            let v = resolvent_power_kernel(al, rho).unwrap().re;
            assert!((v - oracle).abs() < 1e-9 * (1.0 + oracle.abs()), "rho={rho}: {v} vs {oracle}");
        }
        assert!(resolvent_power_kernel(al, 10.0).unwrap().re < (-5f64).exp());
    }

    #[test]
    fn resolvent_kernel_small_distance_singularity() {
        let al = FractionalExponent::real(0.75).unwrap();
        let (r1, r2) = (1e-3, 1e-2);
        let k1 = resolvent_power_kernel(al, r1).unwrap().re;
        let k2 = resolvent_power_kernel(al, r2).unwrap().re;
        let slope = (k2.ln() - k1.ln()) / (r2.ln() - r1.ln());
        assert!((slope - (2.0 * 0.75 - 3.0)).abs() < 0.05, "{slope}");
    }

    #[test]
    fn csv_export_round_trip_shape() {
        let grid = RadialTimeGrid::new(vec![1.0, 2.0], vec![0.0, 1.5, 3.0]).unwrap();
        let zero = FractionalExponent::real(0.0).unwrap();
        let field = KernelField::sample(KernelKind::Sine, zero, grid).unwrap();
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().nth(1).unwrap().ends_with(&format!("{:.17e}", wave_mass(1.0))));
        let dir = tempfile::tempdir().unwrap();
        field.export(dir.path(), "s12").unwrap();
        let meta: serde_json::Value =
            serde_json::from_reader(std::fs::File::open(dir.path().join("s12.json")).unwrap()).unwrap();
        assert_eq!(meta["n_t"], 3);
    }
}
