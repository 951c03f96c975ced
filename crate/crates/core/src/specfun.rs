//! Bessel and Hankel functions of integer order, and a complex Gamma function.
//!
//! Real arguments use the power series below [`SERIES_LIMIT`], Miller's backward
//! recurrence up to [`ASYMPTOTIC_LIMIT`], and the Hankel expansion beyond it.

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, Tolerance};

pub const SERIES_LIMIT: f64 = 8.0;
pub const ASYMPTOTIC_LIMIT: f64 = 25.0;
/// Below this modulus the complex Hankel function is summed from its series.
const COMPLEX_SERIES_LIMIT: f64 = 4.0;
/// Above this modulus the complex Hankel expansion is accurate to rounding.
pub const COMPLEX_ASYMPTOTIC_LIMIT: f64 = 20.0;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `J_n(x)` for integer `n >= 0` and real `x`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT {
        return series_j(n, x);
    }
    if x >= ASYMPTOTIC_LIMIT && (n as f64) < 0.5 * x {
        let j0 = asymptotic_jy(0, x).0;
        if n == 0 {
            return j0;
        }
        let j1 = asymptotic_jy(1, x).0;
        return forward_recurrence(n, x, j0, j1);
    }
    miller(n as usize, x)[n as usize]
}

/// `J_0(x), ..., J_nmax(x)` in one pass.
pub fn bessel_j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    if x.abs() < SERIES_LIMIT || x == 0.0 {
        return (0..=nmax).map(|n| bessel_j(n as u32, x)).collect();
    }
    let mut out = miller(nmax, x.abs());
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `Y_0(x)` for `x > 0`; `NaN` otherwise.
pub fn bessel_y0(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x < SERIES_LIMIT {
        return series_y0(x);
    }
    if x >= ASYMPTOTIC_LIMIT {
        return asymptotic_jy(0, x).1;
    }
    let (y0, _) = neumann_y0_y1(x);
    y0
}

/// `Y_1(x)` for `x > 0`; `NaN` otherwise.
pub fn bessel_y1(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x < SERIES_LIMIT {
        return series_y1(x);
    }
    if x >= ASYMPTOTIC_LIMIT {
        return asymptotic_jy(1, x).1;
    }
    neumann_y0_y1(x).1
}

/// `J_1(z)/z`, equal to `1/2` at the origin.
pub fn j1_over_z(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        return 0.5 - z2 / 16.0 + z2 * z2 / 384.0;
    }
    bessel_j(1, z) / z
}

/// `∫_a^∞ J_1(σ) dσ`, which is `J_0(a)`.
pub fn j1_tail_integral(a: f64) -> f64 {
    bessel_j(0, a)
}

/// Slow reference path: `J_n(x) = (1/2π) ∫_0^{2π} cos(nθ - x sin θ) dθ` by the
/// trapezoid rule, which converges geometrically for periodic analytic integrands.
pub fn bessel_j_integral(n: u32, x: f64) -> f64 {
    let m = 2 * (n as usize + x.abs().ceil() as usize) + 64;
    let h = 2.0 * PI / m as f64;
    let nf = n as f64;
    let sum: f64 = (0..m)
        .map(|k| {
            let th = k as f64 * h;
            (nf * th - x * th.sin()).cos()
        })
        .sum();
    sum / m as f64
}

/// Outgoing Hankel function `H_1^+(z) = J_1(z) + i Y_1(z)` on the closed upper half-plane.
pub fn hankel_h1_plus(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite argument {z}")));
    }
    if z.im < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "H_1^+ is evaluated on Im z >= 0, got {z}"
        )));
    }
    if z.norm() == 0.0 {
        return Err(Error::InvalidArgument("H_1^+ is singular at 0".into()));
    }
    if z.im == 0.0 && z.re > 0.0 {
        return Ok(Complex64::new(bessel_j(1, z.re), bessel_y1(z.re)));
    }
    let m = z.norm();
    if m >= COMPLEX_ASYMPTOTIC_LIMIT {
        Ok(hankel_plus_asymptotic(1, z))
    } else if m <= COMPLEX_SERIES_LIMIT {
        Ok(hankel1_series(z))
    } else {
        Ok(hankel1_laplace(z))
    }
}

/// Hankel expansion of `H_n^+(z)`, valid for `-π < arg z < 2π` and accurate to rounding
/// once `|z| >= 20`.
pub fn hankel_plus_asymptotic(n: u32, z: Complex64) -> Complex64 {
    let mu = 4.0 * (n * n) as f64;
    let iz8 = Complex64::new(0.0, 1.0) / (8.0 * z);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = 1.0;
    for k in 1..80 {
        let kf = k as f64;
        term *= iz8 * ((mu - (2.0 * kf - 1.0).powi(2)) / kf);
        let size = term.norm();
        if size > last && k > 2 {
            break;
        }
        sum += term;
        last = size;
        if size < 1e-17 * sum.norm() {
            break;
        }
    }
    let phase = z - (0.5 * n as f64 + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (Complex64::new(0.0, 1.0) * phase).exp() * sum
}

/// Incoming Hankel function `H_n^-(z) = conj(H_n^+(conj z))` for `|z| >= 20`.
pub fn hankel_minus_asymptotic(n: u32, z: Complex64) -> Complex64 {
    hankel_plus_asymptotic(n, z.conj()).conj()
}

/// Gamma function on the complex plane (Lanczos, g = 7).
pub fn gamma(z: Complex64) -> Complex64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi / ((pi * z).sin() * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(COEF[0], 0.0);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Real Gamma function.
pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

/// First zero of `J_n` (n = 0 or 1) at or beyond `s`, with `s >= 10`.
pub fn bessel_zero_after(n: u32, s: f64) -> f64 {
    debug_assert!(n <= 1);
    let s = s.max(10.0);
    let offset = if n == 0 { -0.25 } else { 0.25 };
    let mu = 4.0 * (n * n) as f64;
    let mut m = (s / PI - offset).floor().max(1.0);
    loop {
        let beta = (m + offset) * PI;
        // McMahon's expansion, then Newton.
        let mut x = beta - (mu - 1.0) / (8.0 * beta) - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta).powi(3));
        for _ in 0..4 {
            let f = bessel_j(n, x);
            let df = if n == 0 {
                -bessel_j(1, x)
            } else {
                bessel_j(0, x) - bessel_j(1, x) / x
            };
            x -= f / df;
        }
        if x >= s {
            return x;
        }
        m += 1.0;
    }
}

fn series_j(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= h / k as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = -h * h;
    let nf = n as f64;
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nf));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() || term.abs() < 1e-300 {
            break;
        }
    }
    sum
}

fn series_y0(x: f64) -> f64 {
    let h = 0.5 * x;
    let q = h * h;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        let add = -term * harmonic;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_PI * ((h.ln() + EULER_GAMMA) * series_j(0, x) + sum)
}

fn series_y1(x: f64) -> f64 {
    let h = 0.5 * x;
    let q = -h * h;
    let mut term = h;
    let mut psi1 = -EULER_GAMMA;
    let mut psi2 = 1.0 - EULER_GAMMA;
    let mut sum = term * (psi1 + psi2);
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        psi1 += 1.0 / kf;
        psi2 += 1.0 / (kf + 1.0);
        let add = term * (psi1 + psi2);
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_PI * series_j(1, x) * h.ln() - FRAC_2_PI / x - sum / PI
}

/// Backward recurrence normalized by `J_0 + 2 Σ J_{2k} = 1`.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let top = nmax.max(x.ceil() as usize);
    let mut m = top + 25 + (40.0 * top as f64).sqrt() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut out = vec![0.0; nmax + 1];
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        if k <= nmax {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

fn forward_recurrence(n: u32, x: f64, j0: f64, j1: f64) -> f64 {
    let (mut a, mut b) = (j0, j1);
    for k in 1..n {
        let c = 2.0 * k as f64 / x * b - a;
        a = b;
        b = c;
    }
    if n == 0 {
        a
    } else {
        b
    }
}

/// Neumann series `Y_0 = (2/π)(ln(x/2) + γ) J_0 - (4/π) Σ (-1)^k J_{2k}/k`, and
/// `Y_1 = -Y_0'` from the same Bessel sequence.
fn neumann_y0_y1(x: f64) -> (f64, f64) {
    let m = x.ceil() as usize + 40;
    let j = miller(m + 1, x);
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k < m {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / (2.0 * kf);
        k += 1;
    }
    let y0 = FRAC_2_PI * lg * j[0] - 2.0 * FRAC_2_PI * s0;
    let dy0 = FRAC_2_PI * (j[0] / x - lg * j[1]) - 2.0 * FRAC_2_PI * s1;
    (y0, -dy0)
}

/// `(J_n(x), Y_n(x))` from the Hankel expansion.
fn asymptotic_jy(n: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (n * n) as f64;
    let inv8x = 1.0 / (8.0 * x);
    let (mut p, mut q) = (1.0, 0.0);
    let mut a: f64 = 1.0;
    for k in 1..80 {
        let kf = k as f64;
        let next = a * (mu - (2.0 * kf - 1.0).powi(2)) * inv8x / kf;
        if next.abs() > a.abs() && k > 2 {
            break;
        }
        a = next;
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * n as f64) * PI - FRAC_PI_4;
    let amp = (FRAC_2_PI / x).sqrt();
    let (s, c) = chi.sin_cos();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

fn hankel1_series(z: Complex64) -> Complex64 {
    let h = 0.5 * z;
    let q = -h * h;
    let mut term = h;
    let mut j1 = term;
    let mut psi1 = -EULER_GAMMA;
    let mut psi2 = 1.0 - EULER_GAMMA;
    let mut s = term * (psi1 + psi2);
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        psi1 += 1.0 / kf;
        psi2 += 1.0 / (kf + 1.0);
        j1 += term;
        s += term * (psi1 + psi2);
        if term.norm() < 1e-18 * j1.norm().max(1e-300) {
            break;
        }
    }
    let y1 = FRAC_2_PI * j1 * h.ln() - FRAC_2_PI / z - s / PI;
    j1 + Complex64::new(0.0, 1.0) * y1
}

/// Laplace-type representation
/// `H_1^+(z) = sqrt(2/(πz)) e^{i(z-3π/4)} (4/√π) ∫_0^∞ s² e^{-s²} (1 + i s²/(2z))^{1/2} ds`.
fn hankel1_laplace(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let c = i / (2.0 * z);
    let res = adaptive(
        |s| {
            let s2 = s * s;
            s2 * (-s2).exp() * (1.0 + c * s2).sqrt()
        },
        &[0.0, 1.0, 2.0, 3.5, 7.0],
        Tolerance::new(1e-16, 1e-14),
        400,
    );
    (2.0 / (PI * z)).sqrt() * (i * (z - 0.75 * PI)).exp() * (4.0 / PI.sqrt()) * res.value
}
