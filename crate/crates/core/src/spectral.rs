//! Radial Klein-Gordon evolution by spectral calculus on `[0, R]`.
//!
//! Radial `u` is carried as `w = r u`, which turns `-Δ` into `-d²/dr²` with Dirichlet
//! conditions at both ends. The free flow is diagonal in the sine basis; with a
//! potential the discrete Hamiltonian is diagonalised once and reused.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelKind;
use crate::norms::{fit_power_law, lorentz_norm, DecayFit, LorentzSpec};
use crate::quadrature::{adaptive, panels, Tolerance};
use crate::specfun::j1_over_z;

/// Uniform grid `r_j = j h`, `j = 1..=n`, `h = R/(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid1D {
    pub radius: f64,
    pub n: usize,
}

impl RadialGrid1D {
    pub fn new(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || n < 2 {
            return Err(Error::Grid(format!("need R > 0 and N >= 2, got R = {radius}, N = {n}")));
        }
        Ok(Self { radius, n })
    }

    /// Grid with spacing as close as possible to `h`.
    pub fn with_spacing(radius: f64, h: f64) -> Result<Self> {
        Self::new(radius, ((radius / h).round() as usize).saturating_sub(1))
    }

    pub fn h(&self) -> f64 {
        self.radius / (self.n + 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.h();
        (1..=self.n).map(|j| j as f64 * h).collect()
    }

    /// Free frequencies `λ_k = kπ/R`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (1..=self.n).map(|k| k as f64 * PI / self.radius).collect()
    }

    /// Index of the node nearest to `r`.
    pub fn index_of(&self, r: f64) -> usize {
        ((r / self.h()).round() as usize).clamp(1, self.n) - 1
    }
}

/// DST-I on `n` points through a complex FFT of length `2(n+1)`.
#[derive(Clone)]
pub struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform").field("n", &self.n).finish()
    }
}

impl SineTransform {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        Self { n, fft }
    }

    /// `Σ_j x_j sin(π j k/(n+1))` for `k = 1..=n`.
    fn raw(&self, x: &[f64]) -> Vec<f64> {
        let m = 2 * (self.n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1] = Complex64::new(v, 0.0);
            buf[m - j - 1] = Complex64::new(-v, 0.0);
        }
        self.fft.process(&mut buf);
        buf[1..=self.n].iter().map(|z| -0.5 * z.im).collect()
    }

    /// Coefficients `b_k` with `w_j = Σ_k b_k sin(λ_k r_j)`.
    pub fn forward(&self, w: &[f64]) -> Vec<f64> {
        let scale = 2.0 / (self.n + 1) as f64;
        self.raw(w).into_iter().map(|v| v * scale).collect()
    }

    pub fn inverse(&self, b: &[f64]) -> Vec<f64> {
        self.raw(b)
    }

    pub fn inverse_complex(&self, b: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = b.iter().map(|z| z.re).collect();
        let im: Vec<f64> = b.iter().map(|z| z.im).collect();
        self.raw(&re).into_iter().zip(self.raw(&im)).map(|(a, b)| Complex64::new(a, b)).collect()
    }
}

/// Coefficients of `w = r u` in the sine basis `sin(kπr/R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    pub grid: RadialGrid1D,
    pub coefficients: Vec<f64>,
}

impl SpectralState {
    pub fn from_profile(grid: RadialGrid1D, u: &[f64]) -> Result<Self> {
        check_len(&grid, u)?;
        let w: Vec<f64> = grid.nodes().iter().zip(u).map(|(r, u)| r * u).collect();
        Ok(Self { grid, coefficients: SineTransform::new(grid.n).forward(&w) })
    }

    /// `∫_0^R w² dr = (R/2) Σ b_k²`.
    pub fn l2_squared(&self) -> f64 {
        0.5 * self.grid.radius * self.coefficients.iter().map(|b| b * b).sum::<f64>()
    }

    /// `‖u‖²_{L²(ℝ³)}`, `‖∇u‖²_{L²(ℝ³)}`.
    pub fn energies(&self) -> (f64, f64) {
        let half = 0.5 * self.grid.radius * 4.0 * PI;
        let mass = half * self.coefficients.iter().map(|b| b * b).sum::<f64>();
        let grad = half * self.coefficients.iter().zip(self.grid.wavenumbers()).map(|(b, l)| (b * l).powi(2)).sum::<f64>();
        (mass, grad)
    }

    pub fn value_at_origin(&self) -> f64 {
        self.coefficients.iter().zip(self.grid.wavenumbers()).map(|(b, l)| b * l).sum()
    }

    /// Fraction of `Σ (λ_k²+1) b_k²` carried by modes above `0.8 N`.
    pub fn high_mode_fraction(&self) -> f64 {
        let cut = (0.8 * self.grid.n as f64).floor() as usize;
        let lam = self.grid.wavenumbers();
        let e = |k: usize| (lam[k] * lam[k] + 1.0) * self.coefficients[k].powi(2);
        let total: f64 = (0..self.grid.n).map(e).sum();
        if total == 0.0 {
            return 0.0;
        }
        (cut..self.grid.n).map(e).sum::<f64>() / total
    }
}

fn check_len(grid: &RadialGrid1D, v: &[f64]) -> Result<()> {
    if v.len() != grid.n {
        return Err(Error::Grid(format!("profile has {} samples, grid has {}", v.len(), grid.n)));
    }
    Ok(())
}

/// Radial Cauchy data `u(0) = u0`, `u_t(0) = u1`, sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
}

impl CauchyData {
    pub fn from_fn(grid: &RadialGrid1D, u0: impl Fn(f64) -> f64, u1: impl Fn(f64) -> f64) -> Self {
        let r = grid.nodes();
        Self { u0: r.iter().map(|&r| u0(r)).collect(), u1: r.iter().map(|&r| u1(r)).collect() }
    }

    pub fn scaled(&self, eps: f64) -> Self {
        Self { u0: self.u0.iter().map(|v| v * eps).collect(), u1: self.u1.iter().map(|v| v * eps).collect() }
    }

    /// `‖(u0, u1)‖_{H¹×L²}` by Parseval in the sine basis.
    pub fn energy_norm(&self, grid: &RadialGrid1D) -> Result<f64> {
        let (m0, g0) = SpectralState::from_profile(*grid, &self.u0)?.energies();
        let (m1, _) = SpectralState::from_profile(*grid, &self.u1)?.energies();
        Ok((m0 + g0 + m1).sqrt())
    }

    /// Largest node where either profile exceeds `1e-12` of its maximum.
    pub fn support_radius(&self, grid: &RadialGrid1D) -> f64 {
        let r = grid.nodes();
        let edge = |v: &[f64]| {
            let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            v.iter().rposition(|x| x.abs() > 1e-12 * max).map_or(0.0, |j| r[j])
        };
        edge(&self.u0).max(edge(&self.u1))
    }
}

/// `4π Σ r² |f| h`.
pub fn l1_norm(grid: &RadialGrid1D, f: &[f64]) -> f64 {
    let h = grid.h();
    4.0 * PI * grid.nodes().iter().zip(f).map(|(r, v)| r * r * v.abs()).sum::<f64>() * h
}

/// `4π Σ r² |f'| h` with centred differences, `f'(0) = 0` by symmetry.
pub fn gradient_l1_norm(grid: &RadialGrid1D, f: &[f64]) -> f64 {
    let h = grid.h();
    let n = f.len();
    let r = grid.nodes();
    let mut sum = 0.0;
    for j in 0..n {
        let left = if j == 0 { f[0] } else { f[j - 1] };
        let right = if j + 1 == n { 0.0 } else { f[j + 1] };
        let d = if j == 0 { (right - left) / h } else { (right - left) / (2.0 * h) };
        sum += r[j] * r[j] * d.abs();
    }
    4.0 * PI * sum * h
}

/// Finite propagation speed keeps the wall at `R` out of the solution up to `t_max`.
pub fn check_inert_boundary(grid: &RadialGrid1D, support: f64, t_max: f64) -> Result<()> {
    if support + t_max > grid.radius {
        return Err(Error::Grid(format!(
            "light cone reaches the boundary: support {support:.3} + t {t_max:.3} > R = {}",
            grid.radius
        )));
    }
    Ok(())
}

/// Samples of `u(t_i, r_j)`, time-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn at_time(&self, i: usize) -> &[Complex64] {
        let n = self.radii.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn sup_at(&self, i: usize) -> f64 {
        self.at_time(i).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `(4π ∫ |u(t_i)|^q r² dr)^{1/q}` on the nodes.
    pub fn space_norm(&self, i: usize, q: f64) -> Result<f64> {
        let w = radial_measure_uniform(&self.radii);
        let v: Vec<f64> = self.at_time(i).iter().map(|z| z.norm()).collect();
        lorentz_norm(&v, &w, LorentzSpec::lebesgue(q))
    }
}

/// `4π r² h` on a uniform grid starting at `h`.
fn radial_measure_uniform(r: &[f64]) -> Vec<f64> {
    let h = r[0];
    r.iter().map(|r| 4.0 * PI * r * r * h).collect()
}

/// Operator `f(t ω)/ω^{2σ}` with `ω = √(μ + 1)` and `f` = sin, cos or `e^{i·}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagator {
    pub kind: KernelKind,
    pub sigma: Complex64,
}

impl Propagator {
    pub fn new(kind: KernelKind, sigma: f64) -> Self {
        Self { kind, sigma: Complex64::new(sigma, 0.0) }
    }

    pub fn multiplier(&self, t: f64, omega: f64) -> Complex64 {
        let phase = t * omega;
        let f = match self.kind {
            KernelKind::Sine => Complex64::new(phase.sin(), 0.0),
            KernelKind::Cosine => Complex64::new(phase.cos(), 0.0),
            KernelKind::Exponential => Complex64::new(phase.cos(), phase.sin()),
        };
        f * (-2.0 * self.sigma * omega.ln()).exp()
    }
}

/// `f(t√(-Δ+1))/(-Δ+1)^σ` applied to the radial profile `u` by the sine transform.
pub fn evolve_free(grid: &RadialGrid1D, u: &[f64], prop: Propagator, times: &[f64]) -> Result<SpaceTimeField> {
    if prop.sigma.re < 0.0 {
        return Err(Error::InvalidArgument("Re σ must be nonnegative".into()));
    }
    let state = SpectralState::from_profile(*grid, u)?;
    if state.high_mode_fraction() > 1e-8 {
        return Err(Error::Grid(format!(
            "data carries {:.2e} of its energy above 0.8 of the Nyquist mode",
            state.high_mode_fraction()
        )));
    }
    let dst = SineTransform::new(grid.n);
    let omega: Vec<f64> = grid.wavenumbers().iter().map(|l| (l * l + 1.0).sqrt()).collect();
    let r = grid.nodes();
    let mut values = Vec::with_capacity(times.len() * grid.n);
    for &t in times {
        let c: Vec<Complex64> = state.coefficients.iter().zip(&omega).map(|(b, &w)| prop.multiplier(t, w) * *b).collect();
        let w = dst.inverse_complex(&c);
        values.extend(w.iter().zip(&r).map(|(w, r)| w / *r));
    }
    Ok(SpaceTimeField { radii: r, times: times.to_vec(), values })
}

/// Radial potential in configuration files: `{ type = "...", params = { ... } }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    /// `amplitude · e^{-(r/width)²}`
    Gaussian { amplitude: f64, width: f64 },
    /// `amplitude` on `r < radius`
    Box { amplitude: f64, radius: f64 },
    /// Two whitespace-separated columns `r V`, linearly interpolated, zero beyond.
    File { path: PathBuf },
}

impl PotentialSpec {
    pub fn sample(&self, r: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Zero => Ok(vec![0.0; r.len()]),
            Self::Gaussian { amplitude, width } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidArgument("gaussian width must be positive".into()));
                }
                Ok(r.iter().map(|r| amplitude * (-(r / width).powi(2)).exp()).collect())
            }
            Self::Box { amplitude, radius } => Ok(r.iter().map(|r| if r < radius { *amplitude } else { 0.0 }).collect()),
            Self::File { path } => {
                let text = std::fs::read_to_string(path)?;
                let mut table: Vec<(f64, f64)> = Vec::new();
                for (ln, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let cols: Vec<f64> = line
                        .split_whitespace()
                        .map(|c| c.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::InvalidArgument(format!("{}:{}: {e}", path.display(), ln + 1)))?;
                    if cols.len() != 2 {
                        return Err(Error::InvalidArgument(format!("{}:{}: expected two columns", path.display(), ln + 1)));
                    }
                    table.push((cols[0], cols[1]));
                }
                if table.windows(2).any(|w| w[1].0 <= w[0].0) || table.is_empty() {
                    return Err(Error::InvalidArgument("potential table must have increasing radii".into()));
                }
                Ok(r.iter().map(|&x| interpolate(&table, x)).collect())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Gaussian { amplitude, .. } | Self::Box { amplitude, .. } => *amplitude == 0.0,
            Self::File { .. } => false,
        }
    }
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let last = table[table.len() - 1];
    if x > last.0 {
        return 0.0;
    }
    if x <= table[0].0 {
        return table[0].1;
    }
    let k = table.partition_point(|p| p.0 < x);
    let (a, b) = (table[k - 1], table[k]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// Three-point `-d²/dr²`.
    #[default]
    FiniteDifference,
    /// Exact sine-basis Laplacian plus diagonal potential.
    Spectral,
}

/// Numerical proxy for the absence of a zero-energy resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    /// Smallest nonnegative eigenvalue over the free ground level `(π/R)²`.
    pub ground_ratio: f64,
    /// `b r/|a + b r|` for the zero-energy solution `w ≈ a + b r` outside the potential.
    pub growth_index: f64,
    pub flag: bool,
}

/// `-d²/dr² + V` on `w = r u`, diagonalised.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    pub grid: RadialGrid1D,
    pub potential: Vec<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns in `ℓ²`.
    pub modes: Mat<f64>,
    pub negative: Vec<usize>,
    pub resonance: ResonanceReport,
    pub discretization: Discretization,
}

/// Builds and diagonalises `H`. A vanishing potential with the spectral
/// discretisation uses the sine basis directly.
pub fn build_hamiltonian(v: &PotentialSpec, grid: RadialGrid1D, disc: Discretization) -> Result<DiscreteHamiltonian> {
    let n = grid.n;
    let r = grid.nodes();
    let potential = v.sample(&r)?;
    let h = grid.h();
    let (eigenvalues, modes) = if disc == Discretization::Spectral && potential.iter().all(|&x| x == 0.0) {
        let lam = grid.wavenumbers();
        (lam.iter().map(|l| l * l).collect(), sine_matrix(n))
    } else {
        let mat = match disc {
            Discretization::FiniteDifference => {
                let off = -1.0 / (h * h);
                Mat::<f64>::from_fn(n, n, |i, j| {
                    if i == j {
                        2.0 / (h * h) + potential[i]
                    } else if i.abs_diff(j) == 1 {
                        off
                    } else {
                        0.0
                    }
                })
            }
            Discretization::Spectral => {
                let s = sine_matrix(n);
                let lam = grid.wavenumbers();
                let scaled = Mat::<f64>::from_fn(n, n, |i, k| s[(i, k)] * lam[k] * lam[k]);
                let mut m = &scaled * s.transpose();
                for i in 0..n {
                    m[(i, i)] += potential[i];
                }
                m
            }
        };
        let eig = mat
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Spectrum(format!("eigendecomposition failed: {e:?}")))?;
        let vals: Vec<f64> = (0..n).map(|k| eig.S().column_vector()[k]).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let u = eig.U();
        let modes = Mat::<f64>::from_fn(n, n, |i, k| u[(i, order[k])]);
        (order.iter().map(|&k| vals[k]).collect::<Vec<_>>(), modes)
    };
    let negative: Vec<usize> = (0..n).filter(|&k| eigenvalues[k] < 0.0).collect();
    let resonance = resonance_proxy(&grid, &potential, &eigenvalues);
    Ok(DiscreteHamiltonian { grid, potential, eigenvalues, modes, negative, resonance, discretization: disc })
}

/// `S_jk = √(2/(n+1)) sin(π j k/(n+1))`, symmetric and orthogonal.
fn sine_matrix(n: usize) -> Mat<f64> {
    let c = (2.0 / (n + 1) as f64).sqrt();
    Mat::<f64>::from_fn(n, n, |j, k| c * (PI * ((j + 1) * (k + 1)) as f64 / (n + 1) as f64).sin())
}

fn resonance_proxy(grid: &RadialGrid1D, potential: &[f64], eigenvalues: &[f64]) -> ResonanceReport {
    let ground = (PI / grid.radius).powi(2);
    let lowest = eigenvalues.iter().copied().find(|&m| m >= 0.0).unwrap_or(f64::INFINITY);
    let ground_ratio = lowest / ground;
    // Zero-energy shooting, w'' = V w, w(0) = 0, w'(0) = 1, out to R/2.
    let h = grid.h();
    let end = grid.n / 2;
    let mut w = vec![0.0; end + 1];
    w[1] = h;
    for j in 1..end {
        w[j + 1] = 2.0 * w[j] - w[j - 1] + h * h * potential[j - 1] * w[j];
    }
    let (a0, a1) = (3 * end / 4, end);
    let slope = (w[a1] - w[a0]) / ((a1 - a0) as f64 * h);
    let r_end = a1 as f64 * h;
    let growth_index = (slope * r_end / w[a1]).abs();
    let flag = ground_ratio < 0.5 || growth_index < 0.5;
    ResonanceReport { ground_ratio, growth_index, flag }
}

impl DiscreteHamiltonian {
    pub fn n_negative(&self) -> usize {
        self.negative.len()
    }

    /// `ℓ²` coefficients `c_k = ψ_k · w`.
    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        (0..n).map(|k| (0..n).map(|j| self.modes[(j, k)] * w[j]).sum()).collect()
    }

    /// `P_c = I - Σ_{μ_k < 0} ψ_k ψ_kᵀ`.
    pub fn continuous_projector(&self) -> Mat<f64> {
        let n = self.grid.n;
        let mut p = Mat::<f64>::identity(n, n);
        for &k in &self.negative {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] -= self.modes[(i, k)] * self.modes[(j, k)];
                }
            }
        }
        p
    }

    /// Eigenfunction `k` as values of `u = w/r`, normalised in `L²(ℝ³)`.
    pub fn eigenfunction(&self, k: usize) -> Vec<f64> {
        let h = self.grid.h();
        let norm = (4.0 * PI * h).sqrt();
        self.grid.nodes().iter().enumerate().map(|(j, r)| self.modes[(j, k)] / (norm * r)).collect()
    }

    /// Index set of retained modes; errors on growing modes that are not projected out.
    fn retained(&self, project: bool) -> Result<Vec<usize>> {
        let n = self.grid.n;
        if project {
            return Ok((0..n).filter(|&k| self.eigenvalues[k] >= 0.0).collect());
        }
        if let Some(&mu) = self.eigenvalues.iter().find(|&&m| m <= -1.0) {
            return Err(Error::Spectrum(format!("eigenvalue {mu:.6} <= -1 gives a growing mode; apply P_c")));
        }
        Ok((0..n).collect())
    }

    /// `Σ_k m_k ψ_k` for a batch of coefficient columns, through one dense product.
    fn synthesize(&self, coeffs: &Mat<Complex64>) -> Mat<Complex64> {
        let u = Mat::<Complex64>::from_fn(self.grid.n, self.grid.n, |i, j| Complex64::new(self.modes[(i, j)], 0.0));
        &u * coeffs
    }
}

/// `f(t√(H+1))/(H+1)^σ`, composed with `P_c` when `project` is set.
pub fn evolve_perturbed(
    hd: &DiscreteHamiltonian,
    u: &[f64],
    prop: Propagator,
    times: &[f64],
    project: bool,
) -> Result<SpaceTimeField> {
    check_len(&hd.grid, u)?;
    let keep = hd.retained(project)?;
    let r = hd.grid.nodes();
    let w: Vec<f64> = r.iter().zip(u).map(|(r, u)| r * u).collect();
    let c = hd.project(&w);
    let n = hd.grid.n;
    let omega: Vec<f64> = hd.eigenvalues.iter().map(|m| (m + 1.0).sqrt()).collect();
    let coeffs = Mat::<Complex64>::from_fn(n, times.len(), |k, it| {
        if keep_contains(&keep, k) {
            prop.multiplier(times[it], omega[k]) * c[k]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let out = hd.synthesize(&coeffs);
    let mut values = Vec::with_capacity(n * times.len());
    for it in 0..times.len() {
        for j in 0..n {
            values.push(out[(j, it)] / r[j]);
        }
    }
    Ok(SpaceTimeField { radii: r, times: times.to_vec(), values })
}

fn keep_contains(keep: &[usize], k: usize) -> bool {
    keep.binary_search(&k).is_ok()
}

/// `[sin(t√(H+1))/√(H+1) - sin(t√H)/√H] P_c` between the spheres through nodes `ix`
/// and `iy`, as a kernel on `ℝ³`: `Σ_k m_k(t) ψ_k(i) ψ_k(j) / (4π h r_i r_j)`.
pub fn bessel_part_perturbed(hd: &DiscreteHamiltonian, ix: usize, iy: usize, times: &[f64]) -> Result<Vec<f64>> {
    let n = hd.grid.n;
    if ix >= n || iy >= n {
        return Err(Error::Grid("node index out of range".into()));
    }
    let keep = hd.retained(true)?;
    let h = hd.grid.h();
    let r = hd.grid.nodes();
    let scale = 1.0 / (4.0 * PI * h * r[ix] * r[iy]);
    let weights: Vec<(f64, f64, f64)> = keep
        .iter()
        .map(|&k| {
            let mu = hd.eigenvalues[k];
            ((mu + 1.0).sqrt(), mu.max(0.0).sqrt(), hd.modes[(ix, k)] * hd.modes[(iy, k)] * scale)
        })
        .collect();
    let uniform = times.len() > 2 && {
        let dt = times[1] - times[0];
        times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-12 * dt.max(1.0))
    };
    let mut out = vec![0.0; times.len()];
    if uniform {
        // Phase rotation instead of one sine per node; drift is O(n ε) in the phase.
        let dt = times[1] - times[0];
        for &(w1, w0, c) in &weights {
            let (mut z1, s1) = (Complex64::from_polar(1.0, times[0] * w1), Complex64::from_polar(1.0, dt * w1));
            let (mut z0, s0) = (Complex64::from_polar(1.0, times[0] * w0), Complex64::from_polar(1.0, dt * w0));
            for (k, o) in out.iter_mut().enumerate() {
                let free = if w0 > 0.0 { z0.im / w0 } else { times[k] };
                *o += c * (z1.im / w1 - free);
                z1 *= s1;
                z0 *= s0;
            }
        }
        return Ok(out);
    }
    for (o, &t) in out.iter_mut().zip(times) {
        *o = weights
            .iter()
            .map(|&(w1, w0, c)| {
                let free = if w0 > 0.0 { (t * w0).sin() / w0 } else { t };
                c * ((t * w1).sin() / w1 - free)
            })
            .sum();
    }
    Ok(out)
}

/// `∫_0^∞ |K(t)| dt` from samples on `[0, T]` plus a `t^{-3/2}` envelope fitted on
/// `[T/2, T]`.
pub fn time_l1_with_tail(times: &[f64], values: &[f64]) -> f64 {
    let w = crate::norms::cell_weights(times);
    let body: f64 = values.iter().zip(&w).map(|(v, w)| v.abs() * w).sum();
    let t_end = *times.last().unwrap();
    let half = times.partition_point(|&t| t < 0.5 * t_end);
    // Envelope amplitude: mean of |K| t^{3/2} over the last half, times the mean of
    // |cos| correction (π/2) for the oscillating profile.
    let mut acc = 0.0;
    let mut wt = 0.0;
    for k in half..times.len() {
        acc += values[k].abs() * times[k].powf(1.5) * w[k];
        wt += w[k];
    }
    let mean = if wt > 0.0 { acc / wt } else { 0.0 };
    body + mean * 2.0 / t_end.sqrt()
}

/// Fit of `ln|ψ(r)| + ln⟨r⟩` against `r` on the far field of bound state `k`.
pub fn agmon_check(hd: &DiscreteHamiltonian, k: usize) -> Result<DecayFit> {
    let mu = *hd.eigenvalues.get(k).ok_or_else(|| Error::Spectrum(format!("no eigenvalue {k}")))?;
    if mu >= 0.0 {
        return Err(Error::Spectrum(format!("eigenvalue {k} is {mu:.4e}, not a bound state")));
    }
    let r = hd.grid.nodes();
    let n = hd.grid.n;
    let col: Vec<f64> = (0..n).map(|j| hd.modes[(j, k)]).collect();
    let mass: f64 = col.iter().map(|v| v * v).sum();
    let inner: f64 = col.iter().zip(&r).filter(|(_, r)| **r < 0.5 * hd.grid.radius).map(|(v, _)| v * v).sum();
    if inner < 0.999 * mass {
        return Err(Error::Spectrum(format!(
            "bound state {k} is under-resolved: {:.4}% of its mass lies beyond R/2",
            100.0 * (1.0 - inner / mass)
        )));
    }
    let u = hd.eigenfunction(k);
    let vmax = hd.potential.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // Far field: potential negligible, amplitude well above rounding, inside R/2.
    let start = hd.potential.iter().rposition(|v| v.abs() > 1e-8 * vmax).map_or(0, |j| j + 1);
    let kappa = (-mu).sqrt();
    let reach = (start as f64 * hd.grid.h() + 20.0 / kappa).min(0.5 * hd.grid.radius);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in start..n {
        if r[j] > reach || u[j].abs() < 1e-10 * peak {
            break;
        }
        xs.push(r[j]);
        ys.push(u[j].abs().ln() + (1.0 + r[j] * r[j]).sqrt().ln());
    }
    if xs.len() < 8 {
        return Err(Error::Spectrum(format!("far field of bound state {k} has only {} usable nodes", xs.len())));
    }
    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let constant = my - slope * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| (y - constant - slope * x).abs()).fold(0.0, f64::max);
    Ok(DecayFit { exponent: slope, constant, fit_range: (xs[0], *xs.last().unwrap()), max_residual, points: xs.len() })
}

/// Both sides of the identity
/// `(1/(π|t|)) ∫ (cos(t√(λ²+1)) - cos(tλ)) e^{iλr} dλ = -χ_{r <= |t|} J_1(√(t²-r²))/√(t²-r²)`.
///
/// With the prefactor `1/(2|t|)` the left side is `π/2` times larger; that value is
/// kept in `left_half_prefactor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralIdentity {
    pub r: f64,
    pub t: f64,
    pub cutoff: f64,
    pub left: f64,
    pub right: f64,
    pub left_half_prefactor: f64,
    /// Contribution of `|λ| > Λ`, computed on rotated contours and included in `left`.
    pub tail: f64,
}

pub fn spectral_identity_check(r: f64, t: f64, cutoff: f64) -> Result<SpectralIdentity> {
    if t == 0.0 {
        return Err(Error::InvalidArgument("the identity needs t != 0".into()));
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument("r must be nonnegative".into()));
    }
    let at = t.abs();
    let gap = (at - r).abs();
    if gap < 1e-3 {
        return Err(Error::InvalidArgument("the identity is checked away from the light cone".into()));
    }
    let need = 40.0 / gap.min(1.0);
    if cutoff < need {
        return Err(Error::CutoffTooSmall(format!("Λ = {cutoff} < {need:.1} for (r, t) = ({r}, {t})")));
    }
    let jp = |z: Complex64| (z * z + 1.0).sqrt();
    let tol = Tolerance::new(1e-14, 1e-12);
    let width = (PI / (at + r)).min(0.5);
    let body = adaptive(
        |l| Complex64::new((((l * l + 1.0).sqrt() * at).cos() - (l * at).cos()) * (l * r).cos(), 0.0),
        &panels(0.0, cutoff, width),
        tol,
        200_000,
    );
    // cos(a)cos(b) = Σ e^{i(±a±b)}/4; each exponential decays on one side of the axis.
    let i = Complex64::new(0.0, 1.0);
    let mut tail = Complex64::new(0.0, 0.0);
    for (sign_t, shifted) in [(1.0, true), (-1.0, true), (1.0, false), (-1.0, false)] {
        for sign_r in [1.0, -1.0] {
            let coef = if shifted { 0.25 } else { -0.25 };
            let rate = sign_t * at + sign_r * r;
            let d = rate.signum();
            let ymax = 46.0 / rate.abs();
            let phase = move |z: Complex64| {
                let base = if shifted { jp(z) } else { z };
                i * (sign_t * at * base + sign_r * r * z)
            };
            let res = adaptive(
                |y| coef * phase(Complex64::new(cutoff, d * y)).exp() * i * d,
                &[0.0, 0.05 * ymax, 0.25 * ymax, ymax],
                tol,
                4000,
            );
            tail += res.value;
        }
    }
    // Even integrand: ∫_{-∞}^{∞} = 2 ∫_0^∞.
    let full = 2.0 * (body.value.re + tail.re);
    let right = if r <= at { -j1_over_z(((at - r) * (at + r)).sqrt()) } else { 0.0 };
    Ok(SpectralIdentity {
        r,
        t,
        cutoff,
        left: full / (PI * at),
        right,
        left_half_prefactor: full / (2.0 * at),
        tail: 2.0 * tail.re / (PI * at),
    })
}

/// `(p, q)` Strichartz pair and the exponent `σ = (1/p + 1/2 - 1/q)/2`.
pub fn strichartz_sigma(p: f64, q: f64) -> Result<f64> {
    let admissible = p >= 2.0 && (2.0 / p + 3.0 / q - 1.5).abs() < 1e-12;
    if !admissible {
        return Err(Error::InvalidArgument(format!("(p, q) = ({p}, {q}) is not admissible: need 2/p + 3/q = 3/2, p >= 2")));
    }
    Ok(0.5 * (1.0 / p + 0.5 - 1.0 / q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzReport {
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub horizons: Vec<f64>,
    /// `ratios[d][h]`: draw `d`, horizon `h`.
    pub ratios: Vec<Vec<f64>>,
    /// Largest `ratio(2T)/ratio(T) - 1` over draws and consecutive horizons.
    pub max_growth: f64,
}

/// Random L²-normalised sums of Gaussian shells supported well inside `support`.
pub fn random_ensemble(grid: &RadialGrid1D, draws: usize, seed: u64, support: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = grid.nodes();
    (0..draws)
        .map(|_| {
            let terms: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    let width = rng.random_range(0.6..1.6);
                    let centre = rng.random_range(0.0..(support - 6.0 * width).max(0.0));
                    (rng.random_range(-1.0..1.0), centre, width)
                })
                .collect();
            let f: Vec<f64> = r
                .iter()
                .map(|&x| terms.iter().map(|(a, c, w)| a * shell(x, *c, *w)).sum())
                .collect();
            let norm = (4.0 * PI * grid.h() * r.iter().zip(&f).map(|(r, f)| (r * f).powi(2)).sum::<f64>()).sqrt();
            f.into_iter().map(|v| v / norm).collect()
        })
        .collect()
}

/// Gaussian shell reflected through the origin, so the profile is smooth and even.
pub fn shell(r: f64, centre: f64, width: f64) -> f64 {
    (-((r - centre) / width).powi(2)).exp() + (-((r + centre) / width).powi(2)).exp()
}

/// `‖E^H_σ(t) P_c f‖_{L^p_t([0,T]) L^q_x} / ‖f‖_{L²}` for each horizon `T`.
pub fn strichartz_norm_check(
    hd: &DiscreteHamiltonian,
    data: &[Vec<f64>],
    p: f64,
    q: f64,
    dt: f64,
    horizons: &[f64],
) -> Result<StrichartzReport> {
    let sigma = strichartz_sigma(p, q)?;
    let t_max = horizons.iter().copied().fold(0.0, f64::max);
    let steps = (t_max / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let tw = crate::norms::cell_weights(&times);
    let prop = Propagator { kind: KernelKind::Exponential, sigma: Complex64::new(sigma, 0.0) };
    let mut ratios = Vec::with_capacity(data.len());
    for f in data {
        let support = CauchyData { u0: f.clone(), u1: vec![0.0; f.len()] }.support_radius(&hd.grid);
        check_inert_boundary(&hd.grid, support, t_max)?;
        let field = evolve_perturbed(hd, f, prop, &times, true)?;
        let l2 = (l2_squared(&hd.grid, f)).sqrt();
        let space: Vec<f64> = (0..times.len()).map(|i| field.space_norm(i, q)).collect::<Result<_>>()?;
        let row = horizons
            .iter()
            .map(|&h| {
                let m = times.partition_point(|&t| t <= h + 1e-9);
                let mut w = tw[..m].to_vec();
                // The last kept node closes the interval at T.
                if m < times.len() {
                    w[m - 1] = 0.5 * (times[m - 1] - times[m - 2]);
                }
                lorentz_norm(&space[..m], &w, LorentzSpec::lebesgue(p)).map(|v| v / l2)
            })
            .collect::<Result<Vec<_>>>()?;
        ratios.push(row);
    }
    let max_growth = ratios
        .iter()
        .flat_map(|row| row.windows(2).map(|w| w[1] / w[0] - 1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(StrichartzReport { p, q, sigma, horizons: horizons.to_vec(), ratios, max_growth })
}

fn l2_squared(grid: &RadialGrid1D, f: &[f64]) -> f64 {
    radial_measure_uniform(&grid.nodes()).iter().zip(f).map(|(w, f)| w * f * f).sum()
}

/// Spectrum summary for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// All negative eigenvalues followed by the lowest 16 nonnegative ones.
    pub eigenvalues: Vec<f64>,
    pub n_negative: usize,
    pub resonance_flag: bool,
    pub resonance: ResonanceReport,
}

impl DiscreteHamiltonian {
    pub fn spectrum_report(&self) -> SpectrumReport {
        let take = self.n_negative() + 16;
        SpectrumReport {
            eigenvalues: self.eigenvalues.iter().take(take).copied().collect(),
            n_negative: self.n_negative(),
            resonance_flag: self.resonance.flag,
            resonance: self.resonance.clone(),
        }
    }
}

/// Log-log decay fit of `t^γ sup_x |u(t, x)|` helpers live with the checks; this one
/// is shared by tests: fit `sup_x |u(t)|` against `t`.
pub fn sup_decay(field: &SpaceTimeField) -> Result<DecayFit> {
    let sups: Vec<f64> = (0..field.times.len()).map(|i| field.sup_at(i)).collect();
    fit_power_law(&field.times, &sups)
}
