//! Quintic Klein-Gordon `u_tt + (H + 1) u ± u⁵ = F` for small radial data.
//!
//! Two independent solvers share the eigenbasis of `H`: a Picard iteration of the
//! Duhamel map, and a Strang splitting of linear flow and nonlinear kick.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{cell_weights, mixed_norm, radial_measure, LorentzSpec, SpaceTimeSamples};
use crate::spectral::{build_hamiltonian, check_inert_boundary, CauchyData, DiscreteHamiltonian, Discretization, PotentialSpec, RadialGrid1D};

/// `+1` defocusing, `-1` focusing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearSign {
    #[default]
    Defocusing,
    Focusing,
}

impl NonlinearSign {
    pub fn value(self) -> f64 {
        match self {
            Self::Defocusing => 1.0,
            Self::Focusing => -1.0,
        }
    }
}

/// Source term. Only separable forcing `a e^{-(r/w)²} e^{-γt}` is supported.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Forcing {
    #[default]
    Zero,
    Separable { amplitude: f64, width: f64, decay: f64 },
}

impl Forcing {
    fn at(&self, r: f64, t: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Separable { amplitude, width, decay } => amplitude * (-(r / width).powi(2) - decay * t).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearConfig {
    #[serde(default)]
    pub sign: NonlinearSign,
    /// Scale applied to the Cauchy data.
    pub epsilon: f64,
    pub horizon: f64,
    #[serde(default = "zero_potential")]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub forcing: Forcing,
    pub radius: f64,
    pub nodes: usize,
    pub dt: f64,
    /// Largest admissible `L^{6,2}_x L^∞_t` norm of the first iterate.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn zero_potential() -> PotentialSpec {
    PotentialSpec::Zero
}

fn default_delta() -> f64 {
    0.1
}

impl NonlinearConfig {
    pub fn new(epsilon: f64, horizon: f64, radius: f64, nodes: usize, dt: f64) -> Self {
        Self {
            sign: NonlinearSign::Defocusing,
            epsilon,
            horizon,
            potential: PotentialSpec::Zero,
            forcing: Forcing::Zero,
            radius,
            nodes,
            dt,
            delta: default_delta(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("data scale must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.horizon > 0.0) || !(self.dt > 0.0) || self.dt > self.horizon {
            return Err(Error::InvalidArgument("need 0 < dt <= T".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<RadialGrid1D> {
        RadialGrid1D::new(self.radius, self.nodes)
    }

    pub fn times(&self) -> Vec<f64> {
        let steps = (self.horizon / self.dt).round() as usize;
        (0..=steps).map(|k| self.horizon * k as f64 / steps as f64).collect()
    }
}

/// `u(r_i, t_j)` stored radius-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialField {
    fn from_mat(radii: Vec<f64>, times: Vec<f64>, m: &Mat<f64>) -> Self {
        let mut values = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            values.extend((0..m.ncols()).map(|j| m[(i, j)]));
        }
        Self { radii, times, values }
    }

    pub fn zeros_like(&self) -> Self {
        Self { radii: self.radii.clone(), times: self.times.clone(), values: vec![0.0; self.values.len()] }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.times.len() + j]
    }

    pub fn time_slice(&self, j: usize) -> Vec<f64> {
        (0..self.radii.len()).map(|i| self.at(i, j)).collect()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖u(t_j)‖_{L²(ℝ³)}` on the nodes.
    pub fn l2_at(&self, j: usize) -> f64 {
        let w = radial_measure(&self.radii);
        self.time_slice(j).iter().zip(&w).map(|(u, w)| u * u * w).sum::<f64>().sqrt()
    }

    pub fn difference(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self { radii: self.radii.clone(), times: self.times.clone(), values }
    }

    /// `‖ ‖u(x, ·)‖_{inner} ‖_{outer}` with the radial measure `4πr² dr`.
    pub fn mixed(&self, outer: LorentzSpec, inner: LorentzSpec) -> Result<f64> {
        let rw = radial_measure(&self.radii);
        let tw = cell_weights(&self.times);
        mixed_norm(&SpaceTimeSamples { radial_weights: &rw, time_weights: &tw, values: &self.values }, outer, inner)
    }
}

/// Mode-space linear propagation on a fixed time grid.
struct Propagation {
    hd: DiscreteHamiltonian,
    radii: Vec<f64>,
    times: Vec<f64>,
    omega: Vec<f64>,
    /// `cos(t_j ω_k)`, `sin(t_j ω_k)`, modes by rows.
    cos: Mat<f64>,
    sin: Mat<f64>,
}

impl Propagation {
    fn new(cfg: &NonlinearConfig) -> Result<Self> {
        let grid = cfg.grid()?;
        let hd = build_hamiltonian(&cfg.potential, grid, Discretization::Spectral)?;
        if hd.n_negative() > 0 {
            return Err(Error::Spectrum(format!(
                "the iteration needs H >= 0, found {} negative eigenvalues",
                hd.n_negative()
            )));
        }
        if hd.resonance.flag {
            return Err(Error::Spectrum(format!("threshold resonance suspected: {:?}", hd.resonance)));
        }
        let times = cfg.times();
        let omega: Vec<f64> = hd.eigenvalues.iter().map(|m| (m + 1.0).sqrt()).collect();
        let cos = Mat::<f64>::from_fn(grid.n, times.len(), |k, j| (times[j] * omega[k]).cos());
        let sin = Mat::<f64>::from_fn(grid.n, times.len(), |k, j| (times[j] * omega[k]).sin());
        Ok(Self { radii: grid.nodes(), hd, times, omega, cos, sin })
    }

    fn n(&self) -> usize {
        self.radii.len()
    }

    /// Coefficients of `w = r u` for a profile.
    fn project_profile(&self, u: &[f64]) -> Vec<f64> {
        let w: Vec<f64> = u.iter().zip(&self.radii).map(|(u, r)| u * r).collect();
        self.hd.project(&w)
    }

    fn linear(&self, a: &[f64], b: &[f64]) -> Mat<f64> {
        Mat::<f64>::from_fn(self.n(), self.times.len(), |k, j| a[k] * self.cos[(k, j)] + b[k] * self.sin[(k, j)] / self.omega[k])
    }

    /// `u = (U c)/r`.
    fn field(&self, coeffs: &Mat<f64>) -> Mat<f64> {
        let mut m = &self.hd.modes * coeffs;
        for i in 0..self.n() {
            let r = self.radii[i];
            for j in 0..m.ncols() {
                m[(i, j)] /= r;
            }
        }
        m
    }

    /// Coefficients of `r F` for a field `F`.
    fn project_field(&self, f: &Mat<f64>) -> Mat<f64> {
        let mut rf = f.clone();
        for i in 0..self.n() {
            for j in 0..rf.ncols() {
                rf[(i, j)] *= self.radii[i];
            }
        }
        self.hd.modes.transpose() * &rf
    }

    /// `∫_0^t sin((t-s)ω)/ω g(s) ds` mode by mode, by cumulative Simpson.
    fn duhamel(&self, g: &Mat<f64>) -> Mat<f64> {
        let nt = self.times.len();
        let dt = self.times[1] - self.times[0];
        let mut out = Mat::<f64>::zeros(self.n(), nt);
        let mut fc = vec![0.0; nt];
        let mut fs = vec![0.0; nt];
        for k in 0..self.n() {
            for j in 0..nt {
                fc[j] = self.cos[(k, j)] * g[(k, j)];
                fs[j] = self.sin[(k, j)] * g[(k, j)];
            }
            let ic = cumulative_simpson(&fc, dt);
            let is = cumulative_simpson(&fs, dt);
            for j in 0..nt {
                out[(k, j)] = (self.sin[(k, j)] * ic[j] - self.cos[(k, j)] * is[j]) / self.omega[k];
            }
        }
        out
    }
}

/// `∫_0^{t_j} f` on a uniform grid: Simpson on even nodes, a three-point rule for the
/// last interval on odd nodes.
pub fn cumulative_simpson(f: &[f64], dt: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    out[1] = if n > 2 { dt * (5.0 * f[0] + 8.0 * f[1] - f[2]) / 12.0 } else { 0.5 * dt * (f[0] + f[1]) };
    for j in 2..n {
        if j % 2 == 0 {
            out[j] = out[j - 2] + dt * (f[j - 2] + 4.0 * f[j - 1] + f[j]) / 3.0;
        } else {
            out[j] = out[j - 1] + dt * (-f[j - 2] + 8.0 * f[j - 1] + 5.0 * f[j]) / 12.0;
        }
    }
    out
}

/// One named ledger norm and its ratio to the data size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub outer: LorentzSpec,
    pub inner: LorentzSpec,
    pub value: f64,
    /// Same exponents with the Lorentz second indices set equal to the first.
    pub lebesgue_proxy: f64,
    pub ratio: f64,
}

/// Label with outer (space) and inner (time) `(p, q)` exponents.
pub type NormSpec = (&'static str, (f64, f64), (f64, f64));

/// The two iteration norms.
pub const LEDGER_NORMS: [NormSpec; 2] =
    [("L^{6,2}_x L^inf_t", (6.0, 2.0), (f64::INFINITY, f64::INFINITY)), ("L^{16/3,2}_x L^{16,2}_t", (16.0 / 3.0, 2.0), (16.0, 2.0))];

/// Norms available without forcing.
pub const BONUS_NORMS: [NormSpec; 3] = [
    ("L^inf_x L^2_t", (f64::INFINITY, f64::INFINITY), (2.0, 2.0)),
    ("L^{12,2}_x L^2_t", (12.0, 2.0), (2.0, 2.0)),
    ("L^{24/5,2}_x L^{8,2}_t", (24.0 / 5.0, 2.0), (8.0, 2.0)),
];

fn ledger_entry(u: &RadialField, label: &str, outer: (f64, f64), inner: (f64, f64), data_norm: f64) -> Result<LedgerEntry> {
    let (o, i) = (LorentzSpec::new(outer.0, outer.1)?, LorentzSpec::new(inner.0, inner.1)?);
    let value = u.mixed(o, i)?;
    let lebesgue_proxy = u.mixed(LorentzSpec::lebesgue(outer.0), LorentzSpec::lebesgue(inner.0))?;
    let ratio = if data_norm > 0.0 { value / data_norm } else { 0.0 };
    Ok(LedgerEntry { label: label.to_string(), outer: o, inner: i, value, lebesgue_proxy, ratio })
}

/// Iteration and bonus norms of `u`, each with its ratio to `‖(v, w)‖_{H¹×L²}`.
pub fn reversed_ledger(u: &RadialField, data_norm: f64, with_bonus: bool) -> Result<Vec<LedgerEntry>> {
    let extra: &[_] = if with_bonus { &BONUS_NORMS } else { &[] };
    LEDGER_NORMS.iter().chain(extra).map(|(l, o, i)| ledger_entry(u, l, *o, *i, data_norm)).collect()
}

fn first_norm(u: &RadialField) -> Result<f64> {
    u.mixed(LorentzSpec::new(6.0, 2.0)?, LorentzSpec::lebesgue(f64::INFINITY))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    /// `‖u_n‖` in `L^{6,2}_x L^∞_t`.
    pub norm: f64,
    /// `‖u_n - u_{n-1}‖` in the same norm.
    pub difference: f64,
    pub ratio: Option<f64>,
    /// `‖u_n - u_{n-1}‖ / ((‖u_{n-1}‖⁴ + ‖u_{n-2}‖⁴) ‖u_{n-1} - u_{n-2}‖)`.
    pub contraction_constant: Option<f64>,
}

/// Final Picard iterate with its history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationState {
    pub n: usize,
    pub field: RadialField,
    pub linear: RadialField,
    pub ledger: Vec<LedgerEntry>,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub data_norm: f64,
    /// `‖u_n - u_1‖` in `L^{6,2}_x L^∞_t`; `u_1` is the linear solution.
    pub correction: f64,
}

impl IterationState {
    /// Contraction ratios recorded above the rounding floor.
    pub fn ratios(&self) -> Vec<f64> {
        self.history.iter().filter_map(|h| h.ratio).collect()
    }
}

/// Relative size below which successive differences are rounding noise.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Picard iteration `u_n = C₀(t)v + S_{1/2}(t)w + ∫_0^t S_{1/2}(t-s)(F ∓ u_{n-1}⁵) ds`
/// for data `ε (v, w)`.
pub fn picard_iterate(cfg: &NonlinearConfig, data: &CauchyData, max_n: usize) -> Result<IterationState> {
    cfg.validate()?;
    let prop = Propagation::new(cfg)?;
    let grid = cfg.grid()?;
    let data = data.scaled(cfg.epsilon);
    if cfg.forcing == Forcing::Zero {
        check_inert_boundary(&grid, data.support_radius(&grid), cfg.horizon)?;
    }
    let data_norm = data.energy_norm(&grid)?;
    let mut lin = prop.linear(&prop.project_profile(&data.u0), &prop.project_profile(&data.u1));
    if cfg.forcing != Forcing::Zero {
        let f = Mat::<f64>::from_fn(prop.n(), prop.times.len(), |i, j| cfg.forcing.at(prop.radii[i], prop.times[j]));
        lin += prop.duhamel(&prop.project_field(&f));
    }
    let to_field = |m: &Mat<f64>| RadialField::from_mat(prop.radii.clone(), prop.times.clone(), &prop.field(m));
    let linear = to_field(&lin);
    let first = first_norm(&linear)?;
    if first > cfg.delta {
        return Err(Error::InvalidArgument(format!(
            "first iterate has norm {first:.3e}, above the smallness threshold {}",
            cfg.delta
        )));
    }
    let sign = cfg.sign.value();
    let mut history = vec![IterationRecord { n: 1, norm: first, difference: first, ratio: None, contraction_constant: None }];
    let mut u = linear.clone();
    let mut converged = first == 0.0;
    let mut below = 0;
    let mut n = 1;
    while !converged && n < max_n {
        n += 1;
        let quintic = Mat::<f64>::from_fn(prop.n(), prop.times.len(), |i, j| -sign * u.at(i, j).powi(5));
        let next = to_field(&(&lin + prop.duhamel(&prop.project_field(&quintic))));
        let norm = first_norm(&next)?;
        let difference = first_norm(&next.difference(&u))?;
        let prev = &history[history.len() - 1];
        let floor = difference <= NOISE_FLOOR * norm;
        let (ratio, contraction_constant) = if floor || n == 2 {
            (if n == 2 || floor { None } else { Some(difference / prev.difference) }, None)
        } else {
            let older = &history[history.len() - 2];
            let ratio = difference / prev.difference;
            let k = difference / ((prev.norm.powi(4) + older.norm.powi(4)) * prev.difference);
            (Some(ratio), Some(k))
        };
        if let Some(q) = ratio {
            if q >= 1.0 {
                return Err(Error::Divergence { iteration: n, ratio: q });
            }
            below = if q < 0.5 { below + 1 } else { 0 };
        }
        history.push(IterationRecord { n, norm, difference, ratio, contraction_constant });
        u = next;
        converged = floor || below >= 3;
    }
    let ledger = reversed_ledger(&u, data_norm, cfg.forcing == Forcing::Zero)?;
    let correction = first_norm(&u.difference(&linear))?;
    Ok(IterationState { n, field: u, linear, ledger, history, converged, data_norm, correction })
}

/// The Duhamel map applied once to `u`, for fixed-point checks.
pub fn duhamel_map(cfg: &NonlinearConfig, data: &CauchyData, u: &RadialField) -> Result<RadialField> {
    let prop = Propagation::new(cfg)?;
    let data = data.scaled(cfg.epsilon);
    let lin = prop.linear(&prop.project_profile(&data.u0), &prop.project_profile(&data.u1));
    let sign = cfg.sign.value();
    let quintic = Mat::<f64>::from_fn(prop.n(), prop.times.len(), |i, j| {
        -sign * u.at(i, j).powi(5) + cfg.forcing.at(prop.radii[i], prop.times[j])
    });
    Ok(RadialField::from_mat(prop.radii.clone(), prop.times.clone(), &prop.field(&(&lin + prop.duhamel(&prop.project_field(&quintic))))))
}

/// Sub-steps of the splitting per stored time step.
pub const STRANG_SUBSTEPS: usize = 4;

/// Strang splitting: half kick by `F ∓ u⁵`, exact linear step, half kick.
pub fn direct_integrate(cfg: &NonlinearConfig, data: &CauchyData) -> Result<RadialField> {
    cfg.validate()?;
    let prop = Propagation::new(cfg)?;
    let n = prop.n();
    let omega_max = prop.omega.iter().copied().fold(0.0, f64::max);
    let tau = cfg.dt / STRANG_SUBSTEPS as f64;
    if tau * omega_max > PI {
        return Err(Error::Grid(format!("step {tau} does not resolve the top frequency {omega_max:.2}")));
    }
    let data = data.scaled(cfg.epsilon);
    let mut a = prop.project_profile(&data.u0);
    let mut b = prop.project_profile(&data.u1);
    let amp0 = data.u0.iter().chain(&data.u1).fold(0.0f64, |m, v| m.max(v.abs()));
    let limit = 1e3 * amp0.max(f64::MIN_POSITIVE);
    let (c, s): (Vec<f64>, Vec<f64>) = prop.omega.iter().map(|w| ((tau * w).cos(), (tau * w).sin())).unzip();
    let sign = cfg.sign.value();
    let modes = &prop.hd.modes;
    let synth = |a: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|k| modes[(i, k)] * a[k]).sum::<f64>() / prop.radii[i]).collect()
    };
    let kick = |a: &[f64], b: &mut [f64], t: f64, h: f64| -> Result<()> {
        let u = synth(a);
        if let Some(&peak) = u.iter().find(|v| !(v.abs() <= limit)) {
            return Err(Error::BlowUp { time: t, amplitude: peak.abs() });
        }
        let rf: Vec<f64> = u.iter().zip(&prop.radii).map(|(u, r)| r * (-sign * u.powi(5) + cfg.forcing.at(*r, t))).collect();
        let g = prop.hd.project(&rf);
        for k in 0..n {
            b[k] += h * g[k];
        }
        Ok(())
    };
    let nt = prop.times.len();
    let mut out = Mat::<f64>::zeros(n, nt);
    let mut t = 0.0;
    let record = |out: &mut Mat<f64>, j: usize, a: &[f64]| {
        for k in 0..n {
            out[(k, j)] = a[k];
        }
    };
    record(&mut out, 0, &a);
    for j in 1..nt {
        for _ in 0..STRANG_SUBSTEPS {
            kick(&a, &mut b, t, 0.5 * tau)?;
            for k in 0..n {
                let w = prop.omega[k];
                let (ak, bk) = (a[k], b[k]);
                a[k] = ak * c[k] + bk * s[k] / w;
                b[k] = -ak * w * s[k] + bk * c[k];
            }
            t += tau;
            kick(&a, &mut b, t, 0.5 * tau)?;
        }
        record(&mut out, j, &a);
    }
    Ok(RadialField::from_mat(prop.radii.clone(), prop.times.clone(), &prop.field(&out)))
}

/// Run manifest: configuration, per-iteration ledger and comparison errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: NonlinearConfig,
    pub iterations: Vec<IterationRecord>,
    pub ledger: Vec<LedgerEntry>,
    pub converged: bool,
    pub data_norm: f64,
    pub correction: f64,
    /// `‖u_Picard(T) - u_Strang(T)‖₂ / ‖u_Picard(T)‖₂`, when the cross-check ran.
    pub strang_difference: Option<f64>,
}

impl RunManifest {
    pub fn new(config: NonlinearConfig, state: &IterationState, strang: Option<&RadialField>) -> Self {
        let last = state.field.times.len() - 1;
        let strang_difference = strang.map(|s| state.field.difference(s).l2_at(last) / state.field.l2_at(last));
        Self {
            config,
            iterations: state.history.clone(),
            ledger: state.ledger.clone(),
            converged: state.converged,
            data_norm: state.data_norm,
            correction: state.correction,
            strang_difference,
        }
    }
}

/// Gaussian bump `e^{-r²}` at rest.
pub fn gaussian_data(grid: &RadialGrid1D) -> CauchyData {
    CauchyData::from_fn(grid, |r| (-r * r).exp(), |_| 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelKind;
    use crate::spectral::{evolve_free, Propagator};

    fn small(eps: f64, horizon: f64) -> NonlinearConfig {
        NonlinearConfig::new(eps, horizon, 24.0, 191, 0.05)
    }

    #[test]
    fn cumulative_simpson_exactness() {
        let dt = 0.1;
        let nodes: Vec<f64> = (0..21).map(|j| j as f64 * dt).collect();
        let quad: Vec<f64> = nodes.iter().map(|t| 3.0 * t * t - 2.0 * t + 1.0).collect();
        let cubic: Vec<f64> = nodes.iter().map(|t| t * t * t).collect();
        let (iq, ic) = (cumulative_simpson(&quad, dt), cumulative_simpson(&cubic, dt));
        for (j, t) in nodes.iter().enumerate() {
            assert!((iq[j] - (t.powi(3) - t * t + t)).abs() < 1e-13, "j={j}");
            if j % 2 == 0 {
                assert!((ic[j] - t.powi(4) / 4.0).abs() < 1e-13, "j={j}");
            }
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let cfg = small(0.0, 4.0);
        let grid = cfg.grid().unwrap();
        let st = picard_iterate(&cfg, &gaussian_data(&grid), 10).unwrap();
        assert_eq!(st.n, 1);
        assert!(st.converged);
        assert_eq!(st.field.sup(), 0.0);
        assert!(st.ledger.iter().all(|e| e.value == 0.0));
    }

    #[test]
    fn linear_iterate_is_the_free_flow() {
        let cfg = small(1e-2, 10.0);
        let grid = cfg.grid().unwrap();
        let data = gaussian_data(&grid);
        let st = picard_iterate(&cfg, &data, 10).unwrap();
        let times = cfg.times();
        let free = evolve_free(&grid, &data.scaled(1e-2).u0, Propagator::new(KernelKind::Cosine, 0.0), &times).unwrap();
        let mut err: f64 = 0.0;
        for (j, _) in times.iter().enumerate() {
            for (i, z) in free.at_time(j).iter().enumerate() {
                err = err.max((st.linear.at(i, j) - z.re).abs());
            }
        }
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn picard_converges_and_matches_strang() {
        let cfg = small(1e-2, 10.0);
        let grid = cfg.grid().unwrap();
        let data = gaussian_data(&grid);
        let st = picard_iterate(&cfg, &data, 20).unwrap();
        assert!(st.converged);
        assert!(st.ratios().iter().all(|q| *q < 0.5));
        let strang = direct_integrate(&cfg, &data).unwrap();
        let m = RunManifest::new(cfg, &st, Some(&strang));
        assert!(m.strang_difference.unwrap() < 1e-6, "{m:?}");
        // The correction itself, not only the linear part, agrees.
        let last = st.field.times.len() - 1;
        let picard_corr = st.field.difference(&st.linear).l2_at(last);
        let strang_corr = strang.difference(&st.linear).l2_at(last);
        assert!((picard_corr - strang_corr).abs() < 0.05 * picard_corr, "{picard_corr} vs {strang_corr}");
    }

    #[test]
    fn limit_is_a_fixed_point() {
        let cfg = small(2e-2, 8.0);
        let grid = cfg.grid().unwrap();
        let data = gaussian_data(&grid);
        let st = picard_iterate(&cfg, &data, 20).unwrap();
        let again = duhamel_map(&cfg, &data, &st.field).unwrap();
        let change = first_norm(&again.difference(&st.field)).unwrap();
        assert!(change < 1e-12 * st.history.last().unwrap().norm);
    }

    #[test]
    fn shorter_horizon_is_a_restriction() {
        let data_cfg = small(1e-2, 10.0);
        let grid = data_cfg.grid().unwrap();
        let data = gaussian_data(&grid);
        let long = picard_iterate(&small(1e-2, 10.0), &data, 20).unwrap();
        let short = picard_iterate(&small(1e-2, 5.0), &data, 20).unwrap();
        let nt = short.field.times.len();
        let mut err: f64 = 0.0;
        for i in 0..grid.n {
            for j in 0..nt {
                err = err.max((short.field.at(i, j) - long.field.at(i, j)).abs());
            }
        }
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn halving_data_halves_the_ledger_and_scales_the_correction() {
        let grid = small(1.0, 8.0).grid().unwrap();
        let data = gaussian_data(&grid);
        let a = picard_iterate(&small(2e-2, 8.0), &data, 20).unwrap();
        let b = picard_iterate(&small(1e-2, 8.0), &data, 20).unwrap();
        for (x, y) in a.ledger.iter().zip(&b.ledger) {
            assert!(y.value <= 0.5 * x.value * (1.0 + 1e-6));
        }
        let scale = (a.correction / 2e-2f64.powi(5)) / (b.correction / 1e-2f64.powi(5));
        assert!((scale - 1.0).abs() < 0.05, "{scale}");
    }

    #[test]
    fn focusing_large_data_trips_the_guard() {
        let mut cfg = small(10.0, 4.0);
        cfg.sign = NonlinearSign::Focusing;
        let grid = cfg.grid().unwrap();
        assert!(matches!(direct_integrate(&cfg, &gaussian_data(&grid)), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn bound_states_violate_the_hypothesis() {
        let mut cfg = small(1e-2, 4.0);
        cfg.potential = PotentialSpec::Gaussian { amplitude: -4.0, width: 1.0 };
        let grid = cfg.grid().unwrap();
        assert!(matches!(picard_iterate(&cfg, &gaussian_data(&grid), 10), Err(Error::Spectrum(_))));
    }

    #[test]
    fn repulsive_potential_and_forcing_run() {
        let mut cfg = small(1e-2, 6.0);
        cfg.potential = PotentialSpec::Gaussian { amplitude: 1.0, width: 1.0 };
        cfg.forcing = Forcing::Separable { amplitude: 1e-3, width: 1.0, decay: 1.0 };
        let grid = cfg.grid().unwrap();
        let data = gaussian_data(&grid);
        let st = picard_iterate(&cfg, &data, 20).unwrap();
        assert!(st.converged);
        assert_eq!(st.ledger.len(), LEDGER_NORMS.len());
        let strang = direct_integrate(&cfg, &data).unwrap();
        let last = st.field.times.len() - 1;
        assert!(st.field.difference(&strang).l2_at(last) < 1e-5 * st.field.l2_at(last));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok: NonlinearConfig =
            serde_json::from_str(r#"{"epsilon":0.01,"horizon":40,"radius":48,"nodes":383,"dt":0.05,"sign":"focusing"}"#).unwrap();
        assert_eq!(ok.sign, NonlinearSign::Focusing);
        assert!(serde_json::from_str::<NonlinearConfig>(r#"{"epsilon":0.01,"horizon":40,"radius":48,"nodes":383,"dt":0.05,"eps":1}"#).is_err());
    }
}
