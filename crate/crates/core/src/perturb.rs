//! Second-order (weak-coupling) dynamics at temperature `T ≥ 0`.
//!
//! With `Δ = ω₀ − Ω_k`, `W_k` the mode weight and `n_k` the Bose factor,
//! the lattice correlation function is `Ψ(t) = ⟨W (n + 1) e^{iΔt}⟩`
//! and the rates are `κ + iξ = 2 ∫₀ᵗ Ψ`. Brillouin-zone averages `⟨·⟩` are
//! taken over the coupled mode density `ρ_W(Ω) = −Im Σ(Ω)/π`, so that
//!
//! ```text
//! κ = 2⟨W(n+1) sin(Δt)/Δ⟩          ∫₀ᵗ κ = 2⟨W(n+1)(1 − cos Δt)/Δ²⟩
//! ξ = 2⟨W(n+1)(1 − cos Δt)/Δ⟩      ∫₀ᵗ ξ = 2⟨W(n+1)(Δt − sin Δt)/Δ²⟩
//! ```
//!
//! At `T = 0` the zone average factorises over the axes,
//! `Ψ₀(t) = 2^{d+1}g²S e^{i(ω₀ − h̃)t} [J₀(at) + iJ₁(at)]^d` with `a = 4JS`,
//! and the rates are cumulative time integrals of this closed form.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{DensityMatrix2, RateSample};
use crate::error::{Error, Result};
use crate::model::{spectrum_bounds, ModelParams};
use crate::quad::{adaptive, refine_panels, Pair, Real, Tol};
use crate::selfenergy::{re_sigma_outside, sigma_in_band_theta, sigma_numeric};
use crate::specfun::bessel_j01;

/// Bose–Einstein occupation of the lattice modes, with `k_B = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    pub temperature: f64,
}

impl ThermalParams {
    pub const ZERO: ThermalParams = ThermalParams { temperature: 0.0 };

    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParams(format!("temperature must be finite and ≥ 0, got {temperature}")));
        }
        Ok(ThermalParams { temperature })
    }

    pub fn is_zero(&self) -> bool {
        self.temperature == 0.0
    }

    /// `n(Ω) = 1/(e^{Ω/T} − 1)`, zero at `T = 0`.
    pub fn occupation(&self, omega: f64) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0 / (omega / self.temperature).exp_m1()
        }
    }

    /// `n(Ω_min)/(2S)`; spin waves are a fair description while this is small.
    pub fn spin_wave_ratio(&self, p: &ModelParams) -> f64 {
        self.occupation(spectrum_bounds(p).omega_min) / (2.0 * p.s)
    }

    /// Whether [`spin_wave_ratio`](Self::spin_wave_ratio) is below 0.1.
    /// Exceeding it is a warning, not an error.
    pub fn spin_wave_valid(&self, p: &ModelParams) -> bool {
        self.spin_wave_ratio(p) < 0.1
    }

    fn check(&self, p: &ModelParams) -> Result<()> {
        p.validate()?;
        if !self.is_zero() && spectrum_bounds(p).omega_min <= 0.0 {
            return Err(Error::Domain(format!(
                "Bose factor diverges: Ω_min = {} ≤ 0 at T = {}",
                spectrum_bounds(p).omega_min,
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Short-time coefficients: `ρ11 ≈ e^{−2Γt²}(ρ11(0) − Δ/Γ) + Δ/Γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeCoefficients {
    /// `½⟨W(2n + 1)⟩`.
    pub gamma: f64,
    /// `½⟨W n⟩`.
    pub delta: f64,
    /// `√2/√⟨W(2n + 1)⟩ = 1/√Γ`.
    pub tau_d: f64,
}

/// Long-time (golden-rule) limits `κ_mark = −2 Im Σ(ω₀)`, `ξ_mark = 2 Re Σ(ω₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovLimits {
    pub kappa: f64,
    pub xi: f64,
    /// Set when either limit is infinite. In the chain this happens when ω₀
    /// sits on the zone-centre edge Ω_min, where both diverge.
    pub divergent: bool,
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be finite and ≥ 0, got {t}")))
    }
}

// ---------------------------------------------------------------------------
// Zone averages over the coupled mode density.

/// `ρ_W` per unit θ for `Ω = h̃ − b cos θ`, `d ∈ {1, 2}`; integrates to ⟨W⟩.
fn mode_density_theta(p: &ModelParams, theta: f64) -> f64 {
    match p.d {
        1 => 4.0 * p.g * p.g * p.s / PI * (1.0 + theta.cos()),
        _ => -sigma_in_band_theta(p, theta).im * p.half_bandwidth() * theta.sin() / PI,
    }
}

fn average_tol(scale: f64) -> Tol {
    Tol::new(1e-15 * scale, 1e-13)
}

/// `⟨W F(Ω)⟩` for an integrand oscillating in Ω at angular rate ≤ `rate`.
/// `breaks` are extra energies where `F` is rough or has zeros.
fn zone_average<V: crate::quad::Value>(
    p: &ModelParams,
    rate: f64,
    breaks: &[f64],
    f: impl Fn(f64) -> V,
) -> Result<V> {
    let scale = p.mean_coupling_sq().max(f64::MIN_POSITIVE);
    let ht = p.h_tilde();
    match p.d {
        1 | 2 => {
            let b = p.half_bandwidth();
            let mut pts = vec![0.0, PI];
            if p.d == 2 {
                pts.push(FRAC_PI_2);
            }
            for &e in breaks {
                let c = (ht - e) / b;
                if c.abs() < 1.0 {
                    pts.push(c.acos());
                }
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let panels: Vec<[f64; 2]> = pts.windows(2).map(|w| [w[0], w[1]]).collect();
            let panels = refine_panels(&panels, (PI / 8.0).min(4.0 / (b * rate).max(1e-300)));
            let pts: Vec<f64> = panels.iter().map(|q| q[0]).chain(std::iter::once(PI)).collect();
            let est = adaptive(|th| f(ht - b * th.cos()) * mode_density_theta(p, th), &pts, average_tol(scale));
            if !est.converged {
                return Err(Error::NoConvergence(format!("zone average did not converge (error {:e})", est.error)));
            }
            Ok(est.value)
        }
        3 => {
            // Square-lattice density for the first two axes, then the third
            // axis with its own weight 2(1 + cos k)/π.
            let sq = ModelParams { d: 2, ..*p };
            let b2 = sq.half_bandwidth();
            let a = p.axis_scale();
            let inner_width = (PI / 8.0).min(4.0 / (a * rate).max(1e-300));
            let inner_pts: Vec<f64> = refine_panels(&[[0.0, PI]], inner_width)
                .iter()
                .map(|q| q[0])
                .chain(std::iter::once(PI))
                .collect();
            let outer_pts: Vec<f64> = refine_panels(&[[0.0, FRAC_PI_2], [FRAC_PI_2, PI]], (PI / 8.0).min(4.0 / (b2 * rate).max(1e-300)))
                .iter()
                .map(|q| q[0])
                .chain(std::iter::once(PI))
                .collect();
            let mut failed = false;
            let est = adaptive(
                |th| {
                    let x = ht - b2 * th.cos();
                    let inner = adaptive(
                        |k: f64| f(x - a * k.cos()) * (2.0 * (1.0 + k.cos()) / PI),
                        &inner_pts,
                        average_tol(scale),
                    );
                    failed |= !inner.converged;
                    inner.value * mode_density_theta(&sq, th)
                },
                &outer_pts,
                average_tol(scale),
            );
            if failed || !est.converged {
                return Err(Error::NoConvergence("three-dimensional zone average did not converge".into()));
            }
            Ok(est.value)
        }
        d => Err(Error::Unsupported { d, why: "lattice dimension must be 1, 2 or 3" }),
    }
}

/// `sin x / x`.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Time kernels of one mode, `x = Δt`:
/// `[sin Δt/Δ, (1 − cos Δt)/Δ, (1 − cos Δt)/Δ², (Δt − sin Δt)/Δ²]`.
fn mode_kernels(delta: f64, t: f64) -> [f64; 4] {
    let x = delta * t;
    let half = sinc(0.5 * x);
    let c1 = if x.abs() < 1e-4 { 0.5 * x - x * x * x / 24.0 } else { 2.0 * (0.5 * x).sin().powi(2) / x };
    let s2 = if x.abs() < 0.1 {
        let x2 = x * x;
        x * (1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 / 362_880.0)))
    } else {
        (x - x.sin()) / (x * x)
    };
    [t * sinc(x), t * c1, 0.5 * t * t * half * half, t * t * s2]
}

/// Rates and their integrals at `t` from zone averages:
/// `[κ, ξ, ∫κ, ∫ξ]` at temperature `tp` followed by the same at `T = 0`.
fn zone_moments(p: &ModelParams, tp: &ThermalParams, t: f64) -> Result<[f64; 8]> {
    let w0 = p.omega0;
    let v = zone_average(p, t, &[w0], |omega| {
        let k = mode_kernels(w0 - omega, t);
        let m = 2.0 * (tp.occupation(omega) + 1.0);
        Real([m * k[0], m * k[1], m * k[2], m * k[3], 2.0 * k[0], 2.0 * k[1], 2.0 * k[2], 2.0 * k[3]])
    })?;
    Ok(v.0)
}

// ---------------------------------------------------------------------------
// Zero-temperature closed form.

/// `Ψ₀(t)`, valid in every dimension because the T = 0 zone average
/// factorises over the axes.
fn psi_zero(p: &ModelParams, t: f64) -> Complex64 {
    let (j0, j1) = bessel_j01(p.axis_scale() * t);
    let axis = Complex64::new(j0, j1).powu(p.d as u32);
    let phase = Complex64::from_polar(1.0, (p.omega0 - p.h_tilde()) * t);
    phase * axis * p.mean_coupling_sq()
}

/// Bath correlation function `Ψ(t) = ⟨W (n + 1) e^{i(ω₀ − Ω)t}⟩`.
pub fn correlation_psi(p: &ModelParams, tp: &ThermalParams, t: f64) -> Result<Complex64> {
    tp.check(p)?;
    check_time(t)?;
    if tp.is_zero() {
        return Ok(psi_zero(p, t));
    }
    let v = zone_average(p, t, &[], |omega| {
        let m = tp.occupation(omega) + 1.0;
        let (s, c) = ((p.omega0 - omega) * t).sin_cos();
        Real([m * c, m * s])
    })?;
    Ok(Complex64::new(v.0[0], v.0[1]))
}

/// `(∫₀ᵗ Ψ₀, ∫₀ᵗ∫₀^s Ψ₀)` on an ascending grid, accumulated interval by
/// interval so that each prefix is reused.
fn zero_temperature_prefix(p: &ModelParams, grid: &[f64]) -> Result<Vec<(Complex64, Complex64)>> {
    let rate = (p.omega0 - p.h_tilde()).abs() + p.d as f64 * p.axis_scale();
    let width = 2.0 / rate.max(1e-300);
    let scale = p.mean_coupling_sq().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(grid.len());
    let (mut a, mut c, mut t0) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
    for &t1 in grid {
        if t1 > t0 {
            let pts: Vec<f64> = refine_panels(&[[t0, t1]], width)
                .iter()
                .map(|q| q[0])
                .chain(std::iter::once(t1))
                .collect();
            let est = adaptive(
                |s| {
                    let psi = psi_zero(p, s);
                    Pair(psi, psi * (t1 - s))
                },
                &pts,
                Tol::new(1e-16 * scale * (1.0 + t1 - t0), 1e-14),
            );
            if !est.converged {
                return Err(Error::NoConvergence(format!("correlation integral on [{t0}, {t1}]")));
            }
            c += a * (t1 - t0) + est.value.1;
            a += est.value.0;
            t0 = t1;
        }
        out.push((a, c));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Cached weak-coupling dynamics.

/// Rates and cumulative integrals at one time. Fields with suffix `0`
/// are the `T = 0` values that enter the thermal solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakSample {
    pub t: f64,
    pub kappa: f64,
    pub xi: f64,
    pub int_kappa: f64,
    pub int_xi: f64,
    pub kappa0: f64,
    pub xi0: f64,
    pub int_kappa0: f64,
    pub int_xi0: f64,
    /// `e^{−G(t)} ∫₀ᵗ (κ − κ⁰) e^{G(τ)} dτ` with `G = ∫₀(2κ − κ⁰)`; zero at `T = 0`.
    pub source: f64,
}

impl WeakSample {
    fn from_moments(t: f64, m: [f64; 8]) -> Self {
        WeakSample {
            t,
            kappa: m[0],
            xi: m[1],
            int_kappa: m[2],
            int_xi: m[3],
            kappa0: m[4],
            xi0: m[5],
            int_kappa0: m[6],
            int_xi0: m[7],
            source: 0.0,
        }
    }

    /// `G(t) = ∫₀ᵗ (2κ − κ⁰)`.
    fn g_exponent(&self) -> f64 {
        2.0 * self.int_kappa - self.int_kappa0
    }

    pub fn rate(&self) -> RateSample {
        RateSample { t: self.t, kappa: self.kappa, xi: self.xi, singular: false }
    }
}

/// Second-order dynamics on a fixed ascending time grid, with every prefix
/// integral computed once and shared by all evolutions.
#[derive(Debug, Clone)]
pub struct WeakDynamics {
    params: ModelParams,
    thermal: ThermalParams,
    samples: Vec<WeakSample>,
}

impl WeakDynamics {
    pub fn new(p: &ModelParams, tp: &ThermalParams, grid: &[f64]) -> Result<Self> {
        tp.check(p)?;
        for &t in grid {
            check_time(t)?;
        }
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("time grid must be ascending".into()));
        }
        let samples = if tp.is_zero() {
            zero_temperature_prefix(p, grid)?
                .into_iter()
                .zip(grid)
                .map(|((a, c), &t)| {
                    let m = [2.0 * a.re, 2.0 * a.im, 2.0 * c.re, 2.0 * c.im];
                    WeakSample::from_moments(t, [m[0], m[1], m[2], m[3], m[0], m[1], m[2], m[3]])
                })
                .collect()
        } else {
            let mut samples = grid
                .par_iter()
                .map(|&t| zone_moments(p, tp, t).map(|m| WeakSample::from_moments(t, m)))
                .collect::<Result<Vec<_>>>()?;
            thermal_sources(p, tp, &mut samples)?;
            samples
        };
        Ok(WeakDynamics { params: *p, thermal: *tp, samples })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn thermal(&self) -> &ThermalParams {
        &self.thermal
    }

    pub fn samples(&self) -> &[WeakSample] {
        &self.samples
    }

    pub fn rates(&self) -> Vec<RateSample> {
        self.samples.iter().map(WeakSample::rate).collect()
    }

    /// Density matrix at every grid time from `rho0`.
    pub fn evolve(&self, rho0: &DensityMatrix2) -> Result<Vec<DensityMatrix2>> {
        if !rho0.is_positive(1e-12) {
            return Err(Error::Domain("initial density matrix is not positive".into()));
        }
        let w0 = self.params.omega0;
        Ok(self
            .samples
            .iter()
            .map(|s| {
                let g = s.g_exponent();
                let rho11 = rho0.rho11 * (-g).exp() + s.source;
                let phase = Complex64::new(-0.5 * g, -w0 * s.t - 0.5 * (2.0 * s.int_xi - s.int_xi0));
                DensityMatrix2 { rho11, rho12: rho0.rho12 * phase.exp() }
            })
            .collect())
    }
}

/// Fills `source` by `S(tᵢ) = S(tᵢ₋₁) e^{−(Gᵢ − Gᵢ₋₁)} + ∫ (κ − κ⁰)(τ) e^{−(Gᵢ − G(τ))} dτ`,
/// the overflow-free form of the thermal inhomogeneous term.
fn thermal_sources(p: &ModelParams, tp: &ThermalParams, samples: &mut [WeakSample]) -> Result<()> {
    let (mut prev_t, mut prev_g, mut prev_s) = (0.0, 0.0, 0.0);
    for s in samples.iter_mut() {
        let (t1, g1) = (s.t, s.g_exponent());
        if t1 > prev_t {
            let mut err = None;
            let est = adaptive(
                |tau| match zone_moments(p, tp, tau) {
                    Ok(m) => {
                        let g = 2.0 * m[2] - m[6];
                        (m[0] - m[4]) * (g - g1).exp()
                    }
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                &[prev_t, t1],
                Tol::new(1e-15, 1e-11),
            );
            if let Some(e) = err {
                return Err(e);
            }
            if !est.converged {
                return Err(Error::NoConvergence(format!("thermal source on [{prev_t}, {t1}]")));
            }
            prev_s = prev_s * (prev_g - g1).exp() + est.value;
        }
        s.source = prev_s;
        (prev_t, prev_g) = (t1, g1);
    }
    Ok(())
}

/// Perturbative `κ(t)` and `ξ(t)`.
pub fn weak_rates(p: &ModelParams, tp: &ThermalParams, t: f64) -> Result<RateSample> {
    Ok(WeakDynamics::new(p, tp, &[t])?.samples[0].rate())
}

/// Perturbative density matrix at `t`. At `T = 0`,
/// `ρ11 = ρ11(0) e^{−∫κ}` and `ρ12 = ρ12(0) e^{−iω₀t − (i/2)∫ξ − ½∫κ}`.
pub fn weak_evolve(p: &ModelParams, tp: &ThermalParams, rho0: &DensityMatrix2, t: f64) -> Result<DensityMatrix2> {
    Ok(WeakDynamics::new(p, tp, &[t])?.evolve(rho0)?[0])
}

/// Γ, Δ and τ_D.
pub fn short_time(p: &ModelParams, tp: &ThermalParams) -> Result<ShortTimeCoefficients> {
    tp.check(p)?;
    let (gamma, delta) = if tp.is_zero() {
        (0.5 * p.mean_coupling_sq(), 0.0)
    } else {
        let v = zone_average(p, 0.0, &[], |omega| {
            let n = tp.occupation(omega);
            Real([0.5 * (2.0 * n + 1.0), 0.5 * n])
        })?;
        (v.0[0], v.0[1])
    };
    Ok(ShortTimeCoefficients { gamma, delta, tau_d: 1.0 / gamma.sqrt() })
}

/// Golden-rule limits at `T = 0`.
///
/// On the lower edge of the square lattice the one-sided density is sampled
/// with half weight, `κ_mark = 4g²/J`, which is also the `t → ∞` limit of the
/// perturbative κ(t).
pub fn markov_limits(p: &ModelParams) -> Result<MarkovLimits> {
    p.validate()?;
    let x = p.omega0 - p.h_tilde();
    let b = p.half_bandwidth();
    let guard = p.guard();
    let g2j = p.g * p.g / p.j;
    let (kappa, xi) = match p.d {
        1 => {
            if (x + b).abs() <= guard {
                (f64::INFINITY, f64::NEG_INFINITY)
            } else if x.abs() < b {
                (2.0 * g2j * ((b - x) / (b + x)).sqrt(), 2.0 * g2j)
            } else {
                (0.0, 2.0 * re_sigma_outside(p, p.omega0))
            }
        }
        2 => {
            if (x + b).abs() <= guard {
                (4.0 * g2j, f64::NEG_INFINITY)
            } else if (x - b).abs() <= guard {
                (0.0, 4.0 * g2j * (1.0 - 2.0 / PI))
            } else if x.abs() < b {
                let sigma = sigma_in_band_theta(p, (-x / b).acos());
                (-2.0 * sigma.im, 2.0 * sigma.re)
            } else {
                (0.0, 2.0 * re_sigma_outside(p, p.omega0))
            }
        }
        _ => {
            let sigma = sigma_numeric(p, p.omega0, 1e-6)?;
            let kappa = if x.abs() < b { -2.0 * sigma.im } else { 0.0 };
            (kappa, 2.0 * sigma.re)
        }
    };
    Ok(MarkovLimits { kappa, xi, divergent: !kappa.is_finite() || !xi.is_finite() })
}

/// `κ_eff(τ) = τ ⟨W sinc²((ω₀ − Ω)τ/2)⟩`, with breakpoints at the zeros of
/// the kernel. Equals `(1/τ) ∫₀^τ κ` of the zero-temperature rates.
pub(crate) fn sinc_squared_average(p: &ModelParams, tau: f64) -> Result<f64> {
    let bounds = spectrum_bounds(p);
    let spacing = 2.0 * PI / tau;
    let mut breaks = vec![p.omega0];
    if p.d <= 2 {
        let lo = ((bounds.omega_min - p.omega0) / spacing).ceil() as i64;
        let hi = ((bounds.omega_max - p.omega0) / spacing).floor() as i64;
        if hi - lo < 200_000 {
            breaks.extend((lo..=hi).filter(|&m| m != 0).map(|m| p.omega0 + m as f64 * spacing));
        }
    }
    let v = zone_average(p, 0.5 * tau, &breaks, |omega| {
        let s = sinc(0.5 * (p.omega0 - omega) * tau);
        s * s
    })?;
    Ok(tau * v)
}
