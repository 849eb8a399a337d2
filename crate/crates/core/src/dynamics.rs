//! Exact zero-temperature impurity dynamics.
//!
//! The excited-state amplitude is
//! `φ(t) = Σ_j w_j e^{−iε_j t} + (1/2π) ∫ A(ε) e^{−iεt} dε`,
//! and the exact master equation has rates `κ = −2 Re(φ̇/φ)` and
//! `ξ = −2 Im(φ̇/φ) − 2ω₀`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::ode::dopri5;
use crate::spectral::{find_bound_states, BoundState, ContinuumRule};

/// `|φ|` below which the rate quotients are reported as singular.
pub const SINGULAR_AMPLITUDE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSample {
    pub t: f64,
    pub phi: Complex64,
    pub dphi_dt: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    pub t: f64,
    pub kappa: f64,
    pub xi: f64,
    /// Set when `|φ(t)|` is too small for the quotients to mean anything;
    /// `kappa` and `xi` are then NaN.
    pub singular: bool,
}

impl RateSample {
    /// Rates implied by an amplitude sample.
    pub fn from_amplitude(a: &AmplitudeSample, omega0: f64) -> Self {
        if a.phi.norm() < SINGULAR_AMPLITUDE {
            return RateSample { t: a.t, kappa: f64::NAN, xi: f64::NAN, singular: true };
        }
        let q = a.dphi_dt / a.phi;
        RateSample { t: a.t, kappa: -2.0 * q.re, xi: -2.0 * q.im - 2.0 * omega0, singular: false }
    }
}

/// Reduced impurity state; `rho22 = 1 − rho11`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    pub rho11: f64,
    pub rho12: Complex64,
}

impl DensityMatrix2 {
    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix2 { rho11: psi.alpha_plus.norm_sqr(), rho12: psi.alpha_plus * psi.alpha_minus.conj() }
    }

    /// `|ρ12|² ≤ ρ11 (1 − ρ11)` and `0 ≤ ρ11 ≤ 1`, up to `tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.rho11 >= -tol && self.rho11 <= 1.0 + tol && self.rho12.norm_sqr() <= self.rho11 * (1.0 - self.rho11) + tol
    }
}

/// Initial impurity state `α₊|+⟩ + α₋|−⟩` with the lattice in its ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
}

impl PureState {
    pub fn new(alpha_plus: Complex64, alpha_minus: Complex64) -> Result<Self> {
        let norm = alpha_plus.norm_sqr() + alpha_minus.norm_sqr();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::Domain(format!("initial state must be normalised, |α₊|² + |α₋|² = {norm}")));
        }
        Ok(PureState { alpha_plus, alpha_minus })
    }

    pub fn excited() -> Self {
        PureState { alpha_plus: Complex64::new(1.0, 0.0), alpha_minus: Complex64::new(0.0, 0.0) }
    }

    /// Equal superposition (|+⟩ + |−⟩)/√2.
    pub fn balanced() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        PureState { alpha_plus: a, alpha_minus: a }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be finite and ≥ 0, got {t}")))
    }
}

/// Bound states and a continuum rule prepared once for a parameter set and
/// reused for every time up to the horizon it was built for.
#[derive(Debug, Clone)]
pub struct ExactDynamics {
    params: ModelParams,
    states: Vec<BoundState>,
    rule: ContinuumRule,
}

impl ExactDynamics {
    /// Prepares the quadrature for `0 ≤ t ≤ t_max`. Later times are still
    /// served, through a finer rule built on demand.
    pub fn new(p: &ModelParams, t_max: f64) -> Result<Self> {
        check_time(t_max)?;
        let states = find_bound_states(p)?;
        let rule = ContinuumRule::new(p, t_max);
        Ok(ExactDynamics { params: *p, states, rule })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn bound_states(&self) -> &[BoundState] {
        &self.states
    }

    pub fn horizon(&self) -> f64 {
        self.rule.t_max
    }

    fn sum_at(&self, rule: &ContinuumRule, t: f64) -> AmplitudeSample {
        if t == 0.0 {
            // φ(0) = 1 is the sum rule; return it exactly.
            let mut d = Complex64::new(0.0, 0.0);
            for s in &self.states {
                d -= Complex64::new(0.0, s.energy * s.weight);
            }
            for (&e, &w) in rule.eps.iter().zip(&rule.weight) {
                d -= Complex64::new(0.0, e * w);
            }
            return AmplitudeSample { t, phi: Complex64::new(1.0, 0.0), dphi_dt: d };
        }
        let mut phi = Complex64::new(0.0, 0.0);
        let mut dphi = Complex64::new(0.0, 0.0);
        let terms = self.states.iter().map(|s| (s.energy, s.weight)).chain(rule.eps.iter().copied().zip(rule.weight.iter().copied()));
        for (e, w) in terms {
            let (s, c) = (e * t).sin_cos();
            let z = Complex64::new(w * c, -w * s);
            phi += z;
            dphi += Complex64::new(z.im * e, -z.re * e);
        }
        AmplitudeSample { t, phi, dphi_dt: dphi }
    }

    pub fn amplitude(&self, t: f64) -> Result<AmplitudeSample> {
        check_time(t)?;
        if t <= self.rule.t_max * (1.0 + 1e-12) {
            Ok(self.sum_at(&self.rule, t))
        } else {
            Ok(self.sum_at(&ContinuumRule::new(&self.params, t), t))
        }
    }

    /// Amplitudes on a time grid, evaluated in parallel.
    pub fn amplitudes(&self, times: &[f64]) -> Result<Vec<AmplitudeSample>> {
        let t_top = times.iter().copied().fold(0.0f64, f64::max);
        let wider;
        let rule = if t_top <= self.rule.t_max * (1.0 + 1e-12) {
            &self.rule
        } else {
            wider = ContinuumRule::new(&self.params, t_top);
            &wider
        };
        times
            .par_iter()
            .map(|&t| {
                check_time(t)?;
                Ok(self.sum_at(rule, t))
            })
            .collect()
    }

    pub fn rates(&self, t: f64) -> Result<RateSample> {
        Ok(RateSample::from_amplitude(&self.amplitude(t)?, self.params.omega0))
    }

    pub fn rates_on(&self, times: &[f64]) -> Result<Vec<RateSample>> {
        Ok(self
            .amplitudes(times)?
            .iter()
            .map(|a| RateSample::from_amplitude(a, self.params.omega0))
            .collect())
    }

    pub fn evolve(&self, psi0: &PureState, t: f64) -> Result<DensityMatrix2> {
        Ok(density_from_amplitude(psi0, self.amplitude(t)?.phi))
    }
}

fn density_from_amplitude(psi0: &PureState, phi: Complex64) -> DensityMatrix2 {
    DensityMatrix2 {
        rho11: psi0.alpha_plus.norm_sqr() * phi.norm_sqr(),
        rho12: psi0.alpha_minus.conj() * psi0.alpha_plus * phi,
    }
}

/// `φ(t)` and `φ̇(t)`.
pub fn amplitude(p: &ModelParams, t: f64) -> Result<AmplitudeSample> {
    check_time(t)?;
    ExactDynamics::new(p, t)?.amplitude(t)
}

/// `κ(t)` and `ξ(t)` from the amplitude.
pub fn rates(p: &ModelParams, t: f64) -> Result<RateSample> {
    check_time(t)?;
    ExactDynamics::new(p, t)?.rates(t)
}

/// `ρ11 = |α₊|²|φ|²`, `ρ12 = α₋* α₊ φ`.
pub fn evolve_density(p: &ModelParams, psi0: &PureState, t: f64) -> Result<DensityMatrix2> {
    PureState::new(psi0.alpha_plus, psi0.alpha_minus)?;
    check_time(t)?;
    ExactDynamics::new(p, t)?.evolve(psi0, t)
}

/// Long-time behaviour fixed by the bound states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Asymptotics {
    /// `|φ|² → 1/B₁²`, `κ → 0`, `ξ → 2(ε₁ − ω₀)`.
    OneState { energy: f64, b: f64, population: f64, xi: f64 },
    /// `|φ|² ~ (D + 2 cos Δt)/(B₁B₂)` and
    /// `κ ~ 2Δ sin Δt / (D + 2 cos Δt)` with `Δ = ε₂ − ε₁`, `D = B₁/B₂ + B₂/B₁`.
    TwoStates { energies: [f64; 2], b: [f64; 2], d: f64, frequency: f64 },
}

impl Asymptotics {
    pub fn population(&self, t: f64) -> f64 {
        match *self {
            Asymptotics::OneState { population, .. } => population,
            Asymptotics::TwoStates { b, d, frequency, .. } => (d + 2.0 * (frequency * t).cos()) / (b[0] * b[1]),
        }
    }

    pub fn kappa(&self, t: f64) -> f64 {
        match *self {
            Asymptotics::OneState { .. } => 0.0,
            Asymptotics::TwoStates { d, frequency, .. } => {
                let x = frequency * t;
                2.0 * frequency * x.sin() / (d + 2.0 * x.cos())
            }
        }
    }

    /// Centre of the population oscillation (the limit for one state).
    pub fn mean_population(&self) -> f64 {
        match *self {
            Asymptotics::OneState { population, .. } => population,
            Asymptotics::TwoStates { b, d, .. } => d / (b[0] * b[1]),
        }
    }
}

pub fn asymptotics(p: &ModelParams) -> Result<Asymptotics> {
    let states = find_bound_states(p)?;
    Ok(match states.as_slice() {
        [s] => {
            let b = 1.0 / s.weight;
            Asymptotics::OneState { energy: s.energy, b, population: 1.0 / (b * b), xi: 2.0 * (s.energy - p.omega0) }
        }
        [s1, s2] => {
            let b = [1.0 / s1.weight, 1.0 / s2.weight];
            Asymptotics::TwoStates {
                energies: [s1.energy, s2.energy],
                b,
                d: b[0] / b[1] + b[1] / b[0],
                frequency: s2.energy - s1.energy,
            }
        }
        _ => unreachable!("one or two bound states"),
    })
}

/// Outcome of [`master_equation_residual`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Sup-norm deviation over the unflagged grid points.
    pub sup_norm: f64,
    /// Grid subintervals `[t_i, t_{i+1}]` skipped because `|φ|` became
    /// singular inside them; the integration restarts after each one.
    pub flagged: Vec<[f64; 2]>,
}

/// Integrates `ρ̇11 = −κρ11`, `ρ̇12 = −(iω₀ + iξ/2 + κ/2)ρ12` with the
/// computed rates, starting from (|+⟩ + |−⟩)/√2, and compares with
/// [`evolve_density`] on the ascending grid.
pub fn master_equation_residual(p: &ModelParams, grid: &[f64]) -> Result<ResidualReport> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return Err(Error::Domain("time grid must be non-empty, ascending and non-negative".into()));
    }
    let dynamics = ExactDynamics::new(p, *grid.last().unwrap())?;
    let psi = PureState::balanced();
    let exact: Vec<DensityMatrix2> = dynamics
        .amplitudes(grid)?
        .iter()
        .map(|a| density_from_amplitude(&psi, a.phi))
        .collect();
    let omega0 = p.omega0;
    let rhs = |t: f64, y: &[f64; 3]| {
        let a = dynamics.sum_at(&dynamics.rule, t);
        let r = RateSample::from_amplitude(&a, omega0);
        let rho12 = Complex64::new(y[1], y[2]);
        let d12 = -Complex64::new(0.5 * r.kappa, omega0 + 0.5 * r.xi) * rho12;
        [-r.kappa * y[0], d12.re, d12.im]
    };
    let pack = |m: &DensityMatrix2| [m.rho11, m.rho12.re, m.rho12.im];
    let mut sup: f64 = 0.0;
    let mut flagged = Vec::new();
    let mut state = pack(&exact[0]);
    for i in 0..grid.len() - 1 {
        let (t0, t1) = (grid[i], grid[i + 1]);
        let singular = exact[i + 1].rho11 < 0.5 * SINGULAR_AMPLITUDE.powi(2)
            || min_amplitude(&dynamics, t0, t1) < SINGULAR_AMPLITUDE;
        let step = if singular { None } else { dopri5(&rhs, t0, state, &[t1], 1e-11, 1e-13).ok() };
        match step {
            Some(ys) if ys[0].iter().all(|v| v.is_finite()) => {
                state = ys[0];
                let e = pack(&exact[i + 1]);
                let dev = (state[0] - e[0]).abs().max(Complex64::new(state[1] - e[1], state[2] - e[2]).norm());
                sup = sup.max(dev);
            }
            _ => {
                flagged.push([t0, t1]);
                state = pack(&exact[i + 1]);
            }
        }
    }
    Ok(ResidualReport { sup_norm: sup, flagged })
}

/// Smallest `|φ|` seen on a fine scan of `[t0, t1]`.
fn min_amplitude(d: &ExactDynamics, t0: f64, t1: f64) -> f64 {
    (0..=16)
        .map(|k| d.sum_at(&d.rule, t0 + (t1 - t0) * k as f64 / 16.0).phi.norm())
        .fold(f64::INFINITY, f64::min)
}

/// Field of fastest decay: the grid point minimising `ρ11(T_w)` from the
/// excited state. `None` when the minimum sits at either end of the grid.
pub fn critical_field(p: &ModelParams, h_grid: &[f64], horizon: f64) -> Result<Option<f64>> {
    check_time(horizon)?;
    if h_grid.len() < 3 {
        return Err(Error::Domain("field grid needs at least three points".into()));
    }
    let rho: Vec<f64> = h_grid
        .par_iter()
        .map(|&h| {
            let q = p.with_h(h);
            q.validate()?;
            Ok(ExactDynamics::new(&q, horizon)?.amplitude(horizon)?.phi.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let (idx, _) = rho
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &r)| if r < acc.1 { (i, r) } else { acc });
    if idx == 0 || idx + 1 == h_grid.len() {
        Ok(None)
    } else {
        Ok(Some(h_grid[idx]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::weight_function;
    use approx::assert_abs_diff_eq;

    fn fig2() -> ModelParams {
        ModelParams::chain(0.1, 3.0, 1.0)
    }

    #[test]
    fn initial_value_and_free_limit() {
        for p in [fig2(), ModelParams { d: 2, ..ModelParams::chain(2.0, 5.0, 1.0) }] {
            let a = amplitude(&p, 0.0).unwrap();
            assert_eq!(a.phi, Complex64::new(1.0, 0.0));
        }
        let p = fig2().with_g(0.0);
        let d = ExactDynamics::new(&p, 30.0).unwrap();
        for t in [0.5, 3.0, 29.0] {
            let a = d.amplitude(t).unwrap();
            assert!((a.phi - Complex64::new(0.0, -p.omega0 * t).exp()).norm() < 1e-12);
            let r = d.rates(t).unwrap();
            assert!(r.kappa.abs() < 1e-10 && r.xi.abs() < 1e-10);
        }
        assert!(amplitude(&p, -1.0).is_err());
    }

    #[test]
    fn amplitude_is_contractive() {
        for p in [fig2(), ModelParams::chain(0.5, 8.0, 1.0), ModelParams { d: 2, ..ModelParams::chain(0.1, 5.0, 1.0) }] {
            let d = ExactDynamics::new(&p, 60.0).unwrap();
            let ts: Vec<f64> = (0..=1200).map(|i| i as f64 * 0.05).collect();
            for a in d.amplitudes(&ts).unwrap() {
                assert!(a.phi.norm() <= 1.0 + 1e-9, "{a:?}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let d = ExactDynamics::new(&fig2(), 20.0).unwrap();
        let h = 1e-4;
        for t in [0.3, 2.0, 7.7, 15.0] {
            let a = d.amplitude(t).unwrap();
            let fd = (d.amplitude(t + h).unwrap().phi - d.amplitude(t - h).unwrap().phi) / (2.0 * h);
            assert!((a.dphi_dt - fd).norm() < 1e-6);
        }
    }

    #[test]
    fn short_time_kappa_is_linear() {
        let p = fig2();
        let d = ExactDynamics::new(&p, 0.01).unwrap();
        for t in [1e-4, 1e-3] {
            let k = d.rates(t).unwrap().kappa;
            assert_abs_diff_eq!(k / t, 8.0 * p.g * p.g * p.s, epsilon = 1e-3 * 8.0);
        }
    }

    #[test]
    fn kappa_is_log_derivative_of_population() {
        let d = ExactDynamics::new(&fig2(), 20.0).unwrap();
        let h = 1e-3;
        let pop = |t: f64| d.amplitude(t).unwrap().phi.norm_sqr();
        for t in [0.7, 3.3, 9.1] {
            // 4th-order central difference of ln|φ|²
            let l = |x: f64| pop(x).ln();
            let dl = (-l(t + 2.0 * h) + 8.0 * l(t + h) - 8.0 * l(t - h) + l(t - 2.0 * h)) / (12.0 * h);
            assert_abs_diff_eq!(d.rates(t).unwrap().kappa, -dl, epsilon = 1e-4);
        }
    }

    #[test]
    fn long_time_single_state_limit() {
        let p = ModelParams::chain(0.1, 3.0, 1.0);
        let asy = asymptotics(&p).unwrap();
        let Asymptotics::OneState { population, energy, .. } = asy else { panic!("expected one state") };
        assert_abs_diff_eq!(population, weight_function(&p, energy).unwrap().powi(-2), epsilon = 1e-14);
        let a = amplitude(&p, 500.0).unwrap();
        assert_abs_diff_eq!(a.phi.norm_sqr(), population, epsilon = 1e-3);
    }

    #[test]
    fn evolve_density_cases() {
        let p = fig2();
        let rho = evolve_density(&p, &PureState::excited(), 0.0).unwrap();
        assert_eq!(rho, DensityMatrix2 { rho11: 1.0, rho12: Complex64::new(0.0, 0.0) });
        let d = ExactDynamics::new(&p, 10.0).unwrap();
        let phi = d.amplitude(4.0).unwrap().phi;
        let r = d.evolve(&PureState::excited(), 4.0).unwrap();
        assert_abs_diff_eq!(r.rho11, phi.norm_sqr(), epsilon = 1e-15);
        assert_eq!(r.rho12, Complex64::new(0.0, 0.0));
        let r = d.evolve(&PureState::balanced(), 4.0).unwrap();
        assert!(r.is_positive(1e-12));
        let bad = PureState { alpha_plus: Complex64::new(1.0, 0.0), alpha_minus: Complex64::new(1.0, 0.0) };
        assert!(evolve_density(&p, &bad, 1.0).is_err());
    }

    #[test]
    fn master_equation_free_precession() {
        let p = fig2().with_g(0.0);
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.5).collect();
        let r = master_equation_residual(&p, &grid).unwrap();
        assert!(r.sup_norm < 1e-9 && r.flagged.is_empty());
    }

    #[test]
    fn two_state_asymptotics_shape() {
        let p = ModelParams::chain(0.5, 8.0, 1.0);
        let Asymptotics::TwoStates { frequency, energies, d, .. } = asymptotics(&p).unwrap() else {
            panic!("expected two states")
        };
        assert_abs_diff_eq!(frequency, energies[1] - energies[0], epsilon = 1e-15);
        assert!(d >= 2.0);
        // (D + 2 cos Δt)/(B₁B₂) = |w₁e^{−iε₁t} + w₂e^{−iε₂t}|² stays below 1.
        for g in [1e-3, 0.3, 1.0, 2.0] {
            let asy = asymptotics(&p.with_g(g).with_omega0(20.0)).unwrap();
            assert!(matches!(asy, Asymptotics::TwoStates { .. }));
            for i in 0..200 {
                let pop = asy.population(0.173 * i as f64);
                assert!((0.0..=1.0 + 1e-12).contains(&pop));
            }
        }
    }

    #[test]
    fn critical_field_rejects_monotone_profiles() {
        let p = ModelParams::chain(0.0, 0.5, 1.0);
        let grid: Vec<f64> = (0..6).map(|i| 0.05 * i as f64).collect();
        assert_eq!(critical_field(&p, &grid, 10.0).unwrap(), None);
    }
}
