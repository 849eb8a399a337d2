//! Repeated projective measurement of the excited level at interval τ.
//!
//! After `N` measurements the survival probability is `|φ(τ)|^{2N}`, so the
//! decay is exponential with the effective rate `κ_eff(τ) = −ln|φ(τ)|²/τ`.
//! Measuring faster than the crossover τ* (where the weak-coupling
//! κ_eff meets the golden-rule rate) slows the decay; slower speeds it up.

use rayon::prelude::*;

use crate::dynamics::{ExactDynamics, SINGULAR_AMPLITUDE};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::perturb::{markov_limits, sinc_squared_average};

/// Upper end of the crossover search, in units of 1/J.
const TAU_SEARCH_LIMIT: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoRate {
    pub tau: f64,
    pub kappa_eff: f64,
    /// `|φ(τ)|` fell below [`SINGULAR_AMPLITUDE`]; `kappa_eff` is then the
    /// lower bound `−2 ln(SINGULAR_AMPLITUDE)/τ`.
    pub saturated: bool,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("measurement interval must be positive, got {tau}")))
    }
}

fn rate_from_survival(tau: f64, p1: f64) -> ZenoRate {
    let floor = SINGULAR_AMPLITUDE * SINGULAR_AMPLITUDE;
    if p1 < floor {
        return ZenoRate { tau, kappa_eff: -floor.ln() / tau, saturated: true };
    }
    // |φ| ≤ 1 holds exactly; the clamp removes quadrature round-off above 1.
    ZenoRate { tau, kappa_eff: -p1.min(1.0).ln() / tau, saturated: false }
}

/// `P(Nτ) = |φ(τ)|^{2N}`.
pub fn survival(p: &ModelParams, tau: f64, n_meas: u32) -> Result<f64> {
    check_tau(tau)?;
    if n_meas == 0 {
        return Err(Error::Domain("at least one measurement is required".into()));
    }
    let phi = ExactDynamics::new(p, tau)?.amplitude(tau)?.phi;
    Ok(phi.norm_sqr().min(1.0).powf(n_meas as f64))
}

/// Exact `κ_eff(τ) = −ln|φ(τ)|²/τ`.
pub fn effective_rate(p: &ModelParams, tau: f64) -> Result<ZenoRate> {
    Ok(effective_rates(p, &[tau])?[0])
}

/// [`effective_rate`] on many intervals, sharing one continuum rule.
pub fn effective_rates(p: &ModelParams, taus: &[f64]) -> Result<Vec<ZenoRate>> {
    for &tau in taus {
        check_tau(tau)?;
    }
    let horizon = taus.iter().copied().fold(0.0, f64::max);
    let dynamics = ExactDynamics::new(p, horizon)?;
    taus.par_iter()
        .map(|&tau| Ok(rate_from_survival(tau, dynamics.amplitude(tau)?.phi.norm_sqr())))
        .collect()
}

/// Weak-coupling `κ_eff(τ) = τ ⟨W sinc²((ω₀ − Ω)τ/2)⟩`; `τ κ_eff` is the
/// time integral of the perturbative κ over one interval.
pub fn weak_effective_rate(p: &ModelParams, tau: f64) -> Result<f64> {
    p.validate()?;
    check_tau(tau)?;
    sinc_squared_average(p, tau)
}

/// Interval τ* at which the weak-coupling κ_eff first reaches the golden-rule
/// rate; `None` when that rate vanishes or diverges, or no crossing occurs
/// below τ = 10⁴/J.
pub fn crossover_tau(p: &ModelParams) -> Result<Option<f64>> {
    let mark = markov_limits(p)?.kappa;
    if !(mark > 0.0) || !mark.is_finite() {
        return Ok(None);
    }
    let f = |tau: f64| weak_effective_rate(p, tau).map(|k| k - mark);
    // κ_eff ≈ ⟨W⟩τ at short times, so this starts near 0.1 κ_mark.
    let mut lo = 0.1 * mark / p.mean_coupling_sq();
    while f(lo)? >= 0.0 {
        lo *= 0.5;
    }
    let limit = TAU_SEARCH_LIMIT / p.j;
    let mut hi = lo;
    loop {
        let next = (2.0 * hi).min(limit);
        if f(next)? >= 0.0 {
            hi = next;
            break;
        }
        lo = next;
        if next >= limit {
            return Ok(None);
        }
        hi = next;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}
