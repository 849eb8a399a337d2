//! Spectral density, bound states and their residues.
//!
//! The continuum is parametrised by `ε = h̃ − b cos θ`, θ ∈ (0, π), which
//! absorbs the edge singularities of Im Σ; every continuum integral in the
//! crate is carried out in θ.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{spectrum_bounds, ModelParams};
use crate::quad::{adaptive, kronrod_nodes, refine_panels, Tol};
use crate::selfenergy::{re_sigma_outside, sigma_in_band_theta};
use crate::specfun::ellip_ke;

/// Discrete pole of the impurity Green's function outside the band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    /// Residue `1/B(ε)`, in (0, 1].
    pub weight: f64,
}

fn require_closed_form(p: &ModelParams) -> Result<()> {
    p.validate()?;
    if p.d > 2 {
        return Err(Error::Unsupported { d: p.d, why: "bound states need the closed-form self-energy" });
    }
    Ok(())
}

/// Continuum spectral density `A(ε) = −2 Im Σ / ((ε − ω₀ − Re Σ)² + (Im Σ)²)`
/// for ε strictly inside the band.
pub fn spectral_density(p: &ModelParams, eps: f64) -> Result<f64> {
    require_closed_form(p)?;
    let b = spectrum_bounds(p);
    if !b.contains(eps) {
        return Err(Error::Domain(format!(
            "spectral density is defined inside ({}, {}), got {eps}",
            b.omega_min, b.omega_max
        )));
    }
    let theta = ((p.h_tilde() - eps) / p.half_bandwidth()).clamp(-1.0, 1.0).acos();
    let sigma = sigma_in_band_theta(p, theta);
    Ok(lorentzian(eps - p.omega0, sigma))
}

#[inline]
fn lorentzian(detuning: f64, sigma: Complex64) -> f64 {
    let d = detuning - sigma.re;
    let den = d * d + sigma.im * sigma.im;
    if den == 0.0 {
        0.0
    } else {
        -2.0 * sigma.im / den
    }
}

/// `A(ε(θ)) dε/dθ / 2π` and `ε(θ)`.
pub(crate) fn continuum_density_theta(p: &ModelParams, theta: f64) -> (f64, f64) {
    let half = p.half_bandwidth();
    let eps = p.h_tilde() - half * theta.cos();
    let dens = match p.d {
        1 => {
            // A dε = 4Ga c²s² / (D²s² + G²c²) dθ with c, s of θ/2.
            let g = p.g * p.g / p.j;
            let (s, c) = (0.5 * theta).sin_cos();
            let dd = eps - p.omega0 - g;
            let num = 4.0 * g * half * c * c * s * s;
            let den = dd * dd * s * s + g * g * c * c;
            if den == 0.0 {
                0.0
            } else {
                num / den
            }
        }
        _ => {
            let sigma = sigma_in_band_theta(p, theta);
            lorentzian(eps - p.omega0, sigma) * half * theta.sin()
        }
    };
    (eps, dens / (2.0 * PI))
}

/// `B(ε) = 1 − d Re Σ/dε` in closed form, for ε outside the closed band.
pub fn weight_function(p: &ModelParams, eps: f64) -> Result<f64> {
    require_closed_form(p)?;
    let bounds = spectrum_bounds(p);
    if !eps.is_finite() || (eps >= bounds.omega_min && eps <= bounds.omega_max) {
        return Err(Error::Domain(format!("B(ε) is defined outside the band, got {eps}")));
    }
    Ok(weight_function_unchecked(p, eps))
}

fn weight_function_unchecked(p: &ModelParams, eps: f64) -> f64 {
    let u = eps - p.h_tilde();
    let b = p.half_bandwidth();
    let g2 = p.g * p.g;
    match p.d {
        1 => {
            let root = ((u - b) / (u + b)).sqrt();
            1.0 + g2 / p.j * b / ((u + b) * (u + b) * root)
        }
        _ => {
            let q = (b / u).powi(2);
            let q1 = (u - b) * (u + b) / (u * u);
            let (k, e) = ellip_ke(q, q1);
            1.0 + g2 / (2.0 * PI * p.j * p.j * p.s) * (u / (u + b) * e - (u - b) / u * k)
        }
    }
}

/// `Ω_max − Re Σ(Ω_max + i0⁺)`: a second bound state exists iff ω₀ exceeds it.
pub fn two_state_threshold(p: &ModelParams) -> Result<f64> {
    require_closed_form(p)?;
    let top = spectrum_bounds(p).omega_max;
    Ok(top - re_sigma_outside(p, top))
}

/// Bisection to full precision followed by a guarded Newton polish.
/// `f` is increasing with `f(lo) < 0 < f(hi)`; `df` is its derivative.
fn solve_increasing(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    for _ in 0..3 {
        let fx = f(x);
        let step = fx / df(x);
        let y = x - step;
        if !y.is_finite() || y < lo.min(hi) - (hi - lo).abs() || f(y).abs() >= fx.abs() {
            break;
        }
        x = y;
    }
    x
}

/// Bound states: always one below the band, and one above it when
/// `ω₀ > Ω_max − Re Σ(Ω_max⁺)`. At `g = 0` the level is decoupled and is
/// returned as the single pole `(ω₀, 1)`.
///
/// When the lower root lies closer to `Ω_min` than floating point can
/// resolve (weak coupling in 2D, where Re Σ diverges only logarithmically),
/// the state is reported at the last resolvable point below the edge with
/// the corresponding, negligible, weight.
pub fn find_bound_states(p: &ModelParams) -> Result<Vec<BoundState>> {
    require_closed_form(p)?;
    if p.g == 0.0 {
        // Decoupled level: a single unit-weight pole at ω₀, wherever it lies.
        return Ok(vec![BoundState { energy: p.omega0, weight: 1.0 }]);
    }
    let bounds = spectrum_bounds(p);
    let f = |e: f64| e - p.omega0 - re_sigma_outside(p, e);
    let df = |e: f64| weight_function_unchecked(p, e);
    let span = 2.0 * (p.omega0.abs() + p.g * p.g / p.j + p.half_bandwidth());
    let mut states = Vec::with_capacity(2);

    let lower_edge = bounds.omega_min;
    let mut lo = lower_edge - span;
    while f(lo) >= 0.0 {
        lo = lower_edge - 2.0 * (lower_edge - lo);
    }
    let mut gap = 1e-8 * p.j;
    let mut hi = lower_edge - gap;
    while f(hi) <= 0.0 {
        gap *= 1e-2;
        let next = lower_edge - gap.max(lower_edge.abs().max(p.j) * 4.0 * f64::EPSILON);
        if next == hi || next >= lower_edge {
            break;
        }
        hi = next;
    }
    let energy = if f(hi) <= 0.0 { hi } else { solve_increasing(f, df, lo, hi) };
    states.push(BoundState { energy, weight: 1.0 / df(energy) });

    let upper_edge = bounds.omega_max;
    let f_top = upper_edge - p.omega0 - re_sigma_outside(p, upper_edge);
    if f_top < 0.0 {
        let mut hi = upper_edge + span;
        while f(hi) <= 0.0 {
            hi = upper_edge + 2.0 * (hi - upper_edge);
        }
        let mut lo = upper_edge;
        let mut step = (hi - upper_edge) * 0.5;
        // f(Ω_max) itself is the one-sided limit; move strictly outside.
        while step > upper_edge.abs().max(p.j) * 4.0 * f64::EPSILON {
            let x = upper_edge + step;
            if f(x) < 0.0 {
                lo = x;
                break;
            }
            step *= 0.5;
        }
        let energy = if lo == upper_edge {
            upper_edge.next_up()
        } else {
            solve_increasing(f, df, lo, hi)
        };
        states.push(BoundState { energy, weight: 1.0 / df(energy) });
    }
    Ok(states)
}

/// Gauss–Kronrod nodes `(ε, w)` for `∫ A(ε) g(ε) dε / 2π` over the band,
/// adapted to the peaks of `A` and fine enough that `e^{−iεt}` is resolved
/// for `t ≤ t_max`.
#[derive(Debug, Clone)]
pub(crate) struct ContinuumRule {
    pub eps: Vec<f64>,
    pub weight: Vec<f64>,
    pub t_max: f64,
}

impl ContinuumRule {
    pub fn new(p: &ModelParams, t_max: f64) -> Self {
        let pts: Vec<f64> = if p.d == 1 { vec![0.0, PI] } else { vec![0.0, FRAC_PI_2, PI] };
        let est = adaptive(|th| continuum_density_theta(p, th).1, &pts, Tol::new(1e-14, 1e-13));
        // e^{−iεt} advances by at most π/4 per panel: Δθ ≤ π/(4 t b).
        let panels = if t_max > 0.0 {
            refine_panels(&est.panels, PI / (4.0 * t_max * p.half_bandwidth()))
        } else {
            est.panels
        };
        let mut eps = Vec::with_capacity(panels.len() * 21);
        let mut weight = Vec::with_capacity(panels.len() * 21);
        for [a, b] in panels {
            for (th, w) in kronrod_nodes(a, b) {
                let (e, dens) = continuum_density_theta(p, th);
                eps.push(e);
                weight.push(w * dens);
            }
        }
        ContinuumRule { eps, weight, t_max }
    }

    pub fn total(&self) -> f64 {
        self.weight.iter().sum()
    }
}

/// Total spectral weight `Σ_j w_j + ∫ A dε / 2π`; equals 1 exactly.
pub fn sum_rule(p: &ModelParams) -> Result<f64> {
    let states = find_bound_states(p)?;
    let rule = ContinuumRule::new(p, 0.0);
    Ok(states.iter().map(|s| s.weight).sum::<f64>() + rule.total())
}
