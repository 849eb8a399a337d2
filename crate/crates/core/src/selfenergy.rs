//! Retarded self-energy Σ(ε + i0⁺) of the impurity.
//!
//! Closed forms exist for the chain and the square lattice; any dimension
//! can be evaluated by direct Brillouin-zone quadrature at finite ν.
//!
//! Notation: `u = ε − h̃`, `a = 4JS` (one axis), `b = 2ηJS` (half band).

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{weight_from_cos, ModelParams};
use crate::quad::{adaptive, Tol};
use crate::specfun::ellip_ke;

/// Default broadening of [`sigma_numeric`], in units of J.
pub const DEFAULT_NU: f64 = 1e-3;

fn require_d(p: &ModelParams, d: usize) -> Result<()> {
    p.validate()?;
    if p.d != d {
        return Err(Error::Unsupported { d: p.d, why: "closed form exists for one lattice dimension only" });
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("energy must be finite, got {eps}")))
    }
}

/// Chain self-energy.
///
/// Outside the band `Re Σ = (g²/J)(1 − √((u − a)/(u + a)))`, `Im Σ = 0`;
/// inside `Re Σ = g²/J` and `Im Σ = −(g²/J)√((a − u)/(a + u))`.
pub fn sigma_1d(p: &ModelParams, eps: f64) -> Result<Complex64> {
    require_d(p, 1)?;
    check_eps(eps)?;
    let u = eps - p.h_tilde();
    let a = p.half_bandwidth();
    if (u + a).abs() < p.guard() {
        return Err(Error::Singularity { at: eps, what: "lower band edge: Re Σ and Im Σ diverge" });
    }
    if (u - a).abs() < p.guard() {
        return Err(Error::Singularity { at: eps, what: "upper band edge: square-root branch point" });
    }
    Ok(sigma_1d_unguarded(p, u))
}

pub(crate) fn sigma_1d_unguarded(p: &ModelParams, u: f64) -> Complex64 {
    let a = p.half_bandwidth();
    let gj = p.g * p.g / p.j;
    if u.abs() >= a {
        Complex64::new(gj * (1.0 - ((u - a) / (u + a)).sqrt()), 0.0)
    } else {
        Complex64::new(gj, -gj * ((a - u) / (a + u)).sqrt())
    }
}

/// Square-lattice self-energy from complete elliptic integrals.
///
/// Outside the band (`q = b²/u² < 1`):
/// `Re Σ = g²/(2πSJ²) [4πSJ − u E(q) + (u − b) K(q)]`.
/// Inside, with `r = u²/b²` and `σ = sgn u`:
/// `Re Σ = 2g²/J − (4g²/πJ) σ E(r) + g²/(2πSJ²) (bσ − |u|) K(r)` and
/// `Im Σ = (g²/2πJ)(u/JS) K(1 − r) − (4g²/πJ) E(1 − r)`.
///
/// Singular at both edges and, as written, at `ε = h̃` where `K(1 − r)`
/// diverges; the one-sided limits there are `Re Σ → 2g²/J` and
/// `Im Σ → −4g²/(πJ)`.
pub fn sigma_2d(p: &ModelParams, eps: f64) -> Result<Complex64> {
    require_d(p, 2)?;
    check_eps(eps)?;
    let u = eps - p.h_tilde();
    let b = p.half_bandwidth();
    let guard = p.guard();
    if (u + b).abs() < guard {
        return Err(Error::Singularity { at: eps, what: "lower band edge: Re Σ diverges logarithmically" });
    }
    if (u - b).abs() < guard {
        return Err(Error::Singularity { at: eps, what: "upper band edge: elliptic branch point" });
    }
    if u.abs() < guard {
        return Err(Error::Singularity { at: eps, what: "band centre: K(1 − r) diverges" });
    }
    Ok(sigma_2d_unguarded(p, u))
}

pub(crate) fn sigma_2d_unguarded(p: &ModelParams, u: f64) -> Complex64 {
    let b = p.half_bandwidth();
    let (j, s, g2) = (p.j, p.s, p.g * p.g);
    let pref = g2 / (2.0 * PI * s * j * j);
    if u.abs() >= b {
        if u.abs() == b {
            return if u > 0.0 {
                Complex64::new(2.0 * g2 / j * (1.0 - 2.0 * FRAC_1_PI), 0.0)
            } else {
                Complex64::new(f64::NEG_INFINITY, 0.0)
            };
        }
        let q = (b / u).powi(2);
        let q1 = (u - b) * (u + b) / (u * u);
        let (k, e) = ellip_ke(q, q1);
        return Complex64::new(pref * (4.0 * PI * s * j - u * e + (u - b) * k), 0.0);
    }
    if u == 0.0 {
        return Complex64::new(2.0 * g2 / j, -4.0 * g2 / (PI * j));
    }
    let r = (u / b).powi(2);
    let r1 = (b - u.abs()) * (b + u.abs()) / (b * b);
    let sigma = u.signum();
    let (k_r, e_r) = ellip_ke(r, r1);
    let (k_c, e_c) = ellip_ke(r1, r);
    let re = 2.0 * g2 / j - 4.0 * g2 / (PI * j) * sigma * e_r + pref * (b * sigma - u.abs()) * k_r;
    let im = g2 / (2.0 * PI * j) * (u / (j * s)) * k_c - 4.0 * g2 / (PI * j) * e_c;
    Complex64::new(re, im)
}

/// Σ at an interior point parametrised by `ε = h̃ − b cos θ`, θ ∈ (0, π).
/// This form keeps full relative accuracy next to the edges.
pub(crate) fn sigma_in_band_theta(p: &ModelParams, theta: f64) -> Complex64 {
    let g2 = p.g * p.g;
    let (s, c) = theta.sin_cos();
    match p.d {
        1 => {
            let gj = g2 / p.j;
            Complex64::new(gj, -gj / (0.5 * theta).tan())
        }
        _ => {
            let pref = 4.0 * g2 / (PI * p.j);
            if c == 0.0 {
                return Complex64::new(2.0 * g2 / p.j, -pref);
            }
            let (c2, s2) = (c * c, s * s);
            let (k_c, e_c) = ellip_ke(c2, s2);
            let (k_s, e_s) = ellip_ke(s2, c2);
            // sgn u = −sgn cos θ
            let re = 2.0 * g2 / p.j + pref * c.signum() * (e_c - (1.0 + c) * k_c);
            let im = -pref * (c * k_s + e_s);
            Complex64::new(re, im)
        }
    }
}

/// Closed-form Σ for `d ∈ {1, 2}`.
pub fn sigma_ret(p: &ModelParams, eps: f64) -> Result<Complex64> {
    match p.d {
        1 => sigma_1d(p, eps),
        2 => sigma_2d(p, eps),
        d => Err(Error::Unsupported { d, why: "no closed-form self-energy; use sigma_numeric" }),
    }
}

/// `Re Σ` outside the closed band, without guards: `−∞` at the lower edge
/// of the chain and square lattice, the finite limit at the upper edge.
pub(crate) fn re_sigma_outside(p: &ModelParams, eps: f64) -> f64 {
    let u = eps - p.h_tilde();
    match p.d {
        1 => sigma_1d_unguarded(p, u).re,
        _ => sigma_2d_unguarded(p, u).re,
    }
}

/// `(1/π) ∫₀^π 2(1 + cos k)/(w + a cos k) dk` for `Im w > 0`.
fn axis_kernel(w: Complex64, a: f64) -> Complex64 {
    let root = (w - a).sqrt() * (w + a).sqrt();
    let r = root.inv();
    // (1 − wR)/a = −aR/(root + w)
    r * 2.0 * (1.0 - a / (root + w))
}

/// Σ(ε + iν) by adaptive Brillouin-zone quadrature of
/// `coupling_sq(k) / (ε − Ω_k + iν)`, for any dimension.
///
/// The last axis is integrated in closed form; the remaining `d − 1` axes are
/// nested adaptive Gauss–Kronrod with breakpoints at the resonances.
pub fn sigma_numeric(p: &ModelParams, eps: f64, nu: f64) -> Result<Complex64> {
    p.validate()?;
    check_eps(eps)?;
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("broadening must be positive, got {nu}")));
    }
    let a = p.axis_scale();
    let z = Complex64::new(eps, nu);
    let w0 = z - p.h_tilde();
    let tol = Tol::new(1e-300, 1e-11);
    let out = match p.d {
        1 => {
            let f = |k: f64| {
                let c = k.cos();
                weight_from_cos(p, &[c]) / (w0 + a * c)
            };
            let mut pts = vec![0.0, PI];
            let x = -w0.re / a;
            if x.abs() < 1.0 {
                pts.insert(1, x.acos());
            }
            adaptive(f, &pts, tol).value * FRAC_1_PI
        }
        2 => {
            let f = |k: f64| {
                let c = k.cos();
                weight_from_cos(p, &[c]) * axis_kernel(w0 + a * c, a)
            };
            adaptive(f, &edge_points(-w0.re / a, 0.0), tol).value * FRAC_1_PI
        }
        _ => {
            let outer = |k1: f64| {
                let c1 = k1.cos();
                let shift = w0 + a * c1;
                let inner = |k2: f64| {
                    let c2 = k2.cos();
                    weight_from_cos(p, &[c1, c2]) * axis_kernel(shift + a * c2, a)
                };
                adaptive(inner, &edge_points(-shift.re / a, 0.0), Tol::new(1e-300, 1e-12)).value * FRAC_1_PI
            };
            adaptive(outer, &edge_points(-w0.re / a, 1.0), Tol::new(1e-300, 1e-10)).value * FRAC_1_PI
        }
    };
    Ok(out)
}

/// Breakpoints on [0, π] where `x − cos k = ±1` (inner axis edges), and for
/// `spread > 0` also where the remaining axes can first reach them.
fn edge_points(x: f64, spread: f64) -> Vec<f64> {
    let mut pts = vec![0.0, PI];
    for shift in [-1.0 - spread, -1.0, -1.0 + spread, 1.0 - spread, 1.0, 1.0 + spread] {
        let c = x + shift;
        if c.abs() < 1.0 {
            pts.push(c.acos());
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
