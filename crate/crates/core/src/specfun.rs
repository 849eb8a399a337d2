//! Bessel functions J₀, J₁ and complete elliptic integrals K, E.
//!
//! Elliptic integrals take the *parameter* `m` (the squared modulus). For
//! `m > 1` they are continued to the lower side of the cut, i.e. the values
//! returned are the limits `K(m − i0)`, `E(m − i0)` on the branch
//! `|z| > 1, Im z < 0`:
//!
//! ```text
//! K(z) = z^{-1/2} [K(1/z) − i K(1 − 1/z)]
//! E(z) = √z E(1/z) − (z − 1)/√z K(1/z) + i [√z E(1 − 1/z) − K(1 − 1/z)/√z]
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type ComplexValue = Complex64;

/// J₀(x) or J₁(x).
pub fn bessel_j(order: u8, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be finite, got {x}")));
    }
    let (j0, j1) = bessel_j01(x);
    match order {
        0 => Ok(j0),
        1 => Ok(j1),
        n => Err(Error::Domain(format!("only orders 0 and 1 are available, got {n}"))),
    }
}

/// (J₀(x), J₁(x)) for finite `x`.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (j0, j1) = if ax < 2.0 {
        bessel_series(ax)
    } else if ax <= 25.0 {
        bessel_miller(ax)
    } else {
        bessel_hankel(ax)
    };
    (j0, if x < 0.0 { -j1 } else { j1 })
}

fn bessel_series(x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 0.5 * x;
    let mut j0 = t0;
    let mut j1 = t1;
    for k in 1..40 {
        let k = k as f64;
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        j0 += t0;
        j1 += t1;
        if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
            break;
        }
    }
    (j0, j1)
}

/// Backward recurrence normalised by J₀ + 2 Σ J_{2k} = 1.
fn bessel_miller(x: f64) -> (f64, f64) {
    let start = 2 * ((x as usize + 40) / 2 + 1);
    let mut next = 0.0; // J_{n+1}
    let mut cur = 1e-30; // J_n
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for n in (1..=start).rev() {
        if n % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = 2.0 * n as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if n == 1 {
            j1 = next;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += cur;
    (cur / norm, j1 / norm)
}

/// Hankel asymptotic expansion, accurate to rounding for x > 25.
fn bessel_hankel(x: f64) -> (f64, f64) {
    let pq = |nu: f64| {
        let mu = 4.0 * nu * nu;
        let mut p = 1.0;
        let mut q = 0.0;
        let mut term = 1.0;
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
            if term.abs() >= last {
                break;
            }
            last = term.abs();
            match k % 4 {
                1 => q += term,
                2 => p -= term,
                3 => q -= term,
                _ => p += term,
            }
            if term.abs() < 1e-17 {
                break;
            }
        }
        (p, q)
    };
    let (s, c) = x.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    // χ₀ = x − π/4, χ₁ = x − 3π/4
    let (s4, c4) = FRAC_PI_4.sin_cos();
    let cos0 = c * c4 + s * s4;
    let sin0 = s * c4 - c * s4;
    let cos1 = -c * c4 + s * s4;
    let sin1 = -(s * c4 + c * s4);
    let (p0, q0) = pq(0.0);
    let (p1, q1) = pq(1.0);
    (amp * (p0 * cos0 - q0 * sin0), amp * (p1 * cos1 - q1 * sin1))
}

/// K(m) and E(m) for `m < 1`, with the complementary parameter `m1 = 1 − m`
/// supplied separately so that `m → 1` keeps full relative accuracy.
pub(crate) fn ellip_ke(m: f64, m1: f64) -> (f64, f64) {
    debug_assert!(m1 > 0.0);
    let mut a = 1.0f64;
    let mut b = m1.sqrt();
    let mut sum = 0.5 * m;
    let mut pow = 0.5;
    // c_{n+1} = c_n² / 4a_{n+1} avoids the rounding floor of (a − b)/2.
    let mut c = 0.5 * (a - b);
    for _ in 0..64 {
        pow *= 2.0;
        sum += pow * c * c;
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        c = c * c / (2.0 * (a + b));
        if c.abs() <= 1e-18 * a {
            break;
        }
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}

/// Complete elliptic integral of the first kind, `K(m)`.
///
/// Real for `m < 1`; for `m > 1` returns the continuation on the `Im z < 0`
/// branch. `m = 1` is the logarithmic singularity.
pub fn elliptic_k(m: f64) -> Result<ComplexValue> {
    if !m.is_finite() {
        return Err(Error::Domain(format!("elliptic parameter must be finite, got {m}")));
    }
    if m == 1.0 {
        return Err(Error::Singularity { at: 1.0, what: "K(m) diverges at m = 1" });
    }
    if m < 1.0 {
        return Ok(Complex64::new(ellip_ke(m, 1.0 - m).0, 0.0));
    }
    let inv = 1.0 / m;
    let (k_inv, _) = ellip_ke(inv, (m - 1.0) / m);
    let (k_comp, _) = ellip_ke((m - 1.0) / m, inv);
    Ok(Complex64::new(k_inv, -k_comp) / m.sqrt())
}

/// Complete elliptic integral of the second kind, `E(m)`, same branch
/// convention as [`elliptic_k`]. `E(1) = 1`.
pub fn elliptic_e(m: f64) -> Result<ComplexValue> {
    if !m.is_finite() {
        return Err(Error::Domain(format!("elliptic parameter must be finite, got {m}")));
    }
    if m == 1.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if m < 1.0 {
        return Ok(Complex64::new(ellip_ke(m, 1.0 - m).1, 0.0));
    }
    let inv = 1.0 / m;
    let comp = (m - 1.0) / m;
    let sq = m.sqrt();
    let (k_inv, e_inv) = ellip_ke(inv, comp);
    let (k_comp, e_comp) = ellip_ke(comp, inv);
    Ok(Complex64::new(
        sq * e_inv - (m - 1.0) / sq * k_inv,
        sq * e_comp - k_comp / sq,
    ))
}
