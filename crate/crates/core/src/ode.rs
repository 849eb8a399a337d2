//! Adaptive Dormand–Prince 5(4) integrator for small real systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// 5th-order minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each
/// of the ascending `times` (all ≥ t0). Steps are clipped to land on every
/// output time.
pub(crate) fn dopri5<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    times: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<[f64; N]>> {
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y);
    let mut h = times.last().map_or(1e-3, |&te| ((te - t0).abs() * 1e-3).max(1e-6));
    let mut steps = 0usize;
    for &target in times {
        if target < t {
            return Err(Error::Domain(format!("output times must ascend from {t0}, got {target}")));
        }
        while t < target {
            steps += 1;
            if steps > 5_000_000 {
                return Err(Error::NoConvergence("ODE step budget exhausted".into()));
            }
            let last = h >= target - t;
            let hs = if last { target - t } else { h };
            let mut k = [[0.0; N]; 7];
            k[0] = k0;
            for s in 1..7 {
                let mut ys = y;
                for (i, v) in ys.iter_mut().enumerate() {
                    for (j, kj) in k.iter().enumerate().take(s) {
                        *v += hs * A[s][j] * kj[i];
                    }
                }
                k[s] = f(t + C[s] * hs, &ys);
            }
            let mut ynew = y;
            let mut err = 0.0f64;
            for i in 0..N {
                let mut inc = 0.0;
                let mut e = 0.0;
                for s in 0..6 {
                    inc += A[6][s] * k[s][i];
                }
                for s in 0..7 {
                    e += E[s] * k[s][i];
                }
                ynew[i] = y[i] + hs * inc;
                let sc = atol + rtol * y[i].abs().max(ynew[i].abs());
                err = err.max((hs * e / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::NoConvergence(format!("non-finite ODE state at t = {t}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                y = ynew;
                k0 = k[6];
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 && last {
                h = h.max(hs * fac);
            } else {
                h = hs * fac;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::NoConvergence(format!("ODE step underflow at t = {t}")));
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_consistency() {
        for s in 1..7 {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-14, "row {s}");
        }
        let e: f64 = E.iter().sum();
        assert!(e.abs() < 1e-15);
    }

    #[test]
    fn exponential_and_rotation() {
        let times: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys = dopri5(|_, y: &[f64; 3]| [-0.5 * y[0], -y[2], y[1]], 0.0, [1.0, 1.0, 0.0], &times, 1e-12, 1e-14).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - (-0.5 * t).exp()).abs() < 1e-10);
            assert!((y[1] - t.cos()).abs() < 1e-9);
            assert!((y[2] - t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn time_dependent_rhs_and_repeated_outputs() {
        let ys = dopri5(|t, _y: &[f64; 1]| [t.cos()], 0.0, [0.0], &[0.0, 0.5, 0.5, 3.0], 1e-12, 1e-14).unwrap();
        assert_eq!(ys[0][0], 0.0);
        assert!((ys[1][0] - 0.5f64.sin()).abs() < 1e-12);
        assert_eq!(ys[1], ys[2]);
        assert!((ys[3][0] - 3.0f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn rejects_descending_times() {
        assert!(dopri5(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &[1.0, 0.5], 1e-8, 1e-10).is_err());
    }
}
