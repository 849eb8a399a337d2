//! Lattice-level data of the spin-wave bath: dispersion, structure factor,
//! impurity-lattice couplings and the continuum edges.
//!
//! Units: ħ = k_B = 1 and the lattice constant is 1, so wavenumbers are
//! dimensionless and live in the first Brillouin zone `[-π, π]^d`.
//! Only hypercubic lattices are modelled (coordination number `2d`), with
//! the impurity sitting at the centre of a unit cell.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Physical parameters of impurity + lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Exchange energy between neighbouring lattice spins.
    pub j: f64,
    /// Lattice spin magnitude (half-integer, ≥ 1/2).
    pub s: f64,
    /// Easy-axis anisotropy, ≥ 1.
    pub gamma_z: f64,
    /// External field strength.
    pub h: f64,
    /// Impurity level spacing.
    pub omega0: f64,
    /// Impurity-lattice coupling (real, ≥ 0).
    pub g: f64,
    /// Lattice dimension, 1, 2 or 3.
    pub d: usize,
}

impl ModelParams {
    pub fn new(d: usize, j: f64, s: f64, gamma_z: f64, h: f64, omega0: f64, g: f64) -> Result<Self> {
        let p = ModelParams { j, s, gamma_z, h, omega0, g, d };
        p.validate()?;
        Ok(p)
    }

    /// Heisenberg chain (`S = 1`, `γ_z = 1`, `J = 1`), the parameter family
    /// used for most reference runs.
    pub fn chain(h: f64, omega0: f64, g: f64) -> Self {
        ModelParams { j: 1.0, s: 1.0, gamma_z: 1.0, h, omega0, g, d: 1 }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !matches!(self.d, 1..=3) {
            return bad(format!("dimension must be 1, 2 or 3, got {}", self.d));
        }
        let finite = [self.j, self.s, self.gamma_z, self.h, self.omega0, self.g];
        if finite.iter().any(|x| !x.is_finite()) {
            return bad("all parameters must be finite".into());
        }
        if self.j <= 0.0 {
            return bad(format!("J must be > 0, got {}", self.j));
        }
        let two_s = 2.0 * self.s;
        if self.s < 0.5 || (two_s - two_s.round()).abs() > 1e-12 {
            return bad(format!("S must be a half-integer ≥ 1/2, got {}", self.s));
        }
        if self.gamma_z < 1.0 {
            return bad(format!("gamma_z must be ≥ 1 (easy axis), got {}", self.gamma_z));
        }
        if self.h < 0.0 {
            return bad(format!("h must be ≥ 0, got {}", self.h));
        }
        if self.omega0 <= 0.0 {
            return bad(format!("omega0 must be > 0, got {}", self.omega0));
        }
        if self.g < 0.0 {
            return bad(format!("g must be ≥ 0, got {}", self.g));
        }
        Ok(())
    }

    /// Coordination number η = 2d.
    pub fn coordination(&self) -> f64 {
        2.0 * self.d as f64
    }

    /// Half-width of the magnon band, 2JηS.
    pub fn half_bandwidth(&self) -> f64 {
        2.0 * self.j * self.coordination() * self.s
    }

    /// Effective field h̃ = h + 2JηSγ_z (band centre).
    pub fn h_tilde(&self) -> f64 {
        self.h + self.half_bandwidth() * self.gamma_z
    }

    /// Per-axis dispersion scale 4JS: Ω_k = h̃ − 4JS Σ_i cos k_i.
    pub(crate) fn axis_scale(&self) -> f64 {
        4.0 * self.j * self.s
    }

    /// Zone average of [`coupling_sq`], 2^{d+1} g² S.
    pub fn mean_coupling_sq(&self) -> f64 {
        2f64.powi(self.d as i32 + 1) * self.g * self.g * self.s
    }

    /// Tolerance used to guard branch points, in energy units.
    pub(crate) fn guard(&self) -> f64 {
        1e-9 * self.j
    }
}

/// Continuum edges and band centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBounds {
    pub omega_min: f64,
    pub omega_max: f64,
    pub h_tilde: f64,
}

impl SpectrumBounds {
    pub fn contains(&self, eps: f64) -> bool {
        eps > self.omega_min && eps < self.omega_max
    }
}

fn check_k(p: &ModelParams, k: &[f64]) -> Result<()> {
    if k.len() != p.d {
        return Err(Error::Domain(format!(
            "wavevector has {} components, lattice dimension is {}",
            k.len(),
            p.d
        )));
    }
    if let Some(bad) = k.iter().find(|x| !(x.abs() <= PI)) {
        return Err(Error::Domain(format!("wavevector component {bad} outside [-π, π]")));
    }
    Ok(())
}

/// τ_k = (1/η) Σ_δ e^{ik·δ} = (1/d) Σ_i cos k_i.
pub fn structure_factor(p: &ModelParams, k: &[f64]) -> Result<f64> {
    check_k(p, k)?;
    Ok(k.iter().map(|x| x.cos()).sum::<f64>() / p.d as f64)
}

/// Ω_k = h − 2JηS(τ_k − γ_z).
pub fn dispersion(p: &ModelParams, k: &[f64]) -> Result<f64> {
    let tau = structure_factor(p, k)?;
    Ok(p.h - p.half_bandwidth() * (tau - p.gamma_z))
}

/// N·|g_k|² = 2^{2d+1} g² S Π_i cos²(k_i/2), the mode weight entering every
/// continuum integral.
pub fn coupling_sq(p: &ModelParams, k: &[f64]) -> Result<f64> {
    check_k(p, k)?;
    let prod: f64 = k.iter().map(|x| (0.5 * x).cos().powi(2)).product();
    Ok(2f64.powi(2 * p.d as i32 + 1) * p.g * p.g * p.s * prod)
}

pub fn spectrum_bounds(p: &ModelParams) -> SpectrumBounds {
    let w = p.half_bandwidth();
    SpectrumBounds {
        omega_min: p.h + w * (p.gamma_z - 1.0),
        omega_max: p.h + w * (p.gamma_z + 1.0),
        h_tilde: p.h_tilde(),
    }
}

/// Mode energy from the per-axis cosines.
#[inline]
pub(crate) fn omega_from_cos(p: &ModelParams, cos_sum: f64) -> f64 {
    p.h_tilde() - p.axis_scale() * cos_sum
}

/// Mode weight from the per-axis cosines: 2g²S Π_i 2(1 + cos k_i).
#[inline]
pub(crate) fn weight_from_cos(p: &ModelParams, cos: &[f64]) -> f64 {
    2.0 * p.g * p.g * p.s * cos.iter().map(|c| 2.0 * (1.0 + c)).product::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fig1() -> ModelParams {
        ModelParams::new(1, 0.5, 1.0, 1.0, 8.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn structure_factor_examples() {
        let p1 = ModelParams::chain(0.0, 1.0, 1.0);
        assert_eq!(structure_factor(&p1, &[0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(structure_factor(&p1, &[PI]).unwrap(), -1.0, epsilon = 1e-15);
        let p2 = ModelParams { d: 2, ..p1 };
        let half = PI / 2.0;
        let expect = (half.cos() + half.cos()) / 2.0;
        assert_abs_diff_eq!(structure_factor(&p2, &[half, half]).unwrap(), expect, epsilon = 1e-15);
        assert_abs_diff_eq!(expect, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wavevector_outside_zone_is_rejected() {
        let p = ModelParams::chain(0.0, 1.0, 1.0);
        assert!(matches!(structure_factor(&p, &[3.2]), Err(Error::Domain(_))));
        assert!(matches!(dispersion(&p, &[-4.0]), Err(Error::Domain(_))));
        assert!(matches!(coupling_sq(&p, &[0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn dispersion_examples() {
        let p = ModelParams::new(1, 0.7, 1.5, 1.3, 0.4, 1.0, 1.0).unwrap();
        let b = spectrum_bounds(&p);
        assert_abs_diff_eq!(dispersion(&p, &[0.0]).unwrap(), b.omega_min, epsilon = 1e-13);
        assert_abs_diff_eq!(dispersion(&p, &[PI]).unwrap(), b.omega_max, epsilon = 1e-13);
        let q = ModelParams::chain(3.0, 1.0, 1.0);
        assert_abs_diff_eq!(dispersion(&q, &[PI / 2.0]).unwrap(), 7.0, epsilon = 1e-13);
    }

    #[test]
    fn coupling_examples() {
        let p = fig1();
        assert_abs_diff_eq!(coupling_sq(&p, &[0.0]).unwrap(), 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(coupling_sq(&p, &[PI]).unwrap(), 0.0, epsilon = 1e-14);
        let p2 = ModelParams { d: 2, g: 0.3, s: 1.5, ..p };
        assert_abs_diff_eq!(
            coupling_sq(&p2, &[0.0, 0.0]).unwrap(),
            32.0 * 0.09 * 1.5,
            epsilon = 1e-13
        );
    }

    #[test]
    fn spectrum_bounds_examples() {
        let b = spectrum_bounds(&fig1());
        assert_eq!((b.omega_min, b.omega_max, b.h_tilde), (8.0, 12.0, 10.0));
        let p2 = ModelParams::new(2, 0.5, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let b = spectrum_bounds(&p2);
        assert_eq!((b.omega_min, b.omega_max, b.h_tilde), (2.0, 10.0, 6.0));
        let p3 = ModelParams::new(1, 1.0, 1.0, 2.0, 0.0, 1.0, 1.0).unwrap();
        let b = spectrum_bounds(&p3);
        assert_eq!((b.omega_min, b.omega_max, b.h_tilde), (4.0, 12.0, 8.0));
    }

    #[test]
    fn invalid_params() {
        assert!(ModelParams::new(4, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 0.7, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0, 0.9, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0, 1.0, 0.0, 1.0, -0.1).is_err());
        assert!(ModelParams::new(3, 1.0, 2.5, 1.0, 0.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn zone_average_of_coupling() {
        // Tensor-product midpoint rule; the integrand is a trigonometric
        // polynomial so a modest grid is exact.
        for d in 1..=3usize {
            let p = ModelParams { d, ..fig1() };
            let n: usize = 16;
            let nodes: Vec<f64> = (0..n).map(|i| -PI + (i as f64 + 0.5) * 2.0 * PI / n as f64).collect();
            let mut acc = 0.0;
            let mut count = 0usize;
            let total = n.pow(d as u32);
            for idx in 0..total {
                let mut rem = idx;
                let k: Vec<f64> = (0..d)
                    .map(|_| {
                        let i = rem % n;
                        rem /= n;
                        nodes[i]
                    })
                    .collect();
                acc += coupling_sq(&p, &k).unwrap();
                count += 1;
            }
            assert_abs_diff_eq!(acc / count as f64, p.mean_coupling_sq(), epsilon = 1e-6);
        }
    }

    fn arb_params() -> impl Strategy<Value = ModelParams> {
        (1usize..=3, 0.1f64..3.0, 1u32..5, 1.0f64..3.0, 0.0f64..10.0, 0.0f64..2.0).prop_map(
            |(d, j, two_s, gz, h, g)| ModelParams {
                d,
                j,
                s: two_s as f64 / 2.0,
                gamma_z: gz,
                h,
                omega0: 1.0,
                g,
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn dispersion_within_bounds(p in arb_params(), ks in proptest::collection::vec(-PI..PI, 3)) {
            let k = &ks[..p.d];
            let b = spectrum_bounds(&p);
            let w = dispersion(&p, k).unwrap();
            prop_assert!(w >= b.omega_min - 1e-12 && w <= b.omega_max + 1e-12);
            let neg: Vec<f64> = k.iter().map(|x| -x).collect();
            prop_assert_eq!(w, dispersion(&p, &neg).unwrap());
            prop_assert!(coupling_sq(&p, k).unwrap() >= 0.0);
        }

        #[test]
        fn coupling_vanishes_on_zone_boundary(p in arb_params(), ks in proptest::collection::vec(-PI..PI, 3), axis in 0usize..3, sign in proptest::bool::ANY) {
            let mut k = ks[..p.d].to_vec();
            k[axis % p.d] = if sign { PI } else { -PI };
            prop_assert!(coupling_sq(&p, &k).unwrap() < 1e-25 * (1.0 + p.g * p.g));
        }
    }
}
