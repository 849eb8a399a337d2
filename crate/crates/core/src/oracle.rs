//! Finite-lattice ground truth: the single-excitation Hamiltonian of an
//! `N^d`-site lattice is an arrowhead matrix
//!
//! ```text
//! [ ω₀   g₁   g₂  … ]
//! [ g₁   Ω₁   0   … ]
//! [ g₂   0    Ω₂  … ]
//! ```
//!
//! with `g_k² = N·|g_k|²/N^d`. Its eigenpairs give `φ_N(t) = Σ_j |⟨e|v_j⟩|² e^{−iλ_j t}`.
//! Small matrices are diagonalised densely; larger ones through the secular
//! equation `λ − ω₀ − Σ_i C_i/(λ − p_i) = 0` after merging degenerate modes,
//! with overlap `|⟨e|v⟩|² = 1/f′(λ)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{omega_from_cos, weight_from_cos, ModelParams};

/// Largest matrix dimension diagonalised densely.
pub const DENSE_LIMIT: usize = 512;

/// Lattice size for the oracle: `n_modes` points per axis on the periodic
/// mesh `k_j = −π + 2πj/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleSpec {
    pub n_modes: usize,
}

impl OracleSpec {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParams("oracle needs at least one mode per axis".into()));
        }
        Ok(OracleSpec { n_modes })
    }

    pub fn k_grid(&self) -> Vec<f64> {
        let n = self.n_modes as f64;
        (0..self.n_modes).map(|j| -PI + 2.0 * PI * j as f64 / n).collect()
    }

    fn total_modes(&self, d: usize) -> Result<usize> {
        u32::try_from(d)
            .ok()
            .and_then(|d| self.n_modes.checked_pow(d))
            .ok_or_else(|| Error::InvalidParams(format!("{}^{d} modes overflow", self.n_modes)))
    }
}

/// Arrowhead Hamiltonian: `(0,0) = ω₀`, `(j,j) = Ω_j`, `(0,j) = (j,0) = g_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrowheadMatrix {
    pub omega0: f64,
    pub diag: Vec<f64>,
    pub border: Vec<f64>,
}

impl ArrowheadMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len() + 1
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = self.omega0;
        for (j, (&w, &g)) in self.diag.iter().zip(&self.border).enumerate() {
            m[(j + 1, j + 1)] = w;
            m[(0, j + 1)] = g;
            m[(j + 1, 0)] = g;
        }
        m
    }
}

pub fn build_hamiltonian(p: &ModelParams, spec: &OracleSpec) -> Result<ArrowheadMatrix> {
    p.validate()?;
    let total = spec.total_modes(p.d)?;
    let cos: Vec<f64> = spec.k_grid().iter().map(|k| k.cos()).collect();
    let mut diag = Vec::with_capacity(total);
    let mut border = Vec::with_capacity(total);
    let mut idx = vec![0usize; p.d];
    let mut c = vec![0.0; p.d];
    for _ in 0..total {
        for (ci, &i) in c.iter_mut().zip(&idx) {
            *ci = cos[i];
        }
        diag.push(omega_from_cos(p, c.iter().sum()));
        border.push((weight_from_cos(p, &c) / total as f64).sqrt());
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < spec.n_modes {
                break;
            }
            *slot = 0;
        }
    }
    Ok(ArrowheadMatrix { omega0: p.omega0, diag, border })
}

/// Eigenvalues with their impurity overlaps `|⟨e|v⟩|²`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpectrum {
    pub energies: Vec<f64>,
    pub overlaps: Vec<f64>,
}

impl OracleSpectrum {
    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.overlaps)
            .map(|(&e, &w)| Complex64::from_polar(w, -e * t))
            .sum()
    }
}

pub fn eigen(h: &ArrowheadMatrix) -> Result<OracleSpectrum> {
    if h.dim() <= DENSE_LIMIT {
        Ok(dense_eigen(h))
    } else {
        secular_eigen(h)
    }
}

fn dense_eigen(h: &ArrowheadMatrix) -> OracleSpectrum {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut pairs: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, &e)| (e, eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (energies, overlaps) = pairs.into_iter().unzip();
    OracleSpectrum { energies, overlaps }
}

/// Pole `p` with total weight `c` and `extra` zero-overlap eigenvalues.
struct Pole {
    p: f64,
    c: f64,
    extra: usize,
}

fn merge_poles(h: &ArrowheadMatrix) -> (Vec<Pole>, Vec<f64>) {
    let mut modes: Vec<(f64, f64)> = h.diag.iter().zip(&h.border).map(|(&w, &g)| (w, g * g)).collect();
    modes.sort_by(|x, y| x.0.total_cmp(&y.0));
    let scale = modes.iter().fold(h.omega0.abs(), |m, x| m.max(x.0.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;
    let mut poles: Vec<Pole> = Vec::new();
    let mut decoupled = Vec::new();
    let mut i = 0;
    while i < modes.len() {
        let start = modes[i].0;
        let (mut c, mut moment, mut count) = (0.0, 0.0, 0usize);
        while i < modes.len() && modes[i].0 - start <= tol {
            c += modes[i].1;
            moment += modes[i].1 * modes[i].0;
            count += 1;
            i += 1;
        }
        if c > 0.0 {
            poles.push(Pole { p: moment / c, c, extra: count - 1 });
        } else {
            decoupled.extend(std::iter::repeat(start).take(count));
        }
    }
    (poles, decoupled)
}

/// Secular function and its derivative at `origin + mu`, with every
/// denominator formed from exact pole differences.
fn secular(poles: &[Pole], omega0: f64, origin: usize, mu: f64) -> (f64, f64) {
    let base = poles[origin].p;
    let mut f = base - omega0 + mu;
    let mut df = 1.0;
    for q in poles {
        let den = (base - q.p) + mu;
        let r = q.c / den;
        f -= r;
        df += r / den;
    }
    (f, df)
}

/// Root of the increasing secular function on `(lo, hi)` in offsets from
/// pole `origin`: safeguarded Newton with bisection.
fn solve_offset(poles: &[Pole], omega0: f64, origin: usize, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = secular(poles, omega0, origin, mu);
        if f == 0.0 {
            return (mu, df);
        }
        if f > 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
        let newton = mu - f / df;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - mu).abs() <= 2.0 * f64::EPSILON * mu.abs().max(f64::MIN_POSITIVE) || next == lo || next == hi {
            let (_, df) = secular(poles, omega0, origin, next);
            return (next, df);
        }
        mu = next;
    }
    let (_, df) = secular(poles, omega0, origin, mu);
    (mu, df)
}

fn secular_eigen(h: &ArrowheadMatrix) -> Result<OracleSpectrum> {
    let (poles, decoupled) = merge_poles(h);
    let omega0 = h.omega0;
    let mut pairs: Vec<(f64, f64)> = decoupled.iter().map(|&e| (e, 0.0)).collect();
    for q in &poles {
        pairs.extend(std::iter::repeat((q.p, 0.0)).take(q.extra));
    }
    if poles.is_empty() {
        pairs.push((omega0, 1.0));
    } else {
        let total_c: f64 = poles.iter().map(|q| q.c).sum();
        let m = poles.len();
        let roots: Vec<(f64, f64)> = (0..=m)
            .into_par_iter()
            .map(|k| {
                if k == 0 {
                    // Below the lowest pole: offsets from it are negative.
                    let mut lo = -(total_c.sqrt() + (poles[0].p - omega0).max(0.0) + 1.0);
                    while secular(&poles, omega0, 0, lo).0 > 0.0 {
                        lo *= 2.0;
                    }
                    let (mu, df) = solve_offset(&poles, omega0, 0, lo, 0.0);
                    (poles[0].p + mu, 1.0 / df)
                } else if k == m {
                    let mut hi = total_c.sqrt() + (omega0 - poles[m - 1].p).max(0.0) + 1.0;
                    while secular(&poles, omega0, m - 1, hi).0 < 0.0 {
                        hi *= 2.0;
                    }
                    let (mu, df) = solve_offset(&poles, omega0, m - 1, 0.0, hi);
                    (poles[m - 1].p + mu, 1.0 / df)
                } else {
                    // Work from whichever pole is closer to the root.
                    let gap = poles[k].p - poles[k - 1].p;
                    let (f_mid, _) = secular(&poles, omega0, k - 1, 0.5 * gap);
                    let (origin, lo, hi) = if f_mid >= 0.0 { (k - 1, 0.0, 0.5 * gap) } else { (k, -0.5 * gap, 0.0) };
                    let (mu, df) = solve_offset(&poles, omega0, origin, lo, hi);
                    (poles[origin].p + mu, 1.0 / df)
                }
            })
            .collect();
        pairs.extend(roots);
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    if pairs.len() != h.dim() {
        return Err(Error::NoConvergence(format!("secular solve found {} of {} eigenvalues", pairs.len(), h.dim())));
    }
    let (energies, overlaps) = pairs.into_iter().unzip();
    Ok(OracleSpectrum { energies, overlaps })
}

/// Spectrum of the finite lattice, built once and reused for every time.
#[derive(Debug, Clone)]
pub struct FiniteLattice {
    pub spec: OracleSpec,
    pub spectrum: OracleSpectrum,
}

impl FiniteLattice {
    pub fn new(p: &ModelParams, spec: &OracleSpec) -> Result<Self> {
        let h = build_hamiltonian(p, spec)?;
        Ok(FiniteLattice { spec: *spec, spectrum: eigen(&h)? })
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.spectrum.amplitude(t)
    }

    pub fn amplitudes(&self, times: &[f64]) -> Vec<Complex64> {
        times.par_iter().map(|&t| self.amplitude(t)).collect()
    }
}

/// `φ_N(t) = ⟨e| e^{−iHt} |e⟩`.
pub fn amplitude_finite(p: &ModelParams, spec: &OracleSpec, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and ≥ 0, got {t}")));
    }
    Ok(FiniteLattice::new(p, spec)?.amplitude(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spectrum_bounds;
    use crate::spectral::find_bound_states;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn two_level_avoided_crossing() {
        for n in [1usize, 2] {
            let p = ModelParams::chain(0.3, 2.0, 0.8);
            let h = build_hamiltonian(&p, &OracleSpec::new(n).unwrap()).unwrap();
            let s = dense_eigen(&h);
            if n == 1 {
                let (w, g) = (h.diag[0], h.border[0]);
                let mid = 0.5 * (p.omega0 + w);
                let half = 0.5 * ((p.omega0 - w).powi(2) + 4.0 * g * g).sqrt();
                assert_relative_eq!(s.energies[0], mid - half, epsilon = 1e-12);
                assert_relative_eq!(s.energies[1], mid + half, epsilon = 1e-12);
            }
            assert_relative_eq!(s.overlaps.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn structure_of_the_matrix() {
        let p = ModelParams::new(2, 0.7, 1.5, 1.2, 0.4, 3.0, 0.6).unwrap();
        let h = build_hamiltonian(&p, &OracleSpec::new(6).unwrap()).unwrap();
        assert_eq!(h.dim(), 37);
        let m = h.to_dense();
        assert_eq!(m, m.transpose());
        for i in 1..37 {
            for j in 1..37 {
                if i != j {
                    assert_eq!(m[(i, j)], 0.0);
                }
            }
        }
        // Σ g_k² is the mesh average of the mode weight, exact for this mesh.
        let total: f64 = h.border.iter().map(|g| g * g).sum();
        assert_relative_eq!(total, p.mean_coupling_sq(), max_relative = 1e-13);
        let decoupled = build_hamiltonian(&p.with_g(0.0), &OracleSpec::new(6).unwrap()).unwrap();
        assert!(decoupled.border.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn decoupled_level_precesses_freely() {
        for n in [8usize, 600] {
            let p = ModelParams::chain(0.3, 2.0, 0.0);
            let lattice = FiniteLattice::new(&p, &OracleSpec::new(n).unwrap()).unwrap();
            for &t in &[0.0, 1.0, 17.0] {
                let phi = lattice.amplitude(t);
                assert!((phi - Complex64::from_polar(1.0, -2.0 * t)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn secular_path_matches_dense_diagonalisation() {
        for p in [ModelParams::chain(0.3, 2.0, 0.8), ModelParams::chain(2.0, 12.0, 1.5), ModelParams::new(2, 1.0, 1.0, 1.0, 0.5, 5.0, 1.0).unwrap()] {
            let n = if p.d == 1 { 300 } else { 16 };
            let h = build_hamiltonian(&p, &OracleSpec::new(n).unwrap()).unwrap();
            let dense = dense_eigen(&h);
            let sec = secular_eigen(&h).unwrap();
            for (a, b) in dense.energies.iter().zip(&sec.energies) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
            for &t in &[0.5, 4.0, 11.0] {
                assert!((dense.amplitude(t) - sec.amplitude(t)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn overlaps_sum_to_one() {
        for (p, n) in [(ModelParams::chain(0.1, 3.0, 1.0), 4096), (ModelParams::new(2, 1.0, 1.0, 1.0, 2.0, 5.0, 1.0).unwrap(), 64)] {
            let lattice = FiniteLattice::new(&p, &OracleSpec::new(n).unwrap()).unwrap();
            let sum: f64 = lattice.spectrum.overlaps.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "{sum}");
            assert!(lattice.spectrum.overlaps.iter().all(|&w| w >= 0.0));
            for i in 0..50 {
                assert!(lattice.amplitude(0.37 * i as f64).norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn bound_states_emerge_outside_the_band() {
        let spec = OracleSpec::new(4096).unwrap();
        for omega0 in [3.0, 8.0] {
            let p = ModelParams::chain(0.5, omega0, 1.0);
            let b = spectrum_bounds(&p);
            let exact = find_bound_states(&p).unwrap();
            let s = FiniteLattice::new(&p, &spec).unwrap().spectrum;
            let below: Vec<f64> = s.energies.iter().copied().filter(|&e| e < b.omega_min).collect();
            let above: Vec<f64> = s.energies.iter().copied().filter(|&e| e > b.omega_max).collect();
            assert_eq!(below.len(), 1);
            assert_eq!(above.len(), exact.len() - 1);
            assert!((below[0] - exact[0].energy).abs() < 1e-4);
            if let Some(&e) = above.first() {
                assert!((e - exact[1].energy).abs() < 1e-4);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn spectra_are_unitary(h in 0.0f64..5.0, omega0 in 0.1f64..14.0, g in 0.0f64..2.0, n in 2usize..1200) {
            let p = ModelParams::chain(h, omega0, g);
            let s = FiniteLattice::new(&p, &OracleSpec::new(n).unwrap()).unwrap().spectrum;
            prop_assert_eq!(s.energies.len(), n + 1);
            prop_assert!((s.overlaps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
