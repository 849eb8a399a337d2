//! Gauss–Kronrod (10, 21) quadrature: single panels, global adaptive
//! refinement, and fixed node sets over precomputed panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Abscissae of the 21-point Kronrod rule on [−1, 1], descending; odd
/// indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_111_675,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Integrand values the rules can accumulate.
pub(crate) trait Value: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    const ZERO: Self;
    fn magnitude(&self) -> f64;
}

impl Value for f64 {
    const ZERO: Self = 0.0;
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Value for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Two complex values integrated together, e.g. φ and φ̇.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Pair(pub Complex64, pub Complex64);

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Pair {
    type Output = Pair;
    fn sub(self, o: Pair) -> Pair {
        Pair(self.0 - o.0, self.1 - o.1)
    }
}

impl Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, s: f64) -> Pair {
        Pair(self.0 * s, self.1 * s)
    }
}

impl Value for Pair {
    const ZERO: Self = Pair(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    fn magnitude(&self) -> f64 {
        self.0.norm().max(self.1.norm())
    }
}

/// A fixed number of real integrands sharing one set of nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Real<const N: usize>(pub [f64; N]);

impl<const N: usize> Add for Real<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.0.iter_mut().zip(o.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl<const N: usize> Sub for Real<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self.0.iter_mut().zip(o.0).for_each(|(a, b)| *a -= b);
        self
    }
}

impl<const N: usize> Mul<f64> for Real<N> {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        self.0.iter_mut().for_each(|a| *a *= s);
        self
    }
}

impl<const N: usize> Value for Real<N> {
    const ZERO: Self = Real([0.0; N]);
    fn magnitude(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// K21 estimate on [a, b] and |K21 − G10| as the error.
pub(crate) fn gk21<V: Value>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[10];
    let mut resg = V::ZERO;
    for j in 0..10 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        resk = resk + pair * WGK[j];
        if j % 2 == 1 {
            resg = resg + pair * WG[j / 2];
        }
    }
    let err = (resk - resg).magnitude() * h.abs();
    (resk * h, err)
}

/// The 21 Kronrod nodes and weights mapped onto [a, b].
pub(crate) fn kronrod_nodes(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (0..21).map(move |i| match i.cmp(&10) {
        Ordering::Less => (c - h * XGK[i], h * WGK[i]),
        Ordering::Equal => (c, h * WGK[10]),
        Ordering::Greater => (c + h * XGK[20 - i], h * WGK[20 - i]),
    })
}

#[derive(Debug, Clone, Copy)]
struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Outcome of [`adaptive`].
#[derive(Debug, Clone)]
pub(crate) struct Estimate<V> {
    pub value: V,
    pub error: f64,
    pub converged: bool,
    /// Final panels in ascending order.
    pub panels: Vec<[f64; 2]>,
}

/// Tolerances for [`adaptive`]. Convergence when the summed error is at
/// most `max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Tol {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tol { abs, rel, max_panels: 20_000 }
    }
}

/// Globally adaptive GK21 over the sorted `points` (at least two), which
/// act as forced breakpoints.
pub(crate) fn adaptive<V: Value>(mut f: impl FnMut(f64) -> V, points: &[f64], tol: Tol) -> Estimate<V> {
    debug_assert!(points.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel<V>> = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk21(&mut f, w[0], w[1]);
            heap.push(Panel { a: w[0], b: w[1], value, err });
        }
    }
    let total = |heap: &BinaryHeap<Panel<V>>, done: &[Panel<V>]| {
        let mut v = V::ZERO;
        let mut e = 0.0;
        for p in heap.iter().chain(done.iter()) {
            v = v + p.value;
            e += p.err;
        }
        (v, e)
    };
    let (mut value, mut error) = total(&heap, &done);
    let mut converged = true;
    let mut iter = 0usize;
    while error > tol.abs.max(tol.rel * value.magnitude()) {
        let Some(worst) = heap.pop() else { break };
        if heap.len() + done.len() >= tol.max_panels {
            heap.push(worst);
            converged = false;
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-15 * (worst.a.abs() + worst.b.abs()) {
            done.push(worst);
            if heap.is_empty() {
                converged = false;
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        value = value + (v1 + v2 - worst.value);
        error += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
        iter += 1;
        if iter % 64 == 0 {
            (value, error) = total(&heap, &done);
        }
    }
    let (value, err_sum) = total(&heap, &done);
    let mut panels: Vec<[f64; 2]> = heap.iter().chain(done.iter()).map(|p| [p.a, p.b]).collect();
    panels.sort_by(|x, y| x[0].total_cmp(&y[0]));
    let converged = converged && err_sum <= tol.abs.max(tol.rel * value.magnitude()) * 1.000_001;
    Estimate { value, error: err_sum, converged, panels }
}

/// Splits every panel so none is wider than `max_width`.
pub(crate) fn refine_panels(panels: &[[f64; 2]], max_width: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(panels.len());
    for &[a, b] in panels {
        let n = ((b - a) / max_width).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for i in 0..n {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == n { b } else { lo + h };
            out.push([lo, hi]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gauss_only(f: impl Fn(f64) -> f64) -> f64 {
        let mut s = 0.0;
        for j in 0..5 {
            let x = XGK[2 * j + 1];
            s += WG[j] * (f(x) + f(-x));
        }
        s
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert_relative_eq!(k, 2.0, epsilon = 1e-15);
        assert_relative_eq!(g, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        // K21 is exact through degree 31, G10 through degree 19.
        for n in 0..=31u32 {
            let exact = if n % 2 == 1 { 0.0 } else { 2.0 / (n as f64 + 1.0) };
            let (k, _) = gk21(&mut |x: f64| x.powi(n as i32), -1.0, 1.0);
            assert!((k - exact).abs() < 1e-14, "K21 degree {n}");
            if n <= 19 {
                assert!((gauss_only(|x| x.powi(n as i32)) - exact).abs() < 1e-14, "G10 degree {n}");
            }
        }
        let g20 = gauss_only(|x| x.powi(20));
        assert!((g20 - 2.0 / 21.0).abs() > 1e-8);
    }

    #[test]
    fn kronrod_nodes_match_gk21() {
        let f = |x: f64| (3.0 * x).sin() + x * x;
        let (k, _) = gk21(&mut |x| f(x), 0.3, 2.1);
        let s: f64 = kronrod_nodes(0.3, 2.1).map(|(x, w)| w * f(x)).sum();
        assert_relative_eq!(k, s, epsilon = 1e-15);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let est = adaptive(|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], Tol::new(1e-12, 1e-12));
        assert!(est.converged);
        assert_relative_eq!(est.value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn adaptive_resolves_narrow_peak() {
        let eps = 1e-5;
        let est = adaptive(
            |x: f64| eps / (x * x + eps * eps),
            &[-1.0, 0.3, 1.0],
            Tol::new(1e-12, 1e-12),
        );
        assert_relative_eq!(est.value, 2.0 * (1.0 / eps).atan(), epsilon = 1e-10);
    }

    #[test]
    fn complex_oscillatory() {
        let t = 50.0;
        let est = adaptive(
            |x: f64| Complex64::new(0.0, -t * x).exp(),
            &[0.0, 1.0],
            Tol::new(1e-13, 1e-13),
        );
        let exact = (Complex64::new(0.0, -t).exp() - 1.0) / Complex64::new(0.0, -t);
        assert!((est.value - exact).norm() < 1e-12);
    }

    #[test]
    fn refine_keeps_cover() {
        let p = refine_panels(&[[0.0, 1.0], [1.0, 1.05]], 0.3);
        assert_eq!(p.len(), 5);
        assert_eq!(p[0][0], 0.0);
        assert_eq!(p.last().unwrap()[1], 1.05);
        for w in p.windows(2) {
            assert_eq!(w[0][1], w[1][0]);
        }
    }
}
