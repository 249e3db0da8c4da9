//! One-dimensional quadrature building blocks: Gauss–Legendre and
//! Gauss–Jacobi rules, composite panel sums, and an adaptive
//! Gauss–Kronrod (7/15) integrator for real or complex integrands.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::sum::{ComplexSum, NeumaierSum};

/// A quadrature rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Gauss–Legendre rule with `n` points (Newton iteration on P_n).
    pub fn gauss_legendre(n: usize) -> Rule {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Rule { nodes, weights }
    }

    /// Gauss–Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1],
    /// computed with the Golub–Welsch eigenvalue method.
    pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Rule {
        assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
        let ab = alpha + beta;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let diag = if k == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
            };
            jac[(k, k)] = diag;
            if k + 1 < n {
                let j = kf + 1.0;
                let b2 = if k == 0 {
                    4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
                } else {
                    4.0 * j * (j + alpha) * (j + beta) * (j + ab)
                        / ((2.0 * j + ab).powi(2) * (2.0 * j + ab + 1.0) * (2.0 * j + ab - 1.0))
                };
                jac[(k, k + 1)] = b2.sqrt();
                jac[(k + 1, k)] = b2.sqrt();
            }
        }
        let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
            - ln_gamma(ab + 2.0))
        .exp();
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Applies the rule on [a, b].
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = NeumaierSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        half * acc.value()
    }

    #[inline]
    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = ComplexSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(f(mid + half * x) * *w);
        }
        acc.value() * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = if n == 0 {
        0.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p, dp)
}

/// Cached Gauss–Legendre rules of common sizes.
pub fn gl(n: usize) -> &'static Rule {
    static GL8: OnceLock<Rule> = OnceLock::new();
    static GL16: OnceLock<Rule> = OnceLock::new();
    static GL24: OnceLock<Rule> = OnceLock::new();
    static GL32: OnceLock<Rule> = OnceLock::new();
    match n {
        8 => GL8.get_or_init(|| Rule::gauss_legendre(8)),
        16 => GL16.get_or_init(|| Rule::gauss_legendre(16)),
        24 => GL24.get_or_init(|| Rule::gauss_legendre(24)),
        32 => GL32.get_or_init(|| Rule::gauss_legendre(32)),
        _ => panic!("no cached Gauss-Legendre rule of size {n}"),
    }
}

/// Composite Gauss–Legendre sum over `[breaks[i], breaks[i+1]]`, each piece
/// split into `panels(a, b)` equal panels.
pub fn composite<F, P>(rule: &Rule, breaks: &[f64], mut panels: P, mut f: F) -> f64
where
    F: FnMut(f64) -> f64,
    P: FnMut(f64, f64) -> usize,
{
    let mut acc = NeumaierSum::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let n = panels(a, b).max(1);
        let h = (b - a) / n as f64;
        for i in 0..n {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n { b } else { lo + h };
            acc.add(rule.integrate(lo, hi, &mut f));
        }
    }
    acc.value()
}

/// Complex variant of [`composite`].
pub fn composite_complex<F, P>(rule: &Rule, breaks: &[f64], mut panels: P, mut f: F) -> Complex64
where
    F: FnMut(f64) -> Complex64,
    P: FnMut(f64, f64) -> usize,
{
    let mut acc = ComplexSum::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let n = panels(a, b).max(1);
        let h = (b - a) / n as f64;
        for i in 0..n {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n { b } else { lo + h };
            acc.add(rule.integrate_complex(lo, hi, &mut f));
        }
    }
    acc.value()
}

/// Sorted, deduplicated breakpoints clipped to [lo, hi], always containing
/// both ends.
pub fn breakpoints(lo: f64, hi: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = interior
        .into_iter()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    v
}

/// Values that the adaptive integrator can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const GK_XK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WK[7];
    let mut gauss = fc * GK_WG[3];
    for j in 0..7 {
        let x = h * GK_XK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron = kron + (f1 + f2) * GK_WK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * GK_WG[j / 2];
        }
    }
    let k = kron * h;
    let g = gauss * h;
    (k, (k - g).magnitude())
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive<T> {
    pub value: T,
    pub error: f64,
    pub segments: usize,
}

/// Tolerances for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-11,
            max_segments: 4000,
        }
    }
}

/// Globally adaptive Gauss–Kronrod 7/15 integration over a list of
/// breakpoints. Fails when the segment budget runs out before the
/// requested tolerance is met.
pub fn adaptive<T, F>(mut f: F, breaks: &[f64], tol: Tolerance) -> Result<Adaptive<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&mut f, w[0], w[1]);
            heap.push(Segment { a: w[0], b: w[1], value, err });
        }
    }
    loop {
        let (total, err) = totals(&heap);
        let target = tol.abs.max(tol.rel * total.magnitude());
        if err <= target {
            return Ok(Adaptive { value: total, error: err, segments: heap.len() });
        }
        if heap.len() >= tol.max_segments {
            return Err(Error::QuadratureNonConvergence(format!(
                "{} segments, error estimate {err:e} above target {target:e}",
                heap.len()
            )));
        }
        let Some(worst) = heap.pop() else {
            return Ok(Adaptive { value: T::zero(), error: 0.0, segments: 0 });
        };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(Error::QuadratureNonConvergence(format!(
                "interval [{}, {}] exhausted precision",
                worst.a, worst.b
            )));
        }
        let (v1, e1) = gk15(&mut f, worst.a, m);
        let (v2, e2) = gk15(&mut f, m, worst.b);
        heap.push(Segment { a: worst.a, b: m, value: v1, err: e1 });
        heap.push(Segment { a: m, b: worst.b, value: v2, err: e2 });
    }
}

fn totals<T: QuadValue>(heap: &BinaryHeap<Segment<T>>) -> (T, f64) {
    let mut v = T::zero();
    let mut e = NeumaierSum::new();
    for s in heap.iter() {
        v = v + s.value;
        e.add(s.err);
    }
    (v, e.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let r = Rule::gauss_legendre(8);
        // degree 15 monomial integrates to zero, degree 14 to 2/15
        assert!(r.integrate(-1.0, 1.0, |x| x.powi(15)).abs() < 1e-15);
        assert_relative_eq!(r.integrate(-1.0, 1.0, |x| x.powi(14)), 2.0 / 15.0, max_relative = 1e-13);
        assert_relative_eq!(r.weights.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_rule_matches_beta_integrals() {
        // int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
        let (a, b) = (-1.0 / 3.0, 0.5);
        let r = Rule::gauss_jacobi(12, a, b);
        let exact = (2f64).powf(a + b + 1.0)
            * (ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp();
        assert_relative_eq!(r.weights.iter().sum::<f64>(), exact, max_relative = 1e-12);
        // first moment: E[x] = (b - a) / (a + b + 2)
        let m1: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| x * w).sum();
        assert_relative_eq!(m1 / exact, (b - a) / (a + b + 2.0), max_relative = 1e-12);
    }

    #[test]
    fn jacobi_handles_chebyshev_case() {
        // alpha = beta = -1/2 hits the 0/0 branch of the first recurrence term.
        let r = Rule::gauss_jacobi(6, -0.5, -0.5);
        assert_relative_eq!(r.weights.iter().sum::<f64>(), std::f64::consts::PI, max_relative = 1e-13);
        for (i, x) in r.nodes.iter().enumerate() {
            let cheb = -((2 * i + 1) as f64 * std::f64::consts::PI / 12.0).cos();
            assert!((x - cheb).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let out = adaptive(|x: f64| x.powf(-1.0 / 3.0), &[0.0, 1.0], Tolerance::default()).unwrap();
        assert_relative_eq!(out.value, 1.5, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_complex_oscillatory() {
        let w = 40.0;
        let out = adaptive(|x: f64| Complex64::new(0.0, w * x).exp(), &[0.0, 1.0], Tolerance::default()).unwrap();
        let exact = (Complex64::new(0.0, w).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((out.value - exact).norm() < 1e-11);
    }

    #[test]
    fn adaptive_reports_budget_exhaustion() {
        let tol = Tolerance { abs: 1e-300, rel: 0.0, max_segments: 10 };
        let res = adaptive(|x: f64| (1.0 / x).sin(), &[1e-6, 1.0], tol);
        assert!(matches!(res, Err(Error::QuadratureNonConvergence(_))));
    }
}
