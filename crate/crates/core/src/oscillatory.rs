//! The one-dimensional oscillatory core: the phases
//! ψ_{k,l}(y) = y^p + (y+k+l)^p − (y+k)^p − (y+l)^p, the integrals
//! I_{k,l}(t) = ∫Δ_{k,l}φ₊(y)e^{itψ_{k,l}(y)}dy and
//! I(t) = ∫∫|I_{k,l}(t)|²dkdl, their decay in t, and the lacunary
//! multiplier bounds.
//!
//! Here Δ_{k,l}φ₊(y) = φ₊(y)φ₊(y+k)φ₊(y+l)φ₊(y+k+l) with φ₊ the spline
//! bump supported on [0.25, 2.5]. Since φ₊ is real,
//! I_{k,−l} = conj I_{k,l}, I_{−k,−l} = I_{k,l} and I_{k,l} = I_{l,k}, so
//! |I_{k,l}|² has the symmetry group of the square and I(t) is eight times
//! the integral over the triangle 0 ≤ l ≤ k, k + l ≤ 2.25.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cutoff::SplineBump;
use crate::error::{invalid, Error, Result};
use crate::export::CsvTable;
use crate::lp_geometry::LpExponent;
use crate::mollifier::CancelledKernel;
use crate::quadrature::{self, gl, Tolerance};
use crate::sets::LacunarySequence;

/// ψ_{k,l} for one exponent and pair of shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFamily {
    pub p: LpExponent,
    pub k: f64,
    pub l: f64,
    pub cutoff: SplineBump,
}

impl PhaseFamily {
    pub fn new(p: LpExponent, k: f64, l: f64) -> Self {
        Self {
            p,
            k,
            l,
            cutoff: SplineBump::positive(),
        }
    }

    fn shifts(&self) -> [f64; 4] {
        [0.0, self.k, self.l, self.k + self.l]
    }

    /// The interval where all four shifted points lie in the support of φ₊;
    /// `None` when it is empty.
    pub fn admissible_interval(&self) -> Option<(f64, f64)> {
        let s = self.shifts();
        let lo = self.cutoff.a - s.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.cutoff.b - s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi > lo).then_some((lo, hi))
    }

    pub fn is_admissible(&self, y: f64) -> bool {
        self.admissible_interval().is_some_and(|(lo, hi)| y >= lo && y <= hi)
    }

    #[inline]
    fn value_unchecked(&self, y: f64) -> f64 {
        let p = self.p.value();
        let (k, l) = (self.k, self.l);
        y.powf(p) + (y + k + l).powf(p) - (y + k).powf(p) - (y + l).powf(p)
    }

    #[inline]
    fn derivative_unchecked(&self, y: f64) -> f64 {
        let p = self.p.value();
        let q = p - 1.0;
        let (k, l) = (self.k, self.l);
        p * (y.powf(q) + (y + k + l).powf(q) - (y + k).powf(q) - (y + l).powf(q))
    }

    /// Δ_{k,l}φ₊(y).
    #[inline]
    pub fn amplitude(&self, y: f64) -> f64 {
        let phi = &self.cutoff;
        phi.eval(y) * phi.eval(y + self.k) * phi.eval(y + self.l) * phi.eval(y + self.k + self.l)
    }
}

/// (ψ_{k,l}(y), ψ′_{k,l}(y)) by the direct formulas.
pub fn phase_eval(fam: &PhaseFamily, y: f64) -> Result<(f64, f64)> {
    if !fam.is_admissible(y) {
        return Err(Error::Inadmissible(format!(
            "y = {y} with shifts k = {}, l = {} leaves the cutoff support",
            fam.k, fam.l
        )));
    }
    Ok((fam.value_unchecked(y), fam.derivative_unchecked(y)))
}

/// (ψ, ψ′) from the Taylor-remainder forms
/// ψ = klp(p−1)∫∫(y+uk+sl)^{p−2}duds and
/// ψ′ = klp(p−1)(p−2)∫∫(y+uk+sl)^{p−3}duds, by a 16×16 Gauss rule.
pub fn phase_eval_taylor(fam: &PhaseFamily, y: f64) -> Result<(f64, f64)> {
    if !fam.is_admissible(y) {
        return Err(Error::Inadmissible(format!("y = {y} outside the admissible interval")));
    }
    let p = fam.p.value();
    let rule = gl(16);
    let (mut v, mut dv) = (0.0, 0.0);
    for (xu, wu) in rule.nodes.iter().zip(&rule.weights) {
        let u = 0.5 * (1.0 + xu);
        for (xs, ws) in rule.nodes.iter().zip(&rule.weights) {
            let s = 0.5 * (1.0 + xs);
            let z = y + u * fam.k + s * fam.l;
            let w = 0.25 * wu * ws;
            v += w * z.powf(p - 2.0);
            dv += w * z.powf(p - 3.0);
        }
    }
    let c = fam.k * fam.l * p * (p - 1.0);
    Ok((c * v, c * (p - 2.0) * dv))
}

/// Cap on the number of Gauss panels in one inner integral.
pub const INNER_PANEL_BUDGET: usize = 1 << 18;

/// I_{k,l}(t) with at least eight Gauss nodes per period of tψ′, checked by
/// halving the panel size until two successive values agree to `rel_tol`.
pub fn inner_integral_tol(fam: &PhaseFamily, t: f64, rel_tol: f64) -> Result<Complex64> {
    if t.abs() > 1e6 {
        return Err(invalid("t", "|t| must not exceed 1e6"));
    }
    let Some((lo, hi)) = fam.admissible_interval() else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let knots = fam.cutoff.knots();
    let interior = fam
        .shifts()
        .into_iter()
        .flat_map(|s| knots.into_iter().map(move |kn| kn - s));
    let breaks = quadrature::breakpoints(lo, hi, interior);
    // Panels per piece at the coarse level: two periods of tψ′ per 16-point
    // panel. ψ′ is monotone on the admissible interval, so its extremes
    // sit at piece ends.
    let base: Vec<usize> = breaks
        .windows(2)
        .map(|w| {
            let dmax = fam.derivative_unchecked(w[0]).abs().max(fam.derivative_unchecked(w[1]).abs());
            let periods = (w[1] - w[0]) * t.abs() * dmax / (2.0 * PI);
            ((periods / 2.0).ceil() as usize).max(1)
        })
        .collect();
    let eval = |scale: usize| -> Complex64 {
        let mut it = base.iter();
        quadrature::composite_complex(
            gl(16),
            &breaks,
            |_, _| it.next().copied().unwrap_or(1) * scale,
            |y| {
                let a = fam.amplitude(y);
                if a == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(a, t * fam.value_unchecked(y))
                }
            },
        )
    };
    let total_base: usize = base.iter().sum();
    let floor = 1e-12 * (hi - lo);
    let mut scale = 1;
    let mut prev = eval(scale);
    loop {
        if total_base * scale * 2 > INNER_PANEL_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "inner integral needs more than {INNER_PANEL_BUDGET} panels (k = {}, l = {}, t = {t})",
                fam.k, fam.l
            )));
        }
        scale *= 2;
        let next = eval(scale);
        if (next - prev).norm() <= rel_tol * next.norm().max(floor) || (next - prev).norm() <= floor {
            return Ok(next);
        }
        prev = next;
    }
}

/// I_{k,l}(t) with the default halving tolerance 10⁻¹⁰.
pub fn inner_integral(fam: &PhaseFamily, t: f64) -> Result<Complex64> {
    inner_integral_tol(fam, t, 1e-10)
}

/// Accuracy settings for [`i_of_t`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralBudget {
    /// Relative tolerance of the outer (k) integral; the inner (l) and
    /// oscillatory integrals use tighter multiples of it.
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for IntegralBudget {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_segments: 4000,
        }
    }
}

impl IntegralBudget {
    pub fn halved(self) -> Self {
        Self {
            rel_tol: 0.5 * self.rel_tol,
            ..self
        }
    }
}

/// Width of the support of φ₊, the largest |k| + |l| with Δ_{k,l}φ₊ ≠ 0.
fn support_width() -> f64 {
    let phi = SplineBump::positive();
    phi.b - phi.a
}

/// I(t) = ∫∫|I_{k,l}(t)|²dkdl over the full (k, l) support, computed as
/// eight times the integral over 0 ≤ l ≤ k, k + l ≤ 2.25. The integrand is
/// concentrated where |kl| ≲ 1/|t|, so both directions get geometric
/// breakpoints toward the axes.
pub fn i_of_t(p: LpExponent, t: f64, budget: IntegralBudget) -> Result<f64> {
    let w = support_width();
    let half = 0.5 * w;
    let ta = t.abs();
    let inner_tol = Tolerance {
        abs: 1e-15,
        rel: 0.1 * budget.rel_tol,
        max_segments: budget.max_segments,
    };
    let osc_tol = 1e-3 * budget.rel_tol;
    let mut failure: Option<Error> = None;
    let mut slice = |k: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        let l_max = k.min(w - k);
        if l_max <= 0.0 {
            return 0.0;
        }
        let mut interior = Vec::new();
        if ta > 0.0 && k > 0.0 {
            let mut l = 0.25 / (ta * k);
            while l < l_max {
                interior.push(l);
                l *= 2.0;
            }
        }
        let breaks = quadrature::breakpoints(0.0, l_max, interior);
        let res = quadrature::adaptive(
            |l: f64| match inner_integral_tol(&PhaseFamily::new(p, k, l), t, osc_tol) {
                Ok(z) => z.norm_sqr(),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &breaks,
            inner_tol,
        );
        match res {
            Ok(a) => a.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let mut k_interior = vec![half];
    if ta > 1.0 {
        let mut k = 0.5 / ta.sqrt();
        while k < half {
            k_interior.push(k);
            k *= 2.0;
        }
    }
    let breaks = quadrature::breakpoints(0.0, w, k_interior);
    let outer = quadrature::adaptive(
        &mut slice,
        &breaks,
        Tolerance {
            abs: 1e-14,
            rel: budget.rel_tol,
            max_segments: budget.max_segments,
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(8.0 * outer?.value)
}

/// Log-log decay fit of |I(t)|.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub p: LpExponent,
    pub t_samples: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of log I against log t.
    pub slope: f64,
    pub r_theory: f64,
    /// Envelope constant anchored at the first sample:
    /// c_fit = I(t₀)·t₀^{1/r}.
    pub c_fit: f64,
    /// I(t) ≤ c_fit·t^{−1/r} at every sample.
    pub envelope_holds: bool,
}

impl DecayFit {
    /// Columns t, abs_I, envelope.
    pub fn to_csv(&self) -> CsvTable {
        let mut tab = CsvTable::new(["t", "abs_I", "envelope"]);
        for (t, v) in self.t_samples.iter().zip(&self.values) {
            tab.push(vec![*t, *v, self.c_fit * t.powf(-1.0 / self.r_theory)]);
        }
        tab
    }
}

/// `n` log-spaced samples over [t_lo, t_hi].
pub fn log_spaced(t_lo: f64, t_hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (t_lo.ln(), t_hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

/// Least-squares slope of y on x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn decay_fit_from_values(p: LpExponent, t_samples: Vec<f64>, values: Vec<f64>) -> Result<DecayFit> {
    if t_samples.len() < 6 || t_samples.len() != values.len() {
        return Err(Error::DegenerateFit("need at least six (t, I) samples".into()));
    }
    let lo = t_samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t_samples.iter().copied().fold(0.0, f64::max);
    if hi / lo < 99.999 {
        return Err(Error::DegenerateFit("samples must span two decades".into()));
    }
    if values.iter().all(|v| v.abs() < 1e-12) {
        return Err(Error::DegenerateFit("all values below the 1e-12 noise floor".into()));
    }
    let lx: Vec<f64> = t_samples.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.abs().max(1e-300).ln()).collect();
    let slope = ls_slope(&lx, &ly);
    let r = p.r();
    let c_fit = values[0].abs() * t_samples[0].powf(1.0 / r);
    let envelope_holds = t_samples
        .iter()
        .zip(&values)
        .all(|(t, v)| v.abs() <= c_fit * t.powf(-1.0 / r) * (1.0 + 1e-9));
    Ok(DecayFit {
        p,
        t_samples,
        values,
        slope,
        r_theory: r,
        c_fit,
        envelope_holds,
    })
}

/// Fits the decay of I(t) over `n` log-spaced samples of [t_lo, t_hi].
pub fn decay_fit(p: LpExponent, t_lo: f64, t_hi: f64, n: usize, budget: IntegralBudget) -> Result<DecayFit> {
    if !(t_lo >= 10.0 && t_hi <= 1e5 && t_hi / t_lo >= 100.0 * (1.0 - 1e-12)) {
        return Err(invalid("t_range", "need at least two decades inside [10, 1e5]"));
    }
    let ts = log_spaced(t_lo, t_hi, n);
    let values = ts.iter().map(|t| i_of_t(p, *t, budget)).collect::<Result<Vec<_>>>()?;
    decay_fit_from_values(p, ts, values)
}

/// Minimum of |ψ′_{k,l}| over a grid of the admissible region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryBound {
    pub eta: f64,
    pub min_abs_derivative: f64,
    /// p ∈ {1, 2}: ψ′ vanishes identically.
    pub degenerate: bool,
    pub points: usize,
}

/// Grid search of min |ψ′_{k,l}(y)| over η ≤ |k|, |l| ≤ 1/2 (all sign
/// combinations) and admissible y, on an n_kl × n_kl × n_y grid per sign
/// pattern.
pub fn stationary_lower_bound_check(p: LpExponent, eta: f64, n_kl: usize, n_y: usize) -> Result<StationaryBound> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(invalid("eta", "need 0 < eta < 0.5"));
    }
    let mut min = f64::INFINITY;
    let mut points = 0;
    let grid = |i: usize| eta + (0.5 - eta) * i as f64 / (n_kl - 1).max(1) as f64;
    for sk in [-1.0, 1.0] {
        for sl in [-1.0, 1.0] {
            for i in 0..n_kl {
                for j in 0..n_kl {
                    let fam = PhaseFamily::new(p, sk * grid(i), sl * grid(j));
                    let Some((lo, hi)) = fam.admissible_interval() else { continue };
                    for m in 0..n_y {
                        let y = lo + (hi - lo) * m as f64 / (n_y - 1).max(1) as f64;
                        min = min.min(fam.derivative_unchecked(y).abs());
                        points += 1;
                    }
                }
            }
        }
    }
    if points == 0 {
        return Err(Error::EmptyRegion(format!("no admissible (k, l, y) for eta = {eta}")));
    }
    Ok(StationaryBound {
        eta,
        min_abs_derivative: min,
        degenerate: p.is_degenerate(),
        points,
    })
}

/// Fitted exponent of min|ψ′| against η.
pub fn stationary_exponent(bounds: &[StationaryBound]) -> f64 {
    let x: Vec<f64> = bounds.iter().map(|b| b.eta.ln()).collect();
    let y: Vec<f64> = bounds.iter().map(|b| b.min_abs_derivative.ln()).collect();
    ls_slope(&x, &y)
}

/// The two lacunary sums bounded by 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LacunaryBound {
    /// Σ min(μ_j, 1/μ_j).
    pub min_sum: f64,
    /// Σ μ_j^k(1 + μ_j)^{−k−1}.
    pub weighted_sum: f64,
    pub within_bound: bool,
}

pub fn lacunary_sum_bound(mu: &[f64], k: u32) -> Result<LacunaryBound> {
    if k == 0 {
        return Err(invalid("k", "k must be at least 1"));
    }
    LacunarySequence::new(mu.to_vec())?;
    let min_sum: f64 = mu.iter().map(|m| m.min(1.0 / m)).sum();
    let weighted_sum: f64 = mu.iter().map(|m| m.powi(k as i32) * (1.0 + m).powi(-(k as i32) - 1)).sum();
    Ok(LacunaryBound {
        min_sum,
        weighted_sum,
        within_bound: min_sum <= 4.0 && weighted_sum <= 4.0,
    })
}

/// (η, ζ) = (−ξ₁ + ξ₂ − ξ₃, ξ₁ + 2ξ₃).
pub fn multiplier_arguments(xi: [f64; 3]) -> (f64, f64) {
    (-xi[0] + xi[1] - xi[2], xi[0] + 2.0 * xi[2])
}

/// Euclidean distance from ξ to Γ′ = {ξ₁ − ξ₂ + ξ₃ = 0, ξ₁ + 2ξ₃ = 0}.
pub fn dist_to_gamma_prime(xi: [f64; 3]) -> f64 {
    let a = xi[0] - xi[1] + xi[2];
    let b = xi[0] + 2.0 * xi[2];
    ((5.0 * a * a - 6.0 * a * b + 3.0 * b * b) / 6.0).max(0.0).sqrt()
}

/// m(ξ) = Σ_j k̂_j(η)k̂_j(ζ) with k̂_j(η) = k̂(λ_jη) for the d = 1 kernel
/// `base` at λ = 1.
pub fn multiplier_value(xi: [f64; 3], base: &CancelledKernel, lambdas: &LacunarySequence) -> Result<f64> {
    if base.params.d != 1 {
        return Err(Error::UnsupportedDimension {
            dim: base.params.d,
            reason: "multiplier uses the one-dimensional kernel".into(),
        });
    }
    if lambdas.len() > 12 {
        return Err(invalid("lambdas", "at most 12 scales"));
    }
    let (eta, zeta) = multiplier_arguments(xi);
    let unit = base.at_lambda(1.0)?;
    let mut acc = 0.0;
    for lam in lambdas.values() {
        let a = unit.fourier(&[lam * eta])?;
        if a == 0.0 {
            continue;
        }
        acc += a * unit.fourier(&[lam * zeta])?;
    }
    Ok(acc)
}

/// One multiplier audit sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierSample {
    pub xi: [f64; 3],
    pub abs_m: f64,
    /// Central-difference |∇m| with step dist/100.
    pub grad_norm: f64,
    pub dist: f64,
}

pub fn multiplier_check(xi: [f64; 3], base: &CancelledKernel, lambdas: &LacunarySequence) -> Result<MultiplierSample> {
    let dist = dist_to_gamma_prime(xi);
    if dist < 1e-6 {
        return Err(Error::OnSingularSubspace(dist));
    }
    let m0 = multiplier_value(xi, base, lambdas)?;
    let h = dist / 100.0;
    let mut g2 = 0.0;
    for i in 0..3 {
        let mut plus = xi;
        let mut minus = xi;
        plus[i] += h;
        minus[i] -= h;
        let di = (multiplier_value(plus, base, lambdas)? - multiplier_value(minus, base, lambdas)?) / (2.0 * h);
        g2 += di * di;
    }
    Ok(MultiplierSample {
        xi,
        abs_m: m0.abs(),
        grad_norm: g2.sqrt(),
        dist,
    })
}

/// Columns dist, abs_m, grad_m.
pub fn multiplier_csv(samples: &[MultiplierSample]) -> CsvTable {
    let mut t = CsvTable::new(["dist", "abs_m", "grad_m"]);
    for s in samples {
        t.push(vec![s.dist, s.abs_m, s.grad_norm]);
    }
    t
}
