//! Gowers U² and U³ norms on cyclic grids ℤ_M^d.
//!
//! Counting-measure conventions:
//!
//! ‖F‖_{U²}⁴ = Σ_{x,h₁,h₂} F(x)F̄(x+h₁)F̄(x+h₂)F(x+h₁+h₂),
//! ‖F‖_{U³}⁸ = Σ_{x,y₁,y₂,y₃} Π_ν C^{|ν|}F(x + ν·y),
//!
//! where C is complex conjugation. With the unnormalized DFT
//! F̂(ξ) = Σ_x F(x)e^{−2πix·ξ/M}, ‖F‖_{U²}⁴ = M^{−d}Σ_ξ|F̂(ξ)|⁴, and
//! ‖F‖_{U³}⁸ = Σ_h ‖Δ_hF‖_{U²}⁴.
//!
//! A grid with spacing `cell` samples a continuum function; the continuum
//! norm is approximated by cell^{d/2} times the discrete U³ norm.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::cutoff::SplineBump;
use crate::error::{invalid, Error, Result};
use crate::export::CsvTable;
use crate::forms::BoxFunction;
use crate::lp_geometry::{lp_pow, LpExponent};
use crate::mollifier::{omega_eps_eval, KernelParams, MollifierPair};
use crate::sum::{ComplexSum, NeumaierSum};

/// Largest M^{4d} accepted by the definitional U³ sum.
pub const BRUTE_U3_BUDGET: u64 = 100_000_000;

/// A complex function on ℤ_M^d, stored with the first coordinate varying
/// fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicGridFunction {
    m: usize,
    d: usize,
    pub cell: f64,
    values: Vec<Complex64>,
}

impl CyclicGridFunction {
    pub fn new(m: usize, d: usize, cell: f64, values: Vec<Complex64>) -> Result<Self> {
        if m == 0 || d == 0 {
            return Err(invalid("grid", "M and d must be positive"));
        }
        let len = m.checked_pow(d as u32).ok_or_else(|| invalid("grid", "M^d overflows"))?;
        if values.len() != len {
            return Err(invalid("values", format!("expected {len} values, got {}", values.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("values", "all values must be finite"));
        }
        if !(cell > 0.0 && cell.is_finite()) {
            return Err(invalid("cell", "cell size must be positive"));
        }
        Ok(Self { m, d, cell, values })
    }

    /// Samples `f` at the grid points (i₁·cell, …, i_d·cell).
    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(m: usize, d: usize, cell: f64, mut f: F) -> Result<Self> {
        let len = m.pow(d as u32);
        let mut pos = vec![0.0; d];
        let mut values = Vec::with_capacity(len);
        for idx in 0..len {
            let mut r = idx;
            for c in pos.iter_mut() {
                *c = (r % m) as f64 * cell;
                r /= m;
            }
            values.push(f(&pos));
        }
        Self::new(m, d, cell, values)
    }

    pub fn constant(m: usize, d: usize, c: Complex64) -> Self {
        Self {
            m,
            d,
            cell: 1.0,
            values: vec![c; m.pow(d as u32)],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        (0..self.d)
            .map(|_| {
                let c = idx % self.m;
                idx /= self.m;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[i64]) -> usize {
        let m = self.m as i64;
        coords
            .iter()
            .rev()
            .fold(0usize, |acc, c| acc * self.m + c.rem_euclid(m) as usize)
    }

    /// Flat-index addition table: `table[a * len + b]` is the index of a + b.
    fn addition_table(&self) -> Vec<u32> {
        let len = self.len();
        let mut t = vec![0u32; len * len];
        let ca: Vec<Vec<usize>> = (0..len).map(|i| self.coords(i)).collect();
        for a in 0..len {
            for b in 0..len {
                let s: Vec<i64> = ca[a].iter().zip(&ca[b]).map(|(x, y)| (x + y) as i64).collect();
                t[a * len + b] = self.index(&s) as u32;
            }
        }
        t
    }

    /// F(· + a).
    pub fn translate(&self, a: &[i64]) -> Self {
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            let c: Vec<i64> = self.coords(i).iter().zip(a).map(|(x, s)| *x as i64 + s).collect();
            *v = self.values[self.index(&c)];
        }
        out
    }

    /// e^{2πix·ξ/M}F(x).
    pub fn modulate(&self, xi: &[i64]) -> Self {
        let mut out = self.clone();
        let m = self.m as f64;
        for (i, v) in out.values.iter_mut().enumerate() {
            let dot: i64 = self.coords(i).iter().zip(xi).map(|(x, k)| *x as i64 * k).sum();
            let phase = 2.0 * std::f64::consts::PI * (dot.rem_euclid(self.m as i64)) as f64 / m;
            *v *= Complex64::from_polar(1.0, phase);
        }
        out
    }
}

/// Δ_hF(x) = F(x + h)F̄(x).
pub fn delta_h(f: &CyclicGridFunction, h: &[i64]) -> CyclicGridFunction {
    let shifted = f.translate(h);
    let values = shifted
        .values
        .iter()
        .zip(&f.values)
        .map(|(a, b)| a * b.conj())
        .collect();
    CyclicGridFunction { values, ..f.clone() }
}

fn delta_flat(f: &CyclicGridFunction, h: usize, add: Option<&[u32]>) -> Vec<Complex64> {
    let len = f.len();
    match add {
        Some(t) => (0..len).map(|x| f.values[t[x * len + h] as usize] * f.values[x].conj()).collect(),
        None => {
            let hc: Vec<i64> = f.coords(h).iter().map(|c| *c as i64).collect();
            delta_h(f, &hc).values
        }
    }
}

/// Unnormalized forward DFT on ℤ_M^d, in place.
fn fft_nd(buf: &mut [Complex64], m: usize, d: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let len = buf.len();
    for axis in 0..d {
        let stride = m.pow(axis as u32);
        for base in 0..len {
            if (base / stride) % m != 0 {
                continue;
            }
            for (k, l) in line.iter_mut().enumerate() {
                *l = buf[base + k * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (k, l) in line.iter().enumerate() {
                buf[base + k * stride] = *l;
            }
        }
    }
}

fn planner(m: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(m)
}

fn u2_pow4_spectral_with(values: &[Complex64], m: usize, d: usize, fft: &Arc<dyn Fft<f64>>) -> f64 {
    let mut buf = values.to_vec();
    fft_nd(&mut buf, m, d, fft);
    let s: NeumaierSum = buf.iter().map(|z| z.norm_sqr() * z.norm_sqr()).collect();
    s.value() / (m as f64).powi(d as i32)
}

/// ‖F‖_{U²}⁴ through the DFT fourth moment.
pub fn u2_pow4_spectral(f: &CyclicGridFunction) -> f64 {
    u2_pow4_spectral_with(&f.values, f.m, f.d, &planner(f.m))
}

/// ‖F‖_{U²}⁴ by summing all M^{3d} tuples.
pub fn u2_pow4_brute(f: &CyclicGridFunction) -> Complex64 {
    let len = f.len();
    let add = f.addition_table();
    let v = &f.values;
    let mut acc = ComplexSum::new();
    for x in 0..len {
        for h1 in 0..len {
            let x1 = add[x * len + h1] as usize;
            let a = v[x] * v[x1].conj();
            for h2 in 0..len {
                let x2 = add[x * len + h2] as usize;
                let x12 = add[x1 * len + h2] as usize;
                acc.add(a * v[x2].conj() * v[x12]);
            }
        }
    }
    acc.value()
}

pub fn u2_norm(f: &CyclicGridFunction) -> f64 {
    u2_pow4_spectral(f).max(0.0).powf(0.25)
}

/// How [`u3_pow8`] evaluates the norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum U3Method {
    /// Literal sum over all M^{4d} parallelepipeds.
    Brute,
    /// Σ_h ‖Δ_hF‖_{U²}⁴ with spectral U².
    Recursive,
}

/// ‖F‖_{U³}⁸ by the definition. The cube products are built from
/// P(x, y₁, y₂) = F(x)F̄(x+y₁)F̄(x+y₂)F(x+y₁+y₂), so that each term is
/// P(x, y₁, y₂)·conj P(x+y₃, y₁, y₂).
pub fn u3_pow8_brute(f: &CyclicGridFunction) -> Result<Complex64> {
    let len = f.len();
    let work = (len as u64).saturating_pow(4);
    if work > BRUTE_U3_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "definitional U3 needs M^(4d) = {work} > {BRUTE_U3_BUDGET} terms"
        )));
    }
    let add = f.addition_table();
    let v = &f.values;
    let partials: Vec<Complex64> = (0..len)
        .into_par_iter()
        .map(|y1| {
            let mut acc = ComplexSum::new();
            let mut pcol = vec![Complex64::new(0.0, 0.0); len];
            for y2 in 0..len {
                for (x, slot) in pcol.iter_mut().enumerate() {
                    let x1 = add[x * len + y1] as usize;
                    let x2 = add[x * len + y2] as usize;
                    let x12 = add[x1 * len + y2] as usize;
                    *slot = v[x] * v[x1].conj() * v[x2].conj() * v[x12];
                }
                for x in 0..len {
                    let px = pcol[x];
                    for y3 in 0..len {
                        acc.add(px * pcol[add[x * len + y3] as usize].conj());
                    }
                }
            }
            acc.value()
        })
        .collect();
    let mut acc = ComplexSum::new();
    for p in partials {
        acc.add(p);
    }
    Ok(acc.value())
}

/// ‖Δ_hF‖_{U²}⁴ for every h, in flat index order.
pub fn u2_profile_of_differences(f: &CyclicGridFunction) -> Vec<f64> {
    let fft = planner(f.m);
    let len = f.len();
    let add = if len <= 4096 { Some(f.addition_table()) } else { None };
    (0..len)
        .into_par_iter()
        .map(|h| {
            let dh = delta_flat(f, h, add.as_deref());
            u2_pow4_spectral_with(&dh, f.m, f.d, &fft)
        })
        .collect()
}

/// ‖F‖_{U³}⁸ = Σ_h ‖Δ_hF‖_{U²}⁴.
pub fn u3_pow8_recursive(f: &CyclicGridFunction) -> f64 {
    u2_profile_of_differences(f).into_iter().collect::<NeumaierSum>().value()
}

/// Real part of ‖F‖_{U³}⁸; the brute path also checks that the imaginary
/// part is negligible.
pub fn u3_pow8(f: &CyclicGridFunction, method: U3Method) -> Result<f64> {
    match method {
        U3Method::Recursive => Ok(u3_pow8_recursive(f)),
        U3Method::Brute => {
            let z = u3_pow8_brute(f)?;
            if z.im.abs() > 1e-10 * z.norm().max(1e-300) {
                return Err(Error::QuadratureNonConvergence(format!(
                    "U3 sum has imaginary part {:e} against magnitude {:e}",
                    z.im,
                    z.norm()
                )));
            }
            Ok(z.re)
        }
    }
}

pub fn u3_norm(f: &CyclicGridFunction, method: U3Method) -> Result<f64> {
    Ok(u3_pow8(f, method)?.max(0.0).powf(0.125))
}

/// Continuum approximation cell^{d/2}·‖F‖_{U³}.
pub fn u3_norm_continuum(f: &CyclicGridFunction) -> f64 {
    f.cell.powf(f.d as f64 / 2.0) * u3_pow8_recursive(f).max(0.0).powf(0.125)
}

/// Columns h1..hd, u2_pow4.
pub fn difference_profile_csv(f: &CyclicGridFunction) -> CsvTable {
    let mut header: Vec<String> = (1..=f.d).map(|i| format!("h{i}")).collect();
    header.push("u2_pow4".into());
    let mut t = CsvTable::new(header);
    for (h, v) in u2_profile_of_differences(f).into_iter().enumerate() {
        let mut row: Vec<f64> = f.coords(h).into_iter().map(|c| c as f64).collect();
        row.push(v);
        t.push(row);
    }
    t
}

/// Grid for discretizing kernels: M points per axis at spacing `cell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub m: usize,
    pub cell: f64,
}

impl GridSpec {
    pub fn period(&self) -> f64 {
        self.m as f64 * self.cell
    }
}

/// The Cauchy-limit proxy ‖χ₊(ω_λ^η − ω_λᵉ)‖_{U³}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U3Distance {
    pub eta: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub value: f64,
    pub grid: GridSpec,
    pub d: usize,
}

/// Continuum U³ norm of χ₊(ω_λ^η − ω_λᵉ), discretized on a grid of the
/// positive orthant. Rejects grids with fewer than eight cells across the
/// narrower shell, or whose period is under four support widths.
pub fn u3_kernel_distance(
    eta: f64,
    epsilon: f64,
    p: LpExponent,
    d: usize,
    lambda: f64,
    grid: GridSpec,
    m: &MollifierPair,
) -> Result<U3Distance> {
    if !(1..=2).contains(&d) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "kernel distances are computed for d in {1, 2}".into(),
        });
    }
    let ke = KernelParams::new(p, d, lambda, epsilon)?;
    let kh = KernelParams::new(p, d, lambda, eta)?;
    let pv = p.value();
    let width = lambda * eta.min(epsilon) / pv;
    if grid.cell > width / 8.0 {
        return Err(Error::UnderResolved(format!(
            "cell {} exceeds shell width {width:e} / 8",
            grid.cell
        )));
    }
    let support = ke.support_radius().max(kh.support_radius());
    if grid.period() < 4.0 * support {
        return Err(Error::UnderResolved(format!(
            "period {} below four support widths {}",
            grid.period(),
            4.0 * support
        )));
    }
    let f = CyclicGridFunction::from_fn(grid.m, d, grid.cell, |y| {
        Complex64::new(omega_eps_eval(y, &kh, m) - omega_eps_eval(y, &ke, m), 0.0)
    })?;
    Ok(U3Distance {
        eta,
        epsilon,
        lambda,
        value: if eta == epsilon { 0.0 } else { u3_norm_continuum(&f) },
        grid,
        d,
    })
}

/// Result of the tensorization identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_gap: f64,
    /// |t|·p·3^{p−1}·cell: phase advance per cell relative to the 0.5 limit.
    pub resolution: f64,
    pub resolved: bool,
}

/// Compares ‖Φ₊(y)e^{it‖y‖_p^p}‖_{U³(ℝ^d)} with ‖φ₊(y)e^{ity^p}‖_{U³(ℝ)}^d
/// on matched product grids, Φ₊ = φ₊^{⊗d}. With `strict`, an oscillation
/// that is under-sampled (phase advance per cell above 0.5) is an error;
/// otherwise it is reported in the result.
pub fn u3_tensor_check(p: LpExponent, t: f64, d: usize, m_side: usize, strict: bool) -> Result<TensorCheck> {
    if !(1..=2).contains(&d) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "tensor check runs for d in {1, 2}".into(),
        });
    }
    let phi = SplineBump::positive();
    let pv = p.value();
    // Period 4.5 support widths (support width b − a = 2.25).
    let period = 4.5 * (phi.b - phi.a);
    let cell = period / m_side as f64;
    let resolution = t.abs() * pv * 3f64.powf(pv - 1.0) * cell;
    let resolved = resolution <= 0.5;
    if strict && !resolved {
        return Err(Error::UnderResolved(format!(
            "phase advance {resolution:.3} per cell exceeds 0.5"
        )));
    }
    let sample = |y: &[f64]| -> Complex64 {
        let amp: f64 = y.iter().map(|v| phi.eval(*v)).product();
        if amp == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(amp, t * lp_pow(y, pv))
    };
    let full = CyclicGridFunction::from_fn(m_side, d, cell, sample)?;
    let line = CyclicGridFunction::from_fn(m_side, 1, cell, sample)?;
    let lhs = u3_norm_continuum(&full);
    let rhs = u3_norm_continuum(&line).powi(d as i32);
    Ok(TensorCheck {
        lhs,
        rhs,
        relative_gap: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300),
        resolution,
        resolved,
    })
}

/// Outcome of comparing a trilinear form with its U³ bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormControl {
    pub t: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// T = ∫∫f(x)f(x+y)f(x+2y)g(y)dydx against N^dλ^{d/2}‖g‖_{U³} in d = 1.
/// `g` holds samples g(j·cell), j = 0..g.len(), with cell equal to the grid
/// spacing of `f`; g vanishes elsewhere.
pub fn u3_form_control_check(f: &BoxFunction, g: &[f64], lambda: f64) -> Result<FormControl> {
    if f.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            dim: f.dim(),
            reason: "form control check runs in d = 1".into(),
        });
    }
    let n = f.side();
    let h = f.spacing();
    if n > 256 * 16 {
        return Err(invalid("f", "grid too large for direct summation"));
    }
    let vals = f.values();
    let mut acc = NeumaierSum::new();
    for (j, gj) in g.iter().enumerate() {
        if *gj == 0.0 {
            continue;
        }
        let mut inner = NeumaierSum::new();
        for x in 0..n.saturating_sub(2 * j) {
            inner.add(vals[x] * vals[x + j] * vals[x + 2 * j]);
        }
        acc.add(gj * inner.value());
    }
    let t = acc.value() * h * h;
    if g.iter().all(|v| *v == 0.0) {
        return Ok(FormControl { t, bound: 0.0, ratio: 0.0 });
    }
    // Period at least four times the support of g.
    let m = (4 * g.len()).next_power_of_two().max(16);
    let mut vals_g = vec![Complex64::new(0.0, 0.0); m];
    for (slot, v) in vals_g.iter_mut().zip(g) {
        *slot = Complex64::new(*v, 0.0);
    }
    let gf = CyclicGridFunction::new(m, 1, h, vals_g)?;
    let norm = u3_norm_continuum(&gf);
    let big_n = n as f64 * h;
    let bound = big_n * lambda.sqrt() * norm;
    Ok(FormControl {
        t,
        bound,
        ratio: t.abs() / bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::build_mollifier;
    use crate::rng;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_fn(m: usize, d: usize, seed: u64) -> CyclicGridFunction {
        let mut r = rng::stream(seed, 0);
        CyclicGridFunction::from_fn(m, d, 1.0, |_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).unwrap()
    }

    fn one(m: usize, d: usize) -> CyclicGridFunction {
        CyclicGridFunction::constant(m, d, Complex64::new(1.0, 0.0))
    }

    fn delta0(m: usize, d: usize) -> CyclicGridFunction {
        let mut v = vec![Complex64::new(0.0, 0.0); m.pow(d as u32)];
        v[0] = Complex64::new(1.0, 0.0);
        CyclicGridFunction::new(m, d, 1.0, v).unwrap()
    }

    #[test]
    fn difference_operator_examples() {
        let f = one(8, 1);
        assert!(delta_h(&f, &[3]).values().iter().all(|v| (v - 1.0).norm() < 1e-15));
        let chi = one(8, 1).modulate(&[3]);
        let dh = delta_h(&chi, &[5]);
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 15.0 / 8.0);
        assert!(dh.values().iter().all(|v| (v - expect).norm() < 1e-12));
        let r = random_fn(8, 1, 1);
        assert_eq!(delta_h(&delta_h(&r, &[3]), &[5]), delta_h(&delta_h(&r, &[5]), &[3]));
    }

    #[test]
    fn u2_examples() {
        assert_relative_eq!(u2_pow4_spectral(&one(16, 1)), 4096.0, max_relative = 1e-12);
        assert_relative_eq!(u2_pow4_brute(&one(6, 1)).re, 216.0, max_relative = 1e-12);
        assert_relative_eq!(u2_pow4_spectral(&delta0(16, 1)), 1.0, max_relative = 1e-12);
        let r = random_fn(16, 1, 2);
        let b = u2_pow4_brute(&r);
        assert!((b.re - u2_pow4_spectral(&r)).abs() < 1e-10 * b.re);
        let r2 = random_fn(4, 2, 3);
        assert!((u2_pow4_brute(&r2).re - u2_pow4_spectral(&r2)).abs() < 1e-10 * u2_pow4_spectral(&r2));
    }

    #[test]
    fn u3_examples() {
        assert_relative_eq!(u3_pow8(&one(4, 1), U3Method::Brute).unwrap(), 256.0, max_relative = 1e-12);
        assert_relative_eq!(u3_norm(&one(4, 1), U3Method::Recursive).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(u3_pow8(&delta0(8, 1), U3Method::Brute).unwrap(), 1.0, max_relative = 1e-12);
        let r = random_fn(8, 1, 4);
        let b = u3_pow8(&r, U3Method::Brute).unwrap();
        assert!((b - u3_pow8_recursive(&r)).abs() < 1e-10 * b);
        assert!(u3_pow8_brute(&random_fn(32, 2, 5)).is_err());
    }

    #[test]
    fn u3_symmetries() {
        let r = random_fn(8, 2, 6);
        let base = u3_pow8_recursive(&r);
        assert!((u3_pow8_recursive(&r.modulate(&[3, 5])) - base).abs() < 1e-10 * base);
        assert!((u3_pow8_recursive(&r.translate(&[2, -1])) - base).abs() < 1e-10 * base);
    }

    #[test]
    fn kernel_distance_basics() {
        let m = build_mollifier();
        let p = LpExponent::new(1.5).unwrap();
        let grid = GridSpec { m: 2048, cell: 0.0025 };
        let same = u3_kernel_distance(0.2, 0.2, p, 1, 1.0, grid, &m).unwrap();
        assert_eq!(same.value, 0.0);
        let coarse = GridSpec { m: 64, cell: 0.1 };
        assert!(matches!(
            u3_kernel_distance(0.1, 0.2, p, 1, 1.0, coarse, &m),
            Err(Error::UnderResolved(_))
        ));
        let a = u3_kernel_distance(0.1, 0.2, p, 1, 1.0, grid, &m).unwrap();
        let b = u3_kernel_distance(0.2, 0.1, p, 1, 1.0, grid, &m).unwrap();
        assert!(a.value > 0.0);
        assert_relative_eq!(a.value, b.value, max_relative = 1e-12);
    }

    #[test]
    fn tensor_identity_small() {
        let p = LpExponent::new(3.0).unwrap();
        let c = u3_tensor_check(p, 0.0, 2, 32, false).unwrap();
        assert!(c.relative_gap < 1e-10);
        let c1 = u3_tensor_check(p, 5.0, 1, 32, false).unwrap();
        assert!(c1.relative_gap < 1e-14);
        assert!(u3_tensor_check(p, 5.0, 2, 32, true).is_err());
    }

    #[test]
    fn form_control_zero_kernel() {
        let f = BoxFunction::constant(1, 64, 1.0, 1.0).unwrap();
        let out = u3_form_control_check(&f, &[0.0; 8], 8.0).unwrap();
        assert_eq!(out.t, 0.0);
        assert_eq!(out.bound, 0.0);
    }
}
