//! Trilinear progression-counting forms on gridded functions over [0, N]^d.
//!
//! A [`BoxFunction`] stores one value per cell of side h; the value sits at
//! the cell center. Forms with a smooth kernel sum x over cell centers and y
//! over the lattice hℤ^d, so x + y and x + 2y are again cell centers and no
//! interpolation is needed. The sphere form N_λ samples y on quadrature
//! nodes and interpolates f multilinearly, with zero extension outside the
//! box.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::export::CsvTable;
use crate::lp_geometry::{LpExponent, SphereQuadrature};
use crate::mollifier::{kernel_total_mass, CancelledKernel, KernelParams, MollifierPair};
use crate::sets::LacunarySequence;
use crate::sum::NeumaierSum;

/// A function [0, N]^d → [−1, 1], constant on grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxFunction {
    d: usize,
    side: usize,
    h: f64,
    values: Vec<f64>,
}

impl BoxFunction {
    pub fn new(d: usize, side: usize, h: f64, values: Vec<f64>) -> Result<Self> {
        if d == 0 || side == 0 {
            return Err(invalid("grid", "dimension and side must be positive"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid("h", "grid spacing must be positive"));
        }
        let len = side.pow(d as u32);
        if values.len() != len {
            return Err(invalid("values", format!("expected {len} values, got {}", values.len())));
        }
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(invalid("values", "values must lie in [-1, 1]"));
        }
        Ok(Self { d, side, h, values })
    }

    pub fn constant(d: usize, side: usize, h: f64, c: f64) -> Result<Self> {
        Self::new(d, side, h, vec![c; side.pow(d as u32)])
    }

    /// Values f(center of cell) for a predicate or function on ℝ^d.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(d: usize, side: usize, h: f64, mut f: F) -> Result<Self> {
        let len = side.pow(d as u32);
        let mut x = vec![0.0; d];
        let mut values = Vec::with_capacity(len);
        for idx in 0..len {
            let mut r = idx;
            for c in x.iter_mut() {
                *c = ((r % side) as f64 + 0.5) * h;
                r /= side;
            }
            values.push(f(&x));
        }
        Self::new(d, side, h, values)
    }

    /// Independent Bernoulli(δ) cells.
    pub fn random_indicator<R: Rng>(d: usize, side: usize, h: f64, delta: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(invalid("delta", "density must lie in [0, 1]"));
        }
        let len = side.pow(d as u32);
        let values = (0..len).map(|_| if rng.gen::<f64>() < delta { 1.0 } else { 0.0 }).collect();
        Self::new(d, side, h, values)
    }

    /// Stripes along the first axis: cells whose first index modulo
    /// `period` falls below ⌈δ·period⌉, shifted by `phase`.
    pub fn stripes(d: usize, side: usize, h: f64, delta: f64, period: usize, phase: usize) -> Result<Self> {
        let period = period.max(1);
        let on = ((delta * period as f64).ceil() as usize).min(period);
        let len = side.pow(d as u32);
        let values = (0..len)
            .map(|idx| if (idx % side + phase) % period < on { 1.0 } else { 0.0 })
            .collect();
        Self::new(d, side, h, values)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Cells per axis.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Box size N.
    pub fn big_n(&self) -> f64 {
        self.side as f64 * self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_indicator(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0 || *v == 1.0)
    }

    /// Grid mean, the density δ for indicators.
    pub fn mean(&self) -> f64 {
        self.values.iter().copied().collect::<NeumaierSum>().value() / self.values.len() as f64
    }

    /// ∫f⁴.
    pub fn l4_pow4(&self) -> f64 {
        let s: NeumaierSum = self.values.iter().map(|v| v.powi(4)).collect();
        s.value() * self.h.powi(self.d as i32)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn cell_value(&self, idx: &[usize]) -> f64 {
        let flat = idx.iter().rev().fold(0, |acc, i| acc * self.side + i);
        self.values[flat]
    }

    /// Places f inside a larger zero box with the given integer cell offset.
    pub fn embed(&self, side: usize, offset: &[usize]) -> Result<Self> {
        if offset.len() != self.d || offset.iter().any(|o| o + self.side > side) {
            return Err(invalid("offset", "embedded box must fit inside the ambient box"));
        }
        let mut values = vec![0.0; side.pow(self.d as u32)];
        for (idx, v) in self.values.iter().enumerate() {
            let mut r = idx;
            let mut flat = 0;
            let mut stride = 1;
            for o in offset {
                flat += (r % self.side + o) * stride;
                r /= self.side;
                stride *= side;
            }
            values[flat] = *v;
        }
        Self::new(self.d, side, self.h, values)
    }

    /// Multilinear interpolation between cell centers, constant
    /// continuation up to the box faces, zero outside [0, N]^d.
    pub fn interpolate(&self, z: &[f64]) -> f64 {
        let n = self.big_n();
        if z.iter().any(|c| *c < 0.0 || *c > n) {
            return 0.0;
        }
        let last = self.side - 1;
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut fr = [0.0f64; 3];
        debug_assert!(self.d <= 3);
        for (i, c) in z.iter().enumerate() {
            let u = c / self.h - 0.5;
            let f = u.floor();
            let i0 = f as i64;
            if i0 < 0 {
                lo[i] = 0;
                hi[i] = 0;
                fr[i] = 0.0;
            } else if i0 as usize >= last {
                lo[i] = last;
                hi[i] = last;
                fr[i] = 0.0;
            } else {
                lo[i] = i0 as usize;
                hi[i] = lo[i] + 1;
                fr[i] = u - f;
            }
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << self.d) {
            let mut w = 1.0;
            let mut flat = 0;
            let mut stride = 1;
            for i in 0..self.d {
                let (idx, wi) = if corner & (1 << i) != 0 { (hi[i], fr[i]) } else { (lo[i], 1.0 - fr[i]) };
                w *= wi;
                flat += idx * stride;
                stride *= self.side;
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }
}

/// Which counting form a [`FormValue`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    NLambda,
    MLambda,
    MEpsLambda,
    ELambda,
}

impl FormKind {
    pub fn name(self) -> &'static str {
        match self {
            FormKind::NLambda => "N_lambda",
            FormKind::MLambda => "M_lambda",
            FormKind::MEpsLambda => "M_eps_lambda",
            FormKind::ELambda => "E_lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormValue {
    pub kind: FormKind,
    pub lambda: f64,
    pub epsilon: Option<f64>,
    pub value: f64,
    /// Estimated absolute error from discretizing the kernel.
    pub quadrature_error: f64,
}

/// Columns kind, lambda, epsilon, value, error; the kind column holds the
/// index 0..3 of N, M, Mᵉ, E.
pub fn forms_csv(values: &[FormValue]) -> CsvTable {
    let mut t = CsvTable::new(["kind", "lambda", "epsilon", "value", "error"]);
    for v in values {
        let kind = match v.kind {
            FormKind::NLambda => 0.0,
            FormKind::MLambda => 1.0,
            FormKind::MEpsLambda => 2.0,
            FormKind::ELambda => 3.0,
        };
        t.push(vec![kind, v.lambda, v.epsilon.unwrap_or(f64::NAN), v.value, v.quadrature_error]);
    }
    t
}

fn check_lambda(f: &BoxFunction, lambda: f64) -> Result<()> {
    let n = f.big_n();
    if !(lambda > 0.0) {
        return Err(invalid("lambda", "lambda must be positive"));
    }
    if lambda > n / 4.0 {
        return Err(Error::LambdaTooLarge {
            lambda,
            n,
            limit: n / 4.0,
        });
    }
    Ok(())
}

fn check_dim_12(f: &BoxFunction) -> Result<()> {
    if !(1..=2).contains(&f.dim()) {
        return Err(Error::UnsupportedDimension {
            dim: f.dim(),
            reason: "smooth-kernel forms are evaluated for d in {1, 2}".into(),
        });
    }
    Ok(())
}

/// S_j = Σ_x f(x)f(x+j)f(x+2j) over cells with all three in the grid.
fn progression_sum(f: &BoxFunction, j: &[i64]) -> f64 {
    let n = f.side as i64;
    let v = &f.values;
    let range = |ji: i64| -> (i64, i64) {
        let lo = 0.max(-2 * ji).max(-ji);
        let hi = n.min(n - 2 * ji).min(n - ji);
        (lo, hi)
    };
    let mut acc = NeumaierSum::new();
    match f.d {
        1 => {
            let (lo, hi) = range(j[0]);
            let j0 = j[0];
            for x in lo..hi {
                acc.add(v[x as usize] * v[(x + j0) as usize] * v[(x + 2 * j0) as usize]);
            }
        }
        2 => {
            let (lo0, hi0) = range(j[0]);
            let (lo1, hi1) = range(j[1]);
            let s = n;
            let off1 = j[0] + j[1] * s;
            for x1 in lo1..hi1 {
                let row = x1 * s;
                let mut racc = 0.0;
                for x0 in lo0..hi0 {
                    let i = row + x0;
                    racc += v[i as usize] * v[(i + off1) as usize] * v[(i + 2 * off1) as usize];
                }
                acc.add(racc);
            }
        }
        _ => unreachable!("checked by caller"),
    }
    acc.value()
}

/// h^{2d}Σ_y w(y)S_y over lattice offsets y = jh with |j_i|h ≤ radius.
/// Also returns h^dΣw, the Riemann sum of the kernel mass.
fn lattice_form<K: Fn(&[f64]) -> f64 + Sync>(f: &BoxFunction, radius: f64, kernel: K) -> (f64, f64) {
    let d = f.d;
    let h = f.h;
    let r = (radius / h).ceil() as i64;
    let width = (2 * r + 1) as usize;
    let total = width.pow(d as u32);
    let offsets: Vec<(Vec<i64>, f64)> = (0..total)
        .filter_map(|idx| {
            let mut rem = idx;
            let j: Vec<i64> = (0..d)
                .map(|_| {
                    let c = (rem % width) as i64 - r;
                    rem /= width;
                    c
                })
                .collect();
            let y: Vec<f64> = j.iter().map(|c| *c as f64 * h).collect();
            let w = kernel(&y);
            (w != 0.0).then_some((j, w))
        })
        .collect();
    let partial: Vec<f64> = offsets.par_iter().map(|(j, w)| w * progression_sum(f, j)).collect();
    let value = partial.into_iter().collect::<NeumaierSum>().value();
    let mass = offsets.iter().map(|(_, w)| *w).collect::<NeumaierSum>().value();
    let hd = h.powi(d as i32);
    (value * hd * hd, mass * hd)
}

fn smooth_form(
    f: &BoxFunction,
    ck: &CancelledKernel,
    kind: FormKind,
    m: &MollifierPair,
) -> Result<FormValue> {
    let params = ck.params;
    let eps = params.epsilon;
    let lam = params.lambda;
    let radius = lam * 3f64.powf(1.0 / params.p.value());
    let (value, riemann_mass, exact_mass) = match kind {
        FormKind::MLambda => {
            let k1 = params.with_epsilon(1.0)?;
            let (v, rm) = lattice_form(f, radius, |y| crate::mollifier::omega_eps_eval(y, &k1, m));
            (v, rm, kernel_total_mass(&k1, m)?)
        }
        FormKind::MEpsLambda => {
            let (v, rm) = lattice_form(f, radius, |y| crate::mollifier::omega_eps_eval(y, &params, m));
            (v, rm, kernel_total_mass(&params, m)?)
        }
        FormKind::ELambda => {
            let (v, rm) = lattice_form(f, radius, |y| ck.eval(y));
            (v, rm, 0.0)
        }
        FormKind::NLambda => unreachable!(),
    };
    let fmax = f.max_abs();
    let err = (riemann_mass - exact_mass).abs() * f.big_n().powi(f.d as i32) * fmax.powi(3);
    Ok(FormValue {
        kind,
        lambda: lam,
        epsilon: (kind != FormKind::MLambda).then_some(eps),
        value,
        quadrature_error: err,
    })
}

fn shell_resolution(f: &BoxFunction, p: LpExponent, lambda: f64, epsilon: f64) -> Result<()> {
    let limit = epsilon * lambda / (8.0 * p.value());
    if f.h > limit * (1.0 + 1e-12) {
        return Err(Error::UnderResolved(format!(
            "grid spacing {} exceeds eps*lambda/(8p) = {limit:e}",
            f.h
        )));
    }
    Ok(())
}

/// M_λ(f) = ∫∫f(x)f(x+y)f(x+2y)ω_λ(y)dydx.
pub fn m_lambda(f: &BoxFunction, p: LpExponent, lambda: f64, m: &MollifierPair) -> Result<FormValue> {
    check_dim_12(f)?;
    check_lambda(f, lambda)?;
    let params = KernelParams::new(p, f.d, lambda, 1.0)?;
    let ck = CancelledKernel { params, c1: 1.0 };
    smooth_form(f, &ck, FormKind::MLambda, m)
}

/// M^ε_λ(f) with the kernel ω_λᵉ.
pub fn m_eps_lambda(f: &BoxFunction, p: LpExponent, lambda: f64, epsilon: f64, m: &MollifierPair) -> Result<FormValue> {
    check_dim_12(f)?;
    check_lambda(f, lambda)?;
    shell_resolution(f, p, lambda, epsilon)?;
    let params = KernelParams::new(p, f.d, lambda, epsilon)?;
    if epsilon == 1.0 {
        let mut v = smooth_form(f, &CancelledKernel { params, c1: 1.0 }, FormKind::MLambda, m)?;
        v.kind = FormKind::MEpsLambda;
        v.epsilon = Some(1.0);
        return Ok(v);
    }
    smooth_form(f, &CancelledKernel { params, c1: f64::NAN }, FormKind::MEpsLambda, m)
}

/// E_λ(f) = M^ε_λ(f) − c₁(ε)M_λ(f), computed in one pass with the fused
/// kernel k^ε = ω_λᵉ − c₁(ε)ω_λ.
pub fn e_lambda(f: &BoxFunction, p: LpExponent, lambda: f64, epsilon: f64, m: &MollifierPair) -> Result<FormValue> {
    check_dim_12(f)?;
    check_lambda(f, lambda)?;
    shell_resolution(f, p, lambda, epsilon)?;
    let ck = CancelledKernel::new(KernelParams::new(p, f.d, lambda, epsilon)?, m)?;
    e_lambda_with(f, &ck, m)
}

/// E_λ with a precomputed cancelled kernel.
pub fn e_lambda_with(f: &BoxFunction, ck: &CancelledKernel, m: &MollifierPair) -> Result<FormValue> {
    if ck.params.epsilon == 1.0 {
        return Ok(FormValue {
            kind: FormKind::ELambda,
            lambda: ck.params.lambda,
            epsilon: Some(1.0),
            value: 0.0,
            quadrature_error: 0.0,
        });
    }
    smooth_form(f, ck, FormKind::ELambda, m)
}

/// N_λ(f): x over cell centers, y over the nodes of `quad`.
pub fn n_lambda(f: &BoxFunction, lambda: f64, quad: &SphereQuadrature) -> Result<FormValue> {
    if (quad.lambda - lambda).abs() > 1e-12 * lambda {
        return Err(Error::MismatchedRadius {
            quad: quad.lambda,
            lambda,
        });
    }
    if quad.dim() != f.d {
        return Err(invalid("quad", "quadrature dimension differs from the function's"));
    }
    if f.d > 3 {
        return Err(Error::UnsupportedDimension {
            dim: f.d,
            reason: "grid forms support d <= 3".into(),
        });
    }
    let d = f.d;
    let side = f.side;
    let h = f.h;
    let nodes: Vec<(Vec<f64>, f64)> = quad.iter().map(|(y, w)| (y.to_vec(), w)).collect();
    let rows = f.values.len() / side;
    let partial: Vec<f64> = (0..rows)
        .into_par_iter()
        .map(|row| {
            let mut acc = NeumaierSum::new();
            let mut x = vec![0.0; d];
            let mut z1 = vec![0.0; d];
            let mut z2 = vec![0.0; d];
            let mut r = row;
            for c in x.iter_mut().skip(1) {
                *c = ((r % side) as f64 + 0.5) * h;
                r /= side;
            }
            for i0 in 0..side {
                let fx = f.values[row * side + i0];
                if fx == 0.0 {
                    continue;
                }
                x[0] = (i0 as f64 + 0.5) * h;
                let mut s = 0.0;
                for (y, w) in &nodes {
                    for k in 0..d {
                        z1[k] = x[k] + y[k];
                        z2[k] = x[k] + 2.0 * y[k];
                    }
                    let a = f.interpolate(&z1);
                    if a == 0.0 {
                        continue;
                    }
                    s += w * a * f.interpolate(&z2);
                }
                acc.add(fx * s);
            }
            acc.value()
        })
        .collect();
    let value = partial.into_iter().collect::<NeumaierSum>().value() * h.powi(d as i32);
    Ok(FormValue {
        kind: FormKind::NLambda,
        lambda,
        epsilon: None,
        value,
        quadrature_error: quad.std_error.unwrap_or(0.0) * f.big_n().powi(d as i32),
    })
}

/// Per-scale energies |E_{λ_j}(f)|² and their certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub energies: Vec<f64>,
    pub total: f64,
    /// total / (N^d‖f‖₄⁴).
    pub ratio: f64,
}

pub fn energy_sum(
    f: &BoxFunction,
    p: LpExponent,
    lambdas: &LacunarySequence,
    epsilon: f64,
    m: &MollifierPair,
) -> Result<EnergyReport> {
    lambdas.verify()?;
    let base = CancelledKernel::new(KernelParams::new(p, f.d, 1.0, epsilon)?, m)?;
    let mut energies = Vec::with_capacity(lambdas.len());
    for &lam in lambdas.values() {
        check_lambda(f, lam)?;
        let e = e_lambda_with(f, &base.at_lambda(lam)?, m)?;
        energies.push(e.value * e.value);
    }
    let total = energies.iter().copied().collect::<NeumaierSum>().value();
    let denom = f.big_n().powi(f.d as i32) * f.l4_pow4();
    let ratio = if total == 0.0 { 0.0 } else { total / denom };
    Ok(EnergyReport { energies, total, ratio })
}

/// Outcome of the box-partition pigeonhole check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PigeonholeReport {
    /// Boxes with ∫g_i ≥ (δ/2)ℓ^d.
    pub qualifying: u64,
    /// Number of boxes L = (N/ℓ)^d.
    pub boxes: u64,
    pub delta: f64,
    /// I ≥ δL/2.
    pub holds: bool,
    /// Integer arithmetic was used (indicator input).
    pub exact: bool,
}

/// Partitions [0, N]^d into boxes of side ℓ and counts those carrying at
/// least half the average mass. Indicator inputs use exact integer counts.
pub fn box_partition_pigeonhole(f: &BoxFunction, ell: f64) -> Result<PigeonholeReport> {
    let ratio = ell / f.h;
    let c = ratio.round() as usize;
    if c == 0 || (ratio - c as f64).abs() > 1e-9 * ratio || f.side % c != 0 {
        return Err(Error::NonDividing { ell, n: f.big_n() });
    }
    let d = f.d;
    let per_axis = f.side / c;
    let boxes = per_axis.pow(d as u32);
    let cells_per_box = c.pow(d as u32);
    let box_of = |idx: usize| -> usize {
        let mut r = idx;
        let mut b = 0;
        let mut stride = 1;
        for _ in 0..d {
            b += ((r % f.side) / c) * stride;
            r /= f.side;
            stride *= per_axis;
        }
        b
    };
    let n_cells = f.values.len();
    if f.is_indicator() {
        let mut counts = vec![0u64; boxes];
        for (i, v) in f.values.iter().enumerate() {
            if *v == 1.0 {
                counts[box_of(i)] += 1;
            }
        }
        let total: u64 = counts.iter().sum();
        // count_i ≥ (total/n_cells)/2 · cells_per_box, cleared of fractions.
        let qualifying = counts
            .iter()
            .filter(|ci| 2 * (**ci as u128) * (n_cells as u128) >= (total as u128) * (cells_per_box as u128))
            .count() as u64;
        let holds = 2 * (qualifying as u128) * (n_cells as u128) >= (total as u128) * (boxes as u128);
        Ok(PigeonholeReport {
            qualifying,
            boxes: boxes as u64,
            delta: total as f64 / n_cells as f64,
            holds,
            exact: true,
        })
    } else {
        let mut sums = vec![NeumaierSum::new(); boxes];
        for (i, v) in f.values.iter().enumerate() {
            sums[box_of(i)].add(*v);
        }
        let delta = f.mean();
        let threshold = 0.5 * delta * cells_per_box as f64;
        let qualifying = sums.iter().filter(|s| s.value() >= threshold * (1.0 - 1e-12)).count() as u64;
        Ok(PigeonholeReport {
            qualifying,
            boxes: boxes as u64,
            delta,
            holds: qualifying as f64 >= 0.5 * delta * boxes as f64,
            exact: false,
        })
    }
}

/// Normalized main terms over an ensemble of dense sets.
#[derive(Debug, Clone, PartialEq)]
pub struct RothReport {
    /// M_λ(1_A)/N^d per trial, in trial order.
    pub normalized: Vec<f64>,
    /// Observed ĉ(δ) = min over trials.
    pub c_hat: f64,
    pub all_positive: bool,
}

/// Runs M_λ on `trials` sets of density about δ, alternating independent
/// Bernoulli cells and stripe patterns.
#[allow(clippy::too_many_arguments)]
pub fn roth_main_term_experiment(
    delta: f64,
    d: usize,
    side: usize,
    h: f64,
    p: LpExponent,
    lambda: f64,
    trials: usize,
    seed: u64,
    m: &MollifierPair,
) -> Result<RothReport> {
    if !(1..=2).contains(&d) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "main-term experiment runs for d in {1, 2}".into(),
        });
    }
    let n = side as f64 * h;
    if lambda > n / 8.0 {
        return Err(Error::LambdaTooLarge {
            lambda,
            n,
            limit: n / 8.0,
        });
    }
    let mut normalized = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = crate::rng::stream(seed, t as u64);
        let f = if t % 2 == 0 {
            BoxFunction::random_indicator(d, side, h, delta, &mut rng)?
        } else {
            let period = rng.gen_range(2..=side.clamp(2, 16));
            let phase = rng.gen_range(0..period);
            BoxFunction::stripes(d, side, h, delta, period, phase)?
        };
        let v = m_lambda(&f, p, lambda, m)?;
        normalized.push(v.value / n.powi(d as i32));
    }
    let c_hat = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RothReport {
        all_positive: normalized.iter().all(|v| *v > 0.0),
        normalized,
        c_hat,
    })
}
