//! Test sets for progression search: Bourgain's shell set, thickened
//! lattices, grid indicators and full boxes, plus lacunary sequences, the
//! parallelogram obstruction and randomized witness search.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::export::CsvTable;
use crate::forms::BoxFunction;
use crate::lp_geometry::{lp_norm, lp_pow, sphere_quadrature, LpExponent, QuadratureMode, SphereQuadrature};
use crate::rng::{self, Stream};

/// True iff dist(‖x‖₂², {0, 1, 2, …}) ≤ 1/10.
pub fn bourgain_membership(x: &[f64]) -> bool {
    let q: f64 = x.iter().map(|v| v * v).sum();
    (q - q.round()).abs() <= 0.1
}

/// True iff every coordinate lies within ε₀ of an integer.
pub fn lattice_cube_membership(x: &[f64], eps0: f64) -> bool {
    x.iter().all(|v| (v - v.round()).abs() <= eps0)
}

/// A membership predicate on ℝ^d with a probe box for sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum PointSet {
    Bourgain { d: usize },
    LatticeCube { d: usize, eps0: f64 },
    /// Cells of the box function with value above ½.
    GridIndicator(BoxFunction),
    /// The box [0, N]^d.
    FullBox { d: usize, n: f64 },
}

impl PointSet {
    pub fn bourgain(d: usize) -> Self {
        PointSet::Bourgain { d }
    }

    pub fn lattice_cube(d: usize, eps0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 < 0.5) {
            return Err(invalid("eps0", "need 0 < eps0 < 0.5"));
        }
        Ok(PointSet::LatticeCube { d, eps0 })
    }

    pub fn dim(&self) -> usize {
        match self {
            PointSet::Bourgain { d } | PointSet::LatticeCube { d, .. } | PointSet::FullBox { d, .. } => *d,
            PointSet::GridIndicator(f) => f.dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PointSet::Bourgain { .. } => "bourgain",
            PointSet::LatticeCube { .. } => "lattice-cube",
            PointSet::GridIndicator(_) => "grid-indicator",
            PointSet::FullBox { .. } => "full-box",
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            PointSet::Bourgain { .. } => bourgain_membership(x),
            PointSet::LatticeCube { eps0, .. } => lattice_cube_membership(x, *eps0),
            PointSet::FullBox { n, .. } => x.iter().all(|v| (0.0..=*n).contains(v)),
            PointSet::GridIndicator(f) => {
                let n = f.big_n();
                if x.iter().any(|v| !(0.0..n).contains(v)) {
                    return false;
                }
                let idx: Vec<usize> = x
                    .iter()
                    .map(|v| ((v / f.spacing()) as usize).min(f.side() - 1))
                    .collect();
                f.cell_value(&idx) > 0.5
            }
        }
    }

    /// Upper corner of the probe box [0, s]^d.
    pub fn probe_side(&self) -> f64 {
        match self {
            PointSet::Bourgain { .. } | PointSet::LatticeCube { .. } => 10.0,
            PointSet::GridIndicator(f) => f.big_n(),
            PointSet::FullBox { n, .. } => *n,
        }
    }

    /// Monte Carlo density over the probe box, with standard error.
    pub fn density_mc(&self, samples: u64, seed: u64) -> (f64, f64) {
        let mut r = rng::stream(seed, 0);
        let s = self.probe_side();
        let mut x = vec![0.0; self.dim()];
        let mut hits = 0u64;
        for _ in 0..samples {
            for c in x.iter_mut() {
                *c = r.gen_range(0.0..s);
            }
            if self.contains(&x) {
                hits += 1;
            }
        }
        let q = hits as f64 / samples.max(1) as f64;
        (q, (q * (1.0 - q) / samples.max(1) as f64).sqrt())
    }

    /// Draws a member of the probe box by rejection; `None` after `tries`.
    fn sample_member(&self, r: &mut Stream, tries: u32, out: &mut [f64]) -> bool {
        let s = self.probe_side();
        for _ in 0..tries {
            for c in out.iter_mut() {
                *c = r.gen_range(0.0..s);
            }
            if self.contains(out) {
                return true;
            }
        }
        false
    }
}

/// λ₁ < … < λ_J with λ_{j+1} ≥ 2λ_j.
#[derive(Debug, Clone, PartialEq)]
pub struct LacunarySequence {
    values: Vec<f64>,
    /// min_j λ_{j+1}/λ_j (infinite for a single term).
    pub min_ratio: f64,
}

impl LacunarySequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("values", "sequence must be non-empty"));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid("values", "terms must be positive and finite"));
        }
        let mut min_ratio = f64::INFINITY;
        for (i, w) in values.windows(2).enumerate() {
            if w[1] < 2.0 * w[0] {
                return Err(Error::NonLacunary {
                    index: i + 1,
                    prev: w[0],
                    next: w[1],
                });
            }
            min_ratio = min_ratio.min(w[1] / w[0]);
        }
        Ok(Self { values, min_ratio })
    }

    pub fn verify(&self) -> Result<()> {
        Self::new(self.values.clone()).map(|_| ())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn prefix(&self, j: usize) -> Self {
        Self::new(self.values[..j.min(self.values.len()).max(1)].to_vec()).expect("prefix of a lacunary sequence")
    }
}

/// λ_j = λ₁·ratio^{j−1}, j = 1..J.
pub fn lacunary_generate(lambda1: f64, ratio: f64, j: usize) -> Result<LacunarySequence> {
    if ratio < 2.0 {
        return Err(invalid("ratio", format!("lacunary ratio must be at least 2, got {ratio}")));
    }
    if !(lambda1 > 1.0) {
        return Err(invalid("lambda1", "first term must exceed 1"));
    }
    if j == 0 {
        return Err(invalid("J", "need at least one term"));
    }
    LacunarySequence::new((0..j).map(|k| lambda1 * ratio.powi(k as i32)).collect())
}

/// A progression {x, x+y, x+2y} inside a set, with ‖y‖_p recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgressionWitness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: LpExponent,
    pub gap: f64,
    /// Distances of x, x+y, x+2y to the set; zero for predicate sets.
    pub residuals: [f64; 3],
}

impl ProgressionWitness {
    pub fn points(&self) -> [Vec<f64>; 3] {
        let at = |k: f64| self.x.iter().zip(&self.y).map(|(a, b)| a + k * b).collect();
        [at(0.0), at(1.0), at(2.0)]
    }

    /// Re-evaluates membership of all three points and the gap from
    /// scratch.
    pub fn verify(&self, set: &PointSet, lambda: f64, tol: f64) -> bool {
        let pts = self.points();
        pts.iter().all(|z| set.contains(z)) && (lp_norm(&self.y, self.p) - lambda).abs() <= tol
    }
}

/// Result of a parallelogram-law evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parallelogram {
    /// 2‖y‖_p^p
    pub lhs: f64,
    /// ‖x‖_p^p + ‖x+2y‖_p^p − 2‖x+y‖_p^p
    pub rhs: f64,
    pub gap: f64,
}

pub fn parallelogram_check(x: &[f64], y: &[f64], p: LpExponent) -> Parallelogram {
    let pv = p.value();
    let x1: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let x2: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + 2.0 * b).collect();
    let lhs = 2.0 * lp_pow(y, pv);
    let rhs = lp_pow(x, pv) + lp_pow(&x2, pv) - 2.0 * lp_pow(&x1, pv);
    Parallelogram { lhs, rhs, gap: lhs - rhs }
}

/// dist(2g², ℤ): zero exactly when g² is a half-integer.
pub fn half_integer_distance(g: f64) -> f64 {
    let s = 2.0 * g * g;
    (s - s.round()).abs()
}

/// Gaps ‖y‖_p of verified progressions found by sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSpectrum {
    pub p: LpExponent,
    pub gaps: Vec<f64>,
    /// Proposals examined.
    pub proposals: u64,
}

impl GapSpectrum {
    /// Largest distance between consecutive sorted gaps within [lo, hi],
    /// including the distances to the interval ends.
    pub fn max_spacing(&self, lo: f64, hi: f64) -> f64 {
        let mut g: Vec<f64> = self.gaps.iter().copied().filter(|v| (lo..=hi).contains(v)).collect();
        g.sort_by(|a, b| a.total_cmp(b));
        let mut prev = lo;
        let mut worst = 0.0f64;
        for v in g {
            worst = worst.max(v - prev);
            prev = v;
        }
        worst.max(hi - prev)
    }

    /// Columns gap, count: histogram with the given bin width, bins
    /// labeled by their left edge.
    pub fn histogram_csv(&self, bin: f64) -> CsvTable {
        let mut t = CsvTable::new(["gap", "count"]);
        if self.gaps.is_empty() {
            return t;
        }
        let max = self.gaps.iter().fold(0.0f64, |m, v| m.max(*v));
        let bins = (max / bin).floor() as usize + 1;
        let mut counts = vec![0u64; bins];
        for g in &self.gaps {
            counts[((g / bin).floor() as usize).min(bins - 1)] += 1;
        }
        for (i, c) in counts.iter().enumerate() {
            t.push(vec![i as f64 * bin, *c as f64]);
        }
        t
    }
}

/// Samples progressions in `set`: x and z = x + y are drawn from the set
/// by rejection in its probe box, and the proposal is kept when x + 2y is
/// also a member. Stops after `n_hits` verified progressions or
/// `max_proposals` pairs.
pub fn gap_spectrum_sample(
    set: &PointSet,
    p: LpExponent,
    n_hits: usize,
    max_proposals: u64,
    seed: u64,
) -> Result<GapSpectrum> {
    if max_proposals > 10_000_000 {
        return Err(invalid("max_proposals", "at most 10^7 proposals"));
    }
    let d = set.dim();
    let mut r = rng::stream(seed, 1);
    let mut x = vec![0.0; d];
    let mut z = vec![0.0; d];
    let mut gaps = Vec::with_capacity(n_hits);
    let mut proposals = 0;
    while gaps.len() < n_hits && proposals < max_proposals {
        proposals += 1;
        if !set.sample_member(&mut r, 1000, &mut x) || !set.sample_member(&mut r, 1000, &mut z) {
            continue;
        }
        let y: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a - b).collect();
        let w = ProgressionWitness {
            x: x.clone(),
            gap: lp_norm(&y, p),
            y,
            p,
            residuals: [0.0; 3],
        };
        if w.verify(set, w.gap, 0.0) {
            gaps.push(w.gap);
        }
    }
    Ok(GapSpectrum { p, gaps, proposals })
}

/// Outcome of a randomized witness search.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found(ProgressionWitness),
    /// No witness within the stated number of proposals. This is not a
    /// claim of nonexistence.
    Exhausted { budget: u64 },
}

impl SearchOutcome {
    pub fn witness(&self) -> Option<&ProgressionWitness> {
        match self {
            SearchOutcome::Found(w) => Some(w),
            SearchOutcome::Exhausted { .. } => None,
        }
    }
}

fn direction_rule(p: LpExponent, d: usize, seed: u64) -> Result<SphereQuadrature> {
    if d <= 3 {
        sphere_quadrature(p, d, 1.0, 64 << d, QuadratureMode::Deterministic)
    } else {
        sphere_quadrature(p, d, 1.0, 200_000, QuadratureMode::shell(seed))
    }
}

/// Randomized search for {x, x+y, x+2y} ⊂ A with |‖y‖_p − λ| ≤ tol. x is
/// drawn from A by rejection; y is a sphere-rule direction with angular
/// jitter, rescaled to a radius within tol of λ. A returned witness has been
/// re-verified independently.
pub fn progression_search(
    set: &PointSet,
    p: LpExponent,
    lambda: f64,
    tol: f64,
    budget: u64,
    seed: u64,
    task: u64,
) -> Result<SearchOutcome> {
    if !(tol > 0.0) {
        return Err(invalid("tol", "tolerance must be positive"));
    }
    if !(lambda > 0.0) {
        return Err(invalid("lambda", "lambda must be positive"));
    }
    let d = set.dim();
    let dirs = direction_rule(p, d, seed)?;
    let jitter = 4.0 / dirs.len() as f64;
    let mut r = rng::stream(seed, task);
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut z = vec![0.0; d];
    for _ in 0..budget {
        if !set.sample_member(&mut r, 1000, &mut x) {
            continue;
        }
        let k = r.gen_range(0..dirs.len());
        for (yi, ti) in y.iter_mut().zip(dirs.node(k)) {
            *yi = ti + r.gen_range(-jitter..jitter);
        }
        let norm = lp_norm(&y, p);
        if norm == 0.0 {
            continue;
        }
        let radius = lambda + 0.999 * tol * r.gen_range(-1.0..1.0);
        for yi in y.iter_mut() {
            *yi *= radius / norm;
        }
        for ((zi, xi), yi) in z.iter_mut().zip(&x).zip(&y) {
            *zi = xi + yi;
        }
        if !set.contains(&z) {
            continue;
        }
        for zi in z.iter_mut().zip(&y) {
            *zi.0 += zi.1;
        }
        if !set.contains(&z) {
            continue;
        }
        let w = ProgressionWitness {
            x: x.clone(),
            y: y.clone(),
            p,
            gap: lp_norm(&y, p),
            residuals: [0.0; 3],
        };
        if w.verify(set, lambda, tol) {
            return Ok(SearchOutcome::Found(w));
        }
    }
    Ok(SearchOutcome::Exhausted { budget })
}

/// Per-seed outcome of the lacunary theorem experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed_index: usize,
    pub density: f64,
    /// Indices j (0-based) whose gap λ_j was realized.
    pub realized: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub seeds: Vec<SeedOutcome>,
    /// Every seed realized at least one λ_j.
    pub all_realize: bool,
    pub tol: f64,
}

/// For each seed, draws a density-δ grid indicator on [0, N]^d and searches
/// each λ_j with tolerance d·cell.
#[allow(clippy::too_many_arguments)]
pub fn theorem_experiment(
    delta: f64,
    p: LpExponent,
    d: usize,
    side: usize,
    cell: f64,
    sequence: &LacunarySequence,
    seeds: usize,
    master_seed: u64,
    budget: u64,
) -> Result<TheoremReport> {
    p.require_nondegenerate()?;
    if d == 0 || d > 3 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "theorem experiment runs for d <= 3".into(),
        });
    }
    sequence.verify()?;
    let n = side as f64 * cell;
    let last = *sequence.values().last().unwrap_or(&0.0);
    if last > n / 4.0 {
        return Err(Error::LambdaTooLarge {
            lambda: last,
            n,
            limit: n / 4.0,
        });
    }
    let tol = d as f64 * cell;
    let outcomes: Vec<Result<SeedOutcome>> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::stream(master_seed, s as u64);
            let f = BoxFunction::random_indicator(d, side, cell, delta, &mut r)?;
            let density = f.mean();
            let set = PointSet::GridIndicator(f);
            let mut realized = Vec::new();
            for (j, lam) in sequence.values().iter().enumerate() {
                let task = ((s as u64) << 16) | (j as u64 + 1);
                let out = progression_search(&set, p, *lam, tol, budget, master_seed, task)?;
                if out.witness().is_some() {
                    realized.push(j);
                }
            }
            Ok(SeedOutcome {
                seed_index: s,
                density,
                realized,
            })
        })
        .collect();
    let seeds_out = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(TheoremReport {
        all_realize: seeds_out.iter().all(|o| !o.realized.is_empty()),
        seeds: seeds_out,
        tol,
    })
}

/// Largest dist(‖y‖_∞, ℤ) and dist(‖y‖₁, ℤ) over sampled member pairs
/// (x, x + y) of the thickened lattice.
pub fn lattice_pair_audit(d: usize, eps0: f64, pairs: usize, seed: u64) -> Result<(f64, f64)> {
    let set = PointSet::lattice_cube(d, eps0)?;
    let mut r = rng::stream(seed, 2);
    let mut a = vec![0.0; d];
    let mut b = vec![0.0; d];
    let (mut worst_inf, mut worst_one) = (0.0f64, 0.0f64);
    let mut found = 0;
    while found < pairs {
        if !set.sample_member(&mut r, 100_000, &mut a) || !set.sample_member(&mut r, 100_000, &mut b) {
            return Err(Error::BudgetExceeded("lattice member sampling".into()));
        }
        let y: Vec<f64> = b.iter().zip(&a).map(|(u, v)| u - v).collect();
        let inf = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let one: f64 = y.iter().map(|v| v.abs()).sum();
        worst_inf = worst_inf.max((inf - inf.round()).abs());
        worst_one = worst_one.max((one - one.round()).abs());
        found += 1;
    }
    Ok((worst_inf, worst_one))
}
