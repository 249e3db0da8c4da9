//! The check lists behind each suite. Every check yields one record of the
//! form `observed relation bound`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use lproth::export::CsvTable;
use lproth::forms::{
    box_partition_pigeonhole, e_lambda, forms_csv, m_eps_lambda, m_lambda, n_lambda, roth_main_term_experiment,
    BoxFunction,
};
use lproth::gowers::{
    difference_profile_csv, u2_norm, u2_pow4_brute, u2_pow4_spectral, u3_kernel_distance, u3_norm, u3_pow8,
    u3_tensor_check, CyclicGridFunction, GridSpec, U3Method,
};
use lproth::lp_geometry::{
    lp_norm, sigma_mass_invariance, sphere_quadrature, unit_ball_volume, QuadratureMode, VolumeMethod,
};
use lproth::mollifier::{
    build_mollifier, c1_eps, kernel_total_mass, omega_eps_eval, omega_eps_oscillatory, omega_profile_csv,
    CancelledKernel, KernelParams, MollifierPair,
};
use lproth::oscillatory::{
    decay_fit, dist_to_gamma_prime, i_of_t, lacunary_sum_bound, multiplier_arguments, multiplier_check,
    multiplier_csv, multiplier_value, phase_eval, phase_eval_taylor, stationary_exponent,
    stationary_lower_bound_check, IntegralBudget, PhaseFamily,
};
use lproth::rng::stream;
use lproth::sets::{
    bourgain_membership, gap_spectrum_sample, half_integer_distance, lacunary_generate, lattice_pair_audit,
    parallelogram_check, progression_search, theorem_experiment, LacunarySequence, PointSet, SearchOutcome,
};
use lproth::{LpExponent, Result};
use num_complex::Complex64;
use rand::Rng;

use crate::config::{ExperimentConfig, Suite};
use crate::report::{Record, Relation};

/// What a check measured.
pub struct Outcome {
    pub observed: f64,
    pub relation: Relation,
    pub bound: f64,
    pub values: Vec<(&'static str, f64)>,
}

impl Outcome {
    fn le(observed: f64, bound: f64) -> Self {
        Self { observed, relation: Relation::Le, bound, values: Vec::new() }
    }

    fn lt(observed: f64, bound: f64) -> Self {
        Self { observed, relation: Relation::Lt, bound, values: Vec::new() }
    }

    fn ge(observed: f64, bound: f64) -> Self {
        Self { observed, relation: Relation::Ge, bound, values: Vec::new() }
    }

    fn gt(observed: f64, bound: f64) -> Self {
        Self { observed, relation: Relation::Gt, bound, values: Vec::new() }
    }

    /// A yes/no finding, recorded as 1 ≥ 1.
    fn flag(ok: bool) -> Self {
        Self::ge(if ok { 1.0 } else { 0.0 }, 1.0)
    }

    fn with(mut self, name: &'static str, v: f64) -> Self {
        self.values.push((name, v));
        self
    }
}

/// Accumulates records, sidecar tables and per-check runtimes in check
/// order.
pub struct Runner<'a> {
    pub cfg: &'a ExperimentConfig,
    pub mollifier: MollifierPair,
    pub records: Vec<Record>,
    pub sidecars: Vec<(String, CsvTable)>,
    pub seconds: Vec<f64>,
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Self {
        Self {
            cfg,
            mollifier: build_mollifier(),
            records: Vec::new(),
            sidecars: Vec::new(),
            seconds: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, anchor: &str, f: impl FnOnce(&mut Self) -> Result<Outcome>) -> Result<()> {
        let start = Instant::now();
        let o = f(self)?;
        self.seconds.push(start.elapsed().as_secs_f64());
        let values: BTreeMap<String, f64> = o.values.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        self.records.push(Record {
            name: name.to_string(),
            anchor: anchor.to_string(),
            observed: o.observed,
            relation: o.relation,
            bound: o.bound,
            pass: o.relation.holds(o.observed, o.bound),
            values,
        });
        Ok(())
    }

    fn sidecar(&mut self, name: &str, table: CsvTable) {
        self.sidecars.push((name.to_string(), table));
    }

    fn p(&self) -> LpExponent {
        LpExponent::new(self.cfg.p).expect("validated exponent")
    }

    pub fn run(&mut self, suite: Suite) -> Result<()> {
        match suite {
            Suite::Kernels => kernels(self),
            Suite::Gowers => gowers(self),
            Suite::Forms => forms(self),
            Suite::Oscillatory => oscillatory(self),
            Suite::Counterexamples => counterexamples(self),
            Suite::Search => search(self),
            Suite::VerifyAll => {
                for s in &Suite::ALL[..6] {
                    self.run(*s)?;
                }
                Ok(())
            }
        }
    }
}

fn lp(p: f64) -> LpExponent {
    LpExponent::new(p).expect("literal exponent")
}

fn kernels(r: &mut Runner) -> Result<()> {
    let p = r.p();
    let d = r.cfg.d;
    let eps = r.cfg.epsilon;
    let seed = r.cfg.seed;
    r.check("kernel-scaling", "kernel.scaling", |r| {
        let k1 = KernelParams::new(p, d, 1.0, eps)?;
        let k2 = k1.with_lambda(2.0)?;
        let mut g = stream(seed, 100);
        let mut worst = 0.0f64;
        for _ in 0..500 {
            let y: Vec<f64> = (0..d).map(|_| g.gen_range(-2.5..2.5)).collect();
            let half: Vec<f64> = y.iter().map(|v| v / 2.0).collect();
            let a = omega_eps_eval(&y, &k2, &r.mollifier);
            let b = 2f64.powi(-(d as i32)) * omega_eps_eval(&half, &k1, &r.mollifier);
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
        Ok(Outcome::le(worst, 1e-12))
    })?;
    r.check("kernel-reflection", "kernel.reflection", |r| {
        let k = KernelParams::new(p, d, 1.0, eps)?;
        let mut g = stream(seed, 101);
        let mut worst = 0.0f64;
        for _ in 0..500 {
            let y: Vec<f64> = (0..d).map(|_| g.gen_range(-1.3..1.3)).collect();
            let base = omega_eps_eval(&y, &k, &r.mollifier);
            for mask in 1..(1u32 << d) {
                let z: Vec<f64> =
                    y.iter().enumerate().map(|(i, v)| if mask >> i & 1 == 1 { -v } else { *v }).collect();
                worst = worst.max((omega_eps_eval(&z, &k, &r.mollifier) - base).abs());
            }
        }
        Ok(Outcome::le(worst, 0.0))
    })?;
    r.check("kernel-mass-stability", "kernel.mass-stability", |r| {
        let masses = [4.0, 2.0, 1.0, 0.5]
            .iter()
            .map(|s| kernel_total_mass(&KernelParams::new(p, d, 1.0, s * eps)?, &r.mollifier))
            .collect::<Result<Vec<f64>>>()?;
        let hi = masses.iter().copied().fold(f64::MIN, f64::max);
        let lo = masses.iter().copied().fold(f64::MAX, f64::min);
        Ok(Outcome::lt(hi / lo, 1.5).with("mass_min", lo).with("mass_max", hi))
    })?;
    r.check("c1-at-unit-width", "kernel.unit-constant", |r| {
        let c = c1_eps(1.0, p, d, &r.mollifier)?;
        Ok(Outcome::le((c - 1.0).abs(), 0.0).with("c1", c))
    })?;
    r.check("kernel-cancellation", "kernel.cancellation", |r| {
        let params = KernelParams::new(p, d, 1.0, 0.1)?;
        let ck = CancelledKernel::new(params, &r.mollifier)?;
        let mass = kernel_total_mass(&params, &r.mollifier)?;
        let integral = ck.integral_by_coarea(64)?;
        Ok(Outcome::le(integral.abs() / mass, 1e-6).with("integral", integral).with("mass", mass))
    })?;
    r.check("kernel-fourier-at-zero", "kernel.fourier-zero", |r| {
        let ck = CancelledKernel::new(KernelParams::new(p, d.min(2), 1.0, 0.1)?, &r.mollifier)?;
        Ok(Outcome::le(ck.fourier(&vec![0.0; d.min(2)])?.abs(), 1e-8))
    })?;
    r.check("kernel-closed-form", "kernel.closed-form", |r| {
        let dd = d.min(2);
        let k = KernelParams::new(p, dd, 1.0, 0.3)?;
        let mut g = stream(seed, 102);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let y: Vec<f64> = (0..dd).map(|_| g.gen_range(-1.4..1.4)).collect();
            worst = worst.max((omega_eps_eval(&y, &k, &r.mollifier) - omega_eps_oscillatory(&y, &k)).abs());
        }
        Ok(Outcome::le(worst, 1e-4))
    })?;
    r.check("sphere-mass-invariance", "sphere.mass-invariance", |r| {
        let rep = sigma_mass_invariance(p, d, &[1.0, 2.0, 4.0], r.cfg.budgets.nodes, QuadratureMode::Deterministic)?;
        let disk = sigma_mass_invariance(lp(2.0), 2, &[1.0], r.cfg.budgets.nodes, QuadratureMode::Deterministic)?;
        Ok(Outcome::le(rep.max_rel_deviation, 1e-4).with("mass", rep.masses[0]).with("disk_minus_pi", disk.masses[0] - PI))
    })?;
    r.check("ball-volume-monte-carlo", "ball.volume", |r| {
        let exact = unit_ball_volume(p, d, VolumeMethod::ClosedForm)?.value;
        let mc = unit_ball_volume(p, d, VolumeMethod::MonteCarlo { samples: 50 * r.cfg.budgets.samples, seed })?;
        let se = mc.std_error.unwrap_or(0.0);
        Ok(Outcome::le((mc.value - exact).abs(), 4.0 * se).with("closed_form", exact).with("monte_carlo", mc.value))
    })?;
    r.check("norm-triangle-inequality", "norm.triangle", |_| {
        let mut g = stream(seed, 103);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..d).map(|_| g.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| g.gen_range(-1.0..1.0)).collect();
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            worst = worst.max(lp_norm(&s, p) - lp_norm(&x, p) - lp_norm(&y, p));
        }
        Ok(Outcome::le(worst, 1e-12))
    })?;
    let params = KernelParams::new(p, d, 1.0, eps)?;
    let profile = omega_profile_csv(&params, &r.mollifier, 401);
    r.sidecar("kernel_profile.csv", profile);
    Ok(())
}

fn random_grid_function(m: usize, d: usize, seed: u64, task: u64) -> Result<CyclicGridFunction> {
    let mut g = stream(seed, task);
    CyclicGridFunction::from_fn(m, d, 1.0, |_| Complex64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)))
}

fn gowers(r: &mut Runner) -> Result<()> {
    let seed = r.cfg.seed;
    r.check("u3-recursive-vs-brute", "gowers.u3-oracle", |_| {
        let mut worst = 0.0f64;
        for i in 0..20u64 {
            let (m, d) = if i % 2 == 0 { (8 + (i as usize / 2) % 9, 1) } else { (4 + (i as usize / 2) % 5, 2) };
            let f = random_grid_function(m, d, seed, 200 + i)?;
            let brute = u3_pow8(&f, U3Method::Brute)?;
            let rec = u3_pow8(&f, U3Method::Recursive)?;
            worst = worst.max((brute - rec).abs() / brute.abs());
        }
        Ok(Outcome::le(worst, 1e-10))
    })?;
    r.check("u2-spectral-identity", "gowers.u2-spectral", |_| {
        let mut worst = 0.0f64;
        for i in 0..20u64 {
            let f = random_grid_function(64, 1, seed, 300 + i)?;
            let spec = u2_pow4_spectral(&f);
            worst = worst.max((u2_pow4_brute(&f) - Complex64::new(spec, 0.0)).norm() / spec);
        }
        Ok(Outcome::le(worst, 1e-10))
    })?;
    r.check("u2-below-u3", "gowers.nesting", |_| {
        let mut worst = 0.0f64;
        for i in 0..50u64 {
            let f = random_grid_function(8, 1, seed, 400 + i)?;
            worst = worst.max(u2_norm(&f) / (u3_norm(&f, U3Method::Recursive)? * 8f64.powf(0.25)));
        }
        Ok(Outcome::le(worst, 1.0 + 1e-12))
    })?;
    for (p, t, name) in [(1.5, 2.0, "tensorization-p1.5"), (3.0, 5.0, "tensorization-p3")] {
        r.check(name, "gowers.tensorization", |_| {
            let c = u3_tensor_check(lp(p), t, 2, 64, false)?;
            Ok(Outcome::lt(c.relative_gap, 1e-2).with("lhs", c.lhs).with("rhs", c.rhs).with("phase_per_cell", c.resolution))
        })?;
    }
    r.check("kernel-distance-scaling", "gowers.kernel-scaling", |r| {
        let a = u3_kernel_distance(0.05, 0.1, lp(1.5), 1, 1.0, GridSpec { m: 8192, cell: 0.001 }, &r.mollifier)?;
        let b = u3_kernel_distance(0.05, 0.1, lp(1.5), 1, 2.0, GridSpec { m: 8192, cell: 0.002 }, &r.mollifier)?;
        let target = 2f64.powf(-0.5);
        Ok(Outcome::lt((b.value / a.value - target).abs() / target, 0.05).with("ratio", b.value / a.value))
    })?;
    let f = random_grid_function(16, 1, seed, 500)?;
    r.sidecar("difference_profile.csv", difference_profile_csv(&f));
    Ok(())
}

fn forms(r: &mut Runner) -> Result<()> {
    let p = r.p();
    let seed = r.cfg.seed;
    let n_box = r.cfg.n;
    let mut collected = Vec::new();
    r.check("form-decomposition", "forms.decomposition", |r| {
        let mut g = stream(seed, 600);
        let f = BoxFunction::random_indicator(1, 1024, 1.0 / 64.0, 0.4, &mut g)?;
        let mut worst = 0.0f64;
        for lam in [1.0, 2.0, 4.0] {
            for eps in [0.5, 0.25] {
                let me = m_eps_lambda(&f, p, lam, eps, &r.mollifier)?;
                let c1 = c1_eps(eps, p, 1, &r.mollifier)?;
                let ml = m_lambda(&f, p, lam, &r.mollifier)?;
                let el = e_lambda(&f, p, lam, eps, &r.mollifier)?;
                let scale = me.value.abs() + c1 * ml.value.abs() + el.value.abs();
                worst = worst.max((me.value - c1 * ml.value - el.value).abs() / scale);
                collected.extend([me, ml, el]);
            }
        }
        Ok(Outcome::le(worst, 1e-10))
    })?;
    r.sidecar("forms.csv", forms_csv(&collected));
    r.check("counting-form-boundary", "forms.counting-boundary", |r| {
        let (side, h) = ((n_box * 2.0) as usize, 0.5);
        let n = side as f64 * h;
        let lam = n / 8.0;
        let f = BoxFunction::constant(2, side, h, 1.0)?;
        let q = sphere_quadrature(lp(2.0), 2, lam, 4 * r.cfg.budgets.nodes, QuadratureMode::Deterministic)?;
        let v = n_lambda(&f, lam, &q)?.value;
        let oracle = PI * n * n - 8.0 * n * lam + 4.0 * lam * lam;
        Ok(Outcome::lt((v - oracle).abs() / oracle, 1e-2).with("value", v).with("oracle", oracle))
    })?;
    r.check("pigeonhole", "forms.pigeonhole", |_| {
        let mut failures = 0;
        for s in 0..20u64 {
            let mut g = stream(seed, 700 + s);
            let d = 1 + (s % 2) as usize;
            let (side, ell) = if d == 1 { (240, 16.0) } else { (48, 8.0) };
            let delta = g.gen_range(0.05..0.9);
            let f = BoxFunction::random_indicator(d, side, 1.0, delta, &mut g)?;
            let rep = box_partition_pigeonhole(&f, ell)?;
            if !(rep.holds && rep.exact) {
                failures += 1;
            }
        }
        Ok(Outcome::le(failures as f64, 0.0))
    })?;
    r.check("main-term-positive", "forms.main-term", |r| {
        let (side, h) = (512, 0.125);
        let lam = side as f64 * h / 8.0;
        let rep = roth_main_term_experiment(0.5, 1, side, h, p, lam, 20, seed, &r.mollifier)?;
        let c_omega = kernel_total_mass(&KernelParams::new(p, 1, lam, 1.0)?, &r.mollifier)?;
        Ok(Outcome::gt(rep.c_hat / c_omega, 1e-3).with("c_hat", rep.c_hat))
    })?;
    Ok(())
}

fn oscillatory(r: &mut Runner) -> Result<()> {
    let p = r.p();
    let seed = r.cfg.seed;
    let t_max = r.cfg.budgets.t_max;
    r.check("decay-dichotomy", if p.is_degenerate() { "oscillatory.no-decay" } else { "oscillatory.decay" }, |r| {
        let fit = decay_fit(p, 10.0, t_max, 6, IntegralBudget::default())?;
        r.sidecar("decay.csv", fit.to_csv());
        let o = if p.is_degenerate() {
            Outcome::ge(fit.slope, -0.02)
        } else {
            Outcome::le(fit.slope, -1.0 / fit.r_theory + 0.05)
        };
        Ok(o.with("r", fit.r_theory).with("c_fit", fit.c_fit).with("envelope_holds", fit.envelope_holds as u8 as f64))
    })?;
    r.check("i-even-in-t", "oscillatory.even", |_| {
        let a = i_of_t(p, 37.0, IntegralBudget::default())?;
        let b = i_of_t(p, -37.0, IntegralBudget::default())?;
        Ok(Outcome::le((a - b).abs() / a, 1e-9))
    })?;
    r.check("phase-constant-at-p2", "phase.degenerate", |_| {
        let mut g = stream(seed, 800);
        let mut worst = 0.0f64;
        let mut count = 0;
        while count < 10_000 {
            let fam = PhaseFamily::new(lp(2.0), g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
            let Some((lo, hi)) = fam.admissible_interval() else { continue };
            let (v, _) = phase_eval(&fam, g.gen_range(lo..=hi))?;
            worst = worst.max((v - 2.0 * fam.k * fam.l).abs());
            count += 1;
        }
        Ok(Outcome::le(worst, 1e-12))
    })?;
    r.check("phase-taylor-derivative", "phase.taylor", |_| {
        let mut g = stream(seed, 801);
        let mut worst = 0.0f64;
        for _ in 0..2_000 {
            let fam = PhaseFamily::new(lp(3.0), g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
            let Some((lo, hi)) = fam.admissible_interval() else { continue };
            let y = g.gen_range(lo..=hi);
            worst = worst.max((phase_eval(&fam, y)?.1 - phase_eval_taylor(&fam, y)?.1).abs());
        }
        Ok(Outcome::le(worst, 1e-8))
    })?;
    r.check("stationary-exponent-p3", "phase.stationary", |_| {
        let bounds = [0.2, 0.1, 0.05]
            .iter()
            .map(|e| stationary_lower_bound_check(lp(3.0), *e, 40, 60))
            .collect::<Result<Vec<_>>>()?;
        let e = stationary_exponent(&bounds);
        Ok(Outcome::le((e - 2.0).abs(), 0.3).with("exponent", e).with("min_at_0.05", bounds[2].min_abs_derivative))
    })?;
    r.check("lacunary-sum-bound", "multiplier.lacunary-sum", |_| {
        let mut g = stream(seed, 802);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let mut mu = vec![10f64.powf(g.gen_range(-8.0..0.0))];
            for _ in 1..g.gen_range(5..40) {
                let last = *mu.last().expect("nonempty");
                mu.push(last * g.gen_range(2.0..5.0));
            }
            let b = lacunary_sum_bound(&mu, 1)?;
            worst = worst.max(b.min_sum.max(b.weighted_sum));
        }
        Ok(Outcome::le(worst, 4.0))
    })?;
    let base = CancelledKernel::new(KernelParams::new(lp(1.5), 1, 1.0, 0.1)?, &r.mollifier)?;
    let seq12 = lacunary_generate(2.0, 2.0, 12)?;
    r.check("multiplier-j-uniform", "multiplier.j-uniform", |_| {
        let seq6 = seq12.prefix(6);
        let mut g = stream(seed, 803);
        let mut worst = 0.0f64;
        let mut n = 0;
        while n < 100 {
            let xi = [g.gen_range(-2.0..2.0), g.gen_range(-2.0..2.0), g.gen_range(-2.0..2.0)];
            let (eta, zeta) = multiplier_arguments(xi);
            if eta.abs() < 0.25 || zeta.abs() < 0.25 || dist_to_gamma_prime(xi) < 0.1 {
                continue;
            }
            let m6 = multiplier_value(xi, &base, &seq6)?.abs();
            let m12 = multiplier_value(xi, &base, &seq12)?.abs();
            if m6 > 0.0 || m12 > 0.0 {
                worst = worst.max((m12 / m6).ln().abs());
            }
            n += 1;
        }
        Ok(Outcome::le(worst.exp(), 2.0))
    })?;
    r.check("multiplier-gradient-scaling", "multiplier.gradient", |r| {
        // m depends on ξ through (η, ζ) only, so the samples sweep circles
        // in the plane normal to Γ′ at two distances.
        let e1 = [1.0 / 3f64.sqrt(), -1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt()];
        let e2 = [0.0, 1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
        let xi0 = [-0.6, -0.3, 0.3];
        let mut constants = Vec::new();
        let mut samples = Vec::new();
        for d in [0.1, 0.01] {
            let mut worst = 0.0f64;
            for k in 0..8 {
                let th = PI * k as f64 / 8.0;
                for j in 0..3 {
                    let rad = d * 2f64.powf(j as f64 / 3.0);
                    let xi: [f64; 3] = std::array::from_fn(|i| xi0[i] + rad * (th.cos() * e1[i] + th.sin() * e2[i]));
                    let s = multiplier_check(xi, &base, &seq12)?;
                    worst = worst.max(s.grad_norm * s.dist);
                    samples.push(s);
                }
            }
            constants.push(worst);
        }
        r.sidecar("multiplier.csv", multiplier_csv(&samples));
        let ratio = constants[0].max(constants[1]) / constants[0].min(constants[1]);
        Ok(Outcome::lt(ratio, 4.0).with("constant_at_0.1", constants[0]).with("constant_at_0.01", constants[1]))
    })?;
    Ok(())
}

fn counterexamples(r: &mut Runner) -> Result<()> {
    let seed = r.cfg.seed;
    let samples = r.cfg.budgets.samples;
    let bourgain = PointSet::bourgain(2);
    r.check("bourgain-membership", "bourgain.membership", |_| {
        let ok = bourgain_membership(&[0.0, 0.0]) && !bourgain_membership(&[0.5f64.sqrt(), 0.0]);
        Ok(Outcome::flag(ok))
    })?;
    r.check("bourgain-density", "bourgain.density", |_| {
        let (q, se) = bourgain.density_mc(1_000_000, seed);
        Ok(Outcome::le((q - 0.25).abs(), 0.1).with("density", q).with("std_error", se))
    })?;
    r.check("parallelogram-identity", "parallelogram.identity", |_| {
        let mut g = stream(seed, 900);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| g.gen_range(-5.0..5.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| g.gen_range(-5.0..5.0)).collect();
            worst = worst.max(parallelogram_check(&x, &y, lp(2.0)).gap.abs());
        }
        Ok(Outcome::lt(worst, 1e-10))
    })?;
    r.check("parallelogram-failure", "parallelogram.failure", |_| {
        let g = parallelogram_check(&[1.0, 1.0], &[1.0, 0.0], lp(1.5)).gap;
        Ok(Outcome::gt(g.abs(), 1e-3).with("gap", g))
    })?;
    let mut spectrum_p2 = None;
    r.check("bourgain-obstruction", "bourgain.obstruction", |_| {
        let spec = gap_spectrum_sample(&bourgain, lp(2.0), samples as usize, 10_000_000, seed)?;
        let worst = spec.gaps.iter().map(|g| half_integer_distance(*g)).fold(0.0f64, f64::max);
        let hits = spec.gaps.len() as f64;
        spectrum_p2 = Some(spec);
        Ok(Outcome::le(worst, 0.4 + 1e-9).with("verified_progressions", hits))
    })?;
    if let Some(s) = spectrum_p2 {
        r.sidecar("gap_spectrum_p2.csv", s.histogram_csv(0.05));
    }
    r.check("forbidden-gap-search", "bourgain.forbidden-gap", |r| {
        let budget = r.cfg.budgets.search_budget;
        let out = progression_search(&bourgain, lp(2.0), 0.75f64.sqrt(), 1e-3, budget, seed, 1)?;
        Ok(Outcome::flag(matches!(out, SearchOutcome::Exhausted { .. })).with("budget", budget as f64))
    })?;
    let mut spectrum_contrast = None;
    r.check("lp-contrast", "lp.contrast", |_| {
        let spec = gap_spectrum_sample(&bourgain, lp(1.5), samples as usize, 10_000_000, seed ^ 1)?;
        let best = spec.gaps.iter().map(|g| half_integer_distance(*g)).fold(0.0f64, f64::max);
        spectrum_contrast = Some(spec);
        Ok(Outcome::gt(best, 0.45))
    })?;
    if let Some(s) = spectrum_contrast {
        r.sidecar("gap_spectrum_contrast.csv", s.histogram_csv(0.05));
    }
    r.check("lattice-obstruction", "lattice.obstruction", |_| {
        let eps0 = 0.05;
        let (inf, one) = lattice_pair_audit(2, eps0, 10_000, seed)?;
        Ok(Outcome::le(inf, 2.0 * eps0 + 1e-12).with("l1_distance", one))
    })?;
    Ok(())
}

fn search(r: &mut Runner) -> Result<()> {
    let p = r.p();
    let d = r.cfg.d;
    let seed = r.cfg.seed;
    let side = r.cfg.n as usize;
    let budget = r.cfg.budgets.search_budget;
    let seeds = r.cfg.budgets.seeds;
    let seq = LacunarySequence::new(vec![2.0, 4.0, 8.0])?;
    r.check("desk-scale-positive-control", "theorem.desk-scale", |_| {
        let rep = theorem_experiment(0.4, p, d, side, 1.0, &seq, seeds, seed, budget)?;
        let realized = rep.seeds.iter().filter(|s| !s.realized.is_empty()).count();
        Ok(Outcome::ge(realized as f64, seeds as f64).with("tol", rep.tol))
    })?;
    r.check("full-density", "theorem.full-density", |_| {
        let rep = theorem_experiment(1.0, p, d, side, 1.0, &seq, 3, seed, budget)?;
        Ok(Outcome::flag(rep.seeds.iter().all(|s| s.realized.len() == seq.len())))
    })?;
    r.check("mid-gap-control", "theorem.mid-gap-control", |_| {
        let set = PointSet::bourgain(2);
        let mut realized = 0;
        for (i, l2) in [1.75f64, 7.25, 29.25].into_iter().enumerate() {
            let out = progression_search(&set, lp(2.0), l2.sqrt(), 1e-3, budget, seed, 10 + i as u64)?;
            realized += out.witness().is_some() as usize;
        }
        Ok(Outcome::le(realized as f64, 0.0))
    })?;
    r.check("witness-soundness", "witness.soundness", |_| {
        let full = PointSet::FullBox { d, n: side as f64 };
        let mut ok = true;
        for (j, lam) in seq.values().iter().enumerate() {
            let out = progression_search(&full, p, *lam, 1e-6, budget, seed, 20 + j as u64)?;
            ok &= out.witness().is_some_and(|w| w.verify(&full, *lam, 1e-6));
        }
        Ok(Outcome::flag(ok))
    })?;
    r.check("lacunary-generation", "lacunary.generate", |_| {
        let a = lacunary_generate(1.5, 2.0, 5)?;
        let ok = a.values() == [1.5, 3.0, 6.0, 12.0, 24.0]
            && lacunary_generate(2.0, 3.0, 3)?.values() == [2.0, 6.0, 18.0]
            && lacunary_generate(1.5, 1.9, 4).is_err();
        Ok(Outcome::flag(ok))
    })?;
    r.check("search-determinism", "search.determinism", |_| {
        let small = LacunarySequence::new(vec![2.0, 4.0])?;
        let a = theorem_experiment(0.4, p, d, 32, 1.0, &small, 3, seed, 20_000)?;
        let b = theorem_experiment(0.4, p, d, 32, 1.0, &small, 3, seed, 20_000)?;
        Ok(Outcome::flag(a == b))
    })?;
    Ok(())
}
