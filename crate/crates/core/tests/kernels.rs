use std::f64::consts::PI;

use lproth::lp_geometry::{sigma_total_mass, sphere_quadrature, QuadratureMode};
use lproth::mollifier::{
    build_mollifier, c1_eps, cancelled_kernel_eval, kernel_total_mass, omega_eps_eval, omega_eps_oscillatory,
    CancelledKernel, KernelParams,
};
use lproth::quadrature::{composite, gl};
use lproth::rng::stream;
use lproth::LpExponent;
use rand::Rng;

fn lp(p: f64) -> LpExponent {
    LpExponent::new(p).unwrap()
}

#[test]
fn scaling_identity_is_exact() {
    let m = build_mollifier();
    let mut r = stream(1, 0);
    for d in [1, 2, 3] {
        let k1 = KernelParams::new(lp(1.5), d, 1.0, 0.2).unwrap();
        let k2 = k1.with_lambda(2.0).unwrap();
        for _ in 0..200 {
            let y: Vec<f64> = (0..d).map(|_| r.gen_range(-2.5..2.5)).collect();
            let half: Vec<f64> = y.iter().map(|v| v / 2.0).collect();
            let a = omega_eps_eval(&y, &k2, &m);
            let b = 2f64.powi(-(d as i32)) * omega_eps_eval(&half, &k1, &m);
            assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
    }
}

#[test]
fn reflection_invariance() {
    let m = build_mollifier();
    let k = KernelParams::new(lp(3.0), 3, 1.0, 0.1).unwrap();
    let mut r = stream(2, 0);
    for _ in 0..500 {
        let y: Vec<f64> = (0..3).map(|_| r.gen_range(-1.3..1.3)).collect();
        let base = omega_eps_eval(&y, &k, &m);
        for mask in 1..8u32 {
            let z: Vec<f64> = y
                .iter()
                .enumerate()
                .map(|(i, v)| if mask >> i & 1 == 1 { -v } else { *v })
                .collect();
            assert_eq!(omega_eps_eval(&z, &k, &m), base);
        }
    }
}

#[test]
fn positive_orthant_carries_its_share_of_the_mass() {
    let m = build_mollifier();
    let k = KernelParams::new(lp(1.5), 2, 1.0, 0.2).unwrap();
    // Midpoint sums over [0, 2)² and [−2, 2)².
    let n = 1600;
    let h = 2.0 / n as f64;
    let mut quarter = 0.0;
    for i in 0..n {
        for j in 0..n {
            quarter += omega_eps_eval(&[(i as f64 + 0.5) * h, (j as f64 + 0.5) * h], &k, &m);
        }
    }
    quarter *= h * h;
    let total = kernel_total_mass(&k, &m).unwrap();
    assert!((quarter - total / 4.0).abs() < 2e-3 * total, "{quarter} vs {}", total / 4.0);
}

#[test]
fn closed_form_matches_oscillatory_integral_at_random_points() {
    let mut r = stream(3, 0);
    for d in [1, 2] {
        let k = KernelParams::new(lp(1.5), d, 1.0, 0.3).unwrap();
        let m = build_mollifier();
        for _ in 0..100 {
            let y: Vec<f64> = (0..d).map(|_| r.gen_range(-1.4..1.4)).collect();
            let a = omega_eps_eval(&y, &k, &m);
            let b = omega_eps_oscillatory(&y, &k);
            assert!((a - b).abs() < 1e-4, "{a} vs {b} at {y:?}");
        }
    }
}

/// ∫g·ωᵉ by the co-area formula, sampling the angular integral on S_ρ.
fn pair_with_kernel(g: impl Fn(&[f64]) -> f64, p: f64, d: usize, eps: f64) -> f64 {
    let m = build_mollifier();
    let k = KernelParams::new(lp(p), d, 1.0, eps).unwrap();
    let breaks = [1.0 - 2.0 * eps, 1.0, 1.0 + 2.0 * eps];
    composite(gl(32), &breaks, |_, _| 4, |u| {
        let rho = u.powf(1.0 / p);
        let q = sphere_quadrature(lp(p), d, rho, 256, QuadratureMode::Deterministic).unwrap();
        let y0: Vec<f64> = q.node(0).to_vec();
        let w = omega_eps_eval(&y0, &k, &m);
        u.powf(d as f64 / p - 1.0) * w * q.integrate(&g)
    })
}

#[test]
fn weak_convergence_to_the_sphere_measure() {
    let (p, d) = (1.5, 2);
    let g = |y: &[f64]| (-(y[0] * y[0] + y[1] * y[1])).exp() * (1.0 + 0.5 * y[0]) + y[1] * y[1];
    let limit = 2.0 * PI * sphere_quadrature(lp(p), d, 1.0, 256, QuadratureMode::Deterministic).unwrap().integrate(g);
    let errs: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|e| (pair_with_kernel(g, p, d, *e) - limit).abs())
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] < 0.5 * w[0], "errors {errs:?}");
    }
    assert!(errs[3] < 1e-2 * limit.abs());
}

#[test]
fn kernel_mass_tends_to_the_sphere_mass() {
    let m = build_mollifier();
    let k = KernelParams::new(lp(2.0), 2, 1.0, 0.005).unwrap();
    let mass = kernel_total_mass(&k, &m).unwrap();
    let sigma = sigma_total_mass(lp(2.0), 2).unwrap();
    assert!((mass / (2.0 * PI * sigma) - 1.0).abs() < 0.01);
    let c_omega = kernel_total_mass(&k.with_epsilon(1.0).unwrap(), &m).unwrap();
    assert!(c_omega > 0.0);
}

#[test]
fn c1_band() {
    let m = build_mollifier();
    let vals: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|e| c1_eps(*e, lp(1.5), 2, &m).unwrap()).collect();
    let hi = vals.iter().copied().fold(f64::MIN, f64::max);
    let lo = vals.iter().copied().fold(f64::MAX, f64::min);
    assert!(hi / lo < 1.2);
    assert!((0.1..=10.0).contains(&vals[2]));
}

#[test]
fn cancelled_kernel_integral_and_support() {
    let m = build_mollifier();
    let params = KernelParams::new(lp(1.5), 2, 1.0, 0.05).unwrap();
    let ck = CancelledKernel::new(params, &m).unwrap();
    let omega_mass = kernel_total_mass(&params, &m).unwrap();
    assert!(ck.integral_by_coarea(128).unwrap().abs() < 1e-6 * omega_mass);
    let mut r = stream(4, 0);
    for _ in 0..200 {
        let dir = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let n = lproth::lp_geometry::lp_norm(&dir, lp(1.5));
        let scale = 3f64.powf(1.0 / 1.5) * r.gen_range(1.0001..2.0) / n;
        let y = [dir[0] * scale, dir[1] * scale];
        assert_eq!(cancelled_kernel_eval(&y, &params, &m).unwrap(), 0.0);
    }
    let unit = params.with_epsilon(1.0).unwrap();
    assert_eq!(cancelled_kernel_eval(&[0.7, 0.2], &unit, &m).unwrap(), 0.0);
}

#[test]
fn fourier_transform_small_frequency_slope_and_symmetry() {
    let m = build_mollifier();
    for d in [1, 2] {
        let ck = CancelledKernel::new(KernelParams::new(lp(1.5), d, 2.0, 0.1).unwrap(), &m).unwrap();
        let mut ratios = Vec::new();
        for i in 0..7 {
            let s = 10f64.powf(-3.0 + i as f64 / 3.0);
            let mut eta = vec![0.0; d];
            eta[0] = s * 0.8;
            if d == 2 {
                eta[1] = s * 0.6;
            }
            let v = ck.fourier(&eta).unwrap();
            let neg: Vec<f64> = eta.iter().map(|e| -e).collect();
            assert!((ck.fourier(&neg).unwrap() - v).abs() <= 1e-12 * v.abs().max(1e-12));
            ratios.push(v.abs() / (2.0 * s));
        }
        // Zero mean and evenness make k̂ quadratic near 0, so the ratio to
        // λ|η| stays bounded and shrinks with |η|.
        assert!(ratios.iter().all(|r| *r < 10.0), "{ratios:?}");
        assert!(ratios[0] < ratios[6]);
    }
}
