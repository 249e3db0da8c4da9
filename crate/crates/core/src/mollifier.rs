//! The mollifier pair (ψ, ψ̂) and the shell kernels built from it.
//!
//! Fourier convention: ĝ(η) = ∫g(y)e^{−iy·η}dy for kernels on ℝ^d, while the
//! mollifier's own transform is ψ̂(u) = ∫ψ(s)e^{isu}ds. Both are even and
//! real here, so the sign never matters in practice.
//!
//! The concrete pair: b(t) = (1 − t²)² on [−1, 1], g = b̌ (so
//! g(x) = ∫b(t)e^{ixt}dt), ψ = (g/g(0))², and therefore
//! ψ̂ = 2π(b⋆b)/g(0)², supported on [−2, 2] and maximal at 0.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::export::CsvTable;
use crate::lp_geometry::{
    lp_pow, sphere_quadrature, unit_ball_volume, LpExponent, QuadratureMode, SphereQuadrature, VolumeMethod,
};
use crate::quadrature::{self, gl, Tolerance};
use crate::sum::NeumaierSum;

const G0: f64 = 16.0 / 15.0;

/// g(x) = ∫_{−1}^{1}(1 − t²)²e^{ixt}dt.
pub fn g_transform(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.5 {
        // Even Taylor series: Σ (−1)^k x^{2k}/(2k)! · ∫t^{2k}(1 − t²)²dt.
        let x2 = x * x;
        let mut term = 1.0;
        let mut acc = 0.0;
        for k in 0..14 {
            let kk = 2.0 * k as f64;
            let moment = if k == 0 {
                G0
            } else {
                2.0 * (1.0 / (kk + 1.0) - 2.0 / (kk + 3.0) + 1.0 / (kk + 5.0))
            };
            acc += term * moment;
            term *= -x2 / ((kk + 1.0) * (kk + 2.0));
        }
        acc
    } else {
        16.0 * ((3.0 - x * x) * x.sin() - 3.0 * x * x.cos()) / x.powi(5)
    }
}

#[inline]
fn b(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        s * s
    }
}

/// (b⋆b)(u), exact: the integrand is a degree-8 polynomial on its support.
fn b_conv_b(u: f64) -> f64 {
    let u = u.abs();
    if u >= 2.0 {
        return 0.0;
    }
    gl(8).integrate(u - 1.0, 1.0, |t| b(t) * b(u - t))
}

/// ψ(x) = (g(x)/g(0))².
#[inline]
pub fn psi(x: f64) -> f64 {
    let r = g_transform(x) / G0;
    r * r
}

/// ψ̂(u) = 2π(b⋆b)(u)/g(0)².
#[inline]
pub fn psi_hat(u: f64) -> f64 {
    2.0 * PI * b_conv_b(u) / (G0 * G0)
}

/// The mollifier pair with its support and positivity constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierPair {
    /// ψ̂ ≥ c_low on [−tau, tau].
    pub tau: f64,
    pub c_low: f64,
    /// sup ψ̂ = ψ̂(0).
    pub m_psi: f64,
    /// ψ̂ vanishes outside [−support, support].
    pub support: f64,
}

impl MollifierPair {
    pub fn psi(&self, x: f64) -> f64 {
        psi(x)
    }

    pub fn psi_hat(&self, u: f64) -> f64 {
        psi_hat(u)
    }

    /// Columns u, psi_hat over [−2.5, 2.5].
    pub fn profile_csv(&self, samples: usize) -> CsvTable {
        let mut t = CsvTable::new(["u", "psi_hat"]);
        let n = samples.max(2);
        for i in 0..n {
            let u = -2.5 + 5.0 * i as f64 / (n - 1) as f64;
            t.push(vec![u, psi_hat(u)]);
        }
        t
    }
}

/// Builds the concrete pair. ψ̂ is even and non-increasing in |u| (a
/// convolution of two symmetric unimodal functions), so the lower bound on
/// [−τ, τ] is attained at τ.
pub fn build_mollifier() -> MollifierPair {
    let tau = 1.0;
    MollifierPair {
        tau,
        c_low: psi_hat(tau),
        m_psi: psi_hat(0.0),
        support: 2.0,
    }
}

/// ψ̂(0) recomputed as ∫ψ(s)ds by adaptive quadrature on [−R, R]. The tail
/// beyond R is bounded by 2∫_R^∞ (16·4/(g(0)s³))² ds.
pub fn psi_hat_zero_by_direct_quadrature(r: f64) -> Result<(f64, f64)> {
    let mut breaks = vec![0.0];
    let mut x = 0.0;
    while x < r {
        x = (x + 2.0).min(r);
        breaks.push(x);
    }
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-12,
        max_segments: 20_000,
    };
    let half = quadrature::adaptive(psi, &breaks, tol)?;
    let c = 64.0 / G0;
    let tail = 2.0 * c * c / (5.0 * r.powi(5));
    Ok((2.0 * half.value, tail))
}

/// Parameters of a shell kernel ω_λᵉ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub p: LpExponent,
    pub d: usize,
    pub lambda: f64,
    pub epsilon: f64,
}

impl KernelParams {
    pub fn new(p: LpExponent, d: usize, lambda: f64, epsilon: f64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "dimension must be at least 1"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("need lambda > 0, got {lambda}")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(invalid("epsilon", format!("need 0 < epsilon <= 1, got {epsilon}")));
        }
        Ok(Self { p, d, lambda, epsilon })
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.p, self.d, self.lambda, epsilon)
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(self.p, self.d, lambda, self.epsilon)
    }

    /// Largest ‖y/λ‖^p in the kernel support.
    pub fn support_pow(&self) -> f64 {
        1.0 + 2.0 * self.epsilon
    }

    /// Radius of an ℓ^∞ box containing the support.
    pub fn support_radius(&self) -> f64 {
        self.lambda * self.support_pow().powf(1.0 / self.p.value())
    }
}

/// Radial profile of ω_λᵉ in terms of u = ‖y/λ‖^p, without the λ^{−d}
/// factor.
#[inline]
pub fn shell_profile(u: f64, epsilon: f64) -> f64 {
    psi_hat((u - 1.0) / epsilon) / epsilon
}

/// ω_λᵉ(y) = λ^{−d}ε^{−1}ψ̂((‖y/λ‖^p − 1)/ε).
pub fn omega_eps_eval(y: &[f64], params: &KernelParams, _m: &MollifierPair) -> f64 {
    let lam = params.lambda;
    let u = lp_pow(y, params.p.value()) / lam.powf(params.p.value());
    lam.powi(-(params.d as i32)) * shell_profile(u, params.epsilon)
}

/// ω_λ(y), the ε = 1 kernel.
pub fn omega_eval(y: &[f64], params: &KernelParams, m: &MollifierPair) -> f64 {
    let mut q = *params;
    q.epsilon = 1.0;
    omega_eps_eval(y, &q, m)
}

/// ω_λᵉ(y) from its oscillatory-integral definition
/// λ^{−d}∫e^{it(‖y/λ‖^p − 1)}ψ(εt)dt, truncated at |εt| ≤ 400.
pub fn omega_eps_oscillatory(y: &[f64], params: &KernelParams) -> f64 {
    let lam = params.lambda;
    let eps = params.epsilon;
    let u = lp_pow(y, params.p.value()) / lam.powf(params.p.value()) - 1.0;
    let s_max = 400.0;
    // Integrate in s = εt: (1/ε)∫ψ(s)cos(su/ε)ds.
    let w = u.abs() / eps;
    let half = quadrature::composite(
        gl(16),
        &[0.0, s_max],
        |a, b| (((b - a) * (1.0 + w) / PI).ceil() as usize).max(200),
        |s| psi(s) * (s * u / eps).cos(),
    );
    lam.powi(-(params.d as i32)) * 2.0 * half / eps
}

/// The radial variable v = u^{d/p} turns ∫F(‖y‖^p)dy into ν_p∫F(v^{p/d})dv.
fn u_to_v(u: f64, p: f64, d: usize) -> f64 {
    u.max(0.0).powf(d as f64 / p)
}

fn radial_breaks(p: f64, d: usize, u_knots: &[f64], u_max: f64) -> Vec<f64> {
    quadrature::breakpoints(0.0, u_to_v(u_max, p, d), u_knots.iter().map(|u| u_to_v(*u, p, d)))
}

/// ∫ω_λᵉ(y)dy. The value does not depend on λ.
pub fn kernel_total_mass(params: &KernelParams, _m: &MollifierPair) -> Result<f64> {
    let p = params.p.value();
    let d = params.d;
    let eps = params.epsilon;
    let nu = unit_ball_volume(params.p, d, VolumeMethod::ClosedForm)?.value;
    let knots = [1.0 - 2.0 * eps, 1.0, 1.0 + 2.0 * eps];
    let breaks = radial_breaks(p, d, &knots, 1.0 + 2.0 * eps);
    let pd = p / d as f64;
    let out = quadrature::adaptive(|v: f64| shell_profile(v.powf(pd), eps), &breaks, Tolerance::default())?;
    Ok(nu * out.value)
}

/// c₁(ε) = ∫ωᵉ / ∫ω.
pub fn c1_eps(epsilon: f64, p: LpExponent, d: usize, m: &MollifierPair) -> Result<f64> {
    let params = KernelParams::new(p, d, 1.0, epsilon)?;
    if epsilon == 1.0 {
        return Ok(1.0);
    }
    Ok(kernel_total_mass(&params, m)? / kernel_total_mass(&params.with_epsilon(1.0)?, m)?)
}

/// k^ε_λ = ω_λᵉ − c₁(ε)ω_λ, a kernel with vanishing integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancelledKernel {
    pub params: KernelParams,
    pub c1: f64,
}

impl CancelledKernel {
    pub fn new(params: KernelParams, m: &MollifierPair) -> Result<Self> {
        let c1 = c1_eps(params.epsilon, params.p, params.d, m)?;
        Ok(Self { params, c1 })
    }

    /// The same kernel at another radius.
    pub fn at_lambda(&self, lambda: f64) -> Result<Self> {
        Ok(Self {
            params: self.params.with_lambda(lambda)?,
            c1: self.c1,
        })
    }

    /// Radial profile in u = ‖y/λ‖^p, without λ^{−d}.
    #[inline]
    pub fn profile(&self, u: f64) -> f64 {
        if self.params.epsilon == 1.0 {
            return 0.0;
        }
        shell_profile(u, self.params.epsilon) - self.c1 * psi_hat(u - 1.0)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let pv = self.params.p.value();
        let lam = self.params.lambda;
        let u = lp_pow(y, pv) / lam.powf(pv);
        lam.powi(-(self.params.d as i32)) * self.profile(u)
    }

    fn u_knots(&self) -> [f64; 4] {
        let e = self.params.epsilon;
        [1.0 - 2.0 * e, 1.0, 1.0 + 2.0 * e, 3.0]
    }

    /// k̂(η) = ∫k(y)e^{−iy·η}dy for d ≤ 2. The kernel is even and real, so
    /// the transform is real; it is returned as a real number.
    pub fn fourier(&self, eta: &[f64]) -> Result<f64> {
        let d = self.params.d;
        if d > 2 {
            return Err(crate::Error::UnsupportedDimension {
                dim: d,
                reason: "kernel Fourier transform is computed for d <= 2".into(),
            });
        }
        if eta.len() != d {
            return Err(invalid("eta", format!("expected {d} coordinates, got {}", eta.len())));
        }
        if self.params.epsilon == 1.0 {
            return Ok(0.0);
        }
        let lam = self.params.lambda;
        let xi: Vec<f64> = eta.iter().map(|e| e * lam).collect();
        let freq = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let p = self.params.p.value();
        // Angular rule on S₁; fine enough to resolve cos(ρθ·ξ) for ρ ≤ 3^{1/p}.
        let ang: SphereQuadrature = if d == 1 {
            sphere_quadrature(self.params.p, 1, 1.0, 2, QuadratureMode::Deterministic)?
        } else {
            let m = (24.0 + 2.0 * freq).ceil() as usize;
            sphere_quadrature(self.params.p, 2, 1.0, 4 * m, QuadratureMode::Deterministic)?
        };
        let dots: Vec<(f64, f64)> = ang
            .iter()
            .map(|(th, w)| (th.iter().zip(&xi).map(|(a, b)| a * b).sum::<f64>(), w))
            .collect();
        let pd = p / d as f64;
        let inv_d = 1.0 / d as f64;
        let mut breaks = radial_breaks(p, d, &self.u_knots(), 3.0);
        // Geometric grading toward v = 0, where v^{p/d} loses smoothness.
        let v0 = breaks[1];
        let v_max = u_to_v(3.0, p, d);
        breaks.extend((1..40).map(|j| v0 * 0.5f64.powi(j)));
        let breaks = quadrature::breakpoints(0.0, v_max, breaks);
        let integrand = |v: f64| {
            let rho = v.powf(inv_d);
            let ang_sum: f64 = dots.iter().map(|(dot, w)| w * (rho * dot).cos()).sum();
            self.profile(v.powf(pd)) * ang_sum
        };
        let val = quadrature::composite(
            gl(16),
            &breaks,
            // Phase advance of cos(v^{1/d}θ·ξ) across the piece sets the panel count.
            |a, b| ((freq * (b.powf(inv_d) - a.powf(inv_d)) / PI).ceil() as usize).clamp(4, 1 << 20),
            integrand,
        );
        Ok(pd * val)
    }

    /// ∫k computed pointwise by the co-area formula
    /// ∫F = ∫ds s^{d/p−1}∫F(s^{1/p}θ)dσ₁(θ) with an independent angular
    /// rule and adaptive radial quadrature in s.
    pub fn integral_by_coarea(&self, angular_nodes: usize) -> Result<f64> {
        let d = self.params.d;
        let pv = self.params.p.value();
        let lam = self.params.lambda;
        let mode = if d <= 3 {
            QuadratureMode::Deterministic
        } else {
            return Err(crate::Error::UnsupportedDimension {
                dim: d,
                reason: "co-area integral uses deterministic sphere rules (d <= 3)".into(),
            });
        };
        let ang = sphere_quadrature(self.params.p, d, 1.0, angular_nodes, mode)?;
        let mut acc = NeumaierSum::new();
        let e = self.params.epsilon;
        // s = ‖y‖^p ranges over λ^p·[0, 3].
        let lp = lam.powf(pv);
        let breaks: Vec<f64> = [0.0, 1.0 - 2.0 * e, 1.0, 1.0 + 2.0 * e, 3.0]
            .iter()
            .filter(|u| **u >= 0.0)
            .map(|u| u * lp)
            .collect();
        let breaks = quadrature::breakpoints(0.0, 3.0 * lp, breaks);
        let expo = d as f64 / pv - 1.0;
        let mut y = vec![0.0; d];
        for (th, w) in ang.iter() {
            let out = quadrature::adaptive(
                |s: f64| {
                    let r = s.powf(1.0 / pv);
                    for (yi, ti) in y.iter_mut().zip(th) {
                        *yi = r * ti;
                    }
                    s.powf(expo) * self.eval(&y)
                },
                &breaks,
                Tolerance::default(),
            )?;
            acc.add(w * out.value);
        }
        Ok(acc.value())
    }
}

pub fn cancelled_kernel_eval(y: &[f64], params: &KernelParams, m: &MollifierPair) -> Result<f64> {
    Ok(CancelledKernel::new(*params, m)?.eval(y))
}

pub fn kernel_fourier(eta: &[f64], params: &KernelParams, m: &MollifierPair) -> Result<f64> {
    CancelledKernel::new(*params, m)?.fourier(eta)
}

/// Columns r, omega_eps along the first coordinate axis.
pub fn omega_profile_csv(params: &KernelParams, m: &MollifierPair, samples: usize) -> CsvTable {
    let mut t = CsvTable::new(["r", "omega_eps"]);
    let n = samples.max(2);
    let r_max = 1.1 * params.support_radius();
    let mut y = vec![0.0; params.d];
    for i in 0..n {
        let r = r_max * i as f64 / (n - 1) as f64;
        y[0] = r;
        t.push(vec![r, omega_eps_eval(&y, params, m)]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_geometry::sigma_total_mass;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn lp(p: f64) -> LpExponent {
        LpExponent::new(p).unwrap()
    }

    #[test]
    fn g_series_and_closed_form_agree() {
        for x in [0.49, 0.5, 0.51] {
            let closed = 16.0 * ((3.0 - x * x) * f64::sin(x) - 3.0 * x * f64::cos(x)) / f64::powi(x, 5);
            assert!((g_transform(x) - closed).abs() < 1e-9);
        }
        assert_relative_eq!(g_transform(0.0), G0, max_relative = 1e-15);
        // g is the transform of b: compare with direct quadrature.
        for x in [0.3, 2.0, 7.5] {
            let direct = gl(32).integrate(-1.0, 1.0, |t| b(t) * (x * t).cos());
            assert!((g_transform(x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn mollifier_invariants() {
        let m = build_mollifier();
        assert_eq!(psi(0.0), 1.0);
        assert_eq!(psi_hat(2.5), 0.0);
        assert_eq!(psi_hat(-2.5), 0.0);
        assert_relative_eq!(m.m_psi, 10.0 * PI / 7.0, max_relative = 1e-13);
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let u = i as f64 * 0.005;
            let v = psi_hat(u);
            assert!(v >= 0.0 && v <= prev + 1e-15);
            assert_eq!(v, psi_hat(-u));
            prev = v;
            if u <= m.tau {
                assert!(v >= m.c_low);
            }
        }
        for i in 0..200 {
            let x = i as f64 * 0.37;
            let v = psi(x);
            assert!((0.0..=1.0 + 1e-15).contains(&v));
        }
    }

    #[test]
    fn psi_hat_zero_matches_direct_fourier_quadrature() {
        let (direct, tail) = psi_hat_zero_by_direct_quadrature(400.0).unwrap();
        assert!(tail < 1e-9);
        assert!((direct - psi_hat(0.0)).abs() < 1e-6);
    }

    #[test]
    fn omega_examples() {
        let m = build_mollifier();
        let k = KernelParams::new(lp(1.5), 2, 1.0, 0.05).unwrap();
        let on_shell = [1.0, 0.0];
        assert_relative_eq!(omega_eps_eval(&on_shell, &k, &m), psi_hat(0.0) / 0.05, max_relative = 1e-14);
        let out = [(1.0f64 + 3.0 * 0.05).powf(1.0 / 1.5), 0.0];
        assert_eq!(omega_eps_eval(&out, &k, &m), 0.0);
        let k2 = k.with_lambda(2.0).unwrap();
        let mut rng = crate::rng::stream(3, 0);
        for _ in 0..50 {
            let y = [rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5)];
            let half = [y[0] / 2.0, y[1] / 2.0];
            assert_relative_eq!(
                omega_eps_eval(&y, &k2, &m),
                0.25 * omega_eps_eval(&half, &k, &m),
                max_relative = 1e-12,
                epsilon = 1e-300
            );
        }
    }

    #[test]
    fn closed_form_matches_oscillatory_definition() {
        let mut rng = crate::rng::stream(11, 0);
        for d in [1usize, 2] {
            let k = KernelParams::new(lp(1.5), d, 1.0, 0.2).unwrap();
            let m = build_mollifier();
            for _ in 0..10 {
                let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.4..1.4)).collect();
                let a = omega_eps_eval(&y, &k, &m);
                let b = omega_eps_oscillatory(&y, &k);
                assert!((a - b).abs() < 1e-4 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn mass_limits() {
        let m = build_mollifier();
        // ε = 1 gives a positive C_ω.
        let k = KernelParams::new(lp(1.5), 2, 1.0, 1.0).unwrap();
        assert!(kernel_total_mass(&k, &m).unwrap() > 0.0);
        // Small ε: mass approaches 2π times the sphere mass (∫ψ̂ = 2πψ(0)).
        let k = KernelParams::new(lp(2.0), 2, 1.0, 0.005).unwrap();
        let target = 2.0 * PI * sigma_total_mass(lp(2.0), 2).unwrap();
        let mass = kernel_total_mass(&k, &m).unwrap();
        assert!((mass / target - 1.0).abs() < 0.01);
        assert_eq!(c1_eps(1.0, lp(1.5), 2, &m).unwrap(), 1.0);
    }

    #[test]
    fn cancelled_kernel_basics() {
        let m = build_mollifier();
        let k1 = KernelParams::new(lp(1.5), 2, 1.0, 1.0).unwrap();
        assert_eq!(cancelled_kernel_eval(&[0.3, 0.9], &k1, &m).unwrap(), 0.0);
        let k = KernelParams::new(lp(1.5), 2, 1.0, 0.05).unwrap();
        let ck = CancelledKernel::new(k, &m).unwrap();
        assert_eq!(ck.eval(&[1.5, 1.2]), 0.0);
        let mass = kernel_total_mass(&k, &m).unwrap();
        let integral = ck.integral_by_coarea(32).unwrap();
        assert!(integral.abs() < 1e-6 * mass, "{integral}");
    }

    #[test]
    fn fourier_transform_properties() {
        let m = build_mollifier();
        for d in [1usize, 2] {
            let k = KernelParams::new(lp(1.5), d, 2.0, 0.1).unwrap();
            let ck = CancelledKernel::new(k, &m).unwrap();
            let zero = vec![0.0; d];
            assert!(ck.fourier(&zero).unwrap().abs() < 1e-8);
            let mut eta = vec![0.0; d];
            eta[0] = 0.7;
            let plus = ck.fourier(&eta).unwrap();
            let minus = ck.fourier(&eta.iter().map(|e| -e).collect::<Vec<_>>()).unwrap();
            assert!((plus - minus).abs() < 1e-10);
        }
        // d = 1 against a brute-force real-line quadrature of k(y)cos(yη).
        let k = KernelParams::new(lp(3.0), 1, 1.0, 0.2).unwrap();
        let ck = CancelledKernel::new(k, &m).unwrap();
        for eta in [0.5, 3.0, 20.0] {
            let brute = 2.0 * quadrature::composite(gl(16), &[0.0, 1.5], |_, _| 3000, |y| ck.eval(&[y]) * (y * eta).cos());
            let fast = ck.fourier(&[eta]).unwrap();
            assert!((fast - brute).abs() < 1e-8, "eta {eta}: {fast} vs {brute}");
        }
        assert!(ck.at_lambda(2.0).unwrap().fourier(&[1.0, 0.0]).is_err());
    }
}
