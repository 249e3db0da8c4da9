//! ℓᵖ norms, ball volumes, and quadrature rules for the surface measure
//! σ_λ on the sphere S_λ = {‖y‖_p = λ}.
//!
//! σ_λ carries density λ^{p-d} |∇Q|⁻¹ against surface area, Q(y) = ‖y‖_p^p.
//! With that normalization the total mass σ_λ(S_λ) = ν_p·d/p does not
//! depend on λ.

use std::ops::Deref;

use rand::Rng;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::export::CsvTable;
use crate::quadrature::{self, Rule, Tolerance};
use crate::rng;
use crate::sum::NeumaierSum;

/// The metric exponent p ∈ [1, ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpExponent {
    p: f64,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(invalid("p", format!("need finite p >= 1, got {p}")));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.p
    }

    /// True for p = 1 or p = 2, where the progression theorem fails.
    pub fn is_degenerate(self) -> bool {
        self.p == 1.0 || self.p == 2.0
    }

    pub fn require_nondegenerate(self) -> Result<Self> {
        if self.is_degenerate() || self.p <= 1.0 {
            Err(Error::DegenerateExponent(self.p))
        } else {
            Ok(self)
        }
    }

    /// Decay index r(p) = max(p + 1, 2p - 1).
    pub fn r(self) -> f64 {
        (self.p + 1.0).max(2.0 * self.p - 1.0)
    }

    /// γ_p = 1 / (8 r(p)).
    pub fn gamma(self) -> f64 {
        1.0 / (8.0 * self.r())
    }
}

/// A finite point of ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct VecD(Vec<f64>);

impl VecD {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("coords", "dimension must be at least 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coords", "all coordinates must be finite"));
        }
        Ok(Self(coords))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for VecD {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<&[f64]> for VecD {
    fn from(s: &[f64]) -> Self {
        Self(s.to_vec())
    }
}

/// Q(y) = Σ|y_i|^p.
#[inline]
pub fn lp_pow(y: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return y.iter().map(|v| v * v).sum();
    }
    y.iter().map(|v| v.abs().powf(p)).sum()
}

/// ‖y‖_p, evaluated with max-scaling so large and tiny inputs do not
/// overflow or underflow.
pub fn lp_norm(y: &[f64], p: LpExponent) -> f64 {
    let p = p.value();
    let m = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return y.iter().map(|v| v.abs()).sum();
    }
    let s: f64 = y.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// |∇Q(y)| = p·(Σ|y_i|^{2(p-1)})^{1/2}.
pub fn grad_q_magnitude(y: &[f64], p: LpExponent) -> Result<f64> {
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let p = p.value();
    let s: f64 = y.iter().map(|v| v.abs().powf(2.0 * (p - 1.0))).sum();
    Ok(p * s.sqrt())
}

/// How [`unit_ball_volume`] computes ν_p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeMethod {
    /// (2Γ(1 + 1/p))^d / Γ(1 + d/p).
    ClosedForm,
    /// Iterated one-dimensional slicing, ν_d = ν_{d-1}·2∫₀¹(1 - t^p)^{(d-1)/p} dt.
    Slices,
    /// Rejection sampling from [-1, 1]^d.
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    /// Standard error; `None` for deterministic methods.
    pub std_error: Option<f64>,
}

/// Largest dimension for which Monte Carlo volume estimates reach 10⁻³
/// relative accuracy in a practical sample count.
pub const MC_VOLUME_MAX_DIM: usize = 6;

/// ν_p = |{‖y‖_p ≤ 1}| in dimension d.
pub fn unit_ball_volume(p: LpExponent, d: usize, method: VolumeMethod) -> Result<VolumeEstimate> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    let pv = p.value();
    match method {
        VolumeMethod::ClosedForm => Ok(VolumeEstimate {
            value: (2.0 * gamma(1.0 + 1.0 / pv)).powi(d as i32) / gamma(1.0 + d as f64 / pv),
            std_error: None,
        }),
        VolumeMethod::Slices => {
            let mut vol = 2.0;
            for k in 2..=d {
                let expo = (k as f64 - 1.0) / pv;
                let slice = quadrature::adaptive(
                    |t: f64| (1.0 - t.powf(pv)).max(0.0).powf(expo),
                    &[0.0, 0.5, 1.0],
                    Tolerance::default(),
                )?;
                vol *= 2.0 * slice.value;
            }
            Ok(VolumeEstimate { value: vol, std_error: None })
        }
        VolumeMethod::MonteCarlo { samples, seed } => {
            if d > MC_VOLUME_MAX_DIM {
                return Err(Error::UnsupportedDimension {
                    dim: d,
                    reason: format!("Monte Carlo volume limited to d <= {MC_VOLUME_MAX_DIM}"),
                });
            }
            if samples == 0 {
                return Err(invalid("samples", "need at least one sample"));
            }
            let mut rng = rng::stream(seed, 0);
            let mut y = vec![0.0; d];
            let mut hits = 0u64;
            for _ in 0..samples {
                for c in y.iter_mut() {
                    *c = rng.gen_range(-1.0..1.0);
                }
                if lp_pow(&y, pv) <= 1.0 {
                    hits += 1;
                }
            }
            let box_vol = 2f64.powi(d as i32);
            let q = hits as f64 / samples as f64;
            Ok(VolumeEstimate {
                value: box_vol * q,
                std_error: Some(box_vol * (q * (1.0 - q) / samples as f64).sqrt()),
            })
        }
    }
}

/// Node generation strategy for [`sphere_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureMode {
    /// Per-orthant graph parametrization with Gauss–Jacobi weights (d ≤ 3).
    Deterministic,
    /// Uniform samples in the thin shell |Q(y)/λ^p - 1| ≤ width (d ≤ 8).
    ShellMonteCarlo { seed: u64, width: f64 },
}

impl QuadratureMode {
    pub const DEFAULT_SHELL_WIDTH: f64 = 1e-3;

    pub fn shell(seed: u64) -> Self {
        QuadratureMode::ShellMonteCarlo {
            seed,
            width: Self::DEFAULT_SHELL_WIDTH,
        }
    }
}

/// Largest dimension supported by shell Monte Carlo.
pub const SHELL_MC_MAX_DIM: usize = 8;

/// Nodes and weights approximating σ_λ.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    dim: usize,
    nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub p: LpExponent,
    pub mode: QuadratureMode,
    /// Monte Carlo standard error of the total mass.
    pub std_error: Option<f64>,
}

impl SphereQuadrature {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().copied().collect::<NeumaierSum>().value()
    }

    /// ∫ g dσ_λ.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut g: F) -> f64 {
        self.iter().map(|(y, w)| w * g(y)).collect::<NeumaierSum>().value()
    }

    /// Mass per orthant, indexed by [`orthant_of`].
    pub fn orthant_masses(&self) -> Vec<f64> {
        let mut acc = vec![NeumaierSum::new(); 1 << self.dim];
        for (y, w) in self.iter() {
            acc[orthant_of(y)].add(w);
        }
        acc.iter().map(NeumaierSum::value).collect()
    }

    /// Columns y1..yd, weight.
    pub fn to_csv(&self) -> CsvTable {
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("y{i}")).collect();
        header.push("weight".into());
        let mut t = CsvTable::new(header);
        for (y, w) in self.iter() {
            let mut row = y.to_vec();
            row.push(w);
            t.push(row);
        }
        t
    }
}

/// Orthant index: bit i is set when y_i < 0. Zero coordinates count as
/// positive.
pub fn orthant_of(y: &[f64]) -> usize {
    y.iter()
        .enumerate()
        .fold(0, |acc, (i, v)| if *v < 0.0 { acc | (1 << i) } else { acc })
}

/// Builds a quadrature for σ_λ with roughly `n` nodes.
pub fn sphere_quadrature(
    p: LpExponent,
    d: usize,
    lambda: f64,
    n: usize,
    mode: QuadratureMode,
) -> Result<SphereQuadrature> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("need lambda > 0, got {lambda}")));
    }
    if n == 0 {
        return Err(invalid("n", "node budget must be positive"));
    }
    match mode {
        QuadratureMode::Deterministic => deterministic_rule(p, d, lambda, n),
        QuadratureMode::ShellMonteCarlo { seed, width } => shell_rule(p, d, lambda, n, seed, width),
    }
}

/// Positive-orthant rule on S_1 in power coordinates u_i = y_i^p, which lie
/// on the simplex Σu_i = 1. Over the graph y_d = (1 - Σ_{i<d} y_i^p)^{1/p},
/// dS/|∇Q| = dy'/(p·y_d^{p-1}) = p^{-d} Π u_i^{1/p-1} du', so the density
/// becomes a Dirichlet weight integrated exactly by Gauss–Jacobi rules.
fn positive_orthant_rule(p: f64, d: usize, n_orthant: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let a = 1.0 / p - 1.0;
    let scale = p.powi(-(d as i32));
    match d {
        1 => (vec![vec![1.0]], vec![scale]),
        2 => {
            let m = n_orthant.max(1);
            let r = Rule::gauss_jacobi(m, a, a);
            let norm = 2f64.powf(2.0 * a + 1.0);
            let mut pts = Vec::with_capacity(m);
            let mut ws = Vec::with_capacity(m);
            for (x, w) in r.nodes.iter().zip(&r.weights) {
                let s = 0.5 * (1.0 + x);
                pts.push(vec![s.powf(1.0 / p), (1.0 - s).powf(1.0 / p)]);
                ws.push(scale * w / norm);
            }
            (pts, ws)
        }
        3 => {
            let m = ((n_orthant as f64).sqrt().ceil() as usize).max(1);
            // s carries weight s^a (1-s)^{2a+1}; r carries r^a (1-r)^a.
            let rs = Rule::gauss_jacobi(m, 2.0 * a + 1.0, a);
            let rr = Rule::gauss_jacobi(m, a, a);
            let norm_s = 2f64.powf(3.0 * a + 2.0);
            let norm_r = 2f64.powf(2.0 * a + 1.0);
            let mut pts = Vec::with_capacity(m * m);
            let mut ws = Vec::with_capacity(m * m);
            for (xs, wsv) in rs.nodes.iter().zip(&rs.weights) {
                let s = 0.5 * (1.0 + xs);
                for (xr, wrv) in rr.nodes.iter().zip(&rr.weights) {
                    let r = 0.5 * (1.0 + xr);
                    let u = [s, (1.0 - s) * r, (1.0 - s) * (1.0 - r)];
                    pts.push(u.iter().map(|ui| ui.powf(1.0 / p)).collect());
                    ws.push(scale * (wsv / norm_s) * (wrv / norm_r));
                }
            }
            (pts, ws)
        }
        _ => unreachable!(),
    }
}

fn deterministic_rule(p: LpExponent, d: usize, lambda: f64, n: usize) -> Result<SphereQuadrature> {
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: "deterministic sphere quadrature supports d in {1, 2, 3}".into(),
        });
    }
    let pv = p.value();
    let (pts, ws) = positive_orthant_rule(pv, d, (n >> d).max(1));
    // Weights are invariant in λ: λ^{p-d} from the normalization cancels the
    // λ^{d-p} from dS/|∇Q| under y ↦ λy.
    let mut nodes = Vec::with_capacity(pts.len() * d << d);
    let mut weights = Vec::with_capacity(pts.len() << d);
    for orth in 0..(1usize << d) {
        for (u, w) in pts.iter().zip(&ws) {
            for (i, c) in u.iter().enumerate() {
                let sign = if orth & (1 << i) != 0 { -1.0 } else { 1.0 };
                nodes.push(sign * lambda * c);
            }
            weights.push(*w);
        }
    }
    Ok(SphereQuadrature {
        dim: d,
        nodes,
        weights,
        lambda,
        p,
        mode: QuadratureMode::Deterministic,
        std_error: None,
    })
}

fn shell_rule(p: LpExponent, d: usize, lambda: f64, n: usize, seed: u64, width: f64) -> Result<SphereQuadrature> {
    if d == 0 || d > SHELL_MC_MAX_DIM {
        return Err(Error::UnsupportedDimension {
            dim: d,
            reason: format!("shell Monte Carlo supports 1 <= d <= {SHELL_MC_MAX_DIM}"),
        });
    }
    if !(width > 0.0 && width < 1.0) {
        return Err(invalid("width", "shell width must lie in (0, 1)"));
    }
    let pv = p.value();
    let lp = lambda.powf(pv);
    let half_side = lambda * (1.0 + width).powf(1.0 / pv);
    let box_vol = (2.0 * half_side).powi(d as i32);
    let mut rng = rng::stream(seed, lambda.to_bits());
    let mut y = vec![0.0; d];
    let mut nodes = Vec::new();
    for _ in 0..n {
        for c in y.iter_mut() {
            *c = rng.gen_range(-half_side..half_side);
        }
        if (lp_pow(&y, pv) - lp).abs() <= width * lp {
            nodes.extend_from_slice(&y);
        }
    }
    let hits = nodes.len() / d;
    // Co-area: |{|Q - λ^p| ≤ hλ^p}| / (2hλ^p) → ∫_{S_λ} dS/|∇Q|.
    let w = lambda.powf(pv - d as f64) * box_vol / (n as f64 * 2.0 * width * lp);
    let q = hits as f64 / n as f64;
    let se = w * (n as f64 * q * (1.0 - q)).sqrt();
    Ok(SphereQuadrature {
        dim: d,
        nodes,
        weights: vec![w; hits],
        lambda,
        p,
        mode: QuadratureMode::ShellMonteCarlo { seed, width },
        std_error: Some(se),
    })
}

/// Exact total mass σ_λ(S_λ) = ν_p·d/p.
pub fn sigma_total_mass(p: LpExponent, d: usize) -> Result<f64> {
    let nu = unit_ball_volume(p, d, VolumeMethod::ClosedForm)?.value;
    Ok(nu * d as f64 / p.value())
}

/// Masses of σ_λ for several radii.
#[derive(Debug, Clone, PartialEq)]
pub struct MassReport {
    pub lambdas: Vec<f64>,
    pub masses: Vec<f64>,
    pub std_errors: Vec<Option<f64>>,
    /// max_{i,j} |m_i - m_j| / max(|m_i|, |m_j|).
    pub max_rel_deviation: f64,
}

pub fn sigma_mass_invariance(
    p: LpExponent,
    d: usize,
    lambdas: &[f64],
    n: usize,
    mode: QuadratureMode,
) -> Result<MassReport> {
    let mut masses = Vec::with_capacity(lambdas.len());
    let mut ses = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let q = sphere_quadrature(p, d, lam, n, mode)?;
        masses.push(q.total_mass());
        ses.push(q.std_error);
    }
    let mut dev = 0.0f64;
    for i in 0..masses.len() {
        for j in (i + 1)..masses.len() {
            let scale = masses[i].abs().max(masses[j].abs());
            if scale > 0.0 {
                dev = dev.max((masses[i] - masses[j]).abs() / scale);
            }
        }
    }
    Ok(MassReport {
        lambdas: lambdas.to_vec(),
        masses,
        std_errors: ses,
        max_rel_deviation: dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn lp(p: f64) -> LpExponent {
        LpExponent::new(p).unwrap()
    }

    #[test]
    fn norm_examples() {
        assert_relative_eq!(lp_norm(&[3.0, 4.0], lp(2.0)), 5.0, max_relative = 1e-15);
        assert_relative_eq!(lp_norm(&[1.0; 8], lp(3.0)), 2.0, max_relative = 1e-15);
        // (1 + 2^{1.5})^{2/3}
        assert_relative_eq!(lp_norm(&[1.0, -2.0], lp(1.5)), 2.447_260_814_771_475_6, max_relative = 1e-12);
    }

    #[test]
    fn gradient_examples() {
        assert_relative_eq!(grad_q_magnitude(&[3.0, 4.0], lp(2.0)).unwrap(), 10.0, max_relative = 1e-15);
        assert_relative_eq!(grad_q_magnitude(&[1.0, 1.0], lp(4.0)).unwrap(), 4.0 * 2f64.sqrt(), max_relative = 1e-15);
        // 1.5 * sqrt(1 + 0.5)
        assert_relative_eq!(grad_q_magnitude(&[1.0, 0.5], lp(1.5)).unwrap(), 1.837_117_307_087_383_7, max_relative = 1e-12);
        assert_eq!(grad_q_magnitude(&[0.0, 0.0], lp(1.5)), Err(Error::ZeroVector));
    }

    #[test]
    fn exponent_validation_and_rates() {
        assert!(LpExponent::new(0.5).is_err());
        assert!(LpExponent::new(f64::INFINITY).is_err());
        assert!(lp(2.0).is_degenerate());
        assert!(lp(1.0).require_nondegenerate().is_err());
        assert_eq!(lp(1.5).r(), 2.5);
        assert_eq!(lp(3.0).r(), 5.0);
        assert_relative_eq!(lp(3.0).gamma(), 1.0 / 40.0);
    }

    #[test]
    fn ball_volumes() {
        let v = |p: f64, d, m| unit_ball_volume(lp(p), d, m).unwrap().value;
        assert_relative_eq!(v(2.0, 2, VolumeMethod::ClosedForm), PI, max_relative = 1e-14);
        assert_relative_eq!(v(1.0, 2, VolumeMethod::ClosedForm), 2.0, max_relative = 1e-14);
        for &(p, d) in &[(1.5, 2), (3.0, 3), (1.25, 4)] {
            assert_relative_eq!(v(p, d, VolumeMethod::Slices), v(p, d, VolumeMethod::ClosedForm), max_relative = 1e-8);
        }
        let err = unit_ball_volume(lp(1.5), 7, VolumeMethod::MonteCarlo { samples: 10, seed: 1 });
        assert!(matches!(err, Err(Error::UnsupportedDimension { .. })));
    }

    #[test]
    fn deterministic_sphere_masses_are_exact() {
        // p = 2, d = 2: density 1/2 on the unit circle times 2π.
        let q = sphere_quadrature(lp(2.0), 2, 1.0, 64, QuadratureMode::Deterministic).unwrap();
        assert_relative_eq!(q.total_mass(), PI, max_relative = 1e-12);
        let q3 = sphere_quadrature(lp(2.0), 2, 3.0, 64, QuadratureMode::Deterministic).unwrap();
        assert!((q3.total_mass() - PI).abs() < 1e-6);
        for &(p, d) in &[(1.5, 1), (1.5, 2), (3.0, 2), (1.5, 3), (4.0, 3)] {
            let q = sphere_quadrature(lp(p), d, 2.0, 200, QuadratureMode::Deterministic).unwrap();
            assert_relative_eq!(q.total_mass(), sigma_total_mass(lp(p), d).unwrap(), max_relative = 1e-11);
            for (y, _) in q.iter() {
                assert!((lp_norm(y, lp(p)) - 2.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn deterministic_rule_integrates_smooth_functions() {
        // ∫ y1² dσ₁ on the Euclidean circle: (1/2)∫cos²θ dθ = π/2.
        let q = sphere_quadrature(lp(2.0), 2, 1.0, 128, QuadratureMode::Deterministic).unwrap();
        assert_relative_eq!(q.integrate(|y| y[0] * y[0]), PI / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn orthant_masses_are_equal() {
        let q = sphere_quadrature(lp(1.5), 3, 1.0, 400, QuadratureMode::Deterministic).unwrap();
        let total = q.total_mass();
        for m in q.orthant_masses() {
            assert_relative_eq!(m, total / 8.0, max_relative = 1e-12);
        }
        assert_eq!(orthant_of(&[0.0, -1.0]), 2);
        assert_eq!(orthant_of(&[-0.0, 1.0]), 0);
    }

    #[test]
    fn unsupported_mode_is_rejected() {
        assert!(sphere_quadrature(lp(1.5), 4, 1.0, 10, QuadratureMode::Deterministic).is_err());
        assert!(sphere_quadrature(lp(1.5), 9, 1.0, 10, QuadratureMode::shell(1)).is_err());
    }

    #[test]
    fn mass_invariance_report() {
        let r = sigma_mass_invariance(lp(2.0), 2, &[1.0, 2.0, 4.0], 64, QuadratureMode::Deterministic).unwrap();
        assert!(r.max_rel_deviation < 1e-6);
        for m in &r.masses {
            assert!((m - PI).abs() < 1e-6);
        }
        let r = sigma_mass_invariance(lp(3.0), 2, &[1.0, 2.0], 400, QuadratureMode::Deterministic).unwrap();
        assert!(r.max_rel_deviation < 1e-4);
    }
}
