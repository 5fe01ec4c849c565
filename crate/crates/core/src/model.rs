//! Problem parameters, the closed-form constants and ground function of the
//! Hardy-potential oscillator on the corner ℝ^{N−k}×(0,∞)^k, and the
//! self-similar change of variables.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::gamma;

/// The problem triple (N, k, λ) with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerParams {
    dim: usize,
    corner: usize,
    lambda: f64,
    hardy: f64,
    m: f64,
}

impl CornerParams {
    pub fn new(dim: usize, corner: usize, lambda: f64) -> Result<Self> {
        let hardy = hardy_constant(dim, corner)?;
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda must be finite, got {lambda}")));
        }
        if lambda > hardy {
            return Err(Error::Supercritical { lambda, hardy });
        }
        Ok(Self {
            dim,
            corner,
            lambda,
            hardy,
            m: (hardy - lambda).sqrt(),
        })
    }

    /// λ = λ_{N,k}, the critical strength (m = 0).
    pub fn critical(dim: usize, corner: usize) -> Result<Self> {
        Self::new(dim, corner, hardy_constant(dim, corner)?)
    }

    /// λ = fraction · λ_{N,k}.
    pub fn with_fraction(dim: usize, corner: usize, fraction: f64) -> Result<Self> {
        Self::new(dim, corner, fraction * hardy_constant(dim, corner)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn corner(&self) -> usize {
        self.corner
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// λ_{N,k}
    pub fn hardy_constant(&self) -> f64 {
        self.hardy
    }

    /// m_λ = √(λ_{N,k} − λ)
    pub fn m(&self) -> f64 {
        self.m
    }

    /// The sharp constant (1 + m_λ)/2: first eigenvalue and optimal decay exponent.
    pub fn ground_eigenvalue(&self) -> f64 {
        0.5 * (1.0 + self.m)
    }

    /// Exponent of r in the radial factor of α: m_λ − (N−2)/2.
    pub fn radial_exponent(&self) -> f64 {
        self.m - 0.5 * (self.dim as f64 - 2.0)
    }

    /// k(N−2+k), minus the spherical-Laplacian eigenvalue of f_{N,k}.
    pub fn angular_eigenvalue(&self) -> f64 {
        let k = self.corner as f64;
        k * (self.dim as f64 - 2.0 + k)
    }

    /// ω_{N,k}/2^k: the angular integral of f_{N,k}² over the corner part of the sphere.
    pub fn sector_weight(&self) -> f64 {
        sector_weight(self.dim, self.corner)
    }

    /// Frobenius exponent m_λ + 1/2 of the Liouville-form radial function at r = 0.
    pub fn liouville_exponent(&self) -> f64 {
        self.m + 0.5
    }

    /// Radial factor φ(r) = e^{−r²/8} r^{m−(N−2)/2} of α_{k,λ}.
    pub fn alpha_radial(&self, r: f64) -> f64 {
        (-r * r / 8.0).exp() * r.powf(self.radial_exponent())
    }

    /// φ'(r)/φ(r) = −r/4 + p/r with p = m − (N−2)/2.
    pub fn alpha_radial_log_slope(&self, r: f64) -> f64 {
        -0.25 * r + self.radial_exponent() / r
    }

    /// φ''(r)/φ(r) = r²/16 − (2m − N + 3)/4 + p(p − 1)/r².
    pub fn alpha_radial_curvature_ratio(&self, r: f64) -> f64 {
        let p = self.radial_exponent();
        let n = self.dim as f64;
        r * r / 16.0 - (2.0 * self.m - n + 3.0) / 4.0 + p * (p - 1.0) / (r * r)
    }

    pub fn alpha_radial_deriv(&self, r: f64) -> f64 {
        self.alpha_radial(r) * self.alpha_radial_log_slope(r)
    }
}

/// λ_{N,k} = ((N−2)/2 + k)².
pub fn hardy_constant(dim: usize, corner: usize) -> Result<f64> {
    validate_dims(dim, corner)?;
    let base = 0.5 * (dim as f64 - 2.0) + corner as f64;
    Ok(base * base)
}

/// m_λ = √(λ_{N,k} − λ); the constructor already rejects λ > λ_{N,k}.
pub fn criticality_index(p: &CornerParams) -> f64 {
    p.m()
}

fn validate_dims(dim: usize, corner: usize) -> Result<()> {
    if dim < 2 || corner > dim {
        return Err(Error::InvalidDimension { dim, corner });
    }
    Ok(())
}

/// f_{N,k}(σ) = σ_{N−k+1}···σ_N for a unit vector σ.
pub fn angular_factor(corner: usize, sigma: &[f64]) -> f64 {
    sigma[sigma.len() - corner..].iter().product()
}

/// α_{k,λ}(x) = e^{−|x|²/8} |x|^{m−(N−2)/2} x_{N−k+1}···x_N / |x|^k.
///
/// Boundary points (some constrained coordinate equal to 0, x ≠ 0) evaluate
/// to 0. At the origin the value is the continuous limit when one exists.
pub fn alpha_eval(p: &CornerParams, x: &[f64]) -> Result<f64> {
    if x.len() != p.dim() {
        return Err(Error::PointDimension {
            expected: p.dim(),
            got: x.len(),
        });
    }
    let first_constrained = p.dim() - p.corner();
    for (i, &xi) in x.iter().enumerate().skip(first_constrained) {
        if xi < 0.0 {
            return Err(Error::OutsideCorner { index: i, value: xi });
        }
    }
    let r = norm(x);
    if r == 0.0 {
        let exponent = p.radial_exponent();
        return if exponent > 0.0 {
            Ok(0.0)
        } else if exponent == 0.0 && p.corner() == 0 {
            Ok(1.0)
        } else {
            Err(Error::Singular(format!(
                "radial exponent m - (N-2)/2 = {exponent} leaves no limit at x = 0"
            )))
        };
    }
    let product: f64 = x[first_constrained..].iter().map(|xi| xi / r).product();
    Ok(p.alpha_radial(r) * product)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// (t, x) ↦ (s, y) = (ln(t+1), x/√(t+1)).
pub fn sst_forward(t: f64, x: &[f64]) -> (f64, Vec<f64>) {
    debug_assert!(t >= 0.0);
    let scale = (t + 1.0).sqrt();
    (t.ln_1p(), x.iter().map(|xi| xi / scale).collect())
}

/// (s, y) ↦ (t, x) = (e^s − 1, e^{s/2} y).
pub fn sst_inverse(s: f64, y: &[f64]) -> (f64, Vec<f64>) {
    let scale = (0.5 * s).exp();
    (s.exp_m1(), y.iter().map(|yi| yi * scale).collect())
}

/// w(s, y) = e^{Ns/4} u(t, x) at (s, y) = sst_forward(t, x). Preserves the L² norm.
pub fn w_from_u(u_value: f64, t: f64, dim: usize) -> f64 {
    let s = t.ln_1p();
    (dim as f64 * s / 4.0).exp() * u_value
}

/// v(s, y) = K^{1/2}(y) e^{Ns/4} u(t, x) with K(y) = e^{|y|²/4}.
pub fn v_from_u(u_value: f64, t: f64, x: &[f64], dim: usize) -> f64 {
    let (_, y) = sst_forward(t, x);
    let y2: f64 = y.iter().map(|v| v * v).sum();
    (y2 / 8.0).exp() * w_from_u(u_value, t, dim)
}

/// Inverse of [`v_from_u`]: u(t, x) from v(s, y).
pub fn u_from_v(v_value: f64, s: f64, y: &[f64], dim: usize) -> f64 {
    let y2: f64 = y.iter().map(|v| v * v).sum();
    (-y2 / 8.0 - dim as f64 * s / 4.0).exp() * v_value
}

/// ω_{N,k} = ∫_{S^{N−1}} σ_{N−k+1}²···σ_N² dσ = 2π^{N/2} / (2^k Γ(N/2 + k)).
pub fn omega_nk(dim: usize, corner: usize) -> Result<f64> {
    validate_dims(dim, corner)?;
    let n = dim as f64;
    let k = corner as f64;
    Ok(2.0 * PI.powf(0.5 * n) / (2f64.powi(corner as i32) * gamma(0.5 * n + k)))
}

/// ω_{N,k}/2^k, the angular weight of a separated function's squared norm.
pub fn sector_weight(dim: usize, corner: usize) -> f64 {
    omega_nk(dim, corner).expect("validated by caller") / 2f64.powi(corner as i32)
}

/// ∫₀^∞ e^{−r²/4} r^{2m+1} dr = 2^{2m+1} Γ(m+1).
pub fn gaussian_moment(m: f64) -> f64 {
    2f64.powf(2.0 * m + 1.0) * gamma(m + 1.0)
}

/// ‖α_{k,λ}‖²_{L²(corner)} = (ω_{N,k}/2^k) 2^{2m+1} Γ(m+1).
pub fn alpha_l2_norm_sq(p: &CornerParams) -> f64 {
    p.sector_weight() * gaussian_moment(p.m())
}

/// Prefactors multiplying ∫u₀|x|^{m−N/2}x_N dx in the half-space (k = 1)
/// β formula: `(from ‖α‖^{-1}, closed form √N/(2^m √Γ(m+1)))`.
///
/// The first is 1/‖α_{1,λ}‖ evaluated from the norm formula; the second is
/// √N / (2^m √Γ(m+1)). They differ; both are reported rather than reconciled.
pub fn half_space_beta_prefactors(dim: usize, m: f64) -> Result<(f64, f64)> {
    validate_dims(dim, 1)?;
    let from_norm = 1.0 / (sector_weight(dim, 1) * gaussian_moment(m)).sqrt();
    let printed = (dim as f64).sqrt() / (2f64.powf(m) * gamma(m + 1.0).sqrt());
    Ok((from_norm, printed))
}

/// A function u(x) = φ(|x|) f_{N,k}(x/|x|) in the single angular sector
/// spanned by f_{N,k}, stored as samples of φ and φ' on radial nodes.
#[derive(Debug, Clone)]
pub struct SeparatedFunction {
    params: CornerParams,
    nodes: Vec<f64>,
    value: Vec<f64>,
    slope: Vec<f64>,
}

impl SeparatedFunction {
    /// Samples an analytic profile and its derivative.
    pub fn from_fn(
        params: CornerParams,
        nodes: &[f64],
        phi: impl Fn(f64) -> f64,
        dphi: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        check_nodes(nodes)?;
        Ok(Self {
            params,
            nodes: nodes.to_vec(),
            value: nodes.iter().map(|&r| phi(r)).collect(),
            slope: nodes.iter().map(|&r| dphi(r)).collect(),
        })
    }

    /// From profile samples alone; φ' by three-point differences on the nodes.
    pub fn from_samples(params: CornerParams, nodes: &[f64], values: &[f64]) -> Result<Self> {
        check_nodes(nodes)?;
        if values.len() != nodes.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                nodes.len()
            )));
        }
        let slope = nonuniform_derivative(nodes, values);
        Ok(Self {
            params,
            nodes: nodes.to_vec(),
            value: values.to_vec(),
            slope,
        })
    }

    /// From explicit samples of φ and φ'.
    pub fn from_parts(params: CornerParams, nodes: Vec<f64>, value: Vec<f64>, slope: Vec<f64>) -> Result<Self> {
        check_nodes(&nodes)?;
        if value.len() != nodes.len() || slope.len() != nodes.len() {
            return Err(Error::GridMismatch("profile length differs from node count".into()));
        }
        Ok(Self {
            params,
            nodes,
            value,
            slope,
        })
    }

    pub fn params(&self) -> &CornerParams {
        &self.params
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.value
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slope
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            params: self.params,
            nodes: self.nodes.clone(),
            value: self.value.iter().map(|v| v * factor).collect(),
            slope: self.slope.iter().map(|v| v * factor).collect(),
        }
    }

    /// Pointwise value u(x) by linear interpolation of φ, for x inside the node range.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.params.dim() {
            return Err(Error::PointDimension {
                expected: self.params.dim(),
                got: x.len(),
            });
        }
        let r = norm(x);
        let (lo, hi) = (self.nodes[0], *self.nodes.last().expect("non-empty"));
        if r < lo || r > hi {
            return Ok(0.0);
        }
        let j = self.nodes.partition_point(|&v| v <= r).clamp(1, self.nodes.len() - 1);
        let (r0, r1) = (self.nodes[j - 1], self.nodes[j]);
        let t = (r - r0) / (r1 - r0);
        let phi = (1.0 - t) * self.value[j - 1] + t * self.value[j];
        let sigma: Vec<f64> = x.iter().map(|v| v / r).collect();
        Ok(phi * angular_factor(self.params.corner(), &sigma))
    }

    /// ‖u‖² = (ω_{N,k}/2^k) ∫ φ² r^{N−1} dr.
    pub fn l2_norm_sq(&self) -> f64 {
        let d = self.params.dim() as i32 - 1;
        self.params.sector_weight() * quadrature::trapezoid_fn(&self.nodes, |j, r| self.value[j].powi(2) * r.powi(d))
    }
}

fn check_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.len() < 3 {
        return Err(Error::InvalidGrid("need at least 3 radial nodes".into()));
    }
    if nodes[0] < 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "radial nodes must be non-negative and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn nonuniform_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        let h0 = x[j] - x[j - 1];
        let h1 = x[j + 1] - x[j];
        d[j] =
            (-h1 / (h0 * (h0 + h1))) * f[j - 1] + ((h1 - h0) / (h0 * h1)) * f[j] + (h0 / (h1 * (h0 + h1))) * f[j + 1];
    }
    d[0] = (f[1] - f[0]) / (x[1] - x[0]);
    d[n - 1] = (f[n - 1] - f[n - 2]) / (x[n - 1] - x[n - 2]);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_gk;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hardy_constant_values() {
        assert_eq!(hardy_constant(3, 1).unwrap(), 2.25);
        assert_eq!(hardy_constant(2, 0).unwrap(), 0.0);
        assert_eq!(hardy_constant(3, 0).unwrap(), 0.25);
        assert!(matches!(hardy_constant(1, 0), Err(Error::InvalidDimension { .. })));
        assert!(matches!(hardy_constant(3, 4), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn hardy_constant_shift_identity_and_monotonicity() {
        for n in 2..9 {
            for k in 1..=n {
                assert_eq!(hardy_constant(n, k).unwrap(), hardy_constant(n + 2, k - 1).unwrap());
                assert!(hardy_constant(n, k).unwrap() > hardy_constant(n, k - 1).unwrap());
            }
        }
    }

    #[test]
    fn criticality_index_examples() {
        assert_eq!(criticality_index(&CornerParams::new(3, 1, 2.25).unwrap()), 0.0);
        let p = CornerParams::new(3, 0, 0.0).unwrap();
        assert_eq!(criticality_index(&p), hardy_constant(3, 0).unwrap().sqrt());
        assert_eq!(criticality_index(&p), 0.5);
        assert_eq!(criticality_index(&CornerParams::new(4, 1, 0.0).unwrap()), 2.0);
        assert!(matches!(
            CornerParams::new(3, 1, 2.26),
            Err(Error::Supercritical { .. })
        ));
    }

    #[test]
    fn alpha_examples() {
        let p = CornerParams::new(2, 0, 0.0).unwrap();
        let v = alpha_eval(&p, &[1.0, 0.0]).unwrap();
        assert_relative_eq!(v, (-0.125f64).exp(), max_relative = 1e-15);
        assert!((v - 0.8825).abs() < 1e-4);

        let p = CornerParams::critical(3, 1).unwrap();
        let v = alpha_eval(&p, &[0.0, 0.0, 2.0]).unwrap();
        assert_relative_eq!(v, (-0.5f64).exp() / 2f64.sqrt(), max_relative = 1e-15);
        assert!((v - 0.4289).abs() < 1e-4);
    }

    #[test]
    fn alpha_boundary_and_origin() {
        let p = CornerParams::new(3, 2, 1.0).unwrap();
        assert_eq!(alpha_eval(&p, &[0.3, 0.7, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            alpha_eval(&p, &[0.3, -0.1, 0.2]),
            Err(Error::OutsideCorner { index: 1, .. })
        ));
        assert!(matches!(alpha_eval(&p, &[0.3, 0.1]), Err(Error::PointDimension { .. })));
        // m − (N−2)/2 = √(6.25−1) − 0.5 > 0: continuous extension by 0.
        assert_eq!(alpha_eval(&p, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        // critical N=4, k=1: exponent −1, singular.
        let p = CornerParams::critical(4, 1).unwrap();
        assert!(matches!(alpha_eval(&p, &[0.0; 4]), Err(Error::Singular(_))));
        // whole plane, λ = 0: α(0) = 1.
        let p = CornerParams::new(2, 0, 0.0).unwrap();
        assert_eq!(alpha_eval(&p, &[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn sst_examples() {
        let x = [0.3, -1.2, 2.0];
        let (s, y) = sst_forward(0.0, &x);
        assert_eq!(s, 0.0);
        assert_eq!(y, x.to_vec());
        let (s, y) = sst_forward(std::f64::consts::E - 1.0, &[0.0, 0.0]);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn v_from_u_at_time_zero_and_linearity() {
        let x = [0.4, 1.1];
        let u0 = 0.37;
        assert_relative_eq!(
            v_from_u(u0, 0.0, &x, 2),
            (1.37f64 / 8.0).exp() * u0,
            max_relative = 1e-15
        );
        assert_eq!(v_from_u(0.0, 3.0, &x, 2), 0.0);
    }

    #[test]
    fn self_similar_solution_maps_to_decaying_ground_state() {
        // u(t,x) = (t+1)^{−μ0−N/4} u0(x/√(t+1)), u0 = e^{−|x|²/8} α ⇒ v(s,y) = e^{−μ0 s} α(y).
        let p = CornerParams::new(3, 1, 1.0).unwrap();
        let mu0 = p.ground_eigenvalue();
        let u0 = |x: &[f64]| (-norm(x).powi(2) / 8.0).exp() * alpha_eval(&p, x).unwrap();
        for &(t, x) in &[
            (0.5, [0.2, -0.4, 0.9]),
            (7.0, [1.5, 2.0, 0.3]),
            (120.0, [-3.0, 4.0, 8.0]),
        ] {
            let (s, y) = sst_forward(t, &x);
            let scaled: Vec<f64> = x.iter().map(|v| v / (t + 1.0f64).sqrt()).collect();
            let u = (t + 1.0f64).powf(-mu0 - 0.75) * u0(&scaled);
            let v = v_from_u(u, t, &x, 3);
            let expected = (-mu0 * s).exp() * alpha_eval(&p, &y).unwrap();
            assert_relative_eq!(v, expected, max_relative = 1e-12);
            assert_relative_eq!(u_from_v(v, s, &y, 3), u, max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn sst_roundtrip(t in 0.0f64..1e4, x in proptest::collection::vec(-50.0f64..50.0, 2..6)) {
            let (s, y) = sst_forward(t, &x);
            let (t2, x2) = sst_inverse(s, &y);
            prop_assert!((t2 - t).abs() <= 1e-12 * t.max(1.0));
            for (a, b) in x.iter().zip(&x2) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }

        #[test]
        fn alpha_positive_in_open_corner(
            n in 2usize..6,
            kfrac in 0.0f64..1.0,
            lfrac in -1.0f64..1.0,
            raw in proptest::collection::vec(0.01f64..4.0, 6),
            signs in proptest::collection::vec(proptest::bool::ANY, 6),
        ) {
            let k = ((n + 1) as f64 * kfrac) as usize;
            let k = k.min(n);
            let p = CornerParams::with_fraction(n, k, lfrac).unwrap();
            let x: Vec<f64> = (0..n)
                .map(|i| if i < n - k && signs[i] { -raw[i] } else { raw[i] })
                .collect();
            let v = alpha_eval(&p, &x).unwrap();
            prop_assert!(v > 0.0);
        }
    }

    #[test]
    fn omega_examples() {
        assert_relative_eq!(omega_nk(2, 0).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(omega_nk(3, 0).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(omega_nk(3, 1).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-14);
        // ∫ cos²θ sin²θ dθ over the circle = π/4
        assert_relative_eq!(omega_nk(2, 2).unwrap(), PI / 4.0, max_relative = 1e-14);
        assert!(omega_nk(1, 0).is_err());
    }

    #[test]
    fn alpha_norm_examples() {
        for &(n, k) in &[(2, 0), (3, 1), (4, 2), (2, 2)] {
            let p = CornerParams::critical(n, k).unwrap();
            let expected = omega_nk(n, k).unwrap() / 2f64.powi(k as i32 - 1);
            assert_relative_eq!(alpha_l2_norm_sq(&p), expected, max_relative = 1e-13);
        }
        let p = CornerParams::new(3, 0, 0.0).unwrap();
        assert_relative_eq!(alpha_l2_norm_sq(&p), 8.0 * PI.powf(1.5), max_relative = 1e-13);
        assert!((alpha_l2_norm_sq(&p) - 44.546).abs() < 1e-3);
    }

    #[test]
    fn gaussian_moment_matches_adaptive_quadrature() {
        for &m in &[0.0, 0.5, 1.0, 2.3] {
            let quad = adaptive_gk(
                |r| (-r * r / 4.0).exp() * r.powf(2.0 * m + 1.0),
                0.0,
                60.0,
                1e-15,
                1e-14,
            );
            assert_relative_eq!(gaussian_moment(m), quad, max_relative = 1e-10);
        }
    }

    #[test]
    fn separated_norm_of_alpha_matches_closed_form() {
        let p = CornerParams::new(4, 1, 2.0).unwrap();
        let nodes: Vec<f64> = (1..=60000).map(|j| j as f64 * 6e-4).collect();
        let u = SeparatedFunction::from_fn(p, &nodes, |r| p.alpha_radial(r), |r| p.alpha_radial_deriv(r)).unwrap();
        assert_relative_eq!(u.l2_norm_sq(), alpha_l2_norm_sq(&p), max_relative = 1e-6);
        // pointwise evaluation agrees with α
        let x = [0.3, -0.5, 0.2, 1.1];
        assert_relative_eq!(u.eval(&x).unwrap(), alpha_eval(&p, &x).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn w_map_preserves_norm_of_separated_functions() {
        // u(t, x) = φ(|x|) f(σ), w(s, y) = e^{Ns/4} u(t, e^{s/2} y): compare ‖w(s)‖ and ‖u(t)‖.
        let p = CornerParams::new(3, 1, 0.5).unwrap();
        let phi = |r: f64| r * r * (-r * r / 3.0).exp() * (1.0 + 0.3 * r.sin());
        let t = 4.5;
        let scale = (t + 1.0f64).sqrt();
        let x_nodes: Vec<f64> = (0..=40000).map(|j| j as f64 * 5e-4).collect();
        let y_nodes: Vec<f64> = x_nodes.iter().map(|r| r / scale).collect();
        let u =
            SeparatedFunction::from_samples(p, &x_nodes, &x_nodes.iter().map(|&r| phi(r)).collect::<Vec<_>>()).unwrap();
        let w_vals: Vec<f64> = x_nodes.iter().map(|&r| w_from_u(phi(r), t, 3)).collect();
        let w = SeparatedFunction::from_samples(p, &y_nodes, &w_vals).unwrap();
        assert_relative_eq!(w.l2_norm_sq(), u.l2_norm_sq(), max_relative = 1e-8);
    }

    #[test]
    fn half_space_prefactors_are_reported_not_reconciled() {
        // ratio printed/from_norm = √N π^{N/4} / √Γ(N/2+1), computed independently
        for &(n, m) in &[(2usize, 0.0), (3, 0.5), (4, 1.3)] {
            let (from_norm, printed) = half_space_beta_prefactors(n, m).unwrap();
            let nn = n as f64;
            let ratio = nn.sqrt() * PI.powf(nn / 4.0) / gamma(nn / 2.0 + 1.0).sqrt();
            assert_relative_eq!(printed / from_norm, ratio, max_relative = 1e-12);
        }
    }
}
