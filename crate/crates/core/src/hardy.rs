//! The improved Hardy–Poincaré inequality on the f_{N,k} sector: quadratic
//! form and Rayleigh quotient, the ground-state substitution identity, and
//! the mollified logarithmic cutoffs Λ_ε = α ψ_ε that make the constant sharp.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CornerParams, SeparatedFunction};
use crate::quadrature::{adaptive_gk, trapezoid_fn};

/// Nodes of the logarithmic part of the cutoff grid.
pub const CUTOFF_LOG_NODES: usize = 200_000;
/// Uniform nodes added across each kink of η (±2ε⁴).
const KINK_NODES: usize = 400;
/// Nodes of the reference mollifier grid on [−1, 1].
const MOLLIFIER_NODES: usize = 2001;

fn bump(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - z * z)).exp()
    }
}

/// The standard bump ρ(z) = c·exp(−1/(1−z²)) on (−1, 1), sampled and normalized.
#[derive(Debug, Clone)]
pub struct Mollifier {
    /// ρ at the reference nodes z_i = −1 + 2i/(M−1).
    pub samples: Vec<f64>,
    /// Trapezoid mass of `samples`.
    pub mass: f64,
    /// c in ρ = c·exp(−1/(1−z²)).
    normalization: f64,
    /// Even moments ∫ z^{2j} ρ(z) dz, j = 0, 1, ...
    even_moments: Vec<f64>,
}

impl Mollifier {
    pub fn new() -> Self {
        let raw_mass = adaptive_gk(bump, -1.0, 1.0, 1e-16, 1e-15);
        let c = 1.0 / raw_mass;
        let dz = 2.0 / (MOLLIFIER_NODES - 1) as f64;
        let samples: Vec<f64> = (0..MOLLIFIER_NODES).map(|i| c * bump(-1.0 + i as f64 * dz)).collect();
        let mass =
            crate::quadrature::trapezoid_fn(&(0..MOLLIFIER_NODES).map(Self::node).collect::<Vec<_>>(), |i, _| {
                samples[i]
            });
        let even_moments = (0..8)
            .map(|j| c * adaptive_gk(|z| z.powi(2 * j) * bump(z), -1.0, 1.0, 1e-17, 1e-14))
            .collect();
        Self {
            samples,
            mass,
            normalization: c,
            even_moments,
        }
    }

    fn node(i: usize) -> f64 {
        -1.0 + 2.0 * i as f64 / (MOLLIFIER_NODES - 1) as f64
    }
}

impl Default for Mollifier {
    fn default() -> Self {
        Self::new()
    }
}

/// The logarithmic cutoff η_ε, its mollification ψ_ε = η_ε ∗ ρ_ε (ρ_ε(r) = ε^{−4}ρ(r/ε⁴)),
/// and ψ_ε' sampled on a log grid over [ε²/2, 2ε^{−2}] refined across the kinks.
#[derive(Debug, Clone)]
pub struct CutoffSequence {
    pub epsilon: f64,
    pub nodes: Vec<f64>,
    pub eta: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub rho: Mollifier,
}

/// Pieces of η_ε, split at the kinks ε², ε, 1/ε, 1/ε².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Zero,
    Log,
    One,
    Linear,
}

#[derive(Debug, Clone, Copy)]
struct Eta {
    eps: f64,
    log_eps: f64,
    kinks: [f64; 4],
}

impl Eta {
    fn new(eps: f64) -> Self {
        Self {
            eps,
            log_eps: eps.ln(),
            kinks: [eps * eps, eps, 1.0 / eps, 1.0 / (eps * eps)],
        }
    }

    fn piece(&self, r: f64) -> Piece {
        let [k0, k1, k2, k3] = self.kinks;
        if r <= k0 || r >= k3 {
            Piece::Zero
        } else if r < k1 {
            Piece::Log
        } else if r <= k2 {
            Piece::One
        } else {
            Piece::Linear
        }
    }

    fn value(&self, r: f64) -> f64 {
        match self.piece(r) {
            Piece::Zero => 0.0,
            Piece::Log => (r.ln() - 2.0 * self.log_eps) / -self.log_eps,
            Piece::One => 1.0,
            Piece::Linear => (1.0 - r * self.eps * self.eps) / (1.0 - self.eps),
        }
    }

    fn slope(&self, r: f64) -> f64 {
        match self.piece(r) {
            Piece::Zero | Piece::One => 0.0,
            Piece::Log => 1.0 / (r * -self.log_eps),
            Piece::Linear => -self.eps * self.eps / (1.0 - self.eps),
        }
    }
}

/// Builds ψ_ε for 0 < ε < 1/4.
pub fn build_cutoff(epsilon: f64) -> Result<CutoffSequence> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::InvalidInput(format!(
            "epsilon must lie in (0, 1/4), got {epsilon}"
        )));
    }
    let e4 = epsilon.powi(4);
    if e4 < 64.0 * f64::EPSILON * epsilon * epsilon {
        return Err(Error::InvalidInput(format!(
            "epsilon = {epsilon} too small: the mollifier width eps^4 is below floating-point resolution at eps^2"
        )));
    }
    let eta = Eta::new(epsilon);
    let rho = Mollifier::new();
    let nodes = cutoff_nodes(&eta, e4);

    let (psi, dpsi): (Vec<f64>, Vec<f64>) = nodes.par_iter().map(|&r| mollified(&eta, &rho, e4, r)).unzip();
    let eta_samples = nodes.iter().map(|&r| eta.value(r)).collect();
    Ok(CutoffSequence {
        epsilon,
        nodes,
        eta: eta_samples,
        psi,
        dpsi,
        rho,
    })
}

fn cutoff_nodes(eta: &Eta, e4: f64) -> Vec<f64> {
    let eps = eta.eps;
    let lo = (0.5 * eps * eps).ln();
    let hi = (2.0 / (eps * eps)).ln();
    let step = (hi - lo) / (CUTOFF_LOG_NODES - 1) as f64;
    let mut nodes: Vec<f64> = (0..CUTOFF_LOG_NODES).map(|i| (lo + i as f64 * step).exp()).collect();
    for &kink in &eta.kinks {
        let spacing = 4.0 * e4 / KINK_NODES as f64;
        // skip windows finer than a few ulps at this magnitude
        if spacing < 4.0 * f64::EPSILON * kink {
            nodes.push(kink);
            continue;
        }
        nodes.extend((0..=KINK_NODES).map(|i| kink - 2.0 * e4 + i as f64 * spacing));
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// ψ(r) and ψ'(r).
fn mollified(eta: &Eta, rho: &Mollifier, e4: f64, r: f64) -> (f64, f64) {
    let left = eta.piece(r - e4);
    let right = eta.piece(r + e4);
    if left == right {
        match left {
            // η is affine on the window and ρ is even with unit mass.
            Piece::Zero | Piece::One | Piece::Linear => return (eta.value(r), eta.slope(r)),
            Piece::Log => {
                // log(r − s) = log r − Σ (s/r)^j / j and 1/(r − s) = Σ s^j / r^{j+1};
                // odd moments of ρ vanish.
                let l = -eta.log_eps;
                let x2 = (e4 / r).powi(2);
                let mut value_corr = 0.0;
                let mut slope_sum = rho.even_moments[0];
                let mut xp = 1.0;
                for j in 1..rho.even_moments.len() {
                    xp *= x2;
                    let term = xp * rho.even_moments[j];
                    value_corr += term / (2 * j) as f64;
                    slope_sum += term;
                    if term < 1e-18 {
                        break;
                    }
                }
                let psi = eta.value(r) - value_corr / l;
                return (psi.clamp(0.0, 1.0), slope_sum / (l * r));
            }
        }
    }
    // The window straddles a kink κ: η' jumps at z₀ = (r − κ)/ε⁴, so integrate
    // each side separately.
    let kink = eta
        .kinks
        .iter()
        .copied()
        .min_by(|a, b| (a - r).abs().total_cmp(&(b - r).abs()))
        .expect("four kinks");
    let z0 = ((r - kink) / e4).clamp(-1.0, 1.0);
    let c = rho.normalization;
    let side = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
        if hi > lo {
            adaptive_gk(|z| c * bump(z) * f(r - e4 * z), lo, hi, 1e-16, 1e-13)
        } else {
            0.0
        }
    };
    let value = |s: f64| eta.value(s);
    let slope = |s: f64| eta.slope(s);
    let psi = side(&value, -1.0, z0) + side(&value, z0, 1.0);
    let dpsi = side(&slope, -1.0, z0) + side(&slope, z0, 1.0);
    (psi.clamp(0.0, 1.0), dpsi)
}

impl CutoffSequence {
    /// Largest deviation from the three cutoff properties on the sample grid:
    /// (range violation, plateau violation, support violation).
    pub fn property_violations(&self) -> (f64, f64, f64) {
        let e = self.epsilon;
        let e4 = e.powi(4);
        let mut range: f64 = 0.0;
        let mut plateau: f64 = 0.0;
        let mut support: f64 = 0.0;
        for (&r, &v) in self.nodes.iter().zip(&self.psi) {
            range = range.max(-v).max(v - 1.0);
            if r >= e + e4 && r <= 1.0 / e - e4 {
                plateau = plateau.max((v - 1.0).abs());
            }
            if r <= e * e - e4 || r >= 1.0 / (e * e) + e4 {
                support = support.max(v.abs());
            }
        }
        (range, plateau, support)
    }

    /// Λ_ε = α ψ_ε as a separated function on the cutoff grid.
    pub fn lambda_eps(&self, p: &CornerParams) -> Result<SeparatedFunction> {
        let value = self
            .nodes
            .iter()
            .zip(&self.psi)
            .map(|(&r, &s)| p.alpha_radial(r) * s)
            .collect();
        let slope = self
            .nodes
            .iter()
            .zip(self.psi.iter().zip(&self.dpsi))
            .map(|(&r, (&s, &ds))| p.alpha_radial_deriv(r) * s + p.alpha_radial(r) * ds)
            .collect();
        SeparatedFunction::from_parts(*p, self.nodes.clone(), value, slope)
    }
}

/// ∫₀^∞ e^{−r²/4} r^{1+ζ} |ψ_ε'(r)|² dr on the cutoff grid.
pub fn weighted_gradient_integral(c: &CutoffSequence, zeta: f64) -> f64 {
    trapezoid_fn(&c.nodes, |j, r| {
        (-r * r / 4.0).exp() * r.powf(1.0 + zeta) * c.dpsi[j].powi(2)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighQuotient {
    /// l_λ[u]
    pub form: f64,
    /// ‖u‖²
    pub norm_sq: f64,
    pub quotient: f64,
}

/// l_λ[u] = (ω_{N,k}/2^k) ∫ [φ'² + (k(N−2+k) − λ)φ²/r² + r²φ²/16] r^{N−1} dr and l_λ[u]/‖u‖².
pub fn rayleigh_quotient(p: &CornerParams, u: &SeparatedFunction) -> Result<RayleighQuotient> {
    let w = p.sector_weight();
    let d = p.dim() as i32 - 1;
    let coupling = p.angular_eigenvalue() - p.lambda();
    let phi = u.values();
    let dphi = u.slopes();
    let form = w * trapezoid_fn(u.nodes(), |j, r| {
        let f = phi[j];
        (dphi[j] * dphi[j] + (coupling / (r * r) + r * r / 16.0) * f * f) * r.powi(d)
    });
    let norm_sq = u.l2_norm_sq();
    if !(norm_sq > 0.0) {
        return Err(Error::InvalidInput("Rayleigh quotient of the zero function".into()));
    }
    Ok(RayleighQuotient {
        form,
        norm_sq,
        quotient: form / norm_sq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstitutionReport {
    /// l_λ[u] − ((1+m)/2)‖u‖²
    pub lhs: f64,
    /// ∫ α² |∇(u/α)|²
    pub rhs: f64,
    pub abs_diff: f64,
    pub form: f64,
}

/// Both sides of l_λ[u] − ((1+m)/2)‖u‖² = ∫ α²|∇(u/α)|².
///
/// In the sector α²|∇(u/α)|² = (φ' − (φ_α'/φ_α) φ)² f², so no division by α
/// is needed. The identity drops the flux [φ² (φ_α'/φ_α) r^{N−1}] at the ends
/// of the node range; profiles carrying a non-negligible flux are rejected.
pub fn substitution_identity_check(p: &CornerParams, u: &SeparatedFunction) -> Result<SubstitutionReport> {
    let nodes = u.nodes();
    if nodes[0] <= 0.0 {
        return Err(Error::InvalidInput("profile grid touches r = 0".into()));
    }
    let w = p.sector_weight();
    let d = p.dim() as i32 - 1;
    let phi = u.values();
    let dphi = u.slopes();

    let norm_sq = u.l2_norm_sq();
    let form = if norm_sq > 0.0 {
        rayleigh_quotient(p, u)?.form
    } else {
        0.0
    };
    let lhs = form - p.ground_eigenvalue() * norm_sq;
    let rhs = w * trapezoid_fn(nodes, |j, r| {
        let g = p.alpha_radial_log_slope(r);
        (dphi[j] - g * phi[j]).powi(2) * r.powi(d)
    });

    let flux = |j: usize| {
        let r = nodes[j];
        w * phi[j] * phi[j] * p.alpha_radial_log_slope(r) * r.powi(d)
    };
    let boundary = flux(0).abs() + flux(nodes.len() - 1).abs();
    if boundary > 1e-9 * (form.abs() + p.ground_eigenvalue() * norm_sq) {
        return Err(Error::InvalidInput(format!(
            "profile does not vanish at the ends of its grid (boundary flux {boundary:.3e}); u/alpha is singular there"
        )));
    }
    Ok(SubstitutionReport {
        lhs,
        rhs,
        abs_diff: (lhs - rhs).abs(),
        form,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessRow {
    pub epsilon: f64,
    pub quotient: f64,
    /// quotient − (1+m)/2
    pub gap: f64,
    pub gap_times_log_eps: f64,
    pub norm_lambda_eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessScan {
    pub rows: Vec<SharpnessRow>,
    /// Gaps strictly decrease as ε decreases along the scan.
    pub monotone: bool,
}

/// Rayleigh gap of Λ_ε for each ε, computed concurrently, rows in input order.
pub fn sharpness_scan(p: &CornerParams, eps_list: &[f64]) -> Result<SharpnessScan> {
    let rows: Vec<SharpnessRow> = eps_list
        .par_iter()
        .map(|&eps| {
            let cutoff = build_cutoff(eps)?;
            let lam = cutoff.lambda_eps(p)?;
            let rq = rayleigh_quotient(p, &lam)?;
            let gap = rq.quotient - p.ground_eigenvalue();
            Ok(SharpnessRow {
                epsilon: eps,
                quotient: rq.quotient,
                gap,
                gap_times_log_eps: gap * eps.ln().abs(),
                norm_lambda_eps: rq.norm_sq.sqrt(),
            })
        })
        .collect::<Result<_>>()?;

    let mut order: Vec<&SharpnessRow> = rows.iter().collect();
    order.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let monotone = order.windows(2).all(|w| w[1].gap < w[0].gap);
    Ok(SharpnessScan { rows, monotone })
}

/// Nodes used for random profiles.
pub const PROFILE_NODES: usize = 8001;

/// A smooth profile supported in [a, b] ⊂ [0.05, 12]:
/// φ(r) = B((2r − a − b)/(b − a)) · (1 + Σ c_i sin(ω_i r + θ_i)), B the standard bump.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProfile {
    pub a: f64,
    pub b: f64,
    pub modes: Vec<(f64, f64, f64)>,
}

impl RandomProfile {
    pub fn sample(rng: &mut impl Rng) -> Self {
        let a = rng.random_range(0.05..6.0);
        let b = rng.random_range(a + 0.5..12.0);
        let modes = (0..3)
            .map(|_| {
                (
                    rng.random_range(-0.4..0.4),
                    rng.random_range(0.5..6.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        Self { a, b, modes }
    }

    pub fn value(&self, r: f64) -> f64 {
        let z = (2.0 * r - self.a - self.b) / (self.b - self.a);
        bump(z) * self.modulation(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let z = (2.0 * r - self.a - self.b) / (self.b - self.a);
        if z.abs() >= 1.0 {
            return 0.0;
        }
        let dz = 2.0 / (self.b - self.a);
        let bz = bump(z);
        let dbz = bz * (-2.0 * z / (1.0 - z * z).powi(2)) * dz;
        let (m, dm) = self.modulation(r);
        dbz * m + bz * dm
    }

    fn modulation(&self, r: f64) -> (f64, f64) {
        self.modes.iter().fold((1.0, 0.0), |(v, d), &(c, w, t)| {
            (v + c * (w * r + t).sin(), d + c * w * (w * r + t).cos())
        })
    }

    pub fn to_separated(&self, p: &CornerParams) -> Result<SeparatedFunction> {
        let n = PROFILE_NODES;
        let nodes: Vec<f64> = (0..n)
            .map(|i| self.a + (self.b - self.a) * i as f64 / (n - 1) as f64)
            .collect();
        SeparatedFunction::from_fn(*p, &nodes, |r| self.value(r), |r| self.derivative(r))
    }
}
