//! Radial reduction of the Hardy oscillator on the f_{N,k} sector.
//!
//! With u = φ(r) f_{N,k}(σ) and w = r^{(N−1)/2} φ the operator becomes
//! −w'' + [(m² − 1/4)/r² + r²/16] w on (0, ∞), which is discretized here by
//! central differences on a uniform grid.

use crate::error::{Error, Result};
use crate::model::CornerParams;
use crate::tridiag::SymTridiagonal;

/// Uniform interior nodes r_j = r_min + j·h, j = 1..n, h = (r_max − r_min)/(n + 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    n: usize,
}

impl RadialGrid {
    pub const DEFAULT_R_MAX: f64 = 20.0;
    pub const DEFAULT_R_MIN: f64 = 1e-5 * Self::DEFAULT_R_MAX;
    pub const DEFAULT_N: usize = 20_000;

    pub fn new(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) || r_min <= 0.0 || r_min >= r_max {
            return Err(Error::InvalidGrid(format!(
                "need 0 < r_min < r_max, got r_min = {r_min}, r_max = {r_max}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need n >= 3 interior nodes, got {n}")));
        }
        Ok(Self { r_min, r_max, n })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n + 1) as f64
    }

    /// Interior node `i` (0-based), i.e. r_{i+1}.
    pub fn node(&self, i: usize) -> f64 {
        self.r_min + (i + 1) as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Same truncation with `n` interior nodes.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.r_min, self.r_max, n)
    }
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self {
            r_min: Self::DEFAULT_R_MIN,
            r_max: Self::DEFAULT_R_MAX,
            n: Self::DEFAULT_N,
        }
    }
}

/// How the inverse-square term and the inner boundary are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadialScheme {
    /// Inverse-square term chosen so the three-point stencil annihilates
    /// r^{m+1/2} exactly, and the inner boundary value extrapolated with the
    /// same power law instead of set to zero.
    #[default]
    Frobenius,
    /// diag_j = 2/h² + V(r_j), homogeneous Dirichlet at both ends.
    Pointwise,
}

/// Symmetric tridiagonal discretization of the Liouville-form radial operator.
#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    matrix: SymTridiagonal,
    grid: RadialGrid,
    params: CornerParams,
    scheme: RadialScheme,
}

impl TridiagonalOperator {
    pub fn matrix(&self) -> &SymTridiagonal {
        &self.matrix
    }

    pub fn diag(&self) -> &[f64] {
        self.matrix.diag()
    }

    pub fn offdiag(&self) -> &[f64] {
        self.matrix.off()
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn params(&self) -> &CornerParams {
        &self.params
    }

    pub fn scheme(&self) -> RadialScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    /// m < 1/2: the inverse-square term is attractive and convergence near 0 degrades.
    pub fn strong_singularity(&self) -> bool {
        self.params.m() < 0.5
    }

    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        self.matrix.matvec(w)
    }

    /// (w, A w) / (w, w)
    pub fn rayleigh_quotient(&self, w: &[f64]) -> f64 {
        let aw = self.apply(w);
        crate::tridiag::dot(w, &aw) / crate::tridiag::dot(w, w)
    }
}

/// V(r) = (m² − 1/4)/r² + r²/16.
pub fn effective_potential(p: &CornerParams, r: f64) -> Result<f64> {
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::InvalidInput(format!("effective potential needs r > 0, got {r}")));
    }
    Ok(inverse_square_coefficient(p) / (r * r) + r * r / 16.0)
}

/// m² − 1/4, using m² = λ_{N,k} − λ.
fn inverse_square_coefficient(p: &CornerParams) -> f64 {
    (p.hardy_constant() - p.lambda()) - 0.25
}

/// Assembles the default ([`RadialScheme::Frobenius`]) discretization.
pub fn assemble(p: &CornerParams, g: &RadialGrid) -> Result<TridiagonalOperator> {
    assemble_with(p, g, RadialScheme::default())
}

pub fn assemble_with(p: &CornerParams, g: &RadialGrid, scheme: RadialScheme) -> Result<TridiagonalOperator> {
    let h = g.h();
    let h2 = h * h;
    let nodes = g.nodes();
    let coef = inverse_square_coefficient(p);

    // Resolution check: the pointwise scheme must resolve all of V, the
    // power-law scheme only the attractive part and the confinement.
    let worst = nodes
        .iter()
        .map(|&r| {
            let v = coef / (r * r) + r * r / 16.0;
            match scheme {
                RadialScheme::Pointwise => v.abs(),
                RadialScheme::Frobenius => (-v).max(r * r / 16.0),
            }
        })
        .fold(0.0, f64::max);
    if h2 * worst > 1.0 {
        return Err(Error::Discretization(format!(
            "h^2 * max|V| = {:.3e} > 1; refine the grid (h = {h:.3e})",
            h2 * worst
        )));
    }

    let mut diag: Vec<f64> = match scheme {
        RadialScheme::Pointwise => nodes
            .iter()
            .map(|&r| 2.0 / h2 + coef / (r * r) + r * r / 16.0)
            .collect(),
        RadialScheme::Frobenius => {
            let a = p.liouville_exponent();
            nodes
                .iter()
                .map(|&r| 2.0 / h2 + power_law_second_difference(a, r, h) + r * r / 16.0)
                .collect()
        }
    };
    if scheme == RadialScheme::Frobenius {
        let a = p.liouville_exponent();
        diag[0] -= (g.r_min() / nodes[0]).powf(a) / h2;
    }
    let off = vec![-1.0 / h2; g.n() - 1];
    Ok(TridiagonalOperator {
        matrix: SymTridiagonal::new(diag, off)?,
        grid: *g,
        params: *p,
        scheme,
    })
}

/// Pointwise discretization with an arbitrary potential and Dirichlet ends.
pub fn assemble_with_potential(
    p: &CornerParams,
    g: &RadialGrid,
    potential: impl Fn(f64) -> f64,
) -> Result<TridiagonalOperator> {
    let h2 = g.h() * g.h();
    let diag = g.nodes().iter().map(|&r| 2.0 / h2 + potential(r)).collect();
    Ok(TridiagonalOperator {
        matrix: SymTridiagonal::new(diag, vec![-1.0 / h2; g.n() - 1])?,
        grid: *g,
        params: *p,
        scheme: RadialScheme::Pointwise,
    })
}

/// [(r+h)^a − 2r^a + (r−h)^a] / (h² r^a), the discrete counterpart of (m² − 1/4)/r².
fn power_law_second_difference(a: f64, r: f64, h: f64) -> f64 {
    let x = h / r;
    if x <= 0.25 {
        // (1+x)^a + (1−x)^a − 2 = 2 Σ_{j≥1} C(a, 2j) x^{2j}
        let mut binom = 1.0;
        let mut xp = 1.0;
        let mut sum = 0.0;
        for i in 0..60 {
            binom *= (a - i as f64) / (i + 1) as f64;
            xp *= x;
            if i % 2 == 1 {
                let term = binom * xp;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
            }
        }
        2.0 * sum / (h * h)
    } else {
        ((a * x.ln_1p()).exp_m1() + (a * (-x).ln_1p()).exp_m1()) / (h * h)
    }
}

/// Samples of the exact ground state w₀(r) = r^{m+1/2} e^{−r²/8} at the grid nodes.
pub fn sampled_ground_state(p: &CornerParams, g: &RadialGrid) -> Vec<f64> {
    let a = p.liouville_exponent();
    g.nodes().iter().map(|&r| r.powf(a) * (-r * r / 8.0).exp()).collect()
}

/// max over grid nodes of |(L_λ α − μ α)/α|, using closed-form φ'/φ and φ''/φ.
pub fn miracle_residual(p: &CornerParams, g: &RadialGrid) -> f64 {
    miracle_residual_with(p, g, p.ground_eigenvalue())
}

/// Same as [`miracle_residual`] for a trial eigenvalue.
///
/// The quotient is collected by powers of r before evaluation: with
/// φ'/φ = −r/4 + p/r and φ''/φ = r²/16 − (2p+1)/4 + p(p−1)/r² it reads
/// A + B/r² + C r². Evaluating the pieces separately would amplify the
/// rounding of m = √(λ_{N,k} − λ) by 1/r_min².
pub fn miracle_residual_with(p: &CornerParams, g: &RadialGrid, eigenvalue: f64) -> f64 {
    let n = p.dim() as f64;
    let pe = p.radial_exponent();
    let half = 0.5 * (n - 2.0);
    let m_sq = p.hardy_constant() - p.lambda();
    // p(p−1) + (N−1)p = p(p + N − 2) = (m − (N−2)/2)(m + (N−2)/2)
    let p_p_shift = m_sq - half * half;
    // −φ''/φ − ((N−1)/r) φ'/φ + (k(N−2+k) − λ)/r² + r²/16 − μ
    let a = (2.0 * pe + 1.0) / 4.0 + (n - 1.0) / 4.0 - eigenvalue;
    let b = -p_p_shift + p.angular_eigenvalue() - p.lambda();
    let c = -1.0 / 16.0 + 1.0 / 16.0;
    g.nodes()
        .iter()
        .map(|&r| (a + b / (r * r) + c * r * r).abs())
        .fold(0.0, f64::max)
}

/// Residual with φ', φ'' replaced by central differences of step `step`,
/// sampled at 2000 points of [0.25, 12] where the difference quotients of
/// the power factor stay accurate.
pub fn miracle_residual_fd(p: &CornerParams, step: f64) -> f64 {
    let n = p.dim() as f64;
    let mu = p.ground_eigenvalue();
    let ang = p.angular_eigenvalue();
    let (lo, hi, count) = (0.25, 12.0, 2000);
    (0..count)
        .map(|i| {
            let r = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            let f0 = p.alpha_radial(r);
            let fp = p.alpha_radial(r + step);
            let fm = p.alpha_radial(r - step);
            let d1 = (fp - fm) / (2.0 * step);
            let d2 = (fp - 2.0 * f0 + fm) / (step * step);
            let lhs = -d2 - (n - 1.0) / r * d1 + (ang - p.lambda()) / (r * r) * f0 + r * r / 16.0 * f0 - mu * f0;
            (lhs / f0).abs()
        })
        .fold(0.0, f64::max)
}
