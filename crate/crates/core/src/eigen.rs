//! Lowest eigenpairs of the radial operator by Sturm-sequence bisection and
//! inverse iteration, and comparisons with the closed-form spectrum.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::CornerParams;
use crate::radial::{assemble, sampled_ground_state, RadialGrid, TridiagonalOperator};
use crate::tridiag::{dot, l2, SymTridiagonal};

pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_INVERSE_ITERATIONS: usize = 12;

#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// Unit ℓ² node vectors, ground vector oriented positive.
    pub eigenvectors: Vec<Vec<f64>>,
    /// ‖A v − μ v‖ per pair.
    pub residuals: Vec<f64>,
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn gap(&self) -> Option<f64> {
        (self.len() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }

    /// Largest |(v_i, v_j)| over distinct pairs.
    pub fn max_overlap(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..i {
                worst = worst.max(dot(&self.eigenvectors[i], &self.eigenvectors[j]).abs());
            }
        }
        worst
    }
}

/// The `count` smallest eigenpairs of the assembled operator.
pub fn lowest_eigenvalues(op: &TridiagonalOperator, count: usize, tol: f64) -> Result<SpectralResult> {
    lowest_eigenpairs(op.matrix(), count, tol)
}

pub fn lowest_eigenpairs(a: &SymTridiagonal, count: usize, tol: f64) -> Result<SpectralResult> {
    if count == 0 || count > a.len() {
        return Err(Error::InvalidInput(format!(
            "eigenpair count must be in 1..={}, got {count}",
            a.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let eigenvalues: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| bisect_eigenvalue(a, i, tol))
        .collect();

    let scale = a.norm_inf().max(1.0);
    let bound = 10.0 * tol * scale;
    let mut eigenvectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for (i, &mu) in eigenvalues.iter().enumerate() {
        let (v, res) = inverse_iteration(a, mu, &eigenvectors, i, bound, scale)?;
        eigenvectors.push(v);
        residuals.push(res);
    }
    Ok(SpectralResult {
        eigenvalues,
        eigenvectors,
        residuals,
    })
}

/// The `index`-th (0-based) eigenvalue, bracketed by Sturm counts to width ≤ tol
/// or to floating-point resolution.
pub fn bisect_eigenvalue(a: &SymTridiagonal, index: usize, tol: f64) -> f64 {
    let (glo, ghi) = a.gershgorin();
    let pad = f64::EPSILON * glo.abs().max(ghi.abs()).max(1.0);
    let mut lo = glo - pad;
    let mut hi = ghi + pad;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if a.sturm_count(mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn inverse_iteration(
    a: &SymTridiagonal,
    mu: f64,
    previous: &[Vec<f64>],
    index: usize,
    bound: f64,
    scale: f64,
) -> Result<(Vec<f64>, f64)> {
    let factor = a
        .factor_affine(1.0, -mu)
        .or_else(|_| a.factor_affine(1.0, -(mu + 1e-12 * scale)))?;
    let n = a.len();
    let mut x: Vec<f64> = (0..n)
        .map(|j| 1.0 + 0.5 * ((j as f64 + 1.0) * (0.618_033_988_7 + index as f64)).sin())
        .collect();
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        factor.solve_in_place(&mut x);
        for v in previous {
            let c = dot(&x, v);
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= c * vi);
        }
        let norm = l2(&x);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Solver(format!(
                "inverse iteration collapsed for eigenvalue {mu}"
            )));
        }
        x.iter_mut().for_each(|xi| *xi /= norm);
        let ax = a.matvec(&x);
        residual = l2(&ax.iter().zip(&x).map(|(p, q)| p - mu * q).collect::<Vec<_>>());
        if residual <= bound {
            break;
        }
    }
    if residual > bound {
        return Err(Error::Solver(format!(
            "inverse iteration stagnated at eigenvalue {mu}: residual {residual:.3e} > {bound:.3e}"
        )));
    }
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|xi| *xi = -*xi);
    }
    Ok((x, residual))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateReport {
    pub mu0: f64,
    pub mu0_exact: f64,
    pub abs_err: f64,
    /// ℓ² distance between the unit ground vector and the normalized sampled w₀.
    pub vector_distance: f64,
    /// No entry of the opposite sign above the accuracy floor eps·‖A‖∞/gap.
    pub sign_definite: bool,
    pub gap: f64,
}

/// Compares the discrete ground pair with (1+m)/2 and w₀(r) = r^{m+1/2} e^{−r²/8}.
pub fn ground_state_check(p: &CornerParams, g: &RadialGrid, tol: f64) -> Result<GroundStateReport> {
    let op = assemble(p, g)?;
    let spec = lowest_eigenvalues(&op, 2, tol)?;
    let exact = sampled_ground_state(p, g);
    let norm = l2(&exact);
    let e0 = &spec.eigenvectors[0];
    let distance = e0
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b / norm).powi(2))
        .sum::<f64>()
        .sqrt();
    // Entries below the eigenvector accuracy eps·‖A‖/gap (the Gaussian tail)
    // carry no sign information.
    let gap = spec.eigenvalues[1] - spec.eigenvalues[0];
    let floor = f64::EPSILON * op.matrix().norm_inf() / gap;
    let positive = e0.iter().all(|&v| v > -floor);
    let negative = e0.iter().all(|&v| v < floor);
    let mu0_exact = p.ground_eigenvalue();
    Ok(GroundStateReport {
        mu0: spec.eigenvalues[0],
        mu0_exact,
        abs_err: (spec.eigenvalues[0] - mu0_exact).abs(),
        vector_distance: distance,
        sign_definite: positive || negative,
        gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderReport {
    pub eigenvalues: Vec<f64>,
    /// n + (1+m)/2
    pub exact: Vec<f64>,
    pub deviations: Vec<f64>,
}

impl LadderReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

/// Deviations |μ_n − (n + (1+m)/2)| for the lowest `count` sector eigenvalues.
pub fn radial_ladder_check(p: &CornerParams, g: &RadialGrid, count: usize) -> Result<LadderReport> {
    if count == 0 || count > 6 {
        return Err(Error::InvalidInput(format!(
            "ladder count must be in 1..=6, got {count}"
        )));
    }
    let op = assemble(p, g)?;
    let eigenvalues: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| bisect_eigenvalue(op.matrix(), i, DEFAULT_TOL))
        .collect();
    let exact: Vec<f64> = (0..count).map(|n| n as f64 + p.ground_eigenvalue()).collect();
    let deviations = eigenvalues.iter().zip(&exact).map(|(a, b)| (a - b).abs()).collect();
    Ok(LadderReport {
        eigenvalues,
        exact,
        deviations,
    })
}
