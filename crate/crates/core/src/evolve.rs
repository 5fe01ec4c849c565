//! Heat flow with Hardy potential in self-similar variables: Crank–Nicolson
//! stepping of ∂_s v + L_λ v = 0 on the radial grid, spectral coefficients,
//! decay-rate fits and the asymptotic profile.
//!
//! Node vectors hold the Liouville form W(r) = r^{(N−1)/2} φ_v(r) of
//! v(s, y) = φ_v(|y|) f_{N,k}(y/|y|), so ‖v‖² = (ω_{N,k}/2^k) h Σ W_j².

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eigen::{lowest_eigenvalues, SpectralResult, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::hardy::RandomProfile;
use crate::model::{alpha_l2_norm_sq, CornerParams, SeparatedFunction};
use crate::quadrature::trapezoid_fn;
use crate::radial::{RadialGrid, TridiagonalOperator};
use crate::tridiag::{dot, ThomasFactor};

pub const DEFAULT_DS: f64 = 1e-3;
pub const DEFAULT_S_END: f64 = 8.0;
pub const DEFAULT_S_BURN: f64 = 1.0;

/// (1 − ds μ/2)/(1 + ds μ/2): one Crank–Nicolson step on an eigenvector.
pub fn cn_amplification(mu: f64, ds: f64) -> f64 {
    (1.0 - 0.5 * ds * mu) / (1.0 + 0.5 * ds * mu)
}

/// Crank–Nicolson stepper (I + ds/2 A) v⁺ = (I − ds/2 A) v with the left side factored once.
#[derive(Debug, Clone)]
pub struct CrankNicolson<'a> {
    op: &'a TridiagonalOperator,
    ds: f64,
    factor: ThomasFactor,
}

impl<'a> CrankNicolson<'a> {
    pub fn new(op: &'a TridiagonalOperator, ds: f64) -> Result<Self> {
        if !(ds > 0.0 && ds.is_finite()) {
            return Err(Error::InvalidInput(format!("time step ds must be positive, got {ds}")));
        }
        let factor = op.matrix().factor_affine(0.5 * ds, 1.0)?;
        Ok(Self { op, ds, factor })
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn step(&self, v: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; v.len()];
        self.step_into(v, &mut next);
        next
    }

    /// Writes the next state into `out` (same length as `v`).
    pub fn step_into(&self, v: &[f64], out: &mut [f64]) {
        let a = self.op.matrix();
        let (d, e) = (a.diag(), a.off());
        let n = v.len();
        let half = 0.5 * self.ds;
        for i in 0..n {
            let mut av = d[i] * v[i];
            if i > 0 {
                av += e[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                av += e[i] * v[i + 1];
            }
            out[i] = v[i] - half * av;
        }
        self.factor.solve_in_place(out);
    }
}

/// One Crank–Nicolson step.
pub fn step(v: &[f64], op: &TridiagonalOperator, ds: f64) -> Result<Vec<f64>> {
    if v.len() != op.len() {
        return Err(Error::GridMismatch(format!(
            "vector of length {} on {} nodes",
            v.len(),
            op.len()
        )));
    }
    Ok(CrankNicolson::new(op, ds)?.step(v))
}

/// √(ω_{N,k}/2^k · h): converts ℓ² node sums to continuum norms.
pub fn norm_scale(p: &CornerParams, g: &RadialGrid) -> f64 {
    (p.sector_weight() * g.h()).sqrt()
}

/// ‖v‖ in L²(corner).
pub fn v_norm(w: &[f64], p: &CornerParams, g: &RadialGrid) -> f64 {
    norm_scale(p, g) * dot(w, w).sqrt()
}

/// ‖u(t)‖ = ‖w(s)‖ = ‖K^{−1/2} v(s)‖ in L²(corner).
pub fn u_norm(w: &[f64], p: &CornerParams, g: &RadialGrid) -> f64 {
    let sum: f64 = w
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let r = g.node(j);
            (-0.25 * r * r).exp() * x * x
        })
        .sum();
    norm_scale(p, g) * sum.sqrt()
}

/// Initial data selectors, all inside the f_{N,k} sector.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// u₀ = e^{−|x|²/8} α, i.e. v₀ = α.
    Eigenfunction,
    /// u₀ = x_{N−k+1}···x_N e^{−|x|²/(2σ²)}: φ₀ = r^k e^{−r²/(2σ²)}, requires σ < 2.
    Gaussian { scale: f64 },
    /// Seeded random bump profile φ₀ supported in [0.05, 12].
    Random { seed: u64 },
    /// Gaussian data minus its projection on the discrete ground vector.
    OrthogonalToGround,
    /// c₀ e₀ + c₁ e₁ with e_n the L²-normalized discrete eigenfunctions.
    TwoMode { c0: f64, c1: f64 },
    /// The discrete ground vector, normalized like α.
    DiscreteGround,
}

impl InitialData {
    /// Radial factor φ₀ of u₀ where it has a closed form.
    pub fn u0_profile(&self, p: &CornerParams) -> Option<Box<dyn Fn(f64) -> f64 + Sync + '_>> {
        let p = *p;
        match self {
            Self::Eigenfunction => Some(Box::new(move |r| (-r * r / 8.0).exp() * p.alpha_radial(r))),
            Self::Gaussian { scale } => {
                let (k, s2) = (p.corner() as i32, scale * scale);
                Some(Box::new(move |r| r.powi(k) * (-r * r / (2.0 * s2)).exp()))
            }
            Self::Random { seed } => {
                let prof = RandomProfile::sample(&mut ChaCha8Rng::seed_from_u64(*seed));
                Some(Box::new(move |r| prof.value(r)))
            }
            _ => None,
        }
    }

    /// The node vector W₀ of v₀ on the operator's grid.
    pub fn node_vector(&self, op: &TridiagonalOperator) -> Result<Vec<f64>> {
        let p = *op.params();
        let g = *op.grid();
        let half = 0.5 * (p.dim() as f64 - 1.0);
        let from_u0 = |phi0: &dyn Fn(f64) -> f64| -> Vec<f64> {
            g.nodes()
                .iter()
                .map(|&r| (r * r / 8.0).exp() * phi0(r) * r.powf(half))
                .collect()
        };
        let vector = match self {
            Self::Gaussian { scale } if !(*scale > 0.0 && *scale < 2.0) => {
                return Err(Error::InvalidInput(format!(
                    "gaussian scale must lie in (0, 2) for u0 in L2(K), got {scale}"
                )))
            }
            Self::Eigenfunction | Self::Gaussian { .. } | Self::Random { .. } => {
                from_u0(self.u0_profile(&p).expect("closed form").as_ref())
            }
            Self::OrthogonalToGround => {
                let mut w = Self::Gaussian { scale: 1.0 }.node_vector(op)?;
                let spec = lowest_eigenvalues(op, 1, DEFAULT_TOL)?;
                let e0 = &spec.eigenvectors[0];
                let c = dot(&w, e0);
                w.iter_mut().zip(e0).for_each(|(x, e)| *x -= c * e);
                w
            }
            Self::TwoMode { c0, c1 } => {
                let spec = lowest_eigenvalues(op, 2, DEFAULT_TOL)?;
                let s = norm_scale(&p, &g);
                spec.eigenvectors[0]
                    .iter()
                    .zip(&spec.eigenvectors[1])
                    .map(|(a, b)| (c0 * a + c1 * b) / s)
                    .collect()
            }
            Self::DiscreteGround => {
                let spec = lowest_eigenvalues(op, 1, DEFAULT_TOL)?;
                let s = alpha_l2_norm_sq(&p).sqrt() / norm_scale(&p, &g);
                spec.eigenvectors[0].iter().map(|e| s * e).collect()
            }
        };
        let peak = vector.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tail = vector.last().map_or(0.0, |v| v.abs());
        if !(peak.is_finite()) || tail > 1e-8 * peak {
            return Err(Error::InvalidInput(format!(
                "initial data is not negligible at r_max (|v0(r_max)|/max|v0| = {:.3e}); u0 is not in L2(K) on this truncation",
                tail / peak
            )));
        }
        Ok(vector)
    }
}

/// Snapshots of one evolution.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub params: CornerParams,
    pub grid: RadialGrid,
    pub ds: f64,
    pub steps: Vec<usize>,
    pub s_values: Vec<f64>,
    pub v_snapshots: Vec<Vec<f64>>,
    /// ‖v(s)‖
    pub l2_norms: Vec<f64>,
    /// ‖u(t)‖ with t = e^s − 1
    pub u_norms: Vec<f64>,
}

impl EvolutionTrace {
    pub fn t_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.s_values.iter().map(|s| s.exp_m1())
    }

    /// ‖v(s)‖ never increases.
    pub fn is_contractive(&self) -> bool {
        self.l2_norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14))
    }
}

/// Steps from s = 0 to `s_end`, recording every `snapshot_every` steps and the final state.
pub fn evolve(
    op: &TridiagonalOperator,
    v0: &[f64],
    ds: f64,
    s_end: f64,
    snapshot_every: usize,
) -> Result<EvolutionTrace> {
    if v0.len() != op.len() {
        return Err(Error::GridMismatch(format!(
            "initial vector of length {} on {} nodes",
            v0.len(),
            op.len()
        )));
    }
    if !(s_end > 0.0) || snapshot_every == 0 {
        return Err(Error::InvalidInput(format!(
            "need s_end > 0 and snapshot_every >= 1, got {s_end} and {snapshot_every}"
        )));
    }
    let cn = CrankNicolson::new(op, ds)?;
    let total = (s_end / ds).round() as usize;
    let (p, g) = (*op.params(), *op.grid());
    let mut trace = EvolutionTrace {
        params: p,
        grid: g,
        ds,
        steps: Vec::new(),
        s_values: Vec::new(),
        v_snapshots: Vec::new(),
        l2_norms: Vec::new(),
        u_norms: Vec::new(),
    };
    let mut record = |k: usize, v: &[f64]| {
        trace.steps.push(k);
        trace.s_values.push(k as f64 * ds);
        trace.l2_norms.push(v_norm(v, &p, &g));
        trace.u_norms.push(u_norm(v, &p, &g));
        trace.v_snapshots.push(v.to_vec());
    };
    let mut v = v0.to_vec();
    let mut next = vec![0.0; v.len()];
    record(0, &v);
    for k in 1..=total {
        cn.step_into(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
        if k % snapshot_every == 0 || k == total {
            record(k, &v);
        }
    }
    Ok(trace)
}

/// β_n(0) = ∫ v₀ e_n for the eigenvectors in `spec`, with e_n the L²-normalized
/// discrete eigenfunctions.
pub fn spectral_expand(v0: &[f64], spec: &SpectralResult, p: &CornerParams, g: &RadialGrid) -> Result<Vec<f64>> {
    if spec.eigenvectors.iter().any(|e| e.len() != v0.len()) || v0.len() != g.n() {
        return Err(Error::GridMismatch(format!(
            "initial vector has {} nodes, grid {}, eigenvectors {}",
            v0.len(),
            g.n(),
            spec.eigenvectors.first().map_or(0, Vec::len)
        )));
    }
    let s = norm_scale(p, g);
    Ok(spec.eigenvectors.iter().map(|e| s * dot(v0, e)).collect())
}

/// ‖α‖^{−1} ∫ u₀ e^{|x|²/8} α dx by radial quadrature; equals ‖α‖ for u₀ = e^{−|x|²/8} α.
pub fn ground_projection(p: &CornerParams, u0: &SeparatedFunction) -> f64 {
    let d = p.dim() as i32 - 1;
    let phi = u0.values();
    let integral = p.sector_weight()
        * trapezoid_fn(u0.nodes(), |j, r| {
            phi[j] * (r * r / 8.0).exp() * p.alpha_radial(r) * r.powi(d)
        });
    integral / alpha_l2_norm_sq(p).sqrt()
}

/// Coefficient β of the asymptotic profile β t^{−(1+m)} e^{−|x|²/4t} e^{|x|²/8} α:
/// ‖α‖^{−2} ∫ u₀ e^{|x|²/8} α dx, equal to β₀(0)/‖α‖. It is 1 for eigenfunction data.
pub fn beta_coefficient(p: &CornerParams, u0: &SeparatedFunction) -> f64 {
    ground_projection(p, u0) / alpha_l2_norm_sq(p).sqrt()
}

/// Least-squares slope of `y` against `x`.
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Profile comparison in the original variables at one large t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeProfile {
    pub t: f64,
    /// t^{(1+m)/2} ‖u(t) − β t^{−(1+m)} e^{−|x|²/4t} e^{|x|²/8} α‖
    pub error_t: f64,
    /// Same with t replaced by t + 1 inside the profile.
    pub error_t_plus_one: f64,
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    /// Slope of ln‖v(s)‖ against s after burn-in (= slope of ln‖u‖ against ln(1+t) in the limit).
    pub fitted_exponent: f64,
    /// Slope of ln‖u(t)‖ against ln(1+t) after burn-in.
    pub u_exponent: f64,
    /// β₀(0)/‖α‖
    pub beta: f64,
    /// β₀(0) from the discrete ground vector.
    pub beta0: f64,
    /// e^{μ₀ s}‖v(s) − β₀(0) e^{−μ₀ s} e₀‖ per snapshot.
    pub profile_errors: Vec<f64>,
    /// ‖u₀‖_{L²(K)} = ‖v₀‖
    pub u0_weighted_norm: f64,
    /// ‖u₀‖_{L²}
    pub u0_norm: f64,
    /// (1+t)^{(1+m)/2}‖u(t)‖ / ‖u₀‖_{L²(K)} per snapshot; at most 1.
    pub hard_bound_ratios: Vec<f64>,
    /// (1+t)^{(1+m)/2}‖u(t)‖ / ‖u₀‖_{L²} per snapshot; 1 for eigenfunction data.
    pub bound_ratios: Vec<f64>,
    pub contractive: bool,
    /// Profile check at the last three snapshots.
    pub time_profiles: Vec<TimeProfile>,
}

impl DecayReport {
    pub fn hard_bound_holds(&self) -> bool {
        self.hard_bound_ratios.iter().all(|&r| r <= 1.0 + 1e-8)
    }
}

/// Fits the decay rate after `s_burn` and evaluates the profile series.
///
/// The ground mode reference uses the discrete pair (μ₀ₕ, e₀) and the exact
/// Crank–Nicolson factor, so a pure ground mode gives a zero series up to
/// round-off instead of exposing discretization error.
pub fn decay_fit(trace: &EvolutionTrace, spec: &SpectralResult, s_burn: f64) -> Result<DecayReport> {
    let p = trace.params;
    let g = trace.grid;
    let s_end = *trace.s_values.last().expect("at least the initial snapshot");
    if s_end - s_burn < 3.0 {
        return Err(Error::IllConditionedFit(format!(
            "fit window [{s_burn}, {s_end}] is shorter than 3"
        )));
    }
    let window: Vec<usize> = (0..trace.s_values.len())
        .filter(|&i| trace.s_values[i] >= s_burn)
        .collect();
    if window.len() < 3 {
        return Err(Error::IllConditionedFit(format!(
            "only {} snapshots after burn-in",
            window.len()
        )));
    }
    if trace.l2_norms.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::IllConditionedFit("solution norm vanished".into()));
    }
    let s: Vec<f64> = window.iter().map(|&i| trace.s_values[i]).collect();
    let ln_v: Vec<f64> = window.iter().map(|&i| trace.l2_norms[i].ln()).collect();
    let ln_u: Vec<f64> = window.iter().map(|&i| trace.u_norms[i].ln()).collect();
    // ln(1 + t) = s
    let fitted_exponent = ls_slope(&s, &ln_v);
    let u_exponent = ls_slope(&s, &ln_u);

    let v0 = &trace.v_snapshots[0];
    let beta0 = spectral_expand(v0, spec, &p, &g)?[0];
    let alpha_norm = alpha_l2_norm_sq(&p).sqrt();
    let scale = norm_scale(&p, &g);
    let e0: Vec<f64> = spec.eigenvectors[0].iter().map(|e| e / scale).collect();
    let mu0h = spec.eigenvalues[0];
    let amp = cn_amplification(mu0h, trace.ds);
    let profile_errors = trace
        .steps
        .iter()
        .zip(&trace.v_snapshots)
        .map(|(&k, v)| {
            let decay = amp.powi(k as i32);
            let diff: Vec<f64> = v.iter().zip(&e0).map(|(x, e)| x - beta0 * decay * e).collect();
            v_norm(&diff, &p, &g) / decay
        })
        .collect();

    let mu0 = p.ground_eigenvalue();
    let u0_weighted_norm = trace.l2_norms[0];
    let u0_norm = trace.u_norms[0];
    let growth = |s: f64| (mu0 * s).exp();
    let hard_bound_ratios = trace
        .s_values
        .iter()
        .zip(&trace.u_norms)
        .map(|(&s, &u)| growth(s) * u / u0_weighted_norm)
        .collect();
    let bound_ratios = trace
        .s_values
        .iter()
        .zip(&trace.u_norms)
        .map(|(&s, &u)| growth(s) * u / u0_norm)
        .collect();

    let beta = beta0 / alpha_norm;
    let last = trace.s_values.len();
    let time_profiles = (last.saturating_sub(3)..last)
        .filter(|&i| trace.s_values[i] > 0.0)
        .map(|i| time_profile(trace, i, beta))
        .collect();

    Ok(DecayReport {
        fitted_exponent,
        u_exponent,
        beta,
        beta0,
        profile_errors,
        u0_weighted_norm,
        u0_norm,
        hard_bound_ratios,
        bound_ratios,
        contractive: trace.is_contractive(),
        time_profiles,
    })
}

/// t^{μ₀}‖u(t) − U(t)‖ at snapshot `i`, evaluated in similarity variables
/// (x = √(t+1) y, so ‖f‖²_{dx} = (t+1)^{N/2} ‖f(√(t+1)·)‖²_{dy}).
fn time_profile(trace: &EvolutionTrace, i: usize, beta: f64) -> TimeProfile {
    let p = trace.params;
    let g = trace.grid;
    let s = trace.s_values[i];
    let t = s.exp_m1();
    let n = p.dim() as f64;
    let m = p.m();
    let a = p.liouville_exponent();
    let pe = p.radial_exponent();
    let w = &trace.v_snapshots[i];
    let tp1 = t + 1.0;
    let error = |tau: f64| {
        // Liouville-form radial part of U at x = √(t+1) ρ, scaled like u's.
        let amp = beta * tau.powf(-(1.0 + m)) * tp1.powf(0.5 * pe);
        let sum: f64 = w
            .iter()
            .enumerate()
            .map(|(j, &wj)| {
                let r = g.node(j);
                let u = (-r * r / 8.0).exp() * tp1.powf(-n / 4.0) * wj;
                let big_u = amp * (-tp1 * r * r / (4.0 * tau)).exp() * r.powf(a);
                (u - big_u).powi(2)
            })
            .sum();
        let norm = norm_scale(&p, &g) * (tp1.powf(n / 2.0) * sum).sqrt();
        t.powf(p.ground_eigenvalue()) * norm
    };
    TimeProfile {
        t,
        error_t: error(t),
        error_t_plus_one: error(tp1),
    }
}

/// Separated u₀ on a fine grid over the operator's truncation, for quadrature β.
pub fn u0_separated(data: &InitialData, p: &CornerParams, g: &RadialGrid) -> Option<Result<SeparatedFunction>> {
    let phi0 = data.u0_profile(p)?;
    let count = 4 * g.n() + 1;
    let nodes: Vec<f64> = (0..count)
        .map(|i| g.r_min() + (g.r_max() - g.r_min()) * i as f64 / (count - 1) as f64)
        .collect();
    let values: Vec<f64> = nodes.iter().map(|&r| phi0(r)).collect();
    Some(SeparatedFunction::from_samples(*p, &nodes, &values))
}
