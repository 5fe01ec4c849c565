//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//! Runs without the libtest harness so the lines always reach the log.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hardy_corner::cli::{execute, Command, IoArgs};
use hardy_corner::eigen::{ground_state_check, lowest_eigenvalues, radial_ladder_check, DEFAULT_TOL};
use hardy_corner::evolve::{
    beta_coefficient, decay_fit, evolve, spectral_expand, u0_separated, DecayReport, EvolutionTrace, InitialData,
    DEFAULT_DS, DEFAULT_S_BURN, DEFAULT_S_END,
};
use hardy_corner::hardy::{sharpness_scan, substitution_identity_check, RandomProfile};
use hardy_corner::model::{alpha_l2_norm_sq, hardy_constant, omega_nk};
use hardy_corner::quadrature::adaptive_gk;
use hardy_corner::radial::{assemble, miracle_residual, miracle_residual_fd};
use hardy_corner::{CornerParams, RadialGrid};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

/// Every distinct valid (N, k, λ) with N ∈ {2,3,4}, k ∈ {0,1,2}, λ ∈ {0, λ_{N,k}/2, λ_{N,k}}.
fn triples() -> Vec<CornerParams> {
    let mut out: Vec<CornerParams> = Vec::new();
    for n in 2..=4 {
        for k in 0..=2 {
            for frac in [0.0, 0.5, 1.0] {
                let p = CornerParams::with_fraction(n, k, frac).expect("valid pair");
                if !out
                    .iter()
                    .any(|q| q.dim() == n && q.corner() == k && q.lambda() == p.lambda())
                {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn label(p: &CornerParams) -> String {
    format!("(N={}, k={}, lambda={})", p.dim(), p.corner(), p.lambda())
}

fn mu0_tolerance(p: &CornerParams) -> f64 {
    if p.m() >= 0.5 {
        1e-3
    } else {
        5e-3
    }
}

struct Flow {
    params: CornerParams,
    trace: EvolutionTrace,
    fit: DecayReport,
    /// |β₁(0)/β₀(0)|
    first_mode_ratio: f64,
}

fn run_flow(p: &CornerParams, data: &InitialData, ds: f64, snapshot_every: usize) -> Flow {
    let g = RadialGrid::default();
    let op = assemble(p, &g).unwrap();
    let v0 = data.node_vector(&op).unwrap();
    let spec = lowest_eigenvalues(&op, 2, DEFAULT_TOL).unwrap();
    let trace = evolve(&op, &v0, ds, DEFAULT_S_END, snapshot_every).unwrap();
    let fit = decay_fit(&trace, &spec, DEFAULT_S_BURN).unwrap();
    let beta = spectral_expand(&v0, &spec, p, &g).unwrap();
    Flow {
        params: *p,
        trace,
        fit,
        first_mode_ratio: (beta[1] / beta[0]).abs(),
    }
}

fn ground_eigenvalue(ps: &[CornerParams]) -> Outcome {
    let g = RadialGrid::default();
    let mut worst = (0.0f64, String::new());
    let mut slowest = 0.0f64;
    let mut failures = Vec::new();
    for p in ps {
        let start = Instant::now();
        let r = ground_state_check(p, &g, DEFAULT_TOL).unwrap();
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        let rel = r.abs_err / r.mu0_exact;
        if rel > worst.0 {
            worst = (rel, label(p));
        }
        if rel > mu0_tolerance(p) || secs > 2.0 || !r.sign_definite {
            failures.push(format!("{} rel {rel:.2e} in {secs:.2} s", label(p)));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{} triples, max rel err {:.2e} at {}, slowest solve {:.0} ms{}",
            ps.len(),
            worst.0,
            worst.1,
            slowest * 1e3,
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", failures.join(", "))
            }
        ),
    )
}

fn oscillator() -> Outcome {
    // Free oscillator −Δ + b²|x|² on ℝ³ with b = 1/4: ground energy N·b.
    let target = 3.0 * 0.25;
    let p = CornerParams::new(3, 0, 0.0).unwrap();
    let r = ground_state_check(&p, &RadialGrid::default(), DEFAULT_TOL).unwrap();
    let err = (r.mu0 - target).abs();
    Outcome::new(err <= 1e-4, format!("mu0 = {:.10}, |mu0 - 0.75| = {err:.2e}", r.mu0))
}

fn miracle(ps: &[CornerParams]) -> Outcome {
    let g = RadialGrid::default();
    let analytic = ps.iter().map(|p| miracle_residual(p, &g)).fold(0.0, f64::max);
    let fd = ps.iter().map(|p| miracle_residual_fd(p, 1e-4)).fold(0.0, f64::max);
    Outcome::new(
        analytic <= 1e-10 && fd <= 1e-4,
        format!("max analytic residual {analytic:.2e}, max finite-difference residual {fd:.2e}"),
    )
}

fn sharpness(ps: &[CornerParams]) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for p in ps.iter().filter(|p| p.m() == 0.0) {
        let scan = sharpness_scan(p, &[1e-1, 1e-2, 1e-3]).unwrap();
        let worst = scan.rows[1..].iter().map(|r| r.gap_times_log_eps).fold(0.0, f64::max);
        pass &= scan.monotone && worst <= 8.0;
        notes.push(format!(
            "{} max gap*|ln eps| {worst:.4}{}",
            label(p),
            if scan.monotone { "" } else { " NOT MONOTONE" }
        ));
    }
    let mut worst_m1 = 0.0f64;
    for p in ps.iter().filter(|p| p.m() >= 1.0) {
        let gap = sharpness_scan(p, &[1e-2]).unwrap().rows[0].gap;
        worst_m1 = worst_m1.max(gap);
    }
    pass &= worst_m1 <= 1e-4;
    notes.push(format!("max gap(1e-2) over m >= 1: {worst_m1:.2e}"));
    Outcome::new(pass, notes.join("; "))
}

fn identity(ps: &[CornerParams]) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (i, p) in ps.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        for _ in 0..200 {
            let u = RandomProfile::sample(&mut rng).to_separated(p).unwrap();
            let r = substitution_identity_check(p, &u).unwrap();
            worst = worst.max(r.abs_diff / r.form);
            count += 1;
        }
    }
    Outcome::new(
        worst <= 1e-6,
        format!("{count} profiles, max |difference|/l[u] = {worst:.2e}"),
    )
}

fn decay_rate(gaussian: &[Flow], eigen: &[Flow]) -> Outcome {
    let mut worst_slope = (0.0f64, String::new());
    let mut worst_hard = 0.0f64;
    for f in gaussian {
        let target = -f.params.ground_eigenvalue();
        let rel = ((f.fit.fitted_exponent - target) / target).abs();
        if rel > worst_slope.0 {
            worst_slope = (rel, label(&f.params));
        }
        worst_hard = f.fit.hard_bound_ratios.iter().copied().fold(worst_hard, f64::max);
    }
    let mut worst_eq = 0.0f64;
    for f in eigen {
        worst_eq = f
            .fit
            .bound_ratios
            .iter()
            .map(|r| (r - 1.0).abs())
            .fold(worst_eq, f64::max);
        worst_hard = f.fit.hard_bound_ratios.iter().copied().fold(worst_hard, f64::max);
    }
    Outcome::new(
        worst_slope.0 <= 0.02 && worst_hard <= 1.0 + 1e-8 && worst_eq <= 1e-6,
        format!(
            "gaussian data: max exponent rel err {:.2e} at {}; max hard-bound ratio {worst_hard:.4}; \
             eigenfunction data ({} triples): max |ratio - 1| {worst_eq:.2e}",
            worst_slope.0,
            worst_slope.1,
            eigen.len()
        ),
    )
}

/// Index of the snapshot closest to `s`.
fn at(trace: &EvolutionTrace, s: f64) -> usize {
    (0..trace.s_values.len())
        .min_by(|&a, &b| (trace.s_values[a] - s).abs().total_cmp(&(trace.s_values[b] - s).abs()))
        .unwrap()
}

/// The series decays like e^{−(μ₁−μ₀)s} = e^{−s} when β₁(0) ≠ 0. Data with
/// β₁(0) = 0 is not generic; there the ladder predicts rate 2 instead.
fn profile(gaussian: &[Flow], alternates: &[Flow]) -> Outcome {
    let mut min_ratio = f64::INFINITY;
    let mut worst = 0.0f64;
    let mut non_generic = Vec::new();
    for f in gaussian.iter().chain(alternates) {
        let (i1, i5) = (at(&f.trace, 1.0), at(&f.trace, 5.0));
        let series = &f.fit.profile_errors;
        min_ratio = min_ratio.min(series[i1] / series[i5]);
        let s = &f.trace.s_values[i1..=i5];
        let ln: Vec<f64> = series[i1..=i5].iter().map(|e| e.ln()).collect();
        let rate = -slope(s, &ln);
        let expected = if f.first_mode_ratio < 1e-4 {
            non_generic.push(format!("{} rate {rate:.4}", label(&f.params)));
            2.0
        } else {
            1.0
        };
        worst = worst.max((rate / expected - 1.0).abs());
    }
    Outcome::new(
        min_ratio >= 10.0 && worst <= 0.1,
        format!(
            "min series ratio s=1 to s=5: {min_ratio:.1}; max relative rate deviation {worst:.3}; \
             beta_1 = 0 (expected rate 2): {}; rerun with gaussian scale 0.8: {} triples",
            if non_generic.is_empty() {
                "none".into()
            } else {
                non_generic.join(", ")
            },
            alternates.len()
        ),
    )
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn beta_consistency(ps: &[CornerParams]) -> Outcome {
    let g = RadialGrid::default();
    let mut worst_beta = 0.0f64;
    for p in ps {
        let op = assemble(p, &g).unwrap();
        let spec = lowest_eigenvalues(&op, 1, DEFAULT_TOL).unwrap();
        let alpha = alpha_l2_norm_sq(p).sqrt();
        for data in [InitialData::Gaussian { scale: 1.0 }, InitialData::Eigenfunction] {
            let v0 = data.node_vector(&op).unwrap();
            let spectral = spectral_expand(&v0, &spec, p, &g).unwrap()[0] / alpha;
            let u0 = u0_separated(&data, p, &g).unwrap().unwrap();
            let quad = beta_coefficient(p, &u0);
            worst_beta = worst_beta.max(((quad - spectral) / spectral).abs());
        }
    }
    let mut worst_norm = 0.0f64;
    for p in ps.iter().filter(|p| p.m() == 0.0) {
        let radial = adaptive_gk(|r| r * (-r * r / 4.0).exp(), 0.0, 60.0, 1e-14, 1e-13);
        let quad = p.sector_weight() * radial;
        let closed = omega_nk(p.dim(), p.corner()).unwrap() / 2f64.powi(p.corner() as i32 - 1);
        worst_norm = worst_norm.max(((quad - closed) / closed).abs());
    }
    Outcome::new(
        worst_beta <= 1e-5 && worst_norm <= 1e-8,
        format!("max beta rel diff {worst_beta:.2e}; max critical norm rel diff {worst_norm:.2e}"),
    )
}

fn ladder(ps: &[CornerParams]) -> Outcome {
    // Certify the Sturm/bisection solver against a dense eigensolve first.
    let coarse = RadialGrid::new(1e-2, 20.0, 2000).unwrap();
    let mut worst_dense = 0.0f64;
    for p in [
        CornerParams::critical(3, 1).unwrap(),
        CornerParams::new(4, 2, 0.0).unwrap(),
    ] {
        let op = assemble(&p, &coarse).unwrap();
        let n = op.len();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = op.diag()[i];
            if i + 1 < n {
                a[(i, i + 1)] = op.offdiag()[i];
                a[(i + 1, i)] = op.offdiag()[i];
            }
        }
        let mut dense: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let sturm = lowest_eigenvalues(&op, 4, 1e-12).unwrap();
        for (x, y) in sturm.eigenvalues.iter().zip(&dense) {
            worst_dense = worst_dense.max((x - y).abs() / y.abs().max(1.0));
        }
    }
    let g = RadialGrid::default();
    let worst = ps
        .iter()
        .map(|p| radial_ladder_check(p, &g, 4).unwrap().max_deviation())
        .fold(0.0, f64::max);
    Outcome::new(
        worst_dense <= 1e-9 && worst <= 1e-3,
        format!("dense vs bisection at n=2000: {worst_dense:.2e}; max |mu_n - (n + mu0)|, n <= 3: {worst:.2e}"),
    )
}

fn monotone_sweep() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(&config, "[sweep]\ndims = [4]\ncorners = [0, 1, 2]\nlambdas = [0.0]\n").unwrap();
    let report = execute(&Command::Sweep(IoArgs { config, out: None })).unwrap();
    let j = report.header.iter().position(|h| *h == "fitted_exponent").unwrap();
    let fitted: Vec<f64> = report.rows.iter().map(|r| r[j].parse().unwrap()).collect();
    let min_sep = fitted.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    Outcome::new(
        fitted.len() == 3 && min_sep >= 0.4,
        format!("exponents k=0,1,2: {fitted:.4?}, min separation {min_sep:.4}"),
    )
}

fn main() {
    let start = Instant::now();
    let ps = triples();
    assert!(ps
        .iter()
        .all(|p| p.lambda() <= hardy_constant(p.dim(), p.corner()).unwrap()));

    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut record = |id, name, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} [{name}]: {} ({}) [{secs:.1} s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        results.push((id, name, outcome, secs));
    };

    record(1, "ground eigenvalue", &mut || ground_eigenvalue(&ps));
    record(2, "oscillator cross-check", &mut oscillator);
    record(3, "ground state equation", &mut || miracle(&ps));
    record(4, "sharpness", &mut || sharpness(&ps));
    record(5, "substitution identity", &mut || identity(&ps));

    let gaussian: Vec<Flow> = ps
        .iter()
        .map(|p| run_flow(p, &InitialData::Gaussian { scale: 1.0 }, DEFAULT_DS, 100))
        .collect();
    let eigen_subset = [
        CornerParams::critical(3, 1).unwrap(),
        CornerParams::with_fraction(2, 1, 0.5).unwrap(),
        CornerParams::new(4, 2, 0.0).unwrap(),
    ];
    // ds = 2.5e-4: the Crank–Nicolson phase error μ³ds²s/12 must stay below 1e-6 at μ₀ = 2.
    let eigen: Vec<Flow> = eigen_subset
        .iter()
        .map(|p| run_flow(p, &InitialData::Eigenfunction, 2.5e-4, 400))
        .collect();

    record(6, "decay rate", &mut || decay_rate(&gaussian, &eigen));
    // The unit Gaussian happens to be orthogonal to e₁ at some critical triples; a
    // different width restores generic data there.
    let alternates: Vec<Flow> = gaussian
        .iter()
        .filter(|f| f.first_mode_ratio < 1e-4)
        .map(|f| run_flow(&f.params, &InitialData::Gaussian { scale: 0.8 }, DEFAULT_DS, 100))
        .collect();
    record(7, "asymptotic profile", &mut || profile(&gaussian, &alternates));
    record(8, "beta consistency", &mut || beta_consistency(&ps));
    record(9, "spectral ladder", &mut || ladder(&ps));
    record(10, "monotonicity sweep", &mut monotone_sweep);

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.1} s",
        results.len() - failed.len(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
