use std::time::Instant;

use rayon::prelude::*;

use crate::eigen::{ground_state_check, lowest_eigenvalues, DEFAULT_TOL};
use crate::evolve::{decay_fit, evolve as run_flow, spectral_expand, v_norm};
use crate::hardy::sharpness_scan;
use crate::model::CornerParams;
use crate::radial::{assemble, RadialGrid};

use super::config::{Config, DataKind};
use super::CliError;

/// Rendered output of one command: `#` lines, then a CSV table.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub meta: Vec<String>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub within_tolerance: bool,
    pub failures: Vec<String>,
    preamble: Vec<String>,
}

impl Report {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            within_tolerance: true,
            ..Self::default()
        }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.meta.push(line.into());
    }

    fn fail(&mut self, why: String) {
        self.within_tolerance = false;
        self.failures.push(why);
    }

    pub(super) fn set_preamble(&mut self, command: &str, config: &Config) {
        let seed = match (command, config.evolve.data) {
            ("evolve" | "sweep", DataKind::Random) => config.evolve.seed.to_string(),
            _ => "none".into(),
        };
        self.preamble = vec![
            format!("hardy-corner {}", env!("CARGO_PKG_VERSION")),
            format!("command: {command}"),
            format!("seed: {seed}"),
            "config:".into(),
        ];
        self.preamble.extend(config.to_toml().lines().map(|l| format!("  {l}")));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in self.preamble.iter().chain(&self.meta) {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn warn_if_strong(report: &mut Report, p: &CornerParams) {
    if p.m() < 0.5 {
        report.note(format!(
            "warning: m = {:.6} < 1/2 (strong singularity at the origin); first-order grid convergence, tolerance 5e-3",
            p.m()
        ));
    }
}

fn mu0_rel_tol(config: &Config, p: &CornerParams) -> f64 {
    config.eigen.rel_tol.unwrap_or(if p.m() < 0.5 { 5e-3 } else { 1e-3 })
}

pub fn eigen(config: &Config) -> Result<Report, CliError> {
    let p = config.params()?;
    config.validate_eigen()?;
    let grids = config.eigen_grids()?;
    let mut report = Report::new(&[
        "n_grid",
        "r_min",
        "r_max",
        "mu0",
        "mu0_exact",
        "abs_err",
        "gap",
        "runtime_ms",
    ]);
    warn_if_strong(&mut report, &p);
    let rel_tol = mu0_rel_tol(config, &p);
    report.note(format!("m: {}", num(p.m())));
    report.note(format!("mu0_rel_tol: {rel_tol:e}"));
    for g in grids {
        let start = Instant::now();
        let r = ground_state_check(&p, &g, config.eigen.tol)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        if r.abs_err > rel_tol * r.mu0_exact {
            report.fail(format!("n = {}: |mu0 - exact| = {:.3e}", g.n(), r.abs_err));
        }
        if !r.sign_definite {
            report.fail(format!("n = {}: ground vector changes sign", g.n()));
        }
        report.rows.push(vec![
            g.n().to_string(),
            num(g.r_min()),
            num(g.r_max()),
            num(r.mu0),
            num(r.mu0_exact),
            num(r.abs_err),
            num(r.gap),
            format!("{ms:.3}"),
        ]);
    }
    Ok(report)
}

pub fn hardy(config: &Config) -> Result<Report, CliError> {
    let p = config.params()?;
    config.validate_hardy()?;
    let h = &config.hardy;
    let scan = sharpness_scan(&p, &h.epsilons)?;
    let mut report = Report::new(&["epsilon", "quotient", "gap", "gap_times_log_eps", "norm_Lambda_eps"]);
    warn_if_strong(&mut report, &p);
    let critical = p.m() == 0.0;
    report.note(format!("mu0_exact: {}", num(p.ground_eigenvalue())));
    report.note(format!("monotone: {}", scan.monotone));
    for row in &scan.rows {
        if row.gap < -1e-8 {
            report.fail(format!(
                "epsilon = {:e}: quotient below mu0 by {:.3e}",
                row.epsilon, -row.gap
            ));
        }
        if critical && row.gap_times_log_eps > h.log_gap_bound {
            report.fail(format!(
                "epsilon = {:e}: gap*|ln eps| = {:.4} > {}",
                row.epsilon, row.gap_times_log_eps, h.log_gap_bound
            ));
        }
        report.rows.push(vec![
            num(row.epsilon),
            num(row.quotient),
            num(row.gap),
            num(row.gap_times_log_eps),
            num(row.norm_lambda_eps),
        ]);
    }
    if critical && !scan.monotone {
        report.fail("gap does not decrease with epsilon".into());
    }
    Ok(report)
}

/// Decay of one evolution: fitted exponents and the ladder level they should match.
struct Flow {
    trace: crate::evolve::EvolutionTrace,
    fit: crate::evolve::DecayReport,
    /// −μ_n for the first mode present in the data.
    expected_exponent: Option<f64>,
}

fn flow(config: &Config, p: &CornerParams, g: &RadialGrid) -> Result<Flow, CliError> {
    let e = &config.evolve;
    let op = assemble(p, g)?;
    let v0 = e.initial_data().node_vector(&op)?;
    let spec = lowest_eigenvalues(&op, 3, DEFAULT_TOL)?;
    let coeffs = spectral_expand(&v0, &spec, p, g)?;
    let size = v_norm(&v0, p, g);
    let expected_exponent = coeffs
        .iter()
        .position(|b| b.abs() > 1e-6 * size)
        .map(|n| -(n as f64 + p.ground_eigenvalue()));
    let trace = run_flow(&op, &v0, e.ds, e.s_end, e.snapshot_every)?;
    let fit = decay_fit(&trace, &spec, e.s_burn)?;
    Ok(Flow {
        trace,
        fit,
        expected_exponent,
    })
}

fn exponent_check(f: &Flow, rel_tol: f64) -> Result<(), String> {
    match f.expected_exponent {
        None => Err("data has no component in the three lowest modes".into()),
        Some(x) if ((f.fit.fitted_exponent - x) / x).abs() > rel_tol => {
            Err(format!("decay exponent {:.6} vs {:.6}", f.fit.fitted_exponent, x))
        }
        Some(_) => Ok(()),
    }
}

pub fn evolve(config: &Config) -> Result<Report, CliError> {
    let p = config.params()?;
    config.validate_evolve()?;
    let g = config.grid()?;
    let f = flow(config, &p, &g)?;
    let mut report = Report::new(&["s", "t", "norm_v", "norm_u", "bound_ratio", "profile_error"]);
    warn_if_strong(&mut report, &p);
    report.note(format!("m: {}", num(p.m())));
    report.note(format!("fitted_exponent: {}", num(f.fit.fitted_exponent)));
    // Slower: the weighted ground and first modes are not orthogonal.
    report.note(format!("u_slope: {}", num(f.fit.u_exponent)));
    report.note(format!(
        "expected_exponent: {}",
        f.expected_exponent.map_or("none".into(), num)
    ));
    report.note(format!("beta: {}", num(f.fit.beta)));
    report.note(format!("contractive: {}", f.fit.contractive));
    report.note(format!(
        "hard_bound_max: {}",
        num(f.fit.hard_bound_ratios.iter().copied().fold(0.0, f64::max))
    ));
    for tp in &f.fit.time_profiles {
        report.note(format!(
            "profile t = {}: error_t = {}, error_t_plus_one = {}",
            num(tp.t),
            num(tp.error_t),
            num(tp.error_t_plus_one)
        ));
    }
    if let Err(why) = exponent_check(&f, config.evolve.exponent_rel_tol) {
        report.fail(why);
    }
    if !f.fit.contractive {
        report.fail("norm of v increased".into());
    }
    if !f.fit.hard_bound_holds() {
        report.fail("(1+t)^{(1+m)/2}|u(t)| exceeded |u0|_{L2(K)}".into());
    }
    let t = f.trace.t_values();
    for (i, t) in t.enumerate() {
        report.rows.push(vec![
            num(f.trace.s_values[i]),
            num(t),
            num(f.trace.l2_norms[i]),
            num(f.trace.u_norms[i]),
            num(f.fit.bound_ratios[i]),
            num(f.fit.profile_errors[i]),
        ]);
    }
    Ok(report)
}

struct SweepRow {
    params: CornerParams,
    mu0: f64,
    abs_err: f64,
    gap: f64,
    exponent: Option<(f64, Option<f64>)>,
    runtime_ms: f64,
    failures: Vec<String>,
}

pub fn sweep(config: &Config) -> Result<Report, CliError> {
    config.validate_eigen()?;
    if config.sweep.evolve {
        config.validate_evolve()?;
    }
    let g = config.grid()?;
    let points = config.sweep_points()?;
    let mut report = Report::new(&[
        "dim",
        "corner",
        "lambda",
        "m",
        "mu0",
        "mu0_exact",
        "abs_err",
        "gap",
        "fitted_exponent",
        "expected_exponent",
        "runtime_ms",
    ]);
    let mut valid = Vec::new();
    for point in points {
        match point {
            Ok(p) => valid.push(p),
            Err(why) => report.note(format!("skipped: {why}")),
        }
    }
    if valid.iter().any(|p| p.m() < 0.5) {
        report.note("warning: some triples have m < 1/2 (strong singularity); tolerance 5e-3 there");
    }
    let mut rows: Vec<SweepRow> = valid
        .par_iter()
        .map(|p| -> Result<SweepRow, CliError> {
            let start = Instant::now();
            let r = ground_state_check(p, &g, config.eigen.tol)?;
            let mut failures = Vec::new();
            let tag = format!("N={}, k={}, lambda={}", p.dim(), p.corner(), p.lambda());
            if r.abs_err > mu0_rel_tol(config, p) * r.mu0_exact {
                failures.push(format!("{tag}: |mu0 - exact| = {:.3e}", r.abs_err));
            }
            let exponent = if config.sweep.evolve {
                let f = flow(config, p, &g)?;
                if let Err(why) = exponent_check(&f, config.evolve.exponent_rel_tol) {
                    failures.push(format!("{tag}: {why}"));
                }
                Some((f.fit.fitted_exponent, f.expected_exponent))
            } else {
                None
            };
            Ok(SweepRow {
                params: *p,
                mu0: r.mu0,
                abs_err: r.abs_err,
                gap: r.gap,
                exponent,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
                failures,
            })
        })
        .collect::<Result<_, _>>()?;
    rows.sort_by(|a, b| {
        (a.params.dim(), a.params.corner())
            .cmp(&(b.params.dim(), b.params.corner()))
            .then(a.params.lambda().total_cmp(&b.params.lambda()))
    });
    for row in rows {
        let p = row.params;
        for why in row.failures {
            report.fail(why);
        }
        let (fitted, expected) = match row.exponent {
            Some((f, e)) => (num(f), e.map_or(String::new(), num)),
            None => (String::new(), String::new()),
        };
        report.rows.push(vec![
            p.dim().to_string(),
            p.corner().to_string(),
            num(p.lambda()),
            num(p.m()),
            num(row.mu0),
            num(p.ground_eigenvalue()),
            num(row.abs_err),
            num(row.gap),
            fitted,
            expected,
            format!("{:.3}", row.runtime_ms),
        ]);
    }
    Ok(report)
}
