//! TOML run configuration. Every section is optional; missing keys take the
//! defaults below, and the echoed config shows the materialized values.

use serde::{Deserialize, Serialize};

use crate::eigen::DEFAULT_TOL;
use crate::evolve::{InitialData, DEFAULT_DS, DEFAULT_S_BURN, DEFAULT_S_END};
use crate::model::CornerParams;
use crate::radial::RadialGrid;

use super::CliError;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub params: ParamsSection,
    pub grid: GridSection,
    pub eigen: EigenSection,
    pub hardy: HardySection,
    pub evolve: EvolveSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsSection {
    pub dim: Option<usize>,
    pub corner: Option<usize>,
    /// Absolute strength; mutually exclusive with `lambda_fraction`.
    pub lambda: Option<f64>,
    /// Strength as a fraction of the Hardy constant.
    pub lambda_fraction: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            r_min: RadialGrid::DEFAULT_R_MIN,
            r_max: RadialGrid::DEFAULT_R_MAX,
            n: RadialGrid::DEFAULT_N,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenSection {
    /// Grid sizes to solve on (one output row each); empty means `grid.n`.
    pub n_grid: Vec<usize>,
    /// Bisection tolerance.
    pub tol: f64,
    /// Relative tolerance on μ₀; 1e-3, or 5e-3 when m < 1/2, if absent.
    pub rel_tol: Option<f64>,
}

impl Default for EigenSection {
    fn default() -> Self {
        Self {
            n_grid: Vec::new(),
            tol: DEFAULT_TOL,
            rel_tol: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardySection {
    pub epsilons: Vec<f64>,
    /// Upper bound on gap·|ln ε| required at critical strength.
    pub log_gap_bound: f64,
}

impl Default for HardySection {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-1, 1e-2, 1e-3],
            log_gap_bound: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Eigenfunction,
    Gaussian,
    Random,
    Orthogonal,
    TwoMode,
    DiscreteGround,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub ds: f64,
    pub s_end: f64,
    pub s_burn: f64,
    pub snapshot_every: usize,
    pub data: DataKind,
    pub gaussian_scale: f64,
    pub seed: u64,
    pub c0: f64,
    pub c1: f64,
    /// Relative tolerance on the fitted decay exponent.
    pub exponent_rel_tol: f64,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            ds: DEFAULT_DS,
            s_end: DEFAULT_S_END,
            s_burn: DEFAULT_S_BURN,
            snapshot_every: 100,
            data: DataKind::Gaussian,
            gaussian_scale: 1.0,
            seed: 0,
            c0: 1.0,
            c1: 1.0,
            exponent_rel_tol: 0.02,
        }
    }
}

impl EvolveSection {
    pub fn initial_data(&self) -> InitialData {
        match self.data {
            DataKind::Eigenfunction => InitialData::Eigenfunction,
            DataKind::Gaussian => InitialData::Gaussian {
                scale: self.gaussian_scale,
            },
            DataKind::Random => InitialData::Random { seed: self.seed },
            DataKind::Orthogonal => InitialData::OrthogonalToGround,
            DataKind::TwoMode => InitialData::TwoMode {
                c0: self.c0,
                c1: self.c1,
            },
            DataKind::DiscreteGround => InitialData::DiscreteGround,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::invalid(format!("evolve.{field}"), msg));
        if !(self.ds > 0.0 && self.ds.is_finite()) {
            return bad("ds", format!("must be positive, got {}", self.ds));
        }
        if !(self.s_end > 0.0 && self.s_end.is_finite()) {
            return bad("s_end", format!("must be positive, got {}", self.s_end));
        }
        if !(self.s_burn >= 0.0 && self.s_burn < self.s_end) {
            return bad("s_burn", format!("must lie in [0, s_end), got {}", self.s_burn));
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every", "must be at least 1".into());
        }
        if self.data == DataKind::Gaussian && !(self.gaussian_scale > 0.0 && self.gaussian_scale < 2.0) {
            return bad(
                "gaussian_scale",
                format!("must lie in (0, 2) so that u0 is in L2(K), got {}", self.gaussian_scale),
            );
        }
        if !(self.exponent_rel_tol > 0.0) {
            return bad(
                "exponent_rel_tol",
                format!("must be positive, got {}", self.exponent_rel_tol),
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub dims: Vec<usize>,
    pub corners: Vec<usize>,
    /// Absolute strengths; when empty, `lambda_fractions` is used.
    pub lambdas: Vec<f64>,
    pub lambda_fractions: Vec<f64>,
    /// Also run the heat flow and fit the decay exponent per triple.
    pub evolve: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4],
            corners: vec![0, 1, 2],
            lambdas: Vec::new(),
            lambda_fractions: vec![0.0, 0.5, 1.0],
            evolve: true,
        }
    }
}

/// One (N, k, λ) point of a sweep, or the reason it was skipped.
pub type SweepPoint = std::result::Result<CornerParams, String>;

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map_or_else(|| "config".to_string(), |span| field_at(text, span.start));
            CliError::invalid(field, e.message().trim().to_string())
        })
    }

    /// The echoed form, with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn params(&self) -> Result<CornerParams, CliError> {
        let p = &self.params;
        let dim = p.dim.ok_or_else(|| CliError::invalid("params.dim", "missing".into()))?;
        let corner = p
            .corner
            .ok_or_else(|| CliError::invalid("params.corner", "missing".into()))?;
        let result = match (p.lambda, p.lambda_fraction) {
            (Some(l), None) => CornerParams::new(dim, corner, l),
            (None, Some(f)) => CornerParams::with_fraction(dim, corner, f),
            (None, None) => {
                return Err(CliError::invalid(
                    "params.lambda",
                    "missing (or give lambda_fraction)".into(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(CliError::invalid(
                    "params.lambda",
                    "give either lambda or lambda_fraction, not both".into(),
                ))
            }
        };
        result.map_err(|e| {
            let field = match e {
                crate::Error::InvalidDimension { .. } => "params.dim/params.corner",
                _ if p.lambda.is_some() => "params.lambda",
                _ => "params.lambda_fraction",
            };
            CliError::invalid(field, e.to_string())
        })
    }

    pub fn grid(&self) -> Result<RadialGrid, CliError> {
        let g = &self.grid;
        RadialGrid::new(g.r_min, g.r_max, g.n).map_err(|e| CliError::invalid("grid", e.to_string()))
    }

    pub fn eigen_grids(&self) -> Result<Vec<RadialGrid>, CliError> {
        let base = self.grid()?;
        if self.eigen.n_grid.is_empty() {
            return Ok(vec![base]);
        }
        self.eigen
            .n_grid
            .iter()
            .map(|&n| {
                base.with_n(n)
                    .map_err(|e| CliError::invalid("eigen.n_grid", e.to_string()))
            })
            .collect()
    }

    pub fn validate_eigen(&self) -> Result<(), CliError> {
        if !(self.eigen.tol > 0.0) {
            return Err(CliError::invalid(
                "eigen.tol",
                format!("must be positive, got {}", self.eigen.tol),
            ));
        }
        if let Some(t) = self.eigen.rel_tol.filter(|t| !(*t > 0.0)) {
            return Err(CliError::invalid("eigen.rel_tol", format!("must be positive, got {t}")));
        }
        Ok(())
    }

    pub fn validate_hardy(&self) -> Result<(), CliError> {
        let h = &self.hardy;
        if h.epsilons.is_empty() {
            return Err(CliError::invalid("hardy.epsilons", "empty list".into()));
        }
        if let Some(e) = h.epsilons.iter().find(|e| !(**e > 0.0 && **e < 0.25)) {
            return Err(CliError::invalid(
                "hardy.epsilons",
                format!("each epsilon must lie in (0, 1/4), got {e}"),
            ));
        }
        if !(h.log_gap_bound > 0.0) {
            return Err(CliError::invalid(
                "hardy.log_gap_bound",
                format!("must be positive, got {}", h.log_gap_bound),
            ));
        }
        Ok(())
    }

    pub fn validate_evolve(&self) -> Result<(), CliError> {
        self.evolve.validate()
    }

    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>, CliError> {
        let s = &self.sweep;
        if s.dims.is_empty() || s.corners.is_empty() {
            return Err(CliError::invalid("sweep.dims/sweep.corners", "empty list".into()));
        }
        let (values, absolute) = if s.lambdas.is_empty() {
            (&s.lambda_fractions, false)
        } else {
            (&s.lambdas, true)
        };
        if values.is_empty() {
            return Err(CliError::invalid(
                "sweep.lambdas",
                "need lambdas or lambda_fractions".into(),
            ));
        }
        let mut points = Vec::new();
        for &n in &s.dims {
            for &k in &s.corners {
                for &l in values {
                    let p = if absolute {
                        CornerParams::new(n, k, l)
                    } else {
                        CornerParams::with_fraction(n, k, l)
                    };
                    points.push(p.map_err(|e| format!("N={n}, k={k}, value={l}: {e}")));
                }
            }
        }
        Ok(points)
    }
}

/// `section.key` for the line holding byte `offset` of a TOML document.
fn field_at(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    let key = line.split('=').next().unwrap_or("").trim().trim_matches(['[', ']']);
    let section = before[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('['))
        .map(|l| l.trim_matches(['[', ']']).trim());
    match section {
        Some(sec) if !key.is_empty() && key != sec => format!("{sec}.{key}"),
        _ if !key.is_empty() => key.to_string(),
        _ => "config".to_string(),
    }
}
