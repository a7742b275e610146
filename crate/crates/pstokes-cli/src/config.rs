//! Run configuration: one JSON document drives every command.

use std::path::Path;

use pstokes::grid::Grid;
use pstokes::solver::CascadeSchedule;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Cascade,
    Verify,
    CzEstimate,
    Sweep,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Command::Solve => "solve",
            Command::Cascade => "cascade",
            Command::Verify => "verify",
            Command::CzEstimate => "cz-estimate",
            Command::Sweep => "sweep",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_axis: usize,
    pub box_length: f64,
}

impl GridSpec {
    pub fn build(&self) -> pstokes::Result<Grid> {
        Grid::new(self.dim, self.points_per_axis, self.box_length)
    }
}

/// Built-in analytic forcing profiles, or a field file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    /// Divergence-free single Fourier mode.
    SingleMode { mode: Vec<i64>, amplitude: f64 },
    /// Compact polynomial bump times a solenoidal rotation.
    SolenoidalBump { radius: f64, amplitude: f64 },
    /// Seeded random band-limited solenoidal field.
    Random { decay: f64, amplitude: f64 },
    /// Field file in the binary field format.
    File { path: String },
}

/// Regularization knobs of a single `solve` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegSpec {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Smoothing width; `null` means two grid spacings.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Cut-off radius; `null` means an eighth of the box.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub delta: f64,
}

fn default_epsilon() -> f64 {
    0.1
}

impl Default for RegSpec {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            eta: None,
            rho: None,
            delta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CzSpec {
    #[serde(default = "default_cz_exponents")]
    pub exponents: Vec<f64>,
    #[serde(default = "default_cz_method")]
    pub method: pstokes::cz::CzMethod,
    #[serde(default = "default_cz_iters")]
    pub iters: usize,
}

fn default_cz_exponents() -> Vec<f64> {
    vec![4.0 / 3.0, 2.0, 3.0, 4.0]
}

fn default_cz_method() -> pstokes::cz::CzMethod {
    pstokes::cz::CzMethod::PowerIteration
}

fn default_cz_iters() -> usize {
    12
}

impl Default for CzSpec {
    fn default() -> Self {
        Self {
            exponents: default_cz_exponents(),
            method: default_cz_method(),
            iters: default_cz_iters(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub p_values: Vec<f64>,
    pub mu_values: Vec<f64>,
}

/// The whole run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub grid: GridSpec,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Offset of a single solve, or the continuation target.
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub reg: RegSpec,
    /// Explicit continuation schedule; defaults to the geometric one.
    #[serde(default)]
    pub schedule: Option<CascadeSchedule>,
    #[serde(default)]
    pub forcing: Option<ForcingSpec>,
    /// Integrability exponent of the estimate family (`q > dim`).
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Verification suites to run (empty = all).
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub cz: CzSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_p() -> f64 {
    2.0
}
fn default_mu() -> f64 {
    1.0
}
fn default_q() -> f64 {
    4.0
}
fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    800
}
fn default_seed() -> u64 {
    0
}

/// A machine-readable validation failure.
#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub errors: Vec<String>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ValidationReport> {
        let text = std::fs::read_to_string(path).map_err(|e| ValidationReport {
            valid: false,
            errors: vec![format!("cannot read {}: {e}", path.display())],
        })?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| ValidationReport {
            valid: false,
            errors: vec![format!("malformed configuration: {e}")],
        })?;
        cfg.validate().map(|_| cfg)
    }

    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut errors = Vec::new();
        if let Err(e) = self.grid.build() {
            errors.push(e.to_string());
        }
        if !(self.p > 1.0 && self.p <= 2.0) {
            errors.push(format!("p must lie in (1, 2], got {}", self.p));
        }
        if !(self.mu >= 0.0) {
            errors.push(format!("mu must be >= 0, got {}", self.mu));
        }
        if !(self.tol > 0.0) {
            errors.push(format!("tol must be positive, got {}", self.tol));
        }
        match self.command {
            Command::Solve => {
                if self.forcing.is_none() {
                    errors.push("solve requires a forcing".into());
                }
                if self.mu <= 0.0 {
                    errors.push("solve requires mu > 0 (mu = 0 runs through cascade)".into());
                }
            }
            Command::Cascade => {
                if self.forcing.is_none() {
                    errors.push("cascade requires a forcing".into());
                }
            }
            Command::Sweep => {
                if self.forcing.is_none() {
                    errors.push("sweep requires a forcing".into());
                }
                match &self.sweep {
                    None => errors.push("sweep requires a sweep block".into()),
                    Some(s) if s.p_values.is_empty() || s.mu_values.is_empty() => {
                        errors.push("sweep value lists must be nonempty".into())
                    }
                    _ => {}
                }
            }
            Command::Verify => {
                for name in &self.checks {
                    let known = pstokes::verify::suites::SUITE_NAMES
                        .contains(&name.as_str())
                        || name == "uniqueness"
                        || name == "homogeneity";
                    if !known {
                        errors.push(format!(
                            "unknown check '{name}'; known: {}, uniqueness, homogeneity",
                            pstokes::verify::suites::SUITE_NAMES.join(", ")
                        ));
                    }
                }
            }
            Command::CzEstimate => {
                if self.cz.exponents.is_empty() {
                    errors.push("cz-estimate requires at least one exponent".into());
                }
                if self.cz.exponents.iter().any(|&s| !(s > 1.0)) {
                    errors.push("cz exponents must exceed 1".into());
                }
            }
        }
        if let Ok(grid) = self.grid.build() {
            if let Some(ForcingSpec::SingleMode { mode, .. }) = &self.forcing {
                if mode.len() != grid.dim() {
                    errors.push(format!(
                        "single_mode forcing needs {} components, got {}",
                        grid.dim(),
                        mode.len()
                    ));
                }
                if mode.iter().all(|&m| m == 0) {
                    errors.push("single_mode forcing must have a nonzero mode".into());
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport {
                valid: false,
                errors,
            })
        }
    }
}
