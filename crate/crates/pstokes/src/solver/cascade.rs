//! Parameter continuation: artificial diffusion, smoothing width, cut-off
//! radius and offset are driven to their limits one after the other, each
//! stage warm-starting from the previous solution.
//!
//! Stage order mirrors the construction: the diffusion sequence runs first
//! (with the head values of the other parameters), then `ε = 0`, then the
//! smoothing widths down to `η = 0`, then the cut-off radii up to the cap
//! (past which the cut-off is identically one), then the offset sequence.
//! A final `mu = 0` entry is realized as an energy-descent refinement and a
//! principal-value pressure. The inner tolerance tightens on the last three
//! offset stages so the divergence diagnostic is solve-limited, not
//! schedule-limited.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, VectorField};
use crate::grid::Grid;
use crate::norms;
use crate::real::Real;
use crate::solver::regularized::{finish_solution, picard, StageSystem};
use crate::solver::weak::weak_solve_with_init;
use crate::solver::{divergence_residual, velocity_pressure, Solution};
use crate::spectral;
use crate::stress::StressParams;

/// Continuation schedule. All sequences are finite and strictly monotone;
/// the offset sequence may end with exactly zero, which switches the final
/// stage to the weak solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeSchedule {
    pub epsilon_seq: Vec<f64>,
    pub eta_seq: Vec<f64>,
    pub rho_seq: Vec<f64>,
    pub mu_seq: Vec<f64>,
    pub inner_tol: f64,
    pub max_picard: usize,
}

impl CascadeSchedule {
    /// Geometric default: diffusion and smoothing halve, cut-off radii
    /// double to the cap, offsets halve from 1 down to `mu_target`
    /// (appending an exact zero when the target is zero).
    pub fn default_for(grid: &Grid, mu_target: f64) -> Self {
        let h = grid.spacing();
        let l = grid.box_length();
        let mut mu_seq = Vec::new();
        let mut mu = 1.0;
        let floor = if mu_target > 0.0 { mu_target } else { 1e-3 };
        while mu > floor * (1.0 + 1e-12) {
            mu_seq.push(mu);
            mu *= 0.5;
        }
        mu_seq.push(floor);
        if mu_target == 0.0 {
            mu_seq.push(0.0);
        }
        Self {
            epsilon_seq: vec![0.1, 0.05],
            eta_seq: vec![4.0 * h, 2.0 * h],
            rho_seq: vec![l / 8.0, l / 4.0],
            mu_seq,
            inner_tol: 1e-9,
            max_picard: 800,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let strictly_decreasing_positive = |name: &str, s: &[f64]| -> Result<()> {
            for w in s.windows(2) {
                if !(w[1] < w[0]) {
                    return Err(Error::Config(format!(
                        "{name} must be strictly decreasing, got {s:?}"
                    )));
                }
            }
            if s.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be nonnegative and finite, got {s:?}"
                )));
            }
            Ok(())
        };
        strictly_decreasing_positive("epsilon_seq", &self.epsilon_seq)?;
        strictly_decreasing_positive("eta_seq", &self.eta_seq)?;
        strictly_decreasing_positive("mu_seq", &self.mu_seq)?;
        if self.mu_seq.is_empty() || self.mu_seq[0] <= 0.0 {
            return Err(Error::Config(
                "mu_seq must start with a positive offset".into(),
            ));
        }
        if self
            .mu_seq
            .iter()
            .take(self.mu_seq.len().saturating_sub(1))
            .any(|&m| m <= 0.0)
        {
            return Err(Error::Config(
                "only the final mu_seq entry may be zero".into(),
            ));
        }
        for w in self.rho_seq.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Config(format!(
                    "rho_seq must be strictly increasing, got {:?}",
                    self.rho_seq
                )));
            }
        }
        let cap = grid.box_length() / 4.0;
        if self.rho_seq.iter().any(|&r| r <= 0.0 || r > cap * (1.0 + 1e-12)) {
            return Err(Error::Config(format!(
                "rho_seq entries must lie in (0, L/4 = {cap}], got {:?}",
                self.rho_seq
            )));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::Config("inner_tol must be positive".into()));
        }
        if self.max_picard == 0 {
            return Err(Error::Config("max_picard must be positive".into()));
        }
        Ok(())
    }
}

/// One stage of a continuation run (diagnostics only).
#[derive(Debug, Clone, Serialize)]
pub struct StageLog {
    pub label: String,
    pub epsilon: f64,
    pub eta: f64,
    /// Cut-off radius; `None` once the cut-off is identically one.
    pub rho: Option<f64>,
    pub mu: f64,
    pub tol: f64,
    pub iterations: usize,
    pub residual: f64,
    pub div_l2: f64,
    pub delta_u_l2: f64,
    /// Residual of the elliptic equation obeyed by `∇·u` (offset stages).
    pub div_pde_residual: Option<f64>,
}

struct StageSpec {
    label: String,
    epsilon: f64,
    eta: f64,
    rho: Option<f64>,
    mu: f64,
    tol_factor: f64,
}

fn build_stages(schedule: &CascadeSchedule, grid: &Grid) -> Vec<StageSpec> {
    let eta0 = schedule.eta_seq.first().copied().unwrap_or(0.0);
    let rho0 = schedule.rho_seq.first().copied();
    let mu0 = schedule.mu_seq[0];
    let cap = grid.box_length() / 4.0;
    let mut stages = Vec::new();
    for &eps in &schedule.epsilon_seq {
        stages.push(StageSpec {
            label: format!("epsilon={eps:.3e}"),
            epsilon: eps,
            eta: eta0,
            rho: rho0,
            mu: mu0,
            tol_factor: 1.0,
        });
    }
    stages.push(StageSpec {
        label: "epsilon=0".into(),
        epsilon: 0.0,
        eta: eta0,
        rho: rho0,
        mu: mu0,
        tol_factor: 1.0,
    });
    for &eta in schedule.eta_seq.iter().skip(1) {
        stages.push(StageSpec {
            label: format!("eta={eta:.3e}"),
            epsilon: 0.0,
            eta,
            rho: rho0,
            mu: mu0,
            tol_factor: 1.0,
        });
    }
    if eta0 > 0.0 {
        stages.push(StageSpec {
            label: "eta=0".into(),
            epsilon: 0.0,
            eta: 0.0,
            rho: rho0,
            mu: mu0,
            tol_factor: 1.0,
        });
    }
    let mut chi_gone = rho0.is_none();
    for &rho in schedule.rho_seq.iter().skip(1) {
        let at_cap = rho >= cap * (1.0 - 1e-12);
        stages.push(StageSpec {
            label: if at_cap {
                "rho=cap (cutoff off)".into()
            } else {
                format!("rho={rho:.3e}")
            },
            epsilon: 0.0,
            eta: 0.0,
            rho: if at_cap { None } else { Some(rho) },
            mu: mu0,
            tol_factor: 1.0,
        });
        chi_gone |= at_cap;
    }
    if !chi_gone {
        stages.push(StageSpec {
            label: "cutoff off".into(),
            epsilon: 0.0,
            eta: 0.0,
            rho: None,
            mu: mu0,
            tol_factor: 1.0,
        });
    }
    let mut final_mu = mu0;
    for &mu in schedule.mu_seq.iter().skip(1).filter(|&&m| m > 0.0) {
        stages.push(StageSpec {
            label: format!("mu={mu:.3e}"),
            epsilon: 0.0,
            eta: 0.0,
            rho: None,
            mu,
            tol_factor: 1.0,
        });
        final_mu = mu;
    }
    // polish stages at the target offset: parameters fixed, tolerance
    // tightening, so the final stages measure pure solve refinement
    for (i, factor) in [0.5, 0.25, 0.125].into_iter().enumerate() {
        stages.push(StageSpec {
            label: format!("polish[{i}] mu={final_mu:.3e}"),
            epsilon: 0.0,
            eta: 0.0,
            rho: None,
            mu: final_mu,
            tol_factor: factor,
        });
    }
    stages
}

/// Continuation solve of the target system for divergence-free forcing.
pub fn cascade<T: Real>(
    f: &VectorField<T>,
    p: f64,
    schedule: &CascadeSchedule,
) -> Result<Solution<T>> {
    cascade_with_init(f, p, schedule, None)
}

/// Continuation solve with an explicit initial guess (defaults to zero).
pub fn cascade_with_init<T: Real>(
    f: &VectorField<T>,
    p: f64,
    schedule: &CascadeSchedule,
    init: Option<&VectorField<T>>,
) -> Result<Solution<T>> {
    let grid = *f.grid();
    schedule.validate(&grid)?;
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Parameter(format!(
            "cascade exponent p must lie in (1, 2], got {p}"
        )));
    }
    let f = spectral::dealias(f);
    let f_scale = norms::max_norm(&f);
    let div_f = norms::l2_norm(&spectral::divergence(&f));
    if div_f > 1e-8 * f_scale.max(1e-300) {
        return Err(Error::Contract(
            "cascade forcing must be divergence-free; split general forcing first".into(),
        ));
    }
    let tol_abs = schedule.inner_tol * f_scale.max(1e-300);

    let mut u = match init {
        Some(u0) => spectral::dealias(u0),
        None => VectorField::zeros(&grid),
    };
    u.remove_mean();

    let stages = build_stages(schedule, &grid);
    let mut logs: Vec<StageLog> = Vec::with_capacity(stages.len() + 1);
    let mut total_iters = 0usize;
    let mut last_stage: Option<StageSystem<T>> = None;
    let mut last_res = 0.0f64;
    let mut last_mean = 0.0f64;

    for spec in &stages {
        let sp = StressParams { p, mu: spec.mu };
        let stage = StageSystem::new(&grid, sp, spec.epsilon, spec.eta, spec.rho)
            .map_err(|e| stage_error(&spec.label, "setup", e))?;
        let tol = tol_abs * spec.tol_factor;
        let prev = u.clone();
        let (next, iters, res, mean) = picard(&stage, &f, &u, tol, schedule.max_picard)
            .map_err(|e| stage_error(&spec.label, "fixed-point iteration", e))?;
        u = next;
        total_iters += iters;
        let mut delta = prev;
        delta.axpy(T::of(-1.0), &u);
        let div = divergence_residual(&u, &sp);
        logs.push(StageLog {
            label: spec.label.clone(),
            epsilon: spec.epsilon,
            eta: spec.eta,
            rho: spec.rho,
            mu: spec.mu,
            tol,
            iterations: iters,
            residual: res,
            div_l2: div.u_l2,
            delta_u_l2: norms::l2_norm(&delta),
            div_pde_residual: div.pde_residual,
        });
        last_res = res;
        last_mean = mean;
        last_stage = Some(stage);
    }

    let final_mu_zero = schedule.mu_seq.last().copied() == Some(0.0);
    if final_mu_zero {
        let sp = StressParams { p, mu: 0.0 };
        let prev = u.clone();
        let weak = weak_solve_with_init(&f, p, schedule.inner_tol.max(1e-12), 4000, Some(&u))
            .map_err(|e| stage_error("mu=0 (weak refinement)", "energy descent", e))?;
        u = weak.u;
        total_iters += weak.iterations;
        let mut delta = prev;
        delta.axpy(T::of(-1.0), &u);
        let div = divergence_residual(&u, &sp);
        logs.push(StageLog {
            label: "mu=0 (weak refinement)".into(),
            epsilon: 0.0,
            eta: 0.0,
            rho: None,
            mu: 0.0,
            tol: schedule.inner_tol,
            iterations: weak.iterations,
            residual: weak.optimality_residual,
            div_l2: div.u_l2,
            delta_u_l2: norms::l2_norm(&delta),
            div_pde_residual: None,
        });
        last_res = weak.optimality_residual;
        last_mean = 0.0;

        let pi = velocity_pressure(&u, &sp)?;
        let mut sol = assemble(&grid, u, pi, sp, &f, total_iters, last_res, last_mean)?;
        sol.diagnostics.stages = logs;
        return Ok(sol);
    }

    let stage = last_stage.expect("at least one stage");
    let mut sol = finish_solution(stage, u, &f, total_iters, last_res, last_mean)?;
    // the target-system pressure drops the stage regularizers
    sol.pi = velocity_pressure(&sol.u, &sol.params)?;
    sol.diagnostics.stages = logs;
    Ok(sol)
}

fn stage_error(label: &str, detail: &str, e: Error) -> Error {
    Error::Cascade {
        stage: label.to_string(),
        detail: detail.to_string(),
        source: Box::new(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble<T: Real>(
    _grid: &Grid,
    u: VectorField<T>,
    pi: crate::field::ScalarField<T>,
    sp: StressParams,
    f: &VectorField<T>,
    iterations: usize,
    residual: f64,
    residual_mean: f64,
) -> Result<Solution<T>> {
    let div = divergence_residual(&u, &sp);
    let grad_u = spectral::grad_vector(&u);
    let hess = spectral::hessian_vector(&u);
    let mut ratios = std::collections::BTreeMap::new();
    let f_l2 = norms::l2_norm(f);
    if f_l2 > 0.0 {
        ratios.insert("d2u_l2_over_f_l2".to_string(), norms::l2_norm(&hess) / f_l2);
    }
    ratios.insert("grad_u_lp".to_string(), norms::lq_norm(&grad_u, sp.p));
    ratios.insert(
        "pi_lp_conj".to_string(),
        norms::lq_norm(&pi, sp.p / (sp.p - 1.0)),
    );
    Ok(Solution {
        u,
        pi,
        params: sp,
        diagnostics: crate::solver::Diagnostics {
            residual_linf: residual,
            residual_mean,
            div_l2: div.u_l2,
            div_linf: div.u_linf,
            iterations,
            estimate_ratios: ratios,
            stages: Vec::new(),
        },
    })
}
