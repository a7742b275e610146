//! The constructive pipeline: fixed-point solves of the regularized systems,
//! the four-parameter continuation down to the target system, Helmholtz
//! splitting, pressure reconstruction, the energy-descent weak solver and
//! the divergence diagnostic.

mod cascade;
mod regularized;
mod weak;

pub use cascade::{cascade, cascade_with_init, CascadeSchedule, StageLog};
pub use regularized::{solve_regularized, StageSystem};
pub use weak::{weak_solve, weak_solve_with_init, WeakSolution};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::field::{Field, ScalarField, VectorField};
use crate::norms;
use crate::potentials;
use crate::real::Real;
use crate::spectral;
use crate::stress::{self, StressParams};

/// Solver output: velocity, pressure, and the measured diagnostics.
#[derive(Debug, Clone)]
pub struct Solution<T: Real> {
    pub u: VectorField<T>,
    pub pi: ScalarField<T>,
    pub params: StressParams,
    pub diagnostics: Diagnostics,
}

/// Scalar diagnostics of a solve; serialize as-is into `diagnostics.json`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    /// Max norm of the zero-mean part of the stage-system residual.
    pub residual_linf: f64,
    /// Magnitude of the removed residual mean (finite-box artifact).
    pub residual_mean: f64,
    pub div_l2: f64,
    pub div_linf: f64,
    pub iterations: usize,
    /// Measured estimate ratios, keyed by a stable name.
    pub estimate_ratios: BTreeMap<String, f64>,
    /// Per-stage log of a continuation run (empty for single solves).
    pub stages: Vec<StageLog>,
}

/// Norms of `U = ∇·u` and the max-norm residual of the elliptic equation
/// `ΔU + (p-2)/2 · ∇U·∇|∇u|² / (mu+|∇u|²) = 0` that `U` satisfies at a
/// solution of the target system.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DivergenceDiagnostics {
    pub u_l2: f64,
    pub u_linf: f64,
    /// `None` when `mu = 0` (the coefficient degenerates at critical nodes).
    pub pde_residual: Option<f64>,
}

/// Evaluate the divergence diagnostic on a velocity field.
pub fn divergence_residual<T: Real>(
    u: &VectorField<T>,
    sp: &StressParams,
) -> DivergenceDiagnostics {
    let div = spectral::divergence(u);
    let u_l2 = norms::l2_norm(&div);
    let u_linf = norms::max_norm(&div);
    if sp.mu <= 0.0 {
        return DivergenceDiagnostics {
            u_l2,
            u_linf,
            pde_residual: None,
        };
    }
    let lap_div = spectral::laplacian(&div);
    let grad_div = spectral::grad_scalar(&div);
    let grad_u = spectral::grad_vector(u);
    // |∇u|², dealiased before differentiation
    let mut q = grad_u.magnitude();
    for v in q.data_mut() {
        *v = *v * *v;
    }
    let q = spectral::dealias(&q);
    let grad_q = spectral::grad_scalar(&q);
    let grid = *u.grid();
    let nodes = grid.node_count();
    let mut worst = 0.0f64;
    for idx in 0..nodes {
        let mut dot = 0.0f64;
        for d in 0..grid.dim() {
            dot += grad_div.comp(d)[idx].as_f64() * grad_q.comp(d)[idx].as_f64();
        }
        let a1 = sp.mu + q.data()[idx].as_f64().max(0.0);
        let r = lap_div.data()[idx].as_f64() + 0.5 * (sp.p - 2.0) * dot / a1;
        worst = worst.max(r.abs());
    }
    DivergenceDiagnostics {
        u_l2,
        u_linf,
        pde_residual: Some(worst),
    }
}

/// Helmholtz split `f = F + ∇ψ` with `Δψ = ∇·f`; `F` is solenoidal to
/// spectral precision.
pub fn helmholtz_decompose<T: Real>(f: &VectorField<T>) -> (VectorField<T>, ScalarField<T>) {
    let psi = spectral::inverse_laplacian(&spectral::divergence(f));
    let grad_psi = spectral::grad_scalar(&psi);
    let mut solenoidal = f.clone();
    solenoidal.axpy(T::of(-1.0), &grad_psi);
    (solenoidal, psi)
}

/// Pressure of the full problem: the velocity-induced functional (cut-off
/// free for `mu > 0`, principal-value for `mu = 0`) plus the gradient part
/// `ψ` of the forcing. Zero mean.
pub fn reconstruct_pressure<T: Real>(
    u: &VectorField<T>,
    f_gradient_part: &ScalarField<T>,
    sp: &StressParams,
) -> Result<ScalarField<T>> {
    let mut pi = velocity_pressure(u, sp)?;
    pi.axpy(T::one(), f_gradient_part);
    pi.remove_mean();
    Ok(pi)
}

/// The velocity-induced pressure functional in the variant matching `mu`.
pub(crate) fn velocity_pressure<T: Real>(
    u: &VectorField<T>,
    sp: &StressParams,
) -> Result<ScalarField<T>> {
    if sp.p == 2.0 {
        return Ok(ScalarField::zeros(u.grid()));
    }
    if sp.mu > 0.0 {
        let d = potentials::pressure_density_with(u, sp, 0.0, None)?;
        Ok(potentials::newtonian_divergence(&d))
    } else {
        Ok(potentials::singular_pressure(u, sp.p))
    }
}

/// Max-norm residual of the strong equation `∇·S(∇u) - ∇π - f`, used by the
/// pressure-reconstruction consistency check.
pub fn momentum_residual<T: Real>(
    u: &VectorField<T>,
    pi: &ScalarField<T>,
    f: &VectorField<T>,
    sp: &StressParams,
) -> f64 {
    let grad_u = spectral::grad_vector(u);
    let s = stress::stress(&grad_u, sp);
    let s = spectral::dealias(&s);
    let mut r = spectral::divergence_tensor2(&s);
    let grad_pi = spectral::grad_scalar(pi);
    r.axpy(T::of(-1.0), &grad_pi);
    r.axpy(T::of(-1.0), f);
    r.remove_mean();
    norms::max_norm(&r)
}
