//! Damped fixed-point solve of one regularized stage system.
//!
//! The stage system, in the form divided by `a = (mu+|∇u|²)^{(2-p)/2}`, is
//!
//! ```text
//! ε Δu + Δu/(mu+|∇u|²)^{2-p} + (p-2) A·J_η(∇∇u χ / a)
//!     = ∇Π(u,χ)/a + f/a
//! ```
//!
//! with `A` the fourth-order coefficient tensor at exponent `(4-p)/2` and
//! `Π` the pressure functional built from the same smoothed second gradient.
//! Given an iterate, all coefficients are frozen, the residual of the system
//! is formed, and a constant-coefficient update is applied through the
//! preconditioner `(ε + 1/ā)Δ` with `ā` the mean of `(mu+|∇u|²)^{2-p}`.
//! Damping is adapted from the residual history. On the torus the system is
//! solvable only up to a constant vector, so the residual is measured on its
//! zero-mean part and the removed mean is reported as a diagnostic.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, VectorField};
use crate::mollify::{self, Mollifier};
use crate::norms;
use crate::potentials;
use crate::real::Real;
use crate::solver::{divergence_residual, Diagnostics, Solution};
use crate::spectral;
use crate::stress::{self, RegParams, StressParams};

/// One stage system of the continuation, with its regularizers resolved
/// against a grid (`chi = None` means the cut-off is identically one).
pub struct StageSystem<T: Real> {
    pub sp: StressParams,
    pub epsilon: f64,
    pub eta: f64,
    pub chi: Option<ScalarField<T>>,
    mollifier: Mollifier<T>,
}

impl<T: Real> StageSystem<T> {
    /// Resolve a stage from raw parameters. `rho >= L/4` (the cap) selects
    /// the cut-off-free system.
    pub fn new(
        grid: &crate::grid::Grid,
        sp: StressParams,
        epsilon: f64,
        eta: f64,
        rho: Option<f64>,
    ) -> Result<Self> {
        if sp.mu <= 0.0 {
            return Err(Error::Contract(
                "stage systems require mu > 0; the mu = 0 limit runs through the weak solver"
                    .into(),
            ));
        }
        let cap = grid.box_length() / 4.0;
        let chi = match rho {
            Some(r) if r < cap * (1.0 - 1e-12) => Some(mollify::cutoff::<T>(grid, r)?),
            _ => None,
        };
        Ok(Self {
            sp,
            epsilon,
            eta,
            chi,
            mollifier: Mollifier::new(grid, eta)?,
        })
    }

    /// Residual of the stage system at `u` (zero-mean part) together with
    /// the magnitude of the removed mean.
    pub fn residual(&self, u: &VectorField<T>, f: &VectorField<T>) -> Result<(VectorField<T>, f64)> {
        let sp = &self.sp;
        let grad_u = spectral::grad_vector(u);
        let hess = spectral::hessian_vector(u);
        let lap = spectral::laplacian(u);
        // inverse weights 1/a_{2-p} and 1/a
        let inv_a2p = stress::weight(&grad_u, -(2.0 - sp.p), sp, 0.0)?;
        let inv_a = stress::weight(&grad_u, -(2.0 - sp.p) / 2.0, sp, 0.0)?;
        let smoothed = smoothed_hessian_with(
            &grad_u,
            &hess,
            sp,
            &self.mollifier,
            self.chi.as_ref(),
        )?;
        // coefficient-tensor term (p-2) A^{(4-p)/2} · M
        let mut aterm =
            stress::contract_outer(&grad_u, (4.0 - sp.p) / 2.0, sp, &smoothed, false)?;
        aterm.scale(T::of(sp.p - 2.0));
        // pressure density (p-2) A¹-transposed · M and its potential
        let mut density = stress::contract_outer(&grad_u, 1.0, sp, &smoothed, true)?;
        density.scale(T::of(sp.p - 2.0));
        let density = spectral::dealias(&density);
        let pi = potentials::newtonian_divergence(&density);
        let grad_pi = spectral::grad_scalar(&pi);

        let grid = *u.grid();
        let nodes = grid.node_count();
        let mut r = VectorField::zeros(&grid);
        let eps = T::of(self.epsilon);
        for c in 0..grid.dim() {
            let out = r.comp_mut(c);
            let lapc = lap.comp(c);
            let atc = aterm.comp(c);
            let gpc = grad_pi.comp(c);
            let fc = f.comp(c);
            for idx in 0..nodes {
                let ia2p = inv_a2p.data()[idx];
                let ia = inv_a.data()[idx];
                out[idx] =
                    eps * lapc[idx] + lapc[idx] * ia2p + atc[idx] - (gpc[idx] + fc[idx]) * ia;
            }
        }
        // the iterate lives on the dealias band, so the solvable part of the
        // residual is its band projection; what lies above the cutoff is
        // aliasing content of the pointwise products
        let mut r = spectral::dealias(&r);
        let mut mean_mag = 0.0f64;
        let inv_n = 1.0 / nodes as f64;
        for c in 0..grid.dim() {
            let comp = r.comp_mut(c);
            let mut s = 0.0f64;
            for v in comp.iter() {
                s += v.as_f64();
            }
            let m = s * inv_n;
            mean_mag += m * m;
            let mt = T::of(m);
            for v in comp.iter_mut() {
                *v = *v - mt;
            }
        }
        Ok((r, mean_mag.sqrt()))
    }

    /// Mean of `(mu+|∇u|²)^{2-p}`, the frozen scalar weight of the
    /// constant-coefficient preconditioner.
    fn mean_weight(&self, u: &VectorField<T>) -> Result<f64> {
        let grad_u = spectral::grad_vector(u);
        let a2p = stress::weight(&grad_u, 2.0 - self.sp.p, &self.sp, 0.0)?;
        Ok(a2p.mean().as_f64())
    }
}

/// Shared smoothed second gradient `J_η(∇∇u · χ / a)`.
fn smoothed_hessian_with<T: Real>(
    grad_u: &crate::field::Tensor2Field<T>,
    hess: &crate::field::Tensor3Field<T>,
    sp: &StressParams,
    mollifier: &Mollifier<T>,
    chi: Option<&ScalarField<T>>,
) -> Result<crate::field::Tensor3Field<T>> {
    let nodes = grad_u.grid().node_count();
    let inv_a = stress::weight(grad_u, -(2.0 - sp.p) / 2.0, sp, 0.0)?;
    let mut w = hess.clone();
    for c in 0..w.ncomp() {
        let comp = w.comp_mut(c);
        for idx in 0..nodes {
            let mut v = comp[idx] * inv_a.data()[idx];
            if let Some(chi) = chi {
                v = v * chi.data()[idx];
            }
            comp[idx] = v;
        }
    }
    Ok(spectral::dealias(&mollifier.apply(&w)))
}

/// Solve one regularized stage by damped fixed-point iteration.
///
/// `tol` bounds the max norm of the (zero-mean) stage residual; failure to
/// reach it within `max_iter` iterations is a divergence error carrying the
/// residual history.
pub fn solve_regularized<T: Real>(
    f: &VectorField<T>,
    sp: &StressParams,
    rg: &RegParams,
    tol: f64,
    max_iter: usize,
    u0: &VectorField<T>,
) -> Result<Solution<T>> {
    let grid = *f.grid();
    let stage = StageSystem::new(&grid, *sp, rg.epsilon, rg.eta, Some(rg.rho))?;
    let f = spectral::dealias(f);
    let (u, iterations, residual_linf, residual_mean) =
        picard(&stage, &f, u0, tol, max_iter)?;
    finish_solution(stage, u, &f, iterations, residual_linf, residual_mean)
}

pub(crate) fn picard<T: Real>(
    stage: &StageSystem<T>,
    f: &VectorField<T>,
    u0: &VectorField<T>,
    tol: f64,
    max_iter: usize,
) -> Result<(VectorField<T>, usize, f64, f64)> {
    let mut u = spectral::dealias(u0);
    u.remove_mean();
    let omega_max: f64 = 0.9;
    let mut omega: f64 = 0.5;
    let mut history: Vec<f64> = Vec::new();
    for it in 0..=max_iter {
        let (r, mean_mag) = stage.residual(&u, f)?;
        let res = norms::max_norm(&r);
        history.push(res);
        if res <= tol {
            return Ok((u, it, res, mean_mag));
        }
        if it == max_iter {
            break;
        }
        if it >= 2 {
            let prev = history[it - 1];
            if res > prev {
                omega = (omega * 0.5).max(0.05);
            } else if res > 0.9 * prev {
                omega = (omega * 1.1).min(omega_max);
            } else {
                omega = (omega * 1.05).min(omega_max);
            }
        }
        let coeff = stage.epsilon + 1.0 / stage.mean_weight(&u)?;
        let mut step = spectral::inverse_laplacian(&r);
        step.scale(T::of(-omega / coeff));
        u.axpy(T::one(), &step);
        u = spectral::dealias(&u);
        u.remove_mean();
    }
    Err(Error::Divergence {
        iterations: max_iter,
        last: *history.last().unwrap_or(&f64::NAN),
        history,
    })
}

pub(crate) fn finish_solution<T: Real>(
    stage: StageSystem<T>,
    u: VectorField<T>,
    f: &VectorField<T>,
    iterations: usize,
    residual_linf: f64,
    residual_mean: f64,
) -> Result<Solution<T>> {
    let sp = stage.sp;
    // stage-consistent pressure: same smoothing and cut-off as the system
    let pi = {
        let chi = stage.chi.as_ref();
        let d = if stage.eta > 0.0 || chi.is_some() {
            let grad_u = spectral::grad_vector(&u);
            let hess = spectral::hessian_vector(&u);
            let m = smoothed_hessian_with(
                &grad_u,
                &hess,
                &sp,
                &Mollifier::new(u.grid(), stage.eta)?,
                chi,
            )?;
            let mut d = stress::contract_outer(&grad_u, 1.0, &sp, &m, true)?;
            d.scale(T::of(sp.p - 2.0));
            spectral::dealias(&d)
        } else {
            potentials::pressure_density_with(&u, &sp, 0.0, None)?
        };
        potentials::newtonian_divergence(&d)
    };
    let div = divergence_residual(&u, &sp);
    let mut ratios = BTreeMap::new();
    let f_l2 = norms::l2_norm(f);
    let grad_u = spectral::grad_vector(&u);
    let hess = spectral::hessian_vector(&u);
    let inv_a = stress::weight(&grad_u, -(2.0 - sp.p) / 2.0, &sp, 0.0)?;
    let mut weighted_hess = hess.clone();
    for c in 0..weighted_hess.ncomp() {
        let comp = weighted_hess.comp_mut(c);
        for (v, &w) in comp.iter_mut().zip(inv_a.data()) {
            *v = *v * w;
        }
    }
    if f_l2 > 0.0 {
        ratios.insert(
            "hess_weighted_l2_over_f_l2".to_string(),
            norms::l2_norm(&weighted_hess) / f_l2,
        );
        ratios.insert(
            "d2u_l2_over_f_l2".to_string(),
            norms::l2_norm(&hess) / f_l2,
        );
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
        diagnostics: Diagnostics {
            residual_linf,
            residual_mean,
            div_l2: div.u_l2,
            div_linf: div.u_linf,
            iterations,
            estimate_ratios: ratios,
            stages: Vec::new(),
        },
    })
}
