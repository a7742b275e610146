//! Energy-descent weak solver for the singular (`mu = 0`) problem.
//!
//! Minimizes the convex energy `E(u) = (1/p)∫|∇u|^p + (f, u)` over discrete
//! divergence-free fields; the minimizer is the unique weak solution of
//! `∇·S(∇u) - ∇π = f`, `∇·u = 0` with `S = |∇u|^{p-2}∇u`. Descent uses the
//! Sobolev gradient (inverse-Laplacian preconditioning) with a Leray
//! projection every step and Armijo backtracking; the reported optimality
//! residual is the energy norm of the projected Sobolev gradient,
//! `‖∇Δ⁻¹P(∇·S - f)‖₂`, measured relative to its value at `u = 0`.

use crate::error::{Error, Result};
use crate::field::{Field, VectorField};
use crate::norms;
use crate::real::Real;
use crate::spectral;
use crate::stress::{self, StressParams};

/// Output of [`weak_solve`].
#[derive(Debug, Clone)]
pub struct WeakSolution<T: Real> {
    pub u: VectorField<T>,
    /// Final absolute optimality residual `‖∇Δ⁻¹P(∇·S - f)‖₂`.
    pub optimality_residual: f64,
    pub iterations: usize,
    pub energy: f64,
}

pub fn weak_solve<T: Real>(
    f: &VectorField<T>,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<WeakSolution<T>> {
    weak_solve_with_init(f, p, tol, max_iter, None)
}

pub fn weak_solve_with_init<T: Real>(
    f: &VectorField<T>,
    p: f64,
    tol: f64,
    max_iter: usize,
    init: Option<&VectorField<T>>,
) -> Result<WeakSolution<T>> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Parameter(format!(
            "weak solver exponent p must lie in (1, 2], got {p}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let grid = *f.grid();
    let sp = StressParams { p, mu: 0.0 };
    // project the forcing; only its solenoidal part acts on solenoidal fields
    let f = spectral::leray_project(&spectral::dealias(f));

    let mut u = match init {
        Some(u0) => {
            let mut u = spectral::leray_project(&spectral::dealias(u0));
            u.remove_mean();
            u
        }
        None => VectorField::zeros(&grid),
    };

    let quad = grid.quadrature_weight();
    let energy_of = |grad: &crate::field::Tensor2Field<T>, f_dot_u: f64| -> f64 {
        let nodes = grid.node_count();
        let ncomp = grad.ncomp();
        let data = grad.data();
        let mut acc = 0.0f64;
        for idx in 0..nodes {
            let mut g2 = 0.0f64;
            for c in 0..ncomp {
                let v = data[c * nodes + idx].as_f64();
                g2 += v * v;
            }
            acc += g2.powf(p / 2.0);
        }
        acc * quad / p + f_dot_u
    };

    // reference residual at u = 0: ∇Δ⁻¹Pf
    let ref_res = {
        let g0 = spectral::inverse_laplacian(&f);
        norms::l2_norm(&spectral::grad_vector(&g0))
    };
    if ref_res == 0.0 {
        return Ok(WeakSolution {
            u: VectorField::zeros(&grid),
            optimality_residual: 0.0,
            iterations: 0,
            energy: 0.0,
        });
    }
    let tol_abs = tol * ref_res;

    let mut energy = 0.0f64;
    let mut opt_res = f64::INFINITY;
    let mut history = Vec::new();
    // spectral (Barzilai-Borwein) step with a backtracking safeguard
    let mut prev_u: Option<VectorField<T>> = None;
    let mut prev_g: Option<VectorField<T>> = None;
    let mut alpha = 1.0f64;
    for it in 0..=max_iter {
        let grad_u = spectral::grad_vector(&u);
        let s = spectral::dealias(&stress::stress(&grad_u, &sp));
        let div_s = spectral::divergence_tensor2(&s);
        let mut rl2 = div_s.clone();
        rl2.axpy(T::of(-1.0), &f);
        let rp = spectral::leray_project(&rl2);
        let g = spectral::inverse_laplacian(&rp);
        let slope = norms::inner(&rp, &g); // = -||∇Δ⁻¹ rp||² ≤ 0
        opt_res = (-slope).max(0.0).sqrt();
        history.push(opt_res);
        let f_dot_u = norms::inner(&f, &u);
        energy = energy_of(&grad_u, f_dot_u);
        if opt_res <= tol_abs {
            return Ok(WeakSolution {
                u,
                optimality_residual: opt_res,
                iterations: it,
                energy,
            });
        }
        if it == max_iter {
            break;
        }
        if let (Some(pu), Some(pg)) = (&prev_u, &prev_g) {
            // BB1 step from the last secant pair
            let mut du = u.clone();
            du.axpy(T::of(-1.0), pu);
            let mut dg = g.clone();
            dg.axpy(T::of(-1.0), pg);
            let sy = norms::inner(&du, &dg);
            let yy = norms::inner(&dg, &dg);
            if sy > 0.0 && yy > 0.0 {
                alpha = (sy / yy).clamp(1e-3, 64.0);
            }
        }
        // descent direction d = -g, precomputed gradient for cheap line search
        let grad_g = spectral::grad_vector(&g);
        let f_dot_g = norms::inner(&f, &g);
        let mut step = alpha;
        let c1 = 1e-4;
        // floating-point floor of the energy comparison (node-sum rounding)
        let noise = 1e-13 * (energy.abs() + f_dot_u.abs() + 1.0);
        let mut accepted = false;
        for _ in 0..60 {
            // E(u - step g) from cached gradients
            let mut trial_grad = grad_u.clone();
            trial_grad.axpy(T::of(-step), &grad_g);
            let trial_energy = energy_of(&trial_grad, f_dot_u - step * f_dot_g);
            if trial_energy <= energy + c1 * step * slope + noise {
                accepted = true;
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
        if !accepted {
            // line search stalled at machine precision
            break;
        }
        prev_u = Some(u.clone());
        prev_g = Some(g.clone());
        u.axpy(T::of(-step), &g);
        u = spectral::leray_project(&spectral::dealias(&u));
        u.remove_mean();
        alpha = step;
    }
    if opt_res <= tol_abs {
        Ok(WeakSolution {
            u,
            optimality_residual: opt_res,
            iterations: max_iter,
            energy,
        })
    } else {
        Err(Error::Divergence {
            iterations: max_iter,
            last: opt_res,
            history,
        })
    }
}
