//! Structural checks on solver output: measured estimate ratios and the
//! homogeneity of the solution map in the forcing.

use crate::cz::CzTable;
use crate::error::Result;
use crate::field::{Field, VectorField};
use crate::norms;
use crate::real::Real;
use crate::solver::{cascade_with_init, CascadeSchedule, Solution};
use crate::spectral;
use crate::stress;
use crate::verify::report::CheckReport;

/// Measured estimate ratios of one solution. The generic constants of the
/// estimates are not numeric, so apart from the `p = 2` anchor these
/// reports assert finiteness and log the measured constants:
///
/// * `‖∇∇u/W⁻¹‖_q / ‖f‖_q` (the weighted-Hessian bound shape);
/// * `‖D²u‖_q / (‖f‖_q ‖a(mu,u)‖_∞^{2-p})` and the power-one companion
///   `‖D²u‖_q / (‖f‖_q ‖a(mu,u)‖_∞)`;
/// * `‖∇π‖_q / ‖f‖_q`;
/// * at `p = 2`: `‖D²u‖₂ <= (1 + 1e-8) ‖f‖₂` (exact anchor, asserted).
pub fn check_solution_estimates<T: Real>(
    sol: &Solution<T>,
    f: &VectorField<T>,
    q: f64,
    cz: &CzTable,
) -> Result<Vec<CheckReport>> {
    let sp = sol.params;
    let seed = cz.seed;
    let grad_u = spectral::grad_vector(&sol.u);
    let hess = spectral::hessian_vector(&sol.u);
    let f_lq = norms::lq_norm(f, q);
    let f_l2 = norms::l2_norm(f);
    let mut out = Vec::new();

    if sp.mu > 0.0 {
        let weight = stress::weight(&grad_u, (sp.p - 2.0) / 2.0, &sp, 0.0)?;
        let mut wh = hess.clone();
        wh.scale_pointwise(&weight);
        let ratio = norms::lq_norm(&wh, q) / f_lq.max(1e-300);
        out.push(finite_log(
            format!("weighted_hessian_ratio[q={q}]"),
            "weighted-hessian-vs-forcing",
            "||W hess u||_q / ||f||_q finite (W = (mu+|grad u|^2)^((p-2)/2))",
            ratio,
            seed,
        ));

        let a_inf = {
            let a = stress::weight(&grad_u, (2.0 - sp.p) / 2.0, &sp, 0.0)?;
            norms::max_norm(&a)
        };
        let d2 = norms::lq_norm(&hess, q);
        out.push(finite_log(
            format!("second_derivative_vs_weight_sup[q={q}]"),
            "second-derivative-weight-sup",
            "||D2 u||_q / (||f||_q ||a||_inf^(2-p)) finite",
            d2 / (f_lq.max(1e-300) * a_inf.powf(2.0 - sp.p)),
            seed,
        ));
        out.push(finite_log(
            format!("second_derivative_vs_weight_sup_pow1[q={q}]"),
            "second-derivative-weight-sup",
            "companion ratio ||D2 u||_q / (||f||_q ||a||_inf)",
            d2 / (f_lq.max(1e-300) * a_inf),
            seed,
        ));
    }

    let grad_pi = spectral::grad_scalar(&sol.pi);
    out.push(finite_log(
        format!("pressure_gradient_ratio[q={q}]"),
        "pressure-gradient-vs-forcing",
        "||grad pi||_q / ||f||_q finite",
        norms::lq_norm(&grad_pi, q) / f_lq.max(1e-300),
        seed,
    ));

    if sp.p == 2.0 && f_l2 > 0.0 {
        out.push(CheckReport::bound(
            "stokes_anchor_d2",
            "second-derivative-anchor",
            "p = 2: ||D2 u||_2 <= (1+1e-8) ||f||_2",
            norms::l2_norm(&hess),
            (1.0 + 1e-8) * f_l2,
            1.0,
            1,
            seed,
        ));
    }
    Ok(out)
}

fn finite_log(name: String, tag: &str, statement: &str, value: f64, seed: u64) -> CheckReport {
    let mut r = CheckReport::log(name, tag, statement, value, 1, seed);
    if !value.is_finite() {
        r.pass = false;
        r.margin = -1.0;
        r.lhs = f64::MAX;
        r.rhs = 0.0;
        r.constant_used = 0.0;
    }
    r
}

/// Homogeneity of the solution map in the forcing: continuation solves for
/// `f` and `lambda f` must scale gradients by `lambda^{1/(p-1)}` (within the
/// given relative tolerance).
pub fn check_homogeneity<T: Real>(
    f: &VectorField<T>,
    p: f64,
    schedule: &CascadeSchedule,
    lambda: f64,
    rel_tol: f64,
    seed: u64,
) -> Result<CheckReport> {
    let base = cascade_with_init(f, p, schedule, None)?;
    let mut f_scaled = f.clone();
    f_scaled.scale(crate::real::real::<T>(lambda));
    let scaled = cascade_with_init(&f_scaled, p, schedule, None)?;
    let g1 = norms::lq_norm(&spectral::grad_vector(&base.u), p);
    let g2 = norms::lq_norm(&spectral::grad_vector(&scaled.u), p);
    let expected = lambda.powf(1.0 / (p - 1.0));
    let ratio = g2 / g1.max(1e-300);
    let deviation = (ratio / expected - 1.0).abs();
    Ok(CheckReport::bound(
        format!("homogeneity[p={p},lambda={lambda}]"),
        "forcing-homogeneity",
        "||grad u(lambda f)||_p / ||grad u(f)||_p = lambda^(1/(p-1)) within tolerance",
        deviation,
        rel_tol,
        expected,
        2,
        seed,
    ))
}
