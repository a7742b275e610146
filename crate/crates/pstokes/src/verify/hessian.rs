//! Weighted Hessian and third-derivative inequalities, and the Poisson
//! second-derivative bound.

use crate::cz::{conjugate, CzTable};
use crate::error::{Error, Result};
use crate::field::{Field, VectorField};
use crate::norms;
use crate::real::Real;
use crate::spectral;
use crate::stress::{self, StressParams};
use crate::verify::report::CheckReport;
use crate::verify::{SLACK_ESTIMATOR, SLACK_EXACT};

/// Weighted-derivative inequality checks on one velocity field:
///
/// (a) `‖W ∇∇v‖₂ <= 1/(2p-3) ‖W Δv‖₂` with `W = (mu+|∇v|²)^{(p-2)/2}`,
///     for `p ∈ (3/2, 2]` (exact constant; tiny slack);
/// (b) the `L^q` analogue with constant `H(q')/(1 - 4H(q')(2-p))`, gated by
///     `4H(q')(2-p) < 1` — configurations failing the gate are reported as
///     gated, never asserted;
/// (c) the third-derivative analogue
///     `‖W D³v‖_q <= H(q')‖W ∇Δv‖_q + 4(2-p)H(q')‖(mu+|∇v|²)^{(p-3)/4}∇∇v‖_{2q}²`;
/// (d) the Poisson bound, componentwise: `max_{i,j,c} ‖D_i D_j v_c‖_q <=
///     H(q) ‖Δv_c‖_q` (realized through `w = Δ⁻¹(Δv) = v`).
///
/// Estimator slack (`1 + 0.05`) multiplies the right-hand sides that carry
/// estimated `H` values; the analytic bound (a) carries `1 + 1e-9`.
pub fn check_hessian_inequalities<T: Real>(
    v: &VectorField<T>,
    sp: &StressParams,
    q: f64,
    cz: &CzTable,
) -> Result<Vec<CheckReport>> {
    if !(sp.mu > 0.0) {
        return Err(Error::Parameter(
            "weighted-derivative checks need mu > 0".into(),
        ));
    }
    if !(q > 1.0) {
        return Err(Error::Exponent(format!("q must exceed 1, got {q}")));
    }
    let p = sp.p;
    let seed = cz.seed;
    let grad_v = spectral::grad_vector(v);
    let weight = stress::weight(&grad_v, (p - 2.0) / 2.0, sp, 0.0)?;
    let hess = spectral::hessian_vector(v);
    let lap = spectral::laplacian(v);

    let mut weighted_hess = hess.clone();
    weighted_hess.scale_pointwise(&weight);
    let mut weighted_lap = lap.clone();
    weighted_lap.scale_pointwise(&weight);

    let mut out = Vec::with_capacity(4);

    // (a) L², analytic constant, p in (3/2, 2]
    if p > 1.5 {
        let c = 1.0 / (2.0 * p - 3.0);
        out.push(CheckReport::bound(
            format!("hessian_l2[p={p},mu={}]", sp.mu),
            "weighted-hessian-l2",
            "||W hess v||_2 <= 1/(2p-3) ||W lap v||_2",
            norms::l2_norm(&weighted_hess),
            c * (1.0 + SLACK_EXACT) * norms::l2_norm(&weighted_lap),
            c,
            1,
            seed,
        ));
    } else {
        out.push(CheckReport::log(
            format!("hessian_l2[p={p},mu={}] [gated]", sp.mu),
            "weighted-hessian-l2",
            "gate p > 3/2 not satisfied; nothing asserted",
            norms::l2_norm(&weighted_hess),
            1,
            seed,
        ));
    }

    // (b) L^q, gated by 4 H(q') (2-p) < 1
    let h_qc = cz.get(conjugate(q))?;
    let gate = 4.0 * h_qc * (2.0 - p);
    if gate < 1.0 {
        let c = h_qc / (1.0 - gate);
        out.push(CheckReport::bound(
            format!("hessian_lq[p={p},mu={},q={q}]", sp.mu),
            "weighted-hessian-lq",
            "||W hess v||_q <= H(q')/(1-4H(q')(2-p)) ||W lap v||_q",
            norms::lq_norm(&weighted_hess, q),
            c * (1.0 + SLACK_ESTIMATOR) * norms::lq_norm(&weighted_lap, q),
            c,
            1,
            seed,
        ));
    } else {
        out.push(CheckReport::log(
            format!("hessian_lq[p={p},mu={},q={q}] [gated]", sp.mu),
            "weighted-hessian-lq",
            "gate 4H(q')(2-p) < 1 not satisfied; nothing asserted",
            gate,
            1,
            seed,
        ));
    }

    // (c) third derivatives
    {
        let third = spectral::third_vector(v);
        let mut weighted_third = third;
        weighted_third.scale_pointwise(&weight);
        let grad_lap = spectral::grad_vector(&lap);
        let mut weighted_grad_lap = grad_lap;
        weighted_grad_lap.scale_pointwise(&weight);
        let w34 = stress::weight(&grad_v, (p - 3.0) / 4.0, sp, 0.0)?;
        let mut hess34 = hess.clone();
        hess34.scale_pointwise(&w34);
        let cross = norms::lq_norm(&hess34, 2.0 * q);
        let rhs = h_qc * norms::lq_norm(&weighted_grad_lap, q)
            + 4.0 * (2.0 - p) * h_qc * cross * cross;
        out.push(CheckReport::bound(
            format!("third_lq[p={p},mu={},q={q}]", sp.mu),
            "weighted-third-lq",
            "||W D3 v||_q <= H(q')||W grad lap v||_q + 4(2-p)H(q')||(mu+|grad v|^2)^((p-3)/4) hess v||_{2q}^2",
            norms::lq_norm(&weighted_third, q),
            rhs * (1.0 + SLACK_ESTIMATOR),
            h_qc,
            1,
            seed,
        ));
    }

    // (d) Poisson bound, componentwise through w = inverse_laplacian(lap v)
    {
        let h_q = cz.get(q)?;
        let grid = *v.grid();
        let d = grid.dim();
        let mut worst_ratio = 0.0f64;
        for c in 0..d {
            let vc = crate::field::ScalarField::from_data(&grid, v.comp(c).to_vec())?;
            let lapc = crate::field::ScalarField::from_data(&grid, lap.comp(c).to_vec())?;
            let denom = norms::lq_norm(&lapc, q);
            if denom == 0.0 {
                continue;
            }
            let hc = spectral::hessian_scalar(&vc);
            for i in 0..d {
                for j in 0..d {
                    let dij =
                        crate::field::ScalarField::from_data(&grid, hc.entry(i, j).to_vec())?;
                    worst_ratio = worst_ratio.max(norms::lq_norm(&dij, q) / denom);
                }
            }
        }
        out.push(CheckReport::bound(
            format!("poisson_d2[q={q}]"),
            "poisson-second-derivative",
            "max_{i,j,c} ||DiDj w_c||_q <= H(q) ||h_c||_q for lap w = h",
            worst_ratio,
            h_q * (1.0 + SLACK_ESTIMATOR),
            h_q,
            1,
            seed,
        ));
    }

    Ok(out)
}
