//! Pointwise nonlinear algebra: power-law weights, the stress tensor, the
//! fourth-order coefficient tensor and its contractions, and the
//! monotonicity inequality of the stress.
//!
//! With `G = ∇u` the weight family is `w_s = (mu + |G|²)^s` and the stress is
//! `S = (mu + |G|²)^{(p-2)/2} G`. At `mu = 0` the stress is extended by
//! continuity (`S = 0` where `G = 0`; `|S| = |G|^{p-1} → 0` for `p > 1`), and
//! the coefficient tensor `G⊗G / w_s` is set to zero where the quotient is
//! `0/0`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, Tensor2Field, Tensor3Field, Tensor4Field, VectorField};
use crate::mollify;
use crate::real::Real;
use crate::rng;

/// Physical parameters of the stress: exponent `p ∈ (1, 2]` and offset
/// `mu ≥ 0` (`mu = 0` is the singular case).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressParams {
    pub p: f64,
    pub mu: f64,
}

impl StressParams {
    pub fn new(p: f64, mu: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::Parameter(format!(
                "stress exponent p must lie in (1, 2], got {p}"
            )));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::Parameter(format!(
                "stress offset mu must be >= 0, got {mu}"
            )));
        }
        Ok(Self { p, mu })
    }

    /// `true` in the singular case `mu = 0`.
    pub fn is_singular(&self) -> bool {
        self.mu == 0.0
    }
}

/// Regularization parameters of the approximating systems: artificial
/// diffusion `epsilon`, smoothing width `eta`, cut-off radius `rho`, and
/// coefficient-smoothing width `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegParams {
    pub epsilon: f64,
    pub eta: f64,
    pub rho: f64,
    pub delta: f64,
}

impl RegParams {
    pub fn new(epsilon: f64, eta: f64, rho: f64, delta: f64, box_length: f64) -> Result<Self> {
        for (name, v) in [("epsilon", epsilon), ("eta", eta), ("delta", delta)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!(
                    "regularization parameter {name} must be >= 0, got {v}"
                )));
            }
        }
        if !(rho > 0.0) || rho > box_length / 2.0 {
            return Err(Error::Parameter(format!(
                "cutoff radius rho must lie in (0, L/2], got {rho} with L = {box_length}"
            )));
        }
        Ok(Self {
            epsilon,
            eta,
            rho,
            delta,
        })
    }
}

/// Power weight `(mu + |G_δ|²)^s` with `G_δ` the (optionally) mollified
/// gradient. Bounded below by `mu^s`.
pub fn weight<T: Real>(
    grad_u: &Tensor2Field<T>,
    s: f64,
    params: &StressParams,
    delta: f64,
) -> Result<ScalarField<T>> {
    if params.mu == 0.0 && s < 0.0 {
        return Err(Error::SingularWeight { s });
    }
    let g = if delta > 0.0 {
        mollify::mollify(grad_u, delta)?
    } else {
        grad_u.clone()
    };
    let grid = *grad_u.grid();
    let nodes = grid.node_count();
    let ncomp = g.ncomp();
    let data = g.data();
    let mu = params.mu;
    let mut out = vec![T::zero(); nodes];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut g2 = 0.0f64;
        for c in 0..ncomp {
            let v = data[c * nodes + idx].as_f64();
            g2 += v * v;
        }
        *slot = T::of((mu + g2).powf(s));
    }
    ScalarField::from_data(&grid, out)
}

/// Stress tensor `S = (mu + |G|²)^{(p-2)/2} G`, with the continuous
/// extension `S = 0` where `mu = 0` and `G = 0`.
pub fn stress<T: Real>(grad_u: &Tensor2Field<T>, params: &StressParams) -> Tensor2Field<T> {
    let grid = *grad_u.grid();
    let nodes = grid.node_count();
    let ncomp = grad_u.ncomp();
    let data = grad_u.data();
    let exponent = (params.p - 2.0) / 2.0;
    let mu = params.mu;
    let mut out = vec![T::zero(); data.len()];
    for idx in 0..nodes {
        let mut g2 = 0.0f64;
        for c in 0..ncomp {
            let v = data[c * nodes + idx].as_f64();
            g2 += v * v;
        }
        let base = mu + g2;
        let factor = if base == 0.0 { 0.0 } else { base.powf(exponent) };
        for c in 0..ncomp {
            out[c * nodes + idx] = T::of(data[c * nodes + idx].as_f64() * factor);
        }
    }
    Tensor2Field::from_data(&grid, out).expect("sized")
}

/// Fourth-order coefficient tensor `A^s_{ijhk} = G_{ij} G_{hk} / (mu+|G|²)^s`
/// materialized as a rank-4 field. Entries where the quotient is `0/0`
/// (singular case at critical nodes) are set to zero.
pub fn outer_tensor<T: Real>(
    grad_u: &Tensor2Field<T>,
    s: f64,
    params: &StressParams,
) -> Result<Tensor4Field<T>> {
    if params.mu == 0.0 && s < 0.0 {
        return Err(Error::SingularWeight { s });
    }
    let grid = *grad_u.grid();
    let d = grid.dim();
    let nodes = grid.node_count();
    let g = grad_u.data();
    let mu = params.mu;
    let mut out = Tensor4Field::zeros(&grid);
    for idx in 0..nodes {
        let mut g2 = 0.0f64;
        for c in 0..d * d {
            let v = g[c * nodes + idx].as_f64();
            g2 += v * v;
        }
        let base = mu + g2;
        let inv_w = if base == 0.0 { 0.0 } else { base.powf(-s) };
        for i in 0..d {
            for j in 0..d {
                let gij = g[(i * d + j) * nodes + idx].as_f64();
                for h in 0..d {
                    for k in 0..d {
                        let ghk = g[(h * d + k) * nodes + idx].as_f64();
                        let comp = ((i * d + j) * d + h) * d + k;
                        out.comp_mut(comp)[idx] = T::of(gij * ghk * inv_w);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Contraction `out_i = Σ_{jhk} G_{ij} G_{hk} t_{jhk} / (mu+|G|²)^s` in the
/// factorized form (never materializes the rank-4 tensor). With
/// `first_transposed` the leading factor is `G_{ji}` instead of `G_{ij}`,
/// the transposed-pair variant used by the pressure density.
pub fn contract_outer<T: Real>(
    grad_u: &Tensor2Field<T>,
    s: f64,
    params: &StressParams,
    t: &Tensor3Field<T>,
    first_transposed: bool,
) -> Result<VectorField<T>> {
    if params.mu == 0.0 && s < 0.0 {
        return Err(Error::SingularWeight { s });
    }
    let grid = *grad_u.grid();
    let d = grid.dim();
    let nodes = grid.node_count();
    let g = grad_u.data();
    let td = t.data();
    let mu = params.mu;
    let mut out = VectorField::zeros(&grid);
    let mut w = [0.0f64; 3];
    for idx in 0..nodes {
        let mut g2 = 0.0f64;
        for c in 0..d * d {
            let v = g[c * nodes + idx].as_f64();
            g2 += v * v;
        }
        let base = mu + g2;
        let inv_w = if base == 0.0 { 0.0 } else { base.powf(-s) };
        // w_j = Σ_{hk} G_{hk} t_{jhk}
        for (j, wj) in w.iter_mut().enumerate().take(d) {
            let mut acc = 0.0f64;
            for h in 0..d {
                for k in 0..d {
                    let ghk = g[(h * d + k) * nodes + idx].as_f64();
                    let tjhk = td[((j * d + h) * d + k) * nodes + idx].as_f64();
                    acc += ghk * tjhk;
                }
            }
            *wj = acc;
        }
        for i in 0..d {
            let mut acc = 0.0f64;
            for (j, wj) in w.iter().enumerate().take(d) {
                let gf = if first_transposed {
                    g[(j * d + i) * nodes + idx].as_f64()
                } else {
                    g[(i * d + j) * nodes + idx].as_f64()
                };
                acc += gf * wj;
            }
            out.comp_mut(i)[idx] = T::of(acc * inv_w);
        }
    }
    Ok(out)
}

/// Pointwise stress of a `dim × dim` matrix (row-major slice).
pub fn stress_matrix(dim: usize, g: &[f64], params: &StressParams) -> Vec<f64> {
    debug_assert_eq!(g.len(), dim * dim);
    let g2: f64 = g.iter().map(|v| v * v).sum();
    let base = params.mu + g2;
    let factor = if base == 0.0 {
        0.0
    } else {
        base.powf((params.p - 2.0) / 2.0)
    };
    g.iter().map(|&v| v * factor).collect()
}

/// Monotonicity defect
/// `(S(A)-S(B))·(A-B) - C (mu+|A|²+|B|²)^{(p-2)/2} |A-B|²`;
/// nonnegative for an admissible constant `C = C(dim, p)`.
pub fn monotonicity_gap(
    dim: usize,
    a: &[f64],
    b: &[f64],
    params: &StressParams,
    c: f64,
) -> f64 {
    let sa = stress_matrix(dim, a, params);
    let sb = stress_matrix(dim, b, params);
    let mut pairing = 0.0;
    let mut diff2 = 0.0;
    let mut a2 = 0.0;
    let mut b2 = 0.0;
    for i in 0..dim * dim {
        let d = a[i] - b[i];
        pairing += (sa[i] - sb[i]) * d;
        diff2 += d * d;
        a2 += a[i] * a[i];
        b2 += b[i] * b[i];
    }
    let base = params.mu + a2 + b2;
    let wt = if base == 0.0 {
        0.0
    } else {
        base.powf((params.p - 2.0) / 2.0)
    };
    pairing - c * wt * diff2
}

/// Largest admissible monotonicity constant observed over `n_samples` random
/// matrix pairs: the minimum of the pairing/weighted-distance ratio. Equals
/// 1 identically at `p = 2`.
pub fn calibrate_monotonicity(
    dim: usize,
    p: f64,
    mu_list: &[f64],
    n_samples: usize,
    seed: u64,
) -> f64 {
    let mut best = f64::INFINITY;
    for (mi, &mu) in mu_list.iter().enumerate() {
        let params = StressParams { p, mu };
        let mut rng = rng::stream(seed, mi as u64);
        let mut a = vec![0.0f64; dim * dim];
        let mut b = vec![0.0f64; dim * dim];
        for _ in 0..n_samples {
            // scale spread probes both the degenerate and the large-gradient
            // regimes
            let scale_a = 10.0f64.powf(rng.random_range(-2.0..2.0));
            let scale_b = 10.0f64.powf(rng.random_range(-2.0..2.0));
            for v in a.iter_mut() {
                let n: f64 = rng.sample(StandardNormal);
                *v = n * scale_a;
            }
            for v in b.iter_mut() {
                let n: f64 = rng.sample(StandardNormal);
                *v = n * scale_b;
            }
            let denom = {
                let mut diff2 = 0.0;
                let mut a2 = 0.0;
                let mut b2 = 0.0;
                for i in 0..dim * dim {
                    let d = a[i] - b[i];
                    diff2 += d * d;
                    a2 += a[i] * a[i];
                    b2 += b[i] * b[i];
                }
                (mu + a2 + b2).powf((p - 2.0) / 2.0) * diff2
            };
            if denom <= 0.0 {
                continue;
            }
            let ratio = monotonicity_gap(dim, &a, &b, &params, 0.0) / denom;
            if ratio < best {
                best = ratio;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn grad_of(field_fn: impl Fn(&[f64]) -> Vec<f64>, grid: &Grid) -> Tensor2Field<f64> {
        let u = VectorField::<f64>::from_fn(grid, field_fn);
        crate::spectral::grad_vector(&u)
    }

    #[test]
    fn weight_anchors() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let zero = Tensor2Field::<f64>::zeros(&g);
        // zero gradient, mu = 1, s = 0.25 -> 1
        let w = weight(&zero, 0.25, &StressParams { p: 1.5, mu: 1.0 }, 0.0).unwrap();
        assert!(w.data().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        // |G| = 2, mu = 0, s = 0.5 -> 2
        let mut two = Tensor2Field::<f64>::zeros(&g);
        two.entry_mut(0, 0).fill(2.0);
        let w = weight(&two, 0.5, &StressParams { p: 1.5, mu: 0.0 }, 0.0).unwrap();
        assert!(w.data().iter().all(|&v| (v - 2.0).abs() < 1e-14));
        // s = 0 -> 1 regardless
        let w = weight(&two, 0.0, &StressParams { p: 1.5, mu: 0.0 }, 0.0).unwrap();
        assert!(w.data().iter().all(|&v| v == 1.0));
        // mu = 0, s < 0 is the singular request
        assert!(matches!(
            weight(&two, -0.5, &StressParams { p: 1.5, mu: 0.0 }, 0.0),
            Err(Error::SingularWeight { .. })
        ));
        // lower bound mu^s
        let gr = grad_of(|x| vec![(x[0] * 6.28).sin(), 0.0], &g);
        let w = weight(&gr, 0.7, &StressParams { p: 1.5, mu: 0.3 }, 0.0).unwrap();
        let bound = 0.3f64.powf(0.7);
        assert!(w.data().iter().all(|&v| v >= bound - 1e-15));
    }

    #[test]
    fn stress_anchors() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let gr = grad_of(
            |x| {
                vec![
                    (2.0 * std::f64::consts::PI * x[0]).sin(),
                    (2.0 * std::f64::consts::PI * x[1]).cos(),
                ]
            },
            &g,
        );
        // p = 2: S = G exactly for every mu
        for mu in [0.0, 0.7] {
            let s = stress(&gr, &StressParams { p: 2.0, mu });
            for (a, b) in s.data().iter().zip(gr.data()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        // mu = 0, |G| = 4, p = 1.5 -> S = 0.5 G
        let mut four = Tensor2Field::<f64>::zeros(&g);
        four.entry_mut(1, 0).fill(4.0);
        let s = stress(&four, &StressParams { p: 1.5, mu: 0.0 });
        assert!((s.entry(1, 0)[0] - 2.0).abs() < 1e-14);
        // mu = 0, G = 0 -> S = 0
        let z = Tensor2Field::<f64>::zeros(&g);
        let s = stress(&z, &StressParams { p: 1.5, mu: 0.0 });
        assert!(s.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stress_homogeneity_at_mu_zero() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let gr = grad_of(
            |x| {
                vec![
                    (2.0 * std::f64::consts::PI * x[0]).sin()
                        * (2.0 * std::f64::consts::PI * x[1]).cos(),
                    (4.0 * std::f64::consts::PI * x[1]).sin(),
                ]
            },
            &g,
        );
        let p = 1.7;
        let params = StressParams { p, mu: 0.0 };
        let lambda = 2.3;
        let mut scaled = gr.clone();
        scaled.scale(lambda);
        let s_scaled = stress(&scaled, &params);
        let mut s_base = stress(&gr, &params);
        s_base.scale(lambda.powf(p - 1.0));
        for (a, b) in s_scaled.data().iter().zip(s_base.data()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-12));
        }
    }

    #[test]
    fn outer_tensor_bound_and_zero() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let gr = grad_of(
            |x| {
                vec![
                    3.0 * (2.0 * std::f64::consts::PI * x[0]).sin(),
                    (2.0 * std::f64::consts::PI * (x[0] + x[1])).cos(),
                ]
            },
            &g,
        );
        let a1 = outer_tensor(&gr, 1.0, &StressParams { p: 1.8, mu: 0.4 }).unwrap();
        assert!(a1.data().iter().all(|&v| v.abs() <= 1.0 + 1e-12));
        let z = Tensor2Field::<f64>::zeros(&g);
        let a = outer_tensor(&z, 1.0, &StressParams { p: 1.8, mu: 0.4 }).unwrap();
        assert!(a.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn contraction_matches_materialized_tensor() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let gr = grad_of(
            |x| {
                vec![
                    (2.0 * std::f64::consts::PI * x[0]).sin(),
                    (2.0 * std::f64::consts::PI * x[1]).cos() * x[2].cos(),
                    (2.0 * std::f64::consts::PI * x[2]).sin() * x[0].cos(),
                ]
            },
            &g,
        );
        let t = {
            let v = crate::gen::random_vector::<f64>(&g, 5, 0, 1.0);
            crate::spectral::hessian_vector(&v)
        };
        let params = StressParams { p: 1.6, mu: 0.9 };
        let s = (4.0 - params.p) / 2.0;
        let fast = contract_outer(&gr, s, &params, &t, false).unwrap();
        // naive index-sum oracle through the materialized rank-4 tensor
        let a4 = outer_tensor(&gr, s, &params).unwrap();
        let d = g.dim();
        let nodes = g.node_count();
        for idx in (0..nodes).step_by(17) {
            for i in 0..d {
                let mut acc = 0.0;
                for j in 0..d {
                    for h in 0..d {
                        for k in 0..d {
                            acc += a4.entry(i, j, h, k)[idx] * t.entry(j, h, k)[idx];
                        }
                    }
                }
                let got = fast.comp(i)[idx];
                assert!(
                    (acc - got).abs() <= 1e-12 * acc.abs().max(1.0),
                    "mismatch at node {idx}, comp {i}: {acc} vs {got}"
                );
            }
        }
    }

    #[test]
    fn monotonicity_gap_anchors() {
        let params = StressParams { p: 1.7, mu: 0.2 };
        let a = [0.3, -1.0, 0.5, 2.0];
        assert_eq!(monotonicity_gap(2, &a, &a, &params, 5.0), 0.0);
        // p = 2: gap = (1 - C) |A-B|^2
        let params2 = StressParams { p: 2.0, mu: 0.9 };
        let b = [1.0, 0.0, -0.2, 0.7];
        let diff2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        for c in [0.0, 0.5, 1.0, 1.5] {
            let gap = monotonicity_gap(2, &a, &b, &params2, c);
            assert!((gap - (1.0 - c) * diff2).abs() < 1e-12);
        }
    }

    #[test]
    fn calibrated_constant_is_admissible() {
        let dim = 3;
        let p = 1.6;
        let c_star = calibrate_monotonicity(dim, p, &[0.0, 1.0], 20_000, 42);
        assert!(c_star > 0.0 && c_star <= 1.0 + 1e-12);
        let c = 0.9 * c_star;
        let mut rng = rng::stream(43, 0);
        for _ in 0..20_000 {
            let mut a = vec![0.0f64; dim * dim];
            let mut b = vec![0.0f64; dim * dim];
            for v in a.iter_mut().chain(b.iter_mut()) {
                *v = rng.sample::<f64, _>(StandardNormal) * 2.0;
            }
            for mu in [0.0, 1.0] {
                let gap = monotonicity_gap(dim, &a, &b, &StressParams { p, mu }, c);
                assert!(gap >= -1e-13, "gap {gap} negative");
            }
        }
    }
}
