//! Lebesgue norms on the torus and the negative-norm estimator.
//!
//! Integrals use the node-sum trapezoid rule, which is spectrally accurate
//! for smooth periodic integrands: `∫ g ≈ h^dim Σ_nodes g`.

use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, VectorField};
use crate::gen;
use crate::real::Real;
use crate::spectral;

/// Norm selector for [`norm`].
pub enum NormKind<'a, T: Real> {
    /// `L^q`, `q ∈ [1, ∞)`.
    Lq(f64),
    /// Max over nodes of the pointwise magnitude.
    LInf,
    /// `L^q` against a strictly positive weight.
    WeightedLq(f64, &'a ScalarField<T>),
}

/// Quadrature `L^q`/`L^∞`/weighted norm of a field of any rank. The pointwise
/// magnitude is Euclidean across components.
pub fn norm<T: Real, F: Field<T>>(f: &F, kind: NormKind<'_, T>) -> Result<f64> {
    match kind {
        NormKind::Lq(q) => {
            check_exponent(q)?;
            Ok(lq_sum(f, q, None))
        }
        NormKind::LInf => Ok(max_norm(f)),
        NormKind::WeightedLq(q, w) => {
            check_exponent(q)?;
            if w.data().iter().any(|&v| !(v > T::zero())) {
                return Err(Error::Weight(
                    "weighted norm requires a strictly positive weight".into(),
                ));
            }
            Ok(lq_sum(f, q, Some(w)))
        }
    }
}

fn check_exponent(q: f64) -> Result<()> {
    if q < 1.0 || !q.is_finite() {
        return Err(Error::Exponent(format!(
            "Lebesgue exponent must lie in [1, inf), got {q}"
        )));
    }
    Ok(())
}

fn lq_sum<T: Real, F: Field<T>>(f: &F, q: f64, w: Option<&ScalarField<T>>) -> f64 {
    let grid = f.grid();
    let nodes = grid.node_count();
    let ncomp = f.ncomp();
    let data = f.data();
    let mut acc = 0.0f64;
    for idx in 0..nodes {
        let mut m2 = 0.0f64;
        for c in 0..ncomp {
            let v = data[c * nodes + idx].as_f64();
            m2 += v * v;
        }
        let mut term = m2.sqrt().powf(q);
        if let Some(w) = w {
            term *= w.data()[idx].as_f64();
        }
        acc += term;
    }
    (acc * grid.quadrature_weight()).powf(1.0 / q)
}

/// `L^q` norm (unweighted); panics on invalid `q` only in debug builds, so
/// prefer [`norm`] at API boundaries.
pub fn lq_norm<T: Real, F: Field<T>>(f: &F, q: f64) -> f64 {
    debug_assert!(q >= 1.0);
    lq_sum(f, q, None)
}

/// `L²` norm.
pub fn l2_norm<T: Real, F: Field<T>>(f: &F) -> f64 {
    lq_sum(f, 2.0, None)
}

/// Max-norm of the pointwise magnitude.
pub fn max_norm<T: Real, F: Field<T>>(f: &F) -> f64 {
    let grid = f.grid();
    let nodes = grid.node_count();
    let ncomp = f.ncomp();
    let data = f.data();
    let mut best = 0.0f64;
    for idx in 0..nodes {
        let mut m2 = 0.0f64;
        for c in 0..ncomp {
            let v = data[c * nodes + idx].as_f64();
            m2 += v * v;
        }
        best = best.max(m2);
    }
    best.sqrt()
}

/// `L²` inner product `h^dim Σ f·g` (componentwise contraction).
pub fn inner<T: Real, F: Field<T>>(a: &F, b: &F) -> f64 {
    debug_assert_eq!(a.data().len(), b.data().len());
    let mut acc = 0.0f64;
    for (&x, &y) in a.data().iter().zip(b.data()) {
        acc += x.as_f64() * y.as_f64();
    }
    acc * a.grid().quadrature_weight()
}

/// `L²` norm from spectral coefficients (Parseval route): `sqrt(V Σ |c_m|²)`.
pub fn l2_norm_spectral<T: Real>(s: &ScalarField<T>) -> f64 {
    let spec = spectral::coefficients(s);
    let sum: f64 = spec.iter().map(|z| z.norm_sqr().as_f64()).sum();
    (sum * s.grid().volume()).sqrt()
}

/// Lower-bound estimate of the negative Sobolev norm `‖f‖_{-1,p'}`, the
/// supremum of `(f, φ)/‖∇φ‖_p` over test fields. Probes are the analytic
/// candidate `φ = Δ⁻¹f` followed by `n_probes` seeded random band-limited
/// fields, so the estimate is deterministic in the seed and nondecreasing in
/// `n_probes`.
pub fn dual_norm_estimate<T: Real>(
    f: &VectorField<T>,
    p_conj: f64,
    n_probes: usize,
    seed: u64,
) -> Result<f64> {
    if !(p_conj > 1.0) || !p_conj.is_finite() {
        return Err(Error::Exponent(format!(
            "conjugate exponent must lie in (1, inf), got {p_conj}"
        )));
    }
    if n_probes < 1 {
        return Err(Error::Parameter("n_probes must be >= 1".into()));
    }
    let p = p_conj / (p_conj - 1.0);
    let grid = *f.grid();
    let mut best = 0.0f64;
    let mut consider = |phi: &VectorField<T>| {
        let denom = lq_norm(&spectral::grad_vector(phi), p);
        if denom > 0.0 {
            let val = inner(f, phi).abs() / denom;
            if val > best {
                best = val;
            }
        }
    };
    consider(&spectral::inverse_laplacian(f));
    for probe in 0..n_probes {
        let phi = gen::random_vector::<T>(&grid, seed, probe as u64 + 1, 2.0);
        consider(&phi);
    }
    Ok(best)
}
