//! Fundamental-solution calculus and the pressure functionals.
//!
//! On the torus the Newtonian potential is the zero-mean inverse Laplacian,
//! realized spectrally. The pressure functional comes in three variants that
//! mirror the approximating systems:
//!
//! * `MollifiedCutoff` (`mu > 0`, `eta > 0`): density
//!   `d_i = (p-2) G_{ji} Σ_{hk} G_{hk} M_{jhk} / (mu+|G|²)` with
//!   `M = J_eta(∇∇u · χ / (mu+|G|²)^{(2-p)/2})`, and `Π = Δ⁻¹(∇·d)`;
//! * `CutoffFree` (`mu > 0`): same with `J` the identity and `χ ≡ 1`, which
//!   collapses the weights to `(mu+|G|²)^{(4-p)/2}`;
//! * `Singular` (`mu = 0`): the principal-value form, i.e. the Fourier
//!   multiplier `ξ_i ξ_j / |ξ|²` applied to `|∇u|^{p-2} D_i u_j` with the
//!   zero mode removed.
//!
//! The sign convention ties the three together: with it, the divergence of
//! the stage systems yields the elliptic equation obeyed by `∇·u`, and the
//! singular variant is the exact `mu → 0` limit on divergence-free fields.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, Tensor2Field, Tensor3Field, VectorField};
use crate::mollify::{self, Mollifier};
use crate::real::Real;
use crate::spectral::{self, Modes};
use crate::stress::{self, RegParams, StressParams};

/// Zero-mean solution of the Poisson equation, any rank.
pub fn inverse_laplacian<T: Real, F: Field<T>>(g: &F) -> F {
    spectral::inverse_laplacian(g)
}

/// Gradient of the Newtonian potential of a scalar density: `∇Δ⁻¹ g`.
/// Single modes map through `-i k / |k|²`.
pub fn newtonian_gradient<T: Real>(g: &ScalarField<T>) -> VectorField<T> {
    spectral::grad_scalar(&spectral::inverse_laplacian(g))
}

/// Scalar potential of a vector density: `Σ_i D_i Δ⁻¹ d_i = Δ⁻¹(∇·d)`.
pub fn newtonian_divergence<T: Real>(d: &VectorField<T>) -> ScalarField<T> {
    spectral::inverse_laplacian(&spectral::divergence(d))
}

/// Pressure functional variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureVariant {
    MollifiedCutoff,
    CutoffFree,
    Singular,
}

/// Density of the regular (`mu > 0`) pressure functionals, with explicit
/// smoothing width and optional cut-off profile. `eta = 0` and `chi = None`
/// give the cut-off-free variant. Dealiased before integration.
pub fn pressure_density_with<T: Real>(
    u: &VectorField<T>,
    params: &StressParams,
    eta: f64,
    chi: Option<&ScalarField<T>>,
) -> Result<VectorField<T>> {
    if params.mu <= 0.0 {
        return Err(Error::Contract(
            "regular pressure density needs mu > 0; use the singular variant at mu = 0".into(),
        ));
    }
    let grad_u = spectral::grad_vector(u);
    let hess = spectral::hessian_vector(u);
    let m = smoothed_hessian(&grad_u, &hess, params, eta, chi)?;
    // d_i = (p-2) Σ_j G_{ji} (Σ_hk G_{hk} M_{jhk}) / (mu+|G|²)
    let mut d = stress::contract_outer(&grad_u, 1.0, params, &m, true)?;
    d.scale(T::of(params.p - 2.0));
    Ok(spectral::dealias(&d))
}

/// `J_eta(∇∇u · χ / (mu+|G|²)^{(2-p)/2})`, the smoothed weighted second
/// gradient shared by the pressure density and the coefficient-tensor term
/// of the stage systems.
pub fn smoothed_hessian<T: Real>(
    grad_u: &Tensor2Field<T>,
    hess: &Tensor3Field<T>,
    params: &StressParams,
    eta: f64,
    chi: Option<&ScalarField<T>>,
) -> Result<Tensor3Field<T>> {
    let grid = *grad_u.grid();
    let nodes = grid.node_count();
    let inv_a = stress::weight(grad_u, -(2.0 - params.p) / 2.0, params, 0.0)?;
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
    let moll = Mollifier::new(&grid, eta)?;
    let m = moll.apply(&w);
    Ok(spectral::dealias(&m))
}

/// Pressure functional `Π(u)`; zero mean by construction.
pub fn pressure_functional<T: Real>(
    u: &VectorField<T>,
    params: &StressParams,
    reg: &RegParams,
    variant: PressureVariant,
) -> Result<ScalarField<T>> {
    match variant {
        PressureVariant::MollifiedCutoff => {
            if params.mu <= 0.0 {
                return Err(Error::Contract(
                    "mollified-cutoff pressure requires mu > 0".into(),
                ));
            }
            if !(reg.eta > 0.0) {
                return Err(Error::Contract(
                    "mollified-cutoff pressure requires eta > 0".into(),
                ));
            }
            let chi = mollify::cutoff::<T>(u.grid(), reg.rho)?;
            let d = pressure_density_with(u, params, reg.eta, Some(&chi))?;
            Ok(newtonian_divergence(&d))
        }
        PressureVariant::CutoffFree => {
            if params.mu <= 0.0 {
                return Err(Error::Contract(
                    "cutoff-free pressure requires mu > 0".into(),
                ));
            }
            let d = pressure_density_with(u, params, 0.0, None)?;
            Ok(newtonian_divergence(&d))
        }
        PressureVariant::Singular => {
            if params.mu != 0.0 {
                return Err(Error::Contract(
                    "singular pressure requires mu = 0".into(),
                ));
            }
            Ok(singular_pressure(u, params.p))
        }
    }
}

/// Principal-value pressure at `mu = 0`: the double-Riesz multiplier applied
/// to the tensor `|∇u|^{p-2} D_i u_j` (zero where `∇u = 0`).
pub fn singular_pressure<T: Real>(u: &VectorField<T>, p: f64) -> ScalarField<T> {
    let grid = *u.grid();
    let d = grid.dim();
    let nodes = grid.node_count();
    let grad_u = spectral::grad_vector(u);
    // t_{ij} = |G|^{p-2} D_i u_j = |G|^{p-2} G_{ji}
    let mut t = Tensor2Field::<T>::zeros(&grid);
    let g = grad_u.data();
    for idx in 0..nodes {
        let mut g2 = 0.0f64;
        for c in 0..d * d {
            let v = g[c * nodes + idx].as_f64();
            g2 += v * v;
        }
        let factor = if g2 == 0.0 {
            0.0
        } else {
            g2.powf((p - 2.0) / 2.0)
        };
        for i in 0..d {
            for j in 0..d {
                let gji = g[(j * d + i) * nodes + idx].as_f64();
                t.entry_mut(i, j)[idx] = T::of(factor * gji);
            }
        }
    }
    let t = spectral::dealias(&t);
    double_riesz_contract(&t)
}

/// `Σ_{ij} (k_i k_j / |k|²) t̂_{ij}` with the zero mode removed.
fn double_riesz_contract<T: Real>(t: &Tensor2Field<T>) -> ScalarField<T> {
    let grid = *t.grid();
    let d = grid.dim();
    let modes = Modes::new(&grid);
    let mut acc = vec![Complex::new(T::zero(), T::zero()); grid.node_count()];
    let mut c = [0usize; 3];
    for i in 0..d {
        for j in 0..d {
            let spec = spectral::forward_component(&grid, t.entry(i, j));
            for (idx, &z) in spec.iter().enumerate() {
                modes.decompose(idx, &mut c);
                let mut k2 = 0.0;
                for dd in 0..d {
                    let k = modes.k_full[c[dd]];
                    k2 += k * k;
                }
                if k2 == 0.0 {
                    continue;
                }
                let m = T::of(modes.k_full[c[i]] * modes.k_full[c[j]] / k2);
                acc[idx] += z * m;
            }
        }
    }
    ScalarField::from_data(&grid, spectral::inverse_component(&grid, &acc)).expect("sized")
}

/// One scalar component of the discrete double-Riesz family:
/// `g ↦ IFFT( (k_i k_j/|k|²) FFT(g) )`.
pub fn riesz_pair_apply<T: Real>(g: &ScalarField<T>, i: usize, j: usize) -> ScalarField<T> {
    let grid = *g.grid();
    let modes = Modes::new(&grid);
    let mut spec = spectral::forward_component(&grid, g.comp(0));
    let mut c = [0usize; 3];
    for (idx, z) in spec.iter_mut().enumerate() {
        modes.decompose(idx, &mut c);
        let mut k2 = 0.0;
        for dd in 0..grid.dim() {
            let k = modes.k_full[c[dd]];
            k2 += k * k;
        }
        if k2 == 0.0 {
            *z = Complex::new(T::zero(), T::zero());
        } else {
            *z = *z * T::of(modes.k_full[c[i]] * modes.k_full[c[j]] / k2);
        }
    }
    ScalarField::from_data(&grid, spectral::inverse_component(&grid, &spec)).expect("sized")
}

/// Direct-summation evaluation of `Δ⁻¹(∇·d)`: discrete periodic kernel built
/// mode-by-mode, then an O(N²) convolution sum. Independent of the FFT path;
/// intended for small grids in tests.
pub fn newtonian_divergence_direct<T: Real>(d: &VectorField<T>) -> ScalarField<T> {
    let grid = *d.grid();
    let dim = grid.dim();
    let nodes = grid.node_count();
    let n = grid.points_per_axis();
    let modes = Modes::new(&grid);
    // kernel_c(x) = Σ_k (-i k_c / |k|²) e^{ik·x} / N, by direct mode sum
    let mut kernels: Vec<Vec<f64>> = vec![vec![0.0; nodes]; dim];
    let mut mc = [0usize; 3];
    let mut xc = [0usize; 3];
    for (comp, kernel) in kernels.iter_mut().enumerate() {
        for (xid, slot) in kernel.iter_mut().enumerate() {
            grid.node_coords(xid, &mut xc[..dim]);
            let mut acc = 0.0;
            for midx in 0..nodes {
                modes.decompose(midx, &mut mc);
                let mut k2 = 0.0;
                let mut phase = 0.0;
                for dd in 0..dim {
                    let k = modes.k_full[mc[dd]];
                    k2 += k * k;
                    phase += k * grid.axis_position(xc[dd]);
                }
                if k2 == 0.0 {
                    continue;
                }
                let kc = modes.k_odd[mc[comp]];
                // Re[ (-i kc/k2) e^{i phase} ] = (kc/k2) sin(phase)
                acc += kc / k2 * phase.sin();
            }
            *slot = acc / nodes as f64;
        }
    }
    // convolution: Π(x) = Σ_y Σ_c kernel_c(x-y) d_c(y)
    let mut out = vec![0.0f64; nodes];
    let mut yc = [0usize; 3];
    let mut diff = [0usize; 3];
    for (xid, slot) in out.iter_mut().enumerate() {
        grid.node_coords(xid, &mut xc[..dim]);
        let mut acc = 0.0;
        for yid in 0..nodes {
            grid.node_coords(yid, &mut yc[..dim]);
            for dd in 0..dim {
                diff[dd] = (xc[dd] + n - yc[dd]) % n;
            }
            let kid = grid.node_index(&diff[..dim]);
            for (comp, kernel) in kernels.iter().enumerate() {
                acc += kernel[kid] * d.comp(comp)[yid].as_f64();
            }
        }
        *slot = acc;
    }
    let data: Vec<T> = out.iter().map(|&v| T::of(v)).collect();
    let mut field = ScalarField::from_data(&grid, data).expect("sized");
    field.remove_mean();
    field
}
