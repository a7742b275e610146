//! Pseudo-spectral operator algebra on the periodic box.
//!
//! All derivatives act on the band-limited trigonometric interpolant: forward
//! FFT, wavenumber multiplier, inverse FFT. Conventions:
//!
//! * forward transforms are normalized by `1/N`, so coefficients are the
//!   actual Fourier coefficients of `f(x) = Σ c_m e^{i k_m · x}`;
//! * odd multipliers (gradient, divergence, and each first-order factor of
//!   the higher derivatives) vanish on the unpaired Nyquist index, keeping
//!   real fields real;
//! * the Laplacian and its inverse use the full `-|k|²` symbol; the zero mode
//!   of `Δ⁻¹` is set to zero (zero-mean convention);
//! * `dealias` zeroes every mode with an axis frequency above `n/3`
//!   (2/3 rule), and is applied by callers after nonlinear products.

use std::any::{Any, TypeId};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{
    Field, FieldVariant, ScalarField, Tensor2Field, Tensor3Field, Tensor4Field, VectorField,
};
use crate::grid::Grid;
use crate::real::Real;

struct PlanPair<T: Real> {
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> Clone for PlanPair<T> {
    fn clone(&self) -> Self {
        Self {
            fwd: Arc::clone(&self.fwd),
            inv: Arc::clone(&self.inv),
        }
    }
}

thread_local! {
    static PLAN_CACHE: RefCell<HashMap<(usize, TypeId), Box<dyn Any>>> =
        RefCell::new(HashMap::new());
}

fn plans<T: Real>(n: usize) -> PlanPair<T> {
    PLAN_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        let key = (n, TypeId::of::<T>());
        if let Some(entry) = cache.get(&key) {
            return entry
                .downcast_ref::<PlanPair<T>>()
                .expect("plan cache type")
                .clone();
        }
        let mut planner = FftPlanner::<T>::new();
        let pair = PlanPair {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        };
        cache.insert(key, Box::new(pair.clone()));
        pair
    })
}

enum Direction {
    Forward,
    Inverse,
}

/// In-place multidimensional FFT over a component buffer (row-major, axis 0
/// slowest).
fn fft_nd<T: Real>(grid: &Grid, buf: &mut [Complex<T>], dir: Direction) {
    let n = grid.points_per_axis();
    let total = grid.node_count();
    debug_assert_eq!(buf.len(), total);
    let pair = plans::<T>(n);
    let plan = match dir {
        Direction::Forward => pair.fwd,
        Direction::Inverse => pair.inv,
    };
    let mut line = vec![Complex::new(T::zero(), T::zero()); n];
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        if stride == 1 {
            plan.process(buf);
            continue;
        }
        let block = n * stride;
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = buf[start + t * stride];
                }
                plan.process(&mut line);
                for (t, slot) in line.iter().enumerate() {
                    buf[start + t * stride] = *slot;
                }
            }
        }
    }
}

/// Forward transform of one component; returns normalized Fourier
/// coefficients.
pub fn forward_component<T: Real>(grid: &Grid, comp: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = comp
        .iter()
        .map(|&v| Complex::new(v, T::zero()))
        .collect();
    fft_nd(grid, &mut buf, Direction::Forward);
    let s = T::of(1.0 / grid.node_count() as f64);
    for v in buf.iter_mut() {
        *v = *v * s;
    }
    buf
}

/// Inverse transform back to node values (real part).
pub fn inverse_component<T: Real>(grid: &Grid, spec: &[Complex<T>]) -> Vec<T> {
    let mut buf = spec.to_vec();
    fft_nd(grid, &mut buf, Direction::Inverse);
    buf.iter().map(|c| c.re).collect()
}

/// Fourier coefficients of a scalar field.
pub fn coefficients<T: Real>(s: &ScalarField<T>) -> Vec<Complex<T>> {
    forward_component(s.grid(), s.comp(0))
}

/// Per-mode frequency bookkeeping shared by the multiplier loops.
pub(crate) struct Modes {
    dim: usize,
    n: usize,
    /// Wavenumber per axis index, with the Nyquist entry zeroed (odd symbol).
    pub k_odd: Vec<f64>,
    /// Full wavenumber per axis index (even symbols).
    pub k_full: Vec<f64>,
    /// |integer frequency| per axis index.
    pub m_abs: Vec<i64>,
}

impl Modes {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.points_per_axis();
        let mut k_odd = Vec::with_capacity(n);
        let mut k_full = Vec::with_capacity(n);
        let mut m_abs = Vec::with_capacity(n);
        for i in 0..n {
            let m = grid.freq_index(i);
            let k = grid.wavenumber(i);
            k_full.push(k);
            k_odd.push(if 2 * m.unsigned_abs() as usize == n {
                0.0
            } else {
                k
            });
            m_abs.push(m.unsigned_abs() as i64);
        }
        Self {
            dim: grid.dim(),
            n,
            k_odd,
            k_full,
            m_abs,
        }
    }

    /// Axis indices of flat mode index `idx`.
    #[inline]
    pub fn decompose(&self, mut idx: usize, out: &mut [usize; 3]) {
        for d in (0..self.dim).rev() {
            out[d] = idx % self.n;
            idx /= self.n;
        }
    }
}

/// Apply the 2/3 dealiasing mask to a coefficient buffer in place.
pub fn dealias_coefficients<T: Real>(grid: &Grid, spec: &mut [Complex<T>]) {
    let modes = Modes::new(grid);
    let cutoff = grid.dealias_cutoff();
    let mut c = [0usize; 3];
    for (idx, v) in spec.iter_mut().enumerate() {
        modes.decompose(idx, &mut c);
        for d in 0..grid.dim() {
            if modes.m_abs[c[d]] > cutoff {
                *v = Complex::new(T::zero(), T::zero());
                break;
            }
        }
    }
}

/// Zero all modes with an axis frequency above `n/3`.
pub fn dealias<T: Real, F: Field<T>>(f: &F) -> F {
    let grid = *f.grid();
    let mut out = f.clone();
    for c in 0..f.ncomp() {
        let mut spec = forward_component(&grid, f.comp(c));
        dealias_coefficients(&grid, &mut spec);
        let vals = inverse_component(&grid, &spec);
        out.comp_mut(c).copy_from_slice(&vals);
    }
    out
}

/// Whether the field has no spectral content above the 2/3 cutoff (up to a
/// relative tolerance).
pub fn is_band_limited<T: Real, F: Field<T>>(f: &F, rel_tol: f64) -> bool {
    let grid = *f.grid();
    let modes = Modes::new(&grid);
    let cutoff = grid.dealias_cutoff();
    let mut c = [0usize; 3];
    for comp in 0..f.ncomp() {
        let spec = forward_component(&grid, f.comp(comp));
        let scale = spec
            .iter()
            .map(|z| z.norm_sqr().as_f64())
            .fold(0.0, f64::max)
            .sqrt();
        if scale == 0.0 {
            continue;
        }
        for (idx, z) in spec.iter().enumerate() {
            modes.decompose(idx, &mut c);
            let outside = (0..grid.dim()).any(|d| modes.m_abs[c[d]] > cutoff);
            if outside && z.norm_sqr().as_f64().sqrt() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Derivative along one axis of a coefficient buffer (odd symbol `i k_d`).
fn derive_axis<T: Real>(
    grid: &Grid,
    modes: &Modes,
    spec: &[Complex<T>],
    axis: usize,
) -> Vec<Complex<T>> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); spec.len()];
    let mut c = [0usize; 3];
    for (idx, &v) in spec.iter().enumerate() {
        modes.decompose(idx, &mut c);
        let k = T::of(modes.k_odd[c[axis]]);
        out[idx] = Complex::new(-v.im * k, v.re * k);
    }
    let _ = grid;
    out
}

/// Gradient of a scalar: component `d` holds `D_d s`.
pub fn grad_scalar<T: Real>(s: &ScalarField<T>) -> VectorField<T> {
    let grid = *s.grid();
    let modes = Modes::new(&grid);
    let spec = forward_component(&grid, s.comp(0));
    let mut out = VectorField::zeros(&grid);
    for d in 0..grid.dim() {
        let ds = derive_axis(&grid, &modes, &spec, d);
        out.comp_mut(d).copy_from_slice(&inverse_component(&grid, &ds));
    }
    out
}

/// Gradient of a vector: entry `(i, j)` holds `D_j v_i`.
pub fn grad_vector<T: Real>(v: &VectorField<T>) -> Tensor2Field<T> {
    let grid = *v.grid();
    let modes = Modes::new(&grid);
    let mut out = Tensor2Field::zeros(&grid);
    for i in 0..grid.dim() {
        let spec = forward_component(&grid, v.comp(i));
        for j in 0..grid.dim() {
            let ds = derive_axis(&grid, &modes, &spec, j);
            out.entry_mut(i, j)
                .copy_from_slice(&inverse_component(&grid, &ds));
        }
    }
    out
}

/// Gradient of a rank-2 field: entry `(j, h, k)` holds `D_j t_{hk}`.
pub fn grad_tensor2<T: Real>(t: &Tensor2Field<T>) -> Tensor3Field<T> {
    let grid = *t.grid();
    let d = grid.dim();
    let modes = Modes::new(&grid);
    let mut out = Tensor3Field::zeros(&grid);
    for h in 0..d {
        for k in 0..d {
            let spec = forward_component(&grid, t.entry(h, k));
            for j in 0..d {
                let ds = derive_axis(&grid, &modes, &spec, j);
                let vals = inverse_component(&grid, &ds);
                out.comp_mut((j * d + h) * d + k).copy_from_slice(&vals);
            }
        }
    }
    out
}

/// Gradient of a rank-3 field: entry `(i, j, h, k)` holds `D_i t_{jhk}`.
pub fn grad_tensor3<T: Real>(t: &Tensor3Field<T>) -> Tensor4Field<T> {
    let grid = *t.grid();
    let d = grid.dim();
    let modes = Modes::new(&grid);
    let mut out = Tensor4Field::zeros(&grid);
    for c in 0..t.ncomp() {
        let spec = forward_component(&grid, t.comp(c));
        for i in 0..d {
            let ds = derive_axis(&grid, &modes, &spec, i);
            let vals = inverse_component(&grid, &ds);
            out.comp_mut(i * d.pow(3) + c).copy_from_slice(&vals);
        }
    }
    out
}

/// Divergence of a vector field.
pub fn divergence<T: Real>(v: &VectorField<T>) -> ScalarField<T> {
    let grid = *v.grid();
    let modes = Modes::new(&grid);
    let mut acc = vec![Complex::new(T::zero(), T::zero()); grid.node_count()];
    for d in 0..grid.dim() {
        let spec = forward_component(&grid, v.comp(d));
        let ds = derive_axis(&grid, &modes, &spec, d);
        for (a, b) in acc.iter_mut().zip(ds) {
            *a += b;
        }
    }
    ScalarField::from_data(&grid, inverse_component(&grid, &acc)).expect("sized")
}

/// Row-wise divergence of a rank-2 field: `out_i = Σ_k D_k t_{ik}`.
pub fn divergence_tensor2<T: Real>(t: &Tensor2Field<T>) -> VectorField<T> {
    let grid = *t.grid();
    let modes = Modes::new(&grid);
    let mut out = VectorField::zeros(&grid);
    for i in 0..grid.dim() {
        let mut acc = vec![Complex::new(T::zero(), T::zero()); grid.node_count()];
        for k in 0..grid.dim() {
            let spec = forward_component(&grid, t.entry(i, k));
            let ds = derive_axis(&grid, &modes, &spec, k);
            for (a, b) in acc.iter_mut().zip(ds) {
                *a += b;
            }
        }
        out.comp_mut(i)
            .copy_from_slice(&inverse_component(&grid, &acc));
    }
    out
}

fn even_multiply<T: Real>(
    grid: &Grid,
    modes: &Modes,
    spec: &[Complex<T>],
    sym: impl Fn(&[f64]) -> f64,
) -> Vec<T> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); spec.len()];
    let mut c = [0usize; 3];
    let mut kv = [0.0f64; 3];
    for (idx, &v) in spec.iter().enumerate() {
        modes.decompose(idx, &mut c);
        for d in 0..grid.dim() {
            kv[d] = modes.k_full[c[d]];
        }
        let m = T::of(sym(&kv[..grid.dim()]));
        out[idx] = v * m;
    }
    inverse_component(grid, &out)
}

/// Laplacian of any rank (full `-|k|²` symbol).
pub fn laplacian<T: Real, F: Field<T>>(f: &F) -> F {
    let grid = *f.grid();
    let modes = Modes::new(&grid);
    let mut out = f.clone();
    for c in 0..f.ncomp() {
        let spec = forward_component(&grid, f.comp(c));
        let vals = even_multiply(&grid, &modes, &spec, |k| {
            -k.iter().map(|x| x * x).sum::<f64>()
        });
        out.comp_mut(c).copy_from_slice(&vals);
    }
    out
}

/// Zero-mean solution of `Δw = f - mean f`, any rank.
pub fn inverse_laplacian<T: Real, F: Field<T>>(f: &F) -> F {
    let grid = *f.grid();
    let modes = Modes::new(&grid);
    let mut out = f.clone();
    let mut c = [0usize; 3];
    for comp in 0..f.ncomp() {
        let mut spec = forward_component(&grid, f.comp(comp));
        for (idx, v) in spec.iter_mut().enumerate() {
            modes.decompose(idx, &mut c);
            let k2: f64 = (0..grid.dim())
                .map(|d| modes.k_full[c[d]] * modes.k_full[c[d]])
                .sum();
            if k2 == 0.0 {
                *v = Complex::new(T::zero(), T::zero());
            } else {
                *v = *v * T::of(-1.0 / k2);
            }
        }
        out.comp_mut(comp)
            .copy_from_slice(&inverse_component(&grid, &spec));
    }
    out
}

/// Hessian of a scalar: entry `(i, j)` holds `D_i D_j s`.
pub fn hessian_scalar<T: Real>(s: &ScalarField<T>) -> Tensor2Field<T> {
    let grid = *s.grid();
    let modes = Modes::new(&grid);
    let spec = forward_component(&grid, s.comp(0));
    let mut out = Tensor2Field::zeros(&grid);
    let d = grid.dim();
    for i in 0..d {
        for j in 0..d {
            let mut der = vec![Complex::new(T::zero(), T::zero()); spec.len()];
            let mut c = [0usize; 3];
            for (idx, &v) in spec.iter().enumerate() {
                modes.decompose(idx, &mut c);
                let m = T::of(-modes.k_odd[c[i]] * modes.k_odd[c[j]]);
                der[idx] = v * m;
            }
            out.entry_mut(i, j)
                .copy_from_slice(&inverse_component(&grid, &der));
        }
    }
    out
}

/// Second gradient of a vector: entry `(j, h, k)` holds `D_j D_k v_h`.
pub fn hessian_vector<T: Real>(v: &VectorField<T>) -> Tensor3Field<T> {
    let grid = *v.grid();
    let d = grid.dim();
    let modes = Modes::new(&grid);
    let mut out = Tensor3Field::zeros(&grid);
    let mut c = [0usize; 3];
    for h in 0..d {
        let spec = forward_component(&grid, v.comp(h));
        for j in 0..d {
            for k in 0..d {
                let mut der = vec![Complex::new(T::zero(), T::zero()); spec.len()];
                for (idx, &val) in spec.iter().enumerate() {
                    modes.decompose(idx, &mut c);
                    let m = T::of(-modes.k_odd[c[j]] * modes.k_odd[c[k]]);
                    der[idx] = val * m;
                }
                out.comp_mut((j * d + h) * d + k)
                    .copy_from_slice(&inverse_component(&grid, &der));
            }
        }
    }
    out
}

/// Third derivatives of a scalar: entry `(i, j, k)` holds `D_i D_j D_k s`.
pub fn third_scalar<T: Real>(s: &ScalarField<T>) -> Tensor3Field<T> {
    let grid = *s.grid();
    let d = grid.dim();
    let modes = Modes::new(&grid);
    let spec = forward_component(&grid, s.comp(0));
    let mut out = Tensor3Field::zeros(&grid);
    let mut c = [0usize; 3];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut der = vec![Complex::new(T::zero(), T::zero()); spec.len()];
                for (idx, &val) in spec.iter().enumerate() {
                    modes.decompose(idx, &mut c);
                    // (ik_i)(ik_j)(ik_k) = -i m with m = k_i k_j k_k
                    let m = T::of(modes.k_odd[c[i]] * modes.k_odd[c[j]] * modes.k_odd[c[k]]);
                    der[idx] = Complex::new(val.im * m, -val.re * m);
                }
                out.comp_mut((i * d + j) * d + k)
                    .copy_from_slice(&inverse_component(&grid, &der));
            }
        }
    }
    out
}

/// Third derivatives of a vector: entry `(i, j, h, k)` holds `D_i D_j D_k v_h`.
pub fn third_vector<T: Real>(v: &VectorField<T>) -> Tensor4Field<T> {
    let grid = *v.grid();
    let d = grid.dim();
    let modes = Modes::new(&grid);
    let mut out = Tensor4Field::zeros(&grid);
    let mut c = [0usize; 3];
    for h in 0..d {
        let spec = forward_component(&grid, v.comp(h));
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut der = vec![Complex::new(T::zero(), T::zero()); spec.len()];
                    for (idx, &val) in spec.iter().enumerate() {
                        modes.decompose(idx, &mut c);
                        let m = T::of(
                            modes.k_odd[c[i]] * modes.k_odd[c[j]] * modes.k_odd[c[k]],
                        );
                        // multiply by (i)^3 m = -i m
                        der[idx] = Complex::new(val.im * m, -val.re * m);
                    }
                    let comp = ((i * d + j) * d + h) * d + k;
                    out.comp_mut(comp)
                        .copy_from_slice(&inverse_component(&grid, &der));
                }
            }
        }
    }
    out
}

/// Leray projection onto divergence-free fields: `v - ∇Δ⁻¹(∇·v)` realized as
/// the mode-wise projector `I - k k·/|k|²`. The zero mode is untouched.
pub fn leray_project<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    let grid = *v.grid();
    let d = grid.dim();
    let modes = Modes::new(&grid);
    let specs: Vec<Vec<Complex<T>>> = (0..d)
        .map(|c| forward_component(&grid, v.comp(c)))
        .collect();
    let mut out_specs = specs.clone();
    let mut c = [0usize; 3];
    let mut kv = [0.0f64; 3];
    for idx in 0..grid.node_count() {
        modes.decompose(idx, &mut c);
        let mut k2 = 0.0;
        for dd in 0..d {
            kv[dd] = modes.k_full[c[dd]];
            k2 += kv[dd] * kv[dd];
        }
        if k2 == 0.0 {
            continue;
        }
        let mut kdotv = Complex::new(T::zero(), T::zero());
        for dd in 0..d {
            kdotv += specs[dd][idx] * T::of(kv[dd]);
        }
        for dd in 0..d {
            out_specs[dd][idx] -= kdotv * T::of(kv[dd] / k2);
        }
    }
    let mut out = VectorField::zeros(&grid);
    for dd in 0..d {
        out.comp_mut(dd)
            .copy_from_slice(&inverse_component(&grid, &out_specs[dd]));
    }
    out
}

/// Derivative kinds of the rank-erased interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    Grad,
    Div,
    Laplacian,
    Hessian,
    Third,
}

/// Rank-dispatching differentiation. Rank mismatches (divergence of a scalar,
/// gradients that would exceed rank 4) are rank errors.
pub fn differentiate<T: Real>(f: &FieldVariant<T>, kind: DiffKind) -> Result<FieldVariant<T>> {
    use FieldVariant as V;
    Ok(match (kind, f) {
        (DiffKind::Grad, V::Scalar(s)) => V::Vector(grad_scalar(s)),
        (DiffKind::Grad, V::Vector(v)) => V::Tensor2(grad_vector(v)),
        (DiffKind::Grad, V::Tensor2(t)) => V::Tensor3(grad_tensor2(t)),
        (DiffKind::Grad, V::Tensor3(t)) => V::Tensor4(grad_tensor3(t)),
        (DiffKind::Grad, V::Tensor4(_)) => {
            return Err(Error::Rank("gradient of a rank-4 field exceeds rank 4".into()))
        }
        (DiffKind::Div, V::Vector(v)) => V::Scalar(divergence(v)),
        (DiffKind::Div, V::Tensor2(t)) => V::Vector(divergence_tensor2(t)),
        (DiffKind::Div, _) => {
            return Err(Error::Rank(format!(
                "divergence needs rank 1 or 2, got rank {}",
                f.rank()
            )))
        }
        (DiffKind::Laplacian, V::Scalar(s)) => V::Scalar(laplacian(s)),
        (DiffKind::Laplacian, V::Vector(v)) => V::Vector(laplacian(v)),
        (DiffKind::Laplacian, V::Tensor2(t)) => V::Tensor2(laplacian(t)),
        (DiffKind::Laplacian, V::Tensor3(t)) => V::Tensor3(laplacian(t)),
        (DiffKind::Laplacian, V::Tensor4(t)) => V::Tensor4(laplacian(t)),
        (DiffKind::Hessian, V::Scalar(s)) => V::Tensor2(hessian_scalar(s)),
        (DiffKind::Hessian, V::Vector(v)) => V::Tensor3(hessian_vector(v)),
        (DiffKind::Hessian, _) => {
            return Err(Error::Rank(format!(
                "hessian needs rank 0 or 1, got rank {}",
                f.rank()
            )))
        }
        (DiffKind::Third, V::Scalar(s)) => V::Tensor3(third_scalar(s)),
        (DiffKind::Third, V::Vector(v)) => V::Tensor4(third_vector(v)),
        (DiffKind::Third, _) => {
            return Err(Error::Rank(format!(
                "third derivative needs rank 0 or 1, got rank {}",
                f.rank()
            )))
        }
    })
}
