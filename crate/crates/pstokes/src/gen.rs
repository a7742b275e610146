//! Random field ensembles and the built-in analytic forcing profiles.
//!
//! Random fields are drawn in spectral space: independent complex Gaussian
//! coefficients on the 2/3 band with amplitude `(1 + |m|²)^{-decay/2}`, then
//! an inverse transform whose real part is kept. Deterministic in
//! `(seed, stream)` and in mode iteration order.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::field::{Field, ScalarField, VectorField};
use crate::grid::Grid;
use crate::mollify;
use crate::real::Real;
use crate::rng;
use crate::spectral;

/// Random band-limited scalar with power-law coefficient decay.
pub fn random_scalar<T: Real>(grid: &Grid, seed: u64, stream_id: u64, decay: f64) -> ScalarField<T> {
    random_scalar_capped(grid, seed, stream_id, decay, grid.dealias_cutoff())
}

/// Random scalar with an explicit frequency cap, so the same continuum
/// function can be sampled on grids of different resolution (refinement
/// studies). Draws run over the capped cube in a fixed frequency order,
/// independent of the grid.
pub fn random_scalar_capped<T: Real>(
    grid: &Grid,
    seed: u64,
    stream_id: u64,
    decay: f64,
    mode_cap: i64,
) -> ScalarField<T> {
    let mut rng = rng::stream(seed, stream_id);
    let cutoff = mode_cap.min(grid.dealias_cutoff());
    let n = grid.points_per_axis() as i64;
    let nodes = grid.node_count();
    let dim = grid.dim();
    let mut spec = vec![Complex::new(T::zero(), T::zero()); nodes];
    let span = 2 * cutoff + 1;
    let count = span.pow(dim as u32);
    let mut freqs = [0i64; 3];
    for flat in 0..count {
        // lexicographic frequency order, independent of the grid resolution
        let mut rem = flat;
        for d in (0..dim).rev() {
            freqs[d] = rem % span - cutoff;
            rem /= span;
        }
        let m2: i64 = freqs[..dim].iter().map(|m| m * m).sum();
        let amp = (1.0 + m2 as f64).powf(-decay / 2.0);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if m2 == 0 {
            continue;
        }
        let mut coords = [0usize; 3];
        for d in 0..dim {
            coords[d] = freqs[d].rem_euclid(n) as usize;
        }
        spec[grid.node_index(&coords[..dim])] = Complex::new(T::of(re * amp), T::of(im * amp));
    }
    let vals = spectral::inverse_component(grid, &spec);
    ScalarField::from_data(grid, vals).expect("sized")
}

/// Random band-limited vector field (independent components).
pub fn random_vector<T: Real>(grid: &Grid, seed: u64, stream_id: u64, decay: f64) -> VectorField<T> {
    random_vector_capped(grid, seed, stream_id, decay, grid.dealias_cutoff())
}

/// Vector variant of [`random_scalar_capped`].
pub fn random_vector_capped<T: Real>(
    grid: &Grid,
    seed: u64,
    stream_id: u64,
    decay: f64,
    mode_cap: i64,
) -> VectorField<T> {
    let mut out = VectorField::zeros(grid);
    for d in 0..grid.dim() {
        let s = random_scalar_capped::<T>(grid, seed, stream_id * 8 + d as u64 + 1, decay, mode_cap);
        out.comp_mut(d).copy_from_slice(s.comp(0));
    }
    out
}

/// Random band-limited divergence-free vector field.
pub fn random_solenoidal<T: Real>(
    grid: &Grid,
    seed: u64,
    stream_id: u64,
    decay: f64,
) -> VectorField<T> {
    spectral::leray_project(&random_vector(grid, seed, stream_id, decay))
}

/// Multiply by a smooth radial mask supported well inside the box and
/// re-dealias; used by checks that emulate compactly supported data.
pub fn compact_mask<T: Real, F: Field<T>>(f: &F) -> F {
    let grid = *f.grid();
    let chi = mollify::cutoff::<T>(&grid, grid.box_length() / 5.0).expect("radius fits");
    let mut out = f.clone();
    for c in 0..f.ncomp() {
        let comp = out.comp_mut(c);
        for (v, &m) in comp.iter_mut().zip(chi.comp(0)) {
            *v = *v * m;
        }
    }
    spectral::dealias(&out)
}

/// Unit polarization orthogonal to the integer mode `m`.
fn polarization(dim: usize, m: &[i64]) -> Vec<f64> {
    let k: Vec<f64> = m.iter().map(|&x| x as f64).collect();
    let norm2: f64 = k.iter().map(|x| x * x).sum();
    assert!(norm2 > 0.0, "mode must be nonzero");
    if dim == 2 {
        let n = norm2.sqrt();
        return vec![-k[1] / n, k[0] / n];
    }
    // cross k with the axis least aligned with it
    let axis = if k[0].abs() <= k[1].abs() && k[0].abs() <= k[2].abs() {
        [1.0, 0.0, 0.0]
    } else if k[1].abs() <= k[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e = [
        k[1] * axis[2] - k[2] * axis[1],
        k[2] * axis[0] - k[0] * axis[2],
        k[0] * axis[1] - k[1] * axis[0],
    ];
    let n = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
    vec![e[0] / n, e[1] / n, e[2] / n]
}

/// Divergence-free single-mode forcing `A sin(k·x) e`, `e ⊥ k`.
pub fn single_mode_forcing<T: Real>(grid: &Grid, mode: &[i64], amplitude: f64) -> VectorField<T> {
    assert_eq!(mode.len(), grid.dim());
    let e = polarization(grid.dim(), mode);
    let two_pi_over_l = 2.0 * std::f64::consts::PI / grid.box_length();
    VectorField::from_fn(grid, |x| {
        let phase: f64 = mode
            .iter()
            .zip(x)
            .map(|(&m, &xi)| m as f64 * two_pi_over_l * xi)
            .sum();
        e.iter().map(|&ei| amplitude * phase.sin() * ei).collect()
    })
}

/// Compactly supported solenoidal forcing: the perpendicular gradient (2-d)
/// or vertical curl (3-d) of a polynomial bump of the given radius, centered
/// in the box.
pub fn solenoidal_bump_forcing<T: Real>(
    grid: &Grid,
    radius: f64,
    amplitude: f64,
) -> VectorField<T> {
    assert!(radius > 0.0 && radius <= grid.box_length() / 2.0);
    let center = grid.box_length() / 2.0;
    let psi = ScalarField::<T>::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|&xi| (xi - center) * (xi - center)).sum();
        let t = r2 / (radius * radius);
        if t >= 1.0 {
            0.0
        } else {
            amplitude * (1.0 - t).powi(4)
        }
    });
    let g = spectral::grad_scalar(&psi);
    let mut f = VectorField::zeros(grid);
    // (D_y psi, -D_x psi[, 0]): divergence-free by construction
    f.comp_mut(0).copy_from_slice(g.comp(1));
    let neg: Vec<T> = g.comp(0).iter().map(|&v| -v).collect();
    f.comp_mut(1).copy_from_slice(&neg);
    spectral::dealias(&f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms;

    #[test]
    fn random_fields_are_deterministic_and_band_limited() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let a = random_scalar::<f64>(&g, 7, 0, 2.0);
        let b = random_scalar::<f64>(&g, 7, 0, 2.0);
        assert_eq!(a.data(), b.data());
        assert!(spectral::is_band_limited(&a, 1e-12));
        let c = random_scalar::<f64>(&g, 8, 0, 2.0);
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn generated_forcings_are_divergence_free() {
        let g = Grid::new(3, 16, 2.0 * std::f64::consts::PI).unwrap();
        for f in [
            single_mode_forcing::<f64>(&g, &[1, 2, 0], 1.0),
            solenoidal_bump_forcing::<f64>(&g, 1.0, 1.0),
            random_solenoidal::<f64>(&g, 3, 1, 2.0),
        ] {
            let div = spectral::divergence(&f);
            let scale = norms::max_norm(&f).max(1e-30);
            assert!(norms::max_norm(&div) <= 1e-10 * scale);
        }
    }
}
