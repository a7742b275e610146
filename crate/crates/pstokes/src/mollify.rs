//! Smoothing kernel and cut-off profiles.
//!
//! The mollifier is a periodized polynomial bump of compact support `eta`,
//! sampled on the grid and normalized to unit mass there, applied as a
//! spectral multiplier (exact circular convolution). Mass normalization makes
//! the DC gain exactly one: means are preserved, constants are fixed points,
//! and nonnegativity of the kernel gives the `L^q` contraction.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{Field, ScalarField};
use crate::grid::Grid;
use crate::real::Real;
use crate::spectral;

/// Reusable mollification operator for a fixed `(grid, eta)`.
pub struct Mollifier<T: Real> {
    grid: Grid,
    /// Real spectral gains in `[-1, 1]` with `gain[0 mode] = 1`; `None` for
    /// the identity (`eta = 0`).
    gain: Option<Vec<T>>,
}

impl<T: Real> Mollifier<T> {
    pub fn new(grid: &Grid, eta: f64) -> Result<Self> {
        if eta < 0.0 || !eta.is_finite() {
            return Err(Error::Parameter(format!(
                "mollifier width must be nonnegative, got {eta}"
            )));
        }
        if eta == 0.0 {
            return Ok(Self {
                grid: *grid,
                gain: None,
            });
        }
        if eta > grid.box_length() / 2.0 {
            return Err(Error::Parameter(format!(
                "mollifier width {eta} exceeds half the box length"
            )));
        }
        // Sample the bump with minimum-image distances from the origin node.
        let l = grid.box_length();
        let kernel = ScalarField::<T>::from_fn(grid, |x| {
            let mut r2 = 0.0;
            for &xi in x {
                let d = if xi > l / 2.0 { l - xi } else { xi };
                r2 += d * d;
            }
            let t = r2 / (eta * eta);
            if t >= 1.0 {
                0.0
            } else {
                (1.0 - t).powi(4)
            }
        });
        let spec = spectral::coefficients(&kernel);
        let dc = spec[0].re;
        if !(dc > T::zero()) {
            return Err(Error::Parameter(format!(
                "mollifier width {eta} is below grid resolution"
            )));
        }
        // The kernel is even under the minimum image, so the transform is
        // real; dividing by the DC coefficient normalizes the mass to one.
        let gain: Vec<T> = spec.iter().map(|z| z.re / dc).collect();
        Ok(Self {
            grid: *grid,
            gain: Some(gain),
        })
    }

    /// Convolve a field with the kernel, component by component.
    pub fn apply<F: Field<T>>(&self, f: &F) -> F {
        let Some(gain) = &self.gain else {
            return f.clone();
        };
        let mut out = f.clone();
        for c in 0..f.ncomp() {
            let mut spec = spectral::forward_component(&self.grid, f.comp(c));
            for (z, &g) in spec.iter_mut().zip(gain) {
                *z = Complex::new(z.re * g, z.im * g);
            }
            out.comp_mut(c)
                .copy_from_slice(&spectral::inverse_component(&self.grid, &spec));
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.gain.is_none()
    }
}

/// One-shot mollification with width `eta` (`eta = 0` is the identity).
pub fn mollify<T: Real, F: Field<T>>(f: &F, eta: f64) -> Result<F> {
    Ok(Mollifier::new(f.grid(), eta)?.apply(f))
}

/// Smooth radial cut-off about the box center: 1 inside radius `theta`,
/// 0 outside `2 theta`, quintic smoothstep in between, so the gradient is
/// bounded by `1.875/theta`.
pub fn cutoff<T: Real>(grid: &Grid, theta: f64) -> Result<ScalarField<T>> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Parameter(format!(
            "cutoff radius must be positive, got {theta}"
        )));
    }
    if theta > grid.box_length() / 4.0 {
        return Err(Error::Support(format!(
            "cutoff radius {theta} puts the support outside the box (needs theta <= L/4 = {})",
            grid.box_length() / 4.0
        )));
    }
    let center = grid.box_length() / 2.0;
    Ok(ScalarField::from_fn(grid, |x| {
        let r = x
            .iter()
            .map(|&xi| (xi - center) * (xi - center))
            .sum::<f64>()
            .sqrt();
        if r <= theta {
            1.0
        } else if r >= 2.0 * theta {
            0.0
        } else {
            let t = (r - theta) / theta;
            1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms;

    #[test]
    fn identity_and_constants() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f = ScalarField::<f64>::from_fn(&g, |x| (x[0] * 7.0).sin());
        let same = mollify(&f, 0.0).unwrap();
        assert_eq!(f.data(), same.data());
        let c = ScalarField::<f64>::from_fn(&g, |_| 2.5);
        let mc = mollify(&c, 0.2).unwrap();
        for &v in mc.data() {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_width_rejected() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let f = ScalarField::<f64>::zeros(&g);
        assert!(matches!(mollify(&f, -0.1), Err(Error::Parameter(_))));
    }

    #[test]
    fn cutoff_plateau_and_support() {
        let g = Grid::new(2, 32, 4.0).unwrap();
        let theta = 0.5;
        let chi = cutoff::<f64>(&g, theta).unwrap();
        let center = 2.0;
        for (idx, x) in g.positions() {
            let r = ((x[0] - center).powi(2) + (x[1] - center).powi(2)).sqrt();
            let v = chi.data()[idx];
            assert!((0.0..=1.0).contains(&v));
            if r <= 0.5 * theta + 1e-12 {
                assert_eq!(v, 1.0);
            }
            if r >= 3.0 * theta {
                assert_eq!(v, 0.0);
            }
        }
        assert!(cutoff::<f64>(&g, 1.5).is_err());
    }

    #[test]
    fn l2_contraction_and_mean() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let f = crate::gen::random_scalar::<f64>(&g, 11, 0, 1.5);
        let m = mollify(&f, 0.12).unwrap();
        assert!(norms::l2_norm(&m) <= norms::l2_norm(&f) * (1.0 + 1e-12));
        assert!((m.mean() - f.mean()).abs() <= 1e-12);
    }
}
