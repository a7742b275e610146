//! Periodic box discretization.
//!
//! A [`Grid`] is the stage every field lives on: a `dim`-dimensional torus of
//! side `box_length`, sampled on `points_per_axis` equispaced nodes per axis.
//! The wavenumber set is the symmetric integer lattice scaled by
//! `2π/box_length`; for even resolutions the unpaired Nyquist index is kept
//! for symmetric multipliers and zeroed by odd-derivative multipliers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid. Geometry is metadata and stays `f64` regardless of
/// the field scalar type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points_per_axis: usize,
    box_length: f64,
}

impl Grid {
    /// Build a grid, enforcing the power-of-two resolution rule.
    pub fn new(dim: usize, points_per_axis: usize, box_length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if points_per_axis < 8 || !points_per_axis.is_power_of_two() {
            return Err(Error::Config(format!(
                "points_per_axis must be a power of two >= 8, got {points_per_axis}"
            )));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(Error::Config(format!(
                "box_length must be positive and finite, got {box_length}"
            )));
        }
        Ok(Self {
            dim,
            points_per_axis,
            box_length,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    #[inline]
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Node spacing `box_length / points_per_axis`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.box_length / self.points_per_axis as f64
    }

    /// Total node count `points_per_axis ^ dim`.
    #[inline]
    pub fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Box volume.
    #[inline]
    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dim as i32)
    }

    /// Quadrature weight of one node, `spacing^dim`. The node-sum trapezoid
    /// rule on the torus is exact for band-limited integrands.
    #[inline]
    pub fn quadrature_weight(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Signed integer frequency for axis index `i`: `0..=n/2, -n/2+1..=-1`.
    #[inline]
    pub fn freq_index(&self, i: usize) -> i64 {
        let n = self.points_per_axis as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Physical wavenumber `2π m / box_length` for axis index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.freq_index(i) as f64 / self.box_length
    }

    /// Largest retained integer frequency under the 2/3 dealiasing rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        (self.points_per_axis as i64) / 3
    }

    /// Flat node index from per-axis coordinates (row-major, axis 0 slowest).
    #[inline]
    pub fn node_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        let mut idx = 0;
        for &c in coords {
            idx = idx * self.points_per_axis + c;
        }
        idx
    }

    /// Per-axis coordinates of a flat node index.
    #[inline]
    pub fn node_coords(&self, mut idx: usize, coords: &mut [usize]) {
        for d in (0..self.dim).rev() {
            coords[d] = idx % self.points_per_axis;
            idx /= self.points_per_axis;
        }
    }

    /// Physical position of axis coordinate `c`.
    #[inline]
    pub fn axis_position(&self, c: usize) -> f64 {
        c as f64 * self.spacing()
    }

    /// Iterate node positions together with flat indices.
    pub fn positions(&self) -> impl Iterator<Item = (usize, [f64; 3])> + '_ {
        let n = self.node_count();
        (0..n).map(move |idx| {
            let mut coords = [0usize; 3];
            self.node_coords(idx, &mut coords[..self.dim]);
            let mut x = [0.0; 3];
            for d in 0..self.dim {
                x[d] = self.axis_position(coords[d]);
            }
            (idx, x)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_with_consistent_spacing() {
        let g = Grid::new(3, 16, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(g.spacing(), 2.0 * std::f64::consts::PI / 16.0);
        assert_eq!(g.node_count(), 16 * 16 * 16);
    }

    #[test]
    fn two_dimensional_node_count() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        assert_eq!(g.node_count(), 64);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(Grid::new(3, 7, 1.0), Err(Error::Config(_))));
        assert!(matches!(Grid::new(3, 4, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_dimension_and_length() {
        assert!(matches!(
            Grid::new(4, 8, 1.0),
            Err(Error::UnsupportedDimension(4))
        ));
        assert!(matches!(Grid::new(2, 8, 0.0), Err(Error::Config(_))));
        assert!(matches!(Grid::new(2, 8, -1.0), Err(Error::Config(_))));
    }

    #[test]
    fn wavenumbers_form_symmetric_lattice() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let freqs: Vec<i64> = (0..8).map(|i| g.freq_index(i)).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        let k1 = g.wavenumber(1);
        assert!((k1 - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let mut coords = [0usize; 3];
        for idx in [0usize, 1, 63, 511, 200] {
            g.node_coords(idx, &mut coords);
            assert_eq!(g.node_index(&coords), idx);
        }
    }
}
