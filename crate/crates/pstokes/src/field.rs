//! Field containers: scalar, vector and tensor values sampled on grid nodes.
//!
//! Storage is component-major (`data[c * nodes + node]`), with `dim^rank`
//! components. The rank-2 convention follows the gradient layout used by all
//! operators here: entry `(i, j)` of a gradient field holds the `x_j`
//! derivative of component `i`. Rank-3 fields carry the derivative index
//! first: entry `(j, h, k)` of a second-gradient holds `D_j` of entry
//! `(h, k)`. Rank-4 adds one more leading derivative index, and also houses
//! the fourth-order coefficient tensor of the nonlinearity.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::real::Real;

/// Shared surface of all field ranks.
pub trait Field<T: Real>: Sized + Clone {
    /// Tensor rank: number of component indices.
    const RANK: u32;

    fn grid(&self) -> &Grid;
    fn data(&self) -> &[T];
    fn data_mut(&mut self) -> &mut [T];

    /// Build a zero field on `grid`.
    fn zeros(grid: &Grid) -> Self;

    /// Wrap raw component-major data; length must be `dim^RANK * nodes`.
    fn from_data(grid: &Grid, data: Vec<T>) -> Result<Self>;

    /// Component count `dim^RANK`.
    #[inline]
    fn ncomp(&self) -> usize {
        self.grid().dim().pow(Self::RANK)
    }

    #[inline]
    fn comp(&self, c: usize) -> &[T] {
        let n = self.grid().node_count();
        &self.data()[c * n..(c + 1) * n]
    }

    #[inline]
    fn comp_mut(&mut self, c: usize) -> &mut [T] {
        let n = self.grid().node_count();
        &mut self.data_mut()[c * n..(c + 1) * n]
    }

    /// All values finite?
    fn is_finite(&self) -> bool {
        self.data().iter().all(|v| v.is_finite())
    }

    /// Pointwise Euclidean magnitude across components.
    fn magnitude(&self) -> crate::field::ScalarField<T> {
        let n = self.grid().node_count();
        let mut out = vec![T::zero(); n];
        for c in 0..self.ncomp() {
            let comp = self.comp(c);
            for (o, &v) in out.iter_mut().zip(comp) {
                *o = *o + v * v;
            }
        }
        for o in out.iter_mut() {
            *o = o.sqrt();
        }
        ScalarField {
            grid: *self.grid(),
            data: out,
        }
    }

    /// In-place linear update `self += alpha * other`.
    fn axpy(&mut self, alpha: T, other: &Self) {
        debug_assert_eq!(self.data().len(), other.data().len());
        for (a, &b) in self.data_mut().iter_mut().zip(other.data()) {
            *a = *a + alpha * b;
        }
    }

    /// In-place scaling.
    fn scale(&mut self, alpha: T) {
        for a in self.data_mut() {
            *a = *a * alpha;
        }
    }

    /// Multiply every component pointwise by a scalar field.
    fn scale_pointwise(&mut self, s: &crate::field::ScalarField<T>) {
        let n = self.grid().node_count();
        debug_assert_eq!(s.data().len(), n);
        for c in 0..self.ncomp() {
            let comp = self.comp_mut(c);
            for (v, &w) in comp.iter_mut().zip(s.data()) {
                *v = *v * w;
            }
        }
    }

    /// Remove the mean of every component.
    fn remove_mean(&mut self) {
        let n = self.grid().node_count();
        let inv = T::of(1.0 / n as f64);
        for c in 0..self.ncomp() {
            let comp = self.comp_mut(c);
            let mut s = T::zero();
            for &v in comp.iter() {
                s += v;
            }
            let m = s * inv;
            for v in comp.iter_mut() {
                *v = *v - m;
            }
        }
    }
}

macro_rules! field_type {
    ($(#[$doc:meta])* $name:ident, $rank:expr) => {
        $(#[$doc])*
        #[derive(Debug, Clone)]
        pub struct $name<T> {
            grid: Grid,
            data: Vec<T>,
        }

        impl<T: Real> Field<T> for $name<T> {
            const RANK: u32 = $rank;

            #[inline]
            fn grid(&self) -> &Grid {
                &self.grid
            }

            #[inline]
            fn data(&self) -> &[T] {
                &self.data
            }

            #[inline]
            fn data_mut(&mut self) -> &mut [T] {
                &mut self.data
            }

            fn zeros(grid: &Grid) -> Self {
                let len = grid.dim().pow($rank) * grid.node_count();
                Self {
                    grid: *grid,
                    data: vec![T::zero(); len],
                }
            }

            fn from_data(grid: &Grid, data: Vec<T>) -> Result<Self> {
                let expect = grid.dim().pow($rank) * grid.node_count();
                if data.len() != expect {
                    return Err(Error::Rank(format!(
                        concat!(stringify!($name), " needs {} values, got {}"),
                        expect,
                        data.len()
                    )));
                }
                Ok(Self { grid: *grid, data })
            }
        }
    };
}

field_type!(
    /// Rank-0 field: one value per node.
    ScalarField,
    0
);
field_type!(
    /// Rank-1 field: `dim` components.
    VectorField,
    1
);
field_type!(
    /// Rank-2 field: `dim²` components, entry `(i, j)` = column-`j` of row-`i`.
    Tensor2Field,
    2
);
field_type!(
    /// Rank-3 field: `dim³` components, entry `(j, h, k)`.
    Tensor3Field,
    3
);
field_type!(
    /// Rank-4 field: `dim⁴` components, entry `(i, j, h, k)`.
    Tensor4Field,
    4
);

impl<T: Real> ScalarField<T> {
    /// Sample a function of position on the grid nodes.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for (idx, x) in grid.positions() {
            out.data_mut()[idx] = T::of(f(&x[..grid.dim()]));
        }
        out
    }

    /// Mean value over nodes.
    pub fn mean(&self) -> T {
        let mut s = T::zero();
        for &v in self.data() {
            s += v;
        }
        s * T::of(1.0 / self.grid().node_count() as f64)
    }
}

impl<T: Real> VectorField<T> {
    /// Sample a vector function of position.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let mut out = Self::zeros(grid);
        let n = grid.node_count();
        for (idx, x) in grid.positions() {
            let v = f(&x[..grid.dim()]);
            debug_assert_eq!(v.len(), grid.dim());
            for (c, &val) in v.iter().enumerate() {
                out.data_mut()[c * n + idx] = T::of(val);
            }
        }
        out
    }
}

impl<T: Real> Tensor2Field<T> {
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> &[T] {
        self.comp(i * self.grid().dim() + j)
    }

    #[inline]
    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut [T] {
        let d = self.grid().dim();
        self.comp_mut(i * d + j)
    }
}

impl<T: Real> Tensor3Field<T> {
    #[inline]
    pub fn entry(&self, j: usize, h: usize, k: usize) -> &[T] {
        let d = self.grid().dim();
        self.comp((j * d + h) * d + k)
    }
}

impl<T: Real> Tensor4Field<T> {
    #[inline]
    pub fn entry(&self, i: usize, j: usize, h: usize, k: usize) -> &[T] {
        let d = self.grid().dim();
        self.comp(((i * d + j) * d + h) * d + k)
    }
}

/// Rank-erased field, for the dynamic interfaces (differentiation dispatch,
/// file i/o).
#[derive(Debug, Clone)]
pub enum FieldVariant<T> {
    Scalar(ScalarField<T>),
    Vector(VectorField<T>),
    Tensor2(Tensor2Field<T>),
    Tensor3(Tensor3Field<T>),
    Tensor4(Tensor4Field<T>),
}

impl<T: Real> FieldVariant<T> {
    pub fn rank(&self) -> u32 {
        match self {
            FieldVariant::Scalar(_) => 0,
            FieldVariant::Vector(_) => 1,
            FieldVariant::Tensor2(_) => 2,
            FieldVariant::Tensor3(_) => 3,
            FieldVariant::Tensor4(_) => 4,
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            FieldVariant::Scalar(f) => f.grid(),
            FieldVariant::Vector(f) => f.grid(),
            FieldVariant::Tensor2(f) => f.grid(),
            FieldVariant::Tensor3(f) => f.grid(),
            FieldVariant::Tensor4(f) => f.grid(),
        }
    }

    pub fn data(&self) -> &[T] {
        match self {
            FieldVariant::Scalar(f) => f.data(),
            FieldVariant::Vector(f) => f.data(),
            FieldVariant::Tensor2(f) => f.data(),
            FieldVariant::Tensor3(f) => f.data(),
            FieldVariant::Tensor4(f) => f.data(),
        }
    }

    pub fn from_rank(grid: &Grid, rank: u32, data: Vec<T>) -> Result<Self> {
        Ok(match rank {
            0 => FieldVariant::Scalar(ScalarField::from_data(grid, data)?),
            1 => FieldVariant::Vector(VectorField::from_data(grid, data)?),
            2 => FieldVariant::Tensor2(Tensor2Field::from_data(grid, data)?),
            3 => FieldVariant::Tensor3(Tensor3Field::from_data(grid, data)?),
            4 => FieldVariant::Tensor4(Tensor4Field::from_data(grid, data)?),
            r => return Err(Error::Rank(format!("unsupported field rank {r}"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_layout_and_bounds() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let mut t = Tensor2Field::<f64>::zeros(&g);
        assert_eq!(t.ncomp(), 4);
        t.entry_mut(1, 0)[5] = 3.5;
        assert_eq!(t.comp(2)[5], 3.5);
        assert!(Tensor2Field::<f64>::from_data(&g, vec![0.0; 10]).is_err());
    }

    #[test]
    fn magnitude_is_euclidean() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let mut v = VectorField::<f64>::zeros(&g);
        v.comp_mut(0)[0] = 3.0;
        v.comp_mut(1)[0] = 4.0;
        let m = v.magnitude();
        assert_eq!(m.data()[0], 5.0);
    }

    #[test]
    fn remove_mean_zeroes_component_means() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let mut s = ScalarField::<f64>::from_fn(&g, |x| 1.0 + x[0]);
        s.remove_mean();
        assert!(s.mean().abs() < 1e-14);
    }
}
