//! Uniform periodic grids over a centered box [−L/2, L/2)^d and complex
//! fields sampled on them, with the flat binary field format
//! (little-endian: u32 dim, u32 n, f64 L, then n^d re/im f64 pairs).

use crate::{cast, Real};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::io::{self, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid: {0}")]
    Invalid(String),
    #[error("sampled function produced a non-finite value at node {index}")]
    NonFiniteSample { index: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt field record: {0}")]
    Corrupt(String),
}

/// Discretization of ℝ^d by a periodic box [−L/2, L/2)^d with n points per
/// axis (n a power of two).
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    pub dim: usize,
    pub extent: T,
    pub points_per_dim: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, extent: T, points_per_dim: usize) -> Result<Self, GridError> {
        if dim == 0 || dim > 3 {
            return Err(GridError::Invalid(format!("dim {dim} unsupported")));
        }
        if points_per_dim < 16 || !points_per_dim.is_power_of_two() {
            return Err(GridError::Invalid(format!("n = {points_per_dim} must be a power of two >= 16")));
        }
        if extent <= T::zero() {
            return Err(GridError::Invalid("extent must be positive".into()));
        }
        if (points_per_dim as u64).checked_pow(dim as u32).is_none() {
            return Err(GridError::Invalid("n^d overflows".into()));
        }
        Ok(Grid { dim, extent, points_per_dim })
    }

    pub fn spacing(&self) -> T {
        self.extent / cast(self.points_per_dim as f64)
    }

    pub fn num_points(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    /// h^d, the quadrature weight of one node.
    pub fn cell_volume(&self) -> T {
        let h = self.spacing();
        (0..self.dim).fold(T::one(), |acc, _| acc * h)
    }

    /// Coordinate along one axis for index i (last axis varies fastest in
    /// flattened order).
    pub fn coord_1d(&self, i: usize) -> T {
        -self.extent * cast::<T>(0.5) + self.spacing() * cast(i as f64)
    }

    /// Full coordinate vector of a flattened index.
    pub fn coords(&self, mut index: usize) -> Vec<T> {
        let n = self.points_per_dim;
        let mut out = vec![T::zero(); self.dim];
        for axis in (0..self.dim).rev() {
            out[axis] = self.coord_1d(index % n);
            index /= n;
        }
        out
    }

    /// Angular wavenumber for the mode index along one axis.
    pub fn wavenumber_1d(&self, i: usize) -> T {
        let n = self.points_per_dim;
        let k = if i < n / 2 { i as isize } else { i as isize - n as isize };
        cast::<T>(2.0) * T::PI() / self.extent * cast(k as f64)
    }
}

/// Complex samples on a [`Grid`], flattened with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub grid: Grid<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        let len = grid.num_points();
        Field { grid, values: vec![Complex::new(T::zero(), T::zero()); len] }
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn linf(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// h^d-weighted discrete L² norm.
    pub fn l2(&self) -> T {
        let w = self.grid.cell_volume();
        (self.values.iter().fold(T::zero(), |s, z| s + z.norm_sqr()) * w).sqrt()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }
}

/// Pointwise evaluation of `f` at the grid nodes.
pub fn sample<T: Real, F>(f: F, grid: &Grid<T>) -> Result<Field<T>, GridError>
where
    F: Fn(&[T]) -> Complex<T>,
{
    let mut field = Field::zeros(grid.clone());
    for idx in 0..grid.num_points() {
        let x = grid.coords(idx);
        let z = f(&x);
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(GridError::NonFiniteSample { index: idx });
        }
        field.values[idx] = z;
    }
    Ok(field)
}

/// Sidecar metadata carried next to a binary field record.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldMeta {
    pub lambda: f64,
    pub eps: f64,
    pub t: f64,
}

pub fn write_field<T: Real, W: Write>(field: &Field<T>, mut w: W) -> Result<(), GridError> {
    w.write_all(&(field.grid.dim as u32).to_le_bytes())?;
    w.write_all(&(field.grid.points_per_dim as u32).to_le_bytes())?;
    w.write_all(&field.grid.extent.to_f64().unwrap().to_le_bytes())?;
    for z in &field.values {
        w.write_all(&z.re.to_f64().unwrap().to_le_bytes())?;
        w.write_all(&z.im.to_f64().unwrap().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field<T: Real, R: Read>(mut r: R) -> Result<Field<T>, GridError> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let extent = f64::from_le_bytes(b8);
    let grid = Grid::new(dim, cast::<T>(extent), n).map_err(|e| GridError::Corrupt(e.to_string()))?;
    let mut field = Field::zeros(grid);
    for z in field.values.iter_mut() {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        *z = Complex::new(cast(re), cast(im));
    }
    // trailing bytes mean the record does not match its own header
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(field),
        _ => Err(GridError::Corrupt("trailing bytes after field data".into())),
    }
}
