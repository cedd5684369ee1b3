use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{Grid, SampledLine};
use crate::error::{PsqmError, Result};

/// Complex samples over a grid, row-major with the first axis slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        ComplexField {
            grid,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_vec(grid: Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(PsqmError::DimensionMismatch {
                expected: grid.len(),
                got: data.len(),
            });
        }
        Ok(ComplexField { grid, data })
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let data = (0..grid.len())
            .into_par_iter()
            .map(|k| f(&grid.coords_of(k)))
            .collect();
        ComplexField { grid, data }
    }

    pub fn from_real_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn at(&self, idx: &[usize]) -> Complex64 {
        self.data[self.grid.flat_index(idx)]
    }

    /// Same samples, relabelled onto a grid of identical shape.
    pub fn with_grid(self, grid: Grid) -> Result<Self> {
        if grid.shape() != self.grid.shape() {
            return Err(PsqmError::GridMismatch(format!(
                "shape {:?} vs {:?}",
                grid.shape(),
                self.grid.shape()
            )));
        }
        Ok(ComplexField {
            grid,
            data: self.data,
        })
    }

    /// Midpoint-rule integral with weight dx per axis.
    pub fn quadrature(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        ComplexField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn zip_with<F>(&self, other: &ComplexField, f: F) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        self.grid.ensure_same(&other.grid)?;
        Ok(ComplexField {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &ComplexField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ComplexField) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Samples on a grid whose axes are centred sub-lines of ours.
    pub fn restrict(&self, sub: &Grid) -> Result<Self> {
        if sub.dims() != self.grid.dims() {
            return Err(PsqmError::DimensionMismatch {
                expected: self.grid.dims(),
                got: sub.dims(),
            });
        }
        let mut offsets = Vec::with_capacity(sub.dims());
        for (a, b) in sub.axes().iter().zip(self.grid.axes()) {
            let off = b.index_of(a.x(0)).ok_or_else(|| {
                PsqmError::GridMismatch(format!(
                    "sub-grid {} not aligned with {}",
                    sub.describe(),
                    self.grid.describe()
                ))
            })?;
            if (a.spacing() - b.spacing()).abs() > 1e-12 * b.spacing()
                || off + a.points() > b.points()
            {
                return Err(PsqmError::GridMismatch(format!(
                    "sub-grid {} not contained in {}",
                    sub.describe(),
                    self.grid.describe()
                )));
            }
            offsets.push(off);
        }
        let data = (0..sub.len())
            .map(|k| {
                let idx: Vec<usize> = sub
                    .multi_index(k)
                    .iter()
                    .zip(&offsets)
                    .map(|(i, o)| i + o)
                    .collect();
                self.at(&idx)
            })
            .collect();
        Ok(ComplexField {
            grid: sub.clone(),
            data,
        })
    }

    /// Fraction of L1 mass within the outer 10% of any axis.
    pub fn edge_mass(&self) -> f64 {
        let total: f64 = self.data.iter().map(|z| z.norm()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let shape = self.grid.shape();
        let edge: f64 = (0..self.data.len())
            .filter(|&k| {
                self.grid
                    .multi_index(k)
                    .iter()
                    .zip(&shape)
                    .any(|(&i, &n)| {
                        let band = (n / 10).max(1);
                        i < band || i >= n - band
                    })
            })
            .map(|k| self.data[k].norm())
            .sum();
        edge / total
    }
}

/// Replace one axis by `line`, new sample r being Σ_j weights[r][j] f(..., j, ...).
pub(crate) fn contract_axis(
    f: &ComplexField,
    axis: usize,
    weights: &[Vec<f64>],
    line: SampledLine,
) -> Result<ComplexField> {
    let shape = f.grid().shape();
    let n_old = shape[axis];
    if weights.len() != line.points() || weights.iter().any(|w| w.len() != n_old) {
        return Err(PsqmError::DimensionMismatch {
            expected: n_old,
            got: weights.first().map_or(0, |w| w.len()),
        });
    }
    let inner: usize = shape[axis + 1..].iter().product();
    let n_new = line.points();
    let mut out = vec![Complex64::new(0.0, 0.0); f.len() / n_old * n_new];
    out.par_chunks_mut(n_new * inner)
        .zip(f.data().par_chunks(n_old * inner))
        .for_each(|(dst, src)| {
            for (r, w) in weights.iter().enumerate() {
                let row = &mut dst[r * inner..(r + 1) * inner];
                for (j, &wj) in w.iter().enumerate() {
                    if wj == 0.0 {
                        continue;
                    }
                    for (o, s) in row.iter_mut().zip(&src[j * inner..(j + 1) * inner]) {
                        *o += s * wj;
                    }
                }
            }
        });
    ComplexField::from_vec(f.grid().with_axis(axis, line), out)
}

/// Midpoint-rule integral of a field.
pub fn quadrature(f: &ComplexField) -> Complex64 {
    f.quadrature()
}

/// Central-difference Laplacian of `f` at `z` with step `h`.
pub fn laplacian_fd<F>(f: F, z: &[f64], h: f64) -> Complex64
where
    F: Fn(&[f64]) -> Complex64,
{
    let centre = f(z);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z.to_vec();
    for k in 0..z.len() {
        w[k] = z[k] + h;
        let up = f(&w);
        w[k] = z[k] - h;
        let down = f(&w);
        w[k] = z[k];
        acc += (up + down - 2.0 * centre) / (h * h);
    }
    acc
}
