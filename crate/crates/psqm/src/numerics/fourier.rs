//! Continuous Fourier transform F(f)(ξ) = (2π)^{-d/2} ∫ f(x) e^{-i x·ξ} dx on centred grids.
//!
//! With x_j = x_0 + j dx and ξ_k = ξ_0 + k dξ, dx dξ = 2π/n, the phase x_j ξ_k splits into
//! twiddles around a plain DFT, so the grid transform is exactly unitary and invertible.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::field::ComplexField;
use super::grid::SampledLine;
use crate::error::{PsqmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

struct LinePlan {
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    target: SampledLine,
}

impl LinePlan {
    fn new(line: &SampledLine, dir: Direction) -> Self {
        let n = line.points();
        let target = line.dual();
        let sign = match dir {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        };
        let (x0, dx) = (line.first(), line.spacing());
        let (k0, dk) = (target.first(), target.spacing());
        let scale = dx / (2.0 * PI).sqrt();
        let pre = (0..n)
            .map(|j| Complex64::from_polar(1.0, sign * j as f64 * dx * k0))
            .collect();
        let post = (0..n)
            .map(|k| Complex64::from_polar(scale, sign * x0 * (k0 + k as f64 * dk)))
            .collect();
        let mut planner = FftPlanner::new();
        let fft = match dir {
            Direction::Forward => planner.plan_fft_forward(n),
            Direction::Inverse => planner.plan_fft_inverse(n),
        };
        LinePlan {
            fft,
            pre,
            post,
            target,
        }
    }
}

/// Transform along one axis; the axis is replaced by its dual line.
pub fn transform_axis(f: &ComplexField, axis: usize, dir: Direction) -> Result<ComplexField> {
    let grid = f.grid();
    if axis >= grid.dims() {
        return Err(PsqmError::DimensionMismatch {
            expected: grid.dims(),
            got: axis + 1,
        });
    }
    let shape = grid.shape();
    let n = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let plan = LinePlan::new(grid.axis(axis), dir);
    let mut data = f.data().to_vec();
    data.par_chunks_mut(n * inner).for_each(|block| {
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.fft.get_inplace_scratch_len()];
        for i in 0..inner {
            for j in 0..n {
                line[j] = block[j * inner + i] * plan.pre[j];
            }
            plan.fft.process_with_scratch(&mut line, &mut scratch);
            for k in 0..n {
                block[k * inner + i] = line[k] * plan.post[k];
            }
        }
    });
    ComplexField::from_vec(grid.with_axis(axis, plan.target), data)
}

pub fn transform_axes(f: &ComplexField, axes: &[usize], dir: Direction) -> Result<ComplexField> {
    let mut out = f.clone();
    for &a in axes {
        out = transform_axis(&out, a, dir)?;
    }
    Ok(out)
}

/// F on every axis of the field.
pub fn fourier_continuous(f: &ComplexField) -> Result<ComplexField> {
    let axes: Vec<usize> = (0..f.grid().dims()).collect();
    transform_axes(f, &axes, Direction::Forward)
}

pub fn inverse_fourier_continuous(f: &ComplexField) -> Result<ComplexField> {
    let axes: Vec<usize> = (0..f.grid().dims()).collect();
    transform_axes(f, &axes, Direction::Inverse)
}

fn phase_halves(f: &ComplexField) -> Result<usize> {
    let d = f.grid().dims();
    if !d.is_multiple_of(2) {
        return Err(PsqmError::DimensionMismatch {
            expected: d + 1,
            got: d,
        });
    }
    Ok(d / 2)
}

/// F_I: transform over the first m of 2m coordinates.
pub fn fourier_partial_i(f: &ComplexField) -> Result<ComplexField> {
    let m = phase_halves(f)?;
    transform_axes(f, &(0..m).collect::<Vec<_>>(), Direction::Forward)
}

pub fn inverse_fourier_partial_i(f: &ComplexField) -> Result<ComplexField> {
    let m = phase_halves(f)?;
    transform_axes(f, &(0..m).collect::<Vec<_>>(), Direction::Inverse)
}

/// F_II: transform over the last m of 2m coordinates.
pub fn fourier_partial_ii(f: &ComplexField) -> Result<ComplexField> {
    let m = phase_halves(f)?;
    transform_axes(f, &(m..2 * m).collect::<Vec<_>>(), Direction::Forward)
}

pub fn inverse_fourier_partial_ii(f: &ComplexField) -> Result<ComplexField> {
    let m = phase_halves(f)?;
    transform_axes(f, &(m..2 * m).collect::<Vec<_>>(), Direction::Inverse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::Grid;

    fn line() -> SampledLine {
        SampledLine::midpoint(8.0, 128).unwrap()
    }

    fn ground(x: f64) -> f64 {
        PI.powf(-0.25) * (-0.5 * x * x).exp()
    }

    // Direct O(n²) quadrature of the defining integral.
    fn direct_ft(f: &ComplexField) -> Vec<Complex64> {
        let l = *f.grid().axis(0);
        let d = l.dual();
        (0..d.points())
            .map(|k| {
                let xi = d.x(k);
                (0..l.points())
                    .map(|j| f.data()[j] * Complex64::from_polar(1.0, -l.x(j) * xi))
                    .sum::<Complex64>()
                    * l.spacing()
                    / (2.0 * PI).sqrt()
            })
            .collect()
    }

    #[test]
    fn ground_state_is_its_own_transform() {
        let g = Grid::position(line(), 1).unwrap();
        let f = ComplexField::from_real_fn(g, |x| ground(x[0]));
        let ff = fourier_continuous(&f).unwrap();
        let oracle = direct_ft(&f);
        for (k, v) in ff.data().iter().enumerate() {
            let xi = ff.grid().axis(0).x(k);
            assert!((v - Complex64::new(ground(xi), 0.0)).norm() < 1e-8);
            assert!((v - oracle[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn odd_line_matches_direct_sum() {
        let l = SampledLine::with_spacing(0.3, 37).unwrap();
        let f = ComplexField::from_fn(Grid::position(l, 1).unwrap(), |x| {
            Complex64::new(x[0].cos(), x[0]) * (-x[0] * x[0] / 3.0).exp()
        });
        let ff = fourier_continuous(&f).unwrap();
        let oracle = direct_ft(&f);
        for (a, b) in ff.data().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_maps_to_zero_and_inverse_recovers() {
        let g = Grid::phase(SampledLine::midpoint(5.0, 16).unwrap(), 1).unwrap();
        let z = ComplexField::zeros(g.clone());
        assert!(fourier_continuous(&z).unwrap().max_abs() == 0.0);
        let f = ComplexField::from_fn(g, |x| Complex64::new(x[0].sin(), x[1] * x[0]));
        let back = inverse_fourier_continuous(&fourier_continuous(&f).unwrap()).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-12);
        assert!(back.grid().same_as(f.grid()));
    }

    #[test]
    fn partial_transform_of_gaussian() {
        let g = Grid::phase(line(), 1).unwrap();
        let f = ComplexField::from_real_fn(g, |z| (-(z[0] * z[0] + z[1] * z[1]) / 2.0).exp());
        let fi = fourier_partial_i(&f).unwrap();
        let oracle = ComplexField::from_real_fn(fi.grid().clone(), |z| {
            (-(z[0] * z[0] + z[1] * z[1]) / 2.0).exp()
        });
        assert!(fi.max_abs_diff(&oracle) < 1e-8);
        assert!(fi.grid().axis(1).same_as(&line()));
        let back = inverse_fourier_partial_i(&fi).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-10);
        let fii = fourier_partial_ii(&f).unwrap();
        assert!(fii.grid().axis(0).same_as(&line()));
        assert!(inverse_fourier_partial_ii(&fii).unwrap().max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn partial_transform_is_separable() {
        let g = Grid::phase(SampledLine::midpoint(6.0, 32).unwrap(), 1).unwrap();
        let a = |x: f64| Complex64::new((-x * x).exp(), x * (-x * x).exp());
        let b = |y: f64| Complex64::new(1.0 / (1.0 + y * y), 0.0);
        let f = ComplexField::from_fn(g.clone(), |z| a(z[0]) * b(z[1]));
        let fi = fourier_partial_i(&f).unwrap();
        let line_grid = Grid::position(*g.axis(0), 1).unwrap();
        let fa = fourier_continuous(&ComplexField::from_fn(line_grid, |x| a(x[0]))).unwrap();
        for k in 0..fi.len() {
            let idx = fi.grid().multi_index(k);
            let want = fa.data()[idx[0]] * b(g.axis(1).x(idx[1]));
            assert!((fi.data()[k] - want).norm() < 1e-10);
        }
    }
}
