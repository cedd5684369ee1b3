//! Coordinate pullbacks on phase grids: τ(x,y) = (y + x/2, y - x/2), its inverse
//! τ⁻¹(u,v) = (u - v, (u+v)/2), and the swap Ξ(x,y) = (y,x).

use num_complex::Complex64;
use rayon::prelude::*;

use super::field::ComplexField;
use super::grid::SampledLine;
use crate::error::{PsqmError, Result};

/// Stencil width of the local Lagrange interpolant used for off-lattice samples.
pub const STENCIL: usize = 10;

#[derive(Clone, Debug)]
pub struct Resampled {
    pub field: ComplexField,
    /// Number of target samples that fell outside the grid and were set to zero.
    pub clipped: usize,
}

pub fn tau(x: f64, y: f64) -> (f64, f64) {
    (y + 0.5 * x, y - 0.5 * x)
}

pub fn tau_inv(u: f64, v: f64) -> (f64, f64) {
    (u - v, 0.5 * (u + v))
}

/// F∘Ξ: exact exchange of the two coordinate blocks.
pub fn pullback_xi(f: &ComplexField) -> Result<ComplexField> {
    let grid = f.grid();
    if !grid.dims().is_multiple_of(2) {
        return Err(PsqmError::DimensionMismatch {
            expected: grid.dims() + 1,
            got: grid.dims(),
        });
    }
    let m = grid.m();
    let out_grid = grid.swapped();
    let data = (0..out_grid.len())
        .map(|k| {
            let idx = out_grid.multi_index(k);
            let mut src = idx[m..].to_vec();
            src.extend_from_slice(&idx[..m]);
            f.at(&src)
        })
        .collect();
    ComplexField::from_vec(out_grid, data)
}

pub fn pullback_tau(f: &ComplexField) -> Result<Resampled> {
    pullback_pairwise(f, tau)
}

pub fn pullback_tau_inv(f: &ComplexField) -> Result<Resampled> {
    pullback_pairwise(f, tau_inv)
}

/// Weights of the local Lagrange interpolant at `x`, or None outside [-L, L].
pub(crate) fn lagrange_weights(line: &SampledLine, x: f64) -> Option<(usize, Vec<f64>)> {
    if !line.contains(x) {
        return None;
    }
    let n = line.points();
    let s = line.position(x);
    let r = s.round();
    if (s - r).abs() < 1e-12 {
        let j = (r.max(0.0) as usize).min(n - 1);
        return Some((j, vec![1.0]));
    }
    let width = STENCIL.min(n);
    let lo = (s.floor() as isize - (width as isize / 2 - 1)).clamp(0, (n - width) as isize) as usize;
    // barycentric weights for equispaced nodes: (-1)^k C(width-1, k)
    let mut binom = 1.0;
    let mut num = Vec::with_capacity(width);
    for k in 0..width {
        if k > 0 {
            binom *= (width - k) as f64 / k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        num.push(sign * binom / (s - (lo + k) as f64));
    }
    let total: f64 = num.iter().sum();
    Some((lo, num.into_iter().map(|w| w / total).collect()))
}

fn pullback_pairwise(f: &ComplexField, map: fn(f64, f64) -> (f64, f64)) -> Result<Resampled> {
    let grid = f.grid().clone();
    if !grid.dims().is_multiple_of(2) {
        return Err(PsqmError::DimensionMismatch {
            expected: grid.dims() + 1,
            got: grid.dims(),
        });
    }
    let m = grid.m();
    for k in 0..m {
        if !grid.axis(k).same_as(grid.axis(m + k)) {
            return Err(PsqmError::GridMismatch(
                "τ pullbacks need square phase grids".into(),
            ));
        }
    }
    let strides = grid.strides();
    let mut data = f.data().to_vec();
    let mut clipped = 0;
    for k in 0..m {
        let line = *grid.axis(k);
        let n = line.points();
        let (sa, sb) = (strides[k], strides[m + k]);
        // per target (i, j) in the pair plane: interpolation stencils for both coordinates
        let stencils: Vec<Option<((usize, Vec<f64>), (usize, Vec<f64>))>> = (0..n * n)
            .map(|ij| {
                let (u, v) = map(line.x(ij / n), line.x(ij % n));
                lagrange_weights(&line, u).zip(lagrange_weights(&line, v))
            })
            .collect();
        clipped += stencils.iter().filter(|s| s.is_none()).count() * grid.len() / (n * n);
        let bases: Vec<usize> = (0..grid.len())
            .filter(|&flat| {
                let idx = grid.multi_index(flat);
                idx[k] == 0 && idx[m + k] == 0
            })
            .collect();
        let src = data.clone();
        let planes: Vec<Vec<Complex64>> = bases
            .par_iter()
            .map(|&base| {
                stencils
                    .iter()
                    .map(|st| match st {
                        None => Complex64::new(0.0, 0.0),
                        Some(((ia, wa), (ib, wb))) => {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (a, &wa) in wa.iter().enumerate() {
                                let row = base + (ia + a) * sa;
                                let mut inner = Complex64::new(0.0, 0.0);
                                for (b, &wb) in wb.iter().enumerate() {
                                    inner += src[row + (ib + b) * sb] * wb;
                                }
                                acc += inner * wa;
                            }
                            acc
                        }
                    })
                    .collect()
            })
            .collect();
        for (base, plane) in bases.iter().zip(planes) {
            for (ij, v) in plane.into_iter().enumerate() {
                data[base + (ij / n) * sa + (ij % n) * sb] = v;
            }
        }
    }
    Ok(Resampled {
        field: ComplexField::from_vec(grid, data)?,
        clipped,
    })
}
