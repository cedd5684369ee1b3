//! Regularised inverse of the expectation transform and Weyl quantisation.
//!
//! γ has Fourier multiplier (2π)^{-m} e^{-|ζ|²/4} after the swap Ξ, so its inverse grows like
//! e^{|ζ|²/4}. We truncate with the radial window s(N+1-|ζ|) and refuse to run when the largest
//! multiplier reachable on the grid exceeds AMPLIFICATION_LIMIT.

use std::f64::consts::PI;

use log::info;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::PhaseFunction;
use crate::duality::CutoffFamily;
use crate::error::{PsqmError, Result};
use crate::hilbert::OperatorMatrix;
use crate::numerics::{
    fourier_continuous, inverse_fourier_continuous, pullback_xi, transform_axes, ComplexField,
    Direction, Grid, SampledLine,
};

pub const AMPLIFICATION_LIMIT: f64 = 1e12;
/// Extra q range beyond the position box on inversion grids. The q axis is periodic for the
/// deconvolution, so symbols that do not decay (⟨I⟩, ⟨Q⟩) need the images of the box edge
/// far enough away that e^{-margin²} is below the noise the window lets through.
pub const DEFAULT_MARGIN: f64 = 8.0;

const MAX_CUTOFF: usize = 40;

/// Calls `f(r)` for every point of the grid within radius `rmax` of the origin.
fn radii_within<F: FnMut(f64)>(grid: &Grid, rmax: f64, mut f: F) {
    let coords: Vec<Vec<f64>> = grid.axes().iter().map(|a| a.coords()).collect();
    fn walk<F: FnMut(f64)>(coords: &[Vec<f64>], k: usize, r2: f64, budget: f64, f: &mut F) {
        if k == coords.len() {
            f(r2.sqrt());
            return;
        }
        for &x in &coords[k] {
            let s = r2 + x * x;
            if s <= budget {
                walk(coords, k + 1, s, budget, f);
            }
        }
    }
    walk(&coords, 0, 0.0, rmax * rmax, &mut f);
}

fn window_gain(family: &CutoffFamily, r: f64) -> f64 {
    family.radial(&[r]) * (0.25 * r * r).exp()
}

/// Largest value of s(N+1-|ζ|) e^{|ζ|²/4} on the Fourier dual of `grid`.
pub fn amplification(grid: &Grid, n: usize) -> f64 {
    let family = CutoffFamily { n };
    let mut best: f64 = 0.0;
    radii_within(&grid.dual(), family.radius(), |r| best = best.max(window_gain(&family, r)));
    best
}

/// Largest N whose amplification on `grid` stays below AMPLIFICATION_LIMIT.
pub fn default_cutoff(grid: &Grid) -> usize {
    let mut amp = vec![0.0f64; MAX_CUTOFF + 1];
    let families: Vec<CutoffFamily> = (0..=MAX_CUTOFF).map(|n| CutoffFamily { n }).collect();
    radii_within(&grid.dual(), MAX_CUTOFF as f64 + 1.0, |r| {
        for f in families.iter().skip(1).filter(|f| r < f.radius()) {
            amp[f.n] = amp[f.n].max(window_gain(f, r));
        }
    });
    let n = (1..=MAX_CUTOFF)
        .take_while(|&n| amp[n] <= AMPLIFICATION_LIMIT)
        .last()
        .unwrap_or(1);
    info!("default cutoff N={n} (amplification {:.3e})", amp[n]);
    n
}

/// T with γ(T) ≈ G: T = F⁻¹[(2π)^m s(N+1-|ζ|) e^{|ζ|²/4} F(G∘Ξ)], on the swapped grid.
pub fn gamma_inverse(g: &PhaseFunction, n: usize) -> Result<ComplexField> {
    let amp = amplification(g.grid(), n);
    if amp > AMPLIFICATION_LIMIT {
        return Err(PsqmError::IllPosed {
            amplification: amp,
            limit: AMPLIFICATION_LIMIT,
        });
    }
    let family = CutoffFamily::new(n)?;
    let m = g.m() as i32;
    let swapped = pullback_xi(g.field())?;
    let mut spectrum = fourier_continuous(&swapped)?;
    let scale = (2.0 * PI).powi(m);
    let dual = spectrum.grid().clone();
    for (k, v) in spectrum.data_mut().iter_mut().enumerate() {
        let r = dual.coords_of(k).iter().map(|x| x * x).sum::<f64>().sqrt();
        *v *= scale * window_gain(&family, r);
    }
    inverse_fourier_continuous(&spectrum)?.with_grid(swapped.grid().clone())
}

fn check_inversion_grid(phase: &Grid, position: &Grid) -> Result<()> {
    let m = position.dims();
    if phase.dims() != 2 * m {
        return Err(PsqmError::DimensionMismatch {
            expected: 2 * m,
            got: phase.dims(),
        });
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
    for k in 0..m {
        let (x, q, p) = (position.axis(k), phase.axis(k), phase.axis(m + k));
        let np = 2 * x.points() - 1;
        let ok = q.points() % 2 == 1
            && q.points() >= np
            && close(q.spacing(), 0.5 * x.spacing())
            && p.points() == np
            && close(p.spacing(), 2.0 * PI / (np as f64 * x.spacing()));
        if !ok {
            return Err(PsqmError::GridMismatch(format!(
                "{} is not an inversion grid for {}",
                phase.describe(),
                position.describe()
            )));
        }
    }
    Ok(())
}

/// The position grid an inversion grid was built for.
pub fn inversion_position(phase: &Grid) -> Result<Grid> {
    let m = phase.dims() / 2;
    let axes = (0..m)
        .map(|k| {
            let np = phase.axis(m + k).points();
            SampledLine::with_spacing(2.0 * phase.axis(k).spacing(), np.div_ceil(2))
        })
        .collect::<Result<Vec<_>>>()?;
    let position = Grid::new(axes)?;
    check_inversion_grid(phase, &position)?;
    Ok(position)
}

/// Reads A_ij = scale · K(t = x_i - x_j, b = (x_i + x_j)/2) from a field with t axes at
/// `t_off` and b axes at `b_off`, both on the lattices of an inversion grid.
fn lattice_matrix(k: &ComplexField, t_off: usize, b_off: usize, position: &Grid, scale: f64) -> Result<OperatorMatrix> {
    let m = position.dims();
    let n = position.len();
    let g = k.grid();
    let mut idx = vec![0; 2 * m];
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        let ii = position.multi_index(i);
        for j in 0..n {
            let jj = position.multi_index(j);
            for a in 0..m {
                let na = position.axis(a).points();
                let c = (g.axis(b_off + a).points() - 1) / 2;
                idx[t_off + a] = ii[a] + na - 1 - jj[a];
                idx[b_off + a] = c + ii[a] + jj[a] - (na - 1);
            }
            entries[(i, j)] = k.at(&idx) * scale;
        }
    }
    OperatorMatrix::detect(position.clone(), entries)
}

/// A_N(G): the operator whose expectation reproduces G up to the cutoff N. G must live on
/// `Grid::inversion(position, m, margin)`.
pub fn inverse_transform(g: &PhaseFunction, position: &Grid, n: usize) -> Result<OperatorMatrix> {
    check_inversion_grid(g.grid(), position)?;
    let m = position.dims();
    let t = gamma_inverse(g, n)?;
    let kernel = transform_axes(&t, &(0..m).collect::<Vec<_>>(), Direction::Inverse)?;
    let scale = (2.0 * PI).powf(-1.5 * m as f64) * position.cell_volume();
    lattice_matrix(&kernel, 0, m, position, scale)
}

/// Weyl quantisation: SK(A)(b + t/2, b - t/2) = (2π)^{-m/2} [F_II⁻¹ a](b, t), with the symbol
/// on an inversion grid.
pub fn weyl_quantize(a: &PhaseFunction, position: &Grid) -> Result<OperatorMatrix> {
    check_inversion_grid(a.grid(), position)?;
    let m = position.dims();
    let kernel = transform_axes(a.field(), &(m..2 * m).collect::<Vec<_>>(), Direction::Inverse)?;
    let scale = (2.0 * PI).powf(-0.5 * m as f64) * position.cell_volume();
    lattice_matrix(&kernel, m, 0, position, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{hermite_basis, op_position, projector, random_hermitian};
    use crate::transforms::expect_kernel_route;

    fn line() -> SampledLine {
        SampledLine::midpoint(8.0, 128).unwrap()
    }

    fn setup() -> (Grid, Grid) {
        let pos = Grid::position(line(), 1).unwrap();
        (pos, Grid::inversion(&line(), 1, DEFAULT_MARGIN).unwrap())
    }

    #[test]
    fn amplification_grows_and_alarms() {
        let (_, inv) = setup();
        assert!(amplification(&inv, 4) < amplification(&inv, 6));
        assert!(amplification(&inv, 4) <= (6.25f64).exp());
        let n = default_cutoff(&inv);
        assert!(amplification(&inv, n) <= AMPLIFICATION_LIMIT);
        assert!(amplification(&inv, n + 1) > AMPLIFICATION_LIMIT);
        let g = PhaseFunction::synthetic(&inv, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(gamma_inverse(&g, n + 1), Err(PsqmError::IllPosed { .. })));
    }

    #[test]
    fn round_trip_of_random_hermitian() {
        let (pos, inv) = setup();
        let n = default_cutoff(&inv);
        for seed in [1, 2] {
            let a = random_hermitian(&pos, seed, 3).unwrap();
            let g = expect_kernel_route(&a, &inv).unwrap();
            let back = inverse_transform(&g, &pos, n).unwrap();
            let err = back.relative_frobenius_error(&a);
            assert!(err < 1e-3, "N={n} err={err}");
        }
    }

    #[test]
    fn round_trip_of_projector() {
        let (pos, inv) = setup();
        let h = hermite_basis(&pos, 3).unwrap().remove(2);
        let a = projector(&h).unwrap();
        let g = expect_kernel_route(&a, &inv).unwrap();
        let back = inverse_transform(&g, &pos, default_cutoff(&inv)).unwrap();
        assert!(back.relative_frobenius_error(&a) < 1e-3);
    }

    #[test]
    fn weyl_of_constant_and_coordinates() {
        let (pos, inv) = setup();
        let one = PhaseFunction::synthetic(&inv, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let id = weyl_quantize(&one, &pos).unwrap();
        assert!(id.max_abs_diff(&OperatorMatrix::identity(pos.clone())) < 1e-12);
        let q = PhaseFunction::synthetic(&inv, |q, _| Complex64::new(q[0], 0.0)).unwrap();
        assert!(weyl_quantize(&q, &pos).unwrap().max_abs_diff(&op_position(&pos, 0).unwrap()) < 1e-12);
    }

    #[test]
    fn recovers_position_grid() {
        let (pos, inv) = setup();
        assert!(inversion_position(&inv).unwrap().same_as(&pos));
        assert!(inversion_position(&Grid::phase(line(), 1).unwrap()).is_err());
    }

    #[test]
    fn rejects_foreign_grid() {
        let (pos, _) = setup();
        let g = PhaseFunction::synthetic(&Grid::phase(line(), 1).unwrap(), |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!(inverse_transform(&g, &pos, 4).is_err());
        assert!(weyl_quantize(&g, &pos).is_err());
    }
}
