//! ⟨A⟩(q,p) = (2π)^{3m/2} {ω ∗ F_I[SK(A)∘τ]}(p,q).
//!
//! The position grid pulls back under τ onto an exact lattice: x_i - x_j = (i-j)dx and
//! (x_i + x_j)/2 = x_0 + (i+j)dx/2. Only cells with i-j ≡ i+j (mod 2) are hit, so the
//! kernel enters the lattice with weight 2^m (the measure of the occupied half). F_I is then
//! an exact DFT along t, and the Gaussian smoothing is a separable direct sum evaluated at
//! the requested output points.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{PhaseFunction, Provenance};
use crate::error::{PsqmError, Result};
use crate::hilbert::OperatorMatrix;
use crate::numerics::{
    contract_axis, omega_weight, convolve, pullback_xi, transform_axes, ComplexField,
    Direction, Grid, SampledLine,
};

/// SK(A)∘τ on the (t, b) lattice, t spacing dx and b spacing dx/2, 2n-1 points each.
fn tau_lattice(a: &OperatorMatrix) -> Result<ComplexField> {
    let pos = a.grid();
    let m = pos.dims();
    let mut axes = Vec::with_capacity(2 * m);
    for k in 0..m {
        let l = pos.axis(k);
        axes.push(SampledLine::with_spacing(l.spacing(), 2 * l.points() - 1)?);
    }
    for k in 0..m {
        let l = pos.axis(k);
        axes.push(SampledLine::with_spacing(0.5 * l.spacing(), 2 * l.points() - 1)?);
    }
    let lattice = Grid::new(axes)?;
    let mut data = vec![Complex64::new(0.0, 0.0); lattice.len()];
    let weight = 2f64.powi(m as i32) / pos.cell_volume();
    let n = pos.len();
    let mut idx = vec![0; 2 * m];
    for i in 0..n {
        let ii = pos.multi_index(i);
        for j in 0..n {
            let jj = pos.multi_index(j);
            for k in 0..m {
                idx[k] = ii[k] + pos.axis(k).points() - 1 - jj[k];
                idx[m + k] = ii[k] + jj[k];
            }
            data[lattice.flat_index(&idx)] = a.entries()[(i, j)] * weight;
        }
    }
    ComplexField::from_vec(lattice, data)
}

fn gaussian_rows(out: &SampledLine, src: &SampledLine, period: Option<f64>, scale: f64) -> Vec<Vec<f64>> {
    let xs = src.coords();
    out.coords()
        .iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| {
                    let d = y - x;
                    let v = match period {
                        None => (-d * d).exp(),
                        Some(p) => {
                            let j0 = (d / p).round() as i64;
                            (j0 - 2..=j0 + 2).map(|j| (-(d - j as f64 * p).powi(2)).exp()).sum()
                        }
                    };
                    v * scale
                })
                .collect()
        })
        .collect()
}

/// Kernel-route evaluation of ⟨A⟩ at the points of `out` (q axes first).
pub fn expect_kernel_route(a: &OperatorMatrix, out: &Grid) -> Result<PhaseFunction> {
    let pos = a.grid();
    let m = pos.dims();
    if out.dims() != 2 * m {
        return Err(PsqmError::DimensionMismatch {
            expected: 2 * m,
            got: out.dims(),
        });
    }
    let lattice = tau_lattice(a)?;
    let axes_i: Vec<usize> = (0..m).collect();
    let mut s = transform_axes(&lattice, &axes_i, Direction::Forward)?;
    // (2π)^{3m/2} · ω∗ with the (2π)^{-m} convolution prefactor and π^{-m} of ω, per axis
    let per_axis = (2.0 * PI).sqrt() / PI;
    for k in 0..m {
        let b = *s.grid().axis(m + k);
        let rows = gaussian_rows(out.axis(k), &b, None, b.spacing());
        s = contract_axis(&s, m + k, &rows, *out.axis(k))?;
    }
    for k in 0..m {
        let u = *s.grid().axis(k);
        let period = u.points() as f64 * u.spacing();
        let rows = gaussian_rows(out.axis(m + k), &u, Some(period), u.spacing() * per_axis);
        s = contract_axis(&s, k, &rows, *out.axis(m + k))?;
    }
    let swapped = pullback_xi(&s)?.with_grid(out.clone())?;
    PhaseFunction::new(swapped, Provenance::KernelRoute)
}

/// γ(T) = (ω∗T)∘Ξ on the grid of T.
pub fn gamma_map(t: &ComplexField) -> Result<PhaseFunction> {
    let smoothed = convolve(&omega_weight(t.grid()), t)?;
    PhaseFunction::new(pullback_xi(&smoothed)?, Provenance::KernelRoute)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::expect_direct;
    use crate::hilbert::{hermite_basis, op_position, projector, random_hermitian};

    fn pos() -> Grid {
        Grid::position(SampledLine::midpoint(8.0, 128).unwrap(), 1).unwrap()
    }

    fn display() -> Grid {
        Grid::display(&SampledLine::midpoint(8.0, 128).unwrap(), 1).unwrap()
    }

    #[test]
    fn identity_maps_to_one() {
        let e = expect_kernel_route(&OperatorMatrix::identity(pos()), &display()).unwrap();
        assert!(e.field().data().iter().all(|z| (z - 1.0).norm() < 1e-6));
    }

    #[test]
    fn agrees_with_direct_route() {
        let g = pos();
        let th = hermite_basis(&g, 1).unwrap().remove(0);
        for a in [
            projector(&th).unwrap(),
            random_hermitian(&g, 11, 3).unwrap(),
            op_position(&g, 0).unwrap(),
        ] {
            let k = expect_kernel_route(&a, &display()).unwrap();
            let d = expect_direct(&a, &display()).unwrap();
            assert!(k.max_abs_diff(&d) < 1e-10, "{}", k.max_abs_diff(&d));
        }
    }

    #[test]
    fn arbitrary_output_points() {
        let g = pos();
        let a = random_hermitian(&g, 5, 2).unwrap();
        let out = Grid::new(vec![
            SampledLine::centered(3.3, 7).unwrap(),
            SampledLine::centered(20.0, 9).unwrap(),
        ])
        .unwrap();
        let k = expect_kernel_route(&a, &out).unwrap();
        let d = expect_direct(&a, &out).unwrap();
        assert!(k.max_abs_diff(&d) < 1e-10);
    }

    #[test]
    fn gamma_of_zero_and_symmetric_inputs() {
        let g = Grid::phase(SampledLine::midpoint(8.0, 64).unwrap(), 1).unwrap();
        assert_eq!(gamma_map(&ComplexField::zeros(g.clone())).unwrap().field().max_abs(), 0.0);
        let t = ComplexField::from_real_fn(g.clone(), |z| (-(z[0] * z[0] + z[1] * z[1]) / 3.0).exp());
        let direct = convolve(&omega_weight(&g), &t).unwrap();
        assert!(gamma_map(&t).unwrap().field().max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn gamma_of_offset_gaussian() {
        // T = (πs)^{-1} e^{-|z-c|²/s} gives (ω∗T)(z) = (2π)^{-1} (π(1+s))^{-1} e^{-|z-c|²/(1+s)}
        let g = Grid::phase(SampledLine::midpoint(8.0, 128).unwrap(), 1).unwrap();
        let (a, b, s) = (1.0, -0.5, 0.5);
        let t = ComplexField::from_real_fn(g.clone(), move |z| {
            (-((z[0] - a).powi(2) + (z[1] - b).powi(2)) / s).exp() / (PI * s)
        });
        let out = gamma_map(&t).unwrap();
        let want = ComplexField::from_real_fn(g, move |z| {
            (-((z[1] - a).powi(2) + (z[0] - b).powi(2)) / (1.0 + s)).exp() / (2.0 * PI * PI * (1.0 + s))
        });
        assert!(out.field().max_abs_diff(&want) < 1e-12);
    }
}
