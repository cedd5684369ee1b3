//! Grids, quadrature, Fourier and convolution conventions, coordinate pullbacks.

mod convolve;
mod field;
mod fourier;
mod grid;
mod pullback;

use std::f64::consts::PI;

pub use convolve::{convolve, WRAP_THRESHOLD};
pub use field::{laplacian_fd, quadrature, ComplexField};
pub use fourier::{
    fourier_continuous, fourier_partial_i, fourier_partial_ii, inverse_fourier_continuous,
    inverse_fourier_partial_i, inverse_fourier_partial_ii, transform_axes, transform_axis,
    Direction,
};
pub use grid::{Grid, PhaseGrid, SampledLine};
pub use pullback::{pullback_tau, pullback_tau_inv, pullback_xi, tau, tau_inv, Resampled};

pub(crate) use field::contract_axis;
pub(crate) use grid::check_m;

/// ω(x,y) = π^{-m} e^{-(|x|² + |y|²)} on a 2m-dimensional grid.
pub fn omega_weight(grid: &Grid) -> ComplexField {
    let m = grid.m() as i32;
    ComplexField::from_real_fn(grid.clone(), move |z| {
        PI.powi(-m) * (-z.iter().map(|v| v * v).sum::<f64>()).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_is_normalised_and_even() {
        let g = Grid::phase(SampledLine::midpoint(8.0, 128).unwrap(), 1).unwrap();
        let w = omega_weight(&g);
        assert!((w.quadrature().re - 1.0).abs() < 1e-10);
        assert_eq!(pullback_xi(&w).unwrap(), w);
        let odd = Grid::phase(SampledLine::centered(3.0, 7).unwrap(), 1).unwrap();
        assert_eq!(omega_weight(&odd).at(&[3, 3]).re, 1.0 / PI);
    }
}
