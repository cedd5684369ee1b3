use log::warn;

use super::field::ComplexField;
use super::fourier::{fourier_continuous, inverse_fourier_continuous};
use crate::error::Result;

/// Relative mass in the outer 10% band above which periodic wrap-around is reported.
pub const WRAP_THRESHOLD: f64 = 1e-12;

/// (f∗g)(x) = (2π)^{-d/2} ∫ f(a) g(x-a) da, evaluated through the grid transform so that
/// F(f∗g) = F(f)·F(g) holds exactly on the grid.
pub fn convolve(f: &ComplexField, g: &ComplexField) -> Result<ComplexField> {
    f.grid().ensure_same(g.grid())?;
    for (name, h) in [("first", f), ("second", g)] {
        let edge = h.edge_mass();
        if edge > WRAP_THRESHOLD {
            warn!("convolution {name} factor has {edge:e} of its mass near the grid edge; result wraps around");
        }
    }
    let prod = fourier_continuous(f)?.mul(&fourier_continuous(g)?)?;
    let out = inverse_fourier_continuous(&prod)?;
    out.with_grid(f.grid().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::{Grid, SampledLine};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn gauss(grid: &Grid, c: f64, w: f64) -> ComplexField {
        ComplexField::from_real_fn(grid.clone(), move |x| (-(x[0] - c).powi(2) / w).exp())
    }

    #[test]
    fn convolution_theorem_and_commutativity() {
        let g = Grid::position(SampledLine::midpoint(8.0, 128).unwrap(), 1).unwrap();
        let (a, b) = (gauss(&g, 0.5, 1.0), gauss(&g, -1.0, 0.5));
        let c = convolve(&a, &b).unwrap();
        let lhs = fourier_continuous(&c).unwrap();
        let rhs = fourier_continuous(&a).unwrap().mul(&fourier_continuous(&b).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        assert!(c.max_abs_diff(&convolve(&b, &a).unwrap()) < 1e-12);
    }

    #[test]
    fn matches_quadrature_oracle() {
        // (2π)^{-1/2} ∫ e^{-(a-0.5)²} e^{-2(x-a+1)²} da by direct midpoint sum
        let g = Grid::position(SampledLine::midpoint(8.0, 128).unwrap(), 1).unwrap();
        let (a, b) = (gauss(&g, 0.5, 1.0), gauss(&g, -1.0, 0.5));
        let c = convolve(&a, &b).unwrap();
        let l = g.axis(0);
        for j in (0..128).step_by(7) {
            let x = l.x(j);
            let direct: f64 = (0..128)
                .map(|i| {
                    let s = l.x(i);
                    (-(s - 0.5f64).powi(2)).exp() * (-2.0 * (x - s + 1.0).powi(2)).exp()
                })
                .sum::<f64>()
                * l.spacing()
                / (2.0 * PI).sqrt();
            assert!((c.data()[j] - Complex64::new(direct, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn narrow_gaussian_acts_as_scaled_identity() {
        let g = Grid::position(SampledLine::midpoint(8.0, 256).unwrap(), 1).unwrap();
        let f = gauss(&g, 0.3, 2.0);
        let w = 0.01;
        let delta = gauss(&g, 0.0, w).scale(Complex64::new(1.0 / (PI * w).sqrt(), 0.0));
        let c = convolve(&f, &delta).unwrap();
        let want = f.scale(Complex64::new(1.0 / (2.0 * PI).sqrt(), 0.0));
        assert!(c.max_abs_diff(&want) < 3e-3);
    }
}
