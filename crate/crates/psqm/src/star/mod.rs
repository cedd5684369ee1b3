//! The product × on phase space with ⟨AB⟩ = ⟨A⟩ × ⟨B⟩, and the bracket {H,G}.
//!
//! The operator route (invert, multiply matrices, transform back) is the reference; the
//! kernel route integrates against Ω_N ∗ e^{2iΔ} and exists to check it at m=1.

mod kernel_route;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::coherent::expect_direct;
use crate::duality::{CutoffFamily, CutoffTransform};
use crate::error::Result;
use crate::hilbert::OperatorMatrix;
use crate::numerics::Grid;
use crate::transforms::{expect_kernel_route, inverse_transform, inversion_position, PhaseFunction};

pub use kernel_route::{
    bracket_sin_kernel, star_kernel_route, star_kernel_route_printed, QuadSpec, CONVOLUTION_READING, KERNEL_DEFAULT_N,
};

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// det[[1, Re w, Im w], [1, Re w′, Im w′], [1, Re w″, Im w″]]: twice the signed area of the
/// triangle (w, w′, w″).
pub fn delta(w: Complex64, w1: Complex64, w2: Complex64) -> f64 {
    cross(w1, w2) - cross(w, w2) + cross(w, w1)
}

/// Ω_N and Δ at m=1 with the transform F(h_N e^{|·|²/4}) tabulated once.
#[derive(Clone, Debug)]
pub struct TripleKernel {
    transform: CutoffTransform,
}

impl TripleKernel {
    pub fn new(n: usize) -> Result<Self> {
        Ok(TripleKernel {
            transform: CutoffTransform::new(CutoffFamily::new(n)?),
        })
    }

    pub fn n(&self) -> usize {
        self.transform.family().n
    }

    pub fn delta(&self, w: Complex64, w1: Complex64, w2: Complex64) -> f64 {
        delta(w, w1, w2)
    }

    /// Ω_N(w,w′,w″) = (4/(2π²)) e^{-|w|²} F(h_N e^{|·|²/4})(w′) F(h_N e^{|·|²/4})(w″).
    pub fn omega(&self, w: Complex64, w1: Complex64, w2: Complex64) -> f64 {
        4.0 / (2.0 * PI * PI)
            * (-w.norm_sqr()).exp()
            * self.transform.eval_complex(&[w1])
            * self.transform.eval_complex(&[w2])
    }
}

pub fn omega_n_factor(w: Complex64, w1: Complex64, w2: Complex64, n: usize) -> Result<f64> {
    Ok(TripleKernel::new(n)?.omega(w, w1, w2))
}

/// ⟨·⟩⁻¹(G) ⟨·⟩⁻¹(H) for symbols on a common inversion grid.
pub fn product_operator(g: &PhaseFunction, h: &PhaseFunction, n: usize) -> Result<OperatorMatrix> {
    g.grid().ensure_same(h.grid())?;
    let position = inversion_position(g.grid())?;
    inverse_transform(g, &position, n)?.mul(&inverse_transform(h, &position, n)?)
}

/// G × H on the (inversion) grid of G, so the result can be multiplied again.
pub fn star_operator_route(g: &PhaseFunction, h: &PhaseFunction, n: usize) -> Result<PhaseFunction> {
    expect_kernel_route(&product_operator(g, h, n)?, g.grid())
}

/// G × H sampled on an arbitrary phase grid by the direct transform.
pub fn star_operator_route_on(g: &PhaseFunction, h: &PhaseFunction, n: usize, out: &Grid) -> Result<PhaseFunction> {
    expect_direct(&product_operator(g, h, n)?, out)
}

/// {H,G} = i(H×G - G×H) = ⟨i[A_H, A_G]⟩, on the grid of H.
pub fn bracket(h: &PhaseFunction, g: &PhaseFunction, n: usize) -> Result<PhaseFunction> {
    h.grid().ensure_same(g.grid())?;
    let position = inversion_position(h.grid())?;
    let a = inverse_transform(h, &position, n)?;
    let b = inverse_transform(g, &position, n)?;
    let c = a.commutator(&b)?.scale(Complex64::new(0.0, 1.0));
    expect_kernel_route(&c, h.grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{make_coherent, CoherentLabel};
    use crate::hilbert::{op_momentum, op_position, projector, random_operator};
    use crate::numerics::SampledLine;
    use crate::transforms::{default_cutoff, DEFAULT_MARGIN};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)), 1.0);
        assert_eq!(delta(c(0.3, 2.0), c(0.3, 2.0), c(-1.0, 0.5)), 0.0);
        let (w, w1, w2, s) = (c(0.2, -0.7), c(1.5, 0.4), c(-0.9, 2.2), c(3.1, -1.7));
        assert!((delta(w + s, w1 + s, w2 + s) - delta(w, w1, w2)).abs() < 1e-12);
        assert_eq!(delta(w1, w, w2), -delta(w, w1, w2));
        // determinant by cofactor expansion
        let m = nalgebra::Matrix3::new(1.0, w.re, w.im, 1.0, w1.re, w1.im, 1.0, w2.re, w2.im);
        assert!((m.determinant() - delta(w, w1, w2)).abs() < 1e-12);
    }

    #[test]
    fn omega_factorises() {
        let k = TripleKernel::new(4).unwrap();
        let (w, w1, w2, w3) = (c(0.4, 0.1), c(-0.3, 0.8), c(1.1, -0.2), c(0.5, 0.5));
        let r1 = k.omega(w, w1, w2) / k.omega(w, w1, w3);
        let r2 = k.omega(c(-1.0, 0.3), w1, w2) / k.omega(c(-1.0, 0.3), w1, w3);
        assert!((r1 - r2).abs() < 1e-12 * r1.abs());
        let ratio = k.omega(w * 2.0, w1, w2) / k.omega(w, w1, w2);
        assert!((ratio - (-3.0 * w.norm_sqr()).exp()).abs() < 1e-12);
        let fresh = CutoffTransform::new(CutoffFamily::new(4).unwrap());
        let want = 4.0 / (2.0 * PI * PI) * (-w.norm_sqr()).exp() * fresh.eval(&[w1.re, w1.im]) * fresh.eval(&[w2.re, w2.im]);
        assert!((omega_n_factor(w, w1, w2, 4).unwrap() - want).abs() < 1e-12 * want.abs());
    }

    fn setup() -> (Grid, Grid, usize) {
        let line = SampledLine::midpoint(8.0, 128).unwrap();
        let inv = Grid::inversion(&line, 1, DEFAULT_MARGIN).unwrap();
        let n = default_cutoff(&inv);
        (Grid::position(line, 1).unwrap(), inv, n)
    }

    #[test]
    fn identity_and_idempotent() {
        let (pos, inv, n) = setup();
        let one = expect_kernel_route(&OperatorMatrix::identity(pos.clone()), &inv).unwrap();
        let a = random_operator(&pos, 3, 2).unwrap();
        let ea = expect_kernel_route(&a, &inv).unwrap();
        let prod = star_operator_route(&one, &ea, n).unwrap();
        assert!(prod.max_abs_diff(&ea) < 1e-3 * ea.field().max_abs());
        let th = make_coherent(&pos, &CoherentLabel::origin(1)).unwrap();
        let e = expect_kernel_route(&projector(&th).unwrap(), &inv).unwrap();
        assert!(star_operator_route(&e, &e, n).unwrap().max_abs_diff(&e) < 1e-3);
    }

    #[test]
    fn canonical_commutator() {
        let (pos, inv, n) = setup();
        let q = expect_kernel_route(&op_position(&pos, 0).unwrap(), &inv).unwrap();
        let p = expect_kernel_route(&op_momentum(&pos, 0).unwrap(), &inv).unwrap();
        let out = Grid::phase(SampledLine::midpoint(3.0, 16).unwrap(), 1).unwrap();
        let qp = star_operator_route_on(&q, &p, n, &out).unwrap();
        let pq = star_operator_route_on(&p, &q, n, &out).unwrap();
        let diff = qp.field().sub(pq.field()).unwrap();
        // ⟨Q⟩×⟨P⟩ - ⟨P⟩×⟨Q⟩ = ⟨[Q,P]⟩ = i
        assert!(diff.data().iter().all(|z| (z - c(0.0, 1.0)).norm() < 1e-2));
        let inner = Grid::new(vec![inv.axis(0).subline(49).unwrap(), inv.axis(1).subline(21).unwrap()]).unwrap();
        let b = bracket(&q, &p, n).unwrap().restrict(&inner).unwrap();
        assert!(b.field().data().iter().all(|z| (z + 1.0).norm() < 1e-2));
    }

    #[test]
    fn bracket_is_antisymmetric() {
        let (pos, inv, n) = setup();
        let a = expect_kernel_route(&random_operator(&pos, 8, 2).unwrap(), &inv).unwrap();
        let b = expect_kernel_route(&random_operator(&pos, 9, 2).unwrap(), &inv).unwrap();
        let ab = bracket(&a, &b, n).unwrap();
        let ba = bracket(&b, &a, n).unwrap();
        assert!(ab.field().add(ba.field()).unwrap().max_abs() < 1e-10 * ab.field().max_abs());
        assert!(bracket(&a, &a, n).unwrap().field().max_abs() < 1e-10);
    }
}
