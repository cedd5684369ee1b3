//! Cutoff families and the dual pairing functionals S_φψN.
//!
//! S_φψN = F⁻¹[h_N e^{|ζ|²/4} F(W(ψ,φ))]. This is the Fourier-side form of the convolution
//! (2π)^{-m/2} F(h_N e^{|·|²/4}) ⋆ W(ψ,φ); ⟨A⟩ is W-space smoothing by the Gaussian with
//! multiplier e^{-|ζ|²/4}, so ∫ S_φψN ⟨A⟩ tends to ⟨φ, Aψ⟩ as N grows.

mod cutoff;

use log::warn;
use num_complex::Complex64;

use crate::error::{PsqmError, Result};
use crate::hilbert::StateVector;
use crate::numerics::{
    fourier_continuous, inverse_fourier_continuous, convolve, ComplexField, Grid, SampledLine,
};
use crate::transforms::{husimi_on, wigner_grid_on, wigner_on, PhaseFunction};

pub use cutoff::{make_cutoff, smooth_step, CutoffFamily, CutoffTransform};

/// The N ladder used for limit statements.
pub const N_LADDER: [usize; 3] = [4, 6, 8];

/// Largest exponent that still fits an f64.
const EXP_LIMIT: f64 = 709.0;

/// A sampled multiplier S_φψN on the Wigner grid of the states.
#[derive(Clone, Debug)]
pub struct PairingFunctional {
    field: ComplexField,
    n: usize,
    labels: (String, String),
}

impl PairingFunctional {
    pub fn field(&self) -> &ComplexField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// (φ, ψ) labels.
    pub fn labels(&self) -> (&str, &str) {
        (&self.labels.0, &self.labels.1)
    }

    pub fn with_labels(mut self, phi: &str, psi: &str) -> Self {
        self.labels = (phi.to_string(), psi.to_string());
        self
    }
}

/// Multiplies the spectrum of `f` by h_N(ζ) e^{s|ζ|²} and transforms back.
fn windowed(f: &ComplexField, n: usize, s: f64) -> Result<ComplexField> {
    let family = CutoffFamily::new(n)?;
    let mut spec = fourier_continuous(f)?;
    let dual = spec.grid().clone();
    if let Some(a) = dual.axes().iter().find(|a| a.half_width() < family.radius()) {
        return Err(PsqmError::InvalidGrid(format!(
            "cutoff N={n} needs frequency half-width {}, grid has {}",
            family.radius(),
            a.half_width()
        )));
    }
    for (k, v) in spec.data_mut().iter_mut().enumerate() {
        let z = dual.coords_of(k);
        let h = family.value(&z);
        *v *= if h == 0.0 { 0.0 } else { h * (s * z.iter().map(|x| x * x).sum::<f64>()).exp() };
    }
    inverse_fourier_continuous(&spec)?.with_grid(f.grid().clone())
}

/// Grid carrying S_φψN: q at integer multiples of dx (n+1 points) and the Wigner p lines.
/// Both line counts are odd, so the Fourier grid holds ζ = 0 and a constant G pairs exactly.
pub fn pairing_grid(position: &Grid) -> Result<Grid> {
    let q = position
        .axes()
        .iter()
        .map(|a| SampledLine::with_spacing(a.spacing(), a.points() + 1 - a.points() % 2))
        .collect::<Result<Vec<_>>>()?;
    wigner_grid_on(position, &Grid::new(q)?)
}

fn q_part(grid: &Grid) -> Result<Grid> {
    Grid::new(grid.axes()[..grid.dims() / 2].to_vec())
}

/// S_φψN with S_φψN(⟨A⟩) → ⟨φ, Aψ⟩, sampled on `pairing_grid`.
pub fn pairing_multiplier(phi: &StateVector, psi: &StateVector, n: usize) -> Result<PairingFunctional> {
    let dims = 2 * psi.m();
    let growth = 0.25 * dims as f64 * (n as f64 + 1.0).powi(2);
    if growth > EXP_LIMIT {
        warn!("e^(|ζ|²/4) reaches e^{growth:.0} inside the support of h_{n}; values will overflow");
    }
    let grid = pairing_grid(psi.grid())?;
    let w = wigner_on(psi, phi, &q_part(&grid)?)?;
    Ok(PairingFunctional {
        field: windowed(w.field(), n, 0.25)?,
        n,
        labels: ("phi".into(), "psi".into()),
    })
}

/// ∫ S · G dλ.
pub fn pair(s: &PairingFunctional, g: &PhaseFunction) -> Result<Complex64> {
    Ok(s.field.mul(g.field())?.quadrature())
}

/// Deviations of W(ψ,φ) = 2^m e^{-|·|²} ⋆ S_φψN and H(ψ,φ) = e^{-|·|²/2} ⋆ S_φψN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SRelations {
    pub n: usize,
    pub wigner_deviation: f64,
    pub husimi_deviation: f64,
}

pub fn s_relations_check(phi: &StateVector, psi: &StateVector, n: usize) -> Result<SRelations> {
    let s = pairing_multiplier(phi, psi, n)?;
    let m = psi.m() as i32;
    let grid = s.grid().clone();
    let r2 = |z: &[f64]| z.iter().map(|v| v * v).sum::<f64>();
    let g1 = ComplexField::from_real_fn(grid.clone(), |z| 2f64.powi(m) * (-r2(z)).exp());
    let g2 = ComplexField::from_real_fn(grid.clone(), |z| (-0.5 * r2(z)).exp());
    let q = q_part(&grid)?;
    let w = wigner_on(psi, phi, &q)?;
    let h = husimi_on(psi, phi, &q)?;
    Ok(SRelations {
        n,
        wigner_deviation: convolve(&g1, s.field())?.max_abs_diff(w.field()),
        husimi_deviation: convolve(&g2, s.field())?.max_abs_diff(h.field()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{make_coherent, CoherentLabel};
    use crate::hilbert::{hermite_basis, projector, OperatorMatrix};
    use crate::numerics::SampledLine;
    use crate::transforms::expect_kernel_route;

    fn pos() -> Grid {
        Grid::position(SampledLine::midpoint(8.0, 128).unwrap(), 1).unwrap()
    }

    #[test]
    fn identity_pairs_to_inner_product() {
        let g = pos();
        let th = make_coherent(&g, &CoherentLabel::origin(1)).unwrap();
        let th2 = make_coherent(&g, &CoherentLabel::new(vec![2.0], vec![0.0]).unwrap()).unwrap();
        let one = PhaseFunction::synthetic(&pairing_grid(&g).unwrap(), |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let s = pairing_multiplier(&th, &th, 6).unwrap();
        assert!((pair(&s, &one).unwrap() - 1.0).norm() < 1e-3);
        // A = E_θ, φ = θ, ψ = θ_{2,0}: ⟨θ, E_θ θ_{2,0}⟩ = ⟨θ, θ_{2,0}⟩, of modulus e^{-|w|²/4}
        let e = expect_kernel_route(&projector(&th).unwrap(), &pairing_grid(&g).unwrap()).unwrap();
        let s = pairing_multiplier(&th, &th2, 6).unwrap();
        let want = th.inner(&th2).unwrap();
        assert!((want.norm() - (-1f64).exp()).abs() < 1e-10);
        assert!((pair(&s, &e).unwrap() - want).norm() < 1e-3);
    }

    #[test]
    fn conjugate_symmetry_and_sesquilinearity() {
        let g = pos();
        let hs = hermite_basis(&g, 2).unwrap();
        let a = pairing_multiplier(&hs[0], &hs[1], 4).unwrap();
        let b = pairing_multiplier(&hs[1], &hs[0], 4).unwrap();
        let scale = a.field().max_abs();
        assert!(a.field().conj().max_abs_diff(b.field()) < 1e-12 * scale);
        let (al, be) = (Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.4));
        let c = pairing_multiplier(&hs[0].scale(al), &hs[1].scale(be), 4).unwrap();
        let want = a.field().scale(al.conj() * be);
        assert!(c.field().max_abs_diff(&want) < 1e-12 * scale);
        let d = pairing_multiplier(&hs[1], &hs[1], 4).unwrap();
        assert!(d.field().max_imag() < 1e-10 * d.field().max_abs());
    }

    #[test]
    fn pairing_error_shrinks_with_n() {
        let g = pos();
        let hs = hermite_basis(&g, 3).unwrap();
        let a = projector(&hs[2]).unwrap().add(&OperatorMatrix::identity(g.clone())).unwrap();
        let e = expect_kernel_route(&a, &pairing_grid(&g).unwrap()).unwrap();
        let want = a.matrix_element(&hs[0], &hs[2]).unwrap();
        let errs: Vec<f64> = N_LADDER
            .iter()
            .map(|&n| (pair(&pairing_multiplier(&hs[0], &hs[2], n).unwrap(), &e).unwrap() - want).norm())
            .collect();
        assert!(errs[2] < 1e-2, "{errs:?}");
        assert!(errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12), "{errs:?}");
    }

    #[test]
    fn relations_hold_at_top_of_ladder() {
        let g = pos();
        let th = make_coherent(&g, &CoherentLabel::origin(1)).unwrap();
        let r = s_relations_check(&th, &th, 8).unwrap();
        assert!(r.wigner_deviation < 1e-3 && r.husimi_deviation < 1e-3, "{r:?}");
    }
}
