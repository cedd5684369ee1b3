//! Wigner and Husimi functions of state pairs.
//!
//! W(ψ,φ)(q,p) = (2π)^{-m} ∫ ψ(q + t/2) φ̄(q - t/2) e^{-i t·p} dt. States are zero-padded to
//! twice the box so ψ(q + x) stays inside for every q in the box. Shifts are Fourier ramps,
//! so q need not lie on the position lattice.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{PhaseFunction, Provenance};
use crate::error::{PsqmError, Result};
use crate::hilbert::StateVector;
use crate::numerics::{
    fourier_continuous, inverse_fourier_continuous, convolve, ComplexField, Grid, SampledLine,
};

fn padded_grid(position: &Grid) -> Result<Grid> {
    let axes = position
        .axes()
        .iter()
        .map(|a| SampledLine::with_spacing(a.spacing(), 2 * a.points()))
        .collect::<Result<Vec<_>>>()?;
    Grid::new(axes)
}

/// t = 2k dx for |k| ≤ n-1; an odd line, so its dual holds p = 0.
fn t_grid(position: &Grid) -> Result<Grid> {
    let axes = position
        .axes()
        .iter()
        .map(|a| SampledLine::with_spacing(2.0 * a.spacing(), 2 * a.points() - 1))
        .collect::<Result<Vec<_>>>()?;
    Grid::new(axes)
}

/// Phase grid with the given q lines and the p lines produced by `wigner_on`
/// (2n-1 points, spacing π/((2n-1)dx)).
pub fn wigner_grid_on(position: &Grid, q_grid: &Grid) -> Result<Grid> {
    let mut axes = q_grid.axes().to_vec();
    axes.extend_from_slice(t_grid(position)?.dual().axes());
    Grid::new(axes)
}

/// Output grid of `wigner`: q on the position lines.
pub fn wigner_grid(position: &Grid) -> Result<Grid> {
    wigner_grid_on(position, position)
}

fn pad(psi: &StateVector, padded: &Grid) -> Result<ComplexField> {
    let pos = psi.grid();
    let mut out = ComplexField::zeros(padded.clone());
    for (k, v) in psi.values().iter().enumerate() {
        let idx: Vec<usize> = pos
            .multi_index(k)
            .iter()
            .zip(pos.axes())
            .map(|(i, a)| i + a.points() / 2)
            .collect();
        let f = padded.flat_index(&idx);
        out.data_mut()[f] = *v;
    }
    Ok(out)
}

/// Samples of x ↦ f(x + s) on the padded grid.
fn shifted(spectrum: &ComplexField, padded: &Grid, s: &[f64]) -> Result<Vec<Complex64>> {
    let ramp = ComplexField::from_fn(spectrum.grid().clone(), |xi| {
        Complex64::from_polar(1.0, xi.iter().zip(s).map(|(a, b)| a * b).sum::<f64>())
    });
    Ok(inverse_fourier_continuous(&spectrum.mul(&ramp)?)?
        .with_grid(padded.clone())?
        .into_data())
}

/// W(ψ,φ) at the q points of `q_grid` (m axes, arbitrary) and the p lines of `wigner_grid_on`.
///
/// On the padded line x_j = (j - n + 1/2)dx, so ψ(· + q + dx/2) at x_j is ψ(q + (j-n+1)dx) and
/// φ(· + q - dx/2) at x_{2n-1-j} is φ(q - (j-n+1)dx): integer steps without interpolation.
pub fn wigner_on(psi: &StateVector, phi: &StateVector, q_grid: &Grid) -> Result<PhaseFunction> {
    let pos = psi.grid();
    pos.ensure_same(phi.grid())?;
    let m = pos.dims();
    if q_grid.dims() != m {
        return Err(PsqmError::DimensionMismatch {
            expected: m,
            got: q_grid.dims(),
        });
    }
    if let Some(a) = pos.axes().iter().find(|a| a.points() % 2 == 1) {
        return Err(PsqmError::InvalidGrid(format!("Wigner needs an even position line, got {} points", a.points())));
    }
    let padded = padded_grid(pos)?;
    let tg = t_grid(pos)?;
    let spec_psi = fourier_continuous(&pad(psi, &padded)?)?;
    let spec_phi = fourier_continuous(&pad(phi, &padded)?)?;
    let shape = padded.shape();
    // (index into ψ samples, index into φ samples) for every t sample
    let pairs: Vec<(usize, usize)> = (0..tg.len())
        .map(|k| {
            let j = tg.multi_index(k);
            let rev: Vec<usize> = j.iter().zip(&shape).map(|(i, n)| n - 1 - i).collect();
            (padded.flat_index(&j), padded.flat_index(&rev))
        })
        .collect();
    let half: Vec<f64> = pos.axes().iter().map(|a| 0.5 * a.spacing()).collect();
    let scale = (2.0 * PI).powf(-0.5 * m as f64);
    let rows = (0..q_grid.len())
        .into_par_iter()
        .map(|k| -> Result<Vec<Complex64>> {
            let q = q_grid.coords_of(k);
            let up: Vec<f64> = q.iter().zip(&half).map(|(a, h)| a + h).collect();
            let down: Vec<f64> = q.iter().zip(&half).map(|(a, h)| a - h).collect();
            let a = shifted(&spec_psi, &padded, &up)?;
            let b = shifted(&spec_phi, &padded, &down)?;
            let prod = pairs.iter().map(|&(i, j)| a[i] * b[j].conj()).collect();
            let w = fourier_continuous(&ComplexField::from_vec(tg.clone(), prod)?)?;
            Ok(w.into_data().into_iter().map(|v| v * scale).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let field = ComplexField::from_vec(wigner_grid_on(pos, q_grid)?, rows.concat())?;
    PhaseFunction::new(field, Provenance::Wigner)
}

/// W(ψ,φ) on `wigner_grid(ψ.grid())`.
pub fn wigner(psi: &StateVector, phi: &StateVector) -> Result<PhaseFunction> {
    wigner_on(psi, phi, psi.grid())
}

fn smooth(w: PhaseFunction) -> Result<PhaseFunction> {
    let m = w.m() as i32;
    let g = ComplexField::from_real_fn(w.grid().clone(), |z| (-z.iter().map(|v| v * v).sum::<f64>()).exp());
    let h = convolve(w.field(), &g)?.scale(Complex64::new(2f64.powi(m), 0.0));
    PhaseFunction::new(h, Provenance::Husimi)
}

/// H(ψ,φ) = 2^m W(ψ,φ) ∗ e^{-|z|²} at q points of `q_grid`.
pub fn husimi_on(psi: &StateVector, phi: &StateVector, q_grid: &Grid) -> Result<PhaseFunction> {
    smooth(wigner_on(psi, phi, q_grid)?)
}

pub fn husimi(psi: &StateVector, phi: &StateVector) -> Result<PhaseFunction> {
    smooth(wigner(psi, phi)?)
}
