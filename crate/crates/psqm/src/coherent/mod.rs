//! Fundamental states θ_qp, displacements U_w and the direct expectation transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{PsqmError, Result};
use crate::hilbert::{HermitianFlag, OperatorMatrix, StateVector};
use crate::numerics::{fourier_continuous, inverse_fourier_continuous, ComplexField, Grid};
use crate::transforms::{PhaseFunction, Provenance};

/// Phase-space point (q, p), identified with w = q + ip.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentLabel {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl CoherentLabel {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(PsqmError::DimensionMismatch {
                expected: q.len(),
                got: p.len(),
            });
        }
        Ok(CoherentLabel { q, p })
    }

    pub fn origin(m: usize) -> Self {
        CoherentLabel {
            q: vec![0.0; m],
            p: vec![0.0; m],
        }
    }

    pub fn from_w(w: &[Complex64]) -> Self {
        CoherentLabel {
            q: w.iter().map(|z| z.re).collect(),
            p: w.iter().map(|z| z.im).collect(),
        }
    }

    pub fn w(&self) -> Vec<Complex64> {
        self.q.iter().zip(&self.p).map(|(&q, &p)| Complex64::new(q, p)).collect()
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }
}

fn check_label(grid: &Grid, label: &CoherentLabel) -> Result<()> {
    if label.m() != grid.dims() {
        return Err(PsqmError::DimensionMismatch {
            expected: grid.dims(),
            got: label.m(),
        });
    }
    for k in 0..label.m() {
        let l = grid.axis(k).half_width();
        if label.q[k].abs() > l || label.p[k].abs() > l {
            return Err(PsqmError::OutOfGrid(format!(
                "coherent label q={:?} p={:?} outside [-{l}, {l}]",
                label.q, label.p
            )));
        }
    }
    Ok(())
}

/// θ_qp(x) = π^{-m/4} e^{i p·(x - q/2)} e^{-|x - q|²/2}.
pub fn make_coherent(grid: &Grid, label: &CoherentLabel) -> Result<StateVector> {
    check_label(grid, label)?;
    let m = label.m();
    let lab = label.clone();
    StateVector::from_fn(grid.clone(), move |x| {
        let mut phase = 0.0;
        let mut r2 = 0.0;
        for k in 0..m {
            phase += lab.p[k] * (x[k] - 0.5 * lab.q[k]);
            r2 += (x[k] - lab.q[k]).powi(2);
        }
        Complex64::from_polar(PI.powf(-0.25 * m as f64) * (-0.5 * r2).exp(), phase)
    })
}

#[derive(Clone, Debug)]
pub struct Displaced {
    pub state: StateVector,
    /// Squared norm carried across the grid boundary by the periodic shift.
    pub wrapped_mass: f64,
}

/// U_{q+ip}ψ(x) = e^{i p·(x - q/2)} ψ(x - q); the shift is a Fourier phase ramp.
pub fn displace(w: &[Complex64], psi: &StateVector) -> Result<Displaced> {
    let grid = psi.grid().clone();
    if w.len() != grid.dims() {
        return Err(PsqmError::DimensionMismatch {
            expected: grid.dims(),
            got: w.len(),
        });
    }
    let q: Vec<f64> = w.iter().map(|z| z.re).collect();
    let p: Vec<f64> = w.iter().map(|z| z.im).collect();
    let wrapped_mass = (0..grid.len())
        .filter(|&k| {
            grid.coords_of(k)
                .iter()
                .zip(grid.axes())
                .zip(&q)
                .any(|((x, a), s)| !a.contains(x + s))
        })
        .map(|k| psi.values()[k].norm_sqr())
        .sum::<f64>()
        * grid.cell_volume();
    let spectrum = fourier_continuous(psi.field())?;
    let ramp = ComplexField::from_fn(spectrum.grid().clone(), |xi| {
        Complex64::from_polar(1.0, -xi.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>())
    });
    let shifted = inverse_fourier_continuous(&spectrum.mul(&ramp)?)?.with_grid(grid.clone())?;
    let modulated = ComplexField::from_fn(grid.clone(), |x| {
        let ph: f64 = (0..x.len()).map(|k| p[k] * (x[k] - 0.5 * q[k])).sum();
        Complex64::from_polar(1.0, ph)
    });
    Ok(Displaced {
        state: StateVector::from_field(shifted.mul(&modulated)?)?,
        wrapped_mass,
    })
}

/// |⟨ψ, θ_qp⟩|².
pub fn overlap_squared(psi: &StateVector, label: &CoherentLabel) -> Result<f64> {
    let th = make_coherent(psi.grid(), label)?;
    Ok(psi.inner(&th)?.norm_sqr())
}

/// ⟨A⟩(q,p) = ⟨θ_qp, A θ_qp⟩ at a single point.
pub fn expect_at(a: &OperatorMatrix, label: &CoherentLabel) -> Result<Complex64> {
    let th = make_coherent(a.grid(), label)?;
    a.matrix_element(&th, &th)
}

/// Samples ⟨A⟩ over a phase grid (q axes first) by one quadratic form per point.
///
/// A is split as H + iK with H, K hermitian and both forms are taken as real numbers, so
/// ⟨A*⟩ is bitwise the conjugate of ⟨A⟩ and hermitian input gives real output.
pub fn expect_direct(a: &OperatorMatrix, grid: &Grid) -> Result<PhaseFunction> {
    let pos = a.grid();
    let m = pos.dims();
    if grid.dims() != 2 * m {
        return Err(PsqmError::DimensionMismatch {
            expected: 2 * m,
            got: grid.dims(),
        });
    }
    let (h, k) = a.hermitian_split();
    let k = if a.flag() == HermitianFlag::Hermitian { None } else { k };
    let n = pos.len();
    let vol = pos.cell_volume();
    let norm = PI.powf(-0.25 * m as f64);
    // per axis tables: Gaussian envelopes for each q sample, plane waves for each p sample
    let env: Vec<Vec<Vec<f64>>> = (0..m)
        .map(|ax| {
            let xs = pos.axis(ax).coords();
            grid.axis(ax)
                .coords()
                .iter()
                .map(|q| xs.iter().map(|x| (-0.5 * (x - q).powi(2)).exp()).collect())
                .collect()
        })
        .collect();
    let waves: Vec<Vec<Vec<Complex64>>> = (0..m)
        .map(|ax| {
            let xs = pos.axis(ax).coords();
            grid.axis(m + ax)
                .coords()
                .iter()
                .map(|p| xs.iter().map(|x| Complex64::from_polar(1.0, p * x)).collect())
                .collect()
        })
        .collect();
    // the global phase e^{-ip·q/2} of θ_qp cancels in the quadratic form
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let idx = grid.multi_index(flat);
            let theta: Vec<Complex64> = (0..n)
                .map(|j| {
                    let jx = pos.multi_index(j);
                    let mut v = Complex64::new(norm, 0.0);
                    for ax in 0..m {
                        v *= waves[ax][idx[m + ax]][jx[ax]] * env[ax][idx[ax]][jx[ax]];
                    }
                    v
                })
                .collect();
            let re = quadratic_form(&h, &theta).re * vol;
            let im = k.as_ref().map_or(0.0, |k| quadratic_form(k, &theta).re * vol);
            Complex64::new(re, im)
        })
        .collect();
    PhaseFunction::new(ComplexField::from_vec(grid.clone(), values)?, Provenance::Direct)
}

fn quadratic_form(a: &nalgebra::DMatrix<Complex64>, v: &[Complex64]) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (j, vj) in v.iter().enumerate() {
        let col = a.column(j);
        let mut s = Complex64::new(0.0, 0.0);
        for (aij, vi) in col.iter().zip(v) {
            s += vi.conj() * aij;
        }
        total += s * vj;
    }
    total
}
