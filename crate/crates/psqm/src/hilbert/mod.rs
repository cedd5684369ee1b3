//! States, dense operators and their Schwartz kernels on a position grid.
//!
//! Conventions: ⟨φ,ψ⟩ = Σ dx^m φ̄_i ψ_i, (Aψ)_i = Σ_j A_ij ψ_j and SK(A)(x_i, y_j) = A_ij / dx^m,
//! so the quadrature form of ⟨φ, Aψ⟩ over the kernel is exact.

mod operators;
mod random;

use num_complex::Complex64;

use crate::error::{PsqmError, Result};
use crate::numerics::{check_m, ComplexField, Grid};

pub use operators::{
    hermite_basis, op_function_of, op_momentum, op_position, projector, spectral_family,
    spectrum_line, Canonical, HermitianFlag, OperatorKernel, OperatorMatrix,
};
pub use random::{random_hermitian, random_operator, random_psd, random_span_state, TEST_SPAN};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    field: ComplexField,
}

impl StateVector {
    pub fn from_field(field: ComplexField) -> Result<Self> {
        check_m(field.grid().dims())?;
        if field.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(PsqmError::InvalidArgument("state has non-finite samples".into()));
        }
        Ok(StateVector { field })
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        Self::from_field(ComplexField::from_fn(grid, f))
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn field(&self) -> &ComplexField {
        &self.field
    }

    pub fn values(&self) -> &[Complex64] {
        self.field.data()
    }

    pub fn m(&self) -> usize {
        self.grid().dims()
    }

    pub fn norm(&self) -> f64 {
        self.field.norm_l2()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(PsqmError::InvalidArgument("cannot normalise the zero state".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    /// ⟨self, other⟩, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.grid().ensure_same(other.grid())?;
        let s: Complex64 = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid().cell_volume())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        StateVector {
            field: self.field.scale(s),
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        Ok(StateVector {
            field: self.field.add(&other.field)?,
        })
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.field.max_abs_diff(&other.field)
    }
}
