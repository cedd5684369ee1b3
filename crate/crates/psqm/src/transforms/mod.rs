//! Kernel-route factorisation of ⟨·⟩, its regularised inverse, and the Wigner, Husimi and
//! Weyl bridges.

mod bridges;
mod inverse;
mod kernel_route;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PsqmError, Result};
use crate::numerics::{ComplexField, Grid};

pub use bridges::{husimi, husimi_on, wigner, wigner_grid, wigner_grid_on, wigner_on};
pub use inverse::{
    amplification, default_cutoff, gamma_inverse, inversion_position, inverse_transform,
    weyl_quantize,
    AMPLIFICATION_LIMIT, DEFAULT_MARGIN,
};
pub use kernel_route::{expect_kernel_route, gamma_map};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Direct,
    KernelRoute,
    Wigner,
    Husimi,
    WeylSymbol,
    Synthetic,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Direct => "direct",
            Provenance::KernelRoute => "kernel-route",
            Provenance::Wigner => "wigner",
            Provenance::Husimi => "husimi",
            Provenance::WeylSymbol => "weyl-symbol",
            Provenance::Synthetic => "synthetic",
        };
        f.write_str(s)
    }
}

impl FromStr for Provenance {
    type Err = PsqmError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "direct" => Provenance::Direct,
            "kernel-route" => Provenance::KernelRoute,
            "wigner" => Provenance::Wigner,
            "husimi" => Provenance::Husimi,
            "weyl-symbol" => Provenance::WeylSymbol,
            "synthetic" => Provenance::Synthetic,
            other => {
                return Err(PsqmError::InvalidArgument(format!("unknown provenance '{other}'")))
            }
        })
    }
}

/// A sampled function on phase space, q axes first.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFunction {
    field: ComplexField,
    provenance: Provenance,
}

impl PhaseFunction {
    pub fn new(field: ComplexField, provenance: Provenance) -> Result<Self> {
        let d = field.grid().dims();
        if d != 2 && d != 4 {
            return Err(PsqmError::UnsupportedDimension(d / 2));
        }
        Ok(PhaseFunction { field, provenance })
    }

    /// Samples a closure f(q, p) on a phase grid.
    pub fn synthetic<F>(grid: &Grid, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64]) -> num_complex::Complex64 + Sync,
    {
        let m = grid.m();
        Self::new(ComplexField::from_fn(grid.clone(), |z| f(&z[..m], &z[m..])), Provenance::Synthetic)
    }

    pub fn field(&self) -> &ComplexField {
        &self.field
    }

    pub fn into_field(self) -> ComplexField {
        self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn m(&self) -> usize {
        self.grid().m()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(self, provenance: Provenance) -> Self {
        PhaseFunction {
            field: self.field,
            provenance,
        }
    }

    pub fn max_abs_diff(&self, other: &PhaseFunction) -> f64 {
        self.field.max_abs_diff(&other.field)
    }

    pub fn restrict(&self, sub: &Grid) -> Result<Self> {
        Ok(PhaseFunction {
            field: self.field.restrict(sub)?,
            provenance: self.provenance,
        })
    }

    pub fn conj(&self) -> Self {
        PhaseFunction {
            field: self.field.conj(),
            provenance: self.provenance,
        }
    }

    pub fn linear_combination(
        &self,
        a: num_complex::Complex64,
        other: &PhaseFunction,
        b: num_complex::Complex64,
    ) -> Result<Self> {
        Ok(PhaseFunction {
            field: self.field.zip_with(&other.field, |x, y| a * x + b * y)?,
            provenance: Provenance::Synthetic,
        })
    }
}
