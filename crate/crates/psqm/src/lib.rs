//! Phase-space quantum mechanics on sampled grids.
//!
//! The central object is the coherent-state expectation transform
//! ⟨A⟩(q,p) = ⟨θ_qp, A θ_qp⟩, computed directly or through the Schwartz kernel, inverted by
//! regularised Gaussian deconvolution, and paired against the dual functionals S_φψ.

pub mod coherent;
pub mod duality;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod numerics;
pub mod star;
pub mod transforms;
pub mod verify;

pub use error::{PsqmError, Result};
pub use num_complex::Complex64;
