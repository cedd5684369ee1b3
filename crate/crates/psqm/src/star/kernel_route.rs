//! Kernel-route star product at m=1.
//!
//! Reading Ω_N ∗ e^{-2iΔ} as a convolution over all six real coordinates of (z, z′, z″), the
//! z′ and z″ integrals against G and H turn F(h_N e^{|·|²/4}) into the deconvolved symbols
//! Ĝ = F⁻¹[h_N e^{|ζ|²/4} F(G)], and
//!
//!   (G×H)(z) = π^{-3} ∫ dx e^{-|z-x|²} ∫∫ Ĝ(v′) Ĥ(v″) e^{-2iΔ(x,v′,v″)} dv′ dv″.
//!
//! With Δ(x,v′,v″) = v′×v″ + x×v′ - x×v″ the inner double integral factors through three
//! small matrix products per node x, so a GL rule of n nodes per axis costs O(n^5) overall.
//!
//! With θ_qp = π^{-1/4} e^{ip(x-q/2)} e^{-|x-q|²/2} the kernel e^{-2iΔ} reproduces ⟨BA⟩, not
//! ⟨AB⟩. The two differ only when the symbols do not commute, so E_θ×E_θ cannot tell them
//! apart. `star_kernel_route` therefore uses e^{+2iΔ}; the other orientation is kept as
//! `star_kernel_route_printed`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use log::debug;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duality::CutoffFamily;
use crate::error::{PsqmError, Result};
use crate::numerics::{fourier_continuous, ComplexField, Grid};
use crate::transforms::{PhaseFunction, Provenance};

/// How the convolution in Ω_N ∗ e^{-2iΔ} is read.
pub const CONVOLUTION_READING: &str = "joint convolution over (z, z', z'') in R^6";

/// Cutoff used by the kernel route unless told otherwise. The box window keeps e^{|ζ|²/4} up
/// to e^{(N+1)²/2} at its corners, which for N=6 still leaves roundoff near 1e-6.
pub const KERNEL_DEFAULT_N: usize = 6;

/// Tensor Gauss-Legendre rule on [-half_width, half_width] per real axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub nodes: usize,
    pub half_width: f64,
    /// Cap on triple-kernel evaluations.
    pub budget: u64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            nodes: 24,
            half_width: 4.0,
            budget: 1_000_000_000,
        }
    }
}

impl QuadSpec {
    fn rule(&self) -> Result<Vec<(f64, f64)>> {
        let n = NonZeroUsize::new(self.nodes)
            .ok_or_else(|| PsqmError::InvalidArgument("quadrature needs at least one node".into()))?;
        let a = self.half_width;
        Ok(GaussLegendre::new(n)
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (a * x, a * w))
            .collect())
    }

    /// Nominal evaluations: the (x, v′, v″) kernel plus the final Gaussian sum per output.
    pub fn cost(&self, outputs: usize) -> u64 {
        let n2 = (self.nodes * self.nodes) as u64;
        n2 * n2 * n2 + outputs as u64 * n2
    }
}

/// Ĝ sampled on the tensor nodes, weights folded in: out[(a, b)] = w_a w_b Ĝ(u_a + i u_b).
fn hat_on_nodes(g: &PhaseFunction, n: usize, rule: &[(f64, f64)]) -> Result<DMatrix<Complex64>> {
    if g.m() != 1 {
        return Err(PsqmError::UnsupportedDimension(g.m()));
    }
    let family = CutoffFamily::new(n)?;
    let spec: ComplexField = fourier_continuous(g.field())?;
    let dual = spec.grid().clone();
    let keep = |line: &crate::numerics::SampledLine| -> Vec<usize> {
        (0..line.points()).filter(|&k| line.x(k).abs() < family.radius()).collect()
    };
    let (kq, kp) = (keep(dual.axis(0)), keep(dual.axis(1)));
    if kq.len() == dual.axis(0).points() || kp.len() == dual.axis(1).points() {
        return Err(PsqmError::InvalidGrid(format!(
            "cutoff N={n} does not fit the frequency grid {}",
            dual.describe()
        )));
    }
    let scale = dual.cell_volume() / (2.0 * PI);
    // windowed spectrum on the kept block
    let block = DMatrix::from_fn(kq.len(), kp.len(), |i, j| {
        let z = [dual.axis(0).x(kq[i]), dual.axis(1).x(kp[j])];
        let h = family.value(&z);
        if h == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            spec.at(&[kq[i], kp[j]]) * (h * (0.25 * (z[0] * z[0] + z[1] * z[1])).exp() * scale)
        }
    });
    let waves = |ks: &[usize], axis: usize| {
        DMatrix::from_fn(rule.len(), ks.len(), |a, k| {
            Complex64::from_polar(rule[a].1, rule[a].0 * dual.axis(axis).x(ks[k]))
        })
    };
    let eq = waves(&kq, 0);
    let ep = waves(&kp, 1);
    Ok(&eq * block * ep.transpose())
}

/// M(x) = Σ A(v′) B(v″) e^{-2is v′×v″} for one node x, with the x-dependent phases applied.
fn inner(x: (f64, f64), g: &DMatrix<Complex64>, h: &DMatrix<Complex64>, u: &[f64], s: f64, ea: &DMatrix<Complex64>, eb: &DMatrix<Complex64>) -> Complex64 {
    let n = u.len();
    // x×v = x_re v_im - x_im v_re
    let a = DMatrix::from_fn(n, n, |i, j| g[(i, j)] * Complex64::from_polar(1.0, -2.0 * s * (x.0 * u[j] - x.1 * u[i])));
    let b = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * Complex64::from_polar(1.0, 2.0 * s * (x.0 * u[j] - x.1 * u[i])));
    // v′×v″ = u_a u_d - u_b u_c with v′ = (a, b), v″ = (c, d)
    let c = a.transpose() * ea; // (b, d)
    let d = c * b.transpose(); // (b, c)
    d.component_mul(eb).sum()
}

fn triple_integral(g: &PhaseFunction, h: &PhaseFunction, n: usize, quad: &QuadSpec, out: &Grid, sign: f64) -> Result<Vec<Complex64>> {
    if out.dims() != 2 {
        return Err(PsqmError::UnsupportedDimension(out.dims() / 2));
    }
    let needed = quad.cost(out.len());
    if needed > quad.budget {
        return Err(PsqmError::BudgetExceeded {
            needed,
            budget: quad.budget,
        });
    }
    let rule = quad.rule()?;
    let u: Vec<f64> = rule.iter().map(|r| r.0).collect();
    let gh = hat_on_nodes(g, n, &rule)?;
    let hh = hat_on_nodes(h, n, &rule)?;
    let k = u.len();
    let ea = DMatrix::from_fn(k, k, |a, d| Complex64::from_polar(1.0, -2.0 * sign * u[a] * u[d]));
    let eb = DMatrix::from_fn(k, k, |b, c| Complex64::from_polar(1.0, 2.0 * sign * u[b] * u[c]));
    let xs: Vec<(f64, f64, f64)> = rule
        .iter()
        .flat_map(|&(xr, wr)| rule.iter().map(move |&(xi, wi)| (xr, xi, wr * wi)))
        .collect();
    let m: Vec<Complex64> = xs
        .par_iter()
        .map(|&(xr, xi, w)| inner((xr, xi), &gh, &hh, &u, sign, &ea, &eb) * w)
        .collect();
    debug!("kernel route: {} x-nodes, {} outputs, {needed} evaluations", xs.len(), out.len());
    Ok((0..out.len())
        .into_par_iter()
        .map(|k| {
            let z = out.coords_of(k);
            xs.iter()
                .zip(&m)
                .map(|(&(xr, xi, _), mv)| mv * (-((z[0] - xr).powi(2) + (z[1] - xi).powi(2))).exp())
                .sum::<Complex64>()
                / PI.powi(3)
        })
        .collect())
}

/// G × H by direct quadrature of the Ω_N ∗ e^{2iΔ} integral, at the points of `out`.
pub fn star_kernel_route(g: &PhaseFunction, h: &PhaseFunction, n: usize, quad: &QuadSpec, out: &Grid) -> Result<PhaseFunction> {
    let values = triple_integral(g, h, n, quad, out, -1.0)?;
    PhaseFunction::new(ComplexField::from_vec(out.clone(), values)?, Provenance::Synthetic)
}

/// The same quadrature with the kernel Ω_N ∗ e^{-2iΔ}; equals H × G.
pub fn star_kernel_route_printed(g: &PhaseFunction, h: &PhaseFunction, n: usize, quad: &QuadSpec, out: &Grid) -> Result<PhaseFunction> {
    let values = triple_integral(g, h, n, quad, out, 1.0)?;
    PhaseFunction::new(ComplexField::from_vec(out.clone(), values)?, Provenance::Synthetic)
}

/// {H,G} = i(H×G - G×H) from the sin(2Δ) kernel: -(2/π³) ∫ e^{-|z-x|²} Ĥ(v′) Ĝ(v″) sin 2Δ(x,v′,v″).
pub fn bracket_sin_kernel(h: &PhaseFunction, g: &PhaseFunction, n: usize, quad: &QuadSpec, out: &Grid) -> Result<PhaseFunction> {
    let minus = triple_integral(h, g, n, quad, out, 1.0)?;
    let plus = triple_integral(h, g, n, quad, out, -1.0)?;
    // sin 2Δ = (e^{2iΔ} - e^{-2iΔ}) / 2i, and each integral already carries π^{-3}
    let values = plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (m - p) / Complex64::new(0.0, 1.0))
        .collect();
    PhaseFunction::new(ComplexField::from_vec(out.clone(), values)?, Provenance::Synthetic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{make_coherent, CoherentLabel};
    use crate::hilbert::projector;
    use crate::numerics::SampledLine;
    use crate::star::star_operator_route_on;
    use crate::transforms::{default_cutoff, expect_kernel_route, DEFAULT_MARGIN};

    fn rel(a: &PhaseFunction, b: &PhaseFunction) -> f64 {
        a.max_abs_diff(b) / b.field().max_abs()
    }

    #[test]
    fn budget_is_enforced() {
        let g = PhaseFunction::synthetic(&Grid::phase(SampledLine::midpoint(8.0, 64).unwrap(), 1).unwrap(), |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let quad = QuadSpec { budget: 1000, ..QuadSpec::default() };
        let out = Grid::phase(SampledLine::midpoint(2.0, 8).unwrap(), 1).unwrap();
        assert!(matches!(star_kernel_route(&g, &g, 4, &quad, &out), Err(PsqmError::BudgetExceeded { .. })));
        assert!(QuadSpec::default().cost(256) < 1_000_000_000);
    }

    #[test]
    fn coherent_projector_matches_operator_route() {
        let line = SampledLine::midpoint(8.0, 128).unwrap();
        let pos = Grid::position(line, 1).unwrap();
        let inv = Grid::inversion(&line, 1, DEFAULT_MARGIN).unwrap();
        let e = expect_kernel_route(&projector(&make_coherent(&pos, &CoherentLabel::origin(1)).unwrap()).unwrap(), &inv).unwrap();
        let out = Grid::phase(SampledLine::midpoint(3.0, 16).unwrap(), 1).unwrap();
        let reference = star_operator_route_on(&e, &e, default_cutoff(&inv), &out).unwrap();
        let quad = QuadSpec::default();
        let k = star_kernel_route(&e, &e, KERNEL_DEFAULT_N, &quad, &out).unwrap();
        assert!(rel(&k, &reference) < 5e-2, "{}", rel(&k, &reference));
        // (G×H)* = H̄×Ḡ
        let th = make_coherent(&pos, &CoherentLabel::new(vec![0.5], vec![-0.3]).unwrap()).unwrap();
        let f = expect_kernel_route(&projector(&th).unwrap(), &inv).unwrap();
        let gh = star_kernel_route(&e, &f, KERNEL_DEFAULT_N, &quad, &out).unwrap();
        let hg = star_kernel_route(&f.conj(), &e.conj(), KERNEL_DEFAULT_N, &quad, &out).unwrap();
        assert!(gh.conj().max_abs_diff(&hg) < 1e-6);
        // the order matters once the symbols do not commute
        let n = default_cutoff(&inv);
        let ef = star_operator_route_on(&e, &f, n, &out).unwrap();
        assert!(rel(&gh, &ef) < 5e-2, "{}", rel(&gh, &ef));
        let printed = star_kernel_route_printed(&e, &f, KERNEL_DEFAULT_N, &quad, &out).unwrap();
        assert!(rel(&printed, &star_operator_route_on(&f, &e, n, &out).unwrap()) < 5e-2);
    }
}
