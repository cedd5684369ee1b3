use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{PsqmError, Result};
use crate::numerics::{ComplexField, Grid};

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    let (a, b) = (bump(t), bump(1.0 - t));
    (a / (a + b)).clamp(0.0, 1.0)
}

/// The hat functions h_N(x) = Π_j s(N + 1 - |x_j|): 1 on [-N, N]^d, 0 outside [-N-1, N+1]^d.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutoffFamily {
    pub n: usize,
}

impl CutoffFamily {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(PsqmError::InvalidArgument("cutoff index N must be positive".into()));
        }
        Ok(CutoffFamily { n })
    }

    pub fn radius(&self) -> f64 {
        self.n as f64 + 1.0
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| smooth_step(self.radius() - v.abs())).product()
    }

    /// Radial variant s(N + 1 - |x|).
    pub fn radial(&self, x: &[f64]) -> f64 {
        smooth_step(self.radius() - x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

/// h_N sampled on a grid (normally a frequency grid). The support must fit in the grid.
pub fn make_cutoff(n: usize, grid: &Grid) -> Result<ComplexField> {
    let h = CutoffFamily::new(n)?;
    if let Some(a) = grid.axes().iter().find(|a| a.half_width() < h.radius()) {
        return Err(PsqmError::InvalidGrid(format!(
            "cutoff support N+1={} exceeds grid half-width {}",
            h.radius(),
            a.half_width()
        )));
    }
    Ok(ComplexField::from_real_fn(grid.clone(), move |x| h.value(x)))
}

/// One-dimensional factor f_N(a) = (2π)^{-1/2} ∫ s(N+1-|ζ|) e^{ζ²/4} e^{-iaζ} dζ of the
/// transform of h_N·e^{|·|²/4}, which is the product of f_N over the coordinates.
///
/// The integral is tabulated once as composite Gauss-Legendre nodes on [0, N+1] (the
/// integrand is even) and evaluated by direct summation.
#[derive(Clone, Debug)]
pub struct CutoffTransform {
    family: CutoffFamily,
    nodes: Vec<(f64, f64)>,
}

const PANEL_NODES: usize = 24;
const PANELS_PER_UNIT: usize = 4;

impl CutoffTransform {
    pub fn new(family: CutoffFamily) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(PANEL_NODES).expect("non-zero"));
        let panels = PANELS_PER_UNIT * (family.n + 1);
        let width = family.radius() / panels as f64;
        let mut nodes = Vec::with_capacity(panels * PANEL_NODES);
        for k in 0..panels {
            let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
            for (x, w) in rule.iter() {
                let z = 0.5 * (b - a) * x + 0.5 * (a + b);
                let weight = 0.5 * (b - a) * w * smooth_step(family.radius() - z) * (0.25 * z * z).exp();
                nodes.push((z, weight));
            }
        }
        CutoffTransform { family, nodes }
    }

    pub fn family(&self) -> CutoffFamily {
        self.family
    }

    pub fn eval_1d(&self, a: f64) -> f64 {
        2.0 * self.nodes.iter().map(|(z, w)| w * (a * z).cos()).sum::<f64>() / (2.0 * PI).sqrt()
    }

    /// F(h_N e^{|·|²/4}) at a point of ℝ^d.
    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|&a| self.eval_1d(a)).product()
    }

    /// The same transform at w ∈ ℂ^m read as (Re w, Im w) ∈ ℝ^{2m}.
    pub fn eval_complex(&self, w: &[Complex64]) -> f64 {
        w.iter().map(|z| self.eval_1d(z.re) * self.eval_1d(z.im)).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SampledLine;

    #[test]
    fn hat_shape() {
        let h = CutoffFamily::new(3).unwrap();
        assert_eq!(h.value(&[0.0, 0.0]), 1.0);
        assert_eq!(h.value(&[3.0, -2.9]), 1.0);
        assert_eq!(h.value(&[4.5, 0.0]), 0.0);
        assert_eq!(h.value(&[0.3, 3.7]), h.value(&[3.7, 0.3]));
        assert_eq!(h.value(&[0.3, 3.7]), h.value(&[-0.3, -3.7]));
        let v = h.value(&[3.5, 0.0]);
        assert!(v > 0.0 && v < 1.0 && (v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampled_cutoff() {
        let g = Grid::phase(SampledLine::with_spacing(0.25, 81).unwrap(), 1).unwrap();
        let c = make_cutoff(4, &g).unwrap();
        assert_eq!(c.at(&[40, 40]).re, 1.0);
        assert!(c.data().iter().all(|z| z.re >= 0.0 && z.re <= 1.0));
        // (N + 1.5) lies outside the support
        assert_eq!(c.at(&[40 + 22, 40]).re, 0.0);
        assert!(make_cutoff(12, &g).is_err());
    }

    #[test]
    fn transform_matches_fine_midpoint_sum() {
        let t = CutoffTransform::new(CutoffFamily::new(4).unwrap());
        let steps = 400_000;
        let h = 10.0 / steps as f64;
        for a in [0.0, 0.7, -2.3, 5.0] {
            let direct: f64 = (0..steps)
                .map(|k| {
                    let z = -5.0 + (k as f64 + 0.5) * h;
                    smooth_step(5.0 - z.abs()) * (0.25 * z * z).exp() * (a * z).cos()
                })
                .sum::<f64>()
                * h
                / (2.0 * PI).sqrt();
            assert!((t.eval_1d(a) - direct).abs() < 1e-8 * direct.abs().max(1.0), "{a}");
        }
        assert_eq!(t.eval_1d(1.3), t.eval_1d(-1.3));
    }
}
