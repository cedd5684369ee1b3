use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{PsqmError, Result};

const SAME_TOL: f64 = 1e-10;

/// Uniform cell-centred sampling of [-L, L]: x_j = -L + (j + 1/2) dx, dx = 2L/n.
///
/// Odd point counts are allowed for internal lattices; they put a sample at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampledLine {
    half_width: f64,
    points: usize,
}

impl SampledLine {
    /// The user-facing position grid: n even and at least 8.
    pub fn midpoint(half_width: f64, points: usize) -> Result<Self> {
        if points < 8 || !points.is_multiple_of(2) {
            return Err(PsqmError::InvalidGrid(format!(
                "midpoint grids need an even point count >= 8, got {points}"
            )));
        }
        Self::centered(half_width, points)
    }

    pub fn centered(half_width: f64, points: usize) -> Result<Self> {
        if points == 0 || !(half_width.is_finite() && half_width > 0.0) {
            return Err(PsqmError::InvalidGrid(format!(
                "need L > 0 and n >= 1, got L={half_width} n={points}"
            )));
        }
        Ok(SampledLine { half_width, points })
    }

    pub fn with_spacing(spacing: f64, points: usize) -> Result<Self> {
        Self::centered(0.5 * spacing * points as f64, points)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn first(&self) -> f64 {
        -self.half_width + 0.5 * self.spacing()
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * (self.points as f64 - 1.0)) * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }

    /// Frequency grid paired with this one: spacing 2π/(n dx), half-width π/dx.
    pub fn dual(&self) -> SampledLine {
        SampledLine {
            half_width: PI / self.spacing(),
            points: self.points,
        }
    }

    pub fn same_as(&self, other: &SampledLine) -> bool {
        self.points == other.points
            && (self.half_width - other.half_width).abs() <= SAME_TOL * self.half_width.max(1.0)
    }

    /// Continuous index of `x`, i.e. j with x_j = x.
    pub fn position(&self, x: f64) -> f64 {
        x / self.spacing() + 0.5 * (self.points as f64 - 1.0)
    }

    /// Index of a sample lying exactly (to 1e-9 cells) on `x`.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let s = self.position(x);
        let r = s.round();
        if (s - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.points {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Centred sub-line with the same spacing; its samples coincide with ours.
    pub fn subline(&self, points: usize) -> Result<SampledLine> {
        if points > self.points || !(self.points - points).is_multiple_of(2) || points == 0 {
            return Err(PsqmError::InvalidGrid(format!(
                "cannot take a centred {points}-point sub-line of a {}-point line",
                self.points
            )));
        }
        SampledLine::with_spacing(self.spacing(), points)
    }

    pub fn contains(&self, x: f64) -> bool {
        x.abs() <= self.half_width
    }
}

/// Tensor grid, first axis slowest. Position grids have m axes; phase grids have
/// 2m axes ordered (q_1..q_m, p_1..p_m), or (x, y) for kernels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    axes: Vec<SampledLine>,
}

pub type PhaseGrid = Grid;

impl Grid {
    pub fn new(axes: Vec<SampledLine>) -> Result<Self> {
        if axes.is_empty() {
            return Err(PsqmError::InvalidGrid("grid needs at least one axis".into()));
        }
        Ok(Grid { axes })
    }

    pub fn uniform(line: SampledLine, dims: usize) -> Self {
        Grid {
            axes: vec![line; dims],
        }
    }

    pub fn position(line: SampledLine, m: usize) -> Result<Self> {
        check_m(m)?;
        Ok(Self::uniform(line, m))
    }

    pub fn phase(line: SampledLine, m: usize) -> Result<Self> {
        check_m(m)?;
        Ok(Self::uniform(line, 2 * m))
    }

    /// Phase grid from separate q and p lines, repeated over m.
    pub fn phase_from(q: SampledLine, p: SampledLine, m: usize) -> Result<Self> {
        check_m(m)?;
        let mut axes = vec![q; m];
        axes.extend(std::iter::repeat_n(p, m));
        Ok(Grid { axes })
    }

    /// Default display grid for ⟨A⟩: [-L/2, L/2] per axis, 64 points for m=1 and 8 for m=2.
    pub fn display(position: &SampledLine, m: usize) -> Result<Self> {
        let n = if m == 1 { 64 } else { 8 };
        Self::phase(SampledLine::midpoint(0.5 * position.half_width(), n)?, m)
    }

    /// Phase grid on which the expectation transform can be inverted exactly onto
    /// `position`: q spacing dx/2 over [-(L+margin), L+margin] (odd count) and 2n-1
    /// p samples covering one period 2π/dx.
    pub fn inversion(position: &SampledLine, m: usize, margin: f64) -> Result<Self> {
        let (q, p) = inversion_lines(position, margin)?;
        Self::phase_from(q, p, m)
    }

    pub fn axes(&self) -> &[SampledLine] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &SampledLine {
        &self.axes[k]
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    /// Half the number of axes, for phase grids.
    pub fn m(&self) -> usize {
        self.axes.len() / 2
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points()).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.axes.len()];
        for k in (0..self.axes.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].points();
        }
        s
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            let n = self.axes[k].points();
            idx[k] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.points() + i)
    }

    pub fn coords_of(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.x(i))
            .collect()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.axes.len() == other.axes.len()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| a.same_as(b))
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(PsqmError::GridMismatch(format!(
                "{} vs {}",
                self.describe(),
                other.describe()
            )))
        }
    }

    pub fn dual(&self) -> Grid {
        Grid {
            axes: self.axes.iter().map(|a| a.dual()).collect(),
        }
    }

    pub fn with_axis(&self, k: usize, line: SampledLine) -> Grid {
        let mut axes = self.axes.clone();
        axes[k] = line;
        Grid { axes }
    }

    /// Swap the first and second halves of the axes (the map Ξ on grids).
    pub fn swapped(&self) -> Grid {
        let m = self.m();
        let mut axes = self.axes[m..].to_vec();
        axes.extend_from_slice(&self.axes[..m]);
        Grid { axes }
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .axes
            .iter()
            .map(|a| format!("{}:{}", a.half_width(), a.points()))
            .collect();
        format!("[{}]", parts.join(","))
    }
}

pub(crate) fn check_m(m: usize) -> Result<()> {
    if m == 1 || m == 2 {
        Ok(())
    } else {
        Err(PsqmError::UnsupportedDimension(m))
    }
}

pub(crate) fn inversion_lines(
    position: &SampledLine,
    margin: f64,
) -> Result<(SampledLine, SampledLine)> {
    let dx = position.spacing();
    let n = position.points();
    let half = ((position.half_width() + margin.max(0.0)) / (0.5 * dx)).ceil() as usize;
    // The q line must hold the whole midpoint lattice of spacing dx/2, i.e. 2n-1 points.
    let half = half.max(n - 1);
    let q = SampledLine::with_spacing(0.5 * dx, 2 * half + 1)?;
    let np = 2 * n - 1;
    let p = SampledLine::with_spacing(2.0 * PI / (np as f64 * dx), np)?;
    Ok((q, p))
}
