use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::StateVector;
use crate::error::{PsqmError, Result};
use crate::numerics::{ComplexField, Grid, SampledLine};

const HERMITIAN_TOL: f64 = 1e-12;
const CLUSTER_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HermitianFlag {
    Hermitian,
    General,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    grid: Grid,
    entries: DMatrix<Complex64>,
    flag: HermitianFlag,
}

impl OperatorMatrix {
    pub fn new(grid: Grid, entries: DMatrix<Complex64>, flag: HermitianFlag) -> Result<Self> {
        let n = grid.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(PsqmError::DimensionMismatch {
                expected: n,
                got: entries.nrows().max(entries.ncols()),
            });
        }
        let op = OperatorMatrix {
            grid,
            entries,
            flag,
        };
        if flag == HermitianFlag::Hermitian {
            let dev = op.hermitian_deviation();
            if dev > HERMITIAN_TOL {
                return Err(PsqmError::NotHermitian(dev));
            }
        }
        Ok(op)
    }

    /// Flag set from the entries: hermitian when ‖A - A*‖_max ≤ 1e-12.
    pub fn detect(grid: Grid, entries: DMatrix<Complex64>) -> Result<Self> {
        let mut op = Self::new(grid, entries, HermitianFlag::Unknown)?;
        op.flag = if op.hermitian_deviation() <= HERMITIAN_TOL {
            HermitianFlag::Hermitian
        } else {
            HermitianFlag::General
        };
        Ok(op)
    }

    pub fn identity(grid: Grid) -> Self {
        let n = grid.len();
        OperatorMatrix {
            grid,
            entries: DMatrix::identity(n, n),
            flag: HermitianFlag::Hermitian,
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        OperatorMatrix {
            grid,
            entries: DMatrix::zeros(n, n),
            flag: HermitianFlag::Hermitian,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn flag(&self) -> HermitianFlag {
        self.flag
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                dev = dev.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        match self.flag {
            HermitianFlag::Hermitian => true,
            HermitianFlag::General => false,
            HermitianFlag::Unknown => self.hermitian_deviation() <= HERMITIAN_TOL,
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.grid.ensure_same(psi.grid())?;
        let v = DVector::from_column_slice(psi.values());
        let out = &self.entries * v;
        StateVector::from_field(ComplexField::from_vec(
            self.grid.clone(),
            out.as_slice().to_vec(),
        )?)
    }

    /// ⟨φ, Aψ⟩.
    pub fn matrix_element(&self, phi: &StateVector, psi: &StateVector) -> Result<Complex64> {
        phi.inner(&self.apply(psi)?)
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            grid: self.grid.clone(),
            entries: self.entries.adjoint(),
            flag: self.flag,
        }
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(OperatorMatrix {
            grid: self.grid.clone(),
            entries: &self.entries * &other.entries,
            flag: HermitianFlag::Unknown,
        })
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let flag = if self.flag == HermitianFlag::Hermitian && other.flag == HermitianFlag::Hermitian {
            HermitianFlag::Hermitian
        } else {
            HermitianFlag::Unknown
        };
        Ok(OperatorMatrix {
            grid: self.grid.clone(),
            entries: &self.entries + &other.entries,
            flag,
        })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let flag = if s.im == 0.0 && self.flag == HermitianFlag::Hermitian {
            HermitianFlag::Hermitian
        } else {
            HermitianFlag::Unknown
        };
        OperatorMatrix {
            grid: self.grid.clone(),
            entries: &self.entries * s,
            flag,
        }
    }

    /// Commutator AB - BA.
    pub fn commutator(&self, other: &OperatorMatrix) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Frobenius norm of the matrix entries.
    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖A - B‖_F / ‖B‖_F.
    pub fn relative_frobenius_error(&self, reference: &OperatorMatrix) -> f64 {
        let diff: f64 = self
            .entries
            .iter()
            .zip(reference.entries.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        diff / reference.frobenius()
    }

    /// Eigenvalues in ascending order; hermitian operators only.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    fn require_hermitian(&self) -> Result<()> {
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            Err(PsqmError::NotHermitian(dev))
        } else {
            Ok(())
        }
    }

    pub fn kernel(&self) -> OperatorKernel {
        let vol = self.grid.cell_volume();
        let kgrid = kernel_grid(&self.grid);
        let n = self.dim();
        let data = (0..n * n)
            .map(|k| self.entries[(k / n, k % n)] / vol)
            .collect();
        OperatorKernel {
            field: ComplexField::from_vec(kgrid, data).expect("kernel shape"),
        }
    }

    /// Hermitian and anti-hermitian parts H, K with A = H + iK.
    pub(crate) fn hermitian_split(&self) -> (DMatrix<Complex64>, Option<DMatrix<Complex64>>) {
        let a = &self.entries;
        let adj = a.adjoint();
        let h = (a + &adj) * Complex64::new(0.5, 0.0);
        let k = (a - &adj) * Complex64::new(0.0, -0.5);
        let zero = k.iter().all(|z| *z == Complex64::new(0.0, 0.0));
        (h, if zero { None } else { Some(k) })
    }
}

fn kernel_grid(position: &Grid) -> Grid {
    let mut axes = position.axes().to_vec();
    axes.extend_from_slice(position.axes());
    Grid::new(axes).expect("non-empty")
}

/// Sampled Schwartz kernel SK(A)(x, y) on the (x, y) grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorKernel {
    field: ComplexField,
}

impl OperatorKernel {
    pub fn from_field(field: ComplexField) -> Result<Self> {
        if !field.grid().dims().is_multiple_of(2) {
            return Err(PsqmError::DimensionMismatch {
                expected: field.grid().dims() + 1,
                got: field.grid().dims(),
            });
        }
        Ok(OperatorKernel { field })
    }

    pub fn field(&self) -> &ComplexField {
        &self.field
    }

    pub fn position_grid(&self) -> Grid {
        Grid::new(self.field.grid().axes()[..self.field.grid().m()].to_vec()).expect("non-empty")
    }

    pub fn to_matrix(&self) -> Result<OperatorMatrix> {
        let grid = self.position_grid();
        let n = grid.len();
        let vol = grid.cell_volume();
        let entries = DMatrix::from_fn(n, n, |i, j| self.field.data()[i * n + j] * vol);
        OperatorMatrix::detect(grid, entries)
    }

    /// ∫∫ φ̄(x) SK(x,y) ψ(y) dx dy by midpoint quadrature.
    pub fn matrix_element(&self, phi: &StateVector, psi: &StateVector) -> Result<Complex64> {
        let grid = self.position_grid();
        grid.ensure_same(phi.grid())?;
        grid.ensure_same(psi.grid())?;
        let n = grid.len();
        let integrand = ComplexField::from_vec(
            self.field.grid().clone(),
            (0..n * n)
                .map(|k| phi.values()[k / n].conj() * self.field.data()[k] * psi.values()[k % n])
                .collect(),
        )?;
        Ok(integrand.quadrature())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Canonical {
    Position,
    Momentum,
}

/// The line on which g(Q_k) or g(P_k) samples its function.
pub fn spectrum_line(grid: &Grid, kind: Canonical) -> SampledLine {
    match kind {
        Canonical::Position => *grid.axis(0),
        Canonical::Momentum => grid.axis(0).dual(),
    }
}

fn check_axis(grid: &Grid, k: usize) -> Result<()> {
    if k >= grid.dims() {
        return Err(PsqmError::InvalidArgument(format!(
            "axis {k} out of range for m={}",
            grid.dims()
        )));
    }
    Ok(())
}

/// One-dimensional matrix of g(Q) or g(P) on a single axis.
fn one_axis_matrix(line: &SampledLine, kind: Canonical, g: &[Complex64]) -> DMatrix<Complex64> {
    let n = line.points();
    match kind {
        Canonical::Position => DMatrix::from_fn(n, n, |i, j| if i == j { g[i] } else { Complex64::new(0.0, 0.0) }),
        Canonical::Momentum => {
            // (F⁻¹ diag(g) F)_ij = (1/n) Σ_k g(ξ_k) e^{i ξ_k (x_i - x_j)}
            let dual = line.dual();
            let dx = line.spacing();
            let diag: Vec<Complex64> = (-(n as isize - 1)..n as isize)
                .map(|d| {
                    (0..n)
                        .map(|k| g[k] * Complex64::from_polar(1.0, dual.x(k) * d as f64 * dx))
                        .sum::<Complex64>()
                        / n as f64
                })
                .collect();
            DMatrix::from_fn(n, n, |i, j| diag[(i as isize - j as isize + n as isize - 1) as usize])
        }
    }
}

fn embed(grid: &Grid, k: usize, one: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n1 = grid.axis(k).points();
    let total = grid.len();
    let inner: usize = grid.shape()[k + 1..].iter().product();
    DMatrix::from_fn(total, total, |a, b| {
        let (ia, ib) = ((a / inner) % n1, (b / inner) % n1);
        let same_rest = a / (inner * n1) == b / (inner * n1) && a % inner == b % inner;
        if same_rest {
            one[(ia, ib)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// g(Q_k) or g(P_k) for g sampled on [`spectrum_line`].
pub fn op_function_of(grid: &Grid, kind: Canonical, k: usize, g: &ComplexField) -> Result<OperatorMatrix> {
    check_axis(grid, k)?;
    let line = *grid.axis(k);
    let want = spectrum_line(grid, kind);
    if g.grid().dims() != 1 || !g.grid().axis(0).same_as(&want) {
        return Err(PsqmError::GridMismatch(format!(
            "g must be sampled on the {:?} spectrum line {}",
            kind,
            Grid::uniform(want, 1).describe()
        )));
    }
    let one = one_axis_matrix(&line, kind, g.data());
    let entries = embed(grid, k, &one);
    if g.data().iter().all(|z| z.im == 0.0) {
        let sym = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        OperatorMatrix::new(grid.clone(), sym, HermitianFlag::Hermitian)
    } else {
        OperatorMatrix::detect(grid.clone(), entries)
    }
}

pub fn op_position(grid: &Grid, k: usize) -> Result<OperatorMatrix> {
    let g = ComplexField::from_real_fn(Grid::uniform(spectrum_line(grid, Canonical::Position), 1), |x| x[0]);
    op_function_of(grid, Canonical::Position, k, &g)
}

pub fn op_momentum(grid: &Grid, k: usize) -> Result<OperatorMatrix> {
    let g = ComplexField::from_real_fn(Grid::uniform(spectrum_line(grid, Canonical::Momentum), 1), |x| x[0]);
    op_function_of(grid, Canonical::Momentum, k, &g)
}

/// E_ψ = ψ⟨ψ, ·⟩ for a unit vector ψ.
pub fn projector(psi: &StateVector) -> Result<OperatorMatrix> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(PsqmError::InvalidArgument(format!(
            "projector needs a unit vector, got norm {norm}"
        )));
    }
    let v = psi.values();
    let vol = psi.grid().cell_volume();
    let n = v.len();
    let mut e = DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() * vol);
    for i in 0..n {
        e[(i, i)].im = 0.0;
    }
    OperatorMatrix::new(psi.grid().clone(), e, HermitianFlag::Hermitian)
}

/// E^A_{(-∞, r]}: sum of eigenprojectors with eigenvalue ≤ r. Eigenvalues closer than 1e-10
/// form one cluster, which is kept or dropped as a whole.
pub fn spectral_family(a: &OperatorMatrix, r: f64) -> Result<OperatorMatrix> {
    a.require_hermitian()?;
    let eig = SymmetricEigen::new(a.entries.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n = a.dim();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] <= CLUSTER_TOL
        {
            end += 1;
        }
        let mean = order[start..end].iter().map(|&i| eig.eigenvalues[i]).sum::<f64>()
            / (end - start) as f64;
        if mean <= r {
            for &i in &order[start..end] {
                let v = eig.eigenvectors.column(i);
                out += v * v.adjoint();
            }
        }
        start = end;
    }
    let sym = (&out + out.adjoint()) * Complex64::new(0.5, 0.0);
    OperatorMatrix::new(a.grid.clone(), sym, HermitianFlag::Hermitian)
}

fn hermite_1d(line: &SampledLine, count: usize) -> Vec<Vec<f64>> {
    let xs = line.coords();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    for k in 0..count {
        let v = match k {
            0 => xs.iter().map(|x| PI.powf(-0.25) * (-0.5 * x * x).exp()).collect(),
            _ => {
                let kf = k as f64;
                xs.iter()
                    .enumerate()
                    .map(|(j, x)| {
                        let prev2 = if k >= 2 { out[k - 2][j] } else { 0.0 };
                        (2.0 / kf).sqrt() * x * out[k - 1][j] - ((kf - 1.0) / kf).sqrt() * prev2
                    })
                    .collect()
            }
        };
        out.push(v);
    }
    out
}

/// The first `count` Hermite functions; for m=2, tensor products ordered by total degree.
pub fn hermite_basis(grid: &Grid, count: usize) -> Result<Vec<StateVector>> {
    crate::numerics::check_m(grid.dims())?;
    let line = *grid.axis(0);
    let mut labels = Vec::with_capacity(count);
    let mut degree = 0;
    while labels.len() < count {
        if grid.dims() == 1 {
            labels.push(vec![degree]);
        } else {
            for a in (0..=degree).rev() {
                if labels.len() < count {
                    labels.push(vec![a, degree - a]);
                }
            }
        }
        degree += 1;
    }
    let max_degree = labels.iter().flatten().copied().max().unwrap_or(0);
    if max_degree + 1 > line.points() / 4 {
        return Err(PsqmError::InvalidArgument(format!(
            "{count} Hermite functions need degree {max_degree}, above n/4 for n={}",
            line.points()
        )));
    }
    let table = hermite_1d(&line, max_degree + 1);
    labels
        .iter()
        .map(|lab| {
            let data = (0..grid.len())
                .map(|flat| {
                    let idx = grid.multi_index(flat);
                    Complex64::new(lab.iter().zip(&idx).map(|(&d, &i)| table[d][i]).product(), 0.0)
                })
                .collect();
            StateVector::from_field(ComplexField::from_vec(grid.clone(), data)?)
        })
        .collect()
}
