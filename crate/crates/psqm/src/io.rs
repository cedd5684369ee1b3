//! CSV files for states, phase functions and operators.
//!
//! Every file opens with comment lines:
//!
//!   # psqm <kind>
//!   # grid: m=1 L=8 n=128              (or `m=1 axes=L:n,L:n` when the axes differ)
//!   # provenance: kernel-route         (phase functions only)
//!   # columns: q,p,re,im
//!
//! followed by one row per sample in row-major order. Operators use
//! `# grid: m=1 L=8 n=128; view: matrix` and rows `i,j,re,im`. Floats are written with 17
//! significant digits, which round-trips f64 exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{PsqmError, Result};
use crate::hilbert::{OperatorMatrix, StateVector};
use crate::numerics::{ComplexField, Grid, SampledLine};
use crate::transforms::{PhaseFunction, Provenance};

const COORD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileKind {
    State,
    Phase,
    Operator,
}

impl FileKind {
    fn tag(self) -> &'static str {
        match self {
            FileKind::State => "state",
            FileKind::Phase => "phase",
            FileKind::Operator => "operator",
        }
    }

    fn parse(s: &str, line: usize) -> Result<Self> {
        match s {
            "state" => Ok(FileKind::State),
            "phase" => Ok(FileKind::Phase),
            "operator" => Ok(FileKind::Operator),
            other => Err(parse_err(line, format!("unknown file kind '{other}'"))),
        }
    }

    /// Grid axes per m.
    fn axes_per_m(self) -> usize {
        match self {
            FileKind::Phase => 2,
            _ => 1,
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> PsqmError {
    PsqmError::Parse { line, msg: msg.into() }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn grid_header(grid: &Grid, m: usize) -> String {
    let first = grid.axis(0);
    if grid.axes().iter().all(|a| a.points() == first.points() && a.half_width() == first.half_width()) {
        format!("m={m} L={:?} n={}", first.half_width(), first.points())
    } else {
        let axes: Vec<String> = grid.axes().iter().map(|a| format!("{:?}:{}", a.half_width(), a.points())).collect();
        format!("m={m} axes={}", axes.join(","))
    }
}

fn parse_grid(spec: &str, kind: FileKind, line: usize) -> Result<Grid> {
    let mut m = None;
    let (mut l, mut n, mut axes) = (None, None, None);
    for tok in spec.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key=value in grid header, got '{tok}'")))?;
        let bad = || parse_err(line, format!("bad value in '{tok}'"));
        match k {
            "m" => m = Some(v.parse::<usize>().map_err(|_| bad())?),
            "L" => l = Some(v.parse::<f64>().map_err(|_| bad())?),
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            "axes" => {
                let lines = v
                    .split(',')
                    .map(|a| {
                        let (hw, pts) = a.split_once(':').ok_or_else(bad)?;
                        let hw = hw.parse::<f64>().map_err(|_| bad())?;
                        let pts = pts.parse::<usize>().map_err(|_| bad())?;
                        SampledLine::centered(hw, pts).map_err(|e| parse_err(line, e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                axes = Some(lines);
            }
            other => return Err(parse_err(line, format!("unknown grid key '{other}'"))),
        }
    }
    let m = m.ok_or_else(|| parse_err(line, "grid header lacks m"))?;
    let dims = m * kind.axes_per_m();
    let axes = match (axes, l, n) {
        (Some(a), None, None) => a,
        (None, Some(l), Some(n)) => {
            vec![SampledLine::centered(l, n).map_err(|e| parse_err(line, e.to_string()))?; dims]
        }
        _ => return Err(parse_err(line, "grid header needs either L and n, or axes")),
    };
    if axes.len() != dims {
        return Err(parse_err(line, format!("{} axes declared, m={m} needs {dims}", axes.len())));
    }
    Grid::new(axes)
}

fn columns(kind: FileKind, m: usize) -> String {
    let names: Vec<String> = match (kind, m) {
        (FileKind::Operator, _) => vec!["i".into(), "j".into()],
        (FileKind::State, 1) => vec!["x".into()],
        (FileKind::Phase, 1) => vec!["q".into(), "p".into()],
        (FileKind::State, _) => (1..=m).map(|k| format!("x{k}")).collect(),
        (FileKind::Phase, _) => (1..=m).map(|k| format!("q{k}")).chain((1..=m).map(|k| format!("p{k}"))).collect(),
    };
    format!("{},re,im", names.join(","))
}

fn encode(kind: FileKind, field: &ComplexField, m: usize, provenance: Option<Provenance>) -> String {
    let grid = field.grid();
    let mut out = String::new();
    writeln!(out, "# psqm {}", kind.tag()).unwrap();
    writeln!(out, "# grid: {}", grid_header(grid, m)).unwrap();
    if let Some(p) = provenance {
        writeln!(out, "# provenance: {p}").unwrap();
    }
    writeln!(out, "# columns: {}", columns(kind, m)).unwrap();
    for (k, v) in field.data().iter().enumerate() {
        for x in grid.coords_of(k) {
            write!(out, "{},", num(x)).unwrap();
        }
        writeln!(out, "{},{}", num(v.re), num(v.im)).unwrap();
    }
    out
}

struct Header {
    kind: FileKind,
    grid: Grid,
    provenance: Option<Provenance>,
    /// Line number of the first data row.
    body: usize,
}

fn read_header(lines: &[&str], want: FileKind) -> Result<Header> {
    let mut kind = None;
    let mut grid_spec = None;
    let mut provenance = None;
    let mut body = lines.len();
    for (i, raw) in lines.iter().enumerate() {
        let Some(rest) = raw.strip_prefix('#') else {
            body = i;
            break;
        };
        let rest = rest.trim();
        let line = i + 1;
        if let Some(k) = rest.strip_prefix("psqm ") {
            kind = Some(FileKind::parse(k.trim(), line)?);
        } else if let Some(g) = rest.strip_prefix("grid:") {
            grid_spec = Some((g.trim().to_string(), line));
        } else if let Some(p) = rest.strip_prefix("provenance:") {
            provenance = Some(p.trim().parse::<Provenance>().map_err(|e| parse_err(line, e.to_string()))?);
        }
    }
    let kind = kind.ok_or_else(|| parse_err(1, "missing '# psqm <kind>' line"))?;
    if kind != want {
        return Err(parse_err(1, format!("expected a {} file, found {}", want.tag(), kind.tag())));
    }
    let (spec, line) = grid_spec.ok_or_else(|| parse_err(1, "missing '# grid:' line"))?;
    let spec = match kind {
        FileKind::Operator => spec
            .strip_suffix("; view: matrix")
            .ok_or_else(|| parse_err(line, "operator grid header must end with '; view: matrix'"))?
            .to_string(),
        _ => spec,
    };
    Ok(Header {
        kind,
        grid: parse_grid(&spec, kind, line)?,
        provenance,
        body,
    })
}

fn parse_row(raw: &str, width: usize, line: usize) -> Result<Vec<f64>> {
    let vals = raw
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| parse_err(line, format!("not a number: '{}'", t.trim()))))
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != width {
        return Err(parse_err(line, format!("expected {width} columns, found {}", vals.len())));
    }
    Ok(vals)
}

fn data_rows<'a>(lines: &'a [&'a str], body: usize) -> impl Iterator<Item = (usize, &'a str)> {
    lines
        .iter()
        .enumerate()
        .skip(body)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, *l))
}

fn decode_field(text: &str, want: FileKind) -> Result<(ComplexField, Option<Provenance>)> {
    let lines: Vec<&str> = text.lines().collect();
    let h = read_header(&lines, want)?;
    let grid = h.grid;
    let d = grid.dims();
    let mut data = Vec::with_capacity(grid.len());
    for (line, raw) in data_rows(&lines, h.body) {
        let k = data.len();
        if k >= grid.len() {
            return Err(parse_err(line, format!("more rows than the {} grid points", grid.len())));
        }
        let vals = parse_row(raw, d + 2, line)?;
        for (x, want) in vals[..d].iter().zip(grid.coords_of(k)) {
            if (x - want).abs() > COORD_TOL * (1.0 + want.abs()) {
                return Err(parse_err(line, format!("coordinate {x} does not match grid point {want}")));
            }
        }
        data.push(Complex64::new(vals[d], vals[d + 1]));
    }
    if data.len() != grid.len() {
        return Err(parse_err(lines.len(), format!("found {} rows, grid has {} points", data.len(), grid.len())));
    }
    debug_assert_eq!(h.kind, want);
    Ok((ComplexField::from_vec(grid, data)?, h.provenance))
}

pub fn state_to_csv(psi: &StateVector) -> String {
    encode(FileKind::State, psi.field(), psi.m(), None)
}

pub fn state_from_csv(text: &str) -> Result<StateVector> {
    StateVector::from_field(decode_field(text, FileKind::State)?.0)
}

pub fn phase_to_csv(g: &PhaseFunction) -> String {
    encode(FileKind::Phase, g.field(), g.m(), Some(g.provenance()))
}

pub fn phase_from_csv(text: &str) -> Result<PhaseFunction> {
    let (field, provenance) = decode_field(text, FileKind::Phase)?;
    PhaseFunction::new(field, provenance.unwrap_or(Provenance::Synthetic))
}

pub fn operator_to_csv(a: &OperatorMatrix) -> String {
    let grid = a.grid();
    let mut out = String::new();
    writeln!(out, "# psqm operator").unwrap();
    writeln!(out, "# grid: {}; view: matrix", grid_header(grid, grid.dims())).unwrap();
    writeln!(out, "# columns: {}", columns(FileKind::Operator, grid.dims())).unwrap();
    let e = a.entries();
    for i in 0..e.nrows() {
        for j in 0..e.ncols() {
            let v = e[(i, j)];
            writeln!(out, "{i},{j},{},{}", num(v.re), num(v.im)).unwrap();
        }
    }
    out
}

pub fn operator_from_csv(text: &str) -> Result<OperatorMatrix> {
    let lines: Vec<&str> = text.lines().collect();
    let h = read_header(&lines, FileKind::Operator)?;
    let n = h.grid.len();
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut count = 0;
    for (line, raw) in data_rows(&lines, h.body) {
        let vals = parse_row(raw, 4, line)?;
        let (i, j) = (vals[0], vals[1]);
        let (want_i, want_j) = (count / n, count % n);
        if count >= n * n || i != want_i as f64 || j != want_j as f64 {
            return Err(parse_err(line, format!("expected entry ({want_i},{want_j}), found ({i},{j})")));
        }
        entries[(want_i, want_j)] = Complex64::new(vals[2], vals[3]);
        count += 1;
    }
    if count != n * n {
        return Err(parse_err(lines.len(), format!("found {count} entries, expected {}", n * n)));
    }
    OperatorMatrix::detect(h.grid, entries)
}

pub fn write_state(path: impl AsRef<Path>, psi: &StateVector) -> Result<()> {
    Ok(fs::write(path, state_to_csv(psi))?)
}

pub fn read_state(path: impl AsRef<Path>) -> Result<StateVector> {
    state_from_csv(&fs::read_to_string(path)?)
}

pub fn write_phase(path: impl AsRef<Path>, g: &PhaseFunction) -> Result<()> {
    Ok(fs::write(path, phase_to_csv(g))?)
}

pub fn read_phase(path: impl AsRef<Path>) -> Result<PhaseFunction> {
    phase_from_csv(&fs::read_to_string(path)?)
}

pub fn write_operator(path: impl AsRef<Path>, a: &OperatorMatrix) -> Result<()> {
    Ok(fs::write(path, operator_to_csv(a))?)
}

pub fn read_operator(path: impl AsRef<Path>) -> Result<OperatorMatrix> {
    operator_from_csv(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{make_coherent, CoherentLabel};
    use crate::hilbert::random_operator;

    fn pos() -> Grid {
        Grid::position(SampledLine::midpoint(4.0, 16).unwrap(), 1).unwrap()
    }

    #[test]
    fn state_round_trip_is_exact() {
        let th = make_coherent(&pos(), &CoherentLabel::new(vec![0.3], vec![-1.1]).unwrap()).unwrap();
        let text = state_to_csv(&th);
        assert!(text.starts_with("# psqm state\n# grid: m=1 L=4.0 n=16\n"));
        let back = state_from_csv(&text).unwrap();
        assert_eq!(back.values(), th.values());
        assert!(back.grid().same_as(th.grid()));
    }

    #[test]
    fn phase_round_trip_keeps_provenance_and_odd_axes() {
        let g = Grid::inversion(pos().axis(0), 1, 1.0).unwrap();
        let f = PhaseFunction::synthetic(&g, |q, p| Complex64::new(q[0].sin(), p[0] * 1e-300))
            .unwrap()
            .with_provenance(Provenance::Husimi);
        let text = phase_to_csv(&f);
        assert!(text.contains("axes="));
        let back = phase_from_csv(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn operator_round_trip() {
        let g = Grid::position(SampledLine::midpoint(6.0, 32).unwrap(), 1).unwrap();
        let a = random_operator(&g, 3, 2).unwrap();
        let text = operator_to_csv(&a);
        assert!(text.contains("# grid: m=1 L=6.0 n=32; view: matrix"));
        let back = operator_from_csv(&text).unwrap();
        assert_eq!(back.entries(), a.entries());
    }

    #[test]
    fn malformed_files_give_structured_errors() {
        let th = make_coherent(&pos(), &CoherentLabel::origin(1)).unwrap();
        let text = state_to_csv(&th);
        let wrong_n = text.replace("n=16", "n=18");
        assert!(matches!(state_from_csv(&wrong_n), Err(PsqmError::Parse { line: 4, .. })));
        let wrong_l = text.replace("L=4.0", "L=5.0");
        assert!(matches!(state_from_csv(&wrong_l), Err(PsqmError::Parse { line: 4, .. })));
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(matches!(state_from_csv(&truncated), Err(PsqmError::Parse { .. })));
        assert!(matches!(phase_from_csv(&text), Err(PsqmError::Parse { line: 1, .. })));
        let garbage = text.replacen("e-1,", "x,", 1);
        assert!(matches!(state_from_csv(&garbage), Err(PsqmError::Parse { .. })));
        assert!(matches!(state_from_csv("x,1,2\n"), Err(PsqmError::Parse { line: 1, .. })));
    }
}
