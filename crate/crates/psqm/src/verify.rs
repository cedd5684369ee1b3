//! Scenario batteries and the JSON verification report.
//!
//! Every check records a computed value, a target and a tolerance. Values are deviations
//! unless the comparison is `at-least`. Checks marked non-gating are printed for reference
//! and do not affect the verdict.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use log::info;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coherent::{expect_at, expect_direct, make_coherent, CoherentLabel};
use crate::duality::{pair, pairing_grid, pairing_multiplier, s_relations_check};
use crate::error::{PsqmError, Result};
use crate::hilbert::{
    hermite_basis, op_function_of, op_momentum, op_position, projector, random_hermitian,
    random_operator, random_psd, spectral_family, spectrum_line, Canonical, OperatorMatrix,
    StateVector,
};
use crate::numerics::{fourier_continuous, ComplexField, Grid, SampledLine};
use crate::star::{
    bracket, bracket_sin_kernel, star_kernel_route, star_kernel_route_printed, star_operator_route, star_operator_route_on,
    QuadSpec, CONVOLUTION_READING, KERNEL_DEFAULT_N,
};
use crate::transforms::{
    amplification, default_cutoff, expect_kernel_route, husimi, inverse_transform, weyl_quantize,
    wigner_grid, PhaseFunction, DEFAULT_MARGIN,
};

pub const SCENARIOS: [&str; 7] = ["exercise6", "theorem8", "remark17", "pairing", "star", "inverse", "all"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub m: usize,
    pub half_width: f64,
    pub points: usize,
    pub ladder: Vec<usize>,
    pub margin: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            m: 1,
            half_width: 8.0,
            points: 128,
            ladder: crate::duality::N_LADDER.to_vec(),
            margin: DEFAULT_MARGIN,
        }
    }
}

impl VerifyConfig {
    /// Applies `key=value` pairs separated by commas, e.g. `n=64,L=8`.
    pub fn apply_grid_spec(&mut self, spec: &str) -> Result<()> {
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| PsqmError::InvalidArgument(format!("expected key=value, got '{part}'")))?;
            let bad = || PsqmError::InvalidArgument(format!("bad value in '{part}'"));
            let v = v.trim();
            match k.trim() {
                "n" => self.points = v.parse().map_err(|_| bad())?,
                "L" => self.half_width = v.parse().map_err(|_| bad())?,
                "m" => self.m = v.parse().map_err(|_| bad())?,
                "margin" => self.margin = v.parse().map_err(|_| bad())?,
                other => return Err(PsqmError::InvalidArgument(format!("unknown grid key '{other}'"))),
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.m != 1 {
            return Err(PsqmError::InvalidArgument(format!(
                "verification batteries run at m=1, got m={}",
                self.m
            )));
        }
        if self.ladder.is_empty() || self.ladder.contains(&0) {
            return Err(PsqmError::InvalidArgument("N ladder must be non-empty and positive".into()));
        }
        SampledLine::midpoint(self.half_width, self.points)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// |value - target| ≤ tolerance
    Within,
    /// value ≥ target - tolerance
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub group: String,
    /// The identity being checked.
    pub anchor: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    pub gating: bool,
}

impl Check {
    fn new(group: &str, name: &str, anchor: &str, value: f64, target: f64, tolerance: f64, comparison: Comparison) -> Self {
        let pass = match comparison {
            Comparison::Within => (value - target).abs() <= tolerance,
            Comparison::AtLeast => value >= target - tolerance,
        };
        Check {
            name: name.into(),
            group: group.into(),
            anchor: anchor.into(),
            value,
            target,
            tolerance,
            comparison,
            pass,
            gating: true,
        }
    }

    fn deviation(group: &str, name: &str, anchor: &str, value: f64, tolerance: f64) -> Self {
        Self::new(group, name, anchor, value, 0.0, tolerance, Comparison::Within)
    }

    fn advisory(mut self) -> Self {
        self.gating = false;
        self
    }
}

/// Deviations along an N ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderResult {
    pub name: String,
    pub n: Vec<usize>,
    pub errors: Vec<f64>,
    pub non_increasing: bool,
}

impl LadderResult {
    fn new(name: &str, n: &[usize], errors: Vec<f64>) -> Self {
        let non_increasing = errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
        LadderResult {
            name: name.into(),
            n: n.to_vec(),
            errors,
            non_increasing,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridInfo {
    pub m: usize,
    pub half_width: f64,
    pub points: usize,
    pub inversion_margin: f64,
    pub inversion_grid: String,
    pub inversion_cutoff: usize,
    pub inversion_amplification: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub seed: u64,
    pub grid: GridInfo,
    pub ladder: Vec<usize>,
    pub checks: Vec<Check>,
    pub ladders: Vec<LadderResult>,
    pub notes: BTreeMap<String, String>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.gating && !c.pass)
    }

    pub fn group(&self, group: &str) -> impl Iterator<Item = &Check> {
        let g = group.to_string();
        self.checks.iter().filter(move |c| c.group == g)
    }
}

struct Ctx {
    cfg: VerifyConfig,
    line: SampledLine,
    pos: Grid,
    inv: Grid,
    cutoff: usize,
    checks: Vec<Check>,
    ladders: Vec<LadderResult>,
    notes: BTreeMap<String, String>,
}

fn relative(a: &PhaseFunction, reference: &PhaseFunction) -> f64 {
    a.max_abs_diff(reference) / reference.field().max_abs()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Ctx {
    fn new(cfg: &VerifyConfig) -> Result<Self> {
        cfg.validate()?;
        let line = SampledLine::midpoint(cfg.half_width, cfg.points)?;
        let pos = Grid::position(line, cfg.m)?;
        let inv = Grid::inversion(&line, cfg.m, cfg.margin)?;
        let cutoff = default_cutoff(&inv);
        Ok(Ctx {
            cfg: cfg.clone(),
            line,
            pos,
            inv,
            cutoff,
            checks: Vec::new(),
            ladders: Vec::new(),
            notes: BTreeMap::new(),
        })
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
    }

    fn seed(&self, salt: u64) -> u64 {
        self.rng(salt).random()
    }

    fn push(&mut self, check: Check) {
        info!(
            "{:<40} value={:.3e} target={:.3e} tol={:.1e} {}",
            check.name,
            check.value,
            check.target,
            check.tolerance,
            if check.pass { "ok" } else { "FAIL" }
        );
        self.checks.push(check);
    }

    fn display(&self) -> Result<Grid> {
        Grid::display(&self.line, self.cfg.m)
    }

    fn coarse(&self) -> Result<Grid> {
        Grid::phase(SampledLine::midpoint(0.5 * self.line.half_width(), 24)?, self.cfg.m)
    }

    fn finish(self, scenario: &str) -> VerifyReport {
        let passed = self.checks.iter().all(|c| !c.gating || c.pass)
            && self.ladders.iter().all(|l| l.non_increasing || l.name.starts_with("kernel"));
        VerifyReport {
            scenario: scenario.into(),
            seed: self.cfg.seed,
            grid: GridInfo {
                m: self.cfg.m,
                half_width: self.cfg.half_width,
                points: self.cfg.points,
                inversion_margin: self.cfg.margin,
                inversion_grid: self.inv.describe(),
                inversion_cutoff: self.cutoff,
                inversion_amplification: amplification(&self.inv, self.cutoff),
            },
            ladder: self.cfg.ladder.clone(),
            checks: self.checks,
            ladders: self.ladders,
            notes: self.notes,
            passed,
        }
    }
}

/// Runs one battery, or all of them for `all`.
pub fn run_scenario(name: &str, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut ctx = Ctx::new(cfg)?;
    match name {
        "exercise6" => exercise6(&mut ctx)?,
        "theorem8" => theorem8(&mut ctx)?,
        "remark17" => remark17(&mut ctx)?,
        "pairing" => pairing(&mut ctx)?,
        "star" => star(&mut ctx)?,
        "inverse" => inverse(&mut ctx)?,
        "all" => {
            exercise6(&mut ctx)?;
            theorem8(&mut ctx)?;
            inverse(&mut ctx)?;
            pairing(&mut ctx)?;
            remark17(&mut ctx)?;
            star(&mut ctx)?;
        }
        other => return Err(PsqmError::UnknownScenario(other.into())),
    }
    Ok(ctx.finish(name))
}

fn sample_on(line: SampledLine, f: impl Fn(f64) -> f64 + Sync) -> ComplexField {
    ComplexField::from_real_fn(Grid::uniform(line, 1), |x| f(x[0]))
}

/// Bounded test functions g with closed-form (g ∗ θ²) smoothings, as (name, g, √(2π)(g∗θ²)).
type Smoothed = (&'static str, fn(f64) -> f64, fn(f64) -> f64);

const BOUNDED: [Smoothed; 3] = [
    ("exp(-x^2)", |x| (-x * x).exp(), |q| (-0.5 * q * q).exp() / 2f64.sqrt()),
    ("cos(2x)", |x| (2.0 * x).cos(), |q| (-1f64).exp() * (2.0 * q).cos()),
    (
        "exp(-(x-1)^2/2)",
        |x| (-0.5 * (x - 1.0).powi(2)).exp(),
        |q| (2.0f64 / 3.0).sqrt() * (-(q - 1.0).powi(2) / 3.0).exp(),
    ),
];

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn exercise6(ctx: &mut Ctx) -> Result<()> {
    let pos = ctx.pos.clone();
    // coherent states: norms over a 5x5 label lattice, Fourier transform rotates labels
    let mut worst_norm: f64 = 0.0;
    let mut worst_fourier: f64 = 0.0;
    for q in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        for p in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let th = make_coherent(&pos, &CoherentLabel::new(vec![q], vec![p])?)?;
            worst_norm = worst_norm.max((th.norm() - 1.0).abs());
            let f = fourier_continuous(th.field())?;
            let dual = Grid::position(*f.grid().axis(0), 1)?;
            let want = make_coherent(&dual, &CoherentLabel::new(vec![p], vec![-q])?)?;
            worst_fourier = worst_fourier.max(f.max_abs_diff(want.field()));
        }
    }
    ctx.push(Check::deviation("coherent", "coherent-norm", "||theta_qp|| = 1", worst_norm, 1e-10));
    ctx.push(Check::deviation("coherent", "coherent-fourier", "F(theta_qp) = theta_(p,-q)", worst_fourier, 1e-8));

    // For |q| near L/2 the tail of θ_qp cut off at the box edge (mass ~1e-8 at L=8) reaches
    // ⟨f(P)⟩ through the spread kernel of f(P) at the 1e-6 level, so the gating region stops
    // one unit short; the whole display grid is reported alongside.
    let disp = ctx.display()?;
    let inner = disp.axis(0).half_width() - 1.0;
    for (kind, label) in [(Canonical::Position, "Q"), (Canonical::Momentum, "P")] {
        for (gname, g, smoothed) in BOUNDED {
            let gs = sample_on(spectrum_line(&pos, kind), g);
            let e = expect_direct(&op_function_of(&pos, kind, 0, &gs)?, &disp)?;
            let (mut dev, mut dev_all) = (0.0f64, 0.0f64);
            for k in 0..disp.len() {
                let z = disp.coords_of(k);
                let v = if kind == Canonical::Position { z[0] } else { z[1] };
                let d = (e.field().data()[k] - smoothed(v)).norm();
                dev_all = dev_all.max(d);
                if z[0].abs() <= inner {
                    dev = dev.max(d);
                }
            }
            let name = format!("function-of-{label}: {gname}");
            let anchor = if kind == Canonical::Position {
                "<g(Q)>(q,p) = sqrt(2pi) (g * theta^2)(q)"
            } else {
                "<f(P)>(q,p) = sqrt(2pi) (f * theta^2)(p)"
            };
            ctx.push(Check::deviation("exercise6", &name, anchor, dev, 1e-6));
            ctx.push(Check::deviation("exercise6", &format!("{name} (whole display grid)"), anchor, dev_all, 1e-6).advisory());
        }
    }

    // |<θ_z, h_n>|² = e^{-|z|²/2} (|z|²/2)^n / n!
    let hs = hermite_basis(&pos, 3)?;
    for (n, h) in hs.iter().enumerate() {
        let e = expect_direct(&projector(h)?, &disp)?;
        let dev = (0..disp.len())
            .map(|k| {
                let z = disp.coords_of(k);
                let r = 0.5 * (z[0] * z[0] + z[1] * z[1]);
                (e.field().data()[k] - (-r).exp() * r.powi(n as i32) / factorial(n)).norm()
            })
            .fold(0.0, f64::max);
        ctx.push(Check::deviation(
            "exercise6",
            &format!("projector-h{n}"),
            "<E_psi>(q,p) = |<psi, theta_qp>|^2",
            dev,
            1e-10,
        ));
    }

    let q = op_position(&pos, 0)?;
    let a = q.mul(&q)?.sub(&OperatorMatrix::identity(pos.clone()).scale(c(0.5)))?;
    let e = expect_direct(&a, &disp)?;
    let (mut dev, mut dev_printed) = (0.0f64, 0.0f64);
    for k in 0..disp.len() {
        let qv = disp.coords_of(k)[0];
        if qv.abs() <= 4.0 {
            dev = dev.max((e.field().data()[k] - qv * qv).norm());
            dev_printed = dev_printed.max((e.field().data()[k] - qv * qv / PI.sqrt()).norm());
        }
    }
    ctx.push(Check::deviation("exercise6", "q-squared", "<Q^2 - I/2>(q,p) = q^2", dev, 1e-6));
    ctx.push(
        Check::deviation("exercise6", "q-squared-printed", "<Q^2 - I/2>(q,p) = q^2 / sqrt(pi)", dev_printed, 1e-6)
            .advisory(),
    );

    positivity(ctx)
}

fn positivity(ctx: &mut Ctx) -> Result<()> {
    let pos = ctx.pos.clone();
    let grid = ctx.coarse()?;
    let min_real = |e: &PhaseFunction| e.field().data().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let mut worst = f64::INFINITY;
    for k in 0..100 {
        let a = random_psd(&pos, ctx.seed(1000 + k), 1 + (k as usize % 3))?;
        worst = worst.min(min_real(&expect_direct(&a, &grid)?));
    }
    ctx.push(Check::new("positivity", "psd-nonnegative", "A >= 0 implies <A> >= 0", worst, 0.0, 1e-10, Comparison::AtLeast));
    let mut worst = f64::INFINITY;
    for k in 0..20 {
        let b = random_hermitian(&pos, ctx.seed(2000 + k), 4)?;
        let gap = random_psd(&pos, ctx.seed(3000 + k), 2)?;
        let a = b.add(&gap)?;
        let d = expect_direct(&a, &grid)?.field().sub(expect_direct(&b, &grid)?.field())?;
        worst = worst.min(d.data().iter().map(|z| z.re).fold(f64::INFINITY, f64::min));
    }
    ctx.push(Check::new("positivity", "order-preserving", "A >= B implies <A> >= <B>", worst, 0.0, 1e-10, Comparison::AtLeast));
    let a = random_hermitian(&pos, ctx.seed(4000), 5)?;
    let mut prev: Option<PhaseFunction> = None;
    let mut worst = f64::INFINITY;
    for j in 0..=8 {
        let r = -1.0 + 0.25 * j as f64;
        let e = expect_direct(&spectral_family(&a, r)?, &grid)?;
        if let Some(p) = &prev {
            let d = e.field().sub(p.field())?;
            worst = worst.min(d.data().iter().map(|z| z.re).fold(f64::INFINITY, f64::min));
        }
        prev = Some(e);
    }
    ctx.push(Check::new(
        "positivity",
        "spectral-family-monotone",
        "r <= s implies <E_r> <= <E_s>",
        worst,
        0.0,
        1e-10,
        Comparison::AtLeast,
    ));
    Ok(())
}

fn theorem8(ctx: &mut Ctx) -> Result<()> {
    let disp = ctx.display()?;
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let a = random_hermitian(&ctx.pos, ctx.seed(5000 + k), 1 + (k as usize % 5))?;
        let d = expect_direct(&a, &disp)?;
        let r = expect_kernel_route(&a, &disp)?;
        worst = worst.max(d.max_abs_diff(&r));
    }
    ctx.push(Check::deviation(
        "routes",
        "direct-vs-kernel-route",
        "<A> = (2pi)^(3m/2) gamma(F_I(SK(A) o tau))",
        worst,
        1e-6,
    ));
    Ok(())
}

/// A = Σ_{k<6} c_k E_{h_k}.
fn hermite_span_operator(pos: &Grid, coeffs: &[f64]) -> Result<OperatorMatrix> {
    let hs = hermite_basis(pos, coeffs.len())?;
    let mut acc = OperatorMatrix::zeros(pos.clone());
    for (h, &ck) in hs.iter().zip(coeffs) {
        acc = acc.add(&projector(h)?.scale(c(ck)))?;
    }
    Ok(acc)
}

fn inverse(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng(6000);
    let mut sets: Vec<Vec<f64>> = vec![(0..6).map(|k| 1.0 / (k as f64 + 1.0)).collect()];
    for _ in 0..2 {
        sets.push((0..6).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let mut worst: f64 = 0.0;
    for coeffs in &sets {
        let a = hermite_span_operator(&ctx.pos, coeffs)?;
        let g = expect_kernel_route(&a, &ctx.inv)?;
        let back = inverse_transform(&g, &ctx.pos, ctx.cutoff)?;
        worst = worst.max(back.relative_frobenius_error(&a));
    }
    ctx.push(Check::deviation(
        "round-trip",
        "inverse-of-hermite-span",
        "<.>^-1(<A>) = A",
        worst,
        1e-3,
    ));
    Ok(())
}

fn coherent_battery(pos: &Grid) -> Result<Vec<StateVector>> {
    [(0.0, 0.0), (1.0, -0.5), (-1.5, 1.0)]
        .iter()
        .map(|&(q, p)| make_coherent(pos, &CoherentLabel::new(vec![q], vec![p])?))
        .collect()
}

fn pairing(ctx: &mut Ctx) -> Result<()> {
    let pos = ctx.pos.clone();
    let grid = pairing_grid(&pos)?;
    let hs = hermite_basis(&pos, 4)?;
    let coh = coherent_battery(&pos)?;
    let ops: Vec<OperatorMatrix> = (0..10u64)
        .map(|k| random_operator(&pos, ctx.seed(7000 + k), 3))
        .collect::<Result<_>>()?;
    let symbols: Vec<PhaseFunction> = ops.iter().map(|a| expect_kernel_route(a, &grid)).collect::<Result<_>>()?;
    let ladder = ctx.cfg.ladder.clone();
    let mut errors = vec![0.0f64; ladder.len()];
    let mut per_triple_monotone = true;
    for phi in &hs {
        for psi in &coh {
            let mults = ladder
                .iter()
                .map(|&n| pairing_multiplier(phi, psi, n))
                .collect::<Result<Vec<_>>>()?;
            for (a, g) in ops.iter().zip(&symbols) {
                let want = a.matrix_element(phi, psi)?;
                let errs = mults
                    .iter()
                    .map(|s| Ok((pair(s, g)? - want).norm() / (1.0 + want.norm())))
                    .collect::<Result<Vec<f64>>>()?;
                per_triple_monotone &= LadderResult::new("", &ladder, errs.clone()).non_increasing;
                for (e, v) in errors.iter_mut().zip(errs) {
                    *e = e.max(v);
                }
            }
        }
    }
    let top = *errors.last().expect("ladder is non-empty");
    ctx.push(Check::deviation(
        "pairing",
        "pairing-at-top-of-ladder",
        "lim_N int S_phipsiN <A> = <phi, A psi>",
        top,
        1e-2,
    ));
    ctx.push(Check::new(
        "pairing",
        "pairing-monotone-per-triple",
        "error non-increasing in N for every (phi, psi, A)",
        if per_triple_monotone { 1.0 } else { 0.0 },
        1.0,
        0.0,
        Comparison::Within,
    ));
    ctx.ladders.push(LadderResult::new("pairing-worst-relative-error", &ladder, errors));

    evaluation(ctx, &grid, &ops)
}

fn evaluation(ctx: &mut Ctx, grid: &Grid, ops: &[OperatorMatrix]) -> Result<()> {
    let pos = ctx.pos.clone();
    let n = *ctx.cfg.ladder.last().expect("ladder is non-empty");
    // S_θ(q0,p0) evaluates at (q0, p0)
    let label = CoherentLabel::new(vec![0.5], vec![-1.0])?;
    let th = make_coherent(&pos, &label)?;
    let s = pairing_multiplier(&th, &th, n)?;
    let mut worst: f64 = 0.0;
    let mut targets: Vec<OperatorMatrix> = ops.iter().take(4).cloned().collect();
    targets.push(projector(&make_coherent(&pos, &CoherentLabel::origin(1))?)?);
    let mut syms = Vec::new();
    for a in &targets {
        let g = expect_kernel_route(a, grid)?;
        worst = worst.max((pair(&s, &g)? - expect_at(a, &label)?).norm());
        syms.push(g);
    }
    ctx.push(Check::deviation(
        "evaluation",
        "coherent-pairing-is-evaluation",
        "S_theta(q0,p0) = delta_(q0,p0)",
        worst,
        1e-3,
    ));

    // S_{√2 x θ}(G) = G(0) + ½ ΔG(0), with ΔG from central differences of ⟨A⟩
    let h1 = hermite_basis(&pos, 2)?.remove(1);
    let s1 = pairing_multiplier(&h1, &h1, n)?;
    let step = 1e-2;
    let mut worst_pair: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    for (a, g) in targets.iter().zip(&syms) {
        let at = |q: f64, p: f64| -> Result<Complex64> { expect_at(a, &CoherentLabel::new(vec![q], vec![p])?) };
        let g0 = at(0.0, 0.0)?;
        let lap = (at(step, 0.0)? + at(-step, 0.0)? + at(0.0, step)? + at(0.0, -step)? - g0 * 4.0) / (step * step);
        let fd = g0 + lap * 0.5;
        worst_pair = worst_pair.max((pair(&s1, g)? - fd).norm());
        worst_exact = worst_exact.max((a.matrix_element(&h1, &h1)? - fd).norm());
    }
    let anchor = "S_(sqrt2 x theta)(G) = G(0) + (G_uu + G_vv)(0)/2";
    ctx.push(Check::deviation("evaluation", "h1-pairing-vs-finite-differences", anchor, worst_pair, 1e-3));
    ctx.push(Check::deviation("evaluation", "h1-matrix-element-vs-finite-differences", anchor, worst_exact, 1e-3));
    Ok(())
}

fn remark17(ctx: &mut Ctx) -> Result<()> {
    let pos = ctx.pos.clone();
    let m = ctx.cfg.m as i32;
    let wgrid = wigner_grid(&pos)?;
    let mut states = hermite_basis(&pos, 2)?;
    states.push(make_coherent(&pos, &CoherentLabel::new(vec![1.0], vec![-0.5])?)?);
    let (mut printed, mut consistent) = (0.0f64, 0.0f64);
    for psi in &states {
        let e = expect_kernel_route(&projector(psi)?, &wgrid)?;
        let h = husimi(psi, psi)?;
        printed = printed.max(e.field().max_abs_diff(&h.field().scale(c((PI / 2.0).powi(m)))));
        consistent = consistent.max(e.field().max_abs_diff(&h.field().scale(c((2.0 * PI).powi(m)))));
    }
    ctx.push(Check::deviation("bridges", "projector-vs-husimi", "<E_psi> = (pi/2)^m H(psi,psi)", printed, 1e-6));
    ctx.push(
        Check::deviation("bridges", "projector-vs-husimi-2pi", "<E_psi> = (2pi)^m H(psi,psi)", consistent, 1e-6)
            .advisory(),
    );

    // ⟨Op^W(a)⟩ = (2π)^m ω∗a; for a = e^{-|z-c|²/s} this is (s/(1+s))^m e^{-|z-c|²/(1+s)}
    let disp = ctx.display()?;
    let mut worst: f64 = 0.0;
    for (cq, cp, s) in [(0.0, 0.0, 1.0), (1.0, -0.5, 2.0), (-0.5, 1.0, 0.5)] {
        let gauss = move |q: f64, p: f64, w: f64| (-((q - cq).powi(2) + (p - cp).powi(2)) / w).exp();
        let a = PhaseFunction::synthetic(&ctx.inv, |q, p| c(gauss(q[0], p[0], s)))?;
        let e = expect_kernel_route(&weyl_quantize(&a, &pos)?, &disp)?;
        let want = PhaseFunction::synthetic(&disp, |q, p| c(s / (1.0 + s) * gauss(q[0], p[0], 1.0 + s)))?;
        worst = worst.max(e.max_abs_diff(&want));
    }
    ctx.push(Check::deviation("bridges", "weyl-symbol-smoothing", "<Op^W(a)> = (2pi)^m omega * a", worst, 1e-5));

    let n = *ctx.cfg.ladder.last().expect("ladder is non-empty");
    let hs = hermite_basis(&pos, 2)?;
    let th = make_coherent(&pos, &CoherentLabel::origin(1))?;
    let moved = make_coherent(&pos, &CoherentLabel::new(vec![1.0], vec![-0.5])?)?;
    let mut worst: f64 = 0.0;
    for (phi, psi) in [(&th, &th), (&hs[1], &hs[0]), (&moved, &hs[1])] {
        let r = s_relations_check(phi, psi, n)?;
        worst = worst.max(r.wigner_deviation).max(r.husimi_deviation);
    }
    ctx.push(Check::deviation(
        "bridges",
        "wigner-husimi-from-pairing",
        "W = 2^m e^(-|.|^2) * S and H = e^(-|.|^2/2) * S",
        worst,
        1e-3,
    ));
    Ok(())
}

fn star(ctx: &mut Ctx) -> Result<()> {
    let (pos, inv, n) = (ctx.pos.clone(), ctx.inv.clone(), ctx.cutoff);
    let sym = |a: &OperatorMatrix| expect_kernel_route(a, &inv);
    let ops: Vec<OperatorMatrix> = (0..21u64)
        .map(|k| random_operator(&pos, ctx.seed(8000 + k), 3))
        .collect::<Result<_>>()?;
    let syms: Vec<PhaseFunction> = ops.iter().map(sym).collect::<Result<_>>()?;

    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let (i, j) = (2 * k, 2 * k + 1);
        let prod = star_operator_route(&syms[i], &syms[j], n)?;
        worst = worst.max(relative(&prod, &sym(&ops[i].mul(&ops[j])?)?));
    }
    ctx.push(Check::deviation("algebra", "product-is-homomorphic", "<A> x <B> = <AB>", worst, 1e-3));

    let mut worst: f64 = 0.0;
    for k in 0..3 {
        let (a, b, cc) = (&syms[3 * k], &syms[3 * k + 1], &syms[3 * k + 2]);
        let left = star_operator_route(&star_operator_route(a, b, n)?, cc, n)?;
        let right = star_operator_route(a, &star_operator_route(b, cc, n)?, n)?;
        worst = worst.max(relative(&left, &right));
    }
    ctx.push(Check::deviation("algebra", "associativity", "(F x G) x H = F x (G x H)", worst, 1e-3));

    let (mut anti, mut comm, mut self_bracket) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..3 {
        let (i, j) = (2 * k, 2 * k + 1);
        let ab = bracket(&syms[i], &syms[j], n)?;
        let ba = bracket(&syms[j], &syms[i], n)?;
        anti = anti.max(ab.field().add(ba.field())?.max_abs() / ab.field().max_abs());
        self_bracket = self_bracket.max(bracket(&syms[i], &syms[i], n)?.field().max_abs());
        let want = sym(&ops[i].commutator(&ops[j])?.scale(Complex64::new(0.0, 1.0)))?;
        comm = comm.max(relative(&ab, &want));
    }
    ctx.push(Check::deviation("algebra", "bracket-antisymmetric", "{H,G} = -{G,H}", anti, 1e-10));
    ctx.push(Check::deviation("algebra", "bracket-self", "{G,G} = 0", self_bracket, 1e-10));
    ctx.push(Check::deviation("algebra", "bracket-is-commutator", "{<A>,<B>} = <i[A,B]>", comm, 1e-3));

    // unit, idempotent projector and the canonical commutator
    let one = sym(&OperatorMatrix::identity(pos.clone()))?;
    let dev = relative(&star_operator_route(&one, &syms[20], n)?, &syms[20]);
    ctx.push(Check::deviation("star", "identity-is-unit", "<I> x <A> = <A>", dev, 1e-3));
    let th = make_coherent(&pos, &CoherentLabel::origin(1))?;
    let e = sym(&projector(&th)?)?;
    let dev = star_operator_route(&e, &e, n)?.max_abs_diff(&e);
    ctx.push(Check::deviation("star", "projector-idempotent", "<E> x <E> = <E>", dev, 1e-3));
    let out = Grid::phase(SampledLine::midpoint(3.0, 16)?, 1)?;
    let q = sym(&op_position(&pos, 0)?)?;
    let p = sym(&op_momentum(&pos, 0)?)?;
    let diff = star_operator_route_on(&q, &p, n, &out)?
        .field()
        .sub(star_operator_route_on(&p, &q, n, &out)?.field())?;
    let dev = diff.data().iter().map(|z| (z - Complex64::new(0.0, 1.0)).norm()).fold(0.0, f64::max);
    ctx.push(Check::deviation("star", "canonical-commutator", "<Q> x <P> - <P> x <Q> = i", dev, 1e-2));

    kernel_route(ctx, &e, &out)
}

fn kernel_route(ctx: &mut Ctx, e: &PhaseFunction, out: &Grid) -> Result<()> {
    let quad = QuadSpec::default();
    let n = ctx.cutoff;
    let reference = star_operator_route_on(e, e, n, out)?;
    let k = star_kernel_route(e, e, KERNEL_DEFAULT_N, &quad, out)?;
    ctx.push(Check::deviation(
        "kernel-route",
        "kernel-vs-operator-route",
        "<AB>(z) = lim_N int int <A>(z') <B>(z'') (Omega_N * e^(2i Delta))(z,z',z'') dz' dz''",
        relative(&k, &reference),
        5e-2,
    ));
    let moved = make_coherent(&ctx.pos, &CoherentLabel::new(vec![0.5], vec![-0.3])?)?;
    let f = expect_kernel_route(&projector(&moved)?, &ctx.inv)?;
    let mixed = star_kernel_route(e, &f, KERNEL_DEFAULT_N, &quad, out)?;
    let mixed_ref = star_operator_route_on(e, &f, n, out)?;
    ctx.push(Check::deviation(
        "kernel-route",
        "kernel-vs-operator-route-mixed",
        "<AB> for two different coherent projectors",
        relative(&mixed, &mixed_ref),
        5e-2,
    ));
    let printed = star_kernel_route_printed(e, &f, KERNEL_DEFAULT_N, &quad, out)?;
    ctx.push(
        Check::deviation(
            "kernel-route",
            "printed-kernel-vs-operator-route",
            "<AB> with Omega_N * e^(-2i Delta)",
            relative(&printed, &mixed_ref),
            5e-2,
        )
        .advisory(),
    );
    ctx.push(
        Check::deviation(
            "kernel-route",
            "printed-kernel-vs-reversed-product",
            "Omega_N * e^(-2i Delta) against <BA>",
            relative(&printed, &star_operator_route_on(&f, e, n, out)?),
            5e-2,
        )
        .advisory(),
    );
    let flipped = star_kernel_route(&f.conj(), &e.conj(), KERNEL_DEFAULT_N, &quad, out)?;
    ctx.push(Check::deviation(
        "kernel-route",
        "kernel-route-conjugation",
        "conj(G x H) = conj(H) x conj(G)",
        mixed.conj().max_abs_diff(&flipped),
        1e-6,
    ));
    // {E, F} by the sin kernel against i(E×F - F×E) from matrices
    let sin = bracket_sin_kernel(e, &f, KERNEL_DEFAULT_N, &quad, out)?;
    let want = sym_bracket_on(e, &f, n, out)?;
    ctx.push(
        Check::deviation(
            "kernel-route",
            "sin-kernel-bracket",
            "{H,G} = -2 int int H G (Omega_N * sin(2 Delta))",
            sin.max_abs_diff(&want) / want.field().max_abs().max(1e-300),
            5e-2,
        )
        .advisory(),
    );
    let ladder = ctx.cfg.ladder.clone();
    let errors = ladder
        .iter()
        .map(|&nk| Ok(relative(&star_kernel_route(e, e, nk, &quad, out)?, &reference)))
        .collect::<Result<Vec<f64>>>()?;
    ctx.ladders.push(LadderResult::new("kernel-route-relative-error", &ladder, errors));
    ctx.notes.insert("convolution_reading".into(), CONVOLUTION_READING.into());
    ctx.notes.insert("kernel_route_orientation".into(), "e^(+2i Delta); e^(-2i Delta) gives the reversed product".into());
    ctx.notes.insert("kernel_route_cutoff".into(), KERNEL_DEFAULT_N.to_string());
    ctx.notes.insert(
        "kernel_route_quadrature".into(),
        format!("{} Gauss-Legendre nodes per axis on [-{}, {}]", quad.nodes, quad.half_width, quad.half_width),
    );
    Ok(())
}

fn sym_bracket_on(h: &PhaseFunction, g: &PhaseFunction, n: usize, out: &Grid) -> Result<PhaseFunction> {
    let hg = star_operator_route_on(h, g, n, out)?;
    let gh = star_operator_route_on(g, h, n, out)?;
    let d = hg.field().sub(gh.field())?.scale(Complex64::new(0.0, 1.0));
    PhaseFunction::new(d, crate::transforms::Provenance::Direct)
}
