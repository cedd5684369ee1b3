use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use psqm::coherent::{expect_direct, make_coherent, CoherentLabel};
use psqm::duality::{pair, pairing_grid, pairing_multiplier};
use psqm::io;
use psqm::numerics::{Grid, SampledLine};
use psqm::star::{bracket, star_kernel_route, star_operator_route, QuadSpec, KERNEL_DEFAULT_N};
use psqm::transforms::{
    default_cutoff, expect_kernel_route, husimi, inverse_transform, inversion_position, weyl_quantize,
    wigner, PhaseFunction, DEFAULT_MARGIN,
};
use psqm::verify::{run_scenario, VerifyConfig, SCENARIOS};
use psqm::{PsqmError, Result};

#[derive(Parser)]
#[command(name = "psqm", version, about = "Coherent-state phase-space transforms and the star product")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Operator,
    Kernel,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutGrid {
    /// 64x64 (m=1) on [-L/2, L/2]
    Display,
    /// the grid `invert`, `product` and `bracket` expect
    Inversion,
    /// the grid `pair` integrates on
    Pairing,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a coherent state θ_qp
    Coherent {
        /// q per axis, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p: Vec<f64>,
        #[arg(long = "L", default_value_t = 8.0)]
        half_width: f64,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// ⟨A⟩ of an operator file
    Expect {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, value_enum, default_value = "display")]
        grid: OutGrid,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        /// evaluate one quadratic form per point instead of the kernel route
        #[arg(long)]
        direct: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wigner function W(ψ,φ)
    Wigner {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Husimi function H(ψ,φ)
    Husimi {
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Weyl quantisation of a symbol sampled on an inversion grid
    Weyl {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regularised inverse of ⟨·⟩ for a phase function on an inversion grid
    Invert {
        #[arg(long)]
        phase: PathBuf,
        /// cutoff index; defaults to the largest N the grid tolerates
        #[arg(long = "N")]
        cutoff: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// ∫ S_φψN ⟨A⟩ against ⟨φ, Aψ⟩ along an N ladder
    Pair {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        op: PathBuf,
        #[arg(long = "N", value_delimiter = ',', default_value = "4,6,8")]
        ladder: Vec<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// G × H
    Product {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value = "operator")]
        route: Route,
        #[arg(long = "N")]
        cutoff: Option<usize>,
        /// output grid of the kernel route: half width and points per axis
        #[arg(long, default_value = "3,16", value_delimiter = ',')]
        kernel_grid: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// {H, G} = i(H×G - G×H)
    Bracket {
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long = "N")]
        cutoff: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification battery and print its JSON report
    Verify {
        #[arg(long, default_value = "all", value_parser = clap::builder::PossibleValuesParser::new(SCENARIOS))]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// grid overrides, e.g. n=64 or n=64,L=8
        #[arg(long)]
        grid: Option<String>,
        #[arg(long = "N", value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

enum Outcome {
    Pass,
    CheckFailed,
}

#[derive(Serialize)]
struct PairReport {
    n: Vec<usize>,
    values: Vec<[f64; 2]>,
    exact: [f64; 2],
    errors: Vec<f64>,
    non_increasing: bool,
}

fn phase_grid(pos: &Grid, which: OutGrid, margin: f64) -> Result<Grid> {
    match which {
        OutGrid::Display => Grid::display(pos.axis(0), pos.dims()),
        OutGrid::Inversion => Grid::inversion(pos.axis(0), pos.dims(), margin),
        OutGrid::Pairing => pairing_grid(pos),
    }
}

fn cutoff_for(g: &PhaseFunction, n: Option<usize>) -> usize {
    n.unwrap_or_else(|| default_cutoff(g.grid()))
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Coherent { q, p, half_width, n, out } => {
            let label = CoherentLabel::new(q, p)?;
            let grid = Grid::position(SampledLine::midpoint(half_width, n)?, label.m())?;
            io::write_state(out, &make_coherent(&grid, &label)?)?;
        }
        Command::Expect { op, grid, margin, direct, out } => {
            let a = io::read_operator(op)?;
            let g = phase_grid(a.grid(), grid, margin)?;
            let e = if direct { expect_direct(&a, &g)? } else { expect_kernel_route(&a, &g)? };
            io::write_phase(out, &e)?;
        }
        Command::Wigner { psi, phi, out } => {
            io::write_phase(out, &wigner(&io::read_state(psi)?, &io::read_state(phi)?)?)?;
        }
        Command::Husimi { psi, phi, out } => {
            io::write_phase(out, &husimi(&io::read_state(psi)?, &io::read_state(phi)?)?)?;
        }
        Command::Weyl { symbol, out } => {
            let a = io::read_phase(symbol)?;
            io::write_operator(out, &weyl_quantize(&a, &inversion_position(a.grid())?)?)?;
        }
        Command::Invert { phase, cutoff, out } => {
            let g = io::read_phase(phase)?;
            let n = cutoff_for(&g, cutoff);
            info!("inverting with N={n}");
            io::write_operator(out, &inverse_transform(&g, &inversion_position(g.grid())?, n)?)?;
        }
        Command::Pair { phi, psi, op, ladder, report } => {
            let (phi, psi, a) = (io::read_state(phi)?, io::read_state(psi)?, io::read_operator(op)?);
            let g = expect_kernel_route(&a, &pairing_grid(psi.grid())?)?;
            let exact = a.matrix_element(&phi, &psi)?;
            let values = ladder
                .iter()
                .map(|&n| pair(&pairing_multiplier(&phi, &psi, n)?, &g))
                .collect::<Result<Vec<_>>>()?;
            let errors: Vec<f64> = values.iter().map(|v| (v - exact).norm()).collect();
            let non_increasing = errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
            let r = PairReport {
                n: ladder,
                values: values.iter().map(|v| [v.re, v.im]).collect(),
                exact: [exact.re, exact.im],
                errors,
                non_increasing,
            };
            emit(&serde_json::to_string_pretty(&r).expect("report serialises"), report)?;
            if !non_increasing {
                return Ok(Outcome::CheckFailed);
            }
        }
        Command::Product { a, b, route, cutoff, kernel_grid, out } => {
            let (g, h) = (io::read_phase(a)?, io::read_phase(b)?);
            let prod = match route {
                Route::Operator => star_operator_route(&g, &h, cutoff_for(&g, cutoff))?,
                Route::Kernel => {
                    let [hw, pts] = kernel_grid[..] else {
                        return Err(PsqmError::InvalidArgument("--kernel-grid takes half-width,points".into()));
                    };
                    let out = Grid::phase(SampledLine::midpoint(hw, pts as usize)?, g.m())?;
                    star_kernel_route(&g, &h, cutoff.unwrap_or(KERNEL_DEFAULT_N), &QuadSpec::default(), &out)?
                }
            };
            io::write_phase(out, &prod)?;
        }
        Command::Bracket { h, g, cutoff, out } => {
            let (h, g) = (io::read_phase(h)?, io::read_phase(g)?);
            let n = cutoff_for(&h, cutoff);
            io::write_phase(out, &bracket(&h, &g, n)?)?;
        }
        Command::Verify { suite, seed, grid, ladder, report } => {
            let mut cfg = VerifyConfig { seed, ..VerifyConfig::default() };
            if let Some(spec) = grid {
                cfg.apply_grid_spec(&spec)?;
            }
            if let Some(l) = ladder {
                cfg.ladder = l;
            }
            let r = run_scenario(&suite, &cfg)?;
            for c in r.failures() {
                eprintln!("FAIL {} ({}): value {:e}, target {:e}, tolerance {:e}", c.name, c.anchor, c.value, c.target, c.tolerance);
            }
            emit(&r.to_json(), report)?;
            if !r.passed {
                return Ok(Outcome::CheckFailed);
            }
        }
    }
    Ok(Outcome::Pass)
}

fn emit(json: &str, path: Option<PathBuf>) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, format!("{json}\n"))?),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn init_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("PSQM_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("PSQM_THREADS must be a positive integer, got '{v}'"))?;
    if n == 0 {
        return Err("PSQM_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                PsqmError::IllPosed { .. } | PsqmError::BudgetExceeded { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
