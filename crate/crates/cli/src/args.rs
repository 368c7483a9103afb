//! Command-line flags and their merge into a [`RunConfig`].

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use cpdirac_core::stationary::Route;
use cpdirac_core::verification::Fault;

use crate::config::{parse_bc, parse_list, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "cpdirac",
    version,
    about = "Spectra, symmetries and stationary states of CP-symmetric Dirac Hamiltonians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the potential families with their envelopes and remarks.
    Catalog(Shared),
    /// Hermiticity, CP and PT defects of the assembled Hamiltonian.
    Symmetry(Shared),
    /// Eigenvalues of the discretized Hamiltonian and a reality summary.
    Spectrum(SpectrumArgs),
    /// Stationary spinor at a given energy along one or more routes.
    Solve(SolveArgs),
    /// Data for figure 1: exponential potential, A = -m, mu = 0.2m, eps = ±2m.
    Fig1(FigArgs),
    /// Data for figure 2: Lorentzian potential, A = m, mu = 0.5m, eps = ±1.5m.
    Fig2(FigArgs),
    /// Run the verification suite; exit status 0 iff every check passes.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Shared {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Potential family (see `catalog`), or `custom` together with --w.
    #[arg(long)]
    pub family: Option<String>,
    /// Amplitude A.
    #[arg(long = "A", allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Inverse length mu.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Power index of the odd-power family.
    #[arg(long)]
    pub n: Option<u32>,
    /// W(x) as an expression in x, for `--family custom`.
    #[arg(long = "w")]
    pub w_expr: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    /// Energy; repeat for several.
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Vec<f64>,
    /// Grid half-width L (default: envelope-based window).
    #[arg(long = "grid-L")]
    pub grid_l: Option<f64>,
    /// Number of interior grid nodes.
    #[arg(long = "grid-N")]
    pub grid_n: Option<usize>,
    /// chi_plus(0),chi_minus(0).
    #[arg(long, allow_hyphen_values = true)]
    pub bc: Option<String>,
    /// Half-width of the solution window (default: envelope-based).
    #[arg(long)]
    pub window: Option<f64>,
    /// Number of output samples of a solution (default 2N + 1).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Relative ODE tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Primary output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Machine-readable JSON summary.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Diagonalize the envelope-transformed matrix instead.
    #[arg(long)]
    pub envelope: bool,
    /// Comma-separated grid sizes for a convergence table of the bulk imaginary parts.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Also write the matrix in Matrix Market format.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
    /// Refuse matrices whose envelope condition number exceeds 10^max-cond.
    #[arg(long)]
    pub max_cond: Option<f64>,
    /// |Im eps| threshold for calling an eigenvalue real (default max(1e-8, 10 h² |H|)).
    #[arg(long)]
    pub reality_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    FirstOrder,
    SecondOrderPositive,
    SecondOrderNegative,
    Phi,
    ClosedFormA,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::FirstOrder => Route::FirstOrder,
            RouteArg::SecondOrderPositive => Route::SecondOrderPlus,
            RouteArg::SecondOrderNegative => Route::SecondOrderMinus,
            RouteArg::Phi => Route::PhiForm,
            RouteArg::ClosedFormA => Route::ClosedFormA,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Solution route; repeat to compare several.
    #[arg(long, value_enum)]
    pub route: Vec<RouteArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    A,
    B,
}

#[derive(Debug, Clone, Args)]
pub struct FigArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Panel a (positive energy) or b (negative energy); both if omitted.
    #[arg(long, value_enum)]
    pub panel: Option<Panel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    CpWiring,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Comma-separated families to check (default: whole catalog; empty string: none).
    #[arg(long)]
    pub families: Option<String>,
    /// Deliberately break the assembly to show the checks can fail.
    #[arg(long, value_enum)]
    pub inject_fault: Option<FaultArg>,
    /// Skip the dense eigensolves.
    #[arg(long)]
    pub no_spectral: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Catalog(_) => "catalog",
            Command::Symmetry(_) => "symmetry",
            Command::Spectrum(_) => "spectrum",
            Command::Solve(_) => "solve",
            Command::Fig1(_) => "fig1",
            Command::Fig2(_) => "fig2",
            Command::Verify(_) => "verify",
        }
    }

    pub fn shared(&self) -> &Shared {
        match self {
            Command::Catalog(s) | Command::Symmetry(s) => s,
            Command::Spectrum(a) => &a.shared,
            Command::Solve(a) => &a.shared,
            Command::Fig1(a) | Command::Fig2(a) => &a.shared,
            Command::Verify(a) => &a.shared,
        }
    }

    /// Config file (if any) with the command-line flags applied on top.
    pub fn to_config(&self) -> Result<RunConfig> {
        let shared = self.shared();
        let mut cfg = match &shared.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.command = self.name().to_string();
        shared.apply(&mut cfg)?;
        match self {
            Command::Spectrum(a) => {
                cfg.envelope |= a.envelope;
                if let Some(s) = &a.sweep {
                    cfg.sweep = parse_list(s)?;
                }
                set(&mut cfg.matrix_out, a.matrix_out.clone());
                if let Some(v) = a.max_cond {
                    cfg.max_cond = v;
                }
                set(&mut cfg.reality_tol, a.reality_tol);
            }
            Command::Solve(a) => {
                if !a.route.is_empty() {
                    cfg.routes = a.route.iter().map(|&r| r.into()).collect();
                }
            }
            Command::Fig1(a) | Command::Fig2(a) => {
                if let Some(p) = a.panel {
                    cfg.panel = Some(match p {
                        Panel::A => "a".into(),
                        Panel::B => "b".into(),
                    });
                }
            }
            Command::Verify(a) => {
                if let Some(list) = &a.families {
                    cfg.families = Some(parse_list(list)?);
                }
                if let Some(FaultArg::CpWiring) = a.inject_fault {
                    cfg.fault = Some(Fault::CpWiring);
                }
                if a.no_spectral {
                    cfg.spectral = false;
                }
            }
            Command::Catalog(_) | Command::Symmetry(_) => {}
        }
        Ok(cfg)
    }
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

impl Shared {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        set(&mut cfg.family, self.family.clone());
        set(&mut cfg.a, self.a);
        set(&mut cfg.mu, self.mu);
        set(&mut cfg.n, self.n);
        set(&mut cfg.w_expr, self.w_expr.clone());
        if let Some(m) = self.mass {
            cfg.mass = m;
        }
        if !self.energy.is_empty() {
            cfg.energies = self.energy.clone();
        }
        set(&mut cfg.grid_l, self.grid_l);
        if let Some(n) = self.grid_n {
            cfg.grid_n = n;
        }
        if let Some(bc) = &self.bc {
            cfg.bc = parse_bc(bc)?;
        }
        set(&mut cfg.window, self.window);
        set(&mut cfg.samples, self.samples);
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        set(&mut cfg.out, self.out.clone());
        set(&mut cfg.json, self.json.clone());
        Ok(())
    }
}
