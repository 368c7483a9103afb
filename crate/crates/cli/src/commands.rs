//! Subcommand implementations. Each returns the process exit status.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cpdirac_core::hamiltonian::{
    build_cp_class, default_reality_tol, envelope_similarity, matrix_market, reality_report,
    spectrum, spectrum_checked, EnergySpectrum, GridSpec,
};
use cpdirac_core::ode::OdeTolerance;
use cpdirac_core::stationary::{
    classify_localization, max_relative_deviation, solve, BoundaryConditionAtOrigin, Route,
    SolveSettings, SpinorSolution,
};
use cpdirac_core::verification::{run_suite, CheckStatus, SpectralConfig, SuiteConfig};
use cpdirac_core::{catalog, symmetry_report, CustomPotential, Family, PotentialInstance};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{number_tag, resolve, with_suffix, write_atomic};

/// Family used when none is given: the exponential row of figure 1.
const DEFAULT_FAMILY: Family = Family::Exp;

fn custom_potential(expr: &str) -> Result<PotentialInstance> {
    thread_local! {
        static BUILTIN: meval::Context<'static> = meval::Context::new();
    }
    let parsed: meval::Expr = expr
        .parse()
        .with_context(|| format!("cannot parse W(x) = `{expr}`"))?;
    BUILTIN
        .with(|ctx| parsed.eval_with_context((("x", 0.5), ctx)))
        .with_context(|| format!("cannot evaluate W(x) = `{expr}`"))?;
    let w = move |x: f64| {
        BUILTIN.with(|ctx| parsed.eval_with_context((("x", x), ctx)).unwrap_or(f64::NAN))
    };
    Ok(PotentialInstance::custom(CustomPotential::new(expr, w)))
}

pub fn potential(cfg: &RunConfig) -> Result<PotentialInstance> {
    let family: Family = match cfg.family.as_deref() {
        Some(name) => name.parse()?,
        None => DEFAULT_FAMILY,
    };
    if family == Family::Custom {
        let expr = cfg
            .w_expr
            .as_deref()
            .context("--family custom needs an expression, e.g. --w 'x*exp(-x)'")?;
        return custom_potential(expr);
    }
    let (a, mu, n) = family.default_params();
    let p = PotentialInstance::new(
        family,
        cfg.a.unwrap_or(a),
        cfg.mu.unwrap_or(mu),
        cfg.n.unwrap_or(n),
    )?;
    if !p.is_conforming() {
        eprintln!(
            "warning: {} violates the row constraint {}",
            p.label(),
            family.constraint().describe()
        );
    }
    Ok(p)
}

fn grid(cfg: &RunConfig, p: &PotentialInstance, n: usize) -> Result<GridSpec> {
    let l = match cfg.grid_l {
        Some(l) => l,
        None => p.auto_window()?,
    };
    Ok(GridSpec::new(l, n)?)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    write_atomic(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn potential_params(p: &PotentialInstance) -> Value {
    json!({
        "label": p.label(),
        "family": p.family(),
        "A": p.a(),
        "mu": p.mu(),
        "n": p.n(),
        "conforming": p.is_conforming(),
    })
}

pub fn catalog_cmd(cfg: &RunConfig) -> Result<i32> {
    let rows = catalog();
    outln!(
        "{:<11} {:<19} {:<8} {:<10} {:<30} remarks",
        "family", "subclass", "A, mu", "localized", "W(x)"
    );
    for row in &rows {
        outln!(
            "{:<11} {:<19} {:<8} {:<10} {:<30} {}",
            row.family.name(),
            format!("{:?}", row.subclass),
            row.constraints,
            row.localized,
            row.w_tex,
            row.remarks
        );
    }
    if let Some(path) = cfg.json.as_ref().or(cfg.out.as_ref()) {
        write_json(path, &rows)?;
    }
    Ok(0)
}

pub fn symmetry_cmd(cfg: &RunConfig) -> Result<i32> {
    let p = potential(cfg)?;
    let grid = grid(cfg, &p, cfg.grid_n)?;
    let op = build_cp_class(&grid, cfg.mass, &p)?;
    let report = symmetry_report(&op)?;
    outln!("{}", report.label);
    outln!("  grid               L = {}, N = {}, h = {:.6e}", report.grid_half_width, report.grid_n, report.grid_h);
    outln!("  hermiticity defect {:.6e}", report.hermiticity_defect);
    outln!("  cp defect          {:.6e} (relative {:.3e})", report.cp_defect, report.cp_relative());
    outln!("  pt defect          {:.6e}", report.pt_defect);
    outln!("  gamma5 check       {:.6e}", report.gamma5_check);
    let path = resolve(cfg.out.as_deref().or(cfg.json.as_deref()), "symmetry.json");
    write_json(&path, &report)?;
    Ok(0)
}

struct SweepRow {
    n: usize,
    h: f64,
    bulk_max_imag: f64,
    max_imag: f64,
}

pub fn spectrum_cmd(cfg: &RunConfig) -> Result<i32> {
    let p = potential(cfg)?;
    if !cfg.sweep.is_empty() {
        return spectrum_sweep(cfg, &p);
    }
    let grid = grid(cfg, &p, cfg.grid_n)?;
    let op = build_cp_class(&grid, cfg.mass, &p)?;
    let tol = cfg
        .reality_tol
        .unwrap_or_else(|| default_reality_tol(grid.h(), op.scale()));
    let (matrix, spec) = if cfg.envelope {
        let t = envelope_similarity(&op, |x| p.rho(x))?;
        let spec = spectrum(&t, tol)?;
        (t, spec)
    } else {
        let spec = spectrum_checked(&op, &p, tol, cfg.max_cond)?;
        (op.matrix().clone(), spec)
    };
    let cutoff = 0.5 / grid.h();
    let reality = reality_report(&spec, tol, Some(cutoff));
    outln!("{} on L = {}, N = {}", p.label(), grid.half_width(), grid.len());
    outln!(
        "  {} eigenvalues, {} real within {:.3e}; max |Im| = {:.3e}; bulk (|Re| <= {:.3}) max |Im| = {:.3e}",
        reality.n_total, reality.n_real, tol, reality.max_imag, cutoff, reality.bulk_max_imag
    );
    outln!("  conjugate pairing residual {:.3e}", reality.pairing_residual);

    let path = resolve(cfg.out.as_deref(), "spectrum.json");
    write_json(
        &path,
        &json!({
            "potential": potential_params(&p),
            "mass": cfg.mass,
            "grid": { "half_width": grid.half_width(), "n": grid.len(), "h": grid.h() },
            "envelope_transformed": cfg.envelope,
            "spectrum": spectrum_value(&spec)?,
            "reality": reality,
        }),
    )?;
    if let Some(mm) = &cfg.matrix_out {
        write_atomic(mm, &matrix_market(&matrix))?;
    }
    Ok(0)
}

fn spectrum_value(spec: &EnergySpectrum) -> Result<Value> {
    Ok(serde_json::to_value(spec)?)
}

fn spectrum_sweep(cfg: &RunConfig, p: &PotentialInstance) -> Result<i32> {
    let mut rows = Vec::new();
    for &n in &cfg.sweep {
        let grid = grid(cfg, p, n)?;
        let op = build_cp_class(&grid, cfg.mass, p)?;
        let spec = if cfg.envelope {
            spectrum(&envelope_similarity(&op, |x| p.rho(x))?, 0.0)?
        } else {
            spectrum_checked(&op, p, 0.0, cfg.max_cond)?
        };
        let reality = reality_report(&spec, 0.0, Some(0.5 / grid.h()));
        rows.push(SweepRow {
            n,
            h: grid.h(),
            bulk_max_imag: reality.bulk_max_imag,
            max_imag: reality.max_imag,
        });
    }
    let mut csv = String::from("n,h,bulk_max_imag,max_imag,ratio\n");
    outln!("{:>6} {:>14} {:>14} {:>14} {:>8}", "N", "h", "bulk max|Im|", "max|Im|", "ratio");
    for (i, r) in rows.iter().enumerate() {
        let ratio = if i == 0 { f64::NAN } else { rows[i - 1].bulk_max_imag / r.bulk_max_imag };
        outln!("{:>6} {:>14.6e} {:>14.6e} {:>14.6e} {:>8.3}", r.n, r.h, r.bulk_max_imag, r.max_imag, ratio);
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{}\n",
            r.n,
            r.h,
            r.bulk_max_imag,
            r.max_imag,
            if ratio.is_nan() { String::new() } else { format!("{ratio:.16e}") }
        ));
    }
    write_atomic(&resolve(cfg.out.as_deref(), "spectrum_sweep.csv"), &csv)?;
    Ok(0)
}

fn solve_settings(cfg: &RunConfig, p: &PotentialInstance, energy: f64) -> Result<SolveSettings> {
    let window = match cfg.window {
        Some(w) => w,
        None => p.auto_window()?,
    };
    Ok(SolveSettings {
        bc: BoundaryConditionAtOrigin::real(cfg.bc[0], cfg.bc[1])?,
        samples: cfg.sample_count(),
        tol: OdeTolerance::with_rel(cfg.tol),
        ..SolveSettings::new(cfg.mass, energy, window)
    })
}

fn solution_summary(sol: &SpinorSolution, path: &Path) -> Value {
    let abs = sol.abs_chi();
    json!({
        "route": sol.route,
        "energy": sol.energy,
        "path": path,
        "samples": sol.xs.len(),
        "window": sol.xs.last().copied().unwrap_or(0.0),
        "localized": sol.localized,
        "envelope_clamped": sol.envelope_clamped,
        "finite": sol.is_finite(),
        "max_abs_chi": abs.iter().copied().fold(0.0f64, f64::max),
        "abs_chi_left_edge": abs.first().copied(),
        "abs_chi_right_edge": abs.last().copied(),
    })
}

pub fn solve_cmd(cfg: &RunConfig) -> Result<i32> {
    let p = potential(cfg)?;
    let energies = if cfg.energies.is_empty() { vec![2.0 * cfg.mass] } else { cfg.energies.clone() };
    let routes = if cfg.routes.is_empty() { vec![Route::auto(&p)] } else { cfg.routes.clone() };
    let single = energies.len() == 1 && routes.len() == 1;
    let base = resolve(cfg.out.as_deref(), "solve.csv");

    let mut outputs = Vec::new();
    let mut deviations = Vec::new();
    for &energy in &energies {
        let settings = solve_settings(cfg, &p, energy)?;
        let mut solved = Vec::new();
        for &route in &routes {
            let sol = solve(&p, &settings, route)
                .with_context(|| format!("{} at eps = {energy} via {route}", p.label()))?;
            let path = if single {
                base.clone()
            } else {
                with_suffix(&base, &format!("{route}_e{}", number_tag(energy)))
            };
            write_atomic(&path, &sol.to_csv())?;
            outln!("{route:>22}  eps = {energy:<8} -> {}", path.display());
            outputs.push(solution_summary(&sol, &path));
            solved.push(sol);
        }
        for other in solved.iter().skip(1) {
            let dev = max_relative_deviation(&solved[0], other, 1e-10);
            outln!(
                "  max relative deviation {} vs {} at eps = {energy}: {dev:.3e}",
                solved[0].route, other.route
            );
            deviations.push(json!({
                "energy": energy,
                "reference": solved[0].route,
                "route": other.route,
                "max_relative_deviation": dev,
            }));
        }
    }
    if let Some(path) = &cfg.json {
        write_json(
            path,
            &json!({
                "potential": potential_params(&p),
                "mass": cfg.mass,
                "bc": cfg.bc,
                "ode_rel_tol": cfg.tol,
                "outputs": outputs,
                "deviations": deviations,
            }),
        )?;
    }
    Ok(0)
}

/// Caption parameters of a reproduced figure.
#[derive(Debug, Clone, Copy)]
pub struct FigureSpec {
    pub name: &'static str,
    pub family: Family,
    pub a: f64,
    pub mu: f64,
    /// Panel a energy; panel b uses its negative.
    pub energy: f64,
}

pub const FIG1: FigureSpec = FigureSpec {
    name: "fig1",
    family: Family::Exp,
    a: -1.0,
    mu: 0.2,
    energy: 2.0,
};

pub const FIG2: FigureSpec = FigureSpec {
    name: "fig2",
    family: Family::Lorentzian,
    a: 1.0,
    mu: 0.5,
    energy: 1.5,
};

pub fn figure_cmd(cfg: &RunConfig, fig: FigureSpec) -> Result<i32> {
    // caption values are in units of m = 1 with chi+(0) = 1, chi-(0) = 0
    let mass = 1.0;
    let p = PotentialInstance::new(fig.family, fig.a * mass, fig.mu * mass, 0)?;
    let panels: Vec<(&str, f64)> = match cfg.panel.as_deref() {
        Some("a") => vec![("a", fig.energy)],
        Some("b") => vec![("b", -fig.energy)],
        None => vec![("a", fig.energy), ("b", -fig.energy)],
        Some(other) => bail!("unknown panel `{other}`"),
    };
    let window = match cfg.window {
        Some(w) => w,
        None => p.auto_window()?,
    };
    let route = Route::auto(&p);
    let localization = classify_localization(&p);
    let rho0 = p.rho(0.0)?;
    let envelope_edge = (-(p.rho(window)?.min(p.rho(-window)?) - rho0) / 2.0).exp();

    for (panel, energy) in panels {
        let settings = SolveSettings {
            bc: BoundaryConditionAtOrigin::real(1.0, 0.0)?,
            samples: cfg.sample_count(),
            tol: OdeTolerance::with_rel(cfg.tol),
            ..SolveSettings::new(mass, energy * mass, window)
        };
        let sol = solve(&p, &settings, route)?;
        let default_name = format!("{}{panel}.csv", fig.name);
        let csv_path: PathBuf = match (&cfg.out, cfg.panel.is_some()) {
            (Some(out), true) => out.clone(),
            (Some(out), false) => with_suffix(out, panel),
            (None, _) => resolve(None, &default_name),
        };
        write_atomic(&csv_path, &sol.to_csv())?;
        let abs = sol.abs_chi();
        let mid = abs.len() / 2;
        let sidecar = json!({
            "figure": fig.name,
            "panel": panel,
            "caption": {
                "family": fig.family,
                "mass": mass,
                "A": fig.a * mass,
                "mu": fig.mu * mass,
                "energy": energy * mass,
                "bc": { "chi_plus_0": 1.0, "chi_minus_0": 0.0 },
            },
            "potential": potential_params(&p),
            "route": route,
            "window": window,
            "window_rule": if cfg.window.is_some() { "explicit" } else { "envelope growth" },
            "samples": sol.xs.len(),
            "ode_rel_tol": settings.tol.rel,
            "ode_abs_tol": settings.tol.abs,
            "localization": localization,
            "envelope_at_window_edge": envelope_edge,
            "envelope_clamped": sol.envelope_clamped,
            "finite": sol.is_finite(),
            "max_abs_chi": abs.iter().copied().fold(0.0f64, f64::max),
            "abs_chi_at_origin": abs[mid],
            "abs_chi_left_edge": abs[0],
            "abs_chi_right_edge": abs[abs.len() - 1],
            "csv": csv_path.file_name().and_then(|s| s.to_str()),
            "columns": SpinorSolution::CSV_HEADER,
            "version": env!("CARGO_PKG_VERSION"),
        });
        let sidecar_path = csv_path.with_extension("json");
        write_json(&sidecar_path, &sidecar)?;
        outln!(
            "{}{panel}: {} eps = {} -> {} (+ {})",
            fig.name,
            p.label(),
            energy * mass,
            csv_path.display(),
            sidecar_path.display()
        );
    }
    Ok(0)
}

pub fn verify_cmd(cfg: &RunConfig) -> Result<i32> {
    let families = match &cfg.families {
        Some(names) => names.iter().map(|n| n.parse()).collect::<Result<Vec<Family>, _>>()?,
        None => Family::CATALOG.to_vec(),
    };
    let suite = SuiteConfig {
        families,
        mass: cfg.mass,
        route_tol: cfg.tol,
        spectral: cfg.spectral.then(SpectralConfig::default),
        fault: cfg.fault,
        ..SuiteConfig::default()
    };
    let report = run_suite(&suite);
    for c in &report.checks {
        let tag = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        let detail = match &c.detail {
            Some(d) if c.status != CheckStatus::Pass => format!("  ({d})"),
            _ => String::new(),
        };
        outln!(
            "{tag}  {:<44} measured {:>11.4e}  tolerance {:>10.3e}{detail}",
            c.name,
            c.measured,
            c.tolerance
        );
    }
    let failed = report.failures().count();
    if report.empty {
        outln!("no checks selected (empty family list)");
    }
    outln!(
        "overall: {} ({} checks, {} failed)",
        if report.overall { "PASS" } else { "FAIL" },
        report.checks.len(),
        failed
    );
    if let Some(path) = cfg.json.as_ref().or(cfg.out.as_ref()) {
        write_atomic(path, &(report.to_json()? + "\n"))?;
    }
    Ok(if report.overall { 0 } else { 1 })
}
