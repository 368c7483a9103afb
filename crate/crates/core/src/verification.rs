//! Cross-checks of the catalog, the discretized operator and the solver
//! routes against independent oracles.
//!
//! Every check computes its reference value along a different code path
//! than the quantity it checks: closed forms against quadrature, the general
//! eigensolver against a symmetric one, integrated routes against each other
//! and against plane-wave solutions.

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::hamiltonian::{
    build_cp_class, build_cp_class_wired, derivative_matrix, envelope_similarity, reality_report,
    spectrum, GridSpec, UWiring,
};
use crate::ode::OdeTolerance;
use crate::potential::{CustomPotential, Family, PotentialInstance, Subclass};
use crate::quadrature::{self, SimpsonTolerance};
use crate::stationary::{
    closed_form_coefficients, closed_form_subclass_a, dirac_residual, max_relative_deviation,
    solve, BoundaryConditionAtOrigin, Route, SolveSettings,
};
use crate::symmetry::symmetry_report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: CheckStatus,
    #[serde(with = "nan_as_null")]
    pub measured: f64,
    #[serde(with = "nan_as_null")]
    pub tolerance: f64,
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// JSON has no NaN or infinity; non-finite values travel as `null` or a string.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(match Option::<Repr>::deserialize(d)? {
            None => f64::NAN,
            Some(Repr::Num(v)) => v,
            Some(Repr::Text(t)) if t == "-inf" => f64::NEG_INFINITY,
            Some(Repr::Text(_)) => f64::INFINITY,
        })
    }
}

impl CheckEntry {
    /// Passes when `measured <= tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64, params: Value) -> Self {
        Self {
            name: name.into(),
            status: if measured <= tolerance {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            measured,
            tolerance,
            params,
            detail: None,
        }
    }

    fn with_status(mut self, pass: bool) -> Self {
        self.status = if pass { CheckStatus::Pass } else { CheckStatus::Fail };
        self
    }

    fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn failed(name: impl Into<String>, tolerance: f64, params: Value, err: impl ToString) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::Fail,
            measured: f64::NAN,
            tolerance,
            params,
            detail: Some(err.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckEntry>,
    /// True when no check failed. Skipped checks do not count against it.
    pub overall: bool,
    pub empty: bool,
}

impl VerificationReport {
    pub fn from_checks(checks: Vec<CheckEntry>) -> Self {
        let overall = checks.iter().all(|c| c.status != CheckStatus::Fail);
        let empty = checks.is_empty();
        Self {
            checks,
            overall,
            empty,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    /// Checks whose name starts with `prefix`.
    pub fn group<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckEntry> + 'a {
        self.checks.iter().filter(move |c| c.name.starts_with(prefix))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Deliberate faults that the checks must detect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Assemble U = -W(-x) instead of W(-x).
    CpWiring,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub a: f64,
    pub mass: f64,
    pub half_width: f64,
    pub grids: Vec<usize>,
    /// Bulk spectrum is |Re eps| <= bulk_fraction / h.
    pub bulk_fraction: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            a: 0.5,
            mass: 1.0,
            half_width: 8.0,
            grids: vec![200, 400, 800],
            bulk_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub families: Vec<Family>,
    pub mass: f64,
    /// Grid size for the symmetry identities.
    pub grid_n: usize,
    pub rho_samples: usize,
    /// Energies for route equivalence, in units of the mass.
    pub route_energies: Vec<f64>,
    pub route_tol: f64,
    pub residual_grids: Vec<usize>,
    pub residual_energy: f64,
    /// `None` skips the dense eigensolves.
    pub spectral: Option<SpectralConfig>,
    pub fault: Option<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            families: Family::CATALOG.to_vec(),
            mass: 1.0,
            grid_n: 400,
            rho_samples: 101,
            route_energies: vec![1.5, -1.5, 2.0, -2.0],
            route_tol: 1e-9,
            residual_grids: vec![200, 400, 800],
            residual_energy: 2.0,
            spectral: Some(SpectralConfig::default()),
            fault: None,
        }
    }
}

fn conforming(family: Family) -> Result<PotentialInstance> {
    PotentialInstance::with_defaults(family)
}

fn linspace(l: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|i| -l + 2.0 * l * i as f64 / (count - 1) as f64)
        .collect()
}

/// Five-point central difference.
fn derivative5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Closed-form rho against quadrature of the odd part plus the tabulated
/// constant, and d rho/dx against W(x) - W(-x), on `samples` points per row.
pub fn check_rho_tables(families: &[Family], samples: usize) -> Vec<CheckEntry> {
    let mut out = Vec::new();
    for &family in families {
        let name = format!("rho-table/{family}");
        let p = match conforming(family) {
            Ok(p) => p,
            Err(e) => {
                out.push(CheckEntry::failed(format!("{name}/closed-form"), 1e-8, json!({}), e));
                continue;
            }
        };
        let params = |l: f64| json!({ "potential": p.label(), "window": l, "samples": samples });
        let l = match p.auto_window() {
            Ok(l) => l,
            Err(e) => {
                out.push(CheckEntry::failed(format!("{name}/closed-form"), 1e-8, json!({}), e));
                continue;
            }
        };
        let xs = linspace(l, samples);

        let offset = p.rho_closed_form(0.0).unwrap_or(0.0);
        let mut worst_value = 0.0f64;
        let mut worst_slope = 0.0f64;
        let mut error = None;
        for &x in &xs {
            let Some(closed) = p.rho_closed_form(x) else {
                error = Some("no closed form".to_string());
                break;
            };
            let integral = quadrature::integrate(
                |y| p.w(y) - p.w(-y),
                0.0,
                x,
                SimpsonTolerance::default(),
            );
            match integral {
                Ok(q) => {
                    let reference = offset + q;
                    worst_value = worst_value.max((closed - reference).abs() / reference.abs().max(1.0));
                }
                Err(e) => {
                    error = Some(e.to_string());
                    break;
                }
            }
            let step = 1e-3 * x.abs().max(1.0 / p.mu().abs()).min(1.0);
            let slope = derivative5(|t| p.rho_closed_form(t).unwrap_or(f64::NAN), x, step);
            let odd = p.w(x) - p.w(-x);
            worst_slope = worst_slope.max((slope - odd).abs() / odd.abs().max(1.0));
        }
        match error {
            Some(e) => out.push(CheckEntry::failed(format!("{name}/closed-form"), 1e-8, params(l), e)),
            None => {
                out.push(CheckEntry::at_most(format!("{name}/closed-form"), worst_value, 1e-8, params(l)));
                out.push(CheckEntry::at_most(format!("{name}/derivative"), worst_slope, 1e-6, params(l)));
            }
        }
    }
    if !families.is_empty() {
        // an even potential has no odd part, so rho is constant
        let even = PotentialInstance::custom(CustomPotential::new("x^2 cosh(x)", |x| x * x * x.cosh()));
        let worst = linspace(5.0, samples)
            .iter()
            .map(|&x| even.rho_quadrature(x).map(f64::abs).unwrap_or(f64::NAN))
            .fold(0.0f64, f64::max);
        out.push(CheckEntry::at_most(
            "rho-table/even-control",
            worst,
            1e-12,
            json!({ "potential": even.label(), "window": 5.0 }),
        ));
    }
    out
}

/// Generic phi-equation coefficient -R² ∓ R' + eps² - m² against the printed
/// sinh form with M² = m² + A², and the completed-square effective potential
/// ½[A sinh(mu x) ± mu/2]² - mu²/8, for the exponential row.
pub fn check_eq13_reduction(pairs: &[(f64, f64)], mass: f64, energy: f64) -> Vec<CheckEntry> {
    let mut out = Vec::new();
    for &(a, mu) in pairs {
        let params = json!({ "A": a, "mu": mu, "mass": mass, "energy": energy, "points": 101 });
        let p = match PotentialInstance::new(Family::Exp, a, mu, 0) {
            Ok(p) => p,
            Err(e) => {
                out.push(CheckEntry::failed(format!("reduction/A={a},mu={mu}/coefficient"), 1e-12, params, e));
                continue;
            }
        };
        let big_m2 = mass * mass + a * a;
        let l = 10.0 / mu.abs();
        let mut worst_coef = 0.0f64;
        let mut worst_square = 0.0f64;
        for x in linspace(l, 101) {
            let s = (mu * x).sinh();
            for sign in [1.0, -1.0] {
                let (r, dr) = (p.r(x), p.dr(x));
                let generic = -r * r - sign * dr + energy * energy - mass * mass;
                let printed = -a * a * s * s - sign * mu * a * s + energy * energy - big_m2;
                let scale = (r * r).max(dr.abs()).max(energy * energy).max(1.0);
                worst_coef = worst_coef.max((generic - printed).abs() / scale);

                // the completed square absorbs the constant A²/2 into M²
                let square = 0.5 * (a * s + sign * mu / 2.0).powi(2) - mu * mu / 8.0;
                let from_square = -2.0 * square + energy * energy - big_m2;
                worst_square = worst_square.max((generic - from_square).abs() / scale);
            }
        }
        out.push(CheckEntry::at_most(format!("reduction/A={a},mu={mu}/coefficient"), worst_coef, 1e-12, params.clone()));
        out.push(CheckEntry::at_most(format!("reduction/A={a},mu={mu}/completed-square"), worst_square, 1e-12, params.clone()));
        out.push(CheckEntry::at_most(
            format!("reduction/A={a},mu={mu}/mass-shift"),
            (big_m2 - mass * mass - p.r(0.0).powi(2)).abs(),
            1e-12,
            params,
        ));
    }
    out
}

fn route_entries(
    p: &PotentialInstance,
    label: &str,
    mass: f64,
    energies: &[f64],
    tol: f64,
    window: f64,
) -> Vec<CheckEntry> {
    let mut out = Vec::new();
    for &e in energies {
        let energy = e * mass;
        let name = format!("routes/{label}/eps={e}m");
        let mut settings = SolveSettings::new(mass, energy, window);
        settings.tol = OdeTolerance::with_rel(tol);
        let params = json!({
            "potential": p.label(), "mass": mass, "energy": energy,
            "window": window, "samples": settings.samples, "ode_rel_tol": tol,
        });
        let mut routes = vec![Route::FirstOrder, Route::second_order_for(energy), Route::PhiForm];
        if p.subclass() == Subclass::OddParity {
            routes.push(Route::ClosedFormA);
        }
        let solved: Result<Vec<_>> = routes.iter().map(|&r| solve(p, &settings, r)).collect();
        match solved {
            Ok(solutions) => {
                let reference = &solutions[0];
                let worst = solutions[1..]
                    .iter()
                    .map(|s| max_relative_deviation(reference, s, 1e-10))
                    .fold(0.0f64, f64::max);
                let names: Vec<&str> = routes.iter().map(|r| r.name()).collect();
                out.push(CheckEntry::at_most(name, worst, 1e-6, params).detail(names.join(",")));
            }
            Err(err) => out.push(CheckEntry::failed(name, 1e-6, params, err)),
        }
    }
    out
}

/// All integration routes (and the closed form for odd potentials) against
/// each other, plus every route against the free plane wave.
pub fn check_route_equivalence(
    families: &[Family],
    energies: &[f64],
    mass: f64,
    tol: f64,
) -> Vec<CheckEntry> {
    let per_family: Vec<Vec<CheckEntry>> = std::thread::scope(|scope| {
        let handles: Vec<_> = families
            .iter()
            .map(|&family| {
                scope.spawn(move || {
                    let name = format!("routes/{family}");
                    match conforming(family).and_then(|p| Ok((p.auto_window()?, p))) {
                        Ok((l, p)) => route_entries(&p, family.name(), mass, energies, tol, l),
                        Err(e) => vec![CheckEntry::failed(name, 1e-6, json!({}), e)],
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("route worker")).collect()
    });
    let mut out: Vec<CheckEntry> = per_family.into_iter().flatten().collect();
    if !families.is_empty() {
        out.extend(check_free_routes(mass, 1.5 * mass, tol));
    }
    out
}

fn check_free_routes(mass: f64, energy: f64, tol: f64) -> Vec<CheckEntry> {
    let free = PotentialInstance::custom(CustomPotential::new("0", |_| 0.0));
    let window = 10.0;
    let mut settings = SolveSettings::new(mass, energy, window);
    settings.tol = OdeTolerance::with_rel(tol);
    let k = (energy * energy - mass * mass).sqrt();
    let params = json!({ "potential": "free", "mass": mass, "energy": energy, "window": window });
    let mut out = Vec::new();
    for route in [Route::FirstOrder, Route::second_order_for(energy), Route::PhiForm, Route::ClosedFormA] {
        let name = format!("routes/free/{route}");
        match solve(&free, &settings, route) {
            Ok(sol) => {
                // bc (1, 0): chi+ = cos(kx), chi- = k sin(kx)/(eps + m)
                let worst = sol
                    .xs
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        let dp = (sol.chi_plus[i] - Complex64::new((k * x).cos(), 0.0)).norm();
                        let dm = (sol.chi_minus[i] - Complex64::new(k * (k * x).sin() / (energy + mass), 0.0)).norm();
                        dp.max(dm)
                    })
                    .fold(0.0f64, f64::max);
                out.push(CheckEntry::at_most(name, worst, 1e-6, params.clone()));
            }
            Err(e) => out.push(CheckEntry::failed(name, 1e-6, params.clone(), e)),
        }
    }
    out
}

/// Eigenvalues of the free operator from a symmetric eigensolve of m² - D².
pub fn free_spectrum_oracle(grid: &GridSpec, mass: f64) -> Vec<f64> {
    let d = derivative_matrix(grid);
    let n = grid.len();
    let d2 = d.transpose() * &d;
    let sq = Mat::<f64>::from_fn(n, n, |i, j| d2[(i, j)] + if i == j { mass * mass } else { 0.0 });
    let s = sq
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("symmetric eigensolve");
    let mut out: Vec<f64> = s
        .iter()
        .flat_map(|&v| {
            let r = v.max(0.0).sqrt();
            [r, -r]
        })
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Bulk imaginary parts for W = A x on a grid sequence, their halving ratios,
/// conjugate pairing, and the free spectrum against the symmetric oracle.
pub fn check_spectral_reality(cfg: &SpectralConfig) -> Vec<CheckEntry> {
    let mut out = Vec::new();
    let linear = match PotentialInstance::new(Family::OddPower, cfg.a, 1.0, 0) {
        Ok(p) => p,
        Err(e) => return vec![CheckEntry::failed("spectral/setup", 0.0, json!({}), e)],
    };
    let free = PotentialInstance::custom(CustomPotential::new("0", |_| 0.0));

    let mut bulk = Vec::new();
    for &n in &cfg.grids {
        let params = json!({
            "potential": linear.label(), "mass": cfg.mass, "half_width": cfg.half_width, "n": n,
        });
        let grid = match GridSpec::new(cfg.half_width, n) {
            Ok(g) => g,
            Err(e) => {
                out.push(CheckEntry::failed(format!("spectral/N={n}/bulk-imag"), 1e-4, params, e));
                bulk.push(f64::NAN);
                continue;
            }
        };
        let cutoff = cfg.bulk_fraction / grid.h();
        let transformed = build_cp_class(&grid, cfg.mass, &linear)
            .and_then(|op| envelope_similarity(&op, |x| linear.rho(x)));
        match transformed.and_then(|t| spectrum(&t, 0.0)) {
            Ok(spec) => {
                let report = reality_report(&spec, 0.0, Some(cutoff));
                bulk.push(report.bulk_max_imag);
                out.push(CheckEntry {
                    name: format!("spectral/N={n}/bulk-imag"),
                    status: CheckStatus::Pass,
                    measured: report.bulk_max_imag,
                    tolerance: f64::INFINITY,
                    params: json!({ "bulk_cutoff": cutoff, "n_lattice_band": report.n_lattice_band, "grid": params }),
                    detail: Some("recorded; judged by the ratio and finest-grid checks".into()),
                });
                out.push(CheckEntry::at_most(
                    format!("spectral/N={n}/pairing"),
                    report.pairing_residual,
                    1e-10,
                    params.clone(),
                ));
            }
            Err(e) => {
                bulk.push(f64::NAN);
                out.push(CheckEntry {
                    name: format!("spectral/N={n}/bulk-imag"),
                    status: CheckStatus::Skipped,
                    measured: f64::NAN,
                    tolerance: 1e-4,
                    params,
                    detail: Some(e.to_string()),
                });
            }
        }

        // free operator: general eigensolver against the symmetric oracle
        let name = format!("spectral/N={n}/free-oracle");
        let params = json!({ "potential": "free", "mass": cfg.mass, "half_width": cfg.half_width, "n": n });
        match build_cp_class(&grid, cfg.mass, &free).and_then(|op| spectrum(op.matrix(), 0.0)) {
            Ok(spec) => {
                let oracle = free_spectrum_oracle(&grid, cfg.mass);
                let mut re: Vec<f64> = spec.eigenvalues.iter().map(|e| e.re).collect();
                re.sort_by(|a, b| a.total_cmp(b));
                let diff = re.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
                out.push(CheckEntry::at_most(name, diff.max(spec.max_imag), 1e-10, params.clone()));
                out.push(CheckEntry::at_most(
                    format!("spectral/N={n}/free-pairing"),
                    crate::hamiltonian::conjugate_pairing_residual(&spec.eigenvalues),
                    1e-10,
                    params,
                ));
            }
            Err(e) => out.push(CheckEntry::failed(name, 1e-10, params, e)),
        }
    }

    for pair in 0..bulk.len().saturating_sub(1) {
        let (coarse, fine) = (bulk[pair], bulk[pair + 1]);
        let ratio = coarse / fine;
        let entry = CheckEntry {
            name: format!("spectral/ratio-N={}/{}", cfg.grids[pair], cfg.grids[pair + 1]),
            status: CheckStatus::Fail,
            measured: ratio,
            tolerance: 4.0,
            params: json!({ "coarse": coarse, "fine": fine, "accepted": [3.0, 5.0] }),
            detail: None,
        };
        out.push(entry.with_status((3.0..=5.0).contains(&ratio)));
    }
    if let (Some(&finest), Some(&n)) = (bulk.last(), cfg.grids.last()) {
        if !finest.is_nan() {
            out.push(CheckEntry::at_most(
                format!("spectral/N={n}/finest-bulk-imag"),
                finest,
                1e-4,
                json!({ "n": n }),
            ));
        }
    }
    out
}

/// Residual of the plane-wave closed form in the central-difference
/// stationary equations; it must shrink by a factor in [3, 5] per halving.
pub fn check_closed_form_convergence(
    families: &[Family],
    mass: f64,
    energy: f64,
    grids: &[usize],
) -> Vec<CheckEntry> {
    let mut out = Vec::new();
    for &family in families {
        if family.subclass() != Some(Subclass::OddParity) {
            continue;
        }
        let name = format!("closed-form/{family}");
        let run = || -> Result<Vec<f64>> {
            let p = conforming(family)?;
            let l = p.auto_window()?;
            let (a, b) = closed_form_coefficients(&p, mass, energy, &BoundaryConditionAtOrigin::default())?;
            grids
                .iter()
                .map(|&n| {
                    let grid = GridSpec::new(l, n)?;
                    let mut xs = Vec::with_capacity(n + 2);
                    xs.push(-l);
                    xs.extend_from_slice(grid.nodes());
                    xs.push(l);
                    let sol = closed_form_subclass_a(&p, mass, energy, a, b, &xs)?;
                    Ok(dirac_residual(&p, mass, energy, &xs, &sol.chi_plus, &sol.chi_minus))
                })
                .collect()
        };
        match run() {
            Ok(residuals) => {
                for i in 0..residuals.len().saturating_sub(1) {
                    let ratio = residuals[i] / residuals[i + 1];
                    let entry = CheckEntry {
                        name: format!("{name}/ratio-N={}/{}", grids[i], grids[i + 1]),
                        status: CheckStatus::Fail,
                        measured: ratio,
                        tolerance: 4.0,
                        params: json!({
                            "mass": mass, "energy": energy,
                            "coarse_residual": residuals[i], "fine_residual": residuals[i + 1],
                            "accepted": [3.0, 5.0],
                        }),
                        detail: None,
                    };
                    out.push(entry.with_status((3.0..=5.0).contains(&ratio)));
                }
            }
            Err(e) => out.push(CheckEntry::failed(name, 4.0, json!({}), e)),
        }
    }
    out
}

/// CP exactness, the Hermiticity-defect formula and PT-defect positivity.
pub fn check_symmetry_identities(
    families: &[Family],
    mass: f64,
    n: usize,
    fault: Option<Fault>,
) -> Vec<CheckEntry> {
    let wiring = match fault {
        Some(Fault::CpWiring) => UWiring::SignFlipped,
        None => UWiring::Mirrored,
    };
    let mut out = Vec::new();
    for &family in families {
        let name = format!("symmetry/{family}");
        let run = || -> Result<_> {
            let p = conforming(family)?;
            let grid = GridSpec::new(p.auto_window()?, n)?;
            let op = build_cp_class_wired(&grid, mass, &p, wiring)?;
            let report = symmetry_report(&op)?;
            let odd = grid
                .nodes()
                .iter()
                .map(|&x| (p.w(x) - p.w(-x)).abs())
                .fold(0.0f64, f64::max);
            Ok((p.label(), grid, report, odd))
        };
        match run() {
            Ok((label, grid, report, odd)) => {
                let params = json!({
                    "potential": label, "mass": mass, "half_width": grid.half_width(), "n": n,
                    "fault": fault,
                });
                out.push(CheckEntry::at_most(format!("{name}/cp"), report.cp_relative(), 1e-13, params.clone()));
                let herm = (report.hermiticity_defect - odd).abs() / odd.max(f64::MIN_POSITIVE);
                out.push(CheckEntry::at_most(format!("{name}/hermiticity"), herm, 1e-13, params.clone()));
                out.push(
                    CheckEntry {
                        name: format!("{name}/pt-positive"),
                        status: CheckStatus::Fail,
                        measured: report.pt_defect,
                        tolerance: 0.0,
                        params,
                        detail: None,
                    }
                    .with_status(report.pt_defect > 0.0),
                );
            }
            Err(e) => out.push(CheckEntry::failed(format!("{name}/cp"), 1e-13, json!({}), e)),
        }
    }
    out
}

/// Runs every check. An empty family list yields an empty report.
pub fn run_suite(config: &SuiteConfig) -> VerificationReport {
    if config.families.is_empty() {
        return VerificationReport::from_checks(Vec::new());
    }
    let mut checks = check_symmetry_identities(&config.families, config.mass, config.grid_n, config.fault);
    checks.extend(check_rho_tables(&config.families, config.rho_samples));
    checks.extend(check_eq13_reduction(&[(-1.0, 0.2), (-0.5, 1.0)], config.mass, 2.0 * config.mass));
    checks.extend(check_route_equivalence(
        &config.families,
        &config.route_energies,
        config.mass,
        config.route_tol,
    ));
    checks.extend(check_closed_form_convergence(
        &config.families,
        config.mass,
        config.residual_energy * config.mass,
        &config.residual_grids,
    ));
    if let Some(spectral) = &config.spectral {
        checks.extend(check_spectral_reality(spectral));
    }
    VerificationReport::from_checks(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_family_list_is_vacuous() {
        let cfg = SuiteConfig {
            families: vec![],
            ..SuiteConfig::default()
        };
        let report = run_suite(&cfg);
        assert!(report.empty && report.overall && report.checks.is_empty());
    }

    #[test]
    fn overall_is_conjunction() {
        let ok = CheckEntry::at_most("a", 1.0, 2.0, json!({}));
        let bad = CheckEntry::at_most("b", 3.0, 2.0, json!({}));
        let nan = CheckEntry::at_most("c", f64::NAN, 2.0, json!({}));
        assert!(!nan.passed());
        assert!(VerificationReport::from_checks(vec![ok.clone()]).overall);
        assert!(!VerificationReport::from_checks(vec![ok, bad]).overall);
    }

    #[test]
    fn symmetry_checks_pass_and_detect_fault() {
        let fams = [Family::Exp, Family::Sinh];
        let clean = check_symmetry_identities(&fams, 1.0, 40, None);
        assert!(clean.iter().all(CheckEntry::passed), "{clean:#?}");
        let faulty = check_symmetry_identities(&fams, 1.0, 40, Some(Fault::CpWiring));
        assert!(faulty.iter().any(|c| c.name.ends_with("/cp") && !c.passed()));
    }

    #[test]
    fn rho_tables_pass_for_catalog() {
        let checks = check_rho_tables(&Family::CATALOG, 21);
        assert!(checks.iter().all(CheckEntry::passed), "{checks:#?}");
    }

    #[test]
    fn reduction_identities_hold() {
        let checks = check_eq13_reduction(&[(-1.0, 0.2), (-0.5, 1.0)], 1.0, 2.0);
        assert_eq!(checks.len(), 6);
        assert!(checks.iter().all(CheckEntry::passed), "{checks:#?}");
    }

    #[test]
    fn free_oracle_matches_cosine_formula() {
        let grid = GridSpec::new(3.0, 9).unwrap();
        let h = grid.h();
        let mut expected: Vec<f64> = (1..=9)
            .flat_map(|k| {
                let c = (k as f64 * std::f64::consts::PI / 10.0).cos() / h;
                let e = (1.0 + c * c).sqrt();
                [e, -e]
            })
            .collect();
        expected.sort_by(|a, b| a.total_cmp(b));
        let oracle = free_spectrum_oracle(&grid, 1.0);
        for (a, b) in oracle.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn report_json_round_trip() {
        let report = VerificationReport::from_checks(vec![CheckEntry::at_most("x", 0.5, 1.0, json!({"n": 3}))]);
        let text = report.to_json().unwrap();
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.checks.len(), 1);
        assert_eq!(back.checks[0].status, CheckStatus::Pass);
        assert!(back.overall);
    }
}
