//! Stationary spinors chi±(x) at real energy, integrated outward from x = 0.
//!
//! Four routes produce the same solution from the same data at the origin:
//!
//! * `FirstOrder`: the coupled system
//!   chi+' = U chi+ - (eps + m) chi-,  chi-' = (eps - m) chi+ - W chi-,
//!   with U(x) = W(-x). No division anywhere, valid at eps = ±m.
//! * `SecondOrderPlus` / `SecondOrderMinus`: the decoupled second-order
//!   equation for one component, the other recovered from the first-order
//!   relation that divides by (eps + m) or (eps - m).
//! * `PhiForm`: chi = e^(-(rho - rho(0))/2) phi with
//!   phi±'' = (R² ± R' - eps² + m²) phi±, only R, R' and rho enter.
//! * `ClosedFormA`: plane waves under the envelope for odd W.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, OdeTolerance};
use crate::potential::{PotentialInstance, Subclass, LOCALIZATION_THRESHOLD};

/// Largest |rho(x) - rho(0)| over which the direct first-order route is attempted.
pub const FIRST_ORDER_RHO_WINDOW: f64 = 60.0;

const ENVELOPE_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    FirstOrder,
    #[serde(rename = "second-order-positive")]
    SecondOrderPlus,
    #[serde(rename = "second-order-negative")]
    SecondOrderMinus,
    #[serde(rename = "phi")]
    PhiForm,
    ClosedFormA,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::FirstOrder => "first-order",
            Route::SecondOrderPlus => "second-order-positive",
            Route::SecondOrderMinus => "second-order-negative",
            Route::PhiForm => "phi",
            Route::ClosedFormA => "closed-form-a",
        }
    }

    /// Second-order route matching the sign of the energy.
    pub fn second_order_for(energy: f64) -> Route {
        if energy >= 0.0 {
            Route::SecondOrderPlus
        } else {
            Route::SecondOrderMinus
        }
    }

    /// Default route: the phi form for potentials without definite parity.
    pub fn auto(potential: &PotentialInstance) -> Route {
        match potential.subclass() {
            Subclass::NoDefiniteParity => Route::PhiForm,
            Subclass::OddParity => Route::FirstOrder,
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first-order" | "first" => Ok(Route::FirstOrder),
            "second-order-positive" | "second-order-plus" => Ok(Route::SecondOrderPlus),
            "second-order-negative" | "second-order-minus" => Ok(Route::SecondOrderMinus),
            "phi" | "phi-form" => Ok(Route::PhiForm),
            "closed-form-a" | "closed-form" => Ok(Route::ClosedFormA),
            other => Err(Error::InvalidParameter(format!("unknown route `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditionAtOrigin {
    pub chi_plus_0: Complex64,
    pub chi_minus_0: Complex64,
}

impl BoundaryConditionAtOrigin {
    pub fn new(chi_plus_0: Complex64, chi_minus_0: Complex64) -> Result<Self> {
        if chi_plus_0 == Complex64::new(0.0, 0.0) && chi_minus_0 == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidBoundaryCondition(
                "chi_plus(0) and chi_minus(0) cannot both vanish".into(),
            ));
        }
        if !(chi_plus_0.re.is_finite()
            && chi_plus_0.im.is_finite()
            && chi_minus_0.re.is_finite()
            && chi_minus_0.im.is_finite())
        {
            return Err(Error::InvalidBoundaryCondition("values must be finite".into()));
        }
        Ok(Self {
            chi_plus_0,
            chi_minus_0,
        })
    }

    pub fn real(chi_plus_0: f64, chi_minus_0: f64) -> Result<Self> {
        Self::new(Complex64::new(chi_plus_0, 0.0), Complex64::new(chi_minus_0, 0.0))
    }
}

impl Default for BoundaryConditionAtOrigin {
    /// chi+(0) = 1, chi-(0) = 0.
    fn default() -> Self {
        Self {
            chi_plus_0: Complex64::new(1.0, 0.0),
            chi_minus_0: Complex64::new(0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Localization {
    Localized,
    NonLocalized,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinorSolution {
    pub xs: Vec<f64>,
    pub chi_plus: Vec<Complex64>,
    pub chi_minus: Vec<Complex64>,
    pub energy: f64,
    pub route: Route,
    pub localized: bool,
    pub envelope_clamped: bool,
}

impl SpinorSolution {
    /// sqrt(|chi+|² + |chi-|²) per node.
    pub fn abs_chi(&self) -> Vec<f64> {
        self.chi_plus
            .iter()
            .zip(&self.chi_minus)
            .map(|(p, m)| (p.norm_sqr() + m.norm_sqr()).sqrt())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.chi_plus
            .iter()
            .chain(&self.chi_minus)
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub const CSV_HEADER: &'static str =
        "x,re_chi_plus,im_chi_plus,re_chi_minus,im_chi_minus,abs_chi";

    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = String::with_capacity(self.xs.len() * 140);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for (((x, p), m), a) in self
            .xs
            .iter()
            .zip(&self.chi_plus)
            .zip(&self.chi_minus)
            .zip(self.abs_chi())
        {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                x, p.re, p.im, m.re, m.im, a
            );
        }
        out
    }
}

/// Everything a route needs besides the potential.
#[derive(Debug, Clone, Copy)]
pub struct SolveSettings {
    pub mass: f64,
    pub energy: f64,
    pub bc: BoundaryConditionAtOrigin,
    pub half_width: f64,
    /// Number of output samples; forced odd so that x = 0 is a node.
    pub samples: usize,
    pub tol: OdeTolerance,
}

impl SolveSettings {
    pub fn new(mass: f64, energy: f64, half_width: f64) -> Self {
        Self {
            mass,
            energy,
            bc: BoundaryConditionAtOrigin::default(),
            half_width,
            samples: 801,
            tol: OdeTolerance::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.mass.is_finite() || !self.energy.is_finite() {
            return Err(Error::InvalidParameter("mass and energy must be finite".into()));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "window half-width must be positive, got {}",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Symmetric sample nodes on [-L, L] containing 0, mirrored bit for bit.
pub fn sample_nodes(half_width: f64, samples: usize) -> Vec<f64> {
    let half = (samples.max(3) - 1) / 2;
    let n = 2 * half + 1;
    let mut xs = vec![0.0; n];
    for k in 1..=half {
        let x = half_width * k as f64 / half as f64;
        xs[half + k] = x;
        xs[half - k] = -x;
    }
    xs
}

type Rhs<'a> = Box<dyn Fn(f64, &[Complex64; 2]) -> [Complex64; 2] + 'a>;

/// Integrates outward from `start` (0 or ±offset) to both halves of `xs` and
/// returns states aligned with `xs`; the state at 0 is `y0`.
fn integrate_both_ways(
    rhs: &Rhs<'_>,
    xs: &[f64],
    y0: [Complex64; 2],
    start: Option<(f64, [Complex64; 2], [Complex64; 2])>,
    tol: OdeTolerance,
) -> Result<Vec<[Complex64; 2]>> {
    let mid = xs.len() / 2;
    let right: Vec<f64> = xs[mid + 1..].to_vec();
    let left: Vec<f64> = xs[..mid].iter().rev().copied().collect();
    let (right_states, left_states) = match start {
        None => (
            ode::integrate(rhs, 0.0, y0, &right, tol)?,
            ode::integrate(rhs, 0.0, y0, &left, tol)?,
        ),
        Some((offset, y_plus, y_minus)) => (
            ode::integrate(rhs, offset, y_plus, &right, tol)?,
            ode::integrate(rhs, -offset, y_minus, &left, tol)?,
        ),
    };
    let mut out = Vec::with_capacity(xs.len());
    out.extend(left_states.into_iter().rev());
    out.push(y0);
    out.extend(right_states);
    Ok(out)
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Integrates the coupled first-order system.
pub fn solve_first_order(p: &PotentialInstance, s: &SolveSettings) -> Result<SpinorSolution> {
    s.validate()?;
    let xs = sample_nodes(s.half_width, s.samples);
    let rho0 = p.rho(0.0)?;
    for &x in [xs[0], xs[xs.len() - 1]].iter() {
        let growth = (p.rho(x)? - rho0).abs();
        if growth > FIRST_ORDER_RHO_WINDOW {
            return Err(Error::InvalidParameter(format!(
                "|rho(x) - rho(0)| = {growth:.1} at x = {x} exceeds {FIRST_ORDER_RHO_WINDOW} for the \
                 first-order route; shrink the window or use the phi-form route"
            )));
        }
    }
    let (m, eps) = (s.mass, s.energy);
    let rhs: Rhs<'_> = Box::new(move |x, y| {
        [
            y[0] * p.u(x) - y[1] * (eps + m),
            y[0] * (eps - m) - y[1] * p.w(x),
        ]
    });
    let y0 = [s.bc.chi_plus_0, s.bc.chi_minus_0];
    let states = integrate_both_ways(&rhs, &xs, y0, None, s.tol)?;
    Ok(SpinorSolution {
        chi_plus: states.iter().map(|y| y[0]).collect(),
        chi_minus: states.iter().map(|y| y[1]).collect(),
        xs,
        energy: eps,
        route: Route::FirstOrder,
        localized: classify_localization(p) == Localization::Localized,
        envelope_clamped: false,
    })
}

/// Which component the second-order route integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergySign {
    Positive,
    Negative,
}

/// Start offset used when W' is singular at the origin.
const SINGULAR_START: f64 = 1e-8;

/// Solves the decoupled second-order equation for one component and
/// recovers the other from the first-order relation.
pub fn solve_second_order(
    p: &PotentialInstance,
    s: &SolveSettings,
    sign: EnergySign,
) -> Result<SpinorSolution> {
    s.validate()?;
    let (m, eps) = (s.mass, s.energy);
    let (cp0, cm0) = (s.bc.chi_plus_0, s.bc.chi_minus_0);
    let xs = sample_nodes(s.half_width, s.samples);
    let e2m2 = eps * eps - m * m;
    let w0 = p.w(0.0);

    // derivative of the integrated component from the first-order relations
    let first_order_slope = |x: f64, cp: Complex64, cm: Complex64| match sign {
        EnergySign::Positive => cp * p.u(x) - cm * (eps + m),
        EnergySign::Negative => cp * (eps - m) - cm * p.w(x),
    };

    let (rhs, y0): (Rhs<'_>, _) = match sign {
        EnergySign::Positive => {
            if eps + m == 0.0 {
                return Err(Error::EnergyExcluded(format!(
                    "positive-energy branch divides by eps + m; it requires eps != -m (eps = {eps}, m = {m})"
                )));
            }
            let rhs: Rhs<'_> = Box::new(move |x, y| {
                let (w, u) = (p.w(x), p.w(-x));
                let du = -p.dw(-x);
                [y[1], -(y[1] * (w - u)) - y[0] * (-w * u - du + e2m2)]
            });
            (rhs, [cp0, first_order_slope(0.0, cp0, cm0)])
        }
        EnergySign::Negative => {
            if eps - m == 0.0 {
                return Err(Error::EnergyExcluded(format!(
                    "negative-energy branch divides by eps - m; it requires eps != m (eps = {eps}, m = {m})"
                )));
            }
            let rhs: Rhs<'_> = Box::new(move |x, y| {
                let (w, u) = (p.w(x), p.w(-x));
                let dw = p.dw(x);
                [y[1], -(y[1] * (w - u)) - y[0] * (-w * u + dw + e2m2)]
            });
            (rhs, [cm0, first_order_slope(0.0, cp0, cm0)])
        }
    };

    let start = if p.dw_singular_at_origin() {
        // step off the logarithmic singularity with a first-order Taylor start;
        // W itself is smooth, so the slope at ±delta follows from the first-order relations
        let dp0 = cp0 * w0 - cm0 * (eps + m);
        let dm0 = cp0 * (eps - m) - cm0 * w0;
        let state_at = |x: f64| {
            let cp = cp0 + dp0 * x;
            let cm = cm0 + dm0 * x;
            let comp = match sign {
                EnergySign::Positive => cp,
                EnergySign::Negative => cm,
            };
            [comp, first_order_slope(x, cp, cm)]
        };
        Some((SINGULAR_START, state_at(SINGULAR_START), state_at(-SINGULAR_START)))
    } else {
        None
    };

    let states = integrate_both_ways(&rhs, &xs, y0, start, s.tol)?;
    let mut chi_plus = Vec::with_capacity(xs.len());
    let mut chi_minus = Vec::with_capacity(xs.len());
    for (x, y) in xs.iter().zip(&states) {
        let (f, df) = (y[0], y[1]);
        match sign {
            EnergySign::Positive => {
                chi_plus.push(f);
                chi_minus.push((f * p.u(*x) - df) / (eps + m));
            }
            EnergySign::Negative => {
                chi_minus.push(f);
                chi_plus.push((df + f * p.w(*x)) / (eps - m));
            }
        }
    }
    // the data at the origin is the boundary condition itself
    let mid = xs.len() / 2;
    chi_plus[mid] = cp0;
    chi_minus[mid] = cm0;
    Ok(SpinorSolution {
        xs,
        chi_plus,
        chi_minus,
        energy: eps,
        route: match sign {
            EnergySign::Positive => Route::SecondOrderPlus,
            EnergySign::Negative => Route::SecondOrderMinus,
        },
        localized: classify_localization(p) == Localization::Localized,
        envelope_clamped: false,
    })
}

/// Solves the Schrödinger-type phi equation and restores the envelope.
/// The + branch is used for eps >= 0, the - branch otherwise.
pub fn solve_phi_form(p: &PotentialInstance, s: &SolveSettings) -> Result<SpinorSolution> {
    s.validate()?;
    let (m, eps) = (s.mass, s.energy);
    // fall back to the other branch when the preferred one divides by zero
    let mut plus = eps >= 0.0;
    if plus && eps + m == 0.0 {
        plus = false;
    } else if !plus && eps - m == 0.0 {
        plus = true;
    }
    if (plus && eps + m == 0.0) || (!plus && eps - m == 0.0) {
        return Err(Error::EnergyExcluded(format!(
            "phi-form route needs eps != -m or eps != m (eps = {eps}, m = {m})"
        )));
    }
    let branch = if plus { 1.0 } else { -1.0 };
    let shift = m * m - eps * eps;
    let rhs: Rhs<'_> = Box::new(move |x, y| {
        let r = p.r(x);
        [y[1], y[0] * (r * r + branch * p.dr(x) + shift)]
    });

    let (cp0, cm0) = (s.bc.chi_plus_0, s.bc.chi_minus_0);
    let w0 = p.w(0.0);
    // rho'(0) = 0, so phi and its slope at 0 equal those of chi (gauge rho - rho(0))
    let y0 = if plus {
        [cp0, cp0 * w0 - cm0 * (eps + m)]
    } else {
        [cm0, cp0 * (eps - m) - cm0 * w0]
    };
    let xs = sample_nodes(s.half_width, s.samples);
    let states = integrate_both_ways(&rhs, &xs, y0, None, s.tol)?;

    let rho0 = p.rho(0.0)?;
    let mut clamped = false;
    let mut chi_plus = Vec::with_capacity(xs.len());
    let mut chi_minus = Vec::with_capacity(xs.len());
    for (&x, y) in xs.iter().zip(&states) {
        let mut g = -0.5 * (p.rho(x)? - rho0);
        if g.abs() > ENVELOPE_CLAMP {
            clamped = true;
            g = g.clamp(-ENVELOPE_CLAMP, ENVELOPE_CLAMP);
        }
        let env = g.exp();
        let (phi, dphi) = (y[0], y[1]);
        let r = p.r(x);
        if plus {
            chi_plus.push(phi * env);
            chi_minus.push((phi * r - dphi) * (env / (eps + m)));
        } else {
            chi_minus.push(phi * env);
            chi_plus.push((dphi + phi * r) * (env / (eps - m)));
        }
    }
    let mid = xs.len() / 2;
    chi_plus[mid] = cp0;
    chi_minus[mid] = cm0;
    Ok(SpinorSolution {
        xs,
        chi_plus,
        chi_minus,
        energy: eps,
        route: Route::PhiForm,
        localized: classify_localization(p) == Localization::Localized,
        envelope_clamped: clamped,
    })
}

/// k = sqrt(eps² - m²); imaginary (i kappa, kappa > 0) below threshold.
pub fn wavenumber(mass: f64, energy: f64) -> Complex64 {
    let d = energy * energy - mass * mass;
    if d >= 0.0 {
        c(d.sqrt())
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// Plane-wave coefficients (A+, B+) reproducing `bc` at the origin.
pub fn closed_form_coefficients(
    p: &PotentialInstance,
    mass: f64,
    energy: f64,
    bc: &BoundaryConditionAtOrigin,
) -> Result<(Complex64, Complex64)> {
    let k = wavenumber(mass, energy);
    if k.norm() == 0.0 {
        return Err(Error::EnergyExcluded(
            "at |eps| = m the two plane waves coincide; chi-(0) cannot be matched".into(),
        ));
    }
    if energy + mass == 0.0 {
        return Err(Error::EnergyExcluded("closed form requires eps != -m".into()));
    }
    let env0 = (0.5 * p.rho(0.0)?).exp();
    // chi+(0) = e^(-rho0/2)(A + B), chi-(0) = e^(-rho0/2) (-ik)(A - B)/(eps + m)
    let sum = bc.chi_plus_0 * env0;
    let diff = bc.chi_minus_0 * env0 * (energy + mass) / (Complex64::new(0.0, -1.0) * k);
    Ok((0.5 * (sum + diff), 0.5 * (sum - diff)))
}

/// chi± = e^(-rho/2)(A± e^(ikx) + B± e^(-ikx)) with A- = -ik A+/(eps+m),
/// B- = ik B+/(eps+m). Below threshold only the outward-decaying exponential
/// is kept on each side: A+ for x >= 0, B+ for x < 0.
pub fn closed_form_subclass_a(
    p: &PotentialInstance,
    mass: f64,
    energy: f64,
    a_plus: Complex64,
    b_plus: Complex64,
    xs: &[f64],
) -> Result<SpinorSolution> {
    if p.subclass() != Subclass::OddParity {
        return Err(Error::WrongSubclass(format!(
            "{} has no definite parity; the plane-wave closed form needs W(-x) = -W(x)",
            p.label()
        )));
    }
    if energy + mass == 0.0 {
        return Err(Error::EnergyExcluded(format!(
            "closed form links chi- to chi+ through 1/(eps + m); eps = -m = {energy} is excluded"
        )));
    }
    let k = wavenumber(mass, energy);
    let evanescent = energy.abs() < mass.abs();
    let i = Complex64::new(0.0, 1.0);
    let a_minus = -i * k * a_plus / (energy + mass);
    let b_minus = i * k * b_plus / (energy + mass);
    let mut clamped = false;
    let mut chi_plus = Vec::with_capacity(xs.len());
    let mut chi_minus = Vec::with_capacity(xs.len());
    for &x in xs {
        let mut g = -0.5 * p.rho(x)?;
        if g.abs() > ENVELOPE_CLAMP {
            clamped = true;
            g = g.clamp(-ENVELOPE_CLAMP, ENVELOPE_CLAMP);
        }
        let env = g.exp();
        let fwd = (i * k * x).exp();
        let bwd = (-i * k * x).exp();
        let (cp, cm) = if !evanescent {
            (a_plus * fwd + b_plus * bwd, a_minus * fwd + b_minus * bwd)
        } else if x >= 0.0 {
            (a_plus * fwd, a_minus * fwd)
        } else {
            (b_plus * bwd, b_minus * bwd)
        };
        chi_plus.push(cp * env);
        chi_minus.push(cm * env);
    }
    Ok(SpinorSolution {
        xs: xs.to_vec(),
        chi_plus,
        chi_minus,
        energy,
        route: Route::ClosedFormA,
        localized: classify_localization(p) == Localization::Localized,
        envelope_clamped: clamped,
    })
}

/// Runs one route.
pub fn solve(p: &PotentialInstance, s: &SolveSettings, route: Route) -> Result<SpinorSolution> {
    match route {
        Route::FirstOrder => solve_first_order(p, s),
        Route::SecondOrderPlus => solve_second_order(p, s, EnergySign::Positive),
        Route::SecondOrderMinus => solve_second_order(p, s, EnergySign::Negative),
        Route::PhiForm => solve_phi_form(p, s),
        Route::ClosedFormA => {
            let (a, b) = closed_form_coefficients(p, s.mass, s.energy, &s.bc)?;
            let xs = sample_nodes(s.half_width, s.samples);
            closed_form_subclass_a(p, s.mass, s.energy, a, b, &xs)
        }
    }
}

/// Classifies the envelope e^(-rho/2) from rho on a geometric probe sequence
/// x_k = ±2^k/|mu|, k = 0..=24:
///
/// * `Localized`: rho rises at least `LOCALIZATION_THRESHOLD` above its sampled
///   minimum at both outermost probes and is still non-decreasing there.
/// * `NonLocalized`: the spread of rho over the outer probes does not exceed
///   its spread over a dense sampling of the inner region (rho bounded).
/// * `Indeterminate`: anything else, e.g. an envelope that blows up.
pub fn classify_localization(p: &PotentialInstance) -> Localization {
    let scale = 1.0 / p.mu().abs();
    let probes: Vec<f64> = (0..=24).map(|k| scale * 2f64.powi(k)).collect();
    let rho = |x: f64| p.rho(x).unwrap_or(f64::NAN);

    let right: Vec<f64> = probes.iter().map(|&x| rho(x)).collect();
    let left: Vec<f64> = probes.iter().map(|&x| rho(-x)).collect();
    let inner_half = probes[probes.len() / 2];
    let inner: Vec<f64> = (0..=2000)
        .map(|i| rho(-inner_half + 2.0 * inner_half * i as f64 / 2000.0))
        .collect();
    if right.iter().chain(&left).chain(&inner).any(|v| v.is_nan()) {
        return Localization::Indeterminate;
    }
    let min = right
        .iter()
        .chain(&left)
        .chain(&inner)
        .fold(f64::INFINITY, |a, &b| a.min(b));

    let rising = |side: &[f64]| {
        let n = side.len();
        side[n - 1] - min >= LOCALIZATION_THRESHOLD && side[n - 1] >= side[n - 2]
    };
    if rising(&right) && rising(&left) {
        return Localization::Localized;
    }

    let spread = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi - lo
    };
    let outer_from = probes.len() / 2 + 1;
    let outer_spread = spread(&mut right[outer_from..].iter().chain(&left[outer_from..]).copied());
    let inner_spread = spread(&mut inner.iter().copied());
    if outer_spread.is_finite() && outer_spread <= inner_spread + 1e-9 * (1.0 + inner_spread) {
        return Localization::NonLocalized;
    }
    Localization::Indeterminate
}

/// Max-norm residual of the central-difference stationary equations at the
/// interior points of a uniform sampling.
pub fn dirac_residual(
    p: &PotentialInstance,
    mass: f64,
    energy: f64,
    xs: &[f64],
    chi_plus: &[Complex64],
    chi_minus: &[Complex64],
) -> f64 {
    let n = xs.len();
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let two_h = xs[i + 1] - xs[i - 1];
        let dp = (chi_plus[i + 1] - chi_plus[i - 1]) / two_h;
        let dm = (chi_minus[i + 1] - chi_minus[i - 1]) / two_h;
        let x = xs[i];
        let r_plus = chi_plus[i] * (mass - energy) + dm + chi_minus[i] * p.w(x);
        let r_minus = chi_minus[i] * (-mass - energy) - dp + chi_plus[i] * p.u(x);
        worst = worst.max(r_plus.norm()).max(r_minus.norm());
    }
    worst
}

/// Max over sampled points of |a - b| relative to max |chi_a|, restricted to
/// points where |chi_a| >= `floor` * max |chi_a|.
pub fn max_relative_deviation(a: &SpinorSolution, b: &SpinorSolution, floor: f64) -> f64 {
    let abs_a = a.abs_chi();
    let scale = abs_a.iter().fold(0.0f64, |m, &v| m.max(v));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..a.xs.len() {
        if abs_a[i] < floor * scale {
            continue;
        }
        let d = (a.chi_plus[i] - b.chi_plus[i])
            .norm()
            .max((a.chi_minus[i] - b.chi_minus[i]).norm());
        worst = worst.max(d / scale);
    }
    worst
}
