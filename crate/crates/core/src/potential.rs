//! Potential families W(x), their even/odd split, the envelope integral rho(x)
//! and the superpotential-type effective potentials V±(x).
//!
//! Every catalog row carries closed forms for W, W', rho and (for rows that
//! have a non-trivial even part) R and R'. Custom potentials fall back on
//! quadrature and central differences.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, SimpsonTolerance};

/// Envelope growth (in rho units) that counts as "decayed": e^(-28/2) ~ 1e-6.
pub const LOCALIZATION_THRESHOLD: f64 = 28.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// A (mu x)^(2n+1)
    OddPower,
    /// A sinh(mu x)
    Sinh,
    /// A sin(mu x)
    Sin,
    /// A asinh(mu x)
    Arcsinh,
    /// A (mu x) ln((mu x)^2)
    XLogX2,
    /// A e^(-mu x)
    Exp,
    /// A (mu x) e^(-mu x)
    XExp,
    /// A (mu x)^2 e^(-mu x)
    X2Exp,
    /// A (1 + mu x) / (1 + (mu x)^2)
    Lorentzian,
    Custom,
}

impl Family {
    pub const CATALOG: [Family; 9] = [
        Family::OddPower,
        Family::Sinh,
        Family::Sin,
        Family::Arcsinh,
        Family::XLogX2,
        Family::Exp,
        Family::XExp,
        Family::X2Exp,
        Family::Lorentzian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::OddPower => "odd-power",
            Family::Sinh => "sinh",
            Family::Sin => "sin",
            Family::Arcsinh => "arcsinh",
            Family::XLogX2 => "x-log-x2",
            Family::Exp => "exp",
            Family::XExp => "x-exp",
            Family::X2Exp => "x2-exp",
            Family::Lorentzian => "lorentzian",
            Family::Custom => "custom",
        }
    }

    pub fn subclass(self) -> Option<Subclass> {
        match self {
            Family::OddPower | Family::Sinh | Family::Sin | Family::Arcsinh | Family::XLogX2 => {
                Some(Subclass::OddParity)
            }
            Family::Exp | Family::XExp | Family::X2Exp | Family::Lorentzian => {
                Some(Subclass::NoDefiniteParity)
            }
            Family::Custom => None,
        }
    }

    pub fn constraint(self) -> ParamConstraint {
        match self {
            Family::OddPower
            | Family::Sinh
            | Family::Arcsinh
            | Family::XLogX2
            | Family::XExp
            | Family::Lorentzian => ParamConstraint::MuAPositive,
            Family::Exp | Family::X2Exp => ParamConstraint::MuANegative,
            Family::Sin | Family::Custom => ParamConstraint::Unconstrained,
        }
    }

    pub fn localized_expected(self) -> bool {
        !matches!(self, Family::Sin | Family::Custom)
    }

    /// Conforming parameters used by the verification suite and CLI defaults.
    pub fn default_params(self) -> (f64, f64, u32) {
        match self {
            Family::OddPower => (1.0, 1.0, 1),
            Family::Exp => (-1.0, 0.2, 0),
            Family::X2Exp => (-1.0, 1.0, 0),
            Family::Lorentzian => (1.0, 0.5, 0),
            _ => (1.0, 1.0, 0),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let family = match key.as_str() {
            "odd-power" | "oddpower" | "power" => Family::OddPower,
            "sinh" => Family::Sinh,
            "sin" => Family::Sin,
            "arcsinh" | "asinh" => Family::Arcsinh,
            "x-log-x2" | "xlogx2" | "xlogx" => Family::XLogX2,
            "exp" => Family::Exp,
            "x-exp" | "xexp" => Family::XExp,
            "x2-exp" | "x2exp" => Family::X2Exp,
            "lorentzian" => Family::Lorentzian,
            "custom" => Family::Custom,
            _ => return Err(Error::UnknownFamily(s.to_string())),
        };
        Ok(family)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subclass {
    OddParity,
    NoDefiniteParity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamConstraint {
    MuAPositive,
    MuANegative,
    Unconstrained,
}

impl ParamConstraint {
    pub fn holds(self, a: f64, mu: f64) -> bool {
        match self {
            ParamConstraint::MuAPositive => mu * a > 0.0,
            ParamConstraint::MuANegative => mu * a < 0.0,
            ParamConstraint::Unconstrained => true,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ParamConstraint::MuAPositive => "μA > 0",
            ParamConstraint::MuANegative => "μA < 0",
            ParamConstraint::Unconstrained => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied W(x) with a label for reports.
#[derive(Clone)]
pub struct CustomPotential {
    pub label: String,
    w: RealFn,
}

impl CustomPotential {
    pub fn new(label: impl Into<String>, w: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            w: Arc::new(w),
        }
    }
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential").field("label", &self.label).finish()
    }
}

/// One potential W(x) = family(A, mu, n). Immutable once built.
#[derive(Debug, Clone)]
pub struct PotentialInstance {
    family: Family,
    a: f64,
    mu: f64,
    n: u32,
    subclass: Subclass,
    conforming: bool,
    custom: Option<CustomPotential>,
}

impl PotentialInstance {
    /// Builds a catalog instance. Parameters that violate the row's sign
    /// constraint produce an instance flagged non-conforming.
    pub fn new(family: Family, a: f64, mu: f64, n: u32) -> Result<Self> {
        if family == Family::Custom {
            return Err(Error::InvalidParameter(
                "custom potentials are built with PotentialInstance::custom".into(),
            ));
        }
        if !a.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "A and mu must be finite (A = {a}, mu = {mu})"
            )));
        }
        if mu == 0.0 {
            return Err(Error::InvalidParameter(
                "mu = 0 makes the length scale degenerate".into(),
            ));
        }
        Ok(Self {
            family,
            a,
            mu,
            n,
            subclass: family.subclass().expect("catalog family"),
            conforming: family.constraint().holds(a, mu),
            custom: None,
        })
    }

    pub fn from_name(name: &str, a: f64, mu: f64, n: u32) -> Result<Self> {
        Self::new(name.parse()?, a, mu, n)
    }

    pub fn with_defaults(family: Family) -> Result<Self> {
        let (a, mu, n) = family.default_params();
        Self::new(family, a, mu, n)
    }

    /// Wraps an arbitrary W(x). The subclass is detected by sampling W(x) + W(-x).
    pub fn custom(potential: CustomPotential) -> Self {
        let odd = (1..=64).all(|k| {
            let x = 0.173 * k as f64;
            let (wp, wm) = ((potential.w)(x), (potential.w)(-x));
            (wp + wm).abs() <= 1e-13 * (1.0 + wp.abs())
        });
        Self {
            family: Family::Custom,
            a: 1.0,
            mu: 1.0,
            n: 0,
            subclass: if odd {
                Subclass::OddParity
            } else {
                Subclass::NoDefiniteParity
            },
            conforming: true,
            custom: Some(potential),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn subclass(&self) -> Subclass {
        self.subclass
    }

    pub fn is_conforming(&self) -> bool {
        self.conforming
    }

    pub fn localized_expected(&self) -> bool {
        self.family.localized_expected()
    }

    pub fn label(&self) -> String {
        match &self.custom {
            Some(c) => format!("custom({})", c.label),
            None => format!(
                "{}(A={}, mu={}{})",
                self.family,
                self.a,
                self.mu,
                if self.family == Family::OddPower {
                    format!(", n={}", self.n)
                } else {
                    String::new()
                }
            ),
        }
    }

    /// W(x).
    pub fn w(&self, x: f64) -> f64 {
        let (a, y) = (self.a, self.mu * x);
        match self.family {
            Family::OddPower => a * y.powi(2 * self.n as i32 + 1),
            Family::Sinh => a * y.sinh(),
            Family::Sin => a * y.sin(),
            Family::Arcsinh => a * y.asinh(),
            Family::XLogX2 => {
                if y == 0.0 {
                    0.0
                } else {
                    a * y * (y * y).ln()
                }
            }
            Family::Exp => a * (-y).exp(),
            Family::XExp => a * y * (-y).exp(),
            Family::X2Exp => a * y * y * (-y).exp(),
            Family::Lorentzian => a * (1.0 + y) / (1.0 + y * y),
            Family::Custom => (self.custom.as_ref().expect("custom").w)(x),
        }
    }

    /// U(x) = W(-x), the lower off-diagonal potential of the CP-symmetric class.
    pub fn u(&self, x: f64) -> f64 {
        self.w(-x)
    }

    /// dW/dx. For the x ln x² row the derivative diverges logarithmically at 0.
    pub fn dw(&self, x: f64) -> f64 {
        let (a, mu, y) = (self.a, self.mu, self.mu * x);
        match self.family {
            Family::OddPower => {
                let p = 2 * self.n as i32 + 1;
                a * mu * p as f64 * y.powi(p - 1)
            }
            Family::Sinh => a * mu * y.cosh(),
            Family::Sin => a * mu * y.cos(),
            Family::Arcsinh => a * mu / (1.0 + y * y).sqrt(),
            Family::XLogX2 => a * mu * ((y * y).ln() + 2.0),
            Family::Exp => -a * mu * (-y).exp(),
            Family::XExp => a * mu * (1.0 - y) * (-y).exp(),
            Family::X2Exp => a * mu * y * (2.0 - y) * (-y).exp(),
            Family::Lorentzian => {
                let d = 1.0 + y * y;
                a * mu * (1.0 - 2.0 * y - y * y) / (d * d)
            }
            Family::Custom => central_difference(|t| self.w(t), x),
        }
    }

    /// True where `dw` is singular at the origin.
    pub fn dw_singular_at_origin(&self) -> bool {
        self.family == Family::XLogX2
    }

    /// Even part R(x) = [W(x) + W(-x)] / 2.
    pub fn r(&self, x: f64) -> f64 {
        let (a, y) = (self.a, self.mu * x);
        match self.family {
            Family::OddPower | Family::Sinh | Family::Sin | Family::Arcsinh | Family::XLogX2 => 0.0,
            Family::Exp => a * y.cosh(),
            Family::XExp => -a * y * y.sinh(),
            Family::X2Exp => a * y * y * y.cosh(),
            Family::Lorentzian => a / (1.0 + y * y),
            Family::Custom => {
                if self.subclass == Subclass::OddParity {
                    0.0
                } else {
                    0.5 * (self.w(x) + self.w(-x))
                }
            }
        }
    }

    /// dR/dx.
    pub fn dr(&self, x: f64) -> f64 {
        let (a, mu, y) = (self.a, self.mu, self.mu * x);
        match self.family {
            Family::OddPower | Family::Sinh | Family::Sin | Family::Arcsinh | Family::XLogX2 => 0.0,
            Family::Exp => a * mu * y.sinh(),
            Family::XExp => -a * mu * (y.sinh() + y * y.cosh()),
            Family::X2Exp => a * mu * (2.0 * y * y.cosh() + y * y * y.sinh()),
            Family::Lorentzian => {
                let d = 1.0 + y * y;
                -2.0 * a * mu * y / (d * d)
            }
            Family::Custom => {
                if self.subclass == Subclass::OddParity {
                    0.0
                } else {
                    central_difference(|t| self.r(t), x)
                }
            }
        }
    }

    /// Odd part [W(x) - W(-x)] / 2.
    pub fn odd_part(&self, x: f64) -> f64 {
        0.5 * (self.w(x) - self.w(-x))
    }

    /// W(x) - W(-x), the derivative of rho.
    pub fn rho_derivative(&self, x: f64) -> f64 {
        self.w(x) - self.w(-x)
    }

    /// Closed-form rho(x) with the integration constant exactly as tabulated;
    /// `None` for custom potentials.
    pub fn rho_closed_form(&self, x: f64) -> Option<f64> {
        let (a, mu, y) = (self.a, self.mu, self.mu * x);
        let ratio = a / mu;
        let value = match self.family {
            Family::OddPower => {
                let k = self.n as i32 + 1;
                ratio / k as f64 * y.powi(2 * k)
            }
            Family::Sinh => 2.0 * ratio * y.cosh(),
            Family::Sin => -2.0 * ratio * y.cos(),
            Family::Arcsinh => 2.0 * ratio * (y * y.asinh() - (y * y + 1.0).sqrt()),
            Family::XLogX2 => {
                if y == 0.0 {
                    0.0
                } else {
                    ratio * y * y * ((y * y).ln() - 1.0)
                }
            }
            Family::Exp => -2.0 * ratio * y.cosh(),
            Family::XExp => {
                // y sinh y - cosh y, split so large |y| overflows to inf rather than NaN
                let t = y.abs();
                let g = 0.5 * (t - 1.0) * t.exp() - 0.5 * (t + 1.0) * (-t).exp();
                2.0 * ratio * g
            }
            Family::X2Exp => {
                // (y²+2) cosh y - 2y sinh y = ½e^|y|((|y|-1)²+1) + ½e^-|y|((|y|+1)²+1)
                let t = y.abs();
                let g = 0.5 * t.exp() * ((t - 1.0).powi(2) + 1.0)
                    + 0.5 * (-t).exp() * ((t + 1.0).powi(2) + 1.0);
                -2.0 * ratio * g
            }
            Family::Lorentzian => ratio * (y * y).ln_1p(),
            Family::Custom => return None,
        };
        Some(value)
    }

    /// rho(x) by adaptive Simpson quadrature of W(y) - W(-y) from 0 to x,
    /// plus the catalog row's value at the origin (0 for custom potentials).
    pub fn rho_quadrature(&self, x: f64) -> Result<f64> {
        let offset = self.rho_closed_form(0.0).unwrap_or(0.0);
        let integral = quadrature::integrate(
            |y| self.rho_derivative(y),
            0.0,
            x,
            SimpsonTolerance::default(),
        )?;
        Ok(offset + integral)
    }

    /// The envelope integral rho(x). Closed form where tabulated, quadrature otherwise.
    pub fn rho(&self, x: f64) -> Result<f64> {
        match self.rho_closed_form(x) {
            Some(v) => Ok(v),
            None => self.rho_quadrature(x),
        }
    }

    /// V±(x) = ½(R² ± R').
    pub fn effective_potential(&self, x: f64, branch: Branch) -> f64 {
        let r = self.r(x);
        0.5 * (r * r + branch.sign() * self.dr(x))
    }

    pub fn decompose(&self) -> CpDecomposition<'_> {
        CpDecomposition { potential: self }
    }

    /// Smallest symmetric half-width L with rho(±L) - min rho ≥ `LOCALIZATION_THRESHOLD`,
    /// or the fixed window [-4π/μ, 4π/μ] for the sine row.
    pub fn auto_window(&self) -> Result<f64> {
        if self.family == Family::Sin {
            return Ok(4.0 * std::f64::consts::PI / self.mu.abs());
        }
        let scale = 1.0 / self.mu.abs();
        let growth = |l: f64| -> Result<f64> {
            let min = self.rho_min_on(l)?;
            Ok(self.rho(l)?.min(self.rho(-l)?) - min)
        };
        let mut hi = 0.25 * scale;
        let mut steps = 0;
        while growth(hi)? < LOCALIZATION_THRESHOLD {
            hi *= 2.0;
            steps += 1;
            if steps > 40 {
                return Err(Error::InvalidParameter(format!(
                    "{}: envelope does not reach the localization threshold; pass an explicit window",
                    self.label()
                )));
            }
        }
        let mut lo = if steps == 0 { 0.0 } else { 0.5 * hi };
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if growth(mid)? >= LOCALIZATION_THRESHOLD {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-6 * hi {
                break;
            }
        }
        Ok(hi)
    }

    fn rho_min_on(&self, l: f64) -> Result<f64> {
        let samples = 400;
        let mut min = f64::INFINITY;
        for i in 0..=samples {
            let x = -l + 2.0 * l * i as f64 / samples as f64;
            min = min.min(self.rho(x)?);
        }
        Ok(min)
    }
}

/// R, the odd part and rho viewed as functions of x.
#[derive(Debug, Clone, Copy)]
pub struct CpDecomposition<'a> {
    potential: &'a PotentialInstance,
}

impl CpDecomposition<'_> {
    pub fn even(&self, x: f64) -> f64 {
        self.potential.r(x)
    }

    pub fn odd(&self, x: f64) -> f64 {
        self.potential.odd_part(x)
    }

    pub fn rho(&self, x: f64) -> Result<f64> {
        self.potential.rho(x)
    }
}

fn central_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = f64::EPSILON.cbrt() * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// One row of the potential catalog with its formula text.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CatalogRow {
    pub family: Family,
    pub subclass: Subclass,
    pub constraints: String,
    pub localized: bool,
    pub w_tex: String,
    pub rho_tex: String,
    pub r_tex: String,
    pub remarks: String,
}

pub fn catalog() -> Vec<CatalogRow> {
    let row = |family: Family, w: &str, rho: &str, r: &str, remarks: &str| CatalogRow {
        family,
        subclass: family.subclass().expect("catalog family"),
        constraints: family.constraint().describe().to_string(),
        localized: family.localized_expected(),
        w_tex: w.into(),
        rho_tex: rho.into(),
        r_tex: r.into(),
        remarks: remarks.into(),
    };
    vec![
        row(
            Family::OddPower,
            r"A(\mu x)^{2n+1}",
            r"\frac{A/\mu}{n+1}(\mu x)^{2(n+1)}",
            "0",
            "μA > 0, localized",
        ),
        row(
            Family::Sinh,
            r"A\sinh(\mu x)",
            r"2\frac{A}{\mu}\cosh(\mu x)",
            "0",
            "μA > 0, localized",
        ),
        row(
            Family::Sin,
            r"A\sin(\mu x)",
            r"-2\frac{A}{\mu}\cos(\mu x)",
            "0",
            "Non-localized",
        ),
        row(
            Family::Arcsinh,
            r"A\sinh^{-1}(\mu x)",
            r"2\frac{A}{\mu}\left[(\mu x)\sinh^{-1}(\mu x) - \sqrt{(\mu x)^2+1}\right]",
            "0",
            "μA > 0, localized",
        ),
        row(
            Family::XLogX2,
            r"A(\mu x)\ln(\mu x)^2",
            r"\frac{A}{\mu}(\mu x)^2\left[\ln(\mu x)^2 - 1\right]",
            "0",
            "μA > 0, localized",
        ),
        row(
            Family::Exp,
            r"Ae^{-\mu x}",
            r"-2\frac{A}{\mu}\cosh(\mu x)",
            r"A\cosh(\mu x)",
            "μA < 0, localized",
        ),
        row(
            Family::XExp,
            r"A(\mu x)e^{-\mu x}",
            r"2\frac{A}{\mu}\left[(\mu x)\sinh(\mu x) - \cosh(\mu x)\right]",
            r"-A(\mu x)\sinh(\mu x)",
            "μA > 0, localized",
        ),
        row(
            Family::X2Exp,
            r"A(\mu x)^2e^{-\mu x}",
            r"-2\frac{A}{\mu}\left[(y^2+2)\cosh(y) - 2y\sinh(y)\right]",
            r"Ay^2\cosh(y)",
            "μA < 0, y = μx, localized",
        ),
        row(
            Family::Lorentzian,
            r"A\frac{1+(\mu x)}{1+(\mu x)^2}",
            r"\frac{A}{\mu}\ln\left[1+(\mu x)^2\right]",
            r"\frac{A}{1+(\mu x)^2}",
            "μA > 0, localized",
        ),
    ]
}
