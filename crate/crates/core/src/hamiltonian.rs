//! Finite-difference realization of the 1+1D Dirac Hamiltonian
//!
//! ```text
//!     H = [ m + S + V      D + W     ]
//!         [ -D + U       -m - S + V  ]
//! ```
//!
//! on a symmetric box with Dirichlet walls. The global vector is ordered as
//! (chi_plus at all nodes, chi_minus at all nodes). `D` is the antisymmetric
//! central-difference matrix, so D^T = -D and P D P = -D hold exactly.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialInstance;

/// Symmetric grid of `n` interior nodes on (-L, L), spacing h = 2L/(n+1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    h: f64,
    nodes: Vec<f64>,
}

impl GridSpec {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 interior nodes, got {n}"
            )));
        }
        let h = 2.0 * half_width / (n + 1) as f64;
        let mut nodes = vec![0.0; n];
        // left half from the formula, right half mirrored so x_i = -x_{n+1-i} bit for bit
        for i in 0..n / 2 {
            let x = -half_width + (i + 1) as f64 * h;
            nodes[i] = x;
            nodes[n - 1 - i] = -x;
        }
        Ok(Self {
            half_width,
            h,
            nodes,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the node at -x_i.
    pub fn mirror(&self, i: usize) -> usize {
        self.nodes.len() - 1 - i
    }
}

/// The four potential functions sampled on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSamples {
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
}

/// Dense 2N x 2N real Hamiltonian matrix together with what it was built from.
#[derive(Debug, Clone)]
pub struct DiscreteDiracOperator {
    matrix: Mat<f64>,
    grid: GridSpec,
    mass: f64,
    samples: PotentialSamples,
    label: String,
}

impl DiscreteDiracOperator {
    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn samples(&self) -> &PotentialSamples {
        &self.samples
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entrywise max-norm of the matrix.
    pub fn scale(&self) -> f64 {
        max_norm(&self.matrix)
    }
}

/// How U is wired when assembling the CP-symmetric class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UWiring {
    /// U_i = W at the mirrored node.
    #[default]
    Mirrored,
    /// U_i = -W at the mirrored node. Deliberately breaks CP symmetry.
    SignFlipped,
}

/// N x N central-difference derivative with Dirichlet walls.
pub fn derivative_matrix(grid: &GridSpec) -> Mat<f64> {
    let n = grid.len();
    let c = 1.0 / (2.0 * grid.h());
    Mat::from_fn(n, n, |i, j| {
        if j == i + 1 {
            c
        } else if i == j + 1 {
            -c
        } else {
            0.0
        }
    })
}

fn sample(
    what: &'static str,
    grid: &GridSpec,
    f: impl Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(node, &x)| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteSample { what, node, x })
            }
        })
        .collect()
}

/// Assembles the general Hamiltonian from S, V, W, U.
pub fn build_hamiltonian(
    grid: &GridSpec,
    mass: f64,
    s: impl Fn(f64) -> f64,
    v: impl Fn(f64) -> f64,
    w: impl Fn(f64) -> f64,
    u: impl Fn(f64) -> f64,
) -> Result<DiscreteDiracOperator> {
    let samples = PotentialSamples {
        s: sample("S", grid, s)?,
        v: sample("V", grid, v)?,
        w: sample("W", grid, w)?,
        u: sample("U", grid, u)?,
    };
    assemble(grid, mass, samples, "general".into())
}

/// Assembles H for W from `potential`, S = V = 0 and U(x) = W(-x) taken from the
/// mirrored node so the mirror identity is exact on the grid.
pub fn build_cp_class(
    grid: &GridSpec,
    mass: f64,
    potential: &PotentialInstance,
) -> Result<DiscreteDiracOperator> {
    build_cp_class_wired(grid, mass, potential, UWiring::Mirrored)
}

pub fn build_cp_class_wired(
    grid: &GridSpec,
    mass: f64,
    potential: &PotentialInstance,
    wiring: UWiring,
) -> Result<DiscreteDiracOperator> {
    let n = grid.len();
    let w = sample("W", grid, |x| potential.w(x))?;
    let sign = match wiring {
        UWiring::Mirrored => 1.0,
        UWiring::SignFlipped => -1.0,
    };
    let u = (0..n).map(|i| sign * w[grid.mirror(i)]).collect();
    let samples = PotentialSamples {
        s: vec![0.0; n],
        v: vec![0.0; n],
        w,
        u,
    };
    assemble(grid, mass, samples, potential.label())
}

fn assemble(
    grid: &GridSpec,
    mass: f64,
    samples: PotentialSamples,
    label: String,
) -> Result<DiscreteDiracOperator> {
    if !mass.is_finite() {
        return Err(Error::InvalidParameter(format!("mass must be finite, got {mass}")));
    }
    let n = grid.len();
    let c = 1.0 / (2.0 * grid.h());
    let mut m = Mat::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, i)] = mass + samples.s[i] + samples.v[i];
        m[(n + i, n + i)] = -mass - samples.s[i] + samples.v[i];
        m[(i, n + i)] = samples.w[i];
        m[(n + i, i)] = samples.u[i];
        if i + 1 < n {
            // D + W block (upper right) and -D + U block (lower left)
            m[(i, n + i + 1)] = c;
            m[(i + 1, n + i)] = -c;
            m[(n + i, i + 1)] = -c;
            m[(n + i + 1, i)] = c;
        }
    }
    Ok(DiscreteDiracOperator {
        matrix: m,
        grid: grid.clone(),
        mass,
        samples,
        label,
    })
}

pub(crate) fn max_norm(m: &Mat<f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

/// Largest envelope exponent we are willing to exponentiate.
const MAX_EXPONENT: f64 = 700.0;

/// log10 of cond(E) for E = diag(e^(-rho/2)) on the grid.
pub fn envelope_log10_condition(rho: &[f64]) -> f64 {
    let (lo, hi) = rho
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    0.5 * (hi - lo) / std::f64::consts::LN_10
}

/// Returns E^-1 H E for E = diag(e^(-rho(x_i)/2)) on both spinor blocks.
/// Entries are formed from rho differences so the full envelope is never
/// exponentiated.
pub fn envelope_similarity(
    op: &DiscreteDiracOperator,
    rho: impl Fn(f64) -> Result<f64>,
) -> Result<Mat<f64>> {
    let n = op.grid.len();
    let rho_nodes: Vec<f64> = op
        .grid
        .nodes()
        .iter()
        .map(|&x| rho(x))
        .collect::<Result<_>>()?;
    for (node, &r) in rho_nodes.iter().enumerate() {
        if !r.is_finite() {
            return Err(Error::NonFiniteSample { what: "rho", node, x: op.grid.nodes()[node] });
        }
    }
    let h = &op.matrix;
    let mut out = Mat::<f64>::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        for i in 0..2 * n {
            let hij = h[(i, j)];
            if hij == 0.0 {
                continue;
            }
            let exponent = 0.5 * (rho_nodes[i % n] - rho_nodes[j % n]);
            if exponent.abs() > MAX_EXPONENT {
                return Err(Error::EnvelopeOverflow { node: i % n, exponent });
            }
            out[(i, j)] = hij * exponent.exp();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergySpectrum {
    /// Sorted by (Re, Im).
    #[serde(with = "complex_list")]
    pub eigenvalues: Vec<Complex64>,
    pub reality_tol: f64,
    pub n_real: usize,
    pub max_imag: f64,
}

impl EnergySpectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<Complex64>, reality_tol: f64) -> Self {
        eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let n_real = eigenvalues
            .iter()
            .filter(|e| is_real(e, reality_tol))
            .count();
        let max_imag = eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.im.abs()));
        Self {
            eigenvalues,
            reality_tol,
            n_real,
            max_imag,
        }
    }

    /// Writes the eigenvalues as a JSON array of {re, im}.
    pub fn eigenvalues_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.eigenvalues
                .iter()
                .map(|e| serde_json::json!({ "re": e.re, "im": e.im }))
                .collect(),
        )
    }
}

fn is_real(e: &Complex64, tol: f64) -> bool {
    e.im.abs() <= tol * e.re.abs().max(1.0)
}

mod complex_list {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct ReIm {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<ReIm> = v.iter().map(|c| ReIm { re: c.re, im: c.im }).collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let list = Vec::<ReIm>::deserialize(d)?;
        Ok(list.into_iter().map(|c| Complex64::new(c.re, c.im)).collect())
    }
}

/// Default reality tolerance max(1e-8, 10 h² scale).
pub fn default_reality_tol(h: f64, scale: f64) -> f64 {
    (10.0 * h * h * scale).max(1e-8)
}

/// All eigenvalues of a square real matrix via the dense non-symmetric solver.
pub fn spectrum(matrix: &Mat<f64>, reality_tol: f64) -> Result<EnergySpectrum> {
    let dim = matrix.nrows();
    if matrix.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: matrix.ncols() });
    }
    if (0..dim).any(|j| (0..dim).any(|i| !matrix[(i, j)].is_finite())) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    faer::set_global_parallelism(faer::Par::Seq);
    let eigenvalues = matrix
        .eigenvalues()
        .map_err(|_| Error::EigenNonConvergence { dim })?;
    if eigenvalues.len() != dim {
        return Err(Error::EigenNonConvergence { dim });
    }
    Ok(EnergySpectrum::from_eigenvalues(eigenvalues, reality_tol))
}

/// Spectrum of a CP-class operator, refusing matrices whose envelope
/// conditioning makes the computed eigenvalues meaningless.
pub fn spectrum_checked(
    op: &DiscreteDiracOperator,
    potential: &PotentialInstance,
    reality_tol: f64,
    max_log10_condition: f64,
) -> Result<EnergySpectrum> {
    let rho: Vec<f64> = op
        .grid
        .nodes()
        .iter()
        .map(|&x| potential.rho(x))
        .collect::<Result<_>>()?;
    let log10_cond = envelope_log10_condition(&rho);
    if !(log10_cond <= max_log10_condition) {
        return Err(Error::IllConditioned {
            log10_cond,
            limit_log10: max_log10_condition,
        });
    }
    spectrum(op.matrix(), reality_tol)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealityReport {
    pub n_total: usize,
    pub n_real: usize,
    pub tol: f64,
    pub max_imag: f64,
    /// Eigenvalues failing the reality test, inside the bulk cutoff.
    #[serde(with = "complex_list")]
    pub complex_outliers: Vec<Complex64>,
    /// Max |Im| restricted to |Re| <= bulk cutoff (all eigenvalues if no cutoff).
    pub bulk_max_imag: f64,
    pub bulk_cutoff: Option<f64>,
    /// Eigenvalues with |Re| above the cutoff (lattice band), reported separately.
    pub n_lattice_band: usize,
    pub pairing_residual: f64,
}

/// Counts real eigenvalues, lists complex ones and measures conjugate pairing.
pub fn reality_report(spec: &EnergySpectrum, tol: f64, bulk_cutoff: Option<f64>) -> RealityReport {
    let in_bulk = |e: &Complex64| bulk_cutoff.is_none_or(|c| e.re.abs() <= c);
    let n_real = spec.eigenvalues.iter().filter(|e| is_real(e, tol)).count();
    let complex_outliers = spec
        .eigenvalues
        .iter()
        .filter(|e| in_bulk(e) && !is_real(e, tol))
        .copied()
        .collect();
    let bulk_max_imag = spec
        .eigenvalues
        .iter()
        .filter(|e| in_bulk(e))
        .fold(0.0f64, |m, e| m.max(e.im.abs()));
    RealityReport {
        n_total: spec.eigenvalues.len(),
        n_real,
        tol,
        max_imag: spec.max_imag,
        complex_outliers,
        bulk_max_imag,
        bulk_cutoff,
        n_lattice_band: spec.eigenvalues.iter().filter(|e| !in_bulk(e)).count(),
        pairing_residual: conjugate_pairing_residual(&spec.eigenvalues),
    }
}

/// Greedy match of each eigenvalue to the nearest unused conjugate; returns
/// the largest matching distance.
pub fn conjugate_pairing_residual(eigenvalues: &[Complex64]) -> f64 {
    let mut used = vec![false; eigenvalues.len()];
    let mut worst = 0.0f64;
    for e in eigenvalues {
        let mut best: Option<(usize, f64)> = None;
        for (j, f) in eigenvalues.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (e - f.conj()).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            used[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

/// Matrix Market coordinate (real general) text; zero entries are skipped.
pub fn matrix_market(matrix: &Mat<f64>) -> String {
    use std::fmt::Write;
    let mut entries = Vec::new();
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            let v = matrix[(i, j)];
            if v != 0.0 {
                entries.push((i, j, v));
            }
        }
    }
    entries.sort_by_key(|&(i, j, _)| (i, j));
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", matrix.nrows(), matrix.ncols(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v);
    }
    out
}
