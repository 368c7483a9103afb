//! Discrete charge conjugation (C = gamma^5), parity and the symmetry defects
//! of an assembled Hamiltonian.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{derivative_matrix, max_norm, DiscreteDiracOperator, GridSpec};

/// A matrix with exactly one ±1 per row: (S v)[r] = sign[r] * v[source[r]].
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPermutation {
    source: Vec<usize>,
    sign: Vec<f64>,
}

impl SignedPermutation {
    pub fn dim(&self) -> usize {
        self.source.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.source
            .iter()
            .zip(&self.sign)
            .map(|(&s, &g)| g * v[s])
            .collect()
    }

    /// self ∘ other.
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        let source = self.source.iter().map(|&s| other.source[s]).collect();
        let sign = self
            .source
            .iter()
            .zip(&self.sign)
            .map(|(&s, &g)| g * other.sign[s])
            .collect();
        SignedPermutation { source, sign }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        for (r, (&s, &g)) in self.source.iter().zip(&self.sign).enumerate() {
            m[(r, s)] = g;
        }
        m
    }

    // S[l][c] != 0 iff source[l] == c
    fn inverse(&self) -> Vec<usize> {
        let mut inverse = vec![0usize; self.dim()];
        for (l, &s) in self.source.iter().enumerate() {
            inverse[s] = l;
        }
        inverse
    }

    /// S H, by row gathering.
    pub fn left_multiply(&self, h: &Mat<f64>) -> Mat<f64> {
        Mat::from_fn(h.nrows(), h.ncols(), |r, c| self.sign[r] * h[(self.source[r], c)])
    }

    /// H S, by column gathering.
    pub fn right_multiply(&self, h: &Mat<f64>) -> Mat<f64> {
        let inverse = self.inverse();
        Mat::from_fn(h.nrows(), h.ncols(), |r, c| {
            let l = inverse[c];
            h[(r, l)] * self.sign[l]
        })
    }

    /// S H S, computed by index gathering.
    pub fn conjugate(&self, h: &Mat<f64>) -> Mat<f64> {
        let inverse = self.inverse();
        Mat::from_fn(h.nrows(), h.ncols(), |r, c| {
            let l = inverse[c];
            self.sign[r] * h[(self.source[r], l)] * self.sign[l]
        })
    }
}

/// C = [[0, -I], [I, 0]] on the (chi_plus, chi_minus) block layout.
pub fn charge_conjugation(n: usize) -> Result<SignedPermutation> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid size must be at least 2, got {n}")));
    }
    let mut source = Vec::with_capacity(2 * n);
    let mut sign = Vec::with_capacity(2 * n);
    for i in 0..n {
        source.push(n + i);
        sign.push(-1.0);
    }
    for i in 0..n {
        source.push(i);
        sign.push(1.0);
    }
    Ok(SignedPermutation { source, sign })
}

/// Node reversal inside each spinor block.
pub fn parity(grid: &GridSpec) -> Result<SignedPermutation> {
    let n = grid.len();
    let nodes = grid.nodes();
    if (0..n).any(|i| nodes[i] != -nodes[n - 1 - i]) {
        return Err(Error::InvalidParameter("parity needs a grid symmetric about 0".into()));
    }
    let mut source = Vec::with_capacity(2 * n);
    for block in 0..2 {
        for i in 0..n {
            source.push(block * n + (n - 1 - i));
        }
    }
    Ok(SignedPermutation {
        source,
        sign: vec![1.0; 2 * n],
    })
}

/// Dense 2N x 2N charge conjugation matrix.
pub fn charge_conjugation_matrix(n: usize) -> Result<Mat<f64>> {
    Ok(charge_conjugation(n)?.to_dense())
}

/// Dense 2N x 2N parity matrix.
pub fn parity_matrix(grid: &GridSpec) -> Result<Mat<f64>> {
    Ok(parity(grid)?.to_dense())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// max |H - H^†|
    pub hermiticity_defect: f64,
    /// max |(CP) H (CP) - H|
    pub cp_defect: f64,
    /// max |(PT) H (PT) - H|, T = entrywise complex conjugation
    pub pt_defect: f64,
    /// max |C H C - target|, target = H with off-diagonal potentials swapped and D -> -D
    pub gamma5_check: f64,
    /// max |(CP) H + H (CP)|; (CP)² = -1, so invariance means anticommutation
    pub cp_anticommutator: f64,
    pub matrix_dim: usize,
    pub scale: f64,
    pub grid_half_width: f64,
    pub grid_n: usize,
    pub grid_h: f64,
    pub label: String,
}

impl SymmetryReport {
    pub fn cp_relative(&self) -> f64 {
        self.cp_defect / self.scale
    }
}

fn max_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    best
}

/// C H C for the block layout.
pub fn gamma5_conjugate(op: &DiscreteDiracOperator) -> Result<Mat<f64>> {
    let c = charge_conjugation(op.grid().len())?;
    Ok(c.conjugate(op.matrix()))
}

/// The transposed-potential matrix [[m+S+V, -D+U], [D+W, -m-S+V]].
pub fn gamma5_target(op: &DiscreteDiracOperator) -> Mat<f64> {
    let grid = op.grid();
    let n = grid.len();
    let d = derivative_matrix(grid);
    let s = op.samples();
    let m = op.mass();
    let mut t = Mat::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        t[(i, i)] = m + s.s[i] + s.v[i];
        t[(n + i, n + i)] = -m - s.s[i] + s.v[i];
        for j in 0..n {
            t[(i, n + j)] = -d[(i, j)] + if i == j { s.u[i] } else { 0.0 };
            t[(n + i, j)] = d[(i, j)] + if i == j { s.w[i] } else { 0.0 };
        }
    }
    t
}

pub fn symmetry_report(op: &DiscreteDiracOperator) -> Result<SymmetryReport> {
    let grid = op.grid();
    let n = grid.len();
    let h = op.matrix();
    if h.nrows() != 2 * n || h.ncols() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, found: h.nrows() });
    }
    let c = charge_conjugation(n)?;
    let p = parity(grid)?;
    let cp = c.compose(&p);

    let ht = h.transpose().to_owned();
    let hermiticity_defect = max_diff(h, &ht);
    let cp_defect = max_diff(&cp.conjugate(h), h);

    // T conjugates entries; for a real matrix it acts trivially
    let pt_defect = max_diff(&p.conjugate(h), h);

    let gamma5_check = max_diff(&c.conjugate(h), &gamma5_target(op));

    let cp_anticommutator = max_diff(&cp.left_multiply(h), &(-cp.right_multiply(h)));

    Ok(SymmetryReport {
        hermiticity_defect,
        cp_defect,
        pt_defect,
        gamma5_check,
        cp_anticommutator,
        matrix_dim: 2 * n,
        scale: max_norm(h),
        grid_half_width: grid.half_width(),
        grid_n: n,
        grid_h: grid.h(),
        label: op.label().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_cp_class, build_hamiltonian};
    use crate::potential::{Family, PotentialInstance};

    fn dense_identity(n: usize) -> Mat<f64> {
        Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn c_squares_to_minus_identity() {
        let c = charge_conjugation_matrix(4).unwrap();
        let c2 = &c * &c;
        assert_eq!(c2, -dense_identity(8));
    }

    #[test]
    fn c_swaps_components() {
        let c = charge_conjugation(3).unwrap();
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(c.apply(&v), vec![-4.0, -5.0, -6.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn c_transpose_is_minus_c() {
        let c = charge_conjugation_matrix(5).unwrap();
        assert_eq!(c.transpose().to_owned(), -&c);
    }

    #[test]
    fn c_rejects_tiny_grid() {
        assert!(charge_conjugation(1).is_err());
    }

    #[test]
    fn parity_reflects_samples() {
        let g = GridSpec::new(2.0, 7).unwrap();
        let p = parity(&g).unwrap();
        let mut v: Vec<f64> = g.nodes().to_vec();
        v.extend(g.nodes());
        let pv = p.apply(&v);
        for (a, b) in pv.iter().zip(&v) {
            assert_eq!(*a, -*b);
        }
        let pm = parity_matrix(&g).unwrap();
        assert_eq!(&pm * &pm, dense_identity(14));
    }

    #[test]
    fn parity_flips_derivative() {
        let g = GridSpec::new(1.0, 5).unwrap();
        let d = derivative_matrix(&g);
        let j = Mat::from_fn(5, 5, |r, c| if r + c == 4 { 1.0 } else { 0.0 });
        let pdp = &j * &d * &j;
        assert_eq!(pdp, -&d);
    }

    #[test]
    fn c_and_p_commute() {
        let g = GridSpec::new(1.0, 6).unwrap();
        let c = charge_conjugation_matrix(6).unwrap();
        let p = parity_matrix(&g).unwrap();
        assert_eq!(&c * &p, &p * &c);
        let cp = &c * &p;
        assert_eq!(&cp * &cp, -dense_identity(12));
    }

    #[test]
    fn fast_conjugation_matches_dense_product() {
        let g = GridSpec::new(2.0, 6).unwrap();
        let pot = PotentialInstance::new(Family::Exp, -1.0, 0.4, 0).unwrap();
        let op = build_cp_class(&g, 1.3, &pot).unwrap();
        let cp = charge_conjugation(6).unwrap().compose(&parity(&g).unwrap());
        let dense = cp.to_dense();
        let slow = &dense * op.matrix() * &dense;
        assert!(max_diff(&slow, &cp.conjugate(op.matrix())) == 0.0);
        assert!(max_diff(&(&dense * op.matrix()), &cp.left_multiply(op.matrix())) == 0.0);
        assert!(max_diff(&(op.matrix() * &dense), &cp.right_multiply(op.matrix())) == 0.0);
    }

    #[test]
    fn even_potential_is_hermitian_and_cp_symmetric() {
        let g = GridSpec::new(3.0, 30).unwrap();
        let op = build_hamiltonian(&g, 1.0, |_| 0.0, |_| 0.0, |x| x * x, |x| x * x).unwrap();
        let r = symmetry_report(&op).unwrap();
        assert_eq!(r.hermiticity_defect, 0.0);
        assert_eq!(r.cp_defect, 0.0);
    }

    #[test]
    fn odd_potential_defects() {
        let (a, mu) = (1.0, 1.0);
        let g = GridSpec::new(3.0, 41).unwrap();
        let pot = PotentialInstance::new(Family::Sinh, a, mu, 0).unwrap();
        let op = build_cp_class(&g, 1.0, &pot).unwrap();
        let r = symmetry_report(&op).unwrap();
        let expect = g
            .nodes()
            .iter()
            .fold(0.0f64, |m, &x| m.max((pot.w(x) - pot.w(-x)).abs()));
        assert_eq!(r.hermiticity_defect, expect);
        // outermost node sits at L - h
        let edge = 2.0 * a * (mu * (g.half_width() - g.h())).sinh();
        assert!((expect - edge).abs() <= 1e-13 * edge);
        assert!(r.cp_defect <= 1e-13 * r.scale);
    }

    #[test]
    fn exp_class_is_cp_but_not_pt_symmetric() {
        let g = GridSpec::new(10.0, 50).unwrap();
        let pot = PotentialInstance::new(Family::Exp, -1.0, 0.2, 0).unwrap();
        let op = build_cp_class(&g, 1.0, &pot).unwrap();
        let r = symmetry_report(&op).unwrap();
        assert!(r.cp_defect <= 1e-13 * r.scale);
        assert!(r.pt_defect > 0.0);
        assert!(r.hermiticity_defect > 0.0);
        // both formulations of CP invariance agree
        assert!(r.cp_anticommutator <= 1e-13 * r.scale);
        assert_eq!(r.cp_anticommutator, r.cp_defect);
    }

    #[test]
    fn gamma5_transposes_potential_roles() {
        let g = GridSpec::new(2.0, 9).unwrap();
        let free = build_hamiltonian(&g, 1.0, |_| 0.0, |_| 0.0, |_| 0.0, |_| 0.0).unwrap();
        let d = derivative_matrix(&g);
        let c5 = gamma5_conjugate(&free).unwrap();
        for i in 0..9 {
            assert_eq!(c5[(i, i)], 1.0);
            assert_eq!(c5[(9 + i, 9 + i)], -1.0);
            for j in 0..9 {
                assert_eq!(c5[(i, 9 + j)], -d[(i, j)]);
                assert_eq!(c5[(9 + i, j)], d[(i, j)]);
            }
        }

        let pot = PotentialInstance::new(Family::Sinh, 0.8, 0.6, 0).unwrap();
        let op = build_cp_class(&g, 1.0, &pot).unwrap();
        let c5 = gamma5_conjugate(&op).unwrap();
        let s = op.samples();
        for i in 0..9 {
            assert_eq!(c5[(i, 9 + i)], s.u[i]);
            assert_eq!(c5[(9 + i, i)], s.w[i]);
        }
        assert_eq!(symmetry_report(&op).unwrap().gamma5_check, 0.0);

        // parity undoes the transposition when U(x) = W(-x)
        let p = parity(&g).unwrap();
        assert_eq!(max_diff(&p.conjugate(&c5), op.matrix()), 0.0);
    }

    #[test]
    fn gamma5_target_differs_when_v_nonzero() {
        // C H C flips the sign of V on the diagonal; the transposed target keeps it
        let g = GridSpec::new(2.0, 5).unwrap();
        let op = build_hamiltonian(&g, 1.0, |_| 0.0, |_| 0.3, |_| 0.0, |_| 0.0).unwrap();
        let r = symmetry_report(&op).unwrap();
        assert!((r.gamma5_check - 0.6).abs() < 1e-15);
    }
}
