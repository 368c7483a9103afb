//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SimpsonTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_depth: u32,
}

impl Default for SimpsonTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-10,
            max_depth: 60,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fb: f64) -> Self {
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        Self {
            a,
            b,
            fa,
            fm,
            fb,
            whole,
        }
    }
}

/// Integrates `f` over `[a, b]` (either orientation) to the given tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: SimpsonTolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let fa = f(a);
    let fb = f(b);
    let root = Panel::new(&f, a, b, fa, fb);
    let mut evaluations = 3usize;
    let mut worst = 0.0f64;
    // The relative target is anchored on the coarse estimate of the whole integral.
    let target = tol.abs.max(tol.rel * root.whole.abs());
    let value = recurse(&f, &root, target, tol.max_depth, &mut evaluations, &mut worst);
    if !value.is_finite() || worst > target {
        return Err(Error::QuadratureFailed {
            a,
            b,
            estimate: worst,
            evaluations,
        });
    }
    Ok(value)
}

fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    p: &Panel,
    eps: f64,
    depth: u32,
    evaluations: &mut usize,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let left = Panel::new(f, p.a, m, p.fa, p.fm);
    let right = Panel::new(f, m, p.b, p.fm, p.fb);
    *evaluations += 2;
    let delta = left.whole + right.whole - p.whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        if depth == 0 {
            *worst = worst.max(delta.abs() / 15.0);
        }
        return left.whole + right.whole + delta / 15.0;
    }
    recurse(f, &left, 0.5 * eps, depth - 1, evaluations, worst)
        + recurse(f, &right, 0.5 * eps, depth - 1, evaluations, worst)
}
