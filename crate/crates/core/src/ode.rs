//! Embedded Dormand–Prince 5(4) integrator for small complex systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self {
            rel: 1e-9,
            abs: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

impl OdeTolerance {
    pub fn with_rel(rel: f64) -> Self {
        Self {
            rel,
            abs: rel * 1e-3,
            ..Self::default()
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-order weights minus the embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State<const D: usize> = [Complex64; D];

fn axpy<const D: usize>(y: &State<D>, h: f64, terms: &[(f64, &State<D>)]) -> State<D> {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..D {
            out[i] += k[i] * (h * coef);
        }
    }
    out
}

/// Integrates y' = f(x, y) from (x0, y0) and returns y at each target, in order.
/// Targets must be monotone, all on one side of x0; steps are clipped to land on them.
pub fn integrate<const D: usize, F>(
    f: F,
    x0: f64,
    y0: State<D>,
    targets: &[f64],
    tol: OdeTolerance,
) -> Result<Vec<State<D>>>
where
    F: Fn(f64, &State<D>) -> State<D>,
{
    let mut out = Vec::with_capacity(targets.len());
    let Some(&last) = targets.last() else {
        return Ok(out);
    };
    let dir = if last >= x0 { 1.0 } else { -1.0 };
    let span = (last - x0).abs();

    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = if span > 0.0 { (span * 1e-3).min(1e-2) } else { 0.0 };
    let mut steps = 0usize;

    for &target in targets {
        if (target - x) * dir < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ODE targets must be monotone in the integration direction ({target} is behind {x})"
            )));
        }
        while (target - x) * dir > 0.0 {
            let remaining = (target - x).abs();
            let hit = h >= remaining;
            let step = if hit { remaining } else { h };
            let hs = dir * step;

            let k2 = f(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
            let k3 = f(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                x + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + hs,
                &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let x_new = if hit { target } else { x + hs };
            let k7 = f(x_new, &y_new);

            let mut err = 0.0f64;
            for i in 0..D {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = tol.abs + tol.rel * y[i].norm().max(y_new[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                err = f64::INFINITY;
            }

            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::StepSizeUnderflow { x, h: step });
            }

            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // a step shortened to hit a target should not shrink the next proposal
                h = if hit { h.max(step * grow) } else { step * grow };
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            if h < 1e-13 * x.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { x, h });
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_matches_closed_form() {
        let c = |v: f64| Complex64::new(v, 0.0);
        let targets: Vec<f64> = (1..=20).map(|i| 0.5 * i as f64).collect();
        let ys = integrate(
            |_, y: &[Complex64; 2]| [y[1], -y[0]],
            0.0,
            [c(1.0), c(0.0)],
            &targets,
            OdeTolerance::default(),
        )
        .unwrap();
        for (x, y) in targets.iter().zip(&ys) {
            assert!((y[0].re - x.cos()).abs() < 1e-8);
            assert!((y[1].re + x.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn integrates_backwards() {
        let targets = [-0.5, -1.0, -2.0];
        let ys = integrate(
            |_, y: &[Complex64; 1]| [y[0] * Complex64::new(0.0, 1.0)],
            0.0,
            [Complex64::new(1.0, 0.0)],
            &targets,
            OdeTolerance::default(),
        )
        .unwrap();
        for (x, y) in targets.iter().zip(&ys) {
            let expect = Complex64::new(0.0, *x).exp();
            assert!((y[0] - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn target_at_start_returns_initial_state() {
        let y0 = [Complex64::new(2.0, -1.0)];
        let ys = integrate(|_, y: &[Complex64; 1]| *y, 0.0, y0, &[0.0, 0.1], OdeTolerance::default()).unwrap();
        assert_eq!(ys[0], y0);
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y², y(0) = 1 blows up at x = 1
        let r = integrate(
            |_, y: &[Complex64; 1]| [y[0] * y[0]],
            0.0,
            [Complex64::new(1.0, 0.0)],
            &[2.0],
            OdeTolerance::default(),
        );
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }
}
