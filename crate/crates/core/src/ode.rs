//! Adaptive Dormand–Prince 5(4) integration for small first-order systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step magnitude before giving up.
    pub min_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            min_step: 1e-12,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights are the last row of A; these are the differences to
// the embedded fourth-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction), updating
/// `y` in place. `h0` is the initial step magnitude.
pub fn dopri5<F>(mut f: F, x0: f64, x1: f64, y: &mut [f64], tol: Tolerances, h0: f64) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let span = (x1 - x0).abs();
    if span == 0.0 {
        return Ok(());
    }
    let mut h = h0.abs().min(span);
    let mut x = x0;
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];

    f(x, y, &mut k[0]);
    loop {
        let remaining = (x1 - x) * dir;
        if remaining <= span * 1e-15 {
            return Ok(());
        }
        if h > remaining {
            h = remaining;
        }
        let hs = h * dir;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += hs * A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s);
            f(x + C[s] * hs, &tmp, &mut tail[0]);
        }
        // Stage 7 is evaluated at the fifth-order solution (FSAL).
        ynew.copy_from_slice(&tmp);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * hs;
            let sc = tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs());
            let r = (e / sc).abs();
            // f64::max would drop a NaN.
            err = if r.is_nan() { f64::INFINITY } else { err.max(r) };
        }
        if ynew.iter().any(|v| !v.is_finite()) {
            err = f64::INFINITY;
        }
        if err <= 1.0 {
            x += hs;
            y.copy_from_slice(&ynew);
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            if h < tol.min_step {
                return Err(Error::Stiffness {
                    x,
                    min_step: tol.min_step,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_backwards() {
        let mut y = [0.0, 1.0];
        dopri5(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            -10.0,
            &mut y,
            Tolerances::default(),
            0.1,
        )
        .unwrap();
        assert!((y[0] - (-10.0f64).sin()).abs() < 1e-10);
        assert!((y[1] - (-10.0f64).cos()).abs() < 1e-10);
    }

    #[test]
    fn blow_up_reports_stiffness() {
        // y' = y^2 from y(0) = 1 blows up at x = 1.
        let mut y = [1.0];
        let r = dopri5(|_, y, dy| dy[0] = y[0] * y[0], 0.0, 2.0, &mut y, Tolerances::default(), 0.1);
        assert!(matches!(r, Err(Error::Stiffness { .. }) | Err(Error::NumericalRange { .. })));
    }
}
