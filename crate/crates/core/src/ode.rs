//! Adaptive Dormand–Prince 5(4) integration with exact landing on a
//! requested output grid.

use crate::error::{Error, Result};

/// Dormand–Prince coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_initial: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, max_steps: 5_000_000, h_initial: 1e-3 }
    }
}

/// Integrate `y' = f(x, y)` from `x0` through the sorted `outputs` grid,
/// recording the state at every output point (which the stepper lands on
/// exactly). `scale(x)` multiplies the absolute tolerance, so errors can be
/// controlled relative to an exponentially growing envelope.
pub fn integrate_to_grid<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    outputs: &[f64],
    scale: impl Fn(f64) -> f64,
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>> {
    let mut results = Vec::with_capacity(outputs.len());
    let mut x = x0;
    let mut y = y0;
    let mut h = opts.h_initial;
    let mut steps = 0usize;
    let mut k = [[0.0; N]; 7];
    k[0] = f(x, &y);

    for &target in outputs {
        if target < x - 1e-14 {
            return Err(Error::Grid("ode: outputs must be non-decreasing".into()));
        }
        if (target - x).abs() < 1e-14 {
            results.push(y);
            continue;
        }
        loop {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration(format!(
                    "ode: step limit {} exceeded at x = {x:.6e}",
                    opts.max_steps
                )));
            }
            let mut hs = h.min(target - x);
            if hs <= 0.0 {
                hs = target - x;
            }
            // Stages.
            for s in 0..6 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += hs * a * kj[i];
                        }
                    }
                }
                k[s + 1] = f(x + C[s] * hs, &ys);
            }
            let mut y5 = y;
            let mut y4 = y;
            for (s, ks) in k.iter().enumerate() {
                for i in 0..N {
                    y5[i] += hs * B5[s] * ks[i];
                    y4[i] += hs * B4[s] * ks[i];
                }
            }
            // Error estimate relative to the scaled envelope.
            let sc = opts.atol * scale(x + hs).max(1.0);
            let mut err: f64 = 0.0;
            for i in 0..N {
                let tol = sc + opts.rtol * y5[i].abs().max(y4[i].abs());
                err += ((y5[i] - y4[i]) / tol).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if err <= 1.0 {
                x += hs;
                y = y5;
                k[0] = k[6]; // FSAL
                let fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
                h = (hs * fac.clamp(0.2, 5.0)).max(1e-14);
                if (target - x).abs() < 1e-12 * (1.0 + target.abs()) {
                    results.push(y);
                    break;
                }
            } else {
                let fac = 0.9 * err.powf(-0.2);
                h = hs * fac.clamp(0.1, 0.9);
                if h < 1e-14 * (1.0 + x.abs()) {
                    return Err(Error::Integration(format!(
                        "ode: step size underflow at x = {x:.6e}"
                    )));
                }
                k[0] = f(x, &y);
            }
        }
    }
    Ok(results)
}
