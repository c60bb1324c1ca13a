//! Independent reference solvers used to cross-check kernels.
//!
//! The radial wave equation on H³ with a scalar potential reduces
//! exactly to a flat half-line problem: with `v = sinh(r)·u`,
//! `∂²_t u + (-Δ - 1 + V) u = 0  ⟺  ∂²_t v - ∂²_r v + V(r) v = 0`,
//! Dirichlet at r = 0. The same substitution with `v = √a · u` handles the
//! radially perturbed metric (the potential becomes -√a·Error). These 1D
//! problems are solved here with a plain leapfrog scheme, giving a
//! reference path that shares no code with the kernel algebra.
//!
//! The free Schrödinger evolution reduces the same way, and the flat 1D
//! propagator `(4πt)^{-1/2} e^{i(π/4 - x²/(4t))}` with odd reflection gives
//! a closed-form evolution oracle.

use crate::error::{Error, Result};
use num_complex::Complex64;

use std::f64::consts::PI;

/// Leapfrog solution of `v_tt = v_rr - W(r) v` on [0, r_max] with
/// `v(0,·) = 0`, `v_t(0,·) = g`, Dirichlet ends. Returns the solution rows
/// at the requested sample times (which are snapped to the step grid; the
/// step is chosen so the samples land exactly).
pub struct Wave1dSolution {
    pub dr: f64,
    pub rs: Vec<f64>,
    pub samples: Vec<(f64, Vec<f64>)>,
}

pub fn wave_1d(
    w: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    r_max: f64,
    dr: f64,
    cfl: f64,
    sample_dt: f64,
    n_samples: usize,
) -> Result<Wave1dSolution> {
    if !(0.0 < cfl && cfl <= 1.0) {
        return Err(Error::Domain("cfl must be in (0, 1]".into()));
    }
    if sample_dt <= 0.0 || n_samples == 0 {
        return Err(Error::Domain("need a positive sample interval".into()));
    }
    let n = (r_max / dr).round() as usize;
    let rs: Vec<f64> = (0..=n).map(|k| k as f64 * dr).collect();
    // step size divides the sample interval exactly
    let steps_per_sample = (sample_dt / (cfl * dr)).ceil() as usize;
    let dt = sample_dt / steps_per_sample as f64;
    let lambda2 = (dt / dr) * (dt / dr);

    let wv: Vec<f64> = rs.iter().map(|&r| w(r)).collect();
    let gv: Vec<f64> = rs.iter().map(|&r| g(r)).collect();

    // v(dt) = dt·g + dt³/6 (g'' - W g) keeps the scheme second order
    let mut prev = vec![0.0; n + 1];
    let mut cur = vec![0.0; n + 1];
    for k in 1..n {
        let gpp = (gv[k + 1] - 2.0 * gv[k] + gv[k - 1]) / (dr * dr);
        cur[k] = dt * gv[k] + dt * dt * dt / 6.0 * (gpp - wv[k] * gv[k]);
    }

    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n_samples);
    let total_steps = steps_per_sample * n_samples;
    // at the top of iteration `step`, cur holds v at time step·dt
    for step in 1..=total_steps {
        if step % steps_per_sample == 0 {
            out.push(((step / steps_per_sample) as f64 * sample_dt, cur.clone()));
        }
        if step == total_steps {
            break;
        }
        let mut next = vec![0.0; n + 1];
        for k in 1..n {
            next[k] = 2.0 * cur[k] - prev[k]
                + lambda2 * (cur[k + 1] - 2.0 * cur[k] + cur[k - 1])
                - dt * dt * wv[k] * cur[k];
        }
        prev = std::mem::take(&mut cur);
        cur = next;
    }
    Ok(Wave1dSolution { dr, rs, samples: out })
}

/// Flat 1D free Schrödinger propagator `(4πt)^{-1/2} e^{i(π/4 - x²/(4t))}`.
pub fn schrodinger_1d_propagator(t: f64, x: f64) -> Complex64 {
    let amp = (4.0 * PI * t.abs()).powf(-0.5);
    let phase = if t > 0.0 { PI / 4.0 - x * x / (4.0 * t) } else { -PI / 4.0 - x * x / (4.0 * t) };
    Complex64::from_polar(amp, phase)
}

/// Free evolution of Dirichlet data on the half line by odd reflection:
/// `v(t,r) = ∫₀^∞ [G_t(r-r') - G_t(r+r')] v₀(r') dr'`.
pub fn schrodinger_1d_evolve(
    v0: &[f64],
    dr: f64,
    t: f64,
    rs_out: &[f64],
) -> Vec<Complex64> {
    rs_out
        .iter()
        .map(|&r| {
            let vals: Vec<Complex64> = v0
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let rp = k as f64 * dr;
                    (schrodinger_1d_propagator(t, r - rp)
                        - schrodinger_1d_propagator(t, r + rp))
                        * v
                })
                .collect();
            // trapezoid is adequate: the integrand is smooth and v0 compact
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..vals.len() {
                acc += 0.5 * dr * (vals[k] + vals[k - 1]);
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_wave_reproduces_shell_solution() {
        // W = 0, g a narrow bump: v(t,r) = (1/2)∫_{r-t}^{r+t} g (d'Alembert,
        // odd extension); test against the exact formula
        let g = |r: f64| {
            let u: f64 = (r - 1.0) / 0.2;
            if u.abs() < 1.0 {
                (1.0 - u * u).powi(3)
            } else {
                0.0
            }
        };
        let anti = |x: f64| -> f64 {
            // split at the bump's support edges so the oracle quadrature
            // keeps full order
            crate::quad::integrate_gl_split(g, 0.0, x.max(0.0), 32, &[0.8, 1.2])
        };
        let sol = wave_1d(&|_| 0.0, &g, 6.0, 5e-4, 0.9, 1.5, 1).unwrap();
        let (t, row) = &sol.samples[0];
        for k in (40..4000).step_by(400) {
            let r = sol.rs[k];
            // v = (1/2)[A(r+t) - A(r-t)] where A(x) = ∫₀^x g_odd is even
            let a = |x: f64| anti(x.abs());
            let want = 0.5 * (a(r + t) - a(r - t));
            assert!((row[k] - want).abs() < 2e-6, "r={r}: {} vs {want}", row[k]);
        }
    }

    #[test]
    fn wave_converges_second_order_with_potential() {
        let w = |r: f64| if r < 1.0 { 0.3 } else { 0.0 };
        let g = |r: f64| (-(r - 1.2f64).powi(2) / 0.08).exp();
        let fine = wave_1d(&w, &g, 8.0, 2.5e-4, 0.9, 2.0, 1).unwrap();
        let coarse = wave_1d(&w, &g, 8.0, 1e-3, 0.9, 2.0, 1).unwrap();
        let mid = wave_1d(&w, &g, 8.0, 5e-4, 0.9, 2.0, 1).unwrap();
        // compare at a common radius
        let at = |sol: &Wave1dSolution, r: f64| {
            let k = (r / sol.dr).round() as usize;
            sol.samples[0].1[k]
        };
        let e1 = (at(&coarse, 2.5) - at(&fine, 2.5)).abs();
        let e2 = (at(&mid, 2.5) - at(&fine, 2.5)).abs();
        assert!(e2 < 0.4 * e1, "second-order convergence: {e1} vs {e2}");
    }

    #[test]
    fn schrodinger_propagator_normalization() {
        // ∫ G_t dx = 1
        let t = 0.7;
        let dr = 2e-3;
        let x_max = 2000.0;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut x = -x_max;
        while x < x_max {
            acc += schrodinger_1d_propagator(t, x) * dr;
            x += dr;
        }
        // truncation tail of the Fresnel integral is O(t/(X √t))
        assert!((acc - Complex64::new(1.0, 0.0)).norm() < 1e-3, "{acc}");
    }
}
