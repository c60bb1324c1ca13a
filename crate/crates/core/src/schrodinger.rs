//! Schrödinger kernel on H³ and t^{-3/2} decay measurement.
//!
//! The free kernel is evaluated through the spectral route
//! `K(t,r) = (2π² sinh r)^{-1} ∫₀^∞ e^{itλ²} λ sin(λr) dλ`
//! with Filon-type oscillatory quadrature (cubic amplitude interpolation
//! against exact chirp moments) plus an analytic Fresnel-regularized tail.
//! The closed Gaussian–Fresnel evaluation of the same integral,
//! `|K| = (4πt)^{-3/2} r/sinh r`, serves as an independent oracle.
//!
//! The time-domain route transforms a sine-propagator kernel S(s):
//! `K(t,ρ) = (√(iπ/t)/(2πt)) ∫₀^∞ i s e^{-is²/(4t)} S(s)(ρ) ds`,
//! which applied to the perturbed Born-series kernel yields the perturbed
//! Schrödinger evolution.

use crate::error::{Error, Result};
use crate::fresnel::{chirp_integral_from_zero, chirp_integral_tail};
use crate::parametrix::SpaceTimeKernel;
use crate::quad::integrate_uniform;
use num_complex::Complex64;
use rayon::prelude::*;

use std::f64::consts::PI;

/// One time slice of the complex radial Schrödinger kernel.
#[derive(Debug, Clone)]
pub struct SchrodingerKernel {
    pub t: f64,
    pub rs: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SchrodingerKernel {
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Closed-form free kernel (Gaussian–Fresnel evaluation of the spectral
/// integral): `(4πt)^{-3/2} (r/sinh r) e^{i(3π/4 - r²/(4t))}`, extended to
/// t < 0 by hermitian symmetry.
pub fn free_kernel_closed_form(t: f64, r: f64) -> Complex64 {
    if t < 0.0 {
        return free_kernel_closed_form(-t, r).conj();
    }
    let amp = (4.0 * PI * t).powf(-1.5) * ratio_r_sinh(r);
    Complex64::from_polar(amp, 3.0 * PI / 4.0 - r * r / (4.0 * t))
}

fn ratio_r_sinh(r: f64) -> f64 {
    if r < 1e-8 {
        1.0 - r * r / 6.0
    } else {
        r / r.sinh()
    }
}

/// Lagrange-to-power-basis coefficients for cubic interpolation at the
/// normalized nodes {-1, -1/3, 1/3, 1} (rows: node, cols: power of x).
const FILON_BASIS: [[f64; 4]; 4] = [
    [-1.0, 1.0, 9.0, -9.0],
    [9.0, -27.0, -9.0, 27.0],
    [9.0, 27.0, -9.0, -27.0],
    [-1.0, -1.0, 9.0, 9.0],
];

/// Centered chirp moments `∫_a^b (λ-λm)^k e^{itλ²} dλ`, k = 0..=3, by the
/// stable recursion
/// `M_k = (1/2it)[μ^{k-1} e]_a^b - ((k-1)/2it) M_{k-2} - λm M_{k-1}`.
fn centered_chirp_moments(t: f64, a: f64, b: f64) -> [Complex64; 4] {
    let lm = 0.5 * (a + b);
    let h2 = 0.5 * (b - a);
    let ea = Complex64::from_polar(1.0, t * a * a);
    let eb = Complex64::from_polar(1.0, t * b * b);
    let inv2it = Complex64::new(0.0, -1.0 / (2.0 * t)); // 1/(2it)
    let mut m = [Complex64::new(0.0, 0.0); 4];
    m[0] = chirp_integral_from_zero(t, b) - chirp_integral_from_zero(t, a);
    for k in 1..4 {
        let mu_a = (-h2).powi(k as i32 - 1);
        let mu_b = h2.powi(k as i32 - 1);
        let boundary = mu_b * eb - mu_a * ea;
        let mut v = inv2it * boundary - lm * m[k - 1];
        if k >= 2 {
            v -= inv2it * ((k - 1) as f64) * m[k - 2];
        }
        m[k] = v;
    }
    m
}

/// Filon integration of `∫_a^b g(λ) e^{itλ²} dλ` with cubic interpolation
/// of the amplitude per panel.
fn filon_chirp(t: f64, g: impl Fn(f64) -> f64, a: f64, b: f64, panel: f64) -> Complex64 {
    let n = ((b - a) / panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..n {
        let pa = a + p as f64 * h;
        let pb = pa + h;
        let lm = 0.5 * (pa + pb);
        let h2 = 0.5 * h;
        // amplitude samples at the normalized nodes
        let ys = [
            g(lm - h2),
            g(lm - h2 / 3.0),
            g(lm + h2 / 3.0),
            g(lm + h2),
        ];
        // power-basis coefficients of the cubic interpolant in x = μ/h2
        let mut coef = [0.0f64; 4];
        for (i, y) in ys.iter().enumerate() {
            for (k, c) in coef.iter_mut().enumerate() {
                *c += y * FILON_BASIS[i][k] / 16.0;
            }
        }
        let m = centered_chirp_moments(t, pa, pb);
        for (k, c) in coef.iter().enumerate() {
            acc += *c / h2.powi(k as i32) * m[k];
        }
    }
    acc
}

/// Spectral integral `I(t,r) = ∫₀^∞ e^{itλ²} λ sin(λr) dλ` (Fresnel
/// regularized): Filon on [0, Λ] plus the exact tail
/// `(1/2i)[J₊ - J₋]` with
/// `J_± = e^{∓ir²/4t} [-e^{itX±²}/(2it) ∓ (r/2t) ∫_{X±}^∞ e^{itv²} dv]`,
/// X± = Λ ± r/(2t).
pub fn spectral_integral(t: f64, r: f64) -> Result<Complex64> {
    spectral_integral_tuned(t, r, 1.0, 0.0)
}

#[doc(hidden)]
pub fn spectral_integral_tuned(
    t: f64,
    r: f64,
    panel_scale: f64,
    cutoff_extra: f64,
) -> Result<Complex64> {
    if t <= 0.0 {
        return Err(Error::Domain("spectral integral needs t > 0".into()));
    }
    let lambda_star = r / (2.0 * t);
    let cutoff = lambda_star + 6.0 / t.sqrt() + 2.0 + cutoff_extra;
    if cutoff * cutoff * t > 1e14 {
        return Err(Error::Domain(format!(
            "phase resolution exhausted at t = {t}, r = {r}"
        )));
    }
    let panel = (0.04 / r.max(1.0)).min(0.1) * panel_scale;
    let main = if r == 0.0 {
        filon_chirp(t, |l| l * l, 0.0, cutoff, panel)
    } else {
        filon_chirp(t, |l| l * (l * r).sin(), 0.0, cutoff, panel)
    };
    let two_it = Complex64::new(0.0, 2.0 * t);
    let tail = if r == 0.0 {
        // ∫_Λ^∞ λ² e^{itλ²} dλ = -Λ e^{itΛ²}/(2it) - (1/2it) ∫_Λ^∞ e^{itv²} dv
        let e = Complex64::from_polar(1.0, t * cutoff * cutoff);
        -cutoff * e / two_it - chirp_integral_tail(t, cutoff) / two_it
    } else {
        // tλ² ± rλ = t(λ ± λ*)² - r²/(4t), so both branches share the
        // stationary phase factor
        let phase = Complex64::from_polar(1.0, -r * r / (4.0 * t));
        let j_branch = |sign: f64| -> Complex64 {
            let x = cutoff + sign * lambda_star;
            let e = Complex64::from_polar(1.0, t * x * x);
            -e / two_it - sign * lambda_star * chirp_integral_tail(t, x)
        };
        phase * (j_branch(1.0) - j_branch(-1.0)) / Complex64::new(0.0, 2.0)
    };
    Ok(main + tail)
}

/// Free kernel K(t, r) on a radial grid via the oscillatory spectral route,
/// extended to t < 0 by hermitian symmetry.
pub fn free_kernel_oscillatory(t: f64, rs: &[f64]) -> Result<SchrodingerKernel> {
    if t == 0.0 {
        return Err(Error::Domain("kernel undefined at t = 0".into()));
    }
    if t < 0.0 {
        let mut k = free_kernel_oscillatory(-t, rs)?;
        k.t = t;
        for v in &mut k.values {
            *v = v.conj();
        }
        return Ok(k);
    }
    let values: std::result::Result<Vec<Complex64>, Error> = rs
        .par_iter()
        .map(|&r| {
            let i = spectral_integral(t, r)?;
            Ok(if r == 0.0 {
                i / (2.0 * PI * PI)
            } else {
                i / (2.0 * PI * PI * r.sinh())
            })
        })
        .collect();
    Ok(SchrodingerKernel { t, rs: rs.to_vec(), values: values? })
}

/// Time-domain route: transform a sine-propagator kernel into the
/// Schrödinger kernel,
/// `K(t,ρ) = (√(iπ/t)/(2πt)) ∫₀^∞ i s e^{-is²/(4t)} S(s)(ρ) ds`.
/// The shell part lands analytically at s = ρ; the absolutely continuous
/// part is integrated over the stored time grid. Also returns an estimate
/// of the time-truncation error from the decay of the last slices.
pub fn transform_sine_kernel(
    sv: &SpaceTimeKernel,
    t: f64,
    rs: &[f64],
) -> Result<(SchrodingerKernel, f64)> {
    if t <= 0.0 {
        return Err(Error::Domain("transform needs t > 0".into()));
    }
    let front = Complex64::from_polar((PI / t).sqrt(), PI / 4.0) / (2.0 * PI * t);
    let dt = sv.dt;
    let values: Vec<Complex64> = rs
        .par_iter()
        .map(|&rho| {
            let mut acc = Complex64::new(0.0, 0.0);
            if sv.has_shell() && rho <= sv.t_max() {
                if rho > 0.0 {
                    let phase = Complex64::from_polar(1.0, -rho * rho / (4.0 * t));
                    acc += Complex64::new(0.0, rho) * phase * sv.shell_coeff(rho);
                } else {
                    // ρ c(ρ) -> reg(0) as ρ -> 0
                    acc += Complex64::new(0.0, 1.0) * sv.shell_reg(0.0);
                }
            }
            // AC part: complex Simpson over the slices, respecting the
            // light-cone jump at s = ρ for causal kernels
            let k0 = if sv.is_causal() { (rho / dt).ceil() as usize } else { 0 };
            let mut re = Vec::with_capacity(sv.nt + 1);
            let mut im = Vec::with_capacity(sv.nt + 1);
            for i in 0..=sv.nt {
                let s = i as f64 * dt;
                let ac = interp_ac(sv, i, rho);
                let w = Complex64::new(0.0, s) * Complex64::from_polar(1.0, -s * s / (4.0 * t));
                re.push((w * ac).re);
                im.push((w * ac).im);
            }
            if k0 <= sv.nt {
                acc += Complex64::new(
                    integrate_uniform(&re[k0..], dt),
                    integrate_uniform(&im[k0..], dt),
                );
            }
            front * acc
        })
        .collect();
    // truncation estimate: exponential fit to the tail slice masses
    let quarter = sv.nt / 4;
    let mut ts = Vec::new();
    let mut ms = Vec::new();
    for i in (sv.nt - quarter)..=sv.nt {
        let m = sv.slice_abs_mass(i);
        if m > 0.0 {
            ts.push(i as f64 * dt);
            ms.push(m);
        }
    }
    let trunc = if ms.len() >= 3 {
        let (rate, _) = crate::jacobi::fit_decay_rate(&ts, &ms, false);
        let last = *ms.last().unwrap();
        if rate > 1e-3 {
            last * sv.t_max() / rate / (2.0 * PI * t)
        } else {
            f64::INFINITY
        }
    } else {
        0.0
    };
    Ok((SchrodingerKernel { t, rs: rs.to_vec(), values }, trunc))
}

fn interp_ac(sv: &SpaceTimeKernel, i: usize, rho: f64) -> f64 {
    // the radial grid matches the time grid spacing; ρ queries land on grid
    let k = (rho / sv.dt).round() as usize;
    if (rho - k as f64 * sv.dt).abs() < 1e-9 && k < sv.ac_slice(i).len() {
        sv.ac_value(i, k)
    } else {
        // linear interpolation off-grid
        let kf = rho / sv.dt;
        let k0 = kf.floor() as usize;
        let w = kf - k0 as f64;
        let row = sv.ac_slice(i);
        if k0 + 1 < row.len() {
            row[k0] * (1.0 - w) + row[k0 + 1] * w
        } else {
            0.0
        }
    }
}

/// Decay-scan row: (t, sup_r |K|, t^{3/2}·sup).
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub sup_abs: f64,
    pub weighted: f64,
}

/// Scan the free kernel decay over a time list.
pub fn decay_scan_free(t_list: &[f64], rs: &[f64]) -> Result<Vec<DecayRow>> {
    t_list
        .iter()
        .map(|&t| {
            let k = free_kernel_oscillatory(t, rs)?;
            let sup = k.sup_abs();
            Ok(DecayRow { t, sup_abs: sup, weighted: t.abs().powf(1.5) * sup })
        })
        .collect()
}

/// Scan the perturbed kernel decay built from a resummed sine kernel.
pub fn decay_scan_perturbed(
    sv: &SpaceTimeKernel,
    t_list: &[f64],
    rs: &[f64],
) -> Result<Vec<DecayRow>> {
    t_list
        .iter()
        .map(|&t| {
            let (k, _) = transform_sine_kernel(sv, t, rs)?;
            let sup = k.sup_abs();
            Ok(DecayRow { t, sup_abs: sup, weighted: t.abs().powf(1.5) * sup })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_law_against_closed_form() {
        let rs: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        for &t in &[0.5, 1.0, 7.0, 50.0] {
            let k = free_kernel_oscillatory(t, &rs).unwrap();
            for (r, v) in k.rs.iter().zip(k.values.iter()) {
                let want = free_kernel_closed_form(t, *r);
                let rel = (v - want).norm() / want.norm();
                assert!(rel < 1e-6, "t={t} r={r}: rel {rel}");
                // modulus law |K| (4πt)^{3/2} sinh r / r = 1
                let law = v.norm() * (4.0 * PI * t).powf(1.5) / ratio_r_sinh(*r);
                assert!((law - 1.0).abs() < 1e-6, "t={t} r={r}: law {law}");
            }
        }
    }

    #[test]
    fn center_value_and_hermitian_symmetry() {
        let rs = vec![0.0, 0.5];
        let t = 2.0;
        let k = free_kernel_oscillatory(t, &rs).unwrap();
        let want = (4.0 * PI * t).powf(-1.5);
        assert!((k.values[0].norm() - want).abs() < 1e-9 * want);
        let km = free_kernel_oscillatory(-t, &rs).unwrap();
        for (a, b) in k.values.iter().zip(km.values.iter()) {
            assert!((a.conj() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn decay_column_is_flat() {
        let rs: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let ts: Vec<f64> = (0..=20).map(|i| 1.0 + 49.0 * i as f64 / 20.0).collect();
        let rows = decay_scan_free(&ts, &rs).unwrap();
        let want = (4.0 * PI_CONST).powf(-1.5);
        for row in rows {
            assert!(
                (row.weighted - want).abs() < 1e-6 * want,
                "t={}: {}",
                row.t,
                row.weighted
            );
        }
    }
    const PI_CONST: f64 = std::f64::consts::PI;

    #[test]
    fn time_domain_route_matches_spectral_for_free_kernel() {
        // grid-sampled free sine kernel -> Schrödinger via the transform,
        // compared with the oscillatory spectral route
        let (dt, nt, nr) = (0.01, 1800, 1800);
        let s0 = SpaceTimeKernel::free_sine(-1.0, dt, nt, nr);
        let rs: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        for &t in &[1.0, 3.0] {
            let (k, _) = transform_sine_kernel(&s0, t, &rs).unwrap();
            let spec = free_kernel_oscillatory(t, &rs).unwrap();
            for ((r, a), b) in k.rs.iter().zip(k.values.iter()).zip(spec.values.iter()) {
                let rel = (a - b).norm() / b.norm();
                assert!(rel < 1e-4, "t={t} r={r}: rel {rel} ({a} vs {b})");
            }
        }
    }

    #[test]
    fn spectral_integral_rejects_unresolvable_phase() {
        assert!(spectral_integral(1e15, 1.0).is_err());
        assert!(spectral_integral(-1.0, 1.0).is_err());
    }
}
