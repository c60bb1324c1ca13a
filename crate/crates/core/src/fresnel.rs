//! Fresnel integrals and moments of the chirp `e^{itλ²}`, the building
//! blocks of the Filon-type oscillatory quadrature in [`crate::schrodinger`].

use crate::spline::CubicSpline;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Combined Fresnel integral `F(x) = C(x) + i S(x) = ∫₀^x e^{iπu²/2} du`,
/// odd in x.
///
/// Three zones: power series for |x| ≤ 2; for 2 < |x| < 6 a cached spline of
/// the slowly varying factor G(x) = (F(∞) - F(x)) e^{-iπx²/2}; asymptotic
/// expansion beyond. Absolute accuracy ~1e-10 or better throughout.
pub fn fresnel(x: f64) -> Complex64 {
    let ax = x.abs();
    let val = if ax <= 2.0 {
        fresnel_series(ax)
    } else if ax < 6.0 {
        let g = midrange_tables();
        let tail = Complex64::new(g.re.eval(ax), g.im.eval(ax))
            * Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * ax * ax);
        Complex64::new(0.5, 0.5) - tail
    } else {
        fresnel_asymptotic(ax)
    };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

fn fresnel_series(x: f64) -> Complex64 {
    // F(x) = Σ_n (iπ/2)^n x^{2n+1} / (n! (2n+1))
    let q = Complex64::new(0.0, std::f64::consts::FRAC_PI_2) * x * x;
    let mut term = Complex64::new(x, 0.0);
    let mut sum = term;
    for n in 1..200 {
        term *= q / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    sum
}

fn fresnel_asymptotic(x: f64) -> Complex64 {
    // ∫_x^∞ e^{iπu²/2} du = e^{iπx²/2} Σ_m t_m,
    //   t₀ = i/(πx),  t_{m+1} = t_m (2m+1)/(iπx²)
    let pi = std::f64::consts::PI;
    let phase = Complex64::from_polar(1.0, pi * x * x / 2.0);
    let mut t = Complex64::new(0.0, 1.0 / (pi * x));
    let mut sum = t;
    let ix2 = Complex64::new(0.0, pi * x * x);
    for m in 0..60 {
        let next = t * ((2 * m + 1) as f64) / ix2;
        if next.norm() > t.norm() {
            break; // divergent asymptotic tail
        }
        t = next;
        sum += t;
        if t.norm() < 1e-18 {
            break;
        }
    }
    Complex64::new(0.5, 0.5) - phase * sum
}

struct Midrange {
    re: CubicSpline,
    im: CubicSpline,
}

/// Spline tables of G(x) = (F(∞) - F(x)) e^{-iπx²/2} on [1.9, 6.1],
/// built once by marching Gauss panels from a series-accurate pivot.
fn midrange_tables() -> &'static Midrange {
    static TABLES: OnceLock<Midrange> = OnceLock::new();
    TABLES.get_or_init(|| {
        let pi = std::f64::consts::PI;
        let lo = 1.9f64;
        let hi = 6.1f64;
        let step = 0.0025f64;
        let n = ((hi - lo) / step).round() as usize + 1;
        let (gx, gw) = crate::quad::gauss_legendre(24);
        let mut xs = Vec::with_capacity(n);
        let mut gre = Vec::with_capacity(n);
        let mut gim = Vec::with_capacity(n);
        let mut f = fresnel_series(lo);
        for k in 0..n {
            let x = lo + step * k as f64;
            if k > 0 {
                // advance F over [x-step, x]
                let (a, b) = (x - step, x);
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                let mut acc = Complex64::new(0.0, 0.0);
                for (u, w) in gx.iter().zip(gw.iter()) {
                    let p = mid + half * u;
                    acc += w * Complex64::from_polar(1.0, pi * p * p / 2.0);
                }
                f += acc * half;
            }
            let g = (Complex64::new(0.5, 0.5) - f)
                * Complex64::from_polar(1.0, -pi * x * x / 2.0);
            xs.push(x);
            gre.push(g.re);
            gim.push(g.im);
        }
        Midrange {
            re: CubicSpline::new(&xs, &gre).unwrap(),
            im: CubicSpline::new(&xs, &gim).unwrap(),
        }
    })
}

/// `∫₀^X e^{itv²} dv` for t > 0 (odd in X).
pub fn chirp_integral_from_zero(t: f64, x_upper: f64) -> Complex64 {
    let s = (2.0 * t / std::f64::consts::PI).sqrt();
    fresnel(x_upper * s) / s
}

/// `∫_X^∞ e^{itv²} dv` for t > 0 (Fresnel-regularized upper limit).
pub fn chirp_integral_tail(t: f64, x_lower: f64) -> Complex64 {
    let s = (2.0 * t / std::f64::consts::PI).sqrt();
    (Complex64::new(0.5, 0.5) - fresnel(x_lower * s)) / s
}

/// Moments `M_k = ∫_a^b λ^k e^{itλ²} dλ` for k = 0..=3: M₁ and M₃ by
/// explicit antiderivatives, M₀ by Fresnel, M₂ by the integration-by-parts
/// recursion.
pub fn chirp_moments(t: f64, a: f64, b: f64) -> [Complex64; 4] {
    let ea = Complex64::from_polar(1.0, t * a * a);
    let eb = Complex64::from_polar(1.0, t * b * b);
    let two_it = Complex64::new(0.0, 2.0 * t);
    let m0 = chirp_integral_from_zero(t, b) - chirp_integral_from_zero(t, a);
    let m1 = (eb - ea) / two_it;
    let m2 = (b * eb - a * ea - m0) / two_it;
    let m3 = (b * b * eb - a * a * ea - 2.0 * m1) / two_it;
    [m0, m1, m2, m3]
}
