//! Quadrature rules: Gauss–Legendre nodes, composite rules on grids.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence and cached per degree.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    cache.lock().unwrap().insert(n, (nodes.clone(), weights.clone()));
    (nodes, weights)
}

/// ∫_a^b f with an n-point Gauss–Legendre rule.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite Gauss–Legendre over `panels` equal panels.
pub fn integrate_gl_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    n: usize,
    panels: usize,
) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        acc += integrate_gl(&f, a + p as f64 * h, a + (p + 1) as f64 * h, n);
    }
    acc
}

/// Composite Gauss–Legendre with interior breakpoints (kinks of the
/// integrand). Breakpoints outside (a, b) are ignored.
pub fn integrate_gl_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    n: usize,
    breakpoints: &[f64],
) -> f64 {
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut acc = 0.0;
    let mut left = a;
    for c in cuts {
        acc += integrate_gl(&f, left, c, n);
        left = c;
    }
    acc + integrate_gl(&f, left, b, n)
}

/// Composite Gauss–Legendre with both interior breakpoints and a panel
/// budget per unit length.
pub fn integrate_gl_panels_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    n: usize,
    panels_per_unit: usize,
    breakpoints: &[f64],
) -> f64 {
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len > 0.0 {
            let panels = ((len * panels_per_unit as f64).ceil() as usize).max(1);
            acc += integrate_gl_panels(&f, w[0], w[1], n, panels);
        }
    }
    acc
}

/// Integral of grid samples over a uniform grid: composite Simpson, closing
/// an even point count with the 3/8 rule so that the order stays uniform.
pub fn integrate_uniform(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * dx * (values[0] + values[1]),
        _ => {
            let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
            let mut total = 0.0;
            if simpson_end > 0 {
                let mut acc = values[0] + values[simpson_end];
                let mut i = 1;
                while i < simpson_end {
                    acc += 4.0 * values[i];
                    if i + 1 < simpson_end {
                        acc += 2.0 * values[i + 1];
                    }
                    i += 2;
                }
                total = acc * dx / 3.0;
            }
            if n % 2 == 0 {
                total += dx * 3.0 / 8.0
                    * (values[n - 4]
                        + 3.0 * values[n - 3]
                        + 3.0 * values[n - 2]
                        + values[n - 1]);
            }
            total
        }
    }
}

/// Trapezoid rule on an arbitrary sorted grid.
pub fn integrate_grid(xs: &[f64], values: &[f64]) -> f64 {
    assert_eq!(xs.len(), values.len());
    let mut acc = 0.0;
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (values[i] + values[i - 1]);
    }
    acc
}

/// Nodes and weights of the composite Simpson rule used by
/// [`integrate_uniform`], so callers can build fixed linear functionals.
pub fn uniform_weights(n: usize, dx: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => {}
        2 => {
            w[0] = 0.5 * dx;
            w[1] = 0.5 * dx;
        }
        _ => {
            let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
            if simpson_end > 0 {
                w[0] += dx / 3.0;
                w[simpson_end] += dx / 3.0;
                let mut i = 1;
                while i < simpson_end {
                    w[i] += 4.0 * dx / 3.0;
                    if i + 1 < simpson_end {
                        w[i + 1] += 2.0 * dx / 3.0;
                    }
                    i += 2;
                }
            }
            if n % 2 == 0 {
                w[n - 4] += dx * 3.0 / 8.0;
                w[n - 3] += dx * 9.0 / 8.0;
                w[n - 2] += dx * 9.0 / 8.0;
                w[n - 1] += dx * 3.0 / 8.0;
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_for_polynomials() {
        // degree 2n-1 exact
        let val = integrate_gl(|x| x.powi(7) + 3.0 * x.powi(4) + 1.0, -1.0, 1.0, 4);
        let exact = 0.0 + 3.0 * 2.0 / 5.0 + 2.0;
        assert!((val - exact).abs() < 1e-14);
    }

    #[test]
    fn gl_smooth_function() {
        let val = integrate_gl(|x| x.sin().exp(), 0.0, 2.0, 40);
        let refv = integrate_gl_panels(|x| x.sin().exp(), 0.0, 2.0, 40, 8);
        assert!((val - refv).abs() < 1e-13);
    }

    #[test]
    fn uniform_simpson_matches_weights() {
        let n = 57;
        let dx = 0.1;
        let values: Vec<f64> = (0..n).map(|i| ((i as f64) * dx).sin()).collect();
        let direct = integrate_uniform(&values, dx);
        let w = uniform_weights(n, dx);
        let via_weights: f64 = w.iter().zip(values.iter()).map(|(a, b)| a * b).sum();
        assert!((direct - via_weights).abs() < 1e-14);
        let exact = 1.0 - ((n - 1) as f64 * dx).cos();
        assert!((direct - exact).abs() < 1e-5);
    }

    #[test]
    fn split_handles_kink() {
        let f = |x: f64| if x < 1.0 { x } else { 1.0 };
        let v = integrate_gl_split(f, 0.0, 2.0, 16, &[1.0]);
        assert!((v - 1.5).abs() < 1e-14);
    }
}
