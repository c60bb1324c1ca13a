//! Cubic splines on sorted grids (not-a-knot ends), with exact piecewise
//! antiderivatives.

use crate::error::{Error, Result};

/// Cubic spline through `(x_i, y_i)` with not-a-knot boundary conditions
/// (natural for fewer than four points).
///
/// Evaluation outside the grid clamps to the boundary polynomial; callers
/// that need compact support should clamp themselves.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Grid("spline: x/y length mismatch".into()));
        }
        if xs.len() < 2 {
            return Err(Error::Grid("spline: need at least two points".into()));
        }
        for w in xs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Grid("spline: x not strictly increasing".into()));
            }
        }
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n >= 4 {
            // Interior rows of the second-derivative system:
            //   (h_{i-1}/6) m_{i-1} + ((h_{i-1}+h_i)/3) m_i + (h_i/6) m_{i+1} = d_i.
            // Not-a-knot eliminates m_0 and m_{n-1}:
            //   m_0 = (1+h_0/h_1) m_1 - (h_0/h_1) m_2, symmetric at the end.
            let h = |i: usize| xs[i + 1] - xs[i];
            let nn = n - 2; // unknowns m_1..m_{n-2}
            let mut sub = vec![0.0; nn];
            let mut diag = vec![0.0; nn];
            let mut sup = vec![0.0; nn];
            let mut rhs = vec![0.0; nn];
            for k in 0..nn {
                let i = k + 1;
                let (h0, h1) = (h(i - 1), h(i));
                sub[k] = h0 / 6.0;
                diag[k] = (h0 + h1) / 3.0;
                sup[k] = h1 / 6.0;
                rhs[k] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
            }
            // fold the m_0 elimination into the first row
            let r0 = h(0) / h(1);
            diag[0] += sub[0] * (1.0 + r0);
            sup[0] -= sub[0] * r0;
            // fold the m_{n-1} elimination into the last row
            let r1 = h(n - 2) / h(n - 3);
            diag[nn - 1] += sup[nn - 1] * (1.0 + r1);
            sub[nn - 1] -= sup[nn - 1] * r1;

            for k in 1..nn {
                let w = sub[k] / diag[k - 1];
                diag[k] -= w * sup[k - 1];
                rhs[k] -= w * rhs[k - 1];
            }
            m[nn] = rhs[nn - 1] / diag[nn - 1];
            for k in (0..nn - 1).rev() {
                m[k + 1] = (rhs[k] - sup[k] * m[k + 2]) / diag[k];
            }
            m[0] = (1.0 + r0) * m[1] - r0 * m[2];
            m[n - 1] = (1.0 + r1) * m[n - 2] - r1 * m[n - 3];
        } else if n == 3 {
            // single parabola through three points: m_0 = m_1 = m_2 = const
            let h0 = xs[1] - xs[0];
            let h1 = xs[2] - xs[1];
            let d = (ys[2] - ys[1]) / h1 - (ys[1] - ys[0]) / h0;
            let v = 2.0 * d / (h0 + h1);
            m = vec![v; 3];
        }
        Ok(CubicSpline { xs: xs.to_vec(), ys: ys.to_vec(), m })
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.clamp(1, self.xs.len() - 1) - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }
}

/// Exact antiderivative of a cubic spline: `F(x) = ∫_{x₀}^x s(u) du`,
/// evaluated in closed form per segment. Queries are clamped to the grid.
#[derive(Debug, Clone)]
pub struct SplineAntiderivative {
    spline: CubicSpline,
    // cumulative integral at the knots
    cum: Vec<f64>,
}

impl SplineAntiderivative {
    pub fn new(spline: CubicSpline) -> Self {
        let n = spline.xs.len();
        let mut cum = vec![0.0; n];
        for i in 0..n - 1 {
            cum[i + 1] = cum[i] + segment_integral(&spline, i, spline.xs[i + 1]);
        }
        SplineAntiderivative { spline, cum }
    }

    /// ∫_{x_min}^{x} clamped to the grid range.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.spline.x_min(), self.spline.x_max());
        let i = self.spline.segment(x);
        self.cum[i] + segment_integral(&self.spline, i, x)
    }

    /// ∫_a^b of the underlying spline, both ends clamped to the grid.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.eval(b) - self.eval(a)
    }
}

fn segment_integral(s: &CubicSpline, i: usize, x: f64) -> f64 {
    let h = s.xs[i + 1] - s.xs[i];
    let a = (s.xs[i + 1] - x) / h;
    let b = (x - s.xs[i]) / h;
    let quad = |u: f64| u * u * (u * u / 4.0 - 0.5);
    h * (0.5 * (1.0 - a * a) * s.ys[i] + 0.5 * b * b * s.ys[i + 1])
        + h * h * h / 6.0 * ((quad(1.0) - quad(a)) * s.m[i] + quad(b) * s.m[i + 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_smooth_function() {
        let xs: Vec<f64> = (0..81).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).sin()).collect();
        let s = CubicSpline::new(&xs, &ys).unwrap();
        let mut max_err: f64 = 0.0;
        for i in 0..400 {
            let x = 0.01 + i as f64 * 0.0099;
            max_err = max_err.max((s.eval(x) - (2.0 * x).sin()).abs());
        }
        assert!(max_err < 2e-6, "max_err = {max_err}");
    }

    #[test]
    fn reproduces_cubics_exactly() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64 * 0.37).collect();
        let f = |x: f64| 0.3 * x * x * x - x * x + 2.0 * x - 5.0;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let s = CubicSpline::new(&xs, &ys).unwrap();
        for i in 0..50 {
            let x = 0.05 + i as f64 * 0.08;
            assert!((s.eval(x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_is_consistent() {
        let xs: Vec<f64> = (0..101).map(|i| i as f64 * 0.04).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x * x * 0.3 - x).exp()).collect();
        let s = CubicSpline::new(&xs, &ys).unwrap();
        let x = 1.7234;
        let h = 1e-5;
        let fd = (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
        assert!((s.eval_deriv(x) - fd).abs() < 1e-8);
    }

    #[test]
    fn antiderivative_matches_segmentwise_quadrature() {
        let xs: Vec<f64> = (0..101).map(|i| i as f64 * 0.03).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.cos() * x).collect();
        let s = CubicSpline::new(&xs, &ys).unwrap();
        let anti = SplineAntiderivative::new(s.clone());
        // integrate the spline exactly: Gauss panels aligned with the knots
        let (a, b) = (0.4, 2.3);
        let mut direct = 0.0;
        for w in xs.windows(2) {
            let (lo, hi) = (w[0].max(a), w[1].min(b));
            if hi > lo {
                direct += crate::quad::integrate_gl(|x| s.eval(x), lo, hi, 8);
            }
        }
        assert!(
            (anti.integral(a, b) - direct).abs() < 1e-13,
            "{} vs {direct}",
            anti.integral(a, b)
        );
    }
}
