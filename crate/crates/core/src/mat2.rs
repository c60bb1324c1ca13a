//! Minimal 2×2 real matrix arithmetic for the Jacobi transport equation.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64, // (1,1)
    pub b: f64, // (1,2)
    pub c: f64, // (2,1)
    pub d: f64, // (2,2)
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn diag(x: f64, y: f64) -> Self {
        Mat2::new(x, 0.0, 0.0, y)
    }

    pub fn scalar(x: f64) -> Self {
        Mat2::diag(x, x)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    /// Adjugate, so that `m * m.adjugate() = det(m) * I` holds identically.
    pub fn adjugate(&self) -> Mat2 {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        // Largest singular value of a 2x2 matrix.
        let f = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.det();
        let disc = (f * f - 4.0 * det * det).max(0.0).sqrt();
        (0.5 * (f + disc)).sqrt()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.b - self.c).abs() <= tol * (1.0 + self.norm())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_identity() {
        let m = Mat2::new(2.0, -1.0, 3.0, 0.5);
        let p = m * m.adjugate();
        assert!((p.a - m.det()).abs() < 1e-14);
        assert!((p.d - m.det()).abs() < 1e-14);
        assert!(p.b.abs() < 1e-14 && p.c.abs() < 1e-14);
    }

    #[test]
    fn op_norm_diagonal() {
        let m = Mat2::diag(3.0, -7.0);
        assert!((m.op_norm() - 7.0).abs() < 1e-12);
    }
}
