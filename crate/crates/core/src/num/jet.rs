//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries a value, its gradient and its Hessian with respect to
//! up to [`MAXD`] seeded variables. Metrics are written once against the
//! [`Scalar`] trait and evaluated either on plain `f64` or on jets, which
//! gives exact first and second derivatives of g for the curvature engine.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of independent variables a jet can track.
pub const MAXD: usize = 6;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;

    fn sq(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; MAXD],
    pub h: [[f64; MAXD]; MAXD],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            g: [0.0; MAXD],
            h: [[0.0; MAXD]; MAXD],
        }
    }

    /// The coordinate function x_i evaluated at `v`.
    pub fn var(v: f64, i: usize) -> Self {
        let mut j = Jet2::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// Seeds a point: component i becomes the variable x_i.
    pub fn seed(x: &[f64]) -> Vec<Jet2> {
        assert!(x.len() <= MAXD, "jet dimension exceeds MAXD");
        x.iter().enumerate().map(|(i, &v)| Jet2::var(v, i)).collect()
    }

    /// Chain rule for a scalar function with value f0, slope f1, curvature f2.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut r = Jet2::constant(f0);
        for i in 0..MAXD {
            r.g[i] = f1 * self.g[i];
        }
        for i in 0..MAXD {
            for j in 0..MAXD {
                r.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        r
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, o: Jet2) -> Jet2 {
        self.v += o.v;
        for i in 0..MAXD {
            self.g[i] += o.g[i];
            for j in 0..MAXD {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(mut self, o: Jet2) -> Jet2 {
        self.v -= o.v;
        for i in 0..MAXD {
            self.g[i] -= o.g[i];
            for j in 0..MAXD {
                self.h[i][j] -= o.h[i][j];
            }
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut r = Jet2::constant(self.v * o.v);
        for i in 0..MAXD {
            r.g[i] = self.v * o.g[i] + o.v * self.g[i];
        }
        for i in 0..MAXD {
            for j in 0..MAXD {
                r.h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i];
            }
        }
        r
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        let inv = 1.0 / o.v;
        self * o.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self * -1.0
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, o: f64) -> Jet2 {
        self.v += o;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, o: f64) -> Jet2 {
        self.v -= o;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(mut self, o: f64) -> Jet2 {
        self.v *= o;
        for i in 0..MAXD {
            self.g[i] *= o;
            for j in 0..MAXD {
                self.h[i][j] *= o;
            }
        }
        self
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, o: f64) -> Jet2 {
        self * (1.0 / o)
    }
}

impl Scalar for Jet2 {
    fn cst(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn re(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(self.v.ln(), inv, -inv * inv)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_and_chain() {
        let x = Jet2::seed(&[0.7, -0.3]);
        // f = sin(x0) * exp(x1) + x0 / x1
        let f = x[0].sin() * x[1].exp() + x[0] / x[1];
        let (a, b) = (0.7f64, -0.3f64);
        assert!((f.v - (a.sin() * b.exp() + a / b)).abs() < 1e-14);
        assert!((f.g[0] - (a.cos() * b.exp() + 1.0 / b)).abs() < 1e-13);
        assert!((f.g[1] - (a.sin() * b.exp() - a / (b * b))).abs() < 1e-13);
        assert!((f.h[0][0] - (-a.sin() * b.exp())).abs() < 1e-13);
        assert!((f.h[0][1] - (a.cos() * b.exp() - 1.0 / (b * b))).abs() < 1e-13);
        assert!((f.h[1][1] - (a.sin() * b.exp() + 2.0 * a / (b * b * b))).abs() < 1e-12);
        assert_eq!(f.h[0][1], f.h[1][0]);
    }

    #[test]
    fn sqrt_and_ln() {
        let x = Jet2::var(2.0, 0);
        let f = x.sqrt().ln();
        // ln sqrt x = ln(x)/2
        assert!((f.g[0] - 0.25).abs() < 1e-15);
        assert!((f.h[0][0] + 0.125).abs() < 1e-15);
    }
}
