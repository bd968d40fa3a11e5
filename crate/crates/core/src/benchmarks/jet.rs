//! Bivariate truncated Taylor series through total order 4.
//!
//! A `Jet4` stores the Taylor coefficients `c_ij` of a function around a base
//! point, so that ∂ₓⁱ∂ᵧʲ f = i! j! c_ij. Products truncate at total order 4.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::morley_space::Sym2;

const ORDER: usize = 4;
const LEN: usize = 15;

const fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet4 {
    c: [f64; LEN],
}

impl Jet4 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Self { c }
    }

    /// The coordinate function x around base abscissa `x0`.
    pub fn x(x0: f64) -> Self {
        let mut j = Self::constant(x0);
        j.c[idx(1, 0)] = 1.0;
        j
    }

    pub fn y(y0: f64) -> Self {
        let mut j = Self::constant(y0);
        j.c[idx(0, 1)] = 1.0;
        j
    }

    /// ∂ₓⁱ∂ᵧʲ at the base point.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= ORDER);
        self.c[idx(i, j)] * FACT[i] * FACT[j]
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.derivative(1, 0), self.derivative(0, 1)]
    }

    pub fn hessian(&self) -> Sym2 {
        [self.derivative(2, 0), self.derivative(1, 1), self.derivative(0, 2)]
    }

    pub fn laplacian(&self) -> f64 {
        self.derivative(2, 0) + self.derivative(0, 2)
    }

    pub fn bilaplacian(&self) -> f64 {
        self.derivative(4, 0) + 2.0 * self.derivative(2, 2) + self.derivative(0, 4)
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in &mut self.c {
            *v *= s;
        }
        self
    }

    /// Σₖ g⁽ᵏ⁾(a)/k! (self − a)ᵏ, with `derivs[k] = g⁽ᵏ⁾(a)` and `a` the value.
    pub fn compose(&self, derivs: [f64; 5]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Self::constant(derivs[0]);
        let mut power = Self::constant(1.0);
        for (k, d) in derivs.iter().enumerate().skip(1) {
            power = power * delta;
            out = out + power.scale(d / FACT[k]);
        }
        out
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose([e; 5])
    }

    pub fn cosh(&self) -> Self {
        let (c, s) = (self.value().cosh(), self.value().sinh());
        self.compose([c, s, c, s, c])
    }

    pub fn sinh(&self) -> Self {
        let (c, s) = (self.value().cosh(), self.value().sinh());
        self.compose([s, c, s, c, s])
    }

    /// selfᵖ for real `p`; requires a positive base.
    pub fn powf(&self, p: f64) -> Result<Self> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(Error::JetDomain(format!("power {p} of non-positive base {a}")));
        }
        let mut d = [0.0; 5];
        let mut coef = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = coef * a.powf(p - k as f64);
            coef *= p - k as f64;
        }
        Ok(self.compose(d))
    }

    pub fn powi(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| acc * *self)
    }

    pub fn recip(&self) -> Result<Self> {
        let a = self.value();
        if a == 0.0 {
            return Err(Error::JetDomain("reciprocal of zero".into()));
        }
        let mut d = [0.0; 5];
        let mut coef = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = coef / a.powi(k as i32 + 1);
            coef *= -(k as f64 + 1.0);
        }
        Ok(self.compose(d))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.powf(0.5)
    }

    /// Polar angle of (x, y) = (self, y); the value lies in (−π, π].
    pub fn atan2(y: &Self, x: &Self) -> Result<Self> {
        let (x0, y0) = (x.value(), y.value());
        if x0 == 0.0 && y0 == 0.0 {
            return Err(Error::JetDomain("angle at the origin".into()));
        }
        let theta0 = y0.atan2(x0);
        let (s, c) = theta0.sin_cos();
        // rotate so the base point lies on the positive axis: u > 0, v(0) = 0
        let u = x.scale(c) + y.scale(s);
        let v = y.scale(c) - x.scale(s);
        let mut t = v * u.recip()?;
        t.c[0] = 0.0;
        // atan(t) = t − t³/3 + O(t⁵)
        let t3 = t * t * t;
        Ok(Self::constant(theta0) + t - t3.scale(1.0 / 3.0))
    }
}

impl Add for Jet4 {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet4 {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet4 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Jet4 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; LEN];
        for d1 in 0..=ORDER {
            for j1 in 0..=d1 {
                let a = self.c[idx(d1 - j1, j1)];
                if a == 0.0 {
                    continue;
                }
                for d2 in 0..=(ORDER - d1) {
                    for j2 in 0..=d2 {
                        c[idx(d1 - j1 + d2 - j2, j1 + j2)] += a * o.c[idx(d2 - j2, j2)];
                    }
                }
            }
        }
        Self { c }
    }
}

impl Add<f64> for Jet4 {
    type Output = Self;
    fn add(mut self, v: f64) -> Self {
        self.c[0] += v;
        self
    }
}

impl Sub<f64> for Jet4 {
    type Output = Self;
    fn sub(mut self, v: f64) -> Self {
        self.c[0] -= v;
        self
    }
}

impl Mul<f64> for Jet4 {
    type Output = Self;
    fn mul(self, v: f64) -> Self {
        self.scale(v)
    }
}

/// Von Kármán bracket [θ, χ] = θₓₓχᵧᵧ + θᵧᵧχₓₓ − 2θₓᵧχₓᵧ at the base point.
pub fn bracket(theta: &Jet4, chi: &Jet4) -> f64 {
    let a = theta.hessian();
    let b = chi.hessian();
    a[0] * b[2] + a[2] * b[0] - 2.0 * a[1] * b[1]
}
