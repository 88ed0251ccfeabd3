//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] holds the normalized Taylor coefficients `c[k] = f^(k)(x0) / k!`
//! of a function at one point. Closed-form expressions evaluated on
//! `Jet::variable(x0, order)` produce exact derivatives up to `order`
//! (up to rounding), which is how analytic derivative providers are built.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; MAX_ORDER + 1],
    order: usize,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = value;
        Jet {
            c,
            order: order.min(MAX_ORDER),
        }
    }

    /// The identity function `x` expanded around `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut j = Jet::constant(x0, order);
        if j.order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() <= MAX_ORDER + 1);
        let mut c = [0.0; MAX_ORDER + 1];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Jet {
            c,
            order: coeffs.len() - 1,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..=self.order]
    }

    /// k-th derivative, `k <= order`.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k <= self.order, "derivative {k} exceeds jet order {}", self.order);
        self.c[k] * factorial(k)
    }

    /// Drop coefficients above `order`.
    pub fn truncate(mut self, order: usize) -> Self {
        let order = order.min(self.order);
        for k in order + 1..=MAX_ORDER {
            self.c[k] = 0.0;
        }
        self.order = order;
        self
    }

    /// Jet of the derivative; loses one order.
    pub fn differentiate(&self) -> Self {
        if self.order == 0 {
            return Jet::constant(0.0, 0);
        }
        let mut c = [0.0; MAX_ORDER + 1];
        for k in 0..self.order {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet {
            c,
            order: self.order - 1,
        }
    }

    /// Evaluate the Taylor polynomial at offset `dx` from the expansion point.
    pub fn eval_at(&self, dx: f64) -> f64 {
        self.c[..=self.order]
            .iter()
            .rev()
            .fold(0.0, |acc, &ck| acc * dx + ck)
    }

    pub fn scale(mut self, s: f64) -> Self {
        for k in 0..=self.order {
            self.c[k] *= s;
        }
        self
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0, self.order) / *self
    }

    pub fn exp(&self) -> Self {
        let n = self.order;
        let mut e = [0.0; MAX_ORDER + 1];
        e[0] = self.c[0].exp();
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = s / k as f64;
        }
        Jet { c: e, order: n }
    }

    pub fn ln(&self) -> Self {
        let n = self.order;
        let f0 = self.c[0];
        let mut l = [0.0; MAX_ORDER + 1];
        l[0] = f0.ln();
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * l[j] * self.c[k - j];
            }
            l[k] = (self.c[k] - s / k as f64) / f0;
        }
        Jet { c: l, order: n }
    }

    /// `self^a` for a real exponent; requires a positive base unless `a` is an integer.
    pub fn powf(&self, a: f64) -> Self {
        let n = self.order;
        let f0 = self.c[0];
        let mut p = [0.0; MAX_ORDER + 1];
        p[0] = f0.powf(a);
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += ((a + 1.0) * j as f64 - k as f64) * self.c[j] * p[k - j];
            }
            p[k] = s / (k as f64 * f0);
        }
        Jet { c: p, order: n }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Jet::constant(1.0, self.order);
        }
        let mut base = if k < 0 { self.recip() } else { *self };
        let mut e = k.unsigned_abs();
        let mut acc = Jet::constant(1.0, self.order);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// `(sin f, cos f)`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.order;
        let mut s = [0.0; MAX_ORDER + 1];
        let mut c = [0.0; MAX_ORDER + 1];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..=n {
            let (mut ss, mut cc) = (0.0, 0.0);
            for j in 1..=k {
                let w = j as f64 * self.c[j];
                ss += w * c[k - j];
                cc += w * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (Jet { c: s, order: n }, Jet { c, order: n })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// `(sinh f, cosh f)`.
    pub fn sinh_cosh(&self) -> (Self, Self) {
        let n = self.order;
        let mut s = [0.0; MAX_ORDER + 1];
        let mut c = [0.0; MAX_ORDER + 1];
        s[0] = self.c[0].sinh();
        c[0] = self.c[0].cosh();
        for k in 1..=n {
            let (mut ss, mut cc) = (0.0, 0.0);
            for j in 1..=k {
                let w = j as f64 * self.c[j];
                ss += w * c[k - j];
                cc += w * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = cc / k as f64;
        }
        (Jet { c: s, order: n }, Jet { c, order: n })
    }

    pub fn sinh(&self) -> Self {
        self.sinh_cosh().0
    }

    pub fn cosh(&self) -> Self {
        self.sinh_cosh().1
    }

    /// tanh via `t' = (1 - t^2) f'`, which stays finite for large arguments.
    pub fn tanh(&self) -> Self {
        let n = self.order;
        let mut t = [0.0; MAX_ORDER + 1];
        let mut u = [0.0; MAX_ORDER + 1];
        t[0] = self.c[0].tanh();
        u[0] = 1.0 - t[0] * t[0];
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * u[k - j];
            }
            t[k] = s / k as f64;
            let mut tt = 0.0;
            for j in 0..=k {
                tt += t[j] * t[k - j];
            }
            u[k] = -tt;
        }
        Jet { c: t, order: n }
    }

    /// sech^2 f = 1 - tanh^2 f.
    pub fn sech2(&self) -> Self {
        let t = self.tanh();
        Jet::constant(1.0, self.order) - t * t
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let n = self.order.min(rhs.order);
        let mut c = [0.0; MAX_ORDER + 1];
        for k in 0..=n {
            c[k] = self.c[k] + rhs.c[k];
        }
        Jet { c, order: n }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let n = self.order.min(rhs.order);
        let mut c = [0.0; MAX_ORDER + 1];
        for k in 0..=n {
            c[k] = self.c[k] - rhs.c[k];
        }
        Jet { c, order: n }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let n = self.order.min(rhs.order);
        let mut c = [0.0; MAX_ORDER + 1];
        // pairwise summation keeps a*b and b*a bit-identical
        for k in 0..=n {
            let mut s = 0.0;
            for j in 0..(k + 1) / 2 {
                s += self.c[j] * rhs.c[k - j] + self.c[k - j] * rhs.c[j];
            }
            if k % 2 == 0 {
                s += self.c[k / 2] * rhs.c[k / 2];
            }
            c[k] = s;
        }
        Jet { c, order: n }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let n = self.order.min(rhs.order);
        let g0 = rhs.c[0];
        let mut h = [0.0; MAX_ORDER + 1];
        for k in 0..=n {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= rhs.c[j] * h[k - j];
            }
            h[k] = s / g0;
        }
        Jet { c: h, order: n }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip().scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn derivatives_of_elementary_functions() {
        let x0 = 0.7;
        let x = Jet::variable(x0, 6);
        let s = x.sin();
        for k in 0..=6 {
            let expected = match k % 4 {
                0 => x0.sin(),
                1 => x0.cos(),
                2 => -x0.sin(),
                _ => -x0.cos(),
            };
            assert!(close(s.derivative(k), expected, 1e-13), "sin^({k})");
        }
        let e = (x * 2.0).exp();
        for k in 0..=6 {
            assert!(close(e.derivative(k), 2f64.powi(k as i32) * (2.0 * x0).exp(), 1e-13));
        }
        let l = x.ln();
        // d^k/dx^k ln x = (-1)^(k-1) (k-1)! / x^k
        for k in 1..=6 {
            let f = (1..k).fold(1.0, |a, i| a * i as f64);
            let expected = if k % 2 == 1 { 1.0 } else { -1.0 } * f / x0.powi(k as i32);
            assert!(close(l.derivative(k), expected, 1e-12), "ln^({k})");
        }
    }

    #[test]
    fn tanh_matches_sinh_over_cosh() {
        let x = Jet::variable(0.3, 8) * 3.0;
        let (s, c) = x.sinh_cosh();
        let a = x.tanh();
        let b = s / c;
        for k in 0..=8 {
            assert!(close(a.coeffs()[k], b.coeffs()[k], 1e-12));
        }
        // far into the tail where sinh/cosh would overflow
        let far = Jet::variable(400.0, 4).tanh();
        assert!(far.value() == 1.0 && far.coeffs()[1].abs() < 1e-300);
    }

    #[test]
    fn powf_and_division_agree() {
        let x = Jet::variable(1.3, 7);
        let a = x.powf(-0.5);
        let b = 1.0 / x.sqrt();
        for k in 0..=7 {
            assert!(close(a.coeffs()[k], b.coeffs()[k], 1e-13));
        }
        let p = x.powi(3);
        assert!(close(p.derivative(3), 6.0, 1e-13));
        assert!(p.derivative(4).abs() < 1e-12);
    }

    #[test]
    fn differentiate_and_eval() {
        let x = Jet::variable(0.0, 5);
        let f = x.exp();
        assert!(close(f.eval_at(0.1), 0.1f64.exp(), 1e-8));
        let d = f.differentiate();
        assert_eq!(d.order(), 4);
        assert!(close(d.value(), 1.0, 1e-15));
    }
}
