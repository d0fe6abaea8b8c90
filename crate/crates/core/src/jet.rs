//! Truncated Taylor series ("jets") at a fixed expansion point.
//!
//! Coefficient `n` holds `f^(n)(r) / n!`.

use std::ops::{Add, Mul};

pub(crate) const ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Jet(pub [f64; ORDER]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; ORDER];
        a[0] = c;
        Jet(a)
    }

    pub fn variable(r: f64) -> Self {
        let mut a = [0.0; ORDER];
        a[0] = r;
        a[1] = 1.0;
        Jet(a)
    }

    /// `(r + h)^p` expanded in `h`; exact binomial coefficients, `r > 0`.
    pub fn power_of_variable(r: f64, p: f64) -> Self {
        let mut a = [0.0; ORDER];
        let mut binom = 1.0;
        for (n, slot) in a.iter_mut().enumerate() {
            if n > 0 {
                binom *= (p - (n as f64 - 1.0)) / n as f64;
            }
            *slot = binom * r.powf(p - n as f64);
        }
        Jet(a)
    }

    /// Jets of `tanh` and `sech` at `r` from `T' = S^2`, `S' = -T S`.
    pub fn tanh_sech(r: f64) -> (Self, Self) {
        let mut t = [0.0; ORDER];
        let mut s = [0.0; ORDER];
        t[0] = r.tanh();
        s[0] = if r.abs() < 20.0 {
            1.0 / r.cosh()
        } else {
            let e = (-r.abs()).exp();
            2.0 * e / (1.0 + e * e)
        };
        for n in 0..ORDER - 1 {
            let mut ss = 0.0;
            let mut ts = 0.0;
            for i in 0..=n {
                ss += s[i] * s[n - i];
                ts += t[i] * s[n - i];
            }
            t[n + 1] = ss / (n + 1) as f64;
            s[n + 1] = -ts / (n + 1) as f64;
        }
        (Jet(t), Jet(s))
    }

    pub fn sqrt(&self) -> Self {
        let a = &self.0;
        let mut y = [0.0; ORDER];
        y[0] = a[0].sqrt();
        for n in 1..ORDER {
            let mut acc = a[n];
            for i in 1..n {
                acc -= y[i] * y[n - i];
            }
            y[n] = acc / (2.0 * y[0]);
        }
        Jet(y)
    }

    pub fn recip(&self) -> Self {
        let a = &self.0;
        let mut y = [0.0; ORDER];
        y[0] = 1.0 / a[0];
        for n in 1..ORDER {
            let mut acc = 0.0;
            for i in 1..=n {
                acc += a[i] * y[n - i];
            }
            y[n] = -acc / a[0];
        }
        Jet(y)
    }

    /// `n`-th derivative at the expansion point.
    pub fn derivative(&self, n: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=n {
            fact *= i as f64;
        }
        self.0[n] * fact
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut a = self.0;
        for (x, y) in a.iter_mut().zip(rhs.0) {
            *x += y;
        }
        Jet(a)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut c = [0.0; ORDER];
        for (n, slot) in c.iter_mut().enumerate() {
            *slot = (0..=n).map(|i| self.0[i] * rhs.0[n - i]).sum();
        }
        Jet(c)
    }
}
