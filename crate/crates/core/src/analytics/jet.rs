//! Second-order forward-mode derivatives of scalar functions of one variable.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value with first and second derivatives with respect to one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn constant(v: f64) -> Self {
        Self { v, d1: 0.0, d2: 0.0 }
    }

    /// The independent variable at `x`.
    pub const fn variable(x: f64) -> Self {
        Self { v: x, d1: 1.0, d2: 0.0 }
    }

    /// Applies `g` given `g`, `g'` and `g''` at `self.v`.
    fn compose(self, g: f64, dg: f64, ddg: f64) -> Self {
        Self {
            v: g,
            d1: dg * self.d1,
            d2: ddg * self.d1 * self.d1 + dg * self.d2,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.compose(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn recip(self) -> Self {
        let r = self.v.recip();
        self.compose(r, -r * r, 2.0 * r * r * r)
    }

    pub fn powi(self, n: i32) -> Self {
        let nf = f64::from(n);
        self.compose(
            self.v.powi(n),
            nf * self.v.powi(n - 1),
            nf * (nf - 1.0) * self.v.powi(n - 2),
        )
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            v: self.v * k,
            d1: self.d1 * k,
            d2: self.d2 * k,
        }
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Self::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, o: f64) -> Jet {
        Jet { v: self.v + o, ..self }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale(k)
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let (h1, h2) = (1e-6, 1e-4);
        (
            (f(x + h1) - f(x - h1)) / (2.0 * h1),
            (f(x + h2) - 2.0 * f(x) + f(x - h2)) / (h2 * h2),
        )
    }

    #[test]
    fn composite_matches_finite_differences() {
        let g = |x: Jet| (x.sin().powi(2) * 2.0 + 5.0).sqrt() / (x.cos() * 3.0 + 4.0);
        let gf = |x: f64| (2.0 * x.sin().powi(2) + 5.0).sqrt() / (3.0 * x.cos() + 4.0);
        for &x in &[0.0, 0.4, 1.3, 2.9] {
            let j = g(Jet::variable(x));
            let (d1, d2) = fd(gf, x);
            assert!((j.v - gf(x)).abs() < 1e-15);
            assert!((j.d1 - d1).abs() < 1e-8, "{} {}", j.d1, d1);
            assert!((j.d2 - d2).abs() < 1e-6);
        }
    }

    #[test]
    fn product_rule() {
        let x = Jet::variable(2.0);
        let p = x * x * x;
        assert_eq!((p.v, p.d1, p.d2), (8.0, 12.0, 12.0));
    }
}
