//! Forward-mode dual numbers.
//!
//! `Dual<f64>` carries one directional derivative; `Dual<Dual<f64>>` carries
//! the mixed second derivative along two directions. Both are driven by the
//! same generic evaluator through the [`Real`] trait.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar type the expression evaluator can run on.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    /// Innermost real part, used for domain checks.
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn variable(re: T) -> Self {
        Dual {
            re,
            eps: T::constant(1.0),
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.re / rhs.re;
        Dual::new(q, (self.eps - q * rhs.eps) / rhs.re)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Real> Real for Dual<T> {
    #[inline]
    fn constant(v: f64) -> Self {
        Dual::new(T::constant(v), T::constant(0.0))
    }
    #[inline]
    fn re(&self) -> f64 {
        self.re.re()
    }
    #[inline]
    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }
    #[inline]
    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (T::constant(2.0) * s))
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }
    #[inline]
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::variable(3.0);
        let y = x * x / (x + Dual::constant(1.0));
        // d/dx x²/(x+1) = (x² + 2x)/(x+1)² = 15/16 at x = 3
        assert_relative_eq!(y.re, 9.0 / 4.0);
        assert_relative_eq!(y.eps, 15.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn nested_dual_gives_second_derivative() {
        // f(x) = sin(x)·exp(x); f'' = 2 cos(x) exp(x)
        let x0 = 0.4_f64;
        let x = Dual::new(Dual::variable(x0), Dual::constant(1.0));
        let f = x.sin() * x.exp();
        assert_relative_eq!(f.eps.eps, 2.0 * x0.cos() * x0.exp(), epsilon = 1e-14);
        assert_relative_eq!(f.eps.re, (x0.sin() + x0.cos()) * x0.exp(), epsilon = 1e-14);
    }

    #[test]
    fn sqrt_and_log() {
        let x = Dual::variable(4.0);
        assert_relative_eq!(x.sqrt().eps, 0.25);
        assert_relative_eq!(x.ln().eps, 0.25);
    }
}
