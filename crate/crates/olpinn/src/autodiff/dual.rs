//! First-order dual numbers.
//!
//! A `Dual` carries a primal value and the directional derivative (tangent)
//! of that value with respect to one seeded input. Threading duals through a
//! reverse sweep of the tape yields second derivatives: the tangent of an
//! input's adjoint is d²(output)/d(input)².

use super::scalar::Scalar;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub primal: f64,
    pub tangent: f64,
}

impl Dual {
    pub fn new(primal: f64, tangent: f64) -> Self {
        Dual { primal, tangent }
    }

    /// Constant with respect to the seeded direction.
    pub fn constant(v: f64) -> Self {
        Dual { primal: v, tangent: 0.0 }
    }

    /// The seeded variable itself (tangent 1).
    pub fn variable(v: f64) -> Self {
        Dual { primal: v, tangent: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.primal + rhs.primal, self.tangent + rhs.tangent)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.primal - rhs.primal, self.tangent - rhs.tangent)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.primal * rhs.primal,
            self.tangent * rhs.primal + self.primal * rhs.tangent,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        let q = self.primal / rhs.primal;
        Dual::new(q, (self.tangent - q * rhs.tangent) / rhs.primal)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.primal, -self.tangent)
    }
}

impl Scalar for Dual {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Dual::constant(v)
    }
    #[inline]
    fn value(self) -> f64 {
        self.primal
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.primal.is_finite() && self.tangent.is_finite()
    }
    #[inline]
    fn sin(self) -> Self {
        Dual::new(self.primal.sin(), self.primal.cos() * self.tangent)
    }
    #[inline]
    fn cos(self) -> Self {
        Dual::new(self.primal.cos(), -self.primal.sin() * self.tangent)
    }
    #[inline]
    fn sinh(self) -> Self {
        Dual::new(self.primal.sinh(), self.primal.cosh() * self.tangent)
    }
    #[inline]
    fn cosh(self) -> Self {
        Dual::new(self.primal.cosh(), self.primal.sinh() * self.tangent)
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.primal.exp();
        Dual::new(e, e * self.tangent)
    }
    #[inline]
    fn tanh(self) -> Self {
        let t = self.primal.tanh();
        Dual::new(t, (1.0 - t * t) * self.tangent)
    }
    #[inline]
    fn relu(self) -> Self {
        // Subgradient at 0 is 0, so the whole dual collapses there.
        if self.primal > 0.0 {
            self
        } else {
            Dual::new(0.0, 0.0)
        }
    }
    #[inline]
    fn powf(self, exponent: f64) -> Self {
        let v = self.primal.powf(exponent);
        Dual::new(v, exponent * self.primal.powf(exponent - 1.0) * self.tangent)
    }
    #[inline]
    fn max(self, other: Self) -> Self {
        if self.primal >= other.primal {
            self
        } else {
            other
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_rule_through_composition() {
        // f(x) = sin(x^2) at x = 1: f' = cos(1) * 2
        let x = Dual::variable(1.0);
        let y = (x * x).sin();
        assert!((y.primal - 1.0f64.sin()).abs() < 1e-15);
        assert!((y.tangent - 2.0 * 1.0f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn division_quotient_rule() {
        // f(x) = x / (1 + x) at x = 2: f' = 1/(1+x)^2 = 1/9
        let x = Dual::variable(2.0);
        let y = x / (x + Dual::constant(1.0));
        assert!((y.primal - 2.0 / 3.0).abs() < 1e-15);
        assert!((y.tangent - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn relu_at_and_below_zero() {
        assert_eq!(Dual::variable(-1.0).relu(), Dual::new(0.0, 0.0));
        assert_eq!(Dual::variable(0.0).relu(), Dual::new(0.0, 0.0));
        assert_eq!(Dual::variable(2.0).relu(), Dual::new(2.0, 1.0));
    }
}
