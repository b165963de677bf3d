//! Second-order forward-mode dual numbers.
//!
//! A [`Dual2<N>`] carries a value together with its gradient and Hessian
//! with respect to `N` seeded real variables. Only the upper triangle of the
//! Hessian is propagated; the lower triangle is mirrored after every
//! operation, so the Hessian is symmetric bit for bit.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed to evaluate a Lagrangian either on plain `f64` or on
/// dual numbers.
pub trait Scalar:
    Copy
    + Debug
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
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
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
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// Value, gradient and Hessian with respect to `N` real variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual2<const N: usize> {
    pub value: f64,
    pub grad: [f64; N],
    pub hess: [[f64; N]; N],
}

impl<const N: usize> Dual2<N> {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            grad: [0.0; N],
            hess: [[0.0; N]; N],
        }
    }

    /// The `k`-th independent variable evaluated at `value`.
    pub fn variable(value: f64, k: usize) -> Self {
        let mut d = Self::constant(value);
        d.grad[k] = 1.0;
        d
    }

    #[inline]
    fn mirror(&mut self) {
        for i in 0..N {
            for j in 0..i {
                self.hess[i][j] = self.hess[j][i];
            }
        }
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    #[inline]
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..N {
            out.grad[i] = df * self.grad[i];
        }
        for i in 0..N {
            for j in i..N {
                out.hess[i][j] = df * self.hess[i][j] + d2f * self.grad[i] * self.grad[j];
            }
        }
        out.mirror();
        out
    }
}

impl<const N: usize> Add for Dual2<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.value += rhs.value;
        for i in 0..N {
            self.grad[i] += rhs.grad[i];
            for j in 0..N {
                self.hess[i][j] += rhs.hess[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Dual2<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.value -= rhs.value;
        for i in 0..N {
            self.grad[i] -= rhs.grad[i];
            for j in 0..N {
                self.hess[i][j] -= rhs.hess[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Mul for Dual2<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.value * rhs.value);
        for i in 0..N {
            out.grad[i] = self.value * rhs.grad[i] + rhs.value * self.grad[i];
        }
        for i in 0..N {
            for j in i..N {
                out.hess[i][j] = self.value * rhs.hess[i][j]
                    + rhs.value * self.hess[i][j]
                    + (self.grad[i] * rhs.grad[j] + self.grad[j] * rhs.grad[i]);
            }
        }
        out.mirror();
        out
    }
}

impl<const N: usize> Div for Dual2<N> {
    type Output = Self;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const N: usize> Neg for Dual2<N> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        self.value = -self.value;
        for i in 0..N {
            self.grad[i] = -self.grad[i];
            for j in 0..N {
                self.hess[i][j] = -self.hess[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Add<f64> for Dual2<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: f64) -> Self {
        self.value += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Dual2<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: f64) -> Self {
        self.value -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Dual2<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, rhs: f64) -> Self {
        self.value *= rhs;
        for i in 0..N {
            self.grad[i] *= rhs;
            for j in 0..N {
                self.hess[i][j] *= rhs;
            }
        }
        self
    }
}

impl<const N: usize> Div<f64> for Dual2<N> {
    type Output = Self;
    #[inline]
    fn div(mut self, rhs: f64) -> Self {
        self.value /= rhs;
        for i in 0..N {
            self.grad[i] /= rhs;
            for j in 0..N {
                self.hess[i][j] /= rhs;
            }
        }
        self
    }
}

impl<const N: usize> Scalar for Dual2<N> {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.value))
    }

    fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Dual2::<2>::variable(3.0, 0);
        let y = Dual2::<2>::variable(-2.0, 1);
        let f = x * x * y;
        assert_eq!(f.value, -18.0);
        assert_eq!(f.grad, [-12.0, 9.0]);
        assert_eq!(f.hess, [[-4.0, 6.0], [6.0, 0.0]]);
    }

    #[test]
    fn quotient_and_trig() {
        let x = Dual2::<1>::variable(0.5, 0);
        let f = x.sin() / x;
        let (s, c) = 0.5f64.sin_cos();
        let d1 = (0.5 * c - s) / 0.25;
        let d2 = (-0.25 * s - 2.0 * 0.5 * c + 2.0 * s) / 0.125;
        assert!((f.value - s / 0.5).abs() < 1e-15);
        assert!((f.grad[0] - d1).abs() < 1e-14);
        assert!((f.hess[0][0] - d2).abs() < 1e-13);
    }

    #[test]
    fn sqrt_second_derivative() {
        let x = Dual2::<1>::variable(4.0, 0);
        let f = x.sqrt();
        assert_eq!(f.value, 2.0);
        assert_eq!(f.grad[0], 0.25);
        assert_eq!(f.hess[0][0], -1.0 / 32.0);
    }
}
