//! Complex numbers over any [`Scalar`], so Lagrangians can be written with
//! complex currents and still be differentiated coordinate-wise.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::dual::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx<T> {
    pub re: T,
    pub im: T,
}

impl<T: Scalar> Cx<T> {
    pub fn new(re: T, im: T) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn from_c64(z: Complex64) -> Self {
        Self::new(T::cst(z.re), T::cst(z.im))
    }

    /// `e^{j·angle}`.
    pub fn expj(angle: T) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> T {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.re * k, self.im * k)
    }

    pub fn scale_f(self, k: f64) -> Self {
        Self::new(self.re * k, self.im * k)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl<T: Scalar> Add for Cx<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<T: Scalar> Sub for Cx<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<T: Scalar> Mul for Cx<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re - self.im * rhs.im, self.re * rhs.im + self.im * rhs.re)
    }
}

impl<T: Scalar> Neg for Cx<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_num_complex() {
        let a = Complex64::new(1.5, -0.25);
        let b = Complex64::new(-3.0, 2.0);
        let p = Cx::<f64>::from_c64(a) * Cx::from_c64(b);
        assert_eq!(p.value(), a * b);
        assert_eq!(Cx::<f64>::from_c64(a).norm_sqr(), a.norm_sqr());
        let e = Cx::<f64>::expj(0.7).value();
        assert!((e - Complex64::from_polar(1.0, 0.7)).norm() < 1e-16);
    }
}
